//! Linear entropy generated when the edge anyons of two three-anyon fusion
//! trees are exchanged twice.
//!
//! Six spin-1/2 anyons fuse to vacuum along the sequential path
//! `(0, 1, x, T, y, 1, 0)` (doubled spins). `x` is the internal label of the
//! left tree, `y` that of the right tree and `T` the charge of each tree.
//! `T = 1` spans the two-qubit space, `T = 3` is the single leakage state.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::{FusionSpace, Generator};
use crate::models::{qint, AnyonModel};

/// `225 pi^2 / 64`.
pub const ASYMPTOTE: f64 = 225.0 * PI * PI / 64.0;

/// Labels `(x, T, y)` in the order stored by [`TwoTreeState`].
pub const SECTORS: [(u8, u8, u8); 5] = [(0, 1, 0), (0, 1, 2), (2, 1, 0), (2, 1, 2), (2, 3, 2)];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoTreeState {
    pub k: u32,
    /// Amplitudes over [`SECTORS`]; labels above `k` stay zero.
    pub amps: [C64; 5],
}

impl TwoTreeState {
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn leakage(&self) -> f64 {
        self.amps[4].norm_sqr()
    }

    fn path(sector: (u8, u8, u8)) -> [u8; 7] {
        [0, 1, sector.0, sector.1, sector.2, 1, 0]
    }
}

/// Coefficients `(F)_{0,0}` and `(F)_{0,1}` of the spin-1/2 F-matrix:
/// `1/d` and `sqrt(d^2 - 1)/d`.
pub fn tree_coefficients(k: u32) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::ZeroLevel);
    }
    let d = qint(2, k);
    Ok((1.0 / d, (d * d - 1.0).max(0.0).sqrt() / d))
}

/// `(alpha|0> + beta|1>)_i (alpha|0> + beta|1>)_j` with `|0>`, `|1>` the
/// internal labels 0 and 2.
pub fn initial_two_tree_state(k: u32) -> Result<TwoTreeState> {
    let (alpha, beta) = tree_coefficients(k)?;
    let c = |x: u8| if x == 0 { alpha } else { beta };
    let mut amps = [C64::new(0.0, 0.0); 5];
    for (i, &(x, t, y)) in SECTORS.iter().enumerate().take(4) {
        if t == 1 && (x as u32) <= k && (y as u32) <= k {
            amps[i] = C64::new(c(x) * c(y), 0.0);
        }
    }
    Ok(TwoTreeState { k, amps })
}

/// Applies `b_3^2`, exchanging anyons 3 and 4 twice.
pub fn double_braid(state: &TwoTreeState) -> Result<TwoTreeState> {
    let space = FusionSpace::new(AnyonModel::SU2k(state.k), 6)?;
    let mut v = vec![C64::new(0.0, 0.0); space.dim()];
    let mut slots = [None; 5];
    for (i, &s) in SECTORS.iter().enumerate() {
        if let Some(idx) = space.index_of(&TwoTreeState::path(s)) {
            v[idx] = state.amps[i];
            slots[i] = Some(idx);
        } else if state.amps[i] != C64::new(0.0, 0.0) {
            return Err(Error::InvalidConfig(format!(
                "label {s:?} not allowed at k = {}",
                state.k
            )));
        }
    }
    space.apply_generator(&mut v, Generator::new(3))?;
    space.apply_generator(&mut v, Generator::new(3))?;
    let mut amps = [C64::new(0.0, 0.0); 5];
    for (i, slot) in slots.iter().enumerate() {
        if let Some(idx) = slot {
            amps[i] = v[*idx];
        }
    }
    Ok(TwoTreeState { k: state.k, amps })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Tree {
    Left,
    Right,
}

/// Unnormalized reduced density matrix of one tree after projecting onto
/// `T = 1`.
pub fn reduced_density(state: &TwoTreeState, keep: Tree) -> [[C64; 2]; 2] {
    let amp = |x: usize, y: usize| state.amps[2 * x + y];
    let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for o in 0..2 {
                rho[a][b] += match keep {
                    Tree::Left => amp(a, o) * amp(b, o).conj(),
                    Tree::Right => amp(o, a) * amp(o, b).conj(),
                };
            }
        }
    }
    rho
}

/// `Q = 2 (1 - Tr rho^2 / (Tr rho)^2)`.
pub fn linear_entropy_of(rho: &[[C64; 2]; 2]) -> Result<f64> {
    let tr = (rho[0][0] + rho[1][1]).re;
    if tr <= 1e-300 {
        return Err(Error::ZeroProjection);
    }
    let mut tr2 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            tr2 += (rho[a][b] * rho[b][a]).re;
        }
    }
    Ok(2.0 * (1.0 - tr2 / (tr * tr)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub k: u32,
    /// Entropy of the left tree.
    pub q: f64,
    /// Same quantity with the left tree traced out instead.
    pub q_other: f64,
    pub leakage: f64,
    pub k2q: f64,
    pub asymptote: f64,
    pub relative_deviation: f64,
}

pub fn linear_entropy(state: &TwoTreeState) -> Result<EntropyReport> {
    let q = linear_entropy_of(&reduced_density(state, Tree::Left))?;
    let q_other = linear_entropy_of(&reduced_density(state, Tree::Right))?;
    let k2q = (state.k as f64).powi(2) * q;
    Ok(EntropyReport {
        k: state.k,
        q,
        q_other,
        leakage: state.leakage(),
        k2q,
        asymptote: ASYMPTOTE,
        relative_deviation: (k2q - ASYMPTOTE).abs() / ASYMPTOTE,
    })
}

pub fn entropy_at(k: u32) -> Result<EntropyReport> {
    linear_entropy(&double_braid(&initial_two_tree_state(k)?)?)
}

pub fn entropy_sweep(ks: &[u32]) -> Result<Vec<EntropyReport>> {
    ks.par_iter().map(|&k| entropy_at(k)).collect()
}
