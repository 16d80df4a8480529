//! Position-space channel obtained from two walk steps with the fusion
//! register and the coin traced out.
//!
//! Every application starts the walker from coin `|0>` and a fresh vacuum
//! register, so the channel is translation invariant. Kraus operators are
//! read off from the Gram matrix of the two-step vectors
//! `v = amp * B|Phi0>`: the vacuum component gives one operator per coin,
//! the rest is orthonormalized by a banded Cholesky factorization, which
//! keeps every remaining operator local.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::{BraidWord, FusionSpace, Generator};
use crate::models::AnyonModel;
use crate::observables::PositionDistribution;
use crate::walk::Closure;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Sites farther apart than this have independent two-step braids.
const BAND: i64 = 6;
const PIVOT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TwoStep {
    LL,
    LR,
    RL,
    RR,
}

impl TwoStep {
    pub const ALL: [TwoStep; 4] = [TwoStep::LL, TwoStep::LR, TwoStep::RL, TwoStep::RR];

    /// Amplitude from coin `|0>` through two Hadamard steps.
    pub fn amplitude(self) -> f64 {
        if self == TwoStep::RR {
            -0.5
        } else {
            0.5
        }
    }

    pub fn coin(self) -> u8 {
        match self {
            TwoStep::LL | TwoStep::RL => 0,
            TwoStep::LR | TwoStep::RR => 1,
        }
    }

    pub fn displacement(self) -> i64 {
        match self {
            TwoStep::LL => -2,
            TwoStep::RR => 2,
            _ => 0,
        }
    }

    /// Gaps crossed from site `x`, in order. Gap `g` lies between `g` and `g + 1`.
    fn gaps(self, x: i64) -> [i64; 2] {
        match self {
            TwoStep::LL => [x - 1, x - 2],
            TwoStep::LR => [x - 1, x - 1],
            TwoStep::RL => [x, x],
            TwoStep::RR => [x, x + 1],
        }
    }

    fn moves_for_coin(c: u8) -> [TwoStep; 2] {
        if c == 0 {
            [TwoStep::LL, TwoStep::RL]
        } else {
            [TwoStep::LR, TwoStep::RR]
        }
    }
}

/// Overlaps `<Phi0| B'^dag B |Phi0>` of two-step braids, evaluated in the
/// smallest register containing both. Sites are displacements from the
/// walker's start; under plat closure the vacuum pairs are `(2i, 2i + 1)`.
struct OverlapOracle {
    model: AnyonModel,
    closure: Closure,
    spaces: Mutex<HashMap<usize, (FusionSpace, Vec<C64>)>>,
}

impl OverlapOracle {
    fn new(model: AnyonModel, closure: Closure) -> Self {
        OverlapOracle {
            model,
            closure,
            spaces: Mutex::new(HashMap::new()),
        }
    }

    fn block(&self, x: i64, mv: TwoStep) -> (i64, i64) {
        let g = mv.gaps(x);
        let (mut lo, mut hi) = (g[0].min(g[1]), g[0].max(g[1]) + 1);
        if self.closure == Closure::Plat {
            lo = 2 * lo.div_euclid(2);
            hi = 2 * hi.div_euclid(2) + 1;
        }
        (lo, hi)
    }

    fn register(&self, braiding: usize) -> Result<(FusionSpace, Vec<C64>)> {
        let mut map = self.spaces.lock().unwrap();
        if let Some(r) = map.get(&braiding) {
            return Ok(r.clone());
        }
        let r = match self.closure {
            Closure::Plat => {
                let s = FusionSpace::new(self.model, braiding)?;
                let v = s.vacuum_state();
                (s, v)
            }
            Closure::Markov => {
                let s = FusionSpace::new(self.model, 2 * braiding)?;
                let v = s.markov_state()?;
                (s, v)
            }
        };
        map.insert(braiding, r.clone());
        Ok(r)
    }

    fn word(&self, x: i64, mv: TwoStep, lo: i64) -> BraidWord {
        let g = mv.gaps(x);
        BraidWord::new(vec![
            Generator::new((g[1] - lo + 1) as usize),
            Generator::new((g[0] - lo + 1) as usize),
        ])
    }

    fn in_register(
        &self,
        lo: i64,
        hi: i64,
        a: (i64, TwoStep),
        b: Option<(i64, TwoStep)>,
    ) -> Result<C64> {
        let (space, phi0) = self.register((hi - lo + 1) as usize)?;
        let mut v = phi0.clone();
        space.apply_braid_word(&mut v, &self.word(a.0, a.1, lo))?;
        let w = match b {
            Some(b) => {
                let mut w = phi0;
                space.apply_braid_word(&mut w, &self.word(b.0, b.1, lo))?;
                w
            }
            None => phi0,
        };
        Ok(w.iter().zip(&v).map(|(x, y)| x.conj() * y).sum())
    }

    fn expectation(&self, x: i64, mv: TwoStep) -> Result<C64> {
        let (lo, hi) = self.block(x, mv);
        self.in_register(lo, hi, (x, mv), None)
    }

    fn overlap(&self, a: (i64, TwoStep), b: (i64, TwoStep)) -> Result<C64> {
        let (la, ha) = self.block(a.0, a.1);
        let (lb, hb) = self.block(b.0, b.1);
        if ha < lb || hb < la {
            return Ok(self.expectation(b.0, b.1)?.conj() * self.expectation(a.0, a.1)?);
        }
        self.in_register(la.min(lb), ha.max(hb), a, Some(b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KrausLabel {
    /// Environment returned to its vacuum.
    Vacuum,
    /// The `n`-th orthonormal excitation of the register.
    Excitation(usize),
}

/// One sparse operator: entries `(output index, input index, value)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KrausOperator {
    pub coin: u8,
    pub label: KrausLabel,
    pub entries: Vec<(usize, usize, C64)>,
}

/// Kraus operators mapping a window of `len` sites starting at
/// `first_site` to the window widened by two sites on each side.
#[derive(Clone, Debug, Serialize)]
pub struct KrausSet {
    pub model: AnyonModel,
    pub closure: Closure,
    pub first_site: i64,
    pub len: usize,
    pub operators: Vec<KrausOperator>,
}

impl KrausSet {
    pub fn output_first_site(&self) -> i64 {
        self.first_site - 2
    }

    pub fn output_len(&self) -> usize {
        self.len + 4
    }

    /// `max |sum E^dag E - 1|` over the input window.
    pub fn completeness_error(&self) -> f64 {
        let n = self.len;
        let mut acc = vec![ZERO; n * n];
        for op in &self.operators {
            let mut by_row: HashMap<usize, Vec<(usize, C64)>> = HashMap::new();
            for &(y, x, v) in &op.entries {
                by_row.entry(y).or_default().push((x, v));
            }
            for row in by_row.values() {
                for &(x1, v1) in row {
                    for &(x2, v2) in row {
                        acc[x1 * n + x2] += v1.conj() * v2;
                    }
                }
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((acc[i * n + j] - want).norm());
            }
        }
        err
    }

    /// Largest `|y - x|` over all operator entries.
    pub fn max_shift(&self) -> i64 {
        self.operators
            .iter()
            .flat_map(|op| op.entries.iter())
            .map(|&(y, x, _)| (y as i64 - 2 - x as i64).abs())
            .max()
            .unwrap_or(0)
    }
}

/// Semidefinite Cholesky of a banded Hermitian matrix stored as
/// `band[i][i - j]` for `j` in `[i - bw, i]`. Columns with vanishing
/// pivots are dropped. Returns the nonzero columns as sparse lists.
fn banded_cholesky(n: usize, bw: usize, g: impl Fn(usize, usize) -> C64) -> Vec<Vec<(usize, C64)>> {
    // l[i][d] holds L[i][i - d]
    let mut l = vec![vec![ZERO; bw + 1]; n];
    let mut keep = vec![false; n];
    for k in 0..n {
        let lo = k.saturating_sub(bw);
        let mut d = g(k, k).re;
        for m in lo..k {
            d -= l[k][k - m].norm_sqr();
        }
        if d <= PIVOT_TOL {
            continue;
        }
        keep[k] = true;
        let piv = d.sqrt();
        l[k][0] = C64::new(piv, 0.0);
        for i in k + 1..(k + bw + 1).min(n) {
            let mut s = g(i, k);
            for m in i.saturating_sub(bw)..k {
                if k - m <= bw {
                    s -= l[i][i - m] * l[k][k - m].conj();
                }
            }
            l[i][i - k] = s / piv;
        }
    }
    (0..n)
        .filter(|&k| keep[k])
        .map(|k| {
            (k..(k + bw + 1).min(n))
                .map(|i| (i, l[i][i - k]))
                .filter(|(_, v)| *v != ZERO)
                .collect()
        })
        .collect()
}

/// Kraus operators of the two-step channel on the sites
/// `first_site .. first_site + len`.
pub fn build_w2_kraus(
    model: AnyonModel,
    closure: Closure,
    first_site: i64,
    len: usize,
) -> Result<KrausSet> {
    model.validate()?;
    if len < 5 {
        return Err(Error::InvalidConfig(format!(
            "channel window of {len} sites, need at least 5"
        )));
    }
    let oracle = OverlapOracle::new(model, closure);
    let mut operators = Vec::new();
    for coin in 0..2u8 {
        let moves = TwoStep::moves_for_coin(coin);
        let vec_site = |i: usize| first_site + (i / 2) as i64;
        let vec_move = |i: usize| moves[i % 2];
        let n = 2 * len;
        // vacuum components and the banded Gram of the remainder
        let u: Vec<C64> = (0..n)
            .map(|i| Ok(oracle.expectation(vec_site(i), vec_move(i))? * vec_move(i).amplitude()))
            .collect::<Result<_>>()?;
        let bw = (2 * BAND + 1) as usize;
        let mut cache: HashMap<(i64, TwoStep, i64, TwoStep), C64> = HashMap::new();
        let mut gperp = vec![vec![ZERO; bw + 1]; n];
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let (xi, mi, xj, mj) = (vec_site(i), vec_move(i), vec_site(j), vec_move(j));
                // translation by an even distance leaves every overlap unchanged
                let shift = 2 * xj.div_euclid(2);
                let key = (xi - shift, mi, xj - shift, mj);
                let o = match cache.get(&key) {
                    Some(&o) => o,
                    None => {
                        let o = oracle.overlap((key.0, mi), (key.2, mj))?;
                        cache.insert(key, o);
                        o
                    }
                };
                gperp[i][i - j] = o * mi.amplitude() * mj.amplitude() - u[i] * u[j].conj();
            }
        }
        let entry = |i: usize, v: C64| {
            (
                (vec_site(i) + vec_move(i).displacement() - first_site + 2) as usize,
                i / 2,
                v,
            )
        };
        operators.push(KrausOperator {
            coin,
            label: KrausLabel::Vacuum,
            entries: (0..n)
                .filter(|&i| u[i] != ZERO)
                .map(|i| entry(i, u[i]))
                .collect(),
        });
        let cols = banded_cholesky(n, bw, |i, j| {
            if i >= j {
                gperp[i][i - j]
            } else {
                gperp[j][j - i].conj()
            }
        });
        for (idx, col) in cols.into_iter().enumerate() {
            operators.push(KrausOperator {
                coin,
                label: KrausLabel::Excitation(idx),
                entries: col.into_iter().map(|(i, v)| entry(i, v)).collect(),
            });
        }
    }
    Ok(KrausSet {
        model,
        closure,
        first_site,
        len,
        operators,
    })
}

/// Density matrix over a contiguous window of sites, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositionDensityMatrix {
    pub first_site: i64,
    pub len: usize,
    pub data: Vec<C64>,
}

impl PositionDensityMatrix {
    pub fn zeros(first_site: i64, len: usize) -> Self {
        PositionDensityMatrix {
            first_site,
            len,
            data: vec![ZERO; len * len],
        }
    }

    pub fn localized(first_site: i64, len: usize, site: i64) -> Self {
        let mut r = Self::zeros(first_site, len);
        let i = (site - first_site) as usize;
        r.data[i * len + i] = C64::new(1.0, 0.0);
        r
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.len + j]
    }

    pub fn trace(&self) -> C64 {
        (0..self.len).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self, t: usize) -> PositionDistribution {
        PositionDistribution::new(
            t,
            self.first_site,
            (0..self.len).map(|i| self.get(i, i).re).collect(),
        )
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..self.len {
            for j in 0..=i {
                e = e.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_fn(self.len, self.len, |i, j| {
            // symmetrize against rounding
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        });
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy onto another window; fails if any discarded entry is nonzero.
    pub fn restrict(&self, first_site: i64, len: usize) -> Result<Self> {
        let mut r = Self::zeros(first_site, len);
        for i in 0..self.len {
            for j in 0..self.len {
                let v = self.get(i, j);
                let (si, sj) = (
                    self.first_site + i as i64 - first_site,
                    self.first_site + j as i64 - first_site,
                );
                if (0..len as i64).contains(&si) && (0..len as i64).contains(&sj) {
                    r.data[si as usize * len + sj as usize] = v;
                } else if v != ZERO {
                    return Err(Error::ShapeMismatch(format!(
                        "entry ({}, {}) outside the target window",
                        self.first_site + i as i64,
                        self.first_site + j as i64
                    )));
                }
            }
        }
        Ok(r)
    }
}

/// `sum_k E_k rho E_k^dag`, parallel over output rows.
pub fn apply_channel(
    rho: &PositionDensityMatrix,
    kraus: &KrausSet,
) -> Result<PositionDensityMatrix> {
    if rho.first_site != kraus.first_site || rho.len != kraus.len {
        return Err(Error::ShapeMismatch(format!(
            "density matrix on {}+{}, channel on {}+{}",
            rho.first_site, rho.len, kraus.first_site, kraus.len
        )));
    }
    let n = rho.len;
    let m = kraus.output_len();
    let live: Vec<bool> = (0..n)
        .map(|i| (0..n).any(|j| rho.get(i, j) != ZERO))
        .collect();
    // entries of each operator, and the operator entries landing on each row
    let mut by_row: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); m];
    for (k, op) in kraus.operators.iter().enumerate() {
        for &(y, x, v) in &op.entries {
            if live[x] {
                by_row[y].push((k, x, v));
            }
        }
    }
    let live_entries: Vec<Vec<(usize, usize, C64)>> = kraus
        .operators
        .iter()
        .map(|op| {
            op.entries
                .iter()
                .copied()
                .filter(|&(_, x, _)| live[x])
                .collect()
        })
        .collect();
    let rows: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|y| {
            let mut row = vec![ZERO; m];
            for &(k, x, v) in &by_row[y] {
                let r = &rho.data[x * n..(x + 1) * n];
                for &(y2, x2, w) in &live_entries[k] {
                    row[y2] += v * r[x2] * w.conj();
                }
            }
            row
        })
        .collect();
    Ok(PositionDensityMatrix {
        first_site: kraus.output_first_site(),
        len: m,
        data: rows.concat(),
    })
}

/// Channel iteration on a fixed window wide enough that nothing reaches the
/// edge: `t_max` applications from the walker's start need `2 t_max` sites
/// on either side.
pub struct ChannelWalk {
    pub kraus: KrausSet,
    pub rho: PositionDensityMatrix,
    pub t: usize,
}

impl ChannelWalk {
    pub fn new(model: AnyonModel, closure: Closure, t_max: usize) -> Result<Self> {
        let r = 2 * t_max as i64 + 2;
        let len = (2 * r + 1) as usize;
        Ok(ChannelWalk {
            kraus: build_w2_kraus(model, closure, -r, len)?,
            rho: PositionDensityMatrix::localized(-r, len, 0),
            t: 0,
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let out = apply_channel(&self.rho, &self.kraus)?;
        self.rho = out.restrict(self.kraus.first_site, self.kraus.len)?;
        self.t += 1;
        Ok(())
    }

    pub fn distribution(&self) -> PositionDistribution {
        self.rho.diagonal(self.t)
    }
}

/// Variance about the start after each of `t_max` channel applications.
pub fn channel_variance_series(
    model: AnyonModel,
    closure: Closure,
    t_max: usize,
) -> Result<Vec<(f64, f64)>> {
    let mut walk = ChannelWalk::new(model, closure, t_max)?;
    let mut out = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        walk.step()?;
        let d = walk.distribution();
        let p: f64 = d.total();
        let m2: f64 = d.sites().map(|(s, p)| p * (s * s) as f64).sum();
        out.push((walk.t as f64, m2 / p));
    }
    Ok(out)
}

/// The channel on a ring, evolved in the momentum representation.
///
/// Sites are restricted to the even sublattice reached from the start. The
/// coherence `rho(x, x - D)` is Fourier transformed in `x`, so every
/// momentum evolves independently under the interior kernel
/// `K(dy, dy', D) = sum_k E_k(x + dy, x) conj(E_k(x - D + dy', x - D))`.
#[derive(Clone, Debug)]
pub struct CirculantModel {
    /// Kernel for `|D| <= reach` (sublattice units), indexed
    /// `[D + reach][dy + 1][dy' + 1]`.
    kernel: Vec<[[C64; 3]; 3]>,
    reach: i64,
}

impl CirculantModel {
    /// Number of sublattice separations with their own kernel entry.
    pub fn reach(&self) -> i64 {
        self.reach
    }

    fn k(&self, d: i64) -> &[[C64; 3]; 3] {
        &self.kernel[(d.clamp(-self.reach, self.reach) + self.reach) as usize]
    }

    /// Distributions at the requested times (ascending) on a ring large
    /// enough that nothing wraps.
    pub fn distributions(&self, times: &[usize]) -> Vec<PositionDistribution> {
        let t_max = times.iter().copied().max().unwrap_or(0);
        let ring = 2 * t_max + 1;
        let dmax = t_max as i64;
        let nd = (2 * dmax + 1) as usize;
        // rho(q, D = 0) at each requested time, per momentum
        let per_q: Vec<Vec<C64>> = (0..ring)
            .into_par_iter()
            .map(|m| {
                let q = 2.0 * std::f64::consts::PI * m as f64 / ring as f64;
                let phase = [
                    C64::from_polar(1.0, q),
                    C64::new(1.0, 0.0),
                    C64::from_polar(1.0, -q),
                ];
                let mut r = vec![ZERO; nd];
                r[dmax as usize] = C64::new(1.0, 0.0);
                let mut snaps = Vec::with_capacity(times.len());
                let mut ti = 0;
                for t in 0..=t_max {
                    while ti < times.len() && times[ti] == t {
                        snaps.push(r[dmax as usize]);
                        ti += 1;
                    }
                    if t == t_max {
                        break;
                    }
                    let mut next = vec![ZERO; nd];
                    for (di, &v) in r.iter().enumerate() {
                        if v == ZERO {
                            continue;
                        }
                        let d = di as i64 - dmax;
                        let k = self.k(d);
                        for dy in -1..=1i64 {
                            for dy2 in -1..=1i64 {
                                let kv = k[(dy + 1) as usize][(dy2 + 1) as usize];
                                let d2 = d + dy - dy2;
                                if kv != ZERO && d2.abs() <= dmax {
                                    next[(d2 + dmax) as usize] += kv * phase[(dy + 1) as usize] * v;
                                }
                            }
                        }
                    }
                    r = next;
                }
                snaps
            })
            .collect();
        times
            .iter()
            .enumerate()
            .map(|(ti, &t)| {
                let first = -2 * t as i64;
                let len = 4 * t + 1;
                let mut p = vec![0.0; len];
                for n in -(t as i64)..=(t as i64) {
                    let mut s = ZERO;
                    for (m, snaps) in per_q.iter().enumerate() {
                        let q = 2.0 * std::f64::consts::PI * m as f64 / ring as f64;
                        s += snaps[ti] * C64::from_polar(1.0, q * n as f64);
                    }
                    p[(2 * n - first) as usize] = s.re / ring as f64;
                }
                PositionDistribution::new(t, first, p)
            })
            .collect()
    }
}

/// Reads the interior kernel off a Kraus set whose window is centered on
/// the walker's start and extends at least `2 * (BAND + 2)` sites each way.
pub fn circulant_variance_model(kraus: &KrausSet) -> Result<CirculantModel> {
    let reach = BAND / 2 + 3;
    let x0 = -kraus.first_site;
    if x0 < 2 * reach + 2 || (kraus.len as i64 - 1 - x0) < 2 * reach + 2 {
        return Err(Error::InvalidConfig(
            "window too small for the interior kernel".into(),
        ));
    }
    let mut cols: HashMap<usize, Vec<(usize, i64, C64)>> = HashMap::new();
    for (k, op) in kraus.operators.iter().enumerate() {
        for &(y, x, v) in &op.entries {
            let dy = (y as i64 - 2 - x as i64) / 2;
            cols.entry(x).or_default().push((k, dy, v));
        }
    }
    let empty = Vec::new();
    let kernel = (-reach..=reach)
        .map(|d| {
            let mut k = [[ZERO; 3]; 3];
            let a = cols.get(&(x0 as usize)).unwrap_or(&empty);
            let b = cols.get(&((x0 - 2 * d) as usize)).unwrap_or(&empty);
            for &(k1, dy, v) in a {
                for &(k2, dy2, w) in b {
                    if k1 == k2 {
                        k[(dy + 1) as usize][(dy2 + 1) as usize] += v * w.conj();
                    }
                }
            }
            k
        })
        .collect();
    Ok(CirculantModel { kernel, reach })
}

/// `p(s, t) = 2^{-t} C(t, (2t - (s - s0)) / 4)`, zero off its support.
pub fn binomial_reference(s: i64, t: usize, s0: i64) -> f64 {
    let num = 2 * t as i64 - (s - s0);
    if num < 0 || num % 4 != 0 || num / 4 > t as i64 {
        return 0.0;
    }
    let j = (num / 4) as usize;
    // log-space for large t
    let ln = ln_choose(t, j) - t as f64 * std::f64::consts::LN_2;
    ln.exp()
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Moves the binomial onto the support of `target`: its mean and standard
/// deviation are mapped onto those of `target`, the resulting point masses
/// are turned into a piecewise-linear density and sampled on the sites of
/// `target` that share the start's parity, then renormalized.
pub fn support_aligned_binomial(
    t: usize,
    s0: i64,
    target: &PositionDistribution,
) -> PositionDistribution {
    let pts: Vec<(f64, f64)> = (0..=t)
        .map(|j| {
            let s = s0 + 2 * t as i64 - 4 * j as i64;
            (s as f64, binomial_reference(s, t, s0))
        })
        .rev()
        .collect();
    let (bm, bv) = moments(pts.iter().copied());
    let (tm, tv) = moments(target.sites().map(|(s, p)| (s as f64, p)));
    let scale = if bv > 0.0 { (tv / bv).sqrt() } else { 1.0 };
    let mapped: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(s, p)| (tm + (s - bm) * scale, p))
        .collect();
    let spacing = 4.0 * scale;
    let density = |x: f64| -> f64 {
        if mapped.len() == 1 {
            return if (x - mapped[0].0).abs() < 1.0 {
                1.0
            } else {
                0.0
            };
        }
        let i = mapped.partition_point(|&(s, _)| s <= x);
        let left = if i == 0 { None } else { Some(mapped[i - 1]) };
        let right = mapped.get(i).copied();
        match (left, right) {
            (Some((xa, pa)), Some((xb, pb))) => {
                let f = (x - xa) / (xb - xa);
                (pa * (1.0 - f) + pb * f) / spacing
            }
            _ => 0.0,
        }
    };
    let mut p: Vec<f64> = target
        .sites()
        .map(|(s, _)| {
            if (s - s0).rem_euclid(2) == 0 {
                density(s as f64)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
    PositionDistribution::new(t, target.first_site, p)
}

fn moments(it: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (s, p) in it {
        w += p;
        m1 += p * s;
        m2 += p * s * s;
    }
    let mean = m1 / w;
    (mean, m2 / w - mean * mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_reference(-2, 1, 0), 0.5);
        assert_eq!(binomial_reference(2, 1, 0), 0.5);
        assert_eq!(binomial_reference(0, 1, 0), 0.0);
        for t in [1usize, 5, 40] {
            let (mut total, mut var) = (0.0, 0.0);
            for s in -2 * t as i64..=2 * t as i64 {
                let p = binomial_reference(s + 3, t, 3);
                assert!((p - binomial_reference(3 - s, t, 3)).abs() < 1e-15);
                total += p;
                var += p * (s * s) as f64;
            }
            assert!((total - 1.0).abs() < 1e-12);
            assert!((var - 4.0 * t as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn cholesky_reconstructs() {
        // vectors supported on coordinates i..i+3, one zero and one repeated
        let n = 9;
        let mut vecs: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n + 3];
                v[i] = 1.0 + i as f64 * 0.1;
                v[i + 1] = 0.5;
                v[i + 2] = -0.3 * (i % 2) as f64;
                v
            })
            .collect();
        vecs[3] = vec![0.0; n + 3];
        vecs[6] = vec![0.0; n + 3];
        vecs[6][6] = 0.5;
        vecs[5] = vec![0.0; n + 3];
        vecs[5][6] = 1.0;
        let g = |i: usize, j: usize| {
            C64::new(
                vecs[i]
                    .iter()
                    .zip(&vecs[j])
                    .map(|(a, b)| a * b)
                    .sum::<f64>(),
                0.0,
            )
        };
        let cols = banded_cholesky(n, 2, g);
        assert_eq!(cols.len(), n - 2);
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for c in &cols {
                    let a = c.iter().find(|e| e.0 == i).map_or(ZERO, |e| e.1);
                    let b = c.iter().find(|e| e.0 == j).map_or(ZERO, |e| e.1);
                    s += a * b.conj();
                }
                assert!((s - g(i, j)).norm() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn window_too_small() {
        assert!(build_w2_kraus(AnyonModel::Ising, Closure::Plat, 0, 4).is_err());
    }
}
