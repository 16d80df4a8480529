//! State-vector evolution of the walk over position, fusion and coin.
//!
//! Strands are ordered by position. With the walker at site `s` every island
//! `r < s` lies to its left, so moving right from `s` exchanges the walker with
//! island `s` and moving left exchanges it with island `s - 1`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{fusion_dimension, relabel_cycle_word, BraidWord, FusionSpace, Generator};
use crate::models::AnyonModel;
use crate::observables::PositionDistribution;

/// One GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[serde(rename = "infinite")]
    InfiniteWindow,
    Periodic,
    Reflective,
    Absorbing,
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "infinite" | "infinite-window" | "line" => Ok(Boundary::InfiniteWindow),
            "periodic" => Ok(Boundary::Periodic),
            "reflective" => Ok(Boundary::Reflective),
            "absorbing" => Ok(Boundary::Absorbing),
            other => Err(Error::InvalidConfig(format!("unknown boundary {other:?}"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Boundary::InfiniteWindow => "infinite",
            Boundary::Periodic => "periodic",
            Boundary::Reflective => "reflective",
            Boundary::Absorbing => "absorbing",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    Plat,
    Markov,
}

impl FromStr for Closure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plat" => Ok(Closure::Plat),
            "markov" => Ok(Closure::Markov),
            other => Err(Error::InvalidConfig(format!("unknown closure {other:?}"))),
        }
    }
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Closure::Plat => "plat",
            Closure::Markov => "markov",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub model: AnyonModel,
    /// Number of bulk sites `1..=N`; `None` for the infinite line.
    pub sites: Option<usize>,
    pub s0: i64,
    pub c0: u8,
    pub t_max: usize,
    pub boundary: Boundary,
    pub closure: Closure,
    pub memory_budget: u64,
}

impl WalkConfig {
    pub fn line(model: AnyonModel, t_max: usize) -> Self {
        WalkConfig {
            model,
            sites: None,
            s0: 0,
            c0: 0,
            t_max,
            boundary: Boundary::InfiniteWindow,
            closure: Closure::Plat,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }

    pub fn chain(
        model: AnyonModel,
        sites: usize,
        s0: i64,
        t_max: usize,
        boundary: Boundary,
    ) -> Self {
        WalkConfig {
            model,
            sites: Some(sites),
            s0,
            c0: 0,
            t_max,
            boundary,
            closure: Closure::Plat,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }

    pub fn with_closure(mut self, closure: Closure) -> Self {
        self.closure = closure;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.c0 > 1 {
            return Err(Error::InvalidConfig(format!(
                "coin {} is not 0 or 1",
                self.c0
            )));
        }
        match (self.boundary, self.sites) {
            (Boundary::InfiniteWindow, None) => {}
            (Boundary::InfiniteWindow, Some(_)) => {
                return Err(Error::InvalidConfig(
                    "infinite window takes no site count".into(),
                ))
            }
            (_, None) => {
                return Err(Error::InvalidConfig(
                    "finite boundary needs a site count".into(),
                ))
            }
            (b, Some(n)) => {
                let min = if b == Boundary::Periodic { 3 } else { 2 };
                if n < min {
                    return Err(Error::InvalidConfig(format!(
                        "{n} sites is too few for {b}"
                    )));
                }
                if self.s0 < 1 || self.s0 > n as i64 {
                    return Err(Error::InvalidConfig(format!(
                        "s0 = {} outside 1..={n}",
                        self.s0
                    )));
                }
            }
        }
        let (required, formula) = required_bytes(self);
        if required > self.memory_budget as u128 {
            return Err(Error::MemoryBudget {
                required,
                budget: self.memory_budget,
                formula,
            });
        }
        Ok(())
    }
}

/// Braiding strand count and position range of the infinite-window plat
/// register after `t` steps. Positions are `s - s0` for the walker, pairs
/// are `(2i, 2i + 1)`.
fn line_register(t: usize) -> (i64, i64) {
    let t = t.max(1) as i64;
    let lo = 2 * (-t).div_euclid(2);
    let hi = 2 * t.div_euclid(2) + 1;
    (lo, hi)
}

fn braiding_strands(cfg: &WalkConfig) -> usize {
    match (cfg.boundary, cfg.sites) {
        (Boundary::InfiniteWindow, _) => match cfg.closure {
            Closure::Plat => {
                let (lo, hi) = line_register(cfg.t_max);
                (hi - lo + 1) as usize
            }
            Closure::Markov => 2 * cfg.t_max + 1,
        },
        (Boundary::Periodic, Some(n)) => n + 1,
        (_, Some(n)) => n,
        (_, None) => 0,
    }
}

fn register_strands(cfg: &WalkConfig) -> usize {
    let n = braiding_strands(cfg);
    match cfg.closure {
        Closure::Markov => 2 * n,
        Closure::Plat => n + n % 2,
    }
}

fn site_count(cfg: &WalkConfig) -> usize {
    match (cfg.boundary, cfg.sites) {
        (Boundary::InfiniteWindow, _) => 2 * cfg.t_max + 1,
        (Boundary::Periodic, Some(n)) => n,
        (_, Some(n)) => n + 2,
        (_, None) => 0,
    }
}

/// Storage for the largest state: `sites * dim * 2` amplitudes of 16 bytes.
/// On the infinite line with `k = 2` this is `(2t+1) 2^{m(t)} 2` amplitudes.
pub fn required_bytes(cfg: &WalkConfig) -> (u128, String) {
    let strands = register_strands(cfg);
    let dim = fusion_dimension(&cfg.model, strands);
    let sites = site_count(cfg) as u128;
    let formula =
        format!("{sites} sites x {dim} fusion states x 2 coins x 16 bytes ({strands} strands)");
    (sites * dim * 2 * 16, formula)
}

#[derive(Clone, Debug)]
struct Register {
    space: FusionSpace,
    /// Position of local strand 1 (infinite plat only).
    lo: i64,
}

/// Amplitudes over (site, fusion, coin). Each occupied site holds
/// `[coin 0 fusion vector, coin 1 fusion vector]`.
#[derive(Clone, Debug)]
pub struct WalkState {
    cfg: WalkConfig,
    register: Register,
    first_site: i64,
    amps: Vec<Option<Vec<C64>>>,
    absorbed: [f64; 2],
    t: usize,
}

impl WalkState {
    pub fn new(cfg: WalkConfig) -> Result<Self> {
        cfg.validate()?;
        let (register, phi0) = match (cfg.boundary, cfg.closure) {
            (Boundary::InfiniteWindow, Closure::Plat) => {
                let space = FusionSpace::new(cfg.model, 2)?;
                let v = space.vacuum_state();
                (Register { space, lo: 0 }, v)
            }
            (_, Closure::Plat) => {
                let space = FusionSpace::new(cfg.model, register_strands(&cfg))?;
                let v = space.vacuum_state();
                (Register { space, lo: 1 }, v)
            }
            (_, Closure::Markov) => {
                let space = FusionSpace::new(cfg.model, register_strands(&cfg))?;
                let v = space.markov_state()?;
                (Register { space, lo: 0 }, v)
            }
        };
        let first_site = match cfg.boundary {
            Boundary::InfiniteWindow => cfg.s0 - cfg.t_max as i64,
            Boundary::Periodic => 1,
            _ => 0,
        };
        let mut amps = vec![None; site_count(&cfg)];
        let dim = register.space.dim();
        let mut v = vec![C64::new(0.0, 0.0); 2 * dim];
        let off = cfg.c0 as usize * dim;
        v[off..off + dim].copy_from_slice(&phi0);
        amps[(cfg.s0 - first_site) as usize] = Some(v);
        Ok(WalkState {
            cfg,
            register,
            first_site,
            amps,
            absorbed: [0.0; 2],
            t: 0,
        })
    }

    pub fn config(&self) -> &WalkConfig {
        &self.cfg
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn fusion_space(&self) -> &FusionSpace {
        &self.register.space
    }

    /// Fusion qubits currently instantiated (`k = 2` layouts).
    pub fn active_qubits(&self) -> Option<usize> {
        self.register.space.qubit_count()
    }

    pub fn first_site(&self) -> i64 {
        self.first_site
    }

    /// Fusion-coin amplitudes at a site, coin-major.
    pub fn site_amplitudes(&self, site: i64) -> Option<&[C64]> {
        let i = site - self.first_site;
        if i < 0 {
            return None;
        }
        self.amps.get(i as usize).and_then(|v| v.as_deref())
    }

    /// Absorbed mass at the left and right boundary.
    pub fn absorbed(&self) -> [f64; 2] {
        self.absorbed
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps
            .iter()
            .flatten()
            .map(|v| v.iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum()
    }

    fn is_ancilla(&self, site: i64) -> bool {
        match (self.cfg.boundary, self.cfg.sites) {
            (Boundary::Reflective | Boundary::Absorbing, Some(n)) => {
                site == 0 || site == n as i64 + 1
            }
            _ => false,
        }
    }

    pub fn coin_flip(&mut self) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let first = self.first_site;
        let cfg_anc: Vec<bool> = (0..self.amps.len())
            .map(|i| self.is_ancilla(first + i as i64))
            .collect();
        self.amps
            .par_iter_mut()
            .zip(cfg_anc.par_iter())
            .for_each(|(slot, &anc)| {
                if anc {
                    return;
                }
                if let Some(v) = slot {
                    let dim = v.len() / 2;
                    let (c0, c1) = v.split_at_mut(dim);
                    for (a, b) in c0.iter_mut().zip(c1.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = (x + y) * h;
                        *b = (x - y) * h;
                    }
                }
            });
    }

    fn gap_generator(&self, gap: i64) -> Generator {
        match (self.cfg.boundary, self.cfg.closure) {
            (Boundary::InfiniteWindow, Closure::Plat) => {
                Generator::new((gap - self.register.lo + 1) as usize)
            }
            (Boundary::InfiniteWindow, Closure::Markov) => {
                Generator::new((gap + self.cfg.t_max as i64 + 1) as usize)
            }
            _ => Generator::new(gap as usize),
        }
    }

    /// Target site, target coin and fusion word for the amplitude of `coin`
    /// at `site`, after the coin flip.
    fn transition(&self, site: i64, coin: u8) -> (i64, u8, BraidWord) {
        let word = |gens: Vec<Generator>| BraidWord::new(gens);
        match (self.cfg.boundary, self.cfg.sites) {
            (Boundary::InfiniteWindow, _) => {
                let z = site - self.cfg.s0;
                if coin == 0 {
                    (site - 1, 0, word(vec![self.gap_generator(z - 1)]))
                } else {
                    (site + 1, 1, word(vec![self.gap_generator(z)]))
                }
            }
            (Boundary::Periodic, Some(n)) => {
                let n = n as i64;
                let relabel = relabel_cycle_word(n as usize + 1);
                match (coin, site) {
                    (0, 1) => (
                        n,
                        0,
                        word(vec![Generator::new(n as usize)]).then_after(&relabel.inverse()),
                    ),
                    (0, s) => (s - 1, 0, word(vec![Generator::new(s as usize - 1)])),
                    (_, s) if s == n => (
                        1,
                        1,
                        relabel.then_after(&word(vec![Generator::new(n as usize)])),
                    ),
                    (_, s) => (s + 1, 1, word(vec![Generator::new(s as usize)])),
                }
            }
            (_, Some(n)) => {
                let n = n as i64;
                match (coin, site) {
                    // reflection off the ancilla, coin flipped, no Hadamard
                    (c, 0) => (1, 1 - c, BraidWord::default()),
                    (c, s) if s == n + 1 => (n, 1 - c, BraidWord::default()),
                    (0, 1) => (0, 0, BraidWord::default()),
                    (0, s) => (s - 1, 0, word(vec![Generator::new(s as usize - 1)])),
                    (_, s) if s == n => (n + 1, 1, BraidWord::default()),
                    (_, s) => (s + 1, 1, word(vec![Generator::new(s as usize)])),
                }
            }
            (_, None) => unreachable!("validated"),
        }
    }

    /// Grows the infinite-window plat register to cover positions reachable
    /// in the next step.
    fn ensure_register(&mut self) -> Result<()> {
        if !(self.cfg.boundary == Boundary::InfiniteWindow && self.cfg.closure == Closure::Plat) {
            return Ok(());
        }
        let (lo, hi) = line_register(self.t + 1);
        let cur_lo = self.register.lo;
        let cur_hi = cur_lo + self.register.space.strands() as i64 - 1;
        if lo >= cur_lo && hi <= cur_hi {
            return Ok(());
        }
        let strands = (hi - lo + 1) as usize;
        let space = FusionSpace::new(self.cfg.model, strands)?;
        let map = space.embedding_from(&self.register.space, ((cur_lo - lo) / 2) as usize)?;
        let (old_dim, new_dim) = (self.register.space.dim(), space.dim());
        self.amps.par_iter_mut().for_each(|slot| {
            if let Some(v) = slot {
                let mut w = vec![C64::new(0.0, 0.0); 2 * new_dim];
                for c in 0..2 {
                    for (i, &j) in map.iter().enumerate() {
                        w[c * new_dim + j] = v[c * old_dim + i];
                    }
                }
                *v = w;
            }
        });
        self.register = Register { space, lo };
        Ok(())
    }

    pub fn conditional_braid_shift(&mut self) -> Result<()> {
        self.ensure_register()?;
        let dim = self.register.space.dim();
        let first = self.first_site;
        let len = self.amps.len() as i64;
        let occupied: Vec<(i64, &Vec<C64>)> = self
            .amps
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|v| (first + i as i64, v)))
            .collect();
        let moved: Vec<(i64, u8, Vec<C64>)> = occupied
            .par_iter()
            .flat_map_iter(|&(site, v)| {
                (0..2u8).map(move |c| (site, c, &v[c as usize * dim..(c as usize + 1) * dim]))
            })
            .map(|(site, coin, part)| {
                let (target, tcoin, word) = self.transition(site, coin);
                let mut w = part.to_vec();
                self.register.space.apply_braid_word(&mut w, &word)?;
                Ok((target, tcoin, w))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next: Vec<Option<Vec<C64>>> = vec![None; self.amps.len()];
        for (target, coin, w) in moved {
            if w.iter().all(|a| *a == C64::new(0.0, 0.0)) {
                continue;
            }
            let i = target - first;
            if i < 0 || i >= len {
                return Err(Error::InvalidConfig(format!(
                    "site {target} left the window"
                )));
            }
            let slot = next[i as usize].get_or_insert_with(|| vec![C64::new(0.0, 0.0); 2 * dim]);
            let off = coin as usize * dim;
            for (a, b) in slot[off..off + dim].iter_mut().zip(&w) {
                *a += *b;
            }
        }
        self.amps = next;
        if self.cfg.boundary == Boundary::Absorbing {
            let n = self.cfg.sites.unwrap() as i64;
            for (side, site) in [(0usize, 0i64), (1, n + 1)] {
                if let Some(v) = self.amps[(site - first) as usize].take() {
                    self.absorbed[side] += v.iter().map(|a| a.norm_sqr()).sum::<f64>();
                }
            }
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        if self.t >= self.cfg.t_max && self.cfg.boundary == Boundary::InfiniteWindow {
            return Err(Error::InvalidConfig(format!(
                "step {} exceeds the window sized for t_max = {}",
                self.t + 1,
                self.cfg.t_max
            )));
        }
        self.coin_flip();
        self.conditional_braid_shift()?;
        self.t += 1;
        Ok(())
    }

    pub fn position_distribution(&self) -> PositionDistribution {
        let p = self
            .amps
            .iter()
            .map(|v| {
                v.as_ref()
                    .map_or(0.0, |v| v.iter().map(|a| a.norm_sqr()).sum())
            })
            .collect();
        PositionDistribution::new(self.t, self.first_site, p)
    }
}

/// Distributions for `t = 0..=t_max`, plus cumulative absorbed mass when
/// the boundary absorbs.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub dists: Vec<PositionDistribution>,
    pub absorbed: Option<Vec<f64>>,
}

pub fn evolve(cfg: &WalkConfig) -> Result<Trajectory> {
    let mut state = WalkState::new(cfg.clone())?;
    let absorbing = cfg.boundary == Boundary::Absorbing;
    let mut dists = vec![state.position_distribution()];
    let mut absorbed = vec![0.0];
    for _ in 0..cfg.t_max {
        state.step()?;
        dists.push(state.position_distribution());
        let a = state.absorbed();
        absorbed.push(a[0] + a[1]);
    }
    Ok(Trajectory {
        dists,
        absorbed: absorbing.then_some(absorbed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_splits() {
        let mut st = WalkState::new(WalkConfig::line(AnyonModel::Ising, 3)).unwrap();
        st.step().unwrap();
        let p = st.position_distribution();
        assert!((p.get(-1) - 0.5).abs() < 1e-15);
        assert!((p.get(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trivial_two_steps() {
        let tr = evolve(&WalkConfig::line(AnyonModel::trivial(), 2)).unwrap();
        let p = &tr.dists[2];
        assert!((p.get(-2) - 0.25).abs() < 1e-15);
        assert!((p.get(0) - 0.5).abs() < 1e-15);
        assert!((p.get(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn coin_flip_twice_is_identity() {
        let mut st = WalkState::new(WalkConfig::line(AnyonModel::SU2k(3), 2)).unwrap();
        let before = st.site_amplitudes(0).unwrap().to_vec();
        st.coin_flip();
        let once = st.site_amplitudes(0).unwrap().to_vec();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((once[0].re - h).abs() < 1e-15 && (once[1].re - h).abs() < 1e-15);
        st.coin_flip();
        let after = st.site_amplitudes(0).unwrap();
        for (a, b) in before.iter().zip(after) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn register_grows_with_light_cone() {
        let mut st = WalkState::new(WalkConfig::line(AnyonModel::Ising, 8)).unwrap();
        let mut last = 0;
        for _ in 0..8 {
            st.step().unwrap();
            let q = st.active_qubits().unwrap();
            assert!(q >= last);
            last = q;
        }
        assert_eq!(last, 8);
    }

    #[test]
    fn memory_budget_reports_size() {
        let mut cfg = WalkConfig::line(AnyonModel::Ising, 24);
        cfg.memory_budget = 1 << 20;
        match WalkState::new(cfg) {
            Err(Error::MemoryBudget { required, .. }) => {
                assert_eq!(required, 49u128 * (1u128 << 24) * 2 * 16);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = WalkConfig::chain(AnyonModel::Ising, 12, 13, 10, Boundary::Absorbing);
        assert!(cfg.validate().is_err());
        cfg.s0 = 6;
        assert!(cfg.validate().is_ok());
        cfg.sites = None;
        assert!(cfg.validate().is_err());
    }
}
