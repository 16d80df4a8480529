//! Walk probabilities as sums over pairs of trajectories, with the anyonic
//! overlap of each pair evaluated either in the fusion space or as the
//! Kauffman bracket of the closed braid.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::{BraidWord, FusionSpace, Generator};
use crate::models::AnyonModel;
use crate::observables::PositionDistribution;
use crate::walk::Closure;

pub const DEFAULT_PATH_CAP: usize = 8;
pub const CROSSING_CAP: usize = 24;
pub const TRACE_STRAND_CAP: usize = 8;

/// Moves `a_1..a_t`, 0 for left and 1 for right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PathVector(Vec<u8>);

impl PathVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidConfig(format!("invalid path {bits:?}")));
        }
        Ok(PathVector(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Displacement `2 sum a_j - t`.
    pub fn displacement(&self) -> i64 {
        2 * self.0.iter().map(|&b| b as i64).sum::<i64>() - self.0.len() as i64
    }

    pub fn last(&self) -> u8 {
        *self.0.last().unwrap()
    }
}

/// All `2^t` paths, bit `j` of the counter giving move `j + 1`.
pub fn all_paths(t: usize) -> Vec<PathVector> {
    (0..1usize << t)
        .map(|m| PathVector((0..t).map(|j| ((m >> j) & 1) as u8).collect()))
        .collect()
}

/// Number of consecutive right moves, `sum a_j a_{j+1}`.
pub fn z_count(a: &PathVector) -> usize {
    a.0.windows(2).filter(|w| w[0] == 1 && w[1] == 1).count()
}

/// Braid word of a path for a walker starting on strand `s0`. A right move
/// from strand `p` exchanges it with `p + 1` through `b_p`, a left move
/// through `b_{p-1}`. The first move is the last element of the word.
pub fn braid_word_for_path(a: &PathVector, s0: usize, strands: usize) -> Result<BraidWord> {
    let mut p = s0 as i64;
    let mut gens = Vec::with_capacity(a.len());
    for &bit in &a.0 {
        let idx = if bit == 1 { p } else { p - 1 };
        if idx < 1 || idx as usize >= strands {
            return Err(Error::GeneratorOutOfRange {
                index: idx.max(0) as usize,
                max: strands.saturating_sub(1),
            });
        }
        gens.push(Generator::new(idx as usize));
        p += if bit == 1 { 1 } else { -1 };
    }
    gens.reverse();
    Ok(BraidWord::new(gens))
}

pub fn writhe(word: &BraidWord) -> i64 {
    word.writhe()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }

    fn components(&mut self) -> usize {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// State sum of the closed braid diagram. A generator `b_i` smooths to the
/// identity with weight `A^{-1}` and to the cup-cap with weight `A`; the
/// inverse swaps the two weights. Loops are weighted by `-A^2 - A^{-2}`.
fn bracket_state_sum(word: &BraidWord, strands: usize, a: C64, closure: Closure) -> Result<C64> {
    let c = word.len();
    if c > CROSSING_CAP {
        return Err(Error::CrossingCapExceeded {
            crossings: c,
            cap: CROSSING_CAP,
        });
    }
    if word.max_index() >= strands {
        return Err(Error::GeneratorOutOfRange {
            index: word.max_index(),
            max: strands - 1,
        });
    }
    if closure == Closure::Plat && strands % 2 == 1 {
        return Err(Error::OddStrandCount(strands));
    }
    let delta = -a * a - (a * a).inv();
    let node = |level: usize, pos: usize| level * strands + pos;
    // level 0 is below the first acting generator
    let gens: Vec<Generator> = word.0.iter().rev().copied().collect();
    let total: C64 = (0u32..1 << c)
        .into_par_iter()
        .map(|state| {
            let mut uf = UnionFind::new((c + 1) * strands);
            let mut weight = C64::new(1.0, 0.0);
            for (level, g) in gens.iter().enumerate() {
                let i = g.index - 1;
                let cup = (state >> level) & 1 == 1;
                weight *= if cup != g.inverse { a } else { a.inv() };
                for p in 0..strands {
                    if p != i && p != i + 1 {
                        uf.union(node(level, p), node(level + 1, p));
                    }
                }
                if cup {
                    uf.union(node(level, i), node(level, i + 1));
                    uf.union(node(level + 1, i), node(level + 1, i + 1));
                } else {
                    uf.union(node(level, i), node(level + 1, i));
                    uf.union(node(level, i + 1), node(level + 1, i + 1));
                }
            }
            match closure {
                Closure::Markov => {
                    for p in 0..strands {
                        uf.union(node(0, p), node(c, p));
                    }
                }
                Closure::Plat => {
                    for p in (0..strands).step_by(2) {
                        uf.union(node(0, p), node(0, p + 1));
                        uf.union(node(c, p), node(c, p + 1));
                    }
                }
            }
            let loops = uf.components();
            weight * delta.powi(loops as i32 - 1)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total)
}

/// Bracket of the Markov closure, normalized so that the unknot is 1.
pub fn kauffman_bracket(word: &BraidWord, strands: usize, a: C64) -> Result<C64> {
    bracket_state_sum(word, strands, a, Closure::Markov)
}

/// Bracket of the plat closure (adjacent strands capped at both ends).
pub fn plat_bracket(word: &BraidWord, strands: usize, a: C64) -> Result<C64> {
    bracket_state_sum(word, strands, a, Closure::Plat)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkEvaluation {
    pub word: String,
    pub strands: usize,
    pub bracket: C64,
    pub writhe: i64,
    /// `(-A^3)^{w} <L>`, invariant under both Markov moves in this
    /// crossing convention.
    pub jones: C64,
}

pub fn link_evaluation(word: &BraidWord, strands: usize, a: C64) -> Result<LinkEvaluation> {
    let bracket = kauffman_bracket(word, strands, a)?;
    let w = word.writhe();
    Ok(LinkEvaluation {
        word: word.to_string(),
        strands,
        bracket,
        writhe: w,
        jones: bracket * (-a.powi(3)).powi(w as i32),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub word: String,
    pub strands: usize,
    pub model: String,
    pub fusion: C64,
    pub bracket: C64,
    pub bracket_normalized: C64,
    pub difference: f64,
}

/// Fusion-space expectation `<M|B|M>` in the Markov state (each braiding
/// strand paired with an idle partner) against `<L>/d^{N-1}`, where `d` is
/// the bracket loop value.
pub fn verify_trace_identity(
    word: &BraidWord,
    strands: usize,
    model: AnyonModel,
) -> Result<TraceReport> {
    if strands > TRACE_STRAND_CAP {
        return Err(Error::StrandCapExceeded {
            strands,
            cap: TRACE_STRAND_CAP,
        });
    }
    let a = model
        .bracket_variable()
        .ok_or_else(|| Error::InvalidModel(format!("{model} has no bracket variable")))?;
    let bracket = kauffman_bracket(word, strands, a)?;
    let space = FusionSpace::new(model, 2 * strands)?;
    let m = space.markov_state()?;
    let mut v = m.clone();
    space.apply_braid_word(&mut v, word)?;
    let fusion: C64 = m.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
    let delta = -a * a - (a * a).inv();
    let bracket_normalized = bracket / delta.powi(strands as i32 - 1);
    Ok(TraceReport {
        word: word.to_string(),
        strands,
        model: model.to_string(),
        fusion,
        bracket,
        bracket_normalized,
        difference: (fusion - bracket_normalized).norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TraceMethod {
    Fusion,
    Bracket,
}

/// Register used for the window: strand count and the strand of the walker.
fn window_register(t: usize, closure: Closure) -> (usize, usize) {
    match closure {
        Closure::Plat => {
            let t = t.max(1) as i64;
            let lo = 2 * (-t).div_euclid(2);
            let hi = 2 * t.div_euclid(2) + 1;
            ((hi - lo + 1) as usize, (1 - lo) as usize)
        }
        Closure::Markov => (2 * t + 1, t + 1),
    }
}

/// Per-path data: sign, endpoint, last coin and braid word.
struct PathTerm {
    sign: f64,
    end: i64,
    coin: u8,
    word: BraidWord,
}

fn path_terms(t: usize, c0: u8, s0: usize, strands: usize) -> Result<Vec<PathTerm>> {
    all_paths(t)
        .into_iter()
        .map(|a| {
            let z = z_count(&a) + (c0 as usize & a.bits()[0] as usize);
            Ok(PathTerm {
                sign: if z % 2 == 0 { 1.0 } else { -1.0 },
                end: a.displacement(),
                coin: a.last(),
                word: braid_word_for_path(&a, s0, strands)?,
            })
        })
        .collect()
}

/// `p(s0 + x, t)` for every displacement `x`, by summing
/// `(1/2^t) (-1)^{z(a)+z(a')} <Phi0|B_{a'}^dag B_a|Phi0>` over pairs with the
/// same endpoint and final coin. Positions are relative to the start.
pub fn path_sum_distribution(
    model: AnyonModel,
    closure: Closure,
    t: usize,
    c0: u8,
    method: TraceMethod,
) -> Result<PositionDistribution> {
    path_sum_distribution_capped(model, closure, t, c0, method, DEFAULT_PATH_CAP)
}

pub fn path_sum_distribution_capped(
    model: AnyonModel,
    closure: Closure,
    t: usize,
    c0: u8,
    method: TraceMethod,
    cap: usize,
) -> Result<PositionDistribution> {
    if t > cap {
        return Err(Error::PathCapExceeded { t, cap });
    }
    if t == 0 {
        return Ok(PositionDistribution::new(0, 0, vec![1.0]));
    }
    let (braiding, s0) = window_register(t, closure);
    let terms = path_terms(t, c0, s0, braiding)?;

    let overlap: Box<dyn Fn(usize, usize) -> Result<C64> + Sync> = match method {
        TraceMethod::Fusion => {
            let (space, phi0) = match closure {
                Closure::Plat => {
                    let s = FusionSpace::new(model, braiding + braiding % 2)?;
                    let v = s.vacuum_state();
                    (s, v)
                }
                Closure::Markov => {
                    let s = FusionSpace::new(model, 2 * braiding)?;
                    let v = s.markov_state()?;
                    (s, v)
                }
            };
            let vecs: Vec<Vec<C64>> = terms
                .par_iter()
                .map(|term| {
                    let mut v = phi0.clone();
                    space.apply_braid_word(&mut v, &term.word)?;
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            Box::new(move |i, j| {
                Ok(vecs[j]
                    .iter()
                    .zip(&vecs[i])
                    .map(|(x, y)| x.conj() * y)
                    .sum())
            })
        }
        TraceMethod::Bracket => {
            let a = model
                .bracket_variable()
                .ok_or_else(|| Error::InvalidModel(format!("{model} has no bracket variable")))?;
            let delta = -a * a - (a * a).inv();
            let strands = braiding + braiding % 2;
            let words: Vec<BraidWord> = terms.iter().map(|t| t.word.clone()).collect();
            Box::new(move |i, j| {
                let w = words[j].inverse().then_after(&words[i]).free_reduced();
                match closure {
                    Closure::Plat => {
                        Ok(plat_bracket(&w, strands, a)? / delta.powi(strands as i32 / 2 - 1))
                    }
                    Closure::Markov => {
                        Ok(kauffman_bracket(&w, braiding, a)? / delta.powi(braiding as i32 - 1))
                    }
                }
            })
        }
    };

    // the (j, i) term is the conjugate of (i, j), so only i <= j is evaluated
    let mut pairs = Vec::new();
    for i in 0..terms.len() {
        for j in i..terms.len() {
            if terms[i].end == terms[j].end && terms[i].coin == terms[j].coin {
                pairs.push((i, j));
            }
        }
    }
    let values: Vec<(i64, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mult = if i == j { 1.0 } else { 2.0 };
            Ok((
                terms[i].end,
                mult * overlap(i, j)?.re * terms[i].sign * terms[j].sign,
            ))
        })
        .collect::<Result<_>>()?;
    let mut p = vec![0.0; 2 * t + 1];
    for (end, v) in values {
        p[(end + t as i64) as usize] += v;
    }
    let norm = 0.5f64.powi(t as i32);
    let p = p.iter().map(|v| v * norm).collect();
    Ok(PositionDistribution::new(t, -(t as i64), p))
}

/// `p(s, t)` for a walker started at 0 with coin 0.
pub fn path_sum_probability(s: i64, t: usize, model: AnyonModel, closure: Closure) -> Result<f64> {
    Ok(path_sum_distribution(model, closure, t, 0, TraceMethod::Fusion)?.get(s))
}

/// Largest imaginary part of any per-endpoint sum, used to check that the
/// complex summands cancel to a real probability.
pub fn path_sum_imaginary_residue(model: AnyonModel, closure: Closure, t: usize) -> Result<f64> {
    if t > DEFAULT_PATH_CAP {
        return Err(Error::PathCapExceeded {
            t,
            cap: DEFAULT_PATH_CAP,
        });
    }
    let (braiding, s0) = window_register(t, closure);
    let terms = path_terms(t, 0, s0, braiding)?;
    let (space, phi0) = match closure {
        Closure::Plat => {
            let s = FusionSpace::new(model, braiding + braiding % 2)?;
            let v = s.vacuum_state();
            (s, v)
        }
        Closure::Markov => {
            let s = FusionSpace::new(model, 2 * braiding)?;
            let v = s.markov_state()?;
            (s, v)
        }
    };
    let mut sums = vec![C64::new(0.0, 0.0); 2 * t + 1];
    let vecs: Vec<Vec<C64>> = terms
        .iter()
        .map(|term| {
            let mut v = phi0.clone();
            space.apply_braid_word(&mut v, &term.word)?;
            Ok(v)
        })
        .collect::<Result<_>>()?;
    for (i, a) in terms.iter().enumerate() {
        for (j, b) in terms.iter().enumerate() {
            if a.end == b.end && a.coin == b.coin {
                let o: C64 = vecs[j]
                    .iter()
                    .zip(&vecs[i])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                sums[(a.end + t as i64) as usize] += o * a.sign * b.sign;
            }
        }
    }
    Ok(sums.iter().map(|s| s.im.abs()).fold(0.0, f64::max) * 0.5f64.powi(t as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(b: &[u8]) -> PathVector {
        PathVector::new(b.to_vec()).unwrap()
    }

    #[test]
    fn z_count_examples() {
        assert_eq!(z_count(&pv(&[1, 1, 0, 1])), 1);
        assert_eq!(z_count(&pv(&[0; 7])), 0);
        assert_eq!(z_count(&pv(&[1; 7])), 6);
    }

    #[test]
    fn words_follow_exchanges() {
        assert_eq!(
            braid_word_for_path(&pv(&[1]), 4, 8).unwrap(),
            BraidWord::from_indices(&[4])
        );
        assert_eq!(
            braid_word_for_path(&pv(&[0]), 4, 8).unwrap(),
            BraidWord::from_indices(&[3])
        );
        // right then left crosses the same gap twice
        assert_eq!(
            braid_word_for_path(&pv(&[1, 0]), 4, 8).unwrap(),
            BraidWord::from_indices(&[4, 4])
        );
        assert_eq!(braid_word_for_path(&pv(&[0, 0, 1]), 4, 8).unwrap().len(), 3);
        assert!(braid_word_for_path(&pv(&[0]), 1, 8).is_err());
    }

    #[test]
    fn writhe_examples() {
        let w = BraidWord::new(vec![
            Generator::new(1),
            Generator::inv(2),
            Generator::new(1),
        ]);
        assert_eq!(writhe(&w), 1);
        let c = BraidWord::from_indices(&[1, 2, 1, 3]);
        assert_eq!(writhe(&c), 4);
        assert_eq!(writhe(&c.then_after(&c.inverse())), 0);
    }

    #[test]
    fn bracket_examples() {
        let a = C64::from_polar(1.0, 0.37);
        let delta = -a * a - (a * a).inv();
        let empty = BraidWord::default();
        assert!((kauffman_bracket(&empty, 1, a).unwrap() - 1.0).norm() < 1e-14);
        assert!((kauffman_bracket(&empty, 4, a).unwrap() - delta.powi(3)).norm() < 1e-12);
        let hopf = kauffman_bracket(&BraidWord::from_indices(&[1, 1]), 2, a).unwrap();
        assert!((hopf - (-a.powi(4) - a.powi(-4))).norm() < 1e-12);
        // a single crossing closes to an unknot with a curl
        let curl = kauffman_bracket(&BraidWord::from_indices(&[1]), 2, a).unwrap();
        assert!((curl + a.powi(-3)).norm() < 1e-12);
    }

    #[test]
    fn bracket_crossing_cap() {
        let w = BraidWord::from_indices(&[1; 25]);
        assert!(matches!(
            kauffman_bracket(&w, 2, C64::new(1.0, 0.0)),
            Err(Error::CrossingCapExceeded { .. })
        ));
    }

    #[test]
    fn jones_invariant_under_stabilization() {
        let a = C64::from_polar(1.0, -0.21);
        let w = BraidWord::new(vec![
            Generator::new(1),
            Generator::inv(2),
            Generator::new(1),
            Generator::new(2),
        ]);
        let base = link_evaluation(&w, 3, a).unwrap().jones;
        let mut up = w.0.clone();
        up.push(Generator::new(3));
        let mut down = w.0.clone();
        down.insert(0, Generator::inv(3));
        for g in [up, down] {
            let j = link_evaluation(&BraidWord::new(g), 4, a).unwrap().jones;
            assert!((j - base).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_identity_examples() {
        for model in [
            AnyonModel::Ising,
            AnyonModel::SU2k(2),
            AnyonModel::SU2k(3),
            AnyonModel::SU2k(4),
        ] {
            let r = verify_trace_identity(&BraidWord::default(), 3, model).unwrap();
            assert!(
                (r.fusion - 1.0).norm() < 1e-12 && r.difference < 1e-12,
                "{model}"
            );
            let r = verify_trace_identity(&BraidWord::from_indices(&[1, 1]), 2, model).unwrap();
            assert!(r.difference < 1e-12, "{model} {r:?}");
        }
        assert!(verify_trace_identity(&BraidWord::default(), 9, AnyonModel::Ising).is_err());
    }

    #[test]
    fn one_step_is_even_for_all_models() {
        for model in [
            AnyonModel::Ising,
            AnyonModel::SU2k(3),
            AnyonModel::AbelianPhase(1.0),
        ] {
            for closure in [Closure::Plat, Closure::Markov] {
                let d = path_sum_distribution(model, closure, 1, 0, TraceMethod::Fusion).unwrap();
                assert!((d.get(-1) - 0.5).abs() < 1e-14 && (d.get(1) - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn trivial_model_two_steps() {
        let d = path_sum_distribution(
            AnyonModel::trivial(),
            Closure::Plat,
            2,
            0,
            TraceMethod::Fusion,
        )
        .unwrap();
        let want = [0.25, 0.0, 0.5, 0.0, 0.25];
        for (x, w) in d.p.iter().zip(want) {
            assert!((x - w).abs() < 1e-14);
        }
    }

    #[test]
    fn bracket_matches_fusion_short_times() {
        for model in [AnyonModel::Ising, AnyonModel::SU2k(3)] {
            for closure in [Closure::Plat, Closure::Markov] {
                let f = path_sum_distribution(model, closure, 3, 0, TraceMethod::Fusion).unwrap();
                let b = path_sum_distribution(model, closure, 3, 0, TraceMethod::Bracket).unwrap();
                for (x, y) in f.p.iter().zip(&b.p) {
                    assert!((x - y).abs() < 1e-10, "{model} {closure:?} {f:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            path_sum_distribution(AnyonModel::Ising, Closure::Plat, 9, 0, TraceMethod::Fusion),
            Err(Error::PathCapExceeded { .. })
        ));
    }
}
