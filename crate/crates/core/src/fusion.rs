//! Fusion space of `N_A` spin-1/2 anyons with vacuum total charge.
//!
//! Two layouts are used. The `k = 2` models store one qubit per even
//! intermediate charge and apply `R`, `B`, `P` with stride loops. All other
//! levels store the admissible paths `j_0 = 0, j_1, ..., j_n = 0` (doubled
//! spins, steps of one, `0 <= j <= k`) and apply each generator as sparse
//! 1x1 and 2x2 blocks.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{qint, AnyonModel, GeneratorCoefficients, LocalBraidMatrices};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub index: usize,
    pub inverse: bool,
}

impl Generator {
    pub fn new(index: usize) -> Self {
        Generator {
            index,
            inverse: false,
        }
    }

    pub fn inv(index: usize) -> Self {
        Generator {
            index,
            inverse: true,
        }
    }

    pub fn inverted(self) -> Self {
        Generator {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "b{}^-1", self.index)
        } else {
            write!(f, "b{}", self.index)
        }
    }
}

/// A braid word stored as an operator product: the last element acts first,
/// so `[b1, b2]` is the operator `b1 b2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord(pub Vec<Generator>);

impl BraidWord {
    pub fn new(gens: Vec<Generator>) -> Self {
        BraidWord(gens)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        BraidWord(indices.iter().map(|&i| Generator::new(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord(self.0.iter().rev().map(|g| g.inverted()).collect())
    }

    /// The operator product `self * other`.
    pub fn then_after(&self, other: &BraidWord) -> BraidWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BraidWord(v)
    }

    /// Cancels adjacent `g g^{-1}` pairs until none remain.
    pub fn free_reduced(&self) -> BraidWord {
        let mut out: Vec<Generator> = Vec::with_capacity(self.0.len());
        for &g in &self.0 {
            if out.last() == Some(&g.inverted()) {
                out.pop();
            } else {
                out.push(g);
            }
        }
        BraidWord(out)
    }

    pub fn max_index(&self) -> usize {
        self.0.iter().map(|g| g.index).max().unwrap_or(0)
    }

    pub fn writhe(&self) -> i64 {
        self.0.iter().map(|g| g.sign()).sum()
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// `B_{N_A -> 1} = b_1 b_2 ... b_{N_A-1}`: carries the last strand to the front.
pub fn relabel_cycle_word(strands: usize) -> BraidWord {
    BraidWord::from_indices(&(1..strands).collect::<Vec<_>>())
}

#[derive(Clone, Debug)]
struct PathBlocks {
    /// Paths with `j_{i-1} != j_{i+1}`, where `e_i` vanishes.
    plain: Vec<u32>,
    singles: Vec<(u32, f64)>,
    /// `(lo, hi, e_ll, e_lh, e_hh)` with `lo` the path through `a - 1`.
    pairs: Vec<(u32, u32, f64, f64, f64)>,
}

#[derive(Clone, Debug)]
enum Layout {
    Scalar(C64),
    Qubits {
        m: usize,
        mats: LocalBraidMatrices,
    },
    Paths {
        paths: Vec<Vec<u8>>,
        index: HashMap<Vec<u8>, u32>,
        blocks: Vec<PathBlocks>,
        coeff: GeneratorCoefficients,
    },
}

#[derive(Clone, Debug)]
pub struct FusionSpace {
    model: AnyonModel,
    strands: usize,
    layout: Layout,
}

/// Number of admissible vacuum-to-vacuum paths on `n` strands at level `k`.
pub fn path_count(n: usize, k: u32) -> u128 {
    let mut v = vec![0u128; k as usize + 1];
    v[0] = 1;
    for _ in 0..n {
        let mut w = vec![0u128; k as usize + 1];
        for (j, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if j > 0 {
                w[j - 1] += c;
            }
            if j < k as usize {
                w[j + 1] += c;
            }
        }
        v = w;
    }
    v[0]
}

/// Dimension of the fusion space of `strands` anyons of `model`.
pub fn fusion_dimension(model: &AnyonModel, strands: usize) -> u128 {
    match model.level() {
        None => 1,
        Some(k) => path_count(strands, k),
    }
}

fn enumerate_paths(n: usize, k: u32) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8];
    fn rec(n: usize, k: u32, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        let pos = cur.len() - 1;
        let j = *cur.last().unwrap() as i64;
        if pos == n {
            if j == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let remaining = (n - pos) as i64;
        for next in [j - 1, j + 1] {
            if next < 0 || next > k as i64 || next > remaining - 1 {
                continue;
            }
            cur.push(next as u8);
            rec(n, k, cur, out);
            cur.pop();
        }
    }
    rec(n, k, &mut cur, &mut out);
    out
}

fn build_blocks(
    paths: &[Vec<u8>],
    index: &HashMap<Vec<u8>, u32>,
    n: usize,
    k: u32,
) -> Vec<PathBlocks> {
    let mut all = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let mut b = PathBlocks {
            plain: Vec::new(),
            singles: Vec::new(),
            pairs: Vec::new(),
        };
        for (idx, p) in paths.iter().enumerate() {
            let (l, x, r) = (p[i - 1], p[i], p[i + 1]);
            if l != r {
                b.plain.push(idx as u32);
                continue;
            }
            let a = l as i64;
            let lo_ok = a >= 1;
            let hi_ok = a < k as i64;
            let ea = qint(a + 1, k);
            if lo_ok && hi_ok {
                if (x as i64) < a {
                    let mut q = p.clone();
                    q[i] = (a + 1) as u8;
                    let hi = index[&q];
                    let (el, eh) = (qint(a, k), qint(a + 2, k));
                    b.pairs
                        .push((idx as u32, hi, el / ea, (el * eh).sqrt() / ea, eh / ea));
                }
            } else {
                b.singles.push((idx as u32, qint(x as i64 + 1, k) / ea));
            }
        }
        all.push(b);
    }
    all
}

impl FusionSpace {
    pub fn new(model: AnyonModel, strands: usize) -> Result<Self> {
        model.validate()?;
        if strands < 2 || strands % 2 == 1 {
            return Err(Error::OddStrandCount(strands));
        }
        let layout = match model {
            AnyonModel::AbelianPhase(_) => Layout::Scalar(model.abelian_phase().unwrap()),
            AnyonModel::Ising | AnyonModel::SU2k(2) => Layout::Qubits {
                m: strands / 2 - 1,
                mats: model.local_matrices().unwrap(),
            },
            AnyonModel::SU2k(k) => {
                let paths = enumerate_paths(strands, k);
                let index: HashMap<Vec<u8>, u32> = paths
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.clone(), i as u32))
                    .collect();
                let blocks = build_blocks(&paths, &index, strands, k);
                Layout::Paths {
                    paths,
                    index,
                    blocks,
                    coeff: model.coefficients()?,
                }
            }
        };
        Ok(FusionSpace {
            model,
            strands,
            layout,
        })
    }

    pub fn model(&self) -> AnyonModel {
        self.model
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn dim(&self) -> usize {
        match &self.layout {
            Layout::Scalar(_) => 1,
            Layout::Qubits { m, .. } => 1usize << m,
            Layout::Paths { paths, .. } => paths.len(),
        }
    }

    /// Number of fusion qubits in the `k = 2` layout.
    pub fn qubit_count(&self) -> Option<usize> {
        match &self.layout {
            Layout::Qubits { m, .. } => Some(*m),
            _ => None,
        }
    }

    /// Doubled-spin labels `j_0..j_n` of a basis state, `None` for Abelian models.
    pub fn path_of(&self, idx: usize) -> Option<Vec<u8>> {
        match &self.layout {
            Layout::Scalar(_) => None,
            Layout::Qubits { m, .. } => {
                let mut p = Vec::with_capacity(self.strands + 1);
                p.push(0);
                for q in 1..=*m {
                    p.push(1);
                    p.push(if (idx >> (m - q)) & 1 == 1 { 2 } else { 0 });
                }
                p.push(1);
                p.push(0);
                Some(p)
            }
            Layout::Paths { paths, .. } => Some(paths[idx].clone()),
        }
    }

    pub fn index_of(&self, path: &[u8]) -> Option<usize> {
        match &self.layout {
            Layout::Scalar(_) => Some(0),
            Layout::Qubits { m, .. } => {
                if path.len() != self.strands + 1 {
                    return None;
                }
                let mut idx = 0usize;
                for (pos, &j) in path.iter().enumerate() {
                    let want_odd = pos % 2 == 1;
                    match (want_odd, j) {
                        (true, 1) => {}
                        (false, 0) => {}
                        (false, 2) if pos != 0 && pos != self.strands => {
                            idx |= 1 << (m - pos / 2);
                        }
                        _ => return None,
                    }
                }
                Some(idx)
            }
            Layout::Paths { index, .. } => index.get(path).map(|&i| i as usize),
        }
    }

    pub fn vacuum_state(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[0] = C64::new(1.0, 0.0);
        if let Layout::Paths { index, .. } = &self.layout {
            v[0] = C64::new(0.0, 0.0);
            let p: Vec<u8> = (0..=self.strands).map(|i| (i % 2) as u8).collect();
            v[index[&p] as usize] = C64::new(1.0, 0.0);
        }
        v
    }

    /// Normalized state in which strand `i` fuses to vacuum with `partner[i]`.
    /// The pairing must be a non-crossing perfect matching (0-based strands).
    pub fn planar_state(&self, partner: &[usize]) -> Result<Vec<C64>> {
        let n = self.strands;
        if partner.len() != n {
            return Err(Error::InvalidPairing);
        }
        for (i, &p) in partner.iter().enumerate() {
            if p >= n || p == i || partner[p] != i {
                return Err(Error::InvalidPairing);
            }
        }
        let Some(k) = self.model.level() else {
            check_noncrossing(partner)?;
            return Ok(vec![C64::new(1.0, 0.0)]);
        };
        let strands: Vec<usize> = (0..n).collect();
        let terms = cup_state(&strands, partner, k)?;
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        for (path, amp) in terms {
            let idx = self.index_of(&path).ok_or(Error::InvalidPairing)?;
            v[idx] += amp;
        }
        Ok(v)
    }

    /// Markov initial state on `2n` strands: braiding strand `i` is paired with
    /// idle strand `2n - 1 - i`.
    pub fn markov_state(&self) -> Result<Vec<C64>> {
        let n = self.strands;
        let partner: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
        self.planar_state(&partner)
    }

    fn check_index(&self, g: Generator) -> Result<()> {
        if g.index == 0 || g.index >= self.strands {
            return Err(Error::GeneratorOutOfRange {
                index: g.index,
                max: self.strands - 1,
            });
        }
        Ok(())
    }

    /// Applies one generator in place.
    pub fn apply_generator(&self, state: &mut [C64], g: Generator) -> Result<()> {
        self.check_index(g)?;
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.len(),
            });
        }
        match &self.layout {
            Layout::Scalar(ph) => {
                let ph = if g.inverse { ph.conj() } else { *ph };
                state[0] *= ph;
            }
            Layout::Qubits { m, mats } => apply_qubit(state, *m, mats, g),
            Layout::Paths { blocks, coeff, .. } => {
                let c = if g.inverse { coeff.inverse() } else { *coeff };
                let b = &blocks[g.index - 1];
                for &i in &b.plain {
                    state[i as usize] *= c.id;
                }
                for &(i, e) in &b.singles {
                    state[i as usize] *= c.id + c.e * e;
                }
                for &(lo, hi, ell, elh, ehh) in &b.pairs {
                    let (x, y) = (state[lo as usize], state[hi as usize]);
                    state[lo as usize] = c.id * x + c.e * (ell * x + elh * y);
                    state[hi as usize] = c.id * y + c.e * (elh * x + ehh * y);
                }
            }
        }
        Ok(())
    }

    /// Applies a word as an operator product (last generator acts first).
    pub fn apply_braid_word(&self, state: &mut [C64], word: &BraidWord) -> Result<()> {
        for g in &word.0 {
            self.check_index(*g)?;
        }
        for g in word.0.iter().rev() {
            self.apply_generator(state, *g)?;
        }
        Ok(())
    }

    /// Index map from a smaller register into this one, padding
    /// `left_pairs` vacuum pairs on the left and the rest on the right.
    pub fn embedding_from(&self, smaller: &FusionSpace, left_pairs: usize) -> Result<Vec<usize>> {
        let extra = self
            .strands
            .checked_sub(smaller.strands)
            .ok_or(Error::DimensionMismatch {
                expected: smaller.strands,
                got: self.strands,
            })?;
        if extra % 2 == 1 || 2 * left_pairs > extra {
            return Err(Error::OddStrandCount(extra));
        }
        let right_pairs = extra / 2 - left_pairs;
        if self.model.is_abelian() {
            return Ok(vec![0]);
        }
        (0..smaller.dim())
            .map(|i| {
                let old = smaller.path_of(i).unwrap();
                let mut p = Vec::with_capacity(self.strands + 1);
                for _ in 0..left_pairs {
                    p.extend_from_slice(&[0, 1]);
                }
                p.extend_from_slice(&old);
                for _ in 0..right_pairs {
                    p.extend_from_slice(&[1, 0]);
                }
                self.index_of(&p).ok_or(Error::InvalidPairing)
            })
            .collect()
    }

    /// Dense matrix of a generator, for tests and small reference computations.
    pub fn generator_matrix(&self, g: Generator) -> Result<Vec<Vec<C64>>> {
        let d = self.dim();
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[j] = C64::new(1.0, 0.0);
            self.apply_generator(&mut v, g)?;
            cols.push(v);
        }
        Ok((0..d)
            .map(|i| (0..d).map(|j| cols[j][i]).collect())
            .collect())
    }
}

fn apply_qubit(state: &mut [C64], m: usize, mats: &LocalBraidMatrices, g: Generator) {
    let conj = |x: C64| if g.inverse { x.conj() } else { x };
    let i = g.index;
    if m == 0 {
        state[0] *= conj(mats.r[0][0]);
        return;
    }
    let dim = 1usize << m;
    if i == 1 || i == 2 * m + 1 {
        let bit = if i == 1 { m - 1 } else { 0 };
        let (r0, r1) = (conj(mats.r[0][0]), conj(mats.r[1][1]));
        for (idx, a) in state.iter_mut().enumerate() {
            *a *= if (idx >> bit) & 1 == 0 { r0 } else { r1 };
        }
    } else if i % 2 == 0 {
        let q = i / 2;
        let bit = m - q;
        let stride = 1usize << bit;
        // B^{-1} = B^dagger: transpose-conjugate of the 2x2 block
        let b = if g.inverse {
            [
                [mats.b[0][0].conj(), mats.b[1][0].conj()],
                [mats.b[0][1].conj(), mats.b[1][1].conj()],
            ]
        } else {
            mats.b
        };
        let mut base = 0;
        while base < dim {
            for lo in base..base + stride {
                let hi = lo + stride;
                let (x, y) = (state[lo], state[hi]);
                state[lo] = b[0][0] * x + b[0][1] * y;
                state[hi] = b[1][0] * x + b[1][1] * y;
            }
            base += 2 * stride;
        }
    } else {
        let q = (i - 1) / 2;
        let (b1, b2) = (m - q, m - q - 1);
        let diag = [
            conj(mats.p[0][0]),
            conj(mats.p[1][1]),
            conj(mats.p[2][2]),
            conj(mats.p[3][3]),
        ];
        for (idx, a) in state.iter_mut().enumerate() {
            let sel = ((idx >> b1) & 1) * 2 + ((idx >> b2) & 1);
            *a *= diag[sel];
        }
    }
}

fn check_noncrossing(partner: &[usize]) -> Result<()> {
    let mut stack = Vec::new();
    for (i, &p) in partner.iter().enumerate() {
        if p > i {
            stack.push(i);
        } else if stack.pop() != Some(p) {
            return Err(Error::InvalidPairing);
        }
    }
    Ok(())
}

/// Builds the planar state by removing an innermost cup, recursing, and
/// inserting the cup back as the isometry
/// `|a> -> sum_x sqrt([x+1]/([a+1][2])) |a, x, a>`.
fn cup_state(strands: &[usize], partner: &[usize], k: u32) -> Result<Vec<(Vec<u8>, f64)>> {
    if strands.is_empty() {
        return Ok(vec![(vec![0], 1.0)]);
    }
    let pos = (0..strands.len() - 1)
        .find(|&i| partner[strands[i]] == strands[i + 1])
        .ok_or(Error::InvalidPairing)?;
    let mut rest = strands.to_vec();
    rest.drain(pos..pos + 2);
    let inner = cup_state(&rest, partner, k)?;
    let d = qint(2, k);
    let mut out = Vec::with_capacity(inner.len() * 2);
    for (path, amp) in inner {
        let a = path[pos] as i64;
        for x in [a - 1, a + 1] {
            if x < 0 || x > k as i64 {
                continue;
            }
            let w = (qint(x + 1, k) / (qint(a + 1, k) * d)).sqrt();
            let mut p = Vec::with_capacity(path.len() + 2);
            p.extend_from_slice(&path[..=pos]);
            p.push(x as u8);
            p.push(a as u8);
            p.extend_from_slice(&path[pos + 1..]);
            out.push((p, amp * w));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn norm(v: &[C64]) -> f64 {
        v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn dimensions() {
        for m in 0..6 {
            let s = FusionSpace::new(AnyonModel::Ising, 2 * m + 2).unwrap();
            assert_eq!(s.dim(), 1 << m);
        }
        assert_eq!(path_count(6, 3), 5);
        assert_eq!(path_count(10, 1), 1);
        assert_eq!(path_count(8, 100), 14);
        let s = FusionSpace::new(AnyonModel::SU2k(3), 8).unwrap();
        assert_eq!(s.dim() as u128, path_count(8, 3));
        assert!(FusionSpace::new(AnyonModel::Ising, 5).is_err());
    }

    #[test]
    fn vacuum_examples() {
        let s = FusionSpace::new(AnyonModel::Ising, 6).unwrap();
        let v = s.vacuum_state();
        assert_eq!(v[0], C64::new(1.0, 0.0));
        assert!((norm(&v) - 1.0).abs() < 1e-15);
        let mut w = v.clone();
        s.apply_generator(&mut w, Generator::new(1)).unwrap();
        assert!((w[0] - C64::from_polar(1.0, -PI / 8.0)).norm() < 1e-15);
    }

    #[test]
    fn ising_b3_on_01() {
        let s = FusionSpace::new(AnyonModel::Ising, 8).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); s.dim()];
        // qubit 1 = 0, qubit 2 = 1, qubit 3 = 0
        v[0b010] = C64::new(1.0, 0.0);
        s.apply_generator(&mut v, Generator::new(3)).unwrap();
        let want = C64::new(0.0, 1.0) * C64::from_polar(1.0, -PI / 8.0);
        assert!((v[0b010] - want).norm() < 1e-15);
    }

    #[test]
    fn path_of_roundtrip() {
        for model in [AnyonModel::Ising, AnyonModel::SU2k(4)] {
            let s = FusionSpace::new(model, 8).unwrap();
            for i in 0..s.dim() {
                assert_eq!(s.index_of(&s.path_of(i).unwrap()), Some(i));
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let s = FusionSpace::new(AnyonModel::SU2k(3), 4).unwrap();
        let mut v = s.vacuum_state();
        assert!(s.apply_generator(&mut v, Generator::new(4)).is_err());
        assert!(s.apply_generator(&mut v, Generator::new(0)).is_err());
    }

    #[test]
    fn relabel_word() {
        let w = relabel_cycle_word(4);
        assert_eq!(w, BraidWord::from_indices(&[1, 2, 3]));
        assert_eq!(
            w.inverse().0,
            vec![Generator::inv(3), Generator::inv(2), Generator::inv(1)]
        );
    }

    #[test]
    fn planar_states_are_normalized() {
        for model in [AnyonModel::Ising, AnyonModel::SU2k(3), AnyonModel::SU2k(5)] {
            let s = FusionSpace::new(model, 8).unwrap();
            let v = s.markov_state().unwrap();
            assert!((norm(&v) - 1.0).abs() < 1e-13);
            let adjacent: Vec<usize> = (0..8).map(|i| i ^ 1).collect();
            let p = s.planar_state(&adjacent).unwrap();
            let vac = s.vacuum_state();
            for (a, b) in p.iter().zip(&vac) {
                assert!((a - b).norm() < 1e-14);
            }
        }
        let s = FusionSpace::new(AnyonModel::SU2k(3), 4).unwrap();
        assert!(s.planar_state(&[2, 3, 0, 1]).is_err());
    }
}
