//! Position distributions and the quantities derived from them.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::AnyonModel;
use crate::walk::{evolve, Boundary, Trajectory, WalkConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionDistribution {
    pub t: usize,
    pub first_site: i64,
    pub p: Vec<f64>,
}

impl PositionDistribution {
    pub fn new(t: usize, first_site: i64, p: Vec<f64>) -> Self {
        PositionDistribution { t, first_site, p }
    }

    pub fn delta(t: usize, first_site: i64, len: usize, site: i64) -> Self {
        let mut p = vec![0.0; len];
        p[(site - first_site) as usize] = 1.0;
        PositionDistribution::new(t, first_site, p)
    }

    pub fn get(&self, site: i64) -> f64 {
        let i = site - self.first_site;
        if i < 0 {
            return 0.0;
        }
        self.p.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.p
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.first_site + i as i64, p))
    }

    pub fn last_site(&self) -> i64 {
        self.first_site + self.p.len() as i64 - 1
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sites().map(|(s, p)| s as f64 * p).sum::<f64>() / self.total()
    }

    fn same_domain(&self, other: &Self) -> bool {
        self.first_site == other.first_site && self.p.len() == other.p.len()
    }
}

/// Second moment about `s0`: `sum p s^2 - 2 s0 sum p s + s0^2`.
pub fn variance(dist: &PositionDistribution, s0: i64) -> Result<f64> {
    let total = dist.total();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized(total));
    }
    let s0 = s0 as f64;
    let (m1, m2) = dist.sites().fold((0.0, 0.0), |(a, b), (s, p)| {
        let s = s as f64;
        (a + p * s, b + p * s * s)
    });
    Ok(m2 - 2.0 * s0 * m1 + s0 * s0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    Ballistic,
    Diffusive,
    Localized,
    Indeterminate,
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scaling::Ballistic => "ballistic",
            Scaling::Diffusive => "diffusive",
            Scaling::Localized => "localized",
            Scaling::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub k2: f64,
    pub k1: f64,
    pub k0: f64,
    pub exponent: f64,
    pub classification: Scaling,
}

fn solve3(mut a: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..4 {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Least-squares exponent of `sigma^2 ~ t^a` on log-log axes plus the
/// quadratic `K2 t^2 + K1 t + K0`.
pub fn classify_scaling(series: &[(f64, f64)]) -> Result<ScalingFit> {
    if series.len() < 5 {
        return Err(Error::DegenerateSeries(format!(
            "{} points, need 5",
            series.len()
        )));
    }
    if series
        .iter()
        .any(|&(t, v)| t <= 0.0 || v <= 0.0 || !v.is_finite())
    {
        return Err(Error::DegenerateSeries(
            "non-positive time or variance".into(),
        ));
    }
    let n = series.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, v) in series {
        let (x, y) = (t.ln(), v.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let den = n * sxx - sx * sx;
    if den.abs() < 1e-12 {
        return Err(Error::DegenerateSeries("all times equal".into()));
    }
    let exponent = (n * sxy - sx * sy) / den;

    let mut m = [[0.0; 4]; 3];
    for &(t, v) in series {
        let basis = [t * t, t, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            m[i][3] += basis[i] * v;
        }
    }
    let [k2, k1, k0] =
        solve3(m).ok_or_else(|| Error::DegenerateSeries("singular quadratic fit".into()))?;

    let max = series.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let min = series.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    let classification = if exponent >= 1.7 {
        Scaling::Ballistic
    } else if (0.7..=1.3).contains(&exponent) {
        Scaling::Diffusive
    } else if exponent <= 0.2 && max <= 2.0 * min {
        Scaling::Localized
    } else {
        Scaling::Indeterminate
    };
    Ok(ScalingFit {
        k2,
        k1,
        k0,
        exponent,
        classification,
    })
}

/// Variance about `s0` for every step of a trajectory.
pub fn variance_series(traj: &Trajectory, s0: i64) -> Result<Vec<(f64, f64)>> {
    traj.dists
        .iter()
        .map(|d| Ok((d.t as f64, variance(d, s0)?)))
        .collect()
}

/// Cesàro average `(1/(t+1)) sum_{tau <= t} p(s, tau)`.
pub fn time_average(traj: &Trajectory, t: usize) -> PositionDistribution {
    let first = &traj.dists[0];
    let mut acc = vec![0.0; first.p.len()];
    for d in &traj.dists[..=t] {
        for (a, p) in acc.iter_mut().zip(&d.p) {
            *a += p;
        }
    }
    let norm = 1.0 / (t + 1) as f64;
    acc.iter_mut().for_each(|a| *a *= norm);
    PositionDistribution::new(t, first.first_site, acc)
}

/// `sum_i |D1(i) - D2(i)|`, deliberately not halved.
pub fn total_variation(a: &PositionDistribution, b: &PositionDistribution) -> Result<f64> {
    if !a.same_domain(b) {
        return Err(Error::DomainMismatch);
    }
    Ok(a.p.iter().zip(&b.p).map(|(x, y)| (x - y).abs()).sum())
}

/// Smallest `T` with `||D_t - pi|| <= eps` for all later `t`, `None` if the
/// last distribution is still farther than `eps`.
pub fn mixing_time(
    traj: &[PositionDistribution],
    pi: &PositionDistribution,
    eps: f64,
) -> Result<Option<usize>> {
    let mut answer = None;
    for (i, d) in traj.iter().enumerate().rev() {
        if total_variation(d, pi)? > eps {
            break;
        }
        answer = Some(i);
    }
    Ok(answer)
}

/// `D(t, T) = ||avg p(t) - avg p(T)||` for `t = 0..=T`.
pub fn distance_to_final(traj: &Trajectory, t_final: usize) -> Result<Vec<f64>> {
    let averages = running_averages(&traj.dists[..=t_final]);
    let last = &averages[t_final];
    averages.iter().map(|a| total_variation(a, last)).collect()
}

/// `||p(t) - p(T)||` on instantaneous distributions.
pub fn instantaneous_distance(traj: &Trajectory, t_final: usize) -> Result<Vec<f64>> {
    let last = &traj.dists[t_final];
    traj.dists[..=t_final]
        .iter()
        .map(|d| total_variation(d, last))
        .collect()
}

fn running_averages(dists: &[PositionDistribution]) -> Vec<PositionDistribution> {
    let mut acc = vec![0.0; dists[0].p.len()];
    dists
        .iter()
        .enumerate()
        .map(|(t, d)| {
            for (a, p) in acc.iter_mut().zip(&d.p) {
                *a += p;
            }
            let norm = 1.0 / (t + 1) as f64;
            PositionDistribution::new(t, d.first_site, acc.iter().map(|a| a * norm).collect())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub epsilon: f64,
    pub mixing_time: Option<usize>,
    pub pi: PositionDistribution,
    pub distance: Vec<f64>,
}

/// Mixing time against a supplied reference, with `D(t, T)` at `T = t_max`.
pub fn mixing_report(
    traj: &Trajectory,
    pi: PositionDistribution,
    epsilon: f64,
) -> Result<MixingReport> {
    let t_final = traj.dists.len() - 1;
    Ok(MixingReport {
        epsilon,
        mixing_time: mixing_time(&traj.dists, &pi, epsilon)?,
        distance: distance_to_final(traj, t_final)?,
        pi,
    })
}

/// Accumulated exit probability `P_ex(t)`.
pub fn exit_probability(traj: &Trajectory) -> Result<Vec<f64>> {
    traj.absorbed.clone().ok_or(Error::NotAbsorbing)
}

fn rw_domain(sites: Option<usize>, s0: i64, t: usize, boundary: Boundary) -> Result<(i64, usize)> {
    match (boundary, sites) {
        (Boundary::InfiniteWindow, None) => Ok((s0 - t as i64, 2 * t + 1)),
        (Boundary::Periodic, Some(n)) if n >= 3 => Ok((1, n)),
        (Boundary::Reflective | Boundary::Absorbing, Some(n)) if n >= 2 => Ok((0, n + 2)),
        _ => Err(Error::InvalidConfig(format!(
            "random walk needs a site count matching {boundary}"
        ))),
    }
}

/// One step of the symmetric walk on `p`, returning the mass absorbed.
fn rw_step(p: &[f64], first: i64, n: Option<usize>, boundary: Boundary) -> (Vec<f64>, f64) {
    let len = p.len();
    let mut q = vec![0.0; len];
    let mut absorbed = 0.0;
    for (i, &x) in p.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let s = first + i as i64;
        let targets: [i64; 2] = match (boundary, n) {
            (Boundary::Periodic, Some(n)) => {
                let n = n as i64;
                [(s - 2).rem_euclid(n) + 1, s.rem_euclid(n) + 1]
            }
            (Boundary::Reflective, Some(_)) if s == 0 => [1, 1],
            (Boundary::Reflective, Some(n)) if s == n as i64 + 1 => [n as i64, n as i64],
            _ => [s - 1, s + 1],
        };
        for tgt in targets {
            q[(tgt - first) as usize] += 0.5 * x;
        }
    }
    if let (Boundary::Absorbing, Some(n)) = (boundary, n) {
        for site in [0usize, n + 1] {
            absorbed += q[site];
            q[site] = 0.0;
        }
    }
    (q, absorbed)
}

/// Exact distribution iteration of the symmetric random walk.
pub fn classical_rw_reference(
    sites: Option<usize>,
    s0: i64,
    t: usize,
    boundary: Boundary,
) -> Result<Trajectory> {
    let (first, len) = rw_domain(sites, s0, t, boundary)?;
    if s0 < first || s0 >= first + len as i64 {
        return Err(Error::InvalidConfig(format!(
            "s0 = {s0} outside the domain"
        )));
    }
    let mut d = PositionDistribution::delta(0, first, len, s0);
    let mut dists = vec![d.clone()];
    let mut absorbed = vec![0.0];
    for step in 1..=t {
        let (q, a) = rw_step(&d.p, first, sites, boundary);
        d = PositionDistribution::new(step, first, q);
        absorbed.push(absorbed.last().unwrap() + a);
        dists.push(d.clone());
    }
    Ok(Trajectory {
        dists,
        absorbed: (boundary == Boundary::Absorbing).then_some(absorbed),
    })
}

/// Monte Carlo estimate of the random-walk distribution, for illustration
/// output only. Deterministic for a fixed seed.
pub fn sampled_rw_distribution(
    sites: Option<usize>,
    s0: i64,
    t: usize,
    boundary: Boundary,
    walkers: usize,
    seed: u64,
) -> Result<PositionDistribution> {
    let (first, len) = rw_domain(sites, s0, t, boundary)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; len];
    for _ in 0..walkers {
        let mut s = s0;
        for _ in 0..t {
            let step = if rng.random::<bool>() { 1 } else { -1 };
            s = match (boundary, sites) {
                (Boundary::Periodic, Some(n)) => (s - 1 + step).rem_euclid(n as i64) + 1,
                (Boundary::Reflective, Some(n)) if s == 0 || s == n as i64 + 1 => {
                    if s == 0 {
                        1
                    } else {
                        n as i64
                    }
                }
                (Boundary::Absorbing, Some(n)) if s == 0 || s == n as i64 + 1 => s,
                _ => s + step,
            };
        }
        counts[(s - first) as usize] += 1;
    }
    let p = counts.iter().map(|&c| c as f64 / walkers as f64).collect();
    Ok(PositionDistribution::new(t, first, p))
}

/// The walk engine run with trivial braiding.
pub fn hadamard_reference(cfg: &WalkConfig) -> Result<Trajectory> {
    let mut cfg = cfg.clone();
    cfg.model = AnyonModel::trivial();
    evolve(&cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(first: i64, p: &[f64]) -> PositionDistribution {
        PositionDistribution::new(0, first, p.to_vec())
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance(&dist(3, &[1.0]), 3).unwrap(), 0.0);
        assert!((variance(&dist(2, &[0.5, 0.0, 0.5]), 3).unwrap() - 1.0).abs() < 1e-15);
        assert!(variance(&dist(0, &[0.5]), 0).is_err());
        let rw = classical_rw_reference(None, 0, 30, Boundary::InfiniteWindow).unwrap();
        for d in &rw.dists {
            assert!((variance(d, 0).unwrap() - d.t as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn scaling_examples() {
        let lin: Vec<(f64, f64)> = (1..20).map(|t| (t as f64, t as f64)).collect();
        let f = classify_scaling(&lin).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-6);
        assert_eq!(f.classification, Scaling::Diffusive);
        assert!((f.k1 - 1.0).abs() < 1e-8 && f.k2.abs() < 1e-8);
        let quad: Vec<(f64, f64)> = (1..20)
            .map(|t| (t as f64, 0.2929 * (t * t) as f64))
            .collect();
        let f = classify_scaling(&quad).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-6);
        assert_eq!(f.classification, Scaling::Ballistic);
        let flat: Vec<(f64, f64)> = (1..20).map(|t| (t as f64, 3.0)).collect();
        assert_eq!(
            classify_scaling(&flat).unwrap().classification,
            Scaling::Localized
        );
        assert!(classify_scaling(&lin[..4]).is_err());
    }

    #[test]
    fn rw_exponent_over_window() {
        let rw = classical_rw_reference(None, 0, 200, Boundary::InfiniteWindow).unwrap();
        let series: Vec<_> = variance_series(&rw, 0)
            .unwrap()
            .into_iter()
            .filter(|p| p.0 >= 10.0)
            .collect();
        assert!((classify_scaling(&series).unwrap().exponent - 1.0).abs() < 0.02);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(
            total_variation(&dist(0, &[1.0, 0.0]), &dist(0, &[0.0, 1.0])).unwrap(),
            2.0
        );
        assert_eq!(
            total_variation(&dist(0, &[0.5, 0.5]), &dist(0, &[1.0, 0.0])).unwrap(),
            1.0
        );
        assert!(total_variation(&dist(0, &[1.0]), &dist(1, &[1.0])).is_err());
    }

    #[test]
    fn time_average_and_distance() {
        let rw = classical_rw_reference(Some(5), 3, 50, Boundary::Periodic).unwrap();
        assert_eq!(time_average(&rw, 0), rw.dists[0]);
        assert!((time_average(&rw, 50).total() - 1.0).abs() < 1e-12);
        let d = distance_to_final(&rw, 50).unwrap();
        assert_eq!(d[50], 0.0);
        let want = total_variation(&rw.dists[0], &time_average(&rw, 50)).unwrap();
        assert!((d[0] - want).abs() < 1e-15);
    }

    #[test]
    fn rw_cycle_mixes() {
        let rw = classical_rw_reference(Some(5), 1, 400, Boundary::Periodic).unwrap();
        let pi = dist(1, &[0.2; 5]);
        let m = mixing_time(&rw.dists, &pi, 0.01).unwrap().unwrap();
        assert!(m > 0 && m < 200);
        let loose = mixing_time(&rw.dists, &pi, 0.1).unwrap().unwrap();
        assert!(loose <= m);
        assert_eq!(mixing_time(&rw.dists, &pi, 10.0).unwrap(), Some(0));
    }

    #[test]
    fn rw_line_two_steps() {
        let rw = classical_rw_reference(None, 0, 2, Boundary::InfiniteWindow).unwrap();
        assert_eq!(rw.dists[2].p, vec![0.25, 0.0, 0.5, 0.0, 0.25]);
        assert!(exit_probability(&rw).is_err());
    }

    #[test]
    fn rw_exit_mass_balance() {
        let rw = classical_rw_reference(Some(12), 6, 300, Boundary::Absorbing).unwrap();
        let ex = exit_probability(&rw).unwrap();
        for (d, e) in rw.dists.iter().zip(&ex) {
            assert!((d.total() + e - 1.0).abs() < 1e-12);
        }
        assert!(ex.windows(2).all(|w| w[1] >= w[0]));
        assert!(*ex.last().unwrap() > 0.99);
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sampled_rw_distribution(Some(5), 1, 20, Boundary::Periodic, 500, 7).unwrap();
        let b = sampled_rw_distribution(Some(5), 1, 20, Boundary::Periodic, 500, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.total() - 1.0).abs() < 1e-12);
    }
}
