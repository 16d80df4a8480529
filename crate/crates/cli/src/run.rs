//! Experiment bodies. Each returns its output files as bytes; writing and
//! hashing happen in one place so every run gets a manifest.

use anyonwalk::entanglement::entropy_sweep;
use anyonwalk::kraus::{support_aligned_binomial, ChannelWalk};
use anyonwalk::observables::{
    classical_rw_reference, classify_scaling, distance_to_final, exit_probability,
    hadamard_reference, instantaneous_distance, mixing_time, total_variation, variance_series,
    ScalingFit,
};
use anyonwalk::pathsum::{path_sum_distribution, verify_trace_identity, TraceMethod};
use anyonwalk::{
    evolve, AnyonModel, Boundary, BraidWord, Closure, Generator, PositionDistribution, WalkConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};
use crate::CliError;

pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub struct ExperimentResult {
    pub outputs: Vec<Output>,
    pub assumptions: Vec<String>,
}

/// Floats in CSV and JSON: plain decimals in a readable range, scientific
/// otherwise. Shortest round-trip digits either way.
pub fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn json_bytes(v: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    b.push(b'\n');
    Ok(b)
}

fn fit_window(series: &[(f64, f64)], from: usize, to: usize) -> Option<ScalingFit> {
    let window: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= from as f64 && t <= to as f64)
        .collect();
    classify_scaling(&window).ok()
}

fn late_mean(v: &[f64], t_final: usize) -> f64 {
    let w = &v[t_final / 2..=t_final];
    w.iter().sum::<f64>() / w.len() as f64
}

/// First `t` after which the series stays at or below `eps`.
fn settle_time(v: &[f64], eps: f64) -> Option<usize> {
    let mut answer = None;
    for (t, &x) in v.iter().enumerate().rev() {
        if x > eps {
            break;
        }
        answer = Some(t);
    }
    answer
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    match cfg.experiment {
        Experiment::Walk => walk(cfg),
        Experiment::Mixing => mixing(cfg),
        Experiment::Exit => exit(cfg),
        Experiment::Channel => channel(cfg),
        Experiment::Entropy => entropy(cfg),
        Experiment::OracleCheck => oracle_check(cfg),
    }
}

fn walk(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let wc = cfg.walk_config(cfg.model);
    let traj = evolve(&wc)?;
    let rows = traj.dists.iter().flat_map(|d| {
        d.sites()
            .map(move |(s, p)| vec![d.t.to_string(), s.to_string(), num(p)])
            .collect::<Vec<_>>()
    });
    let trajectory = csv(&["t", "s", "p"], rows)?;

    let mut report = json!({
        "model": cfg.model_name,
        "closure": cfg.closure,
        "boundary": cfg.boundary,
        "s0": cfg.s0,
        "t_max": cfg.t_max,
        "fit_window": [cfg.fit_start, cfg.t_max],
    });
    if cfg.boundary != Boundary::Absorbing {
        let series = variance_series(&traj, cfg.s0)?;
        let href = hadamard_reference(&wc)?;
        let hseries = variance_series(&href, cfg.s0)?;
        report["variance"] = json!(series
            .iter()
            .map(|&(t, v)| (t as usize, v))
            .collect::<Vec<_>>());
        report["fit"] = json!(fit_window(&series, cfg.fit_start, cfg.t_max));
        report["hadamard_variance"] = json!(hseries
            .iter()
            .map(|&(t, v)| (t as usize, v))
            .collect::<Vec<_>>());
        report["hadamard_fit"] = json!(fit_window(&hseries, cfg.fit_start, cfg.t_max));
    } else {
        report["exit_probability"] = json!(exit_probability(&traj)?);
    }
    Ok(ExperimentResult {
        outputs: vec![
            Output {
                name: "trajectory.csv".into(),
                bytes: trajectory,
            },
            Output {
                name: "report.json".into(),
                bytes: json_bytes(&report)?,
            },
        ],
        assumptions: vec![format!(
            "walker starts at s0 = {} with coin {} and the {} closure",
            cfg.s0, cfg.c0, cfg.closure
        )],
    })
}

/// Curves of a mixing run, indexed by `t = 0..=t_max`.
#[derive(Clone, Debug, Serialize)]
pub struct MixingCurves {
    pub d_rw: Vec<f64>,
    pub d_rw_avg: Vec<f64>,
    pub d_qw_avg: Vec<f64>,
    pub d_model_avg: Vec<f64>,
}

pub fn mixing_curves(cfg: &ExperimentConfig) -> Result<MixingCurves, CliError> {
    let n = cfg.sites.unwrap();
    let t = cfg.t_max;
    let rw = classical_rw_reference(Some(n), cfg.s0, t, Boundary::Periodic)?;
    let wc = cfg.walk_config(cfg.model);
    let qw = hadamard_reference(&wc)?;
    let model = evolve(&wc)?;
    Ok(MixingCurves {
        d_rw: instantaneous_distance(&rw, t)?,
        d_rw_avg: distance_to_final(&rw, t)?,
        d_qw_avg: distance_to_final(&qw, t)?,
        d_model_avg: distance_to_final(&model, t)?,
    })
}

fn mixing(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let c = mixing_curves(cfg)?;
    let t = cfg.t_max;
    let rows = (0..=t).map(|i| {
        vec![
            i.to_string(),
            num(c.d_rw[i]),
            num(c.d_rw_avg[i]),
            num(c.d_qw_avg[i]),
            num(c.d_model_avg[i]),
        ]
    });
    let table = csv(&["t", "D_RW", "D_RWavg", "D_QWavg", "D_Isingavg"], rows)?;

    let n = cfg.sites.unwrap();
    let rw = classical_rw_reference(Some(n), cfg.s0, t, Boundary::Periodic)?;
    let uniform = PositionDistribution::new(0, 1, vec![1.0 / n as f64; n]);
    let means = [
        late_mean(&c.d_rw, t),
        late_mean(&c.d_rw_avg, t),
        late_mean(&c.d_qw_avg, t),
        late_mean(&c.d_model_avg, t),
    ];
    let (lo, hi) = (means[0].min(means[1]), means[0].max(means[1]));
    let report = json!({
        "model": cfg.model_name,
        "sites": n,
        "s0": cfg.s0,
        "t_max": t,
        "epsilon": cfg.epsilon,
        "late_window": [t / 2, t],
        "late_mean": {
            "D_RW": means[0],
            "D_RWavg": means[1],
            "D_QWavg": means[2],
            "D_Isingavg": means[3],
        },
        "between_rw_and_rw_avg": {
            "D_QWavg": means[2] >= lo && means[2] <= hi,
            "D_Isingavg": means[3] >= lo && means[3] <= hi,
        },
        "rw_mixing_time_to_uniform": mixing_time(&rw.dists, &uniform, cfg.epsilon)?,
        "settle_time": {
            "D_RW": settle_time(&c.d_rw, cfg.epsilon),
            "D_RWavg": settle_time(&c.d_rw_avg, cfg.epsilon),
            "D_QWavg": settle_time(&c.d_qw_avg, cfg.epsilon),
            "D_Isingavg": settle_time(&c.d_model_avg, cfg.epsilon),
        },
    });
    Ok(ExperimentResult {
        outputs: vec![
            Output {
                name: "mixing.csv".into(),
                bytes: table,
            },
            Output {
                name: "report.json".into(),
                bytes: json_bytes(&report)?,
            },
        ],
        assumptions: vec![
            format!(
                "random-walk curves start from the same site s0 = {} as the quantum runs",
                cfg.s0
            ),
            "D_RW compares instantaneous distributions, the other curves compare time averages"
                .into(),
            format!("D(t, T) is measured against T = t_max = {t}"),
            format!(
                "column D_Isingavg holds the configured model ({})",
                cfg.model_name
            ),
        ],
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExitCurves {
    pub p_rw: Vec<f64>,
    pub p_qw: Vec<f64>,
    pub p_model: Vec<f64>,
}

pub fn exit_curves(cfg: &ExperimentConfig) -> Result<ExitCurves, CliError> {
    let rw = classical_rw_reference(cfg.sites, cfg.s0, cfg.t_max, Boundary::Absorbing)?;
    let wc = cfg.walk_config(cfg.model);
    Ok(ExitCurves {
        p_rw: exit_probability(&rw)?,
        p_qw: exit_probability(&hadamard_reference(&wc)?)?,
        p_model: exit_probability(&evolve(&wc)?)?,
    })
}

fn slope(v: &[f64], span: usize) -> Option<f64> {
    let t = v.len() - 1;
    (t >= span).then(|| (v[t] - v[t - span]) / span as f64)
}

fn exit(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let c = exit_curves(cfg)?;
    let t = cfg.t_max;
    let rows = (0..=t).map(|i| {
        vec![
            i.to_string(),
            num(c.p_rw[i]),
            num(c.p_qw[i]),
            num(c.p_model[i]),
        ]
    });
    let table = csv(&["t", "P_RW", "P_QW", "P_Ising"], rows)?;
    let report = json!({
        "model": cfg.model_name,
        "sites": cfg.sites,
        "s0": cfg.s0,
        "t_max": t,
        "final": { "P_RW": c.p_rw[t], "P_QW": c.p_qw[t], "P_Ising": c.p_model[t] },
        "slope_last_50": {
            "P_RW": slope(&c.p_rw, 50),
            "P_QW": slope(&c.p_qw, 50),
            "P_Ising": slope(&c.p_model, 50),
        },
    });
    Ok(ExperimentResult {
        outputs: vec![
            Output {
                name: "exit.csv".into(),
                bytes: table,
            },
            Output {
                name: "report.json".into(),
                bytes: json_bytes(&report)?,
            },
        ],
        assumptions: vec![
            format!(
                "walker ejected from site s0 = {} (configurable with --s0)",
                cfg.s0
            ),
            format!(
                "column P_Ising holds the configured model ({})",
                cfg.model_name
            ),
        ],
    })
}

/// Variance and distance to the support-aligned binomial after each
/// channel application.
#[derive(Clone, Debug, Serialize)]
pub struct ChannelSeries {
    pub k: u32,
    pub variance: Vec<(usize, f64)>,
    pub tv_binomial: Vec<(usize, f64)>,
    pub completeness_error: f64,
}

pub fn channel_series(k: u32, closure: Closure, t_max: usize) -> Result<ChannelSeries, CliError> {
    let mut walk = ChannelWalk::new(AnyonModel::SU2k(k), closure, t_max)?;
    let completeness_error = walk.kraus.completeness_error();
    let mut variance = Vec::with_capacity(t_max);
    let mut tv = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        walk.step()?;
        let d = walk.distribution();
        let p = d.total();
        let m2: f64 = d.sites().map(|(s, q)| q * (s * s) as f64).sum();
        variance.push((walk.t, m2 / p));
        let b = support_aligned_binomial(walk.t, 0, &d);
        tv.push((walk.t, total_variation(&d, &b)?));
    }
    Ok(ChannelSeries {
        k,
        variance,
        tv_binomial: tv,
        completeness_error,
    })
}

fn channel(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &k in &cfg.ks {
        let s = channel_series(k, cfg.closure, cfg.t_max)?;
        for ((t, v), (_, tv)) in s.variance.iter().zip(&s.tv_binomial) {
            rows.push(vec![k.to_string(), t.to_string(), num(*v), num(*tv)]);
        }
        let series: Vec<(f64, f64)> = s.variance.iter().map(|&(t, v)| (t as f64, v)).collect();
        fits.push(json!({
            "k": k,
            "fit": fit_window(&series, cfg.fit_start, cfg.t_max),
            "completeness_error": s.completeness_error,
            "tv_binomial_final": s.tv_binomial.last().map(|x| x.1),
        }));
    }
    let table = csv(&["k", "t", "variance", "tv_binomial"], rows)?;
    let report = json!({
        "closure": cfg.closure,
        "t_max": cfg.t_max,
        "fit_window": [cfg.fit_start, cfg.t_max],
        "levels": fits,
    });
    Ok(ExperimentResult {
        outputs: vec![
            Output {
                name: "channel.csv".into(),
                bytes: table,
            },
            Output {
                name: "report.json".into(),
                bytes: json_bytes(&report)?,
            },
        ],
        assumptions: vec![
            format!("{} closure for the fusion register", cfg.closure),
            "each application restarts from coin |0> and a fresh vacuum register".into(),
            "variance is the second moment about the start".into(),
            "binomial reference moved onto the channel's mean, width and parity sublattice before comparison".into(),
        ],
    })
}

fn entropy(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let reports = entropy_sweep(&cfg.ks)?;
    let rows = reports
        .iter()
        .map(|r| vec![r.k.to_string(), num(r.q), num(r.leakage)]);
    let table = csv(&["k", "Q", "leakage"], rows)?;
    Ok(ExperimentResult {
        outputs: vec![
            Output {
                name: "entropy.csv".into(),
                bytes: table,
            },
            Output {
                name: "report.json".into(),
                bytes: json_bytes(&json!({ "levels": reports }))?,
            },
        ],
        assumptions: vec!["Q is evaluated on the state projected onto tree charge 1/2".into()],
    })
}

fn random_word(rng: &mut ChaCha8Rng, strands: usize, max_len: usize) -> BraidWord {
    let len = rng.random_range(0..=max_len);
    BraidWord::new(
        (0..len)
            .map(|_| {
                let i = rng.random_range(1..strands);
                if rng.random::<bool>() {
                    Generator::inv(i)
                } else {
                    Generator::new(i)
                }
            })
            .collect(),
    )
}

/// Largest disagreement between the walk engine, the fusion path sum and
/// (up to five steps) the bracket path sum.
pub fn oracle_comparison(model: AnyonModel, closure: Closure, t: usize) -> Result<Value, CliError> {
    let mut cfg = WalkConfig::line(model, t).with_closure(closure);
    cfg.c0 = 0;
    let traj = evolve(&cfg)?;
    let d = &traj.dists[t];
    let engine: Vec<f64> = (-(t as i64)..=t as i64).map(|s| d.get(s)).collect();
    let fusion = path_sum_distribution(model, closure, t, 0, TraceMethod::Fusion)?;
    let max_diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let mut v = json!({
        "model": model.to_string(),
        "closure": closure,
        "t": t,
        "engine_vs_fusion": max_diff(&engine, &fusion.p),
    });
    if t <= 5 && model.bracket_variable().is_some() {
        let bracket = path_sum_distribution(model, closure, t, 0, TraceMethod::Bracket)?;
        v["engine_vs_bracket"] = json!(max_diff(&engine, &bracket.p));
        v["fusion_vs_bracket"] = json!(max_diff(&fusion.p, &bracket.p));
    }
    Ok(v)
}

fn oracle_check(cfg: &ExperimentConfig) -> Result<ExperimentResult, CliError> {
    let mut comparisons = Vec::new();
    for closure in [Closure::Plat, Closure::Markov] {
        for t in 1..=cfg.t_max {
            comparisons.push(oracle_comparison(cfg.model, closure, t)?);
        }
    }
    let mut traces = Vec::new();
    if cfg.model.bracket_variable().is_some() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.words {
            let strands = rng.random_range(2..=6);
            let w = random_word(&mut rng, strands, 8);
            traces.push(verify_trace_identity(&w, strands, cfg.model)?);
        }
    }
    let max_trace = traces.iter().map(|r| r.difference).fold(0.0, f64::max);
    let report = json!({
        "model": cfg.model_name,
        "path_sums": comparisons,
        "trace_identity": { "words": traces.len(), "seed": cfg.seed, "max_difference": max_trace },
        "trace_samples": traces,
    });
    Ok(ExperimentResult {
        outputs: vec![Output {
            name: "oracle.json".into(),
            bytes: json_bytes(&report)?,
        }],
        assumptions: vec![
            "walker starts at coin 0; bracket comparison limited to five steps".into(),
        ],
    })
}
