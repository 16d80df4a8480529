use anyonwalk::kraus::{
    apply_channel, binomial_reference, build_w2_kraus, circulant_variance_model, ChannelWalk,
    PositionDensityMatrix,
};
use anyonwalk::{AnyonModel, Closure, WalkConfig, WalkState};
use num_complex::Complex64 as C64;

fn models() -> Vec<AnyonModel> {
    vec![
        AnyonModel::SU2k(1),
        AnyonModel::Ising,
        AnyonModel::SU2k(2),
        AnyonModel::SU2k(3),
        AnyonModel::SU2k(5),
        AnyonModel::trivial(),
    ]
}

/// A pure state with small integer-seeded amplitudes, as a density matrix.
fn pseudo_random_rho(first: i64, len: usize, seed: u64) -> PositionDensityMatrix {
    let mut x = seed;
    let mut psi = Vec::with_capacity(len);
    for _ in 0..len {
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let re = ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let im = ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        psi.push(C64::new(re, im));
    }
    let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let mut r = PositionDensityMatrix::zeros(first, len);
    for i in 0..len {
        for j in 0..len {
            r.data[i * len + j] = psi[i] * psi[j].conj() / n;
        }
    }
    r
}

#[test]
fn kraus_completeness_and_locality() {
    for model in models() {
        for closure in [Closure::Plat, Closure::Markov] {
            let k = build_w2_kraus(model, closure, -7, 15).unwrap();
            assert!(
                k.completeness_error() <= 1e-10,
                "{model} {closure}: {}",
                k.completeness_error()
            );
            assert!(k.max_shift() <= 2);
        }
    }
}

#[test]
fn channel_is_cptp_on_random_inputs() {
    for model in models() {
        for closure in [Closure::Plat, Closure::Markov] {
            let k = build_w2_kraus(model, closure, -5, 11).unwrap();
            for seed in 0..4 {
                let rho = pseudo_random_rho(-5, 11, seed * 7 + 1);
                let out = apply_channel(&rho, &k).unwrap();
                assert!((out.trace() - 1.0).norm() <= 1e-10);
                assert!(out.hermiticity_error() <= 1e-12);
                assert!(out.min_eigenvalue() >= -1e-12, "{model} {closure}");
            }
        }
    }
}

/// Walk-engine state after two steps, fusion register and coin traced out.
fn engine_reduced(model: AnyonModel, closure: Closure) -> PositionDensityMatrix {
    let mut st = WalkState::new(WalkConfig::line(model, 2).with_closure(closure)).unwrap();
    st.step().unwrap();
    st.step().unwrap();
    let mut r = PositionDensityMatrix::zeros(-2, 5);
    for x in -2..=2i64 {
        for y in -2..=2i64 {
            if let (Some(a), Some(b)) = (st.site_amplitudes(x), st.site_amplitudes(y)) {
                let v: C64 = a.iter().zip(b).map(|(p, q)| p * q.conj()).sum();
                r.data[((x + 2) * 5 + y + 2) as usize] = v;
            }
        }
    }
    r
}

#[test]
fn one_application_equals_two_walk_steps() {
    for model in models() {
        for closure in [Closure::Plat, Closure::Markov] {
            let k = build_w2_kraus(model, closure, -4, 9).unwrap();
            let out = apply_channel(&PositionDensityMatrix::localized(-4, 9, 0), &k).unwrap();
            let out = out.restrict(-2, 5).unwrap();
            let want = engine_reduced(model, closure);
            for (a, b) in out.data.iter().zip(&want.data) {
                assert!((a - b).norm() < 1e-12, "{model} {closure}");
            }
        }
    }
}

/// At k = 1 every braid is a phase, so the channel is the coin-traced
/// two-step Hadamard map: `psi -> sum_m amp_m phase_m psi(x - d_m)` grouped by coin.
#[test]
fn level_one_channel_is_coin_traced_walk() {
    let k = build_w2_kraus(AnyonModel::SU2k(1), Closure::Markov, -6, 13).unwrap();
    let rho = pseudo_random_rho(-6, 13, 99);
    let out = apply_channel(&rho, &k).unwrap();
    // every generator acts as the same scalar, and each move crosses two gaps
    let scalar = {
        let space = anyonwalk::FusionSpace::new(AnyonModel::SU2k(1), 4).unwrap();
        let mut v = space.vacuum_state();
        space
            .apply_generator(&mut v, anyonwalk::Generator::new(2))
            .unwrap();
        v[0] / space.vacuum_state()[0]
    };
    let moves: [(u8, i64, f64); 4] = [(0, -2, 0.5), (1, 0, 0.5), (0, 0, 0.5), (1, 2, -0.5)];
    let n = 13usize;
    let m = n + 4;
    let mut want = vec![C64::new(0.0, 0.0); m * m];
    for coin in 0..2u8 {
        let ops: Vec<(i64, C64)> = moves
            .iter()
            .filter(|mv| mv.0 == coin)
            .map(|mv| (mv.1, scalar * scalar * mv.2))
            .collect();
        for &(d1, a1) in &ops {
            for &(d2, a2) in &ops {
                for i in 0..n {
                    for j in 0..n {
                        let y1 = (i as i64 + 2 + d1) as usize;
                        let y2 = (j as i64 + 2 + d2) as usize;
                        want[y1 * m + y2] += a1 * rho.get(i, j) * a2.conj();
                    }
                }
            }
        }
    }
    for (a, b) in out.data.iter().zip(&want) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn circulant_matches_channel_iteration() {
    for model in [AnyonModel::Ising, AnyonModel::SU2k(3)] {
        for closure in [Closure::Plat, Closure::Markov] {
            let t_max = 12;
            let mut walk = ChannelWalk::new(model, closure, t_max).unwrap();
            let circ = circulant_variance_model(&walk.kraus).unwrap();
            let times: Vec<usize> = (1..=t_max).collect();
            let dists = circ.distributions(&times);
            for d in &dists {
                walk.step().unwrap();
                let c = walk.distribution();
                for (s, p) in c.sites() {
                    assert!((d.get(s) - p).abs() < 1e-12, "{model} {closure} t={}", d.t);
                }
            }
        }
    }
}

#[test]
fn uniform_diagonal_is_fixed_on_interior() {
    let k = build_w2_kraus(AnyonModel::SU2k(3), Closure::Markov, -12, 25).unwrap();
    let mut rho = PositionDensityMatrix::zeros(-12, 25);
    for i in 0..25 {
        rho.data[i * 25 + i] = C64::new(1.0 / 25.0, 0.0);
    }
    let out = apply_channel(&rho, &k).unwrap();
    // sites at least two away from either edge receive mass from a full stencil
    for s in -10..=10i64 {
        let i = (s - out.first_site) as usize;
        assert!((out.get(i, i).re - 1.0 / 25.0).abs() < 1e-12);
    }
}

#[test]
fn markov_level_two_variance_is_linear() {
    let mut walk = ChannelWalk::new(AnyonModel::Ising, Closure::Markov, 20).unwrap();
    for _ in 0..20 {
        walk.step().unwrap();
    }
    let d = walk.distribution();
    let v: f64 = d.sites().map(|(s, p)| p * (s * s) as f64).sum();
    assert!((v - 40.0).abs() < 1e-9);
    let b: f64 = d.sites().map(|(s, _)| binomial_reference(s, 20, 0)).sum();
    assert!((b - 1.0).abs() < 1e-12);
}
