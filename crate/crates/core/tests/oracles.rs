use anyonwalk::pathsum::{
    kauffman_bracket, link_evaluation, path_sum_distribution, path_sum_imaginary_residue,
    verify_trace_identity, TraceMethod,
};
use anyonwalk::{evolve, AnyonModel, BraidWord, Closure, Generator, WalkConfig};
use proptest::prelude::*;

fn engine(model: AnyonModel, closure: Closure, t: usize, c0: u8) -> Vec<f64> {
    let mut cfg = WalkConfig::line(model, t).with_closure(closure);
    cfg.c0 = c0;
    let traj = evolve(&cfg).unwrap();
    let d = &traj.dists[t];
    (-(t as i64)..=t as i64).map(|s| d.get(s)).collect()
}

#[test]
fn path_sum_matches_engine() {
    let models = [
        AnyonModel::Ising,
        AnyonModel::SU2k(2),
        AnyonModel::SU2k(3),
        AnyonModel::AbelianPhase(std::f64::consts::FRAC_PI_3),
    ];
    for model in models {
        for closure in [Closure::Plat, Closure::Markov] {
            for t in 1..=6 {
                for c0 in 0..2 {
                    let e = engine(model, closure, t, c0);
                    let p =
                        path_sum_distribution(model, closure, t, c0, TraceMethod::Fusion).unwrap();
                    for (x, y) in e.iter().zip(&p.p) {
                        assert!(
                            (x - y).abs() < 1e-10,
                            "{model} {closure} t={t} c0={c0}: {e:?} vs {:?}",
                            p.p
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn path_sum_is_real() {
    for model in [AnyonModel::Ising, AnyonModel::SU2k(3), AnyonModel::SU2k(4)] {
        for closure in [Closure::Plat, Closure::Markov] {
            assert!(path_sum_imaginary_residue(model, closure, 5).unwrap() < 1e-12);
        }
    }
}

#[test]
fn bracket_path_sum_matches_fusion_path_sum() {
    for model in [AnyonModel::SU2k(2), AnyonModel::SU2k(4)] {
        for closure in [Closure::Plat, Closure::Markov] {
            for t in 1..=4 {
                let f = path_sum_distribution(model, closure, t, 0, TraceMethod::Fusion).unwrap();
                let b = path_sum_distribution(model, closure, t, 0, TraceMethod::Bracket).unwrap();
                for (x, y) in f.p.iter().zip(&b.p) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}

fn word_strategy(max_strands: usize, max_len: usize) -> impl Strategy<Value = (usize, BraidWord)> {
    (2..=max_strands).prop_flat_map(move |n| {
        prop::collection::vec((1..n, any::<bool>()), 0..=max_len).prop_map(move |gens| {
            let w = gens
                .into_iter()
                .map(|(i, inv)| {
                    if inv {
                        Generator::inv(i)
                    } else {
                        Generator::new(i)
                    }
                })
                .collect();
            (n, BraidWord::new(w))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_identity_random_words((n, w) in word_strategy(6, 8), k in 2u32..=4) {
        let r = verify_trace_identity(&w, n, AnyonModel::SU2k(k)).unwrap();
        prop_assert!(r.difference <= 1e-9, "{:?}", r);
    }

    #[test]
    fn reidemeister_two((n, w) in word_strategy(5, 6), pos in 0usize..7, g in 1usize..5, k in 2u32..=5) {
        let a = AnyonModel::SU2k(k).bracket_variable().unwrap();
        let g = 1 + (g - 1) % (n - 1);
        let mut gens = w.0.clone();
        let p = pos.min(gens.len());
        gens.splice(p..p, [Generator::new(g), Generator::inv(g)]);
        let b0 = kauffman_bracket(&w, n, a).unwrap();
        let b1 = kauffman_bracket(&BraidWord::new(gens), n, a).unwrap();
        prop_assert!((b0 - b1).norm() < 1e-9);
    }

    #[test]
    fn conjugation_invariance((n, w) in word_strategy(5, 6), g in 1usize..5, inv in any::<bool>(), k in 2u32..=5) {
        let a = AnyonModel::SU2k(k).bracket_variable().unwrap();
        let g = 1 + (g - 1) % (n - 1);
        let h = if inv { Generator::inv(g) } else { Generator::new(g) };
        let conj = BraidWord::new(vec![h]).then_after(&w).then_after(&BraidWord::new(vec![h.inverted()]));
        let b0 = kauffman_bracket(&w, n, a).unwrap();
        let b1 = kauffman_bracket(&conj, n, a).unwrap();
        prop_assert!((b0 - b1).norm() < 1e-9);
        let r = verify_trace_identity(&conj, n, AnyonModel::SU2k(k)).unwrap();
        let r0 = verify_trace_identity(&w, n, AnyonModel::SU2k(k)).unwrap();
        prop_assert!((r.fusion - r0.fusion).norm() < 1e-9);
    }

    #[test]
    fn jones_stabilization((n, w) in word_strategy(4, 6), inv in any::<bool>()) {
        let a = AnyonModel::SU2k(3).bracket_variable().unwrap();
        let mut gens = w.0.clone();
        gens.push(if inv { Generator::inv(n) } else { Generator::new(n) });
        let j0 = link_evaluation(&w, n, a).unwrap().jones;
        let j1 = link_evaluation(&BraidWord::new(gens), n + 1, a).unwrap().jones;
        prop_assert!((j0 - j1).norm() < 1e-9);
    }
}

#[test]
fn hopf_link_and_unknot() {
    let a = AnyonModel::SU2k(3).bracket_variable().unwrap();
    let delta = -a * a - (a * a).inv();
    let unknot = kauffman_bracket(&BraidWord::new(vec![]), 1, a).unwrap();
    assert!((unknot - 1.0).norm() < 1e-14);
    let two = kauffman_bracket(&BraidWord::new(vec![]), 2, a).unwrap();
    assert!((two - delta).norm() < 1e-14);
    // positive Hopf link: -A^4 - A^{-4}
    let hopf = kauffman_bracket(&BraidWord::from_indices(&[1, 1]), 2, a).unwrap();
    let want = -a.powi(4) - a.powi(-4);
    assert!((hopf - want).norm() < 1e-12);
}
