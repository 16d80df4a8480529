use anyonwalk::{AnyonModel, FusionSpace, Generator};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn models() -> Vec<AnyonModel> {
    vec![
        AnyonModel::Ising,
        AnyonModel::SU2k(1),
        AnyonModel::SU2k(2),
        AnyonModel::SU2k(3),
        AnyonModel::SU2k(4),
        AnyonModel::SU2k(7),
        AnyonModel::AbelianPhase(std::f64::consts::PI / 3.0),
        AnyonModel::trivial(),
    ]
}

fn random_state(dim: usize, seed: &[f64]) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|i| {
            C64::new(
                seed[(2 * i) % seed.len()] + 0.1 * i as f64,
                seed[(2 * i + 1) % seed.len()],
            )
        })
        .collect();
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

fn apply(space: &FusionSpace, v: &[C64], gens: &[Generator]) -> Vec<C64> {
    let mut w = v.to_vec();
    for g in gens.iter().rev() {
        space.apply_generator(&mut w, *g).unwrap();
    }
    w
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn yang_baxter(model_ix in 0usize..8, half in 2usize..=5, pick in 0usize..100, inv in any::<bool>(),
                   seed in prop::collection::vec(-1.0f64..1.0, 8)) {
        let strands = 2 * half;
        let space = FusionSpace::new(models()[model_ix], strands).unwrap();
        let i = 1 + pick % (strands - 2);
        let g = |j| if inv { Generator::inv(j) } else { Generator::new(j) };
        let v = random_state(space.dim(), &seed);
        let lhs = apply(&space, &v, &[g(i), g(i + 1), g(i)]);
        let rhs = apply(&space, &v, &[g(i + 1), g(i), g(i + 1)]);
        prop_assert!(dist(&lhs, &rhs) <= TOL);
    }

    #[test]
    fn far_commutation(model_ix in 0usize..8, half in 2usize..=5, a in 0usize..100, b in 0usize..100,
                       seed in prop::collection::vec(-1.0f64..1.0, 8)) {
        let strands = 2 * half;
        let space = FusionSpace::new(models()[model_ix], strands).unwrap();
        let i = 1 + a % (strands - 1);
        let j = 1 + b % (strands - 1);
        prop_assume!(i.abs_diff(j) >= 2);
        let v = random_state(space.dim(), &seed);
        let lhs = apply(&space, &v, &[Generator::new(i), Generator::new(j)]);
        let rhs = apply(&space, &v, &[Generator::new(j), Generator::new(i)]);
        prop_assert!(dist(&lhs, &rhs) <= TOL);
    }

    #[test]
    fn inverse_cancels(model_ix in 0usize..8, half in 1usize..=5, a in 0usize..100,
                       seed in prop::collection::vec(-1.0f64..1.0, 8)) {
        let strands = 2 * half;
        let space = FusionSpace::new(models()[model_ix], strands).unwrap();
        let i = 1 + a % (strands - 1);
        let v = random_state(space.dim(), &seed);
        let w = apply(&space, &v, &[Generator::new(i), Generator::inv(i)]);
        prop_assert!(dist(&v, &w) <= TOL);
        let w = apply(&space, &v, &[Generator::inv(i), Generator::new(i)]);
        prop_assert!(dist(&v, &w) <= TOL);
    }
}

#[test]
fn norm_survives_many_applications() {
    for model in models() {
        let space = FusionSpace::new(model, 10).unwrap();
        let mut v = random_state(space.dim(), &[0.3, -0.2, 0.9, 0.4, -0.7]);
        let mut x: u64 = 12345;
        for _ in 0..10_000 {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let i = 1 + ((x >> 33) as usize) % 9;
            let g = if (x >> 20) & 1 == 0 {
                Generator::new(i)
            } else {
                Generator::inv(i)
            };
            space.apply_generator(&mut v, g).unwrap();
        }
        let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-10, "{model}: {n}");
    }
}

type Dense = Vec<Vec<C64>>;

fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| C64::new((i == j) as u8 as f64, 0.0))
                .collect()
        })
        .collect()
}

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    (0..n * m)
        .map(|i| {
            (0..n * m)
                .map(|j| a[i / m][j / m] * b[i % m][j % m])
                .collect()
        })
        .collect()
}

fn from_array<const N: usize>(a: &[[C64; N]; N]) -> Dense {
    a.iter().map(|r| r.to_vec()).collect()
}

/// `1 (x) .. (x) op (x) .. (x) 1` with `op` acting on qubits starting at `q` (1-based).
fn embed(op: &Dense, q: usize, width: usize, m: usize) -> Dense {
    let left = identity(1 << (q - 1));
    let right = identity(1 << (m - q + 1 - width));
    kron(&kron(&left, op), &right)
}

#[test]
fn ising_layout_matches_kronecker_products() {
    let mats = anyonwalk::models::ising_matrices();
    let (r, b, p) = (
        from_array(&mats.r),
        from_array(&mats.b),
        from_array(&mats.p),
    );
    for m in 1..=4 {
        let space = FusionSpace::new(AnyonModel::Ising, 2 * m + 2).unwrap();
        assert_eq!(space.qubit_count(), Some(m));
        for i in 1..=2 * m + 1 {
            let expected = if i == 1 {
                embed(&r, 1, 1, m)
            } else if i == 2 * m + 1 {
                embed(&r, m, 1, m)
            } else if i % 2 == 0 {
                embed(&b, i / 2, 1, m)
            } else {
                embed(&p, (i - 1) / 2, 2, m)
            };
            let got = space.generator_matrix(Generator::new(i)).unwrap();
            for (ge, ex) in got.iter().zip(&expected) {
                assert!(dist(ge, ex) < 1e-14, "m = {m}, b_{i}");
            }
            let inv = space.generator_matrix(Generator::inv(i)).unwrap();
            for x in 0..inv.len() {
                for y in 0..inv.len() {
                    assert!((inv[x][y] - expected[y][x].conj()).norm() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn generators_are_unitary() {
    for model in models() {
        let space = FusionSpace::new(model, 8).unwrap();
        for i in 1..8 {
            let u = space.generator_matrix(Generator::new(i)).unwrap();
            let d = u.len();
            for a in 0..d {
                for b in 0..d {
                    let s: C64 = (0..d).map(|c| u[c][a].conj() * u[c][b]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((s - want).norm() < 1e-12, "{model} b_{i}");
                }
            }
        }
    }
}
