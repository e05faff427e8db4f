//! Property suites for the algebraic and statistical invariants.

mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tailored_bell::bases::{
    haar_overlap, is_unistochastic_3x3, overlap_of, BasisPair, UnistochasticClass,
};
use tailored_bell::functional::{
    born_behavior, evaluate_behavior, evaluate_realization, functional_from_overlap,
    gamma_of_realization, Behavior,
};
use tailored_bell::localvalue::{local_value, local_value_oracle, lower_bound};
use tailored_bell::matcore::{
    eig_hermitian, expm_hermitian, haar_unitary, haar_unitary_from_rng, kron, partial_trace, C64,
    ComplexMatrix, Subsystem,
};
use tailored_bell::search::perturb_unitary;

fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        use rand::Rng;
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    g.add(&g.dagger()).scale_re(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_reconstructs_hermitian_input(dim in 2usize..8, seed in 0u64..1_000_000) {
        let m = random_hermitian(dim, seed);
        let eig = eig_hermitian(&m).unwrap();
        let v = &eig.eigenvectors;
        let recon = v.mul(&ComplexMatrix::diag_real(&eig.eigenvalues)).mul(&v.dagger());
        prop_assert!(recon.max_abs_diff(&m) < 1e-10);
        prop_assert!(v.unitarity_residual() < 1e-10);
        for w in eig.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn partial_trace_of_kron_factorizes(da in 2usize..5, db in 2usize..5, seed in 0u64..1_000_000) {
        let a = random_hermitian(da, seed);
        let b = random_hermitian(db, seed.wrapping_add(1));
        let joint = kron(&a, &b);
        let reduced = partial_trace(&joint, Subsystem::B, (da, db)).unwrap();
        let expect = a.scale(b.trace());
        prop_assert!(reduced.max_abs_diff(&expect) < 1e-10);
        let reduced_a = partial_trace(&joint, Subsystem::A, (da, db)).unwrap();
        prop_assert!(reduced_a.max_abs_diff(&b.scale(a.trace())) < 1e-10);
    }

    #[test]
    fn expm_of_hermitian_is_unitary(dim in 2usize..7, seed in 0u64..1_000_000) {
        let h = random_hermitian(dim, seed);
        let u = expm_hermitian(&h).unwrap();
        prop_assert!(u.unitarity_residual() < 1e-10);
    }

    #[test]
    fn behavior_evaluation_is_linear(seed in 0u64..100_000, alpha in 0.0f64..1.0) {
        let d = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = born_behavior(&random_realization(d, &mut rng)).unwrap();
        let q = born_behavior(&random_realization(d, &mut rng)).unwrap();
        let mixed_table: Vec<f64> = p
            .table()
            .iter()
            .zip(q.table())
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        let mixed = Behavior::new(d, mixed_table).unwrap();
        let f = functional_from_overlap(&haar_overlap(d, &mut rng)).unwrap();
        let (cp, fp) = evaluate_behavior(&f, &p).unwrap();
        let (cq, fq) = evaluate_behavior(&f, &q).unwrap();
        let (cm, fm) = evaluate_behavior(&f, &mixed).unwrap();
        prop_assert!((cm - (alpha * cp + (1.0 - alpha) * cq)).abs() < 1e-12);
        prop_assert!((fm - (alpha * fp + (1.0 - alpha) * fq)).abs() < 1e-12);
    }
}

#[test]
fn realization_and_behavior_evaluations_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for d in 2..=4 {
        for _ in 0..20 {
            let r = random_realization(d, &mut rng);
            let f = functional_from_overlap(&haar_overlap(d, &mut rng)).unwrap();
            let direct = evaluate_realization(&f, &r).unwrap();
            let via_behavior = evaluate_behavior(&f, &born_behavior(&r).unwrap()).unwrap();
            assert!((direct.0 - via_behavior.0).abs() < 1e-10);
            assert!((direct.1 - via_behavior.1).abs() < 1e-10);
        }
    }
}

#[test]
fn quantum_value_is_never_exceeded() {
    // Falsification run for the d - 1 upper bound.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for d in 2..=4 {
        let f = functional_from_overlap(&tailored_bell::bases::mub_overlap(d)).unwrap();
        for _ in 0..1000 {
            let r = random_realization(d, &mut rng);
            let (_, fd) = evaluate_realization(&f, &r).unwrap();
            assert!(fd <= d as f64 - 1.0 + 1e-8, "d={d}: F = {fd}");
        }
    }
}

#[test]
fn gamma_bound_holds_for_projective_realizations() {
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    for d in 2..=3 {
        for _ in 0..200 {
            let o = haar_overlap(d, &mut rng);
            let f = match functional_from_overlap(&o) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let r = random_realization(d, &mut rng);
            let (_, fd) = evaluate_realization(&f, &r).unwrap();
            let gamma = gamma_of_realization(&f, &r).unwrap();
            let bound = (2.0 * (d as f64 - 1.0) * gamma).sqrt() - 0.5 * gamma;
            assert!(fd <= bound + 1e-8, "d={d}: F = {fd}, bound = {bound}");
        }
    }
}

#[test]
fn haar_overlap_moduli_distribution() {
    // |U_11|^2 of a Haar 2x2 unitary is uniform on [0, 1].
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let mut samples: Vec<f64> = (0..10_000)
        .map(|_| {
            let u = haar_unitary_from_rng(2, &mut rng);
            u.entries()[0].norm_sqr()
        })
        .collect();
    let p = ks_uniform_p_value(&mut samples);
    assert!(p > 0.01, "KS p-value {p}");
}

#[test]
fn haar_sampled_squared_overlaps_are_unistochastic() {
    // 1e4 samples: |U|^2 of a 3x3 unitary may touch but never leave the
    // unistochastic set under the chain-links classification.
    let mut rng = ChaCha8Rng::seed_from_u64(161803);
    for _ in 0..10_000 {
        let o = haar_overlap(3, &mut rng);
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = o.get(i, j).powi(2);
            }
        }
        let class = is_unistochastic_3x3(&t, 1e-9).unwrap();
        assert_ne!(class, UnistochasticClass::Outside);
    }
}

#[test]
fn oracle_agrees_with_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for d in 2..=4 {
        for _ in 0..200 {
            let o = haar_overlap(d, &mut rng);
            let closed = local_value(&o).beta_l;
            let brute = local_value_oracle(&o).unwrap();
            assert!((closed - brute).abs() < 1e-12, "d={d}");
        }
    }
}

#[test]
fn theorem_floor_on_haar_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(999);
    for d in 2..=6 {
        let floor = lower_bound(d);
        for _ in 0..200 {
            let o = haar_overlap(d, &mut rng);
            assert!(local_value(&o).beta_l >= floor - 1e-9, "d={d}");
        }
    }
}

#[test]
fn preprocessed_pairs_evaluate_to_quantum_value() {
    // Haar pairs never share a vector, so preprocessing is the identity and
    // the canonical realization reaches d - 1.
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for d in 2..=4 {
        for _ in 0..10 {
            let e = haar_unitary_from_rng(d, &mut rng);
            let f = haar_unitary_from_rng(d, &mut rng);
            let pair = BasisPair::new(e, f).unwrap();
            let report = tailored_bell::bases::preprocess(&pair, 1e-9).unwrap();
            assert_eq!(report.effective_dim, d);
            let c = tailored_bell::realization::canonical(&report.truncated).unwrap();
            let functional = functional_from_overlap(c.overlap()).unwrap();
            let (_, fd) = evaluate_realization(&functional, c.realization()).unwrap();
            assert!((fd - (d as f64 - 1.0)).abs() < 1e-9);
            assert!(c.overlap().max_abs_diff(&overlap_of(&pair)) < 1e-12);
        }
    }
}

#[test]
fn perturbation_changes_local_value_smoothly() {
    // Small tangent steps never jump the objective by more than 0.1.
    let mut rng = ChaCha8Rng::seed_from_u64(31415);
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let u = haar_unitary_from_rng(3, &mut rng);
        let before = local_value(&haar_overlap_of(&u)).beta_l;
        let v = perturb_unitary(&u, 1e-3, trial).unwrap();
        let after = local_value(&haar_overlap_of(&v)).beta_l;
        worst = worst.max((after - before).abs());
    }
    assert!(worst < 0.1, "largest jump {worst}");
}

fn haar_overlap_of(u: &ComplexMatrix) -> tailored_bell::bases::OverlapMatrix {
    let d = u.rows();
    let entries = (0..d * d).map(|k| u.entries()[k].norm().min(1.0)).collect();
    tailored_bell::bases::OverlapMatrix::new(d, entries).unwrap()
}

#[test]
fn simplex_extremals_match_vertex_enumeration() {
    for n in 1..=5usize {
        for tau in [0.3, 0.4, 0.5, 1.0] {
            let total = 1.0;
            if (n as f64) * tau < total {
                continue;
            }
            let extremals = tailored_bell::localvalue::simplex_extremals(tau, n, total).unwrap();
            let brute = capped_simplex_vertices_bruteforce(tau, n, total);
            assert_eq!(
                extremals.len(),
                brute.len(),
                "count mismatch for tau={tau}, n={n}: {extremals:?} vs {brute:?}"
            );
            for vertex in &brute {
                let hit = extremals.iter().any(|e| {
                    e.vector.iter().zip(vertex).all(|(a, b)| (a - b).abs() < 1e-8)
                });
                assert!(hit, "vertex {vertex:?} missing for tau={tau}, n={n}");
            }
        }
    }
}

#[test]
fn haar_unitarity_up_to_16() {
    for d in 2..=16 {
        let u = haar_unitary(d, d as u64 * 7 + 1);
        assert!(u.unitarity_residual() < 1e-10, "d={d}");
    }
}
