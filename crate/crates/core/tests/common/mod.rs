//! Shared generators and oracles for the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use rand::Rng;
use tailored_bell::functional::QuantumRealization;
use tailored_bell::matcore::{haar_unitary_from_rng, C64, ComplexMatrix};

/// Random full-rank density matrix from a complex Ginibre square.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let rho = g.mul(&g.dagger());
    let trace = rho.trace().re;
    rho.scale_re(1.0 / trace)
}

/// Random observable with spectrum in {-1, 0, +1}: a Haar conjugation of a
/// random trinary diagonal.
pub fn random_trinary_observable(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let u = haar_unitary_from_rng(dim, rng);
    let values: Vec<f64> = (0..dim)
        .map(|_| [-1.0f64, 0.0, 1.0][rng.random_range(0..3)])
        .collect();
    let mut scaled = u.clone();
    for j in 0..dim {
        for i in 0..dim {
            scaled[(i, j)] = scaled[(i, j)].scale(values[j]);
        }
    }
    scaled.mul(&u.dagger())
}

/// Random rank-one projective measurement: projectors onto Haar columns.
pub fn random_projective_measurement(dim: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let u = haar_unitary_from_rng(dim, rng);
    (0..dim).map(|k| u.column_projector(k)).collect()
}

/// Fully random realization of the scenario on local dimension `d`.
pub fn random_realization(d: usize, rng: &mut impl Rng) -> QuantumRealization {
    let state = random_density(d * d, rng);
    let alice = (0..d * d).map(|_| random_trinary_observable(d, rng)).collect();
    let bob_p = random_projective_measurement(d, rng);
    let bob_q = random_projective_measurement(d, rng);
    QuantumRealization::new(d, (d, d), state, alice, bob_p, bob_q)
        .expect("generated realizations are well-formed")
}

/// Vertices of `{t : 0 <= t_i <= tau, sum t_i = total}` by active-set
/// enumeration: every coordinate pinned at a bound except at most one,
/// which the sum constraint then fixes.
pub fn capped_simplex_vertices_bruteforce(tau: f64, n: usize, total: f64) -> Vec<Vec<f64>> {
    let tol = 1e-9;
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut push_unique = |candidate: Vec<f64>| {
        let duplicate = found.iter().any(|v| {
            v.iter().zip(&candidate).all(|(a, b)| (a - b).abs() < 1e-8)
        });
        if !duplicate {
            found.push(candidate);
        }
    };
    // free = n means every coordinate is pinned.
    for free in 0..=n {
        for mask in 0u32..(1 << n) {
            let mut vec = vec![0.0; n];
            let mut pinned_sum = 0.0;
            let mut valid = true;
            for i in 0..n {
                if i == free {
                    continue;
                }
                if mask & (1 << i) != 0 {
                    vec[i] = tau;
                    pinned_sum += tau;
                }
            }
            if free < n {
                let value = total - pinned_sum;
                if value < -tol || value > tau + tol {
                    valid = false;
                } else {
                    vec[free] = value.clamp(0.0, tau);
                }
            } else if (pinned_sum - total).abs() > tol {
                valid = false;
            }
            if valid {
                push_unique(vec);
            }
        }
    }
    found
}

/// Kolmogorov-Smirnov p-value for a sample against the uniform law on
/// [0, 1], via the asymptotic Kolmogorov distribution.
pub fn ks_uniform_p_value(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d_stat = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let upper = (i as f64 + 1.0) / n - x;
        let lower = x - i as f64 / n;
        d_stat = d_stat.max(upper.max(lower));
    }
    let lambda = n.sqrt() * d_stat;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1.0f64).powi(k as i32 - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        p += term;
    }
    p.clamp(0.0, 1.0)
}
