//! Derivative-free minimization of the local value over overlap matrices.
//!
//! Candidates are kept on the unitary group: each restart draws a Haar
//! starting point and a pattern search walks it by left-multiplying with
//! elementary rotations `exp(i theta H)` over a fixed basis of Hermitian
//! directions, halving the step whenever no direction improves. Working on
//! unitaries (rather than bistochastic matrices) keeps every candidate's
//! entrywise absolute value a genuine overlap matrix, which matters for odd
//! dimensions where the unistochastic set is a proper subset of the
//! bistochastic one.
//!
//! The objective is piecewise smooth (a maximum over `d^2` strategies), so a
//! direct search is used rather than anything gradient-based.

use crate::bases::OverlapMatrix;
use crate::localvalue::{local_value, lower_bound};
use crate::matcore::{eig_hermitian, expm_hermitian, C64, ComplexMatrix, MatError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    NotUnitary(#[from] MatError),
}

/// Multistart pattern-search configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub d: usize,
    pub restarts: usize,
    /// Objective-evaluation budget per restart.
    pub max_iters: usize,
    pub step_init: f64,
    pub step_min: f64,
    pub seed: u64,
}

impl SearchConfig {
    /// Desk-scale defaults: 100 restarts for d <= 4, fewer above.
    pub fn default_for(d: usize) -> Self {
        assert!(d >= 2);
        let restarts = if d <= 4 { 100 } else { 40 };
        Self { d, restarts, max_iters: 2000, step_init: 0.5, step_min: 1e-8, seed: 1 }
    }
}

/// Outcome of a search: the best candidate plus per-restart diagnostics.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_beta_l: f64,
    pub best_unitary: ComplexMatrix,
    pub best_overlap: OverlapMatrix,
    /// Improvement events `(evaluation index, objective)` of the winning
    /// restart, starting with the initial point at index 0.
    pub trajectory: Vec<(usize, f64)>,
    /// Final objective of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

/// Overlap matrix of a unitary: entrywise absolute values.
fn overlap_of_unitary(u: &ComplexMatrix) -> OverlapMatrix {
    let d = u.rows();
    let entries = (0..d * d).map(|k| u.entries()[k].norm().min(1.0)).collect();
    OverlapMatrix::new(d, entries).expect("|U| of a unitary is an overlap matrix")
}

/// Local value of `|U|`, asserting the universal floor on every candidate.
fn objective(u: &ComplexMatrix) -> f64 {
    let o = overlap_of_unitary(u);
    let beta = local_value(&o).beta_l;
    let floor = lower_bound(o.dim());
    assert!(
        beta >= floor - 1e-9,
        "local value {beta} below the proven floor {floor}: objective bug"
    );
    beta
}

/// Seeded random Hermitian direction, rescaled to unit spectral norm.
fn random_unit_hermitian(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let re = rng.random::<f64>() - 0.5;
            let im = if i == j { 0.0 } else { rng.random::<f64>() - 0.5 };
            h[(i, j)] = C64::new(re, im);
            h[(j, i)] = C64::new(re, -im);
        }
    }
    let eig = eig_hermitian(&h).expect("constructed Hermitian");
    let spectral = eig.eigenvalues.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if spectral > 0.0 {
        h = h.scale_re(1.0 / spectral);
    }
    h
}

/// Elementary plane directions: for every row pair, the symmetric and
/// antisymmetric Hermitian generators of the embedded 2x2 rotation. These
/// are the directions that change `|U|` under left multiplication (diagonal
/// generators only rephase rows).
fn direction_pairs(d: usize) -> Vec<(usize, usize, bool)> {
    let mut dirs = Vec::with_capacity(d * (d - 1));
    for j in 0..d {
        for k in (j + 1)..d {
            dirs.push((j, k, false)); // exp(i theta (E_jk + E_kj))
            dirs.push((j, k, true)); // exp(i theta i(E_jk - E_kj))
        }
    }
    dirs
}

/// `exp(i theta H) U` for an elementary generator `H` on rows `j, k`.
fn apply_plane_rotation(
    u: &ComplexMatrix,
    j: usize,
    k: usize,
    antisym: bool,
    theta: f64,
) -> ComplexMatrix {
    let d = u.rows();
    let (c, s) = (theta.cos(), theta.sin());
    let mut out = u.clone();
    for col in 0..d {
        let uj = u[(j, col)];
        let uk = u[(k, col)];
        let (nj, nk) = if antisym {
            // Real Givens rotation.
            (uj.scale(c) + uk.scale(s), uk.scale(c) - uj.scale(s))
        } else {
            // Symmetric generator: cos on the diagonal, i sin off it.
            (uj.scale(c) + uk * C64::new(0.0, s), uk.scale(c) + uj * C64::new(0.0, s))
        };
        out[(j, col)] = nj;
        out[(k, col)] = nk;
    }
    out
}

struct RestartOutcome {
    value: f64,
    unitary: ComplexMatrix,
    trajectory: Vec<(usize, f64)>,
}

struct RestartState {
    u: ComplexMatrix,
    value: f64,
    evals: usize,
    trajectory: Vec<(usize, f64)>,
}

impl RestartState {
    /// Rides one candidate map while it improves; returns whether any move
    /// was accepted, or `None` when the evaluation budget ran out.
    fn ride(&mut self, max_iters: usize, advance: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Option<bool> {
        let mut accepted = false;
        loop {
            if self.evals >= max_iters {
                return None;
            }
            let candidate = advance(&self.u);
            let cand_value = objective(&candidate);
            self.evals += 1;
            if cand_value < self.value {
                self.u = candidate;
                self.value = cand_value;
                self.trajectory.push((self.evals, self.value));
                accepted = true;
            } else {
                return Some(accepted);
            }
        }
    }
}

fn run_restart(cfg: &SearchConfig, restart_index: usize) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart_index as u64));
    let u = crate::matcore::haar_unitary_from_rng(cfg.d, &mut rng);
    let value = objective(&u);
    let mut state =
        RestartState { u, value, evals: 0, trajectory: vec![(0usize, value)] };
    let dirs = direction_pairs(cfg.d);
    let mut step = cfg.step_init;
    'outer: while step >= cfg.step_min && state.evals < cfg.max_iters {
        // Sweep the elementary plane rotations; cheap and fast to converge
        // wherever the objective is smooth.
        let mut improved = false;
        for &(j, k, antisym) in &dirs {
            for sign in [1.0f64, -1.0] {
                match state.ride(cfg.max_iters, |u| {
                    apply_plane_rotation(u, j, k, antisym, sign * step)
                }) {
                    Some(acc) => improved |= acc,
                    None => break 'outer,
                }
            }
        }
        if improved {
            continue;
        }
        // The sweep jammed: the max over strategies has kinks where no
        // single-plane move descends. Random Hermitian directions probe the
        // full tangent cone.
        for _ in 0..2 * cfg.d * cfg.d {
            let h = random_unit_hermitian(cfg.d, &mut rng);
            let rotation = expm_hermitian(&h.scale_re(step)).expect("Hermitian direction");
            for rot in [rotation.clone(), rotation.dagger()] {
                match state.ride(cfg.max_iters, |u| rot.mul(u)) {
                    Some(acc) => improved |= acc,
                    None => break 'outer,
                }
                if improved {
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    RestartOutcome { value: state.value, unitary: state.u, trajectory: state.trajectory }
}

/// Multistart minimization of `beta_L(|U|)` over unitaries.
///
/// Restart `r` seeds its own generator with `seed + r`; results are merged
/// by `(value, restart index)`, so the outcome is reproducible regardless of
/// scheduling.
pub fn minimize_local_value(cfg: &SearchConfig) -> SearchResult {
    assert!(cfg.restarts >= 1, "need at least one restart");
    assert!(cfg.step_min < cfg.step_init, "step_min must be below step_init");
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(cfg, r))
        .collect();
    let restart_values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let best_index = (0..outcomes.len())
        .min_by(|&a, &b| outcomes[a].value.total_cmp(&outcomes[b].value))
        .expect("at least one restart");
    let best = &outcomes[best_index];
    SearchResult {
        best_beta_l: best.value,
        best_unitary: best.unitary.clone(),
        best_overlap: overlap_of_unitary(&best.unitary),
        trajectory: best.trajectory.clone(),
        restart_values,
    }
}

/// Random tangent-space perturbation: `exp(i step H) U` with `H` a seeded
/// random Hermitian rescaled to unit spectral norm.
pub fn perturb_unitary(
    u: &ComplexMatrix,
    step: f64,
    seed: u64,
) -> Result<ComplexMatrix, SearchError> {
    u.check_unitary(crate::matcore::HERMITICITY_TOL)?;
    let d = u.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let re = rng.random::<f64>() - 0.5;
            let im = if i == j { 0.0 } else { rng.random::<f64>() - 0.5 };
            h[(i, j)] = C64::new(re, im);
            h[(j, i)] = C64::new(re, -im);
        }
    }
    let eig = eig_hermitian(&h).expect("constructed Hermitian");
    let spectral = eig.eigenvalues.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if spectral > 0.0 {
        h = h.scale_re(step / spectral);
    }
    let rotation = expm_hermitian(&h).expect("Hermitian by construction");
    Ok(rotation.mul(u))
}

/// One row of the noise-robustness comparison.
#[derive(Debug, Clone)]
pub struct FamilyRow {
    pub family: String,
    pub beta_l: f64,
    pub nu_star: f64,
}

/// Compares the local values (and visibility thresholds) of the named
/// overlap families in dimension `d` against a fresh search, sorted by
/// ascending local value.
pub fn compare_families(d: usize) -> Vec<FamilyRow> {
    assert!(d >= 2);
    let mut rows = Vec::new();
    let mut push = |family: &str, o: &OverlapMatrix| {
        let report = local_value(o);
        rows.push(FamilyRow {
            family: family.to_string(),
            beta_l: report.beta_l,
            nu_star: report.nu_star,
        });
    };
    push("mub", &crate::bases::mub_overlap(d));
    if d % 2 == 0 {
        push("qubit-mub-blocks", &crate::bases::qubit_mub_blocks(d).expect("even d"));
    } else if d >= 3 {
        push("odd-counterexample", &crate::bases::odd_counterexample(d).expect("odd d"));
    }
    let search = minimize_local_value(&SearchConfig::default_for(d));
    rows.push(FamilyRow {
        family: "search".to_string(),
        beta_l: search.best_beta_l,
        nu_star: 0.5 * (1.0 + search.best_beta_l / (d as f64 - 1.0)),
    });
    rows.sort_by(|a, b| a.beta_l.total_cmp(&b.beta_l));
    rows
}

/// Smallest entrywise distance between `a` and any simultaneous row/column
/// permutation of `b`. Exhaustive over both permutation groups; meant for
/// the small dimensions the search runs at.
pub fn permutation_distance(a: &OverlapMatrix, b: &OverlapMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim());
    let d = a.dim();
    assert!(d <= 6, "exhaustive permutation match is for d <= 6");
    let mut best = f64::INFINITY;
    let perms = permutations(d);
    for rp in &perms {
        for cp in &perms {
            let mut worst = 0.0f64;
            'scan: for i in 0..d {
                for j in 0..d {
                    let diff = (a.get(i, j) - b.get(rp[i], cp[j])).abs();
                    worst = worst.max(diff);
                    if worst >= best {
                        break 'scan;
                    }
                }
            }
            best = best.min(worst);
        }
    }
    best
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..d).collect();
    heap_permute(&mut items, d, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{conj_overlap_3, qubit_mub_blocks};
    use crate::matcore::haar_unitary;

    #[test]
    fn perturb_zero_step_is_identity_map() {
        let u = haar_unitary(3, 11);
        let v = perturb_unitary(&u, 0.0, 5).unwrap();
        assert!(u.max_abs_diff(&v) < 1e-12);
    }

    #[test]
    fn perturb_stays_unitary() {
        let u = haar_unitary(4, 12);
        for (step, seed) in [(0.1, 1u64), (1.0, 2), (3.0, 3)] {
            let v = perturb_unitary(&u, step, seed).unwrap();
            assert!(v.unitarity_residual() < 1e-10);
        }
    }

    #[test]
    fn perturb_rejects_non_unitary() {
        let m = ComplexMatrix::zeros(2, 2);
        assert!(matches!(perturb_unitary(&m, 0.1, 0), Err(SearchError::NotUnitary(_))));
    }

    #[test]
    fn random_directions_have_unit_spectral_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let h = random_unit_hermitian(3, &mut rng);
            assert!(h.hermiticity_residual() < 1e-14);
            let eig = eig_hermitian(&h).unwrap();
            let spectral = eig.eigenvalues.iter().fold(0.0f64, |m, w| m.max(w.abs()));
            assert!((spectral - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn search_finds_qubit_optimum() {
        let cfg = SearchConfig { d: 2, restarts: 20, max_iters: 600, step_init: 0.5, step_min: 1e-8, seed: 7 };
        let result = minimize_local_value(&cfg);
        assert!((result.best_beta_l - lower_bound(2)).abs() < 1e-6, "got {}", result.best_beta_l);
    }

    #[test]
    fn search_is_reproducible() {
        let cfg = SearchConfig { d: 3, restarts: 4, max_iters: 300, step_init: 0.5, step_min: 1e-6, seed: 9 };
        let a = minimize_local_value(&cfg);
        let b = minimize_local_value(&cfg);
        assert_eq!(a.best_beta_l.to_bits(), b.best_beta_l.to_bits());
        assert_eq!(a.best_unitary, b.best_unitary);
        assert_eq!(a.restart_values, b.restart_values);
        assert_eq!(a.trajectory, b.trajectory);
    }

    #[test]
    fn trajectory_is_monotone() {
        let cfg = SearchConfig { d: 3, restarts: 2, max_iters: 400, step_init: 0.5, step_min: 1e-8, seed: 3 };
        let result = minimize_local_value(&cfg);
        for w in result.trajectory.windows(2) {
            assert!(w[1].1 < w[0].1);
            assert!(w[1].0 > w[0].0);
        }
        assert_eq!(result.restart_values.len(), 2);
    }

    #[test]
    fn permutation_distance_on_named_matrices() {
        let o = conj_overlap_3();
        assert!(permutation_distance(&o, &o) < 1e-15);
        // Row/column permuted copy.
        let permuted = OverlapMatrix::new(
            3,
            vec![
                o.get(1, 2), o.get(1, 0), o.get(1, 1),
                o.get(2, 2), o.get(2, 0), o.get(2, 1),
                o.get(0, 2), o.get(0, 0), o.get(0, 1),
            ],
        )
        .unwrap();
        assert!(permutation_distance(&permuted, &o) < 1e-15);
        let blocks = qubit_mub_blocks(4).unwrap();
        let mub = crate::bases::mub_overlap(4);
        assert!(permutation_distance(&blocks, &mub) > 0.4);
    }

    #[test]
    fn compare_families_small_dims() {
        let rows3 = compare_families(3);
        assert!(rows3.windows(2).all(|w| w[0].beta_l <= w[1].beta_l));
        let mub = rows3.iter().find(|r| r.family == "mub").unwrap();
        let conj = rows3.iter().find(|r| r.family == "odd-counterexample").unwrap();
        assert!((mub.beta_l - 1.932653).abs() < 1e-6);
        assert!((conj.beta_l - 1.931886).abs() < 1e-6);
        assert!(mub.beta_l > conj.beta_l);

        let rows4 = compare_families(4);
        let mub4 = rows4.iter().find(|r| r.family == "mub").unwrap();
        let blocks4 = rows4.iter().find(|r| r.family == "qubit-mub-blocks").unwrap();
        assert!((mub4.beta_l - 2.946152).abs() < 1e-6);
        assert!((blocks4.beta_l - 2.914214).abs() < 1e-6);
        assert!(blocks4.beta_l < mub4.beta_l);

        let rows5 = compare_families(5);
        let mub5 = rows5.iter().find(|r| r.family == "mub").unwrap();
        let odd5 = rows5.iter().find(|r| r.family == "odd-counterexample").unwrap();
        assert!((mub5.beta_l - 3.955418).abs() < 1e-6);
        assert!((odd5.beta_l - 3.931886).abs() < 1e-6);
        assert!(odd5.beta_l < mub5.beta_l);
    }
}
