//! Exact local values, noise thresholds, and the lower-bound machinery.
//!
//! For a deterministic strategy in which Bob outputs `u` under `y = 1` and
//! `v` under `y = 2`, Alice's optimal response is fixed in closed form and
//! the achieved score is `s(u, v) = sum_{x in R+-} (lambda_x - lambda_x^2/2)`
//! where `R+-` collects the inputs in row `u` or column `v` without the cell
//! `(u, v)`. The local value is the maximum of `s` over the `d^2` strategies.
//! A brute-force enumeration over Alice's responses guards the closed form.
//!
//! The universal lower bound `beta_L >= d + sqrt(2) - 5/2` comes from
//! minimizing a Schur-concave bound over a capped probability simplex; the
//! extremal points of that polytope and the single-variable function they
//! induce are implemented here as runnable checks.

use crate::bases::OverlapMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LocalValueError {
    #[error("strategy index ({u},{v}) out of range for dimension {d}")]
    IndexOutOfRange { u: usize, v: usize, d: usize },
    #[error("brute-force enumeration supports d <= 6, got {0}")]
    DimensionTooLarge(usize),
    #[error("no vector of {n} entries capped at {tau} sums to {total}")]
    Infeasible { tau: f64, n: usize, total: f64 },
    #[error("argument {0} outside the domain (0, 1]")]
    DomainError(f64),
}

/// A local deterministic strategy: Bob's two outputs and Alice's response
/// table over `x = (x1, x2)`, entries in {-1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub u: usize,
    pub v: usize,
    /// Row-major over `x = (x1, x2)`.
    pub alice: Vec<i8>,
}

/// Local value report: the maximum, its strategy, the full score table, and
/// the visibility threshold.
#[derive(Debug, Clone)]
pub struct LocalValueReport {
    pub beta_l: f64,
    pub best_strategy: DeterministicStrategy,
    /// Row-major `s(u, v)` over all `d^2` Bob strategies.
    pub per_strategy_scores: Vec<f64>,
    /// Visibility at which the isotropic score `(d-1)(2 nu - 1)` meets
    /// `beta_L`: `nu* = (1 + beta_L / (d-1)) / 2`.
    pub nu_star: f64,
}

impl LocalValueReport {
    pub fn score(&self, u: usize, v: usize) -> f64 {
        let d = (self.per_strategy_scores.len() as f64).sqrt() as usize;
        self.per_strategy_scores[u * d + v]
    }
}

#[inline]
fn payoff(lambda: f64) -> f64 {
    lambda - 0.5 * lambda * lambda
}

#[inline]
fn lambda_of(o: &OverlapMatrix, x1: usize, x2: usize) -> f64 {
    (1.0 - o.get(x1, x2).powi(2)).sqrt()
}

/// Score of the strategy `(u, v)` with Alice's optimal response:
/// `s(u, v) = sum_{x in R+-} (lambda_x - lambda_x^2 / 2)`.
pub fn strategy_score(o: &OverlapMatrix, u: usize, v: usize) -> Result<f64, LocalValueError> {
    let d = o.dim();
    if u >= d || v >= d {
        return Err(LocalValueError::IndexOutOfRange { u, v, d });
    }
    let mut s = 0.0;
    for x2 in 0..d {
        if x2 != v {
            s += payoff(lambda_of(o, u, x2));
        }
    }
    for x1 in 0..d {
        if x1 != u {
            s += payoff(lambda_of(o, x1, v));
        }
    }
    Ok(s)
}

/// Exact local value by maximizing the closed-form strategy scores over the
/// `d^2` choices of `(u, v)`; ties break lexicographically.
pub fn local_value(o: &OverlapMatrix) -> LocalValueReport {
    let d = o.dim();
    let mut per_strategy_scores = Vec::with_capacity(d * d);
    let mut best = (0usize, 0usize);
    let mut beta_l = f64::NEG_INFINITY;
    for u in 0..d {
        for v in 0..d {
            let s = strategy_score(o, u, v).expect("indices in range");
            if s > beta_l {
                beta_l = s;
                best = (u, v);
            }
            per_strategy_scores.push(s);
        }
    }
    let (u, v) = best;
    let alice: Vec<i8> = (0..d * d)
        .map(|x| {
            let (x1, x2) = (x / d, x % d);
            i8::from(x1 == u) - i8::from(x2 == v)
        })
        .collect();
    let nu_star = 0.5 * (1.0 + beta_l / (d as f64 - 1.0));
    LocalValueReport {
        beta_l,
        best_strategy: DeterministicStrategy { u, v, alice },
        per_strategy_scores,
        nu_star,
    }
}

/// Brute-force local value: for every `(u, v)` enumerate all three of
/// Alice's responses per input independently and keep the best.
///
/// The objective is separable over `x`, so per-input enumeration is
/// exhaustive. Serves as the independent oracle for `local_value`.
pub fn local_value_oracle(o: &OverlapMatrix) -> Result<f64, LocalValueError> {
    let d = o.dim();
    if d > 6 {
        return Err(LocalValueError::DimensionTooLarge(d));
    }
    let mut best = f64::NEG_INFINITY;
    for u in 0..d {
        for v in 0..d {
            let mut total = 0.0;
            for x1 in 0..d {
                for x2 in 0..d {
                    let lambda = lambda_of(o, x1, x2);
                    let sign = f64::from(i8::from(x1 == u) - i8::from(x2 == v));
                    let mut cell = f64::NEG_INFINITY;
                    for a in [-1.0f64, 0.0, 1.0] {
                        cell = cell.max(lambda * sign * a - 0.5 * lambda * lambda * a * a);
                    }
                    total += cell;
                }
            }
            best = best.max(total);
        }
    }
    Ok(best)
}

/// Closed-form local value of the uniform MUB overlap matrix:
/// `2 (d-1) sqrt((d-1)/d) - (d-1)^2 / d`.
pub fn mub_local_value(d: usize) -> f64 {
    assert!(d >= 2);
    let dm1 = (d - 1) as f64;
    2.0 * dm1 * (dm1 / d as f64).sqrt() - dm1 * dm1 / d as f64
}

/// Universal lower bound on the local value: `d + sqrt(2) - 5/2`.
pub fn lower_bound(d: usize) -> f64 {
    assert!(d >= 2);
    d as f64 + std::f64::consts::SQRT_2 - 2.5
}

/// An extremal point of the capped probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexExtremal {
    pub tau: f64,
    pub n_coords: usize,
    pub vector: Vec<f64>,
}

/// All extremal points of `{t : 0 <= t_i <= tau, sum t_i = total}`:
/// the distinct permutations of `(tau, ..., tau, remainder, 0, ..., 0)`.
pub fn simplex_extremals(
    tau: f64,
    n: usize,
    total: f64,
) -> Result<Vec<SimplexExtremal>, LocalValueError> {
    if !(tau > 0.0 && tau <= total && total <= 1.0) || n == 0 {
        return Err(LocalValueError::Infeasible { tau, n, total });
    }
    if (n as f64) * tau < total - 1e-12 {
        return Err(LocalValueError::Infeasible { tau, n, total });
    }
    let mut full = (total / tau + 1e-12).floor() as usize;
    full = full.min(n);
    let mut remainder = total - full as f64 * tau;
    if remainder < 1e-12 {
        remainder = 0.0;
    }
    let mut canonical = vec![0.0; n];
    for slot in canonical.iter_mut().take(full) {
        *slot = tau;
    }
    if remainder > 0.0 {
        canonical[full] = remainder;
    }
    let mut out = Vec::new();
    let mut sorted = canonical.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    permute_distinct(&sorted, &mut Vec::new(), &mut out);
    Ok(out
        .into_iter()
        .map(|vector| SimplexExtremal { tau, n_coords: n, vector })
        .collect())
}

/// Generates all distinct permutations of a sorted multiset.
fn permute_distinct(pool: &[f64], prefix: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
    if pool.is_empty() {
        out.push(prefix.clone());
        return;
    }
    let mut last: Option<f64> = None;
    for i in 0..pool.len() {
        if last.is_some_and(|l| l == pool[i]) {
            continue;
        }
        last = Some(pool[i]);
        let mut rest = pool.to_vec();
        rest.remove(i);
        prefix.push(pool[i]);
        permute_distinct(&rest, prefix, out);
        prefix.pop();
    }
}

/// The single-variable bound
/// `s(tau) = 2 floor((1-tau)/tau) (sqrt(1-tau) - 1)
///           + 2 sqrt(tau (1 + floor((1-tau)/tau))) - tau - 2`,
/// continuous on `(0, 1]` and minimized at `tau = 1/2`.
pub fn s_tau(tau: f64) -> Result<f64, LocalValueError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(LocalValueError::DomainError(tau));
    }
    let floor_term = ((1.0 - tau) / tau).floor();
    Ok(2.0 * floor_term * ((1.0 - tau).sqrt() - 1.0) + 2.0 * (tau * (1.0 + floor_term)).sqrt()
        - tau
        - 2.0)
}

/// `g(n) = s(1/n)` restricted to positive integers.
pub fn g_at(n: usize) -> f64 {
    assert!(n >= 1);
    let nf = n as f64;
    2.0 * (nf - 1.0) * ((1.0 - 1.0 / nf).sqrt() - 1.0) - 1.0 / nf
}

/// Minimization summary of `g`: the continuous critical point
/// `(1 + sqrt 5)/2`, the integer minimizer `n = 2`, and the minimum
/// `sqrt(2) - 5/2`.
pub fn g_min() -> (f64, usize, f64) {
    let critical = (1.0 + 5f64.sqrt()) / 2.0;
    let best_integer = if g_at(1) <= g_at(2) { 1 } else { 2 };
    (critical, best_integer, g_at(best_integer))
}
