//! The Bell scenario, the tailored functionals, and their evaluation.
//!
//! For a `d`-dimensional overlap matrix the functional weights are
//! `lambda_x = sqrt(1 - O_{x1 x2}^2)` over Alice inputs `x = (x1, x2)`. The
//! correlation score rewards Alice for guessing which measurement Bob
//! performed whenever Bob's outcome matches the corresponding half of her
//! input, and the final score subtracts a penalty proportional to
//! `lambda_x^2` whenever she plays at all. Scores can be evaluated on raw
//! behaviors or on quantum realizations through the Born rule; the two
//! routes agree to 1e-10.

use crate::bases::OverlapMatrix;
use crate::matcore::{eig_hermitian, kron_expectation, C64, ComplexMatrix};
use thiserror::Error;

/// Tolerance for behavior normalization and no-signaling.
pub const BEHAVIOR_TOL: f64 = 1e-9;

/// Half-width of the band around {-1, 0, +1} accepted for observable spectra.
pub const TRINARY_BAND: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("overlap entry ({row},{col}) = {value} is within 1e-9 of one; preprocess the pair first")]
    UnitOverlapPresent { row: usize, col: usize, value: f64 },
    #[error("bases {basis_j} and {basis_k} share vector directions at entry ({row},{col})")]
    UnitOverlapPresentPair { basis_j: usize, basis_k: usize, row: usize, col: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid realization: {0}")]
    InvalidRealization(String),
    #[error("observable for input ({x1},{x2}) has eigenvalue {eigenvalue} outside the {{-1,0,1}} band")]
    SpectrumNotTrinary { x1: usize, x2: usize, eigenvalue: f64 },
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
}

/// The Bell scenario parametrized by `d`: Alice receives `x = (x1, x2)` with
/// `x1, x2` in `[d]` and outputs one of {1, 2, bot}; Bob receives `y` in
/// {1, 2} and outputs an element of `[d]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    d: usize,
}

impl Scenario {
    pub fn new(d: usize) -> Self {
        assert!(d >= 2, "scenario dimension must be at least 2");
        Self { d }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alice_inputs(&self) -> usize {
        self.d * self.d
    }

    pub const ALICE_OUTPUTS: usize = 3;
    pub const BOB_INPUTS: usize = 2;
}

/// Alice output labels, in the fixed index order 0:'1', 1:'2', 2:'bot'.
pub const ALICE_PLAY_FIRST: usize = 0;
pub const ALICE_PLAY_SECOND: usize = 1;
pub const ALICE_ABSTAIN: usize = 2;

/// A tailored Bell functional: the scenario dimension plus the weight table.
#[derive(Debug, Clone)]
pub struct BellFunctional {
    scenario: Scenario,
    /// `lambda_x` in row-major order over `x = (x1, x2)`.
    weights: Vec<f64>,
}

impl BellFunctional {
    /// Internal constructor from a precomputed weight table.
    pub(crate) fn from_weights(d: usize, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), d * d);
        Self { scenario: Scenario::new(d), weights }
    }

    pub fn d(&self) -> usize {
        self.scenario.d
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn weight(&self, x1: usize, x2: usize) -> f64 {
        self.weights[x1 * self.d() + x2]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The quantum value `d - 1`, independent of the overlap matrix.
    pub fn quantum_value(&self) -> f64 {
        (self.d() - 1) as f64
    }
}

/// Builds the functional tailored to an overlap matrix with all entries
/// strictly below one.
pub fn functional_from_overlap(o: &OverlapMatrix) -> Result<BellFunctional, FunctionalError> {
    let d = o.dim();
    let mut weights = Vec::with_capacity(d * d);
    for x1 in 0..d {
        for x2 in 0..d {
            let v = o.get(x1, x2);
            if v >= 1.0 - 1e-9 {
                return Err(FunctionalError::UnitOverlapPresent { row: x1, col: x2, value: v });
            }
            weights.push((1.0 - v * v).sqrt());
        }
    }
    Ok(BellFunctional::from_weights(d, weights))
}

/// Full conditional probability table `p(a, b | x, y)`.
///
/// Storage is row-major over `[y][x1][x2][a][b]` with the Alice output order
/// 0:'1', 1:'2', 2:'bot'. Construction validates normalization and
/// no-signaling in both directions to 1e-9.
#[derive(Debug, Clone)]
pub struct Behavior {
    d: usize,
    p: Vec<f64>,
}

impl Behavior {
    pub fn new(d: usize, p: Vec<f64>) -> Result<Self, FunctionalError> {
        let expected = 2 * d * d * 3 * d;
        if p.len() != expected {
            return Err(FunctionalError::ShapeMismatch(format!(
                "behavior table has {} entries, expected {}",
                p.len(),
                expected
            )));
        }
        let beh = Self { d, p };
        beh.validate()?;
        Ok(beh)
    }

    fn validate(&self) -> Result<(), FunctionalError> {
        let d = self.d;
        for v in &self.p {
            if *v < -BEHAVIOR_TOL || !v.is_finite() {
                return Err(FunctionalError::InvalidBehavior(format!(
                    "probability {v} is negative or non-finite"
                )));
            }
        }
        for y in 0..2 {
            for x1 in 0..d {
                for x2 in 0..d {
                    let mut total = 0.0;
                    for a in 0..3 {
                        for b in 0..d {
                            total += self.get(y, x1, x2, a, b);
                        }
                    }
                    if (total - 1.0).abs() > BEHAVIOR_TOL {
                        return Err(FunctionalError::InvalidBehavior(format!(
                            "p(.|x=({x1},{x2}), y={y}) sums to {total}"
                        )));
                    }
                }
            }
        }
        // Alice's marginal must not depend on y.
        for x1 in 0..d {
            for x2 in 0..d {
                for a in 0..3 {
                    let m0: f64 = (0..d).map(|b| self.get(0, x1, x2, a, b)).sum();
                    let m1: f64 = (0..d).map(|b| self.get(1, x1, x2, a, b)).sum();
                    if (m0 - m1).abs() > BEHAVIOR_TOL {
                        return Err(FunctionalError::InvalidBehavior(format!(
                            "Alice marginal for a={a}, x=({x1},{x2}) depends on y: {m0} vs {m1}"
                        )));
                    }
                }
            }
        }
        // Bob's marginal must not depend on x.
        for y in 0..2 {
            for b in 0..d {
                let reference: f64 = (0..3).map(|a| self.get(y, 0, 0, a, b)).sum();
                for x1 in 0..d {
                    for x2 in 0..d {
                        let m: f64 = (0..3).map(|a| self.get(y, x1, x2, a, b)).sum();
                        if (m - reference).abs() > BEHAVIOR_TOL {
                            return Err(FunctionalError::InvalidBehavior(format!(
                                "Bob marginal for b={b}, y={y} depends on x: {m} vs {reference}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    fn idx(&self, y: usize, x1: usize, x2: usize, a: usize, b: usize) -> usize {
        let d = self.d;
        ((((y * d + x1) * d + x2) * 3) + a) * d + b
    }

    pub fn get(&self, y: usize, x1: usize, x2: usize, a: usize, b: usize) -> f64 {
        self.p[self.idx(y, x1, x2, a, b)]
    }

    pub fn table(&self) -> &[f64] {
        &self.p
    }

    /// Alice's marginal `p(a|x)`, averaged over Bob's input.
    pub fn alice_marginal(&self, x1: usize, x2: usize, a: usize) -> f64 {
        let m0: f64 = (0..self.d).map(|b| self.get(0, x1, x2, a, b)).sum();
        let m1: f64 = (0..self.d).map(|b| self.get(1, x1, x2, a, b)).sum();
        0.5 * (m0 + m1)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.d, other.d);
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Behavior of a local deterministic strategy: Bob outputs `u` for `y = 1`
/// and `v` for `y = 2`; Alice answers according to `alice[x]` in {-1, 0, +1}
/// (+1 plays '1', -1 plays '2', 0 abstains).
pub fn deterministic_behavior(d: usize, u: usize, v: usize, alice: &[i8]) -> Behavior {
    assert_eq!(alice.len(), d * d);
    assert!(u < d && v < d);
    let mut p = vec![0.0; 2 * d * d * 3 * d];
    let scenario_idx = |y: usize, x1: usize, x2: usize, a: usize, b: usize| {
        ((((y * d + x1) * d + x2) * 3) + a) * d + b
    };
    for x1 in 0..d {
        for x2 in 0..d {
            let a = match alice[x1 * d + x2] {
                1 => ALICE_PLAY_FIRST,
                -1 => ALICE_PLAY_SECOND,
                0 => ALICE_ABSTAIN,
                other => panic!("strategy entry {other} outside {{-1,0,1}}"),
            };
            p[scenario_idx(0, x1, x2, a, u)] = 1.0;
            p[scenario_idx(1, x1, x2, a, v)] = 1.0;
        }
    }
    Behavior::new(d, p).expect("deterministic tables are valid behaviors")
}

/// Evaluates the correlation score and the final score on a behavior.
///
/// Returns `(C_d, F_d)`.
pub fn evaluate_behavior(
    f: &BellFunctional,
    beh: &Behavior,
) -> Result<(f64, f64), FunctionalError> {
    let d = f.d();
    if beh.d() != d {
        return Err(FunctionalError::ShapeMismatch(format!(
            "functional dimension {d} vs behavior dimension {}",
            beh.d()
        )));
    }
    let mut correlation = 0.0;
    let mut penalty = 0.0;
    for x1 in 0..d {
        for x2 in 0..d {
            let lambda = f.weight(x1, x2);
            // y = 1: Bob must hit b = x1; Alice is right with a = '1'.
            correlation += lambda
                * (beh.get(0, x1, x2, ALICE_PLAY_FIRST, x1)
                    - beh.get(0, x1, x2, ALICE_PLAY_SECOND, x1));
            // y = 2: Bob must hit b = x2; Alice is right with a = '2'.
            correlation += lambda
                * (beh.get(1, x1, x2, ALICE_PLAY_SECOND, x2)
                    - beh.get(1, x1, x2, ALICE_PLAY_FIRST, x2));
            penalty += 0.5
                * lambda
                * lambda
                * (beh.alice_marginal(x1, x2, ALICE_PLAY_FIRST)
                    + beh.alice_marginal(x1, x2, ALICE_PLAY_SECOND));
        }
    }
    Ok((correlation, correlation - penalty))
}

/// A bipartite quantum realization of the scenario: shared state, Alice
/// observables with spectrum in {-1, 0, +1}, and Bob's two measurements.
#[derive(Debug, Clone)]
pub struct QuantumRealization {
    d: usize,
    dim_a: usize,
    dim_b: usize,
    state: ComplexMatrix,
    /// One observable per input `x = (x1, x2)`, row-major.
    alice: Vec<ComplexMatrix>,
    bob_p: Vec<ComplexMatrix>,
    bob_q: Vec<ComplexMatrix>,
}

impl QuantumRealization {
    pub fn new(
        d: usize,
        dims: (usize, usize),
        state: ComplexMatrix,
        alice: Vec<ComplexMatrix>,
        bob_p: Vec<ComplexMatrix>,
        bob_q: Vec<ComplexMatrix>,
    ) -> Result<Self, FunctionalError> {
        let (dim_a, dim_b) = dims;
        if alice.len() != d * d {
            return Err(FunctionalError::ShapeMismatch(format!(
                "expected {} Alice observables, got {}",
                d * d,
                alice.len()
            )));
        }
        if bob_p.len() != d || bob_q.len() != d {
            return Err(FunctionalError::ShapeMismatch(format!(
                "expected {d} operators per Bob measurement, got {} and {}",
                bob_p.len(),
                bob_q.len()
            )));
        }
        if state.rows() != dim_a * dim_b || !state.is_square() {
            return Err(FunctionalError::ShapeMismatch(format!(
                "state is {}x{}, expected {}x{}",
                state.rows(),
                state.cols(),
                dim_a * dim_b,
                dim_a * dim_b
            )));
        }
        for m in &alice {
            if m.rows() != dim_a || m.cols() != dim_a {
                return Err(FunctionalError::ShapeMismatch("Alice observable dimension".into()));
            }
        }
        for m in bob_p.iter().chain(&bob_q) {
            if m.rows() != dim_b || m.cols() != dim_b {
                return Err(FunctionalError::ShapeMismatch("Bob operator dimension".into()));
            }
        }
        Ok(Self { d, dim_a, dim_b, state, alice, bob_p, bob_q })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn state(&self) -> &ComplexMatrix {
        &self.state
    }

    pub fn alice(&self, x1: usize, x2: usize) -> &ComplexMatrix {
        &self.alice[x1 * self.d + x2]
    }

    pub fn alice_all(&self) -> &[ComplexMatrix] {
        &self.alice
    }

    pub fn bob_p(&self) -> &[ComplexMatrix] {
        &self.bob_p
    }

    pub fn bob_q(&self) -> &[ComplexMatrix] {
        &self.bob_q
    }

    /// Replaces the shared state, keeping all measurements.
    pub(crate) fn with_state(&self, state: ComplexMatrix) -> Self {
        let mut out = self.clone();
        assert_eq!(state.rows(), out.state.rows());
        out.state = state;
        out
    }

    /// Checks every realization invariant, naming the first violated one.
    pub fn validate(&self) -> Result<(), FunctionalError> {
        let herm = self.state.hermiticity_residual();
        if herm > BEHAVIOR_TOL {
            return Err(FunctionalError::InvalidRealization(format!(
                "state is not Hermitian (residual {herm:.3e})"
            )));
        }
        let trace = self.state.trace();
        if (trace.re - 1.0).abs() > BEHAVIOR_TOL || trace.im.abs() > BEHAVIOR_TOL {
            return Err(FunctionalError::InvalidRealization(format!(
                "state trace is {trace}, expected 1"
            )));
        }
        let eig = eig_hermitian(&self.state)
            .map_err(|e| FunctionalError::InvalidRealization(format!("state: {e}")))?;
        if eig.eigenvalues[0] < -BEHAVIOR_TOL {
            return Err(FunctionalError::InvalidRealization(format!(
                "state has negative eigenvalue {}",
                eig.eigenvalues[0]
            )));
        }
        for (x, obs) in self.alice.iter().enumerate() {
            let (x1, x2) = (x / self.d, x % self.d);
            alice_spectral_parts(obs, x1, x2).map_err(|e| match e {
                FunctionalError::SpectrumNotTrinary { x1, x2, eigenvalue } => {
                    FunctionalError::InvalidRealization(format!(
                        "Alice observable ({x1},{x2}) has eigenvalue {eigenvalue} outside the trinary band"
                    ))
                }
                other => other,
            })?;
        }
        for (name, ops) in [("P", &self.bob_p), ("Q", &self.bob_q)] {
            let mut sum = ComplexMatrix::zeros(self.dim_b, self.dim_b);
            for (k, op) in ops.iter().enumerate() {
                let herm = op.hermiticity_residual();
                if herm > BEHAVIOR_TOL {
                    return Err(FunctionalError::InvalidRealization(format!(
                        "Bob operator {name}[{k}] is not Hermitian (residual {herm:.3e})"
                    )));
                }
                let eig = eig_hermitian(op)
                    .map_err(|e| FunctionalError::InvalidRealization(format!("Bob {name}[{k}]: {e}")))?;
                if eig.eigenvalues[0] < -BEHAVIOR_TOL {
                    return Err(FunctionalError::InvalidRealization(format!(
                        "Bob operator {name}[{k}] has negative eigenvalue {}",
                        eig.eigenvalues[0]
                    )));
                }
                sum = sum.add(op);
            }
            let dev = sum.max_abs_diff(&ComplexMatrix::identity(self.dim_b));
            if dev > BEHAVIOR_TOL {
                return Err(FunctionalError::InvalidRealization(format!(
                    "Bob {name} operators sum to identity only within {dev:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// Spectral projectors of one Alice observable: (plus, minus, plus + minus).
///
/// Eigenvalues are bucketed at the midpoints +-1/2 after checking they stay
/// inside the 1e-8 band around {-1, 0, +1}.
fn alice_spectral_parts(
    obs: &ComplexMatrix,
    x1: usize,
    x2: usize,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix), FunctionalError> {
    let eig = eig_hermitian(obs).map_err(|e| {
        FunctionalError::InvalidRealization(format!("Alice observable ({x1},{x2}): {e}"))
    })?;
    let n = obs.rows();
    let mut plus = ComplexMatrix::zeros(n, n);
    let mut minus = ComplexMatrix::zeros(n, n);
    for (k, &w) in eig.eigenvalues.iter().enumerate() {
        let nearest = [-1.0f64, 0.0, 1.0]
            .into_iter()
            .min_by(|a, b| (w - a).abs().total_cmp(&(w - b).abs()))
            .unwrap();
        if (w - nearest).abs() > TRINARY_BAND {
            return Err(FunctionalError::SpectrumNotTrinary { x1, x2, eigenvalue: w });
        }
        if w > 0.5 || w < -0.5 {
            let v = eig.eigenvectors.column(k);
            let proj = ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
            if w > 0.5 {
                plus = plus.add(&proj);
            } else {
                minus = minus.add(&proj);
            }
        }
    }
    let support = plus.add(&minus);
    Ok((plus, minus, support))
}

/// Evaluates `(C_d, F_d)` on a quantum realization.
///
/// Agrees with `evaluate_behavior` applied to `born_behavior` to 1e-10.
pub fn evaluate_realization(
    f: &BellFunctional,
    r: &QuantumRealization,
) -> Result<(f64, f64), FunctionalError> {
    if f.d() != r.d() {
        return Err(FunctionalError::ShapeMismatch(format!(
            "functional dimension {} vs realization dimension {}",
            f.d(),
            r.d()
        )));
    }
    r.validate()?;
    let d = f.d();
    let eye_b = ComplexMatrix::identity(r.dims().1);
    let mut correlation = 0.0;
    let mut penalty = 0.0;
    for x1 in 0..d {
        for x2 in 0..d {
            let lambda = f.weight(x1, x2);
            let (plus, minus, support) = alice_spectral_parts(r.alice(x1, x2), x1, x2)
                .map_err(|e| match e {
                    FunctionalError::SpectrumNotTrinary { x1, x2, eigenvalue } => {
                        FunctionalError::InvalidRealization(format!(
                            "Alice observable ({x1},{x2}) has eigenvalue {eigenvalue} outside the trinary band"
                        ))
                    }
                    other => other,
                })?;
            let obs = plus.sub(&minus);
            let diff = r.bob_p()[x1].sub(&r.bob_q()[x2]);
            correlation += lambda * kron_expectation(&obs, &diff, r.state()).re;
            penalty += 0.5 * lambda * lambda * kron_expectation(&support, &eye_b, r.state()).re;
        }
    }
    Ok((correlation, correlation - penalty))
}

/// Gamma functional of a realization: `sum_x lambda_x^2 tr[(A_x^2 (x) 1) rho]`
/// with the observable squared through its spectral projectors.
pub fn gamma_of_realization(
    f: &BellFunctional,
    r: &QuantumRealization,
) -> Result<f64, FunctionalError> {
    let d = f.d();
    let eye_b = ComplexMatrix::identity(r.dims().1);
    let mut gamma = 0.0;
    for x1 in 0..d {
        for x2 in 0..d {
            let (_, _, support) = alice_spectral_parts(r.alice(x1, x2), x1, x2)?;
            let lambda = f.weight(x1, x2);
            gamma += lambda * lambda * kron_expectation(&support, &eye_b, r.state()).re;
        }
    }
    Ok(gamma)
}

/// Expands a realization into its Born-rule behavior
/// `p(a, b | x, y) = tr[(A_x^{(a)} (x) M_y^{(b)}) rho]`.
pub fn born_behavior(r: &QuantumRealization) -> Result<Behavior, FunctionalError> {
    r.validate()?;
    let d = r.d();
    let dim_a = r.dims().0;
    let eye_a = ComplexMatrix::identity(dim_a);
    let mut p = vec![0.0; 2 * d * d * 3 * d];
    let idx = |y: usize, x1: usize, x2: usize, a: usize, b: usize| {
        ((((y * d + x1) * d + x2) * 3) + a) * d + b
    };
    for x1 in 0..d {
        for x2 in 0..d {
            let (plus, minus, support) = alice_spectral_parts(r.alice(x1, x2), x1, x2)?;
            let abstain = eye_a.sub(&support);
            for (a, op) in
                [(ALICE_PLAY_FIRST, &plus), (ALICE_PLAY_SECOND, &minus), (ALICE_ABSTAIN, &abstain)]
            {
                for (y, bob) in [(0usize, r.bob_p()), (1usize, r.bob_q())] {
                    for (b, m) in bob.iter().enumerate() {
                        let prob = kron_expectation(op, m, r.state()).re;
                        p[idx(y, x1, x2, a, b)] = prob.max(0.0);
                    }
                }
            }
        }
    }
    Behavior::new(d, p)
}

/// Functional over `N` bases: one weight table per ordered pair `j < k`.
#[derive(Debug, Clone)]
pub struct NScenarioFunctional {
    d: usize,
    n: usize,
    bases: Vec<ComplexMatrix>,
    /// Weight tables in lexicographic pair order (0,1), (0,2), ..., (n-2,n-1).
    weights: Vec<Vec<f64>>,
}

/// Lexicographic index of the pair `(j, k)`, `j < k`, among all pairs of `n`.
pub fn pair_index(n: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < n);
    j * n - j * (j + 1) / 2 + (k - j - 1)
}

impl NScenarioFunctional {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bases(&self) -> &[ComplexMatrix] {
        &self.bases
    }

    pub fn pair_weights(&self, j: usize, k: usize) -> &[f64] {
        &self.weights[pair_index(self.n, j, k)]
    }

    /// The quantum value `N(N-1)(d-1)/2`.
    pub fn quantum_value(&self) -> f64 {
        (self.n * (self.n - 1) / 2) as f64 * (self.d - 1) as f64
    }
}

/// Assembles the `N`-basis functional; every pairwise overlap must stay
/// strictly below one.
pub fn n_functional(bases: &[ComplexMatrix]) -> Result<NScenarioFunctional, FunctionalError> {
    let n = bases.len();
    if n < 2 {
        return Err(FunctionalError::ShapeMismatch("need at least two bases".into()));
    }
    let d = bases[0].rows();
    for (i, b) in bases.iter().enumerate() {
        if b.rows() != d || b.cols() != d {
            return Err(FunctionalError::ShapeMismatch(format!(
                "basis {i} is {}x{}, expected {d}x{d}",
                b.rows(),
                b.cols()
            )));
        }
        b.check_unitary(crate::matcore::HERMITICITY_TOL)
            .map_err(|e| FunctionalError::InvalidRealization(format!("basis {i}: {e}")))?;
    }
    let mut weights = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            let gram = bases[j].dagger().mul(&bases[k]);
            let mut table = Vec::with_capacity(d * d);
            for a in 0..d {
                for b in 0..d {
                    let overlap = gram[(a, b)].norm().min(1.0);
                    if overlap >= 1.0 - 1e-9 {
                        return Err(FunctionalError::UnitOverlapPresentPair {
                            basis_j: j,
                            basis_k: k,
                            row: a,
                            col: b,
                        });
                    }
                    table.push((1.0 - overlap * overlap).sqrt());
                }
            }
            weights.push(table);
        }
    }
    Ok(NScenarioFunctional { d, n, bases: bases.to_vec(), weights })
}

/// Realization data for the `N`-basis scenario: a shared state, one
/// observable table per basis pair, and `N` measurement sets for Bob.
#[derive(Debug, Clone)]
pub struct NRealization {
    pub d: usize,
    pub n: usize,
    pub dims: (usize, usize),
    pub state: ComplexMatrix,
    /// Observable tables in lexicographic pair order, each of length `d*d`.
    pub alice: Vec<Vec<ComplexMatrix>>,
    /// One list of `d` measurement operators per basis.
    pub bob: Vec<Vec<ComplexMatrix>>,
}

/// Evaluates the `N`-basis functional as the sum of its pairwise scores.
pub fn evaluate_n_realization(
    nf: &NScenarioFunctional,
    r: &NRealization,
) -> Result<f64, FunctionalError> {
    if r.n != nf.n || r.d != nf.d {
        return Err(FunctionalError::ShapeMismatch(format!(
            "functional is (d={}, N={}), realization is (d={}, N={})",
            nf.d, nf.n, r.d, r.n
        )));
    }
    if r.alice.len() != nf.weights.len() || r.bob.len() != nf.n {
        return Err(FunctionalError::ShapeMismatch(
            "wrong number of observable tables or measurement sets".into(),
        ));
    }
    let mut total = 0.0;
    for j in 0..nf.n {
        for k in (j + 1)..nf.n {
            let p = pair_index(nf.n, j, k);
            let f = BellFunctional::from_weights(nf.d, nf.weights[p].clone());
            let pairwise = QuantumRealization::new(
                nf.d,
                r.dims,
                r.state.clone(),
                r.alice[p].clone(),
                r.bob[j].clone(),
                r.bob[k].clone(),
            )?;
            let (_, f_score) = evaluate_realization(&f, &pairwise)?;
            total += f_score;
        }
    }
    Ok(total)
}

/// Maximally entangled state vector on `C^d (x) C^d`.
pub fn max_entangled_vector(d: usize) -> Vec<C64> {
    let scale = 1.0 / (d as f64).sqrt();
    let mut psi = vec![C64::ZERO; d * d];
    for k in 0..d {
        psi[k * d + k] = C64::new(scale, 0.0);
    }
    psi
}

/// Density matrix of the maximally entangled state on `C^d (x) C^d`.
pub fn max_entangled_density(d: usize) -> ComplexMatrix {
    let psi = max_entangled_vector(d);
    ComplexMatrix::from_fn(d * d, d * d, |i, j| psi[i] * psi[j].conj())
}
