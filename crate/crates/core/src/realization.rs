//! Optimal realizations, certification, and state extraction.
//!
//! The canonical realization of a preprocessed basis pair takes Bob's
//! measurements to be the rank-one projectors onto the two bases, Alice's
//! observables to be the rescaled transposed projector differences
//! `A_x = (P_{x1} - Q_{x2})^T / lambda_x`, and the shared state to be the
//! maximally entangled state. It attains the quantum value `d - 1` for every
//! overlap matrix.
//!
//! Saturating the quantum value forces Bob's operators to satisfy the
//! polynomial relations `O^2 P = P Q P` and `O^2 Q = Q P Q`; this module
//! checks them, verifies their completeness by rebuilding a saturating
//! realization from any operators that pass, constructs the local isometries
//! that extract a maximally entangled state whenever the overlap matrix has
//! a column free of zeros, and builds the block-dephased states that still
//! saturate the quantum value when it does not.

use crate::bases::{overlap_of, BasisPair, OverlapMatrix};
use crate::functional::{
    evaluate_realization, functional_from_overlap, max_entangled_density, max_entangled_vector,
    pair_index, BellFunctional, FunctionalError, NRealization, QuantumRealization,
};
use crate::matcore::{
    eig_hermitian, kron, kron_expectation, partial_trace, permute_subsystems, C64, ComplexMatrix,
    Subsystem,
};
use thiserror::Error;

/// Tolerance for the certification relations.
pub const CERTIFICATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RealizationError {
    #[error("overlap entry ({row},{col}) = {value} is within 1e-9 of one; preprocess the pair first")]
    UnitOverlapPresent { row: usize, col: usize, value: f64 },
    #[error("visibility {0} outside [0, 1]")]
    VisibilityOutOfRange(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("certification conditions not satisfied: {0}")]
    ConditionsNotSatisfied(String),
    #[error("overlap column {column} has a zero entry in row {row}; state extraction needs a zero-free column")]
    ZeroOverlapInColumn { column: usize, row: usize },
    #[error("overlap matrix is not block-diagonal for the given partition: entry ({row},{col}) = {value}")]
    NotBlockDiagonal { row: usize, col: usize, value: f64 },
    #[error("blocks do not partition the index set: {0}")]
    BadPartition(String),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
}

/// The canonical optimal realization together with its provenance.
#[derive(Debug, Clone)]
pub struct CanonicalRealization {
    realization: QuantumRealization,
    pair: BasisPair,
    overlap: OverlapMatrix,
}

impl CanonicalRealization {
    pub fn realization(&self) -> &QuantumRealization {
        &self.realization
    }

    pub fn pair(&self) -> &BasisPair {
        &self.pair
    }

    pub fn overlap(&self) -> &OverlapMatrix {
        &self.overlap
    }

    pub fn d(&self) -> usize {
        self.pair.dim()
    }

    /// The tailored functional this realization saturates.
    pub fn functional(&self) -> BellFunctional {
        functional_from_overlap(&self.overlap).expect("canonical overlaps are below one")
    }
}

/// Builds the canonical realization of a preprocessed basis pair.
pub fn canonical(pair: &BasisPair) -> Result<CanonicalRealization, RealizationError> {
    let d = pair.dim();
    let overlap = overlap_of(pair);
    for x1 in 0..d {
        for x2 in 0..d {
            let v = overlap.get(x1, x2);
            if v >= 1.0 - 1e-9 {
                return Err(RealizationError::UnitOverlapPresent { row: x1, col: x2, value: v });
            }
        }
    }
    let bob_p: Vec<ComplexMatrix> = (0..d).map(|j| pair.e_basis().column_projector(j)).collect();
    let bob_q: Vec<ComplexMatrix> = (0..d).map(|k| pair.f_basis().column_projector(k)).collect();
    let mut alice = Vec::with_capacity(d * d);
    for x1 in 0..d {
        for x2 in 0..d {
            let lambda = (1.0 - overlap.get(x1, x2).powi(2)).sqrt();
            let diff = bob_p[x1].sub(&bob_q[x2]).transpose();
            alice.push(diff.scale_re(1.0 / lambda));
        }
    }
    let state = max_entangled_density(d);
    let realization = QuantumRealization::new(d, (d, d), state, alice, bob_p, bob_q)?;
    Ok(CanonicalRealization { realization, pair: pair.clone(), overlap })
}

/// Canonical realization for `N` bases: the same state and projectors, with
/// one observable table `A_x = (P_{x_j} - Q_{x_k})^T / lambda_x` per pair.
pub fn canonical_n(bases: &[ComplexMatrix]) -> Result<NRealization, RealizationError> {
    let nf = crate::functional::n_functional(bases)?;
    let d = nf.d();
    let n = nf.n();
    let bob: Vec<Vec<ComplexMatrix>> = bases
        .iter()
        .map(|basis| (0..d).map(|j| basis.column_projector(j)).collect())
        .collect();
    let mut alice = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for k in (j + 1)..n {
            let weights = nf.pair_weights(j, k);
            let mut table = Vec::with_capacity(d * d);
            for xj in 0..d {
                for xk in 0..d {
                    let lambda = weights[xj * d + xk];
                    let diff = bob[j][xj].sub(&bob[k][xk]).transpose();
                    table.push(diff.scale_re(1.0 / lambda));
                }
            }
            alice.push(table);
        }
    }
    let _ = pair_index(n, 0, 1);
    Ok(NRealization { d, n, dims: (d, d), state: max_entangled_density(d), alice, bob })
}

/// Replaces the shared state by the isotropic state of visibility `nu`,
/// keeping the measurements; the score becomes `(d-1)(2 nu - 1)`.
pub fn isotropic_realization(
    c: &CanonicalRealization,
    nu: f64,
) -> Result<QuantumRealization, RealizationError> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(RealizationError::VisibilityOutOfRange(nu));
    }
    let d = c.d();
    let dim = d * d;
    let entangled = max_entangled_density(d);
    let state = ComplexMatrix::from_fn(dim, dim, |i, j| {
        let noise = if i == j { (1.0 - nu) / dim as f64 } else { 0.0 };
        entangled[(i, j)].scale(nu) + C64::new(noise, 0.0)
    });
    Ok(c.realization().with_state(state))
}

/// Residuals of the measurement-certification relations.
#[derive(Debug, Clone)]
pub struct CertificationReport {
    /// Max over `x` of the entrywise norm of `O^2 P - P Q P`.
    pub max_residual_p: f64,
    /// Max over `x` of the entrywise norm of `O^2 Q - Q P Q`.
    pub max_residual_q: f64,
    /// Entrywise norms of `M^2 - M` for Bob's operators, P family then Q.
    pub projectivity_residuals: Vec<f64>,
    /// Tolerance the `passed` flag was evaluated at.
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks the saturation relations `O^2 P = P Q P`, `O^2 Q = Q P Q` together
/// with projectivity of each operator.
pub fn certify_measurements(
    bob_p: &[ComplexMatrix],
    bob_q: &[ComplexMatrix],
    o: &OverlapMatrix,
    tol: f64,
) -> Result<CertificationReport, RealizationError> {
    let d = o.dim();
    if bob_p.len() != d || bob_q.len() != d {
        return Err(RealizationError::ShapeMismatch(format!(
            "overlap is {d}x{d} but measurements have {} and {} operators",
            bob_p.len(),
            bob_q.len()
        )));
    }
    let dim = bob_p[0].rows();
    for m in bob_p.iter().chain(bob_q) {
        if m.rows() != dim || m.cols() != dim {
            return Err(RealizationError::ShapeMismatch(
                "measurement operators must share one dimension".into(),
            ));
        }
    }
    let mut max_residual_p = 0.0f64;
    let mut max_residual_q = 0.0f64;
    for x1 in 0..d {
        for x2 in 0..d {
            let t = o.get(x1, x2).powi(2);
            let p = &bob_p[x1];
            let q = &bob_q[x2];
            let pqp = p.mul(q).mul(p);
            let qpq = q.mul(p).mul(q);
            max_residual_p = max_residual_p.max(p.scale_re(t).max_abs_diff(&pqp));
            max_residual_q = max_residual_q.max(q.scale_re(t).max_abs_diff(&qpq));
        }
    }
    let projectivity_residuals: Vec<f64> = bob_p
        .iter()
        .chain(bob_q)
        .map(|m| m.mul(m).max_abs_diff(m))
        .collect();
    let passed = max_residual_p < tol
        && max_residual_q < tol
        && projectivity_residuals.iter().all(|r| *r < tol);
    Ok(CertificationReport {
        max_residual_p,
        max_residual_q,
        projectivity_residuals,
        tolerance: tol,
        passed,
    })
}

/// Outcome of rebuilding a saturating realization from measurement operators
/// that satisfy the certification relations.
#[derive(Debug, Clone)]
pub struct CompletenessReport {
    /// Common trace of every measurement operator.
    pub operator_rank: usize,
    /// Dimension `d * n` of the reconstructed realization.
    pub big_dim: usize,
    /// Score of the reconstruction on the maximally entangled state.
    pub achieved_value: f64,
    /// Largest deviation of any `P - Q` eigenvalue from `{0, +-lambda}`.
    pub spectrum_deviation: f64,
    /// Largest deviation of the `+-lambda` multiplicities from `n` (integer).
    pub multiplicity_ok: bool,
}

/// Verifies that operators satisfying the certification relations always
/// reproduce the quantum value: equal integer traces, `P - Q` spectra inside
/// `{0, +-lambda_x}` with multiplicity `n`, and a reconstructed score of
/// `d - 1` on the maximally entangled state of dimension `d * n`.
pub fn certification_completeness_check(
    bob_p: &[ComplexMatrix],
    bob_q: &[ComplexMatrix],
    o: &OverlapMatrix,
) -> Result<CompletenessReport, RealizationError> {
    let report = certify_measurements(bob_p, bob_q, o, CERTIFICATION_TOL)?;
    if !report.passed {
        return Err(RealizationError::ConditionsNotSatisfied(format!(
            "certification residuals {:.3e} / {:.3e} exceed {:.1e}",
            report.max_residual_p, report.max_residual_q, CERTIFICATION_TOL
        )));
    }
    let d = o.dim();
    let dim = bob_p[0].rows();
    let mut traces = Vec::new();
    for m in bob_p.iter().chain(bob_q) {
        let t = m.trace();
        if t.im.abs() > 1e-8 || (t.re - t.re.round()).abs() > 1e-8 {
            return Err(RealizationError::ConditionsNotSatisfied(format!(
                "operator trace {t} is not an integer"
            )));
        }
        traces.push(t.re.round() as usize);
    }
    let n = traces[0];
    if traces.iter().any(|&t| t != n) || n == 0 {
        return Err(RealizationError::ConditionsNotSatisfied(format!(
            "operator traces {traces:?} are not a common positive integer"
        )));
    }
    if dim != d * n {
        return Err(RealizationError::ConditionsNotSatisfied(format!(
            "operators act on dimension {dim}, expected d*n = {}",
            d * n
        )));
    }
    // Spectrum of every difference: {0, +-lambda_x} with multiplicity n.
    let mut spectrum_deviation = 0.0f64;
    let mut multiplicity_ok = true;
    for x1 in 0..d {
        for x2 in 0..d {
            let lambda = (1.0 - o.get(x1, x2).powi(2)).sqrt();
            let eig = eig_hermitian(&bob_p[x1].sub(&bob_q[x2]))
                .map_err(|e| RealizationError::ConditionsNotSatisfied(e.to_string()))?;
            let mut plus = 0usize;
            let mut minus = 0usize;
            for &w in &eig.eigenvalues {
                let dev = [0.0, lambda, -lambda]
                    .into_iter()
                    .map(|target| (w - target).abs())
                    .fold(f64::INFINITY, f64::min);
                spectrum_deviation = spectrum_deviation.max(dev);
                if lambda > 0.5e-4 {
                    if (w - lambda).abs() < lambda / 2.0 {
                        plus += 1;
                    } else if (w + lambda).abs() < lambda / 2.0 {
                        minus += 1;
                    }
                }
            }
            if lambda > 0.5e-4 && (plus != n || minus != n) {
                multiplicity_ok = false;
            }
        }
    }
    if spectrum_deviation > 1e-7 {
        return Err(RealizationError::ConditionsNotSatisfied(format!(
            "P - Q spectrum deviates from {{0, +-lambda}} by {spectrum_deviation:.3e}"
        )));
    }
    if !multiplicity_ok {
        return Err(RealizationError::ConditionsNotSatisfied(
            "the +-lambda eigenvalues do not both have multiplicity n".into(),
        ));
    }
    // Reconstruct the realization on Phi^+ of dimension d*n and evaluate.
    let f = functional_from_overlap(o)?;
    let mut alice = Vec::with_capacity(d * d);
    for x1 in 0..d {
        for x2 in 0..d {
            let lambda = (1.0 - o.get(x1, x2).powi(2)).sqrt();
            alice.push(bob_p[x1].sub(&bob_q[x2]).transpose().scale_re(1.0 / lambda));
        }
    }
    let realization = QuantumRealization::new(
        d,
        (dim, dim),
        max_entangled_density(dim),
        alice,
        bob_p.to_vec(),
        bob_q.to_vec(),
    )?;
    let (_, achieved_value) = evaluate_realization(&f, &realization)?;
    Ok(CompletenessReport {
        operator_rank: n,
        big_dim: dim,
        achieved_value,
        spectrum_deviation,
        multiplicity_ok,
    })
}

/// Local isometries extracting the maximally entangled state.
#[derive(Debug, Clone)]
pub struct IsometryPair {
    /// Isometry on Alice's side, `dim_a -> d * dim_a`.
    pub v_a: ComplexMatrix,
    /// Isometry on Bob's side, `dim_b -> d * dim_b`.
    pub v_b: ComplexMatrix,
}

/// Extraction outcome: the isometries plus the quality metrics.
#[derive(Debug, Clone)]
pub struct ExtractionReport {
    pub isometries: IsometryPair,
    /// Overlap of the extracted two-qudit state with the maximally entangled
    /// state.
    pub fidelity: f64,
    /// Reduced state on the extracted `d x d` registers.
    pub extracted: ComplexMatrix,
    /// Max deviation of `tr[(1 (x) P_{x1}) rho]` from `1/d`.
    pub marginal_residual_p: f64,
    /// Max deviation of `tr[(1 (x) Q_{x2}) rho]` from `1/d`.
    pub marginal_residual_q: f64,
    /// `max |V^dag V - 1|` for the two isometries.
    pub isometry_residuals: (f64, f64),
}

/// Cyclic-shift unitary built from Bob's operators and column `j` of the
/// overlap matrix: `U_k = sum_i P_i Q_j P_{i+k} / (O_{i,j} O_{i+k,j})`, all
/// index arithmetic modulo `d`.
fn shift_unitary(
    ops_p: &[ComplexMatrix],
    q_j: &ComplexMatrix,
    col: &[f64],
    k: usize,
) -> ComplexMatrix {
    let d = ops_p.len();
    let dim = ops_p[0].rows();
    let mut u = ComplexMatrix::zeros(dim, dim);
    for i in 0..d {
        let ik = (i + k) % d;
        let scale = 1.0 / (col[i] * col[ik]);
        u = u.add(&ops_p[i].mul(q_j).mul(&ops_p[ik]).scale_re(scale));
    }
    u
}

/// Builds the extraction isometries of a realization saturating the quantum
/// value, evaluates them on the state, and reports the fidelity of the
/// extracted registers to the maximally entangled state.
///
/// `column_j` indexes a column of the overlap matrix whose entries must all
/// be nonzero. Alice's side uses the operator substitutes
/// `Ptilde_{x1} = (1 + sum_{x2} lambda_x A_x) / d` and
/// `Qtilde_{x2} = (1 - sum_{x1} lambda_x A_x) / d`.
pub fn extraction_isometries(
    bob_p: &[ComplexMatrix],
    bob_q: &[ComplexMatrix],
    o: &OverlapMatrix,
    column_j: usize,
    alice: &[ComplexMatrix],
    state: &ComplexMatrix,
) -> Result<ExtractionReport, RealizationError> {
    let d = o.dim();
    if column_j >= d {
        return Err(RealizationError::ShapeMismatch(format!(
            "column index {column_j} out of range for dimension {d}"
        )));
    }
    if alice.len() != d * d {
        return Err(RealizationError::ShapeMismatch(format!(
            "expected {} Alice observables, got {}",
            d * d,
            alice.len()
        )));
    }
    let col: Vec<f64> = (0..d).map(|i| o.get(i, column_j)).collect();
    for (row, &v) in col.iter().enumerate() {
        if v < 1e-9 {
            return Err(RealizationError::ZeroOverlapInColumn { column: column_j, row });
        }
    }
    let cert = certify_measurements(bob_p, bob_q, o, CERTIFICATION_TOL)?;
    if !cert.passed {
        return Err(RealizationError::ConditionsNotSatisfied(format!(
            "measurement certification fails at {:.3e}",
            cert.max_residual_p.max(cert.max_residual_q)
        )));
    }
    let dim_b = bob_p[0].rows();
    let dim_a = alice[0].rows();
    // Bob's isometry: V_B = sum_i |i> (x) U_i P_i.
    let q_j = &bob_q[column_j];
    let mut v_b = ComplexMatrix::zeros(d * dim_b, dim_b);
    for i in 0..d {
        let block = shift_unitary(bob_p, q_j, &col, i).mul(&bob_p[i]);
        for r in 0..dim_b {
            for c in 0..dim_b {
                v_b[(i * dim_b + r, c)] = block[(r, c)];
            }
        }
    }
    // Alice's substitutes for P and Q.
    let eye_a = ComplexMatrix::identity(dim_a);
    let mut p_tilde = Vec::with_capacity(d);
    for x1 in 0..d {
        let mut acc = eye_a.clone();
        for x2 in 0..d {
            let lambda = (1.0 - o.get(x1, x2).powi(2)).sqrt();
            acc = acc.add(&alice[x1 * d + x2].scale_re(lambda));
        }
        p_tilde.push(acc.scale_re(1.0 / d as f64));
    }
    let q_tilde_j = {
        let mut acc = eye_a.clone();
        for x1 in 0..d {
            let lambda = (1.0 - o.get(x1, column_j).powi(2)).sqrt();
            acc = acc.sub(&alice[x1 * d + column_j].scale_re(lambda));
        }
        acc.scale_re(1.0 / d as f64)
    };
    let mut v_a = ComplexMatrix::zeros(d * dim_a, dim_a);
    for i in 0..d {
        let block = shift_unitary(&p_tilde, &q_tilde_j, &col, i).mul(&p_tilde[i]);
        for r in 0..dim_a {
            for c in 0..dim_a {
                v_a[(i * dim_a + r, c)] = block[(r, c)];
            }
        }
    }
    let isometry_residuals = (v_a.unitarity_residual(), v_b.unitarity_residual());
    // rho_out = (V_A (x) V_B) rho (V_A (x) V_B)^dag on registers
    // [d, dim_a, d, dim_b]; the extracted state lives on the two d registers.
    let v = kron(&v_a, &v_b);
    let rho_out = v.mul(state).mul(&v.dagger());
    let reordered = permute_subsystems(&rho_out, &[d, dim_a, d, dim_b], &[0, 2, 1, 3])
        .map_err(|e| RealizationError::ShapeMismatch(e.to_string()))?;
    let extracted = partial_trace(&reordered, Subsystem::B, (d * d, dim_a * dim_b))
        .map_err(|e| RealizationError::ShapeMismatch(e.to_string()))?;
    let psi = max_entangled_vector(d);
    let mut fidelity = C64::ZERO;
    for i in 0..d * d {
        for j in 0..d * d {
            fidelity += psi[i].conj() * extracted[(i, j)] * psi[j];
        }
    }
    // Marginal uniformity of Bob's outcome distributions.
    let eye_a_state = ComplexMatrix::identity(state.rows() / dim_b);
    let mut marginal_residual_p = 0.0f64;
    let mut marginal_residual_q = 0.0f64;
    for x in 0..d {
        let mp = kron_expectation(&eye_a_state, &bob_p[x], state).re;
        let mq = kron_expectation(&eye_a_state, &bob_q[x], state).re;
        marginal_residual_p = marginal_residual_p.max((mp - 1.0 / d as f64).abs());
        marginal_residual_q = marginal_residual_q.max((mq - 1.0 / d as f64).abs());
    }
    Ok(ExtractionReport {
        isometries: IsometryPair { v_a, v_b },
        fidelity: fidelity.re,
        extracted,
        marginal_residual_p,
        marginal_residual_q,
        isometry_residuals,
    })
}

/// Builds the block-dephased state
/// `rho = sum_k (1 (x) Pi_k) Phi^+ (1 (x) Pi_k)` for an overlap matrix that
/// is block-diagonal with respect to `blocks`, paired with the canonical
/// measurements. The realization saturates the quantum value and reproduces
/// the statistics of the maximally entangled state exactly.
pub fn exceptional_block_state(
    pair: &BasisPair,
    blocks: &[Vec<usize>],
) -> Result<QuantumRealization, RealizationError> {
    let d = pair.dim();
    let mut seen = vec![false; d];
    for block in blocks {
        for &i in block {
            if i >= d {
                return Err(RealizationError::BadPartition(format!(
                    "index {i} out of range for dimension {d}"
                )));
            }
            if seen[i] {
                return Err(RealizationError::BadPartition(format!("index {i} repeated")));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(RealizationError::BadPartition("indices not covered".into()));
    }
    let overlap = overlap_of(pair);
    let block_of: Vec<usize> = {
        let mut assignment = vec![0usize; d];
        for (b, block) in blocks.iter().enumerate() {
            for &i in block {
                assignment[i] = b;
            }
        }
        assignment
    };
    for i in 0..d {
        for j in 0..d {
            if block_of[i] != block_of[j] && overlap.get(i, j) > 1e-10 {
                return Err(RealizationError::NotBlockDiagonal {
                    row: i,
                    col: j,
                    value: overlap.get(i, j),
                });
            }
        }
    }
    let base = canonical(pair)?;
    // Pi_k projects onto the span of the block's e vectors.
    let phi = max_entangled_density(d);
    let eye = ComplexMatrix::identity(d);
    let mut state = ComplexMatrix::zeros(d * d, d * d);
    for block in blocks {
        let mut pi = ComplexMatrix::zeros(d, d);
        for &i in block {
            pi = pi.add(&pair.e_basis().column_projector(i));
        }
        let dephaser = kron(&eye, &pi);
        state = state.add(&dephaser.mul(&phi).mul(&dephaser));
    }
    Ok(base.realization().with_state(state))
}
