//! Basis pairs, overlap matrices, and the special overlap families.
//!
//! A pair of orthonormal bases on `C^d` determines the nonnegative overlap
//! matrix `O_{jk} = |<e_j|f_k>|`, whose entrywise square is unistochastic.
//! This module provides the compatibility-removing preprocessing (shared
//! basis vectors are truncated away so every remaining overlap is strictly
//! below one), a boundary classifier for the 3x3 unistochastic set, and
//! constructors for the overlap matrices that extremize the local value:
//! uniform MUB overlaps, direct sums of qubit MUBs, and the 3x3 matrix with
//! diagonal 1/3 and off-diagonal 2/3 together with its odd-dimensional
//! direct-sum extensions.

use crate::matcore::{haar_unitary_from_rng, C64, ComplexMatrix, MatError};
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

/// Tolerance for the unit-norm row/column invariant of overlap matrices.
pub const OVERLAP_NORM_TOL: f64 = 1e-9;

/// Default threshold below one at which an overlap counts as a shared vector.
pub const UNIT_OVERLAP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BasesError {
    #[error("basis matrix is not unitary: {0}")]
    NotUnitary(#[from] MatError),
    #[error("row or column {index} of the overlap matrix has l2 norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },
    #[error("overlap entry ({row},{col}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("matrix is not bistochastic: row or column {index} sums to {sum}")]
    NotBistochastic { index: usize, sum: f64 },
    #[error("measurements are compatible: fewer than two basis vectors remain after truncation")]
    FullyCompatible,
    #[error("dimension {0} is odd, expected even")]
    OddDimension(usize),
    #[error("dimension {0} is even, expected odd and at least 3")]
    EvenDimension(usize),
    #[error("overlap matrix is not a recognized direct sum of qubit-MUB and conjecture blocks")]
    UnsupportedStructure,
    #[error("unit_tol {0} outside (0, 1e-3]")]
    BadUnitTol(f64),
}

/// Two orthonormal bases on `C^d`, stored as the columns of two unitaries.
#[derive(Debug, Clone)]
pub struct BasisPair {
    dim: usize,
    e_basis: ComplexMatrix,
    f_basis: ComplexMatrix,
}

impl BasisPair {
    /// Validates that both matrices are unitary (entrywise 1e-10).
    pub fn new(e_basis: ComplexMatrix, f_basis: ComplexMatrix) -> Result<Self, BasesError> {
        assert_eq!(e_basis.rows(), e_basis.cols());
        assert_eq!(e_basis.rows(), f_basis.rows());
        assert_eq!(f_basis.rows(), f_basis.cols());
        e_basis.check_unitary(crate::matcore::HERMITICITY_TOL)?;
        f_basis.check_unitary(crate::matcore::HERMITICITY_TOL)?;
        Ok(Self { dim: e_basis.rows(), e_basis, f_basis })
    }

    /// Computational basis against an arbitrary unitary `f`.
    pub fn computational_vs(f_basis: ComplexMatrix) -> Result<Self, BasesError> {
        let d = f_basis.rows();
        Self::new(ComplexMatrix::identity(d), f_basis)
    }

    /// Computational basis against the discrete Fourier basis, a MUB pair in
    /// every dimension.
    pub fn fourier(d: usize) -> Self {
        Self::computational_vs(fourier_matrix(d)).expect("Fourier matrix is unitary")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn e_basis(&self) -> &ComplexMatrix {
        &self.e_basis
    }

    pub fn f_basis(&self) -> &ComplexMatrix {
        &self.f_basis
    }
}

/// The unitary DFT matrix of size `d`.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let scale = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| {
        let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
        C64::new(0.0, angle).exp() * scale
    })
}

/// Nonnegative matrix of basis overlaps with unit-norm rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl OverlapMatrix {
    /// Validates entry range and the unit l2 norm of every row and column.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, BasesError> {
        assert_eq!(entries.len(), dim * dim, "entry count must be dim*dim");
        for i in 0..dim {
            for j in 0..dim {
                let v = entries[i * dim + j];
                if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                    return Err(BasesError::EntryOutOfRange { row: i, col: j, value: v });
                }
            }
        }
        for i in 0..dim {
            let row: f64 = (0..dim).map(|j| entries[i * dim + j].powi(2)).sum();
            if (row.sqrt() - 1.0).abs() > OVERLAP_NORM_TOL {
                return Err(BasesError::NotNormalized { index: i, norm: row.sqrt() });
            }
            let col: f64 = (0..dim).map(|j| entries[j * dim + i].powi(2)).sum();
            if (col.sqrt() - 1.0).abs() > OVERLAP_NORM_TOL {
                return Err(BasesError::NotNormalized { index: i, norm: col.sqrt() });
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Entrywise square, the associated bistochastic matrix.
    pub fn squared(&self) -> Vec<f64> {
        self.entries.iter().map(|v| v * v).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Overlap matrix `O_{jk} = |<e_j|f_k>|` of a basis pair.
pub fn overlap_of(pair: &BasisPair) -> OverlapMatrix {
    let gram = pair.e_basis().dagger().mul(pair.f_basis());
    let d = pair.dim();
    let entries = (0..d * d)
        .map(|k| gram.entries()[k].norm().min(1.0))
        .collect();
    OverlapMatrix::new(d, entries).expect("overlaps of a unitary Gram matrix are normalized")
}

/// Result of removing the compatible subspace from a basis pair.
#[derive(Debug, Clone)]
pub struct PreprocessReport {
    /// Dimension after truncation.
    pub effective_dim: usize,
    /// Index pairs `(j, k)` of removed shared vectors, 0-based.
    pub removed_pairs: Vec<(usize, usize)>,
    /// The truncated pair, expressed in the basis of the kept `e` vectors.
    pub truncated: BasisPair,
    /// Overlap of the truncated pair; the corresponding submatrix of the
    /// input overlap, all entries strictly below one.
    pub overlap: OverlapMatrix,
}

/// Removes every shared basis vector (overlap within `unit_tol` of one) and
/// restricts both bases to the orthogonal complement.
///
/// The kept `e` vectors become the computational basis of the truncated
/// space, so the truncated `f` basis is the corresponding submatrix of the
/// original Gram matrix and no overlap entry is recomputed.
pub fn preprocess(pair: &BasisPair, unit_tol: f64) -> Result<PreprocessReport, BasesError> {
    if !(unit_tol > 0.0 && unit_tol <= 1e-3) {
        return Err(BasesError::BadUnitTol(unit_tol));
    }
    let d = pair.dim();
    let gram = pair.e_basis().dagger().mul(pair.f_basis());
    let mut removed_pairs = Vec::new();
    let mut row_removed = vec![false; d];
    let mut col_removed = vec![false; d];
    for j in 0..d {
        for k in 0..d {
            if gram[(j, k)].norm() >= 1.0 - unit_tol {
                // Row normalization forbids two unit overlaps sharing an index.
                debug_assert!(!row_removed[j] && !col_removed[k]);
                removed_pairs.push((j, k));
                row_removed[j] = true;
                col_removed[k] = true;
            }
        }
    }
    let rows_kept: Vec<usize> = (0..d).filter(|&j| !row_removed[j]).collect();
    let cols_kept: Vec<usize> = (0..d).filter(|&k| !col_removed[k]).collect();
    let eff = rows_kept.len();
    if eff < 2 {
        return Err(BasesError::FullyCompatible);
    }
    let f_trunc = ComplexMatrix::from_fn(eff, eff, |a, b| gram[(rows_kept[a], cols_kept[b])]);
    let truncated = BasisPair::new(ComplexMatrix::identity(eff), f_trunc)?;
    let overlap = overlap_of(&truncated);
    Ok(PreprocessReport { effective_dim: eff, removed_pairs, truncated, overlap })
}

/// Position of a 3x3 bistochastic matrix relative to the unistochastic set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnistochasticClass {
    Inside,
    Boundary,
    Outside,
}

/// Classifies a 3x3 bistochastic matrix against the unistochastic set.
///
/// A 3x3 bistochastic `T` equals `|U|^2` for some unitary `U` exactly when
/// the chain links `L_j = sqrt(T_{1j} T_{2j})` satisfy the triangle
/// inequality: orthogonality of the first two rows of `U` requires three
/// complex numbers with these moduli to sum to zero. Saturation of the
/// triangle inequality pins the phases and marks the boundary.
pub fn is_unistochastic_3x3(
    t: &[[f64; 3]; 3],
    tol: f64,
) -> Result<UnistochasticClass, BasesError> {
    for i in 0..3 {
        let row: f64 = t[i].iter().sum();
        if (row - 1.0).abs() > tol {
            return Err(BasesError::NotBistochastic { index: i, sum: row });
        }
        let col: f64 = (0..3).map(|j| t[j][i]).sum();
        if (col - 1.0).abs() > tol {
            return Err(BasesError::NotBistochastic { index: i, sum: col });
        }
        for j in 0..3 {
            if t[i][j] < -tol {
                return Err(BasesError::NotBistochastic { index: i, sum: t[i][j] });
            }
        }
    }
    let links: Vec<f64> = (0..3).map(|j| (t[0][j].max(0.0) * t[1][j].max(0.0)).sqrt()).collect();
    let total: f64 = links.iter().sum();
    let largest = links.iter().copied().fold(0.0, f64::max);
    let slack = total - 2.0 * largest; // >= 0 means the triangle closes
    if slack > tol {
        Ok(UnistochasticClass::Inside)
    } else if slack >= -tol {
        Ok(UnistochasticClass::Boundary)
    } else {
        Ok(UnistochasticClass::Outside)
    }
}

/// Uniform overlap matrix of mutually unbiased bases, all entries `1/sqrt(d)`.
pub fn mub_overlap(d: usize) -> OverlapMatrix {
    assert!(d >= 2, "dimension must be at least 2");
    let v = 1.0 / (d as f64).sqrt();
    OverlapMatrix::new(d, vec![v; d * d]).expect("uniform matrix is normalized")
}

/// Direct sum of `d/2` qubit-MUB blocks, the even-dimensional minimizer of
/// the local value.
pub fn qubit_mub_blocks(d: usize) -> Result<OverlapMatrix, BasesError> {
    if d < 2 || d % 2 != 0 {
        return Err(BasesError::OddDimension(d));
    }
    let mut entries = vec![0.0; d * d];
    for b in 0..d / 2 {
        for i in 0..2 {
            for j in 0..2 {
                entries[(2 * b + i) * d + (2 * b + j)] = FRAC_1_SQRT_2;
            }
        }
    }
    OverlapMatrix::new(d, entries)
}

/// The 3x3 overlap matrix with diagonal 1/3 and off-diagonal 2/3, the
/// conjectured minimizer of the local value in dimension 3. Its entrywise
/// square lies on the boundary of the unistochastic set.
pub fn conj_overlap_3() -> OverlapMatrix {
    let (a, b) = (1.0 / 3.0, 2.0 / 3.0);
    OverlapMatrix::new(3, vec![a, b, b, b, a, b, b, b, a]).expect("rows are normalized")
}

/// Odd-dimensional family beating MUBs: `(d-3)/2` qubit-MUB blocks followed
/// by the 3x3 conjecture block.
pub fn odd_counterexample(d: usize) -> Result<OverlapMatrix, BasesError> {
    if d < 3 || d % 2 == 0 {
        return Err(BasesError::EvenDimension(d));
    }
    let mut entries = vec![0.0; d * d];
    let blocks = d / 2 - 1;
    for b in 0..blocks {
        for i in 0..2 {
            for j in 0..2 {
                entries[(2 * b + i) * d + (2 * b + j)] = FRAC_1_SQRT_2;
            }
        }
    }
    let base = 2 * blocks;
    let conj = conj_overlap_3();
    for i in 0..3 {
        for j in 0..3 {
            entries[(base + i) * d + (base + j)] = conj.get(i, j);
        }
    }
    OverlapMatrix::new(d, entries)
}

/// Real orthogonal preimage of `conj_overlap_3`: signs chosen so the rows
/// are pairwise orthogonal.
fn conj_preimage_3() -> ComplexMatrix {
    let (a, b) = (1.0 / 3.0, 2.0 / 3.0);
    let rows = [[a, b, b], [b, a, -b], [b, -b, a]];
    ComplexMatrix::from_fn(3, 3, |i, j| C64::new(rows[i][j], 0.0))
}

/// Hadamard-type preimage of a `(1/sqrt 2) J_2` block.
fn qubit_mub_preimage() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| {
        let sign = if (i, j) == (1, 1) { -1.0 } else { 1.0 };
        C64::new(sign * FRAC_1_SQRT_2, 0.0)
    })
}

/// Builds a basis pair realizing a block-diagonal overlap matrix made of
/// `(1/sqrt 2) J_2` blocks and `conj_overlap_3` blocks.
///
/// The `e` basis is computational and the `f` basis is the direct sum of the
/// per-block unitaries, so `overlap_of` of the result reproduces the input.
pub fn basis_pair_from_overlap_blocks(o: &OverlapMatrix) -> Result<BasisPair, BasesError> {
    let d = o.dim();
    let pattern_tol = 1e-9;
    let mut f = ComplexMatrix::zeros(d, d);
    let mut pos = 0;
    while pos < d {
        let matches_block = |block: &OverlapMatrix| -> bool {
            let k = block.dim();
            if pos + k > d {
                return false;
            }
            for i in 0..k {
                for j in 0..d {
                    let expect = if (pos..pos + k).contains(&j) {
                        block.get(i, j - pos)
                    } else {
                        0.0
                    };
                    if (o.get(pos + i, j) - expect).abs() > pattern_tol
                        || (o.get(j, pos + i) - expect_col(block, j, pos, i, k)).abs() > pattern_tol
                    {
                        return false;
                    }
                }
            }
            true
        };
        fn expect_col(block: &OverlapMatrix, j: usize, pos: usize, i: usize, k: usize) -> f64 {
            if (pos..pos + k).contains(&j) {
                block.get(j - pos, i)
            } else {
                0.0
            }
        }
        let qubit = OverlapMatrix::new(2, vec![FRAC_1_SQRT_2; 4]).unwrap();
        if matches_block(&qubit) {
            let u = qubit_mub_preimage();
            for i in 0..2 {
                for j in 0..2 {
                    f[(pos + i, pos + j)] = u[(i, j)];
                }
            }
            pos += 2;
        } else if matches_block(&conj_overlap_3()) {
            let u = conj_preimage_3();
            for i in 0..3 {
                for j in 0..3 {
                    f[(pos + i, pos + j)] = u[(i, j)];
                }
            }
            pos += 3;
        } else {
            return Err(BasesError::UnsupportedStructure);
        }
    }
    let pair = BasisPair::computational_vs(f)?;
    debug_assert!(overlap_of(&pair).max_abs_diff(o) < 1e-9);
    Ok(pair)
}

/// Overlap matrix of a Haar-random unitary against the computational basis.
pub fn haar_overlap(d: usize, rng: &mut impl Rng) -> OverlapMatrix {
    let u = haar_unitary_from_rng(d, rng);
    let entries = (0..d * d).map(|k| u.entries()[k].norm().min(1.0)).collect();
    OverlapMatrix::new(d, entries).expect("|U| of a unitary is normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn overlap_of_identity_pair() {
        let pair = BasisPair::computational_vs(ComplexMatrix::identity(3)).unwrap();
        let o = overlap_of(&pair);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((o.get(i, j) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn overlap_of_fourier_pairs() {
        for d in [2usize, 3] {
            let o = overlap_of(&BasisPair::fourier(d));
            let expect = 1.0 / (d as f64).sqrt();
            for i in 0..d {
                for j in 0..d {
                    assert!((o.get(i, j) - expect).abs() < 1e-12, "d={d}");
                }
            }
        }
    }

    #[test]
    fn preprocess_rejects_compatible_pair() {
        let pair = BasisPair::computational_vs(ComplexMatrix::identity(3)).unwrap();
        assert!(matches!(preprocess(&pair, 1e-9), Err(BasesError::FullyCompatible)));
    }

    #[test]
    fn preprocess_removes_shared_vector() {
        // f = H (+) 1: the third vectors coincide, the 2x2 remainder is a
        // qubit MUB.
        let mut f = ComplexMatrix::zeros(3, 3);
        let h = qubit_mub_preimage();
        for i in 0..2 {
            for j in 0..2 {
                f[(i, j)] = h[(i, j)];
            }
        }
        f[(2, 2)] = C64::ONE;
        let pair = BasisPair::computational_vs(f).unwrap();
        let report = preprocess(&pair, 1e-9).unwrap();
        assert_eq!(report.effective_dim, 2);
        assert_eq!(report.removed_pairs, vec![(2, 2)]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((report.overlap.get(i, j) - FRAC_1_SQRT_2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn preprocess_keeps_mub_pair() {
        let pair = BasisPair::fourier(2);
        let report = preprocess(&pair, 1e-9).unwrap();
        assert_eq!(report.effective_dim, 2);
        assert!(report.removed_pairs.is_empty());
        assert!(report.overlap.max_abs_diff(&overlap_of(&pair)) < 1e-14);
    }

    #[test]
    fn preprocess_overlap_is_submatrix() {
        // Shared vector in the middle: f = block_diag(H) with a passthrough
        // on index 1, permuted so the shared vector is not last.
        let mut f = ComplexMatrix::zeros(3, 3);
        f[(1, 1)] = C64::ONE;
        f[(0, 0)] = C64::new(FRAC_1_SQRT_2, 0.0);
        f[(0, 2)] = C64::new(FRAC_1_SQRT_2, 0.0);
        f[(2, 0)] = C64::new(FRAC_1_SQRT_2, 0.0);
        f[(2, 2)] = C64::new(-FRAC_1_SQRT_2, 0.0);
        let pair = BasisPair::computational_vs(f).unwrap();
        let full = overlap_of(&pair);
        let report = preprocess(&pair, 1e-9).unwrap();
        assert_eq!(report.removed_pairs, vec![(1, 1)]);
        // Kept rows/cols are {0,2} x {0,2}; entries must be copied verbatim.
        let kept = [0usize, 2];
        for (a, &i) in kept.iter().enumerate() {
            for (b, &j) in kept.iter().enumerate() {
                assert!((report.overlap.get(a, b) - full.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unistochastic_conj_square_is_boundary() {
        let o = conj_overlap_3();
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = o.get(i, j).powi(2);
            }
        }
        assert_eq!(is_unistochastic_3x3(&t, 1e-9).unwrap(), UnistochasticClass::Boundary);
    }

    #[test]
    fn unistochastic_uniform_is_inside() {
        let third = 1.0 / 3.0;
        let t = [[third; 3]; 3];
        assert_eq!(is_unistochastic_3x3(&t, 1e-9).unwrap(), UnistochasticClass::Inside);
    }

    #[test]
    fn unistochastic_zero_diagonal_halves_is_outside() {
        let t = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
        assert_eq!(is_unistochastic_3x3(&t, 1e-9).unwrap(), UnistochasticClass::Outside);
    }

    #[test]
    fn unistochastic_rejects_non_bistochastic() {
        let t = [[0.9, 0.2, 0.0], [0.1, 0.5, 0.4], [0.0, 0.3, 0.6]];
        assert!(matches!(
            is_unistochastic_3x3(&t, 1e-9),
            Err(BasesError::NotBistochastic { .. })
        ));
    }

    #[test]
    fn mub_overlap_entries() {
        for (d, v) in [(2usize, FRAC_1_SQRT_2), (3, 1.0 / 3f64.sqrt()), (4, 0.5)] {
            let o = mub_overlap(d);
            for e in o.entries() {
                assert!((e - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn qubit_mub_blocks_structure() {
        let o = qubit_mub_blocks(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i / 2 == j / 2 { FRAC_1_SQRT_2 } else { 0.0 };
                assert!((o.get(i, j) - expect).abs() < 1e-14);
            }
        }
        let o6 = qubit_mub_blocks(6).unwrap();
        assert!((o6.get(4, 4) - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((o6.get(0, 4)).abs() < 1e-14);
        assert!(matches!(qubit_mub_blocks(3), Err(BasesError::OddDimension(3))));
    }

    #[test]
    fn conj_overlap_rows_normalized_and_symmetric() {
        let o = conj_overlap_3();
        let norm: f64 = (0..3).map(|j| o.get(0, j).powi(2)).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(o.get(i, j), o.get(j, i));
            }
        }
    }

    #[test]
    fn odd_counterexample_structure() {
        let o3 = odd_counterexample(3).unwrap();
        assert!(o3.max_abs_diff(&conj_overlap_3()) < 1e-14);
        let o5 = odd_counterexample(5).unwrap();
        assert!((o5.get(0, 1) - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((o5.get(2, 2) - 1.0 / 3.0).abs() < 1e-14);
        assert!((o5.get(2, 3) - 2.0 / 3.0).abs() < 1e-14);
        let o7 = odd_counterexample(7).unwrap();
        assert!((o7.get(2, 3) - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((o7.get(4, 4) - 1.0 / 3.0).abs() < 1e-14);
        assert!(matches!(odd_counterexample(4), Err(BasesError::EvenDimension(4))));
    }

    #[test]
    fn block_preimage_round_trips() {
        for o in [
            qubit_mub_blocks(2).unwrap(),
            qubit_mub_blocks(4).unwrap(),
            conj_overlap_3(),
            odd_counterexample(5).unwrap(),
            odd_counterexample(7).unwrap(),
        ] {
            let pair = basis_pair_from_overlap_blocks(&o).unwrap();
            assert!(overlap_of(&pair).max_abs_diff(&o) < 1e-9);
        }
    }

    #[test]
    fn block_preimage_matches_appendix_vectors() {
        // For two qubit-MUB blocks the f columns are (|1>+|2>)/sqrt2,
        // (|1>-|2>)/sqrt2, (|3>+|4>)/sqrt2, (|3>-|4>)/sqrt2.
        let pair = basis_pair_from_overlap_blocks(&qubit_mub_blocks(4).unwrap()).unwrap();
        let f = pair.f_basis();
        let s = FRAC_1_SQRT_2;
        let expect = [
            [s, s, 0.0, 0.0],
            [s, -s, 0.0, 0.0],
            [0.0, 0.0, s, s],
            [0.0, 0.0, s, -s],
        ];
        for j in 0..4 {
            for i in 0..4 {
                assert!((f[(i, j)].re - expect[i][j]).abs() < 1e-14);
                assert!(f[(i, j)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn block_preimage_rejects_arbitrary_matrix() {
        assert!(matches!(
            basis_pair_from_overlap_blocks(&mub_overlap(3)),
            Err(BasesError::UnsupportedStructure)
        ));
    }

    #[test]
    fn haar_squared_overlaps_never_outside() {
        // Sampling oracle for the chain-links condition (short version; the
        // full 1e4-sample run lives in the integration suite).
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
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
}
