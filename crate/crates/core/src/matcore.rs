//! Dense complex linear algebra foundation.
//!
//! All operator objects in this crate (states, projectors, observables,
//! isometries) are small dense matrices stored row-major. The Hermitian
//! eigensolver and the QR factorization behind the Haar sampler delegate to
//! `nalgebra`; everything else is implemented directly.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Entrywise tolerance for Hermiticity and unitarity checks.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |M - M^dag| = {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("matrix has {got} rows but subsystem dimensions require {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("matrix is not unitary: max |U^dag U - I| = {residual:.3e}")]
    NotUnitary { residual: f64 },
}

/// Dense complex matrix with row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    /// Build from row-major entries. Panics if the lengths disagree.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![C64::ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Diagonal matrix from real values.
    pub fn diag_real(values: &[f64]) -> Self {
        Self::from_fn(values.len(), values.len(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::ZERO
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn square_check(&self) -> Result<usize, MatError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(MatError::NonSquare { rows: self.rows, cols: self.cols })
        }
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::new(self.rows, self.cols, self.entries.iter().map(|z| z.conj()).collect())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.rows, self.cols, self.entries.iter().map(|z| z * s).collect())
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference |self - other|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entrywise deviation from Hermiticity, max |M - M^dag|.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<(), MatError> {
        self.square_check()?;
        let residual = self.hermiticity_residual();
        if residual > tol {
            return Err(MatError::NotHermitian { residual });
        }
        Ok(())
    }

    /// Entrywise deviation from unitarity, max |U^dag U - I|.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = self.dagger().mul(self);
        gram.max_abs_diff(&Self::identity(self.cols))
    }

    pub fn check_unitary(&self, tol: f64) -> Result<(), MatError> {
        let residual = self.unitarity_residual();
        if residual > tol {
            return Err(MatError::NotUnitary { residual });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::new(
            self.rows,
            self.cols,
            self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::new(
            self.rows,
            self.cols,
            self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Rank-one projector onto column `j` of `self`.
    pub fn column_projector(&self, j: usize) -> Self {
        let v = self.column(j);
        Self::from_fn(self.rows, self.rows, |a, b| v[a] * v[b].conj())
    }

    fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.entries.iter().copied())
    }

    fn from_na(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending; the eigenvector columns are orthonormal
/// and `V diag(w) V^dag` reproduces the input to entrywise 1e-10.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEig, MatError> {
    m.check_hermitian(HERMITICITY_TOL)?;
    let n = m.rows();
    // Symmetrize before handing off so the solver sees an exactly Hermitian
    // input; the shift is bounded by half the Hermiticity residual.
    let sym = m.add(&m.dagger()).scale_re(0.5);
    let se = sym.to_na().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    Ok(HermitianEig { eigenvalues, eigenvectors })
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = (a.rows(), a.cols());
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on `C^{d_A} (x) C^{d_B}`, removing `traced`.
pub fn partial_trace(
    m: &ComplexMatrix,
    traced: Subsystem,
    dims: (usize, usize),
) -> Result<ComplexMatrix, MatError> {
    let (da, db) = dims;
    let n = m.square_check()?;
    if n != da * db {
        return Err(MatError::DimensionMismatch { got: n, expected: da * db });
    }
    let out = match traced {
        Subsystem::B => ComplexMatrix::from_fn(da, da, |a, a2| {
            (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()
        }),
        Subsystem::A => ComplexMatrix::from_fn(db, db, |b, b2| {
            (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()
        }),
    };
    Ok(out)
}

/// Reorder tensor factors of an operator on `(x)_k C^{dims[k]}`.
///
/// `perm[p] = q` puts the factor originally at position `q` into position `p`
/// of the output.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    dims: &[usize],
    perm: &[usize],
) -> Result<ComplexMatrix, MatError> {
    let total: usize = dims.iter().product();
    let n = m.square_check()?;
    if n != total {
        return Err(MatError::DimensionMismatch { got: n, expected: total });
    }
    assert_eq!(dims.len(), perm.len(), "permutation length must match factor count");
    let k = dims.len();
    let new_dims: Vec<usize> = perm.iter().map(|&q| dims[q]).collect();
    // Strides of the original index in row-major multi-index order.
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    // Map a new flat index to the old flat index.
    let old_index = |mut idx: usize| -> usize {
        let mut old = 0;
        for p in 0..k {
            let block: usize = new_dims[p + 1..].iter().product();
            let digit = idx / block;
            idx %= block;
            old += digit * strides[perm[p]];
        }
        old
    };
    let mut out = ComplexMatrix::zeros(total, total);
    for i in 0..total {
        let oi = old_index(i);
        for j in 0..total {
            out[(i, j)] = m[(oi, old_index(j))];
        }
    }
    Ok(out)
}

/// Unitary `exp(iH)` for Hermitian `H`.
pub fn expm_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    let eig = eig_hermitian(h)?;
    let n = h.rows();
    let v = &eig.eigenvectors;
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|&w| C64::new(0.0, w).exp()).collect();
    let mut scaled = v.clone();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] *= phases[j];
        }
    }
    Ok(scaled.mul(&v.dagger()))
}

/// Haar-random unitary from a seeded generator.
///
/// Complex Ginibre matrix followed by QR with the diagonal of `R` rephased to
/// be positive, which makes the factorization unique and the distribution
/// exactly Haar.
pub fn haar_unitary(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_from_rng(d, &mut rng)
}

/// Haar-random unitary drawn from an existing generator.
pub fn haar_unitary_from_rng(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(d >= 1, "dimension must be at least 1");
    let ginibre = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = ginibre.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::ONE };
        for i in 0..d {
            out[(i, j)] = q[(i, j)] * phase;
        }
    }
    ComplexMatrix::from_na(&out)
}

/// `tr[(X (x) Y) rho]` without forming the Kronecker product.
pub fn kron_expectation(x: &ComplexMatrix, y: &ComplexMatrix, rho: &ComplexMatrix) -> C64 {
    let da = x.rows();
    let db = y.rows();
    debug_assert_eq!(rho.rows(), da * db);
    let mut acc = C64::ZERO;
    for a in 0..da {
        for a2 in 0..da {
            let xa = x[(a, a2)];
            if xa == C64::ZERO {
                continue;
            }
            let mut inner = C64::ZERO;
            for b in 0..db {
                for b2 in 0..db {
                    inner += y[(b, b2)] * rho[(a2 * db + b2, a * db + b)];
                }
            }
            acc += xa * inner;
        }
    }
    acc
}
