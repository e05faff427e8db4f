//! Bell functionals tailored to pairs of incompatible rank-one projective
//! measurements.
//!
//! Given two orthonormal bases on `C^d` with overlap matrix `O`, the crate
//! builds the Bell functional whose quantum value `d - 1` is attained exactly
//! when one party measures in those two bases, and provides the machinery
//! around it:
//!
//! - [`matcore`]: dense complex linear algebra (Hermitian eigendecomposition,
//!   Kronecker products, partial traces, Haar-random unitaries).
//! - [`bases`]: basis pairs, overlap matrices, compatibility-removing
//!   preprocessing, unistochasticity classification for `d = 3`, and the
//!   special overlap families (MUB, qubit-MUB blocks, the `d = 3` boundary
//!   matrix and its odd-dimensional direct sums).
//! - [`functional`]: the scenario, the weight tables, and evaluation of the
//!   correlation and final scores on behaviors or quantum realizations,
//!   including the extension to `N > 2` measurement bases.
//! - [`realization`]: the explicit optimal realization, isotropic-noise
//!   variants, measurement certification, maximally-entangled-state
//!   extraction isometries, and the exceptional block-diagonal states.
//! - [`localvalue`]: exact local values via the closed-form strategy
//!   analysis, a brute-force oracle, noise thresholds, and the constrained
//!   simplex machinery behind the universal lower bound.
//! - [`search`]: derivative-free minimization of the local value over
//!   overlap matrices arising from unitaries.
//! - [`jsonio`]: the JSON wire formats shared with the command-line tool.

pub mod bases;
pub mod functional;
pub mod jsonio;
pub mod localvalue;
pub mod matcore;
pub mod realization;
pub mod search;
