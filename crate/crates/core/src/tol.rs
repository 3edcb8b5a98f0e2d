//! Numerical tolerances shared across the crate.
//!
//! States are normalized to unit trace, so every absolute tolerance below is
//! relative to scale one.

/// Hermiticity and positivity slack per unit of matrix dimension.
pub const HERMITIAN_PER_DIM: f64 = 1e-10;

/// Trace normalization slack for density matrices.
pub const TRACE: f64 = 1e-10;

/// Most negative eigenvalue still accepted as "positive semidefinite".
pub const PSD: f64 = 1e-10;

/// Constructive identities (single eigendecomposition deep).
pub const IDENTITY: f64 = 1e-8;

/// Identities that chain two or more eigendecompositions.
pub const CHAINED: f64 = 1e-6;

/// Default clamp applied to any state that has to be inverted.
pub const REGULARIZATION: f64 = 1e-12;

/// Translation-invariance defect accepted for states fed to block averages.
pub const TRANSLATION: f64 = 1e-8;

/// Eigenvalues of PSD operators below this are treated as exact zeros when
/// evaluating `x ln x` or restricting a logarithm to a support.
pub const SUPPORT: f64 = 1e-14;

pub(crate) fn hermitian_for(dim: usize) -> f64 {
    HERMITIAN_PER_DIM * dim.max(1) as f64
}
