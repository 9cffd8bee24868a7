use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (||M - M*||_F = {drift:.3e})")]
    NotHermitian { drift: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("spectral radius {rho:.6} is not below the admissible bound {bound:.6}")]
    SpectralRadiusTooLarge { rho: f64, bound: f64 },

    #[error("linear system is numerically singular")]
    SingularSystem,

    #[error("leading coefficient is not invertible (condition number {cond:.3e})")]
    SingularLeadingCoefficient { cond: f64 },

    #[error("argument lies outside the convergence region (rho = {rho:.6}, radius = {radius:.6})")]
    OutsideConvergence { rho: f64, radius: f64 },

    #[error("contour radius {r} must satisfy {lower:.6} < r < {upper:.6}")]
    RadiusOrder { r: f64, lower: f64, upper: f64 },

    #[error("series does not vanish at the Blaschke node (division residual {residual:.3e})")]
    NotInRange { residual: f64 },

    #[error("interpolation Gram matrix is not strictly positive (lambda_min = {lambda_min:.3e}); nodes too close")]
    GramSingular { lambda_min: f64 },

    #[error("I - A_{index} is numerically singular; node has 1 in its spectrum")]
    NodeAtOne { index: usize },

    #[error("colligation is not a contraction (norm {norm:.12})")]
    NotContraction { norm: f64 },

    #[error("kernel Gram is not positive semidefinite (lambda_min = {min_eig:.3e})")]
    KernelNotPsd { min_eig: f64, witness: Vec<f64> },

    #[error("kernel Gram is numerically zero")]
    RankCollapse,

    #[error("series is not a Schur multiplier at this truncation (Toeplitz norm {norm:.12})")]
    NotMultiplier { norm: f64 },

    #[error("T + T* is not positive semidefinite (lambda_min = {min_eig:.3e})")]
    NotCaraMultiplier { min_eig: f64 },

    #[error("det F(zI) vanishes in the closed unit disk (witness z = {z})")]
    DeterminantVanishes { z: Complex64 },

    #[error("block Hankel matrix has no numerical rank plateau")]
    NoRankPlateau,

    #[error("matrix is not fixed by the symmetry (residual {residual:.3e})")]
    NotFixed { residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
