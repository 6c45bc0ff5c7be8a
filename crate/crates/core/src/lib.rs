//! Exact spectral toolkit for a deposition/evaporation birth-death model.
//!
//! A lattice of `n` independent two-state cells fills at rate `alpha` per
//! empty cell and empties at rate `beta` per filled cell. The occupancy-count
//! distribution `Q(t)` obeys `dQ/dt = M Q` for a tridiagonal generator `M`
//! whose eigenpairs are known in closed form. This crate builds the matrix
//! families involved (the generator, the Sylvester-Kac matrix, the Krawtchouk
//! matrix), produces their closed-form spectra in exact rational arithmetic,
//! solves the master equation by spectral expansion, and cross-checks every
//! closed form against independent oracles:
//!
//! - the characteristic-polynomial three-term recurrence ([`poly`]),
//! - exact residuals of the eigenvalue equations row by row ([`spectral`]),
//! - fixed-step RK4 integration of the master equation ([`dynamics`]),
//! - event-driven Monte Carlo simulation of the underlying process
//!   ([`simulator`]).
//!
//! All closed-form computation is exact (`num::BigRational` underneath);
//! floating point appears only in `exp(lambda t)` evaluation and inside the
//! simulator.

pub mod dynamics;
pub mod exact;
pub mod matrices;
pub mod poly;
pub mod simulator;
pub mod spectral;

pub use dynamics::{
    average_coverage, equilibrium, equilibrium_for, equilibrium_unnormalized,
    expansion_coefficients, normalization_sum, propagate, rk4_oracle, ExpansionCoefficients,
    ProbabilityVector, Propagator,
};
pub use exact::{binom, binom_rational, Rational};
pub use matrices::{
    build_generator, build_krawtchouk, build_sylvester_kac, ModelParams, TridiagonalMatrix,
};
pub use poly::{charpoly_tridiagonal, Polynomial};
pub use simulator::{
    estimate_coverage, estimate_qk, run_trajectory, EmpiricalDistribution, InitialCondition,
    SimConfig, StateMode, TrialRng,
};
pub use spectral::{
    classify_eigvec_claim, decompose_generator, eigen_residual, eigenvalues_generator,
    eigenvector_generator, krawtchouk_charpoly_product, krawtchouk_eigenvalues,
    krawtchouk_eigenvector_thm1, krawtchouk_left_eigenvectors_via_transposition, l1_norm,
    mazza_factorization_check, sylvester_kac_spectrum, verify_row_equation, ClassificationReport,
    SpectralDecomposition, SpectralSource,
};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("singular linear system")]
    SingularSystem,
}
