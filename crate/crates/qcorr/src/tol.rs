//! Numerical tolerances shared across the crate.
//!
//! One tolerance regime for the whole repository: state validation at
//! machine-precision scale, rank decisions relative to the largest singular
//! value, and looser thresholds where an iterative optimizer is involved.

/// Max entrywise |M - M†| for a matrix to count as Hermitian.
pub const HERMITIAN: f64 = 1e-12;

/// Max |tr(rho) - 1| for a unit-trace check.
pub const TRACE: f64 = 1e-12;

/// Eigenvalue floor for positive semidefiniteness checks.
pub const EIG_FLOOR: f64 = -1e-9;

/// Relative singular-value threshold for numerical rank. State matrices are
/// O(1)-normalized and double-precision SVD noise sits near 1e-14, so 1e-10
/// leaves four orders of margin on either side.
pub const RANK_REL: f64 = 1e-10;

/// Max-entry norm below which a commutator counts as zero. Commutators of
/// exactly-commuting operators accumulate ~1e-13 noise through the SVD
/// pipeline.
pub const COMMUTATOR: f64 = 1e-9;

/// Discord at or below this is treated as zero when labeling regions.
pub const DISCORD_ZERO: f64 = 1e-6;

/// Max-entry residual for state reconstruction and reassembly checks.
pub const RECONSTRUCTION: f64 = 1e-9;

/// Imaginary residue above this in a correlation coefficient signals a
/// corrupted (non-Hermitian) input.
pub const IMAG_RESIDUE: f64 = 1e-9;

/// Completeness residual for Kraus operator lists.
pub const KRAUS_COMPLETENESS: f64 = 1e-10;

/// Probabilities and spectral weights below this are treated as exact zeros
/// (removes 0*log(0) outcomes of probability zero).
pub const PROB_FLOOR: f64 = 1e-14;
