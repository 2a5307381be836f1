//! Analysis of correlations in finite-dimensional bipartite quantum states.
//!
//! The crate computes the correlation-matrix rank L of a state, its quantum
//! discord with respect to either subsystem, and the discord witnesses that
//! follow from L alone. It also builds local CPTP channels, including the
//! preparation construction that creates nonzero-discord states from
//! classical seeds, and runs the parameter-counting and Monte Carlo
//! experiments that locate states in the (L, discord) landscape.

pub mod channels;
pub mod correlation;
pub mod discord;
pub mod error;
pub mod format;
pub mod geometry;
pub mod linalg;
pub mod states;
pub mod tol;

pub use channels::{LocalCreation, MonotonicitySummary, MonotonicityTrial, QuantumChannel};
pub use correlation::{CorrelationAnalysis, DiscordWitnessReport, EnsembleRankCheck};
pub use discord::{DiscordResult, Measurement};
pub use error::{Error, Result};
pub use geometry::{ClassificationReport, CountingReport, MonteCarloReport, Region};
pub use linalg::{ComplexMatrix, ComplexVector, HermitianBasis, RealMatrix, Subsystem};
pub use states::{DensityMatrix, EnsembleTerm, ProductEnsemble};
