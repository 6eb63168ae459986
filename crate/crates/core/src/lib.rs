//! Numerical laboratory for quantum virtual paths through space and time.
//!
//! The crate is organised bottom-up:
//!
//! * [`logcomplex`] stores complex amplitudes as (log-magnitude, phase) pairs so
//!   that products of thousands of sine ratios never overflow.
//! * [`params`] holds the parameter bundles for the spatial and temporal
//!   constructions.
//! * [`amplitude`] evaluates the interference function, binomial weights and
//!   their Gaussian limits.
//! * [`peaks`] characterises the two interference maxima in closed form and
//!   numerically.
//! * [`operators`] realises the non-commuting Hamiltonian pair on a truncated
//!   oscillator ladder and provides brute-force operator oracles.
//! * [`uncertainty`] covers the energy/clock-time uncertainty analysis and the
//!   physical time scales in SI units.

pub mod amplitude;
pub mod error;
pub mod logcomplex;
pub mod operators;
pub mod params;
pub mod peaks;
pub mod uncertainty;

pub use amplitude::{
    binomial_profile, cosine_limit_residual, gaussian_envelope, interference, nudge_off_poles,
    on_pole_lattice, peak_approximant, peak_approximant_at, BinomialProfile, Branch, Normalization,
    PathAmplitudeProfile, ProfileEntry,
};
pub use error::{Error, Result};
pub use logcomplex::LogComplex;
pub use params::{ModelParams, SpatialParams};
pub use peaks::{analytic_peaks, numeric_peaks, peak_spacing_bound, PeakAnalysis, SpacingBound};
