use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A denominator factor `sin(q z / 2)` of the interference product vanishes.
    #[error(
        "singular denominator: sin({q}·z/2) vanishes for z = θ/N = {z:e} (θ = {theta}, N = {n_steps}); \
         perturb θ off the pole lattice (e.g. by +1e-9)"
    )]
    SingularDenominator {
        q: u64,
        z: f64,
        theta: f64,
        n_steps: u64,
    },

    #[error("θ = {theta} (= {:.6}π) lies outside the open interval (2π, 4π)", theta / std::f64::consts::PI)]
    ThetaOutOfRange { theta: f64 },

    #[error("profile has no strict local maximum")]
    FlatProfile,

    #[error("realization dimension {dim} is below the minimum of 16")]
    DimTooSmall { dim: usize },

    #[error("contributing fraction f = {f} must lie in (0, 1]")]
    InvalidFraction { f: f64 },

    #[error("log-magnitude {log_mag} exceeds the f64 range; keep the value in the log domain")]
    Overflow { log_mag: f64 },

    #[error("step index n = {n} is outside 0..={n_steps}")]
    IndexOutOfRange { n: u64, n_steps: u64 },

    #[error("realization has λ = {realization}, parameters imply λ = {params}")]
    LambdaMismatch { realization: f64, params: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
