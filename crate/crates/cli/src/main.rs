//! `chronopath`: regenerate the interference-profile figures, operator oracles
//! and uncertainty numbers as CSV, SVG and JSON files with a run manifest.

mod commands;
mod config;
mod figures;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use chronopath::uncertainty::PLANCK_TIME;
use chronopath::Normalization;
use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use crate::figures::FigureId;

const CSV_HELP: &str = "\
CSV layout (fixed column order):
  figure fig2    n, x_scaled, magnitude_normalized, phase      x_scaled = (2n − N)/√N
  figure fig3    n, t_c_scaled, magnitude_normalized, phase    t_c_scaled = (t_c − t_c^peak)/σ_t
  figure fig4    n, t_c_scaled, magnitude_normalized, phase    t_c_scaled = t_c/σ_t
  oracle         n_steps, theta, delta_t, fidelity, deficit
  schrodinger    h, residual, ratio
  peaks          n_steps, theta, n_plus, n_minus, n_hat_plus, n_hat_minus,
                 t_c_peak_scaled, t_c_numeric_scaled, width_var_tc, spacing, spacing_large_n
Every profile CSV has N + 1 data rows. Each run also writes manifest.json
(schema chronopath/1) listing every emitted file with its SHA-256 digest.
Options can be read from a key = value file with --config; flags given on the
command line take precedence.";

#[derive(Debug, Parser)]
#[command(name = "chronopath", version, about, after_long_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Reserved. Every computation is deterministic; the value is only recorded.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Shift θ by +1e-9 when a denominator of the interference product vanishes.
    #[arg(
        long,
        action = ArgAction::Set,
        num_args = 0..=1,
        require_equals = true,
        default_value_t = false,
        default_missing_value = "true"
    )]
    pub perturb_theta_on_pole: bool,

    /// Read further options from a key = value file.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub figure: FigureId,

    /// θ in units of π (fig3, fig4; default 2.23).
    #[arg(long)]
    pub theta_over_pi: Option<f64>,

    /// Comma-separated step counts replacing the per-figure defaults.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub n_steps: Option<Vec<u64>>,

    /// Profile scaling: `max` (largest value 1) or `l2` (unit sum of squares).
    #[arg(long, default_value = "max")]
    pub normalization: Normalization,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    /// Largest N; every N from 1 to this value is checked (at most 14).
    #[arg(long, default_value_t = 12)]
    pub n_max: u64,

    /// Truncated ladder dimension (16 to 256).
    #[arg(long, default_value_t = 64)]
    pub dim: usize,

    /// θ = δt²λN in units of π; 0 selects the commuting pair.
    #[arg(long, default_value_t = 2.23)]
    pub theta_over_pi: f64,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SchrodingerArgs {
    #[arg(long, default_value_t = 128)]
    pub dim: usize,

    /// θ in units of π, inside (2, 4).
    #[arg(long, default_value_t = 2.23)]
    pub theta_over_pi: f64,

    /// N used for the coarse-graining comparison.
    #[arg(long, default_value_t = 12)]
    pub n_steps: u64,

    /// Comma-separated finite-difference steps h (units of 1/√λ).
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "0.04,0.02,0.01,0.005")]
    pub h: Vec<f64>,

    /// Clock time of the residual check; defaults to t_c^peak.
    #[arg(long)]
    pub t_c: Option<f64>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScalesArgs {
    /// Fraction of particles contributing to T violation, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub f: f64,

    /// Resolution limit δt_min in seconds.
    #[arg(long, default_value_t = PLANCK_TIME)]
    pub delta_t_min: f64,

    /// λ in s⁻², replacing √f·1e57.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Quadrature panels for the half-line energy variance.
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PeaksArgs {
    #[arg(long, default_value_t = 2.23)]
    pub theta_over_pi: f64,

    /// Comma-separated step counts.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "300,1200,2600,4600")]
    pub n_steps: Vec<u64>,

    /// Resolution limit in units of σ_t; enables the spacing-bound report at N_min.
    #[arg(long)]
    pub delta_t_min: Option<f64>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regenerate a figure as per-series CSV files plus an SVG overlay.
    #[command(args_override_self = true)]
    Figure(FigureArgs),
    /// Compare the iterated operator product with the interference-weighted sum.
    #[command(args_override_self = true)]
    Oracle(OracleArgs),
    /// Coarse-grained Schrödinger residuals and the phenomenological commutator.
    #[command(args_override_self = true)]
    Schrodinger(SchrodingerArgs),
    /// Minimum-uncertainty θ and variance estimates at the meson scale.
    #[command(args_override_self = true)]
    Uncertainty(ScalesArgs),
    /// Physical time scales in SI units for both ways of fixing λ.
    #[command(args_override_self = true)]
    Scales(ScalesArgs),
    /// Analytic and numeric peak positions, widths and spacings.
    #[command(args_override_self = true)]
    Peaks(PeaksArgs),
}

fn main() -> ExitCode {
    let args = match config::splice(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let outcome = match cli.command {
        Command::Figure(a) => commands::figure(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Schrodinger(a) => commands::schrodinger(&a),
        Command::Uncertainty(a) => commands::uncertainty(&a),
        Command::Scales(a) => commands::scales(&a),
        Command::Peaks(a) => commands::peaks(&a),
    };
    match outcome {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
