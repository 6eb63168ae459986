//! Positions, clock times, widths and spacings of the two interference maxima.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::amplitude::{peak_curvature, peak_positions, PathAmplitudeProfile};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Closed-form characterisation of the peaks for 2π < θ < 4π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakAnalysis {
    /// n_+ = N(1/2 + π/θ), not rounded.
    pub n_plus: f64,
    /// n_− = N(1/2 − π/θ), not rounded.
    pub n_minus: f64,
    /// Representative clock time 2πσ_t√N/θ.
    pub t_c_peak: f64,
    /// Clock-time variance 2/|λ tan(θ/4)| of each Gaussian component.
    pub width_var_tc: f64,
    /// Coarse-graining weight n_+/(n_+ − n_−) = θ/4π + 1/2.
    pub a_plus: f64,
    /// Coarse-graining weight n_−/(n_+ − n_−) = θ/4π − 1/2.
    pub a_minus: f64,
    /// t_c^(peak)(N+1) − t_c^(peak)(N).
    pub spacing: f64,
    /// Large-N form σ_tπ/(θ√N) of the spacing.
    pub spacing_large_n: f64,
    /// 2π/(λ·δt_min), when a resolution limit is configured.
    pub t_c_min_peak: Option<f64>,
}

/// 2πσ_t(√(N+1) − √N)/θ without cancellation.
fn exact_spacing(params: &ModelParams) -> f64 {
    let n = params.n_steps() as f64;
    2.0 * PI * params.sigma_t() / (params.theta() * ((n + 1.0).sqrt() + n.sqrt()))
}

pub fn analytic_peaks(params: &ModelParams) -> Result<PeakAnalysis> {
    params.require_peak_window()?;
    let theta = params.theta();
    let sigma_t = params.sigma_t();
    let n = params.n_steps() as f64;
    let (n_plus, n_minus) = peak_positions(params);
    // a_− is derived from a_+ so that a_+ − a_− = 1 holds exactly: on the
    // peak window a_+ ∈ (1, 3/2) and the subtraction is exact.
    let a_plus = theta / (4.0 * PI) + 0.5;
    Ok(PeakAnalysis {
        n_plus,
        n_minus,
        t_c_peak: 2.0 * PI * sigma_t * n.sqrt() / theta,
        width_var_tc: 2.0 / (params.lambda() * (theta / 4.0).tan()).abs(),
        a_plus,
        a_minus: a_plus - 1.0,
        spacing: exact_spacing(params),
        spacing_large_n: sigma_t * PI / (theta * n.sqrt()),
        t_c_min_peak: params
            .delta_t_min()
            .map(|d| 2.0 * PI / (params.lambda() * d)),
    })
}

/// Variance in n of the Gaussian weights |g_n|², N/(2|θ tan(θ/4)|).
pub fn index_variance(params: &ModelParams) -> Result<f64> {
    params.require_peak_window()?;
    Ok(params.n_steps() as f64 / (2.0 * peak_curvature(params.theta())))
}

/// Argmax of |amp| on the upper and lower halves of a profile.
///
/// Returns `(n̂_+, n̂_−)`. Ties go to the index nearest N/2. Fails with
/// [`Error::FlatProfile`] when no entry strictly exceeds its neighbours.
pub fn numeric_peaks(profile: &PathAmplitudeProfile) -> Result<(u64, u64)> {
    let mags = profile.log_magnitudes();
    if mags.is_empty() {
        return Err(Error::FlatProfile);
    }
    let has_strict_max = (0..mags.len()).any(|i| {
        let left = if i == 0 {
            f64::NEG_INFINITY
        } else {
            mags[i - 1]
        };
        let right = mags.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        mags[i] > left && mags[i] > right
    });
    if !has_strict_max {
        return Err(Error::FlatProfile);
    }

    let n_steps = mags.len() - 1;
    let upper_start = n_steps.div_ceil(2);
    let lower_end = n_steps / 2;

    let mut best_plus = upper_start;
    for n in upper_start..=n_steps {
        if mags[n] > mags[best_plus] {
            best_plus = n;
        }
    }
    let mut best_minus = lower_end;
    for n in (0..=lower_end).rev() {
        if mags[n] > mags[best_minus] {
            best_minus = n;
        }
    }
    Ok((best_plus as u64, best_minus as u64))
}

/// Spacing of representative clock times for consecutive N, and whether it
/// beats half the resolution limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingBound {
    pub spacing: f64,
    pub spacing_large_n: f64,
    /// δt_min/2.
    pub limit: f64,
    pub bound_ok: bool,
}

/// Requires a configured δt_min. The bound is evaluated even when N < N_min,
/// where it is not guaranteed to hold.
pub fn peak_spacing_bound(params: &ModelParams) -> Result<SpacingBound> {
    let delta_t_min = params
        .delta_t_min()
        .ok_or_else(|| Error::InvalidParameter("peak spacing bound needs δt_min".into()))?;
    let spacing = exact_spacing(params);
    let limit = delta_t_min / 2.0;
    Ok(SpacingBound {
        spacing,
        spacing_large_n: params.sigma_t() * PI
            / (params.theta() * (params.n_steps() as f64).sqrt()),
        limit,
        bound_ok: spacing < limit,
    })
}
