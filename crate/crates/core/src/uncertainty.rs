//! Energy/clock-time uncertainty analysis and physical time scales (SI units).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1 − 2/π, the variance ratio of a half-normal distribution to its parent.
pub const HALF_NORMAL_FACTOR: f64 = 1.0 - 2.0 / PI;

/// Planck time in seconds, the default resolution limit δt_min.
pub const PLANCK_TIME: f64 = 5.4e-44;

/// Scale of the meson-decay commutator spectrum, in s⁻², for f = 1.
pub const MESON_LAMBDA_SCALE: f64 = 1e57;

/// θ in (2π, 4π) where the clock-time variance from the peak width equals the
/// energy–time estimate, i.e. the root of tan(θ/4) = −2/(1 − 2/π).
///
/// Bisection to an absolute bracket width of 1e-12.
pub fn solve_min_uncertainty_theta() -> f64 {
    let target = -2.0 / HALF_NORMAL_FACTOR;
    let f = |theta: f64| (theta / 4.0).tan() - target;
    // tan(θ/4) increases from −∞ to 0 across the open bracket.
    let mut lo = TAU + 1e-9;
    let mut hi = 2.0 * TAU - 1e-9;
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Variance estimates at a given (θ, λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBounds {
    /// 2/|λ tan(θ/4)|, from the width of the Gaussian peak weights.
    pub var_tc_bound: f64,
    /// |λ|/4, the minimum-uncertainty variance of (H_F + H_B)/2.
    pub var_h: f64,
    /// (1 − 2/π)/|λ|, from the approximate energy–time relation.
    pub var_tc_energy_time: f64,
}

pub fn variance_bounds(theta: f64, lambda: f64) -> Result<VarianceBounds> {
    if !(theta > TAU && theta < 2.0 * TAU) {
        return Err(Error::ThetaOutOfRange { theta });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "λ must be positive and finite, got {lambda}"
        )));
    }
    Ok(VarianceBounds {
        var_tc_bound: 2.0 / (lambda * (theta / 4.0).tan()).abs(),
        var_h: lambda / 4.0,
        var_tc_energy_time: HALF_NORMAL_FACTOR / lambda,
    })
}

/// Mean and variance of the energy distribution ∝ exp(−2E²Δt_c²) on E ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Composite Simpson quadrature of the truncated-Gaussian moments.
///
/// The integration range is cut at 12 standard deviations of the parent
/// Gaussian; `n_grid` is rounded up to an even number of panels.
pub fn truncated_gaussian_moments(delta_tc: f64, n_grid: usize) -> HalfLineMoments {
    let sigma_e = 1.0 / (2.0 * delta_tc);
    let panels = n_grid.max(2).next_multiple_of(2);
    let upper = 12.0 * sigma_e;
    let h = upper / panels as f64;
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..=panels {
        let e = i as f64 * h;
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let p = w * (-2.0 * e * e * delta_tc * delta_tc).exp();
        m0 += p;
        m1 += p * e;
        m2 += p * e * e;
    }
    let mean = m1 / m0;
    HalfLineMoments {
        mean,
        variance: m2 / m0 - mean * mean,
    }
}

pub fn truncated_gaussian_variance(delta_tc: f64, n_grid: usize) -> f64 {
    truncated_gaussian_moments(delta_tc, n_grid).variance
}

/// Inputs for the physical-scale estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalesInput {
    /// Fraction of particles contributing to T violation, in (0, 1].
    pub f: f64,
    /// Resolution limit in seconds.
    pub delta_t_min: f64,
    /// Replaces the meson-scale λ (s⁻²) when set.
    pub lambda_override: Option<f64>,
}

impl Default for ScalesInput {
    fn default() -> Self {
        ScalesInput {
            f: 1.0,
            delta_t_min: PLANCK_TIME,
            lambda_override: None,
        }
    }
}

impl ScalesInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.f > 0.0 && self.f <= 1.0) {
            return Err(Error::InvalidFraction { f: self.f });
        }
        if !(self.delta_t_min > 0.0 && self.delta_t_min.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "δt_min must be positive, got {}",
                self.delta_t_min
            )));
        }
        if let Some(l) = self.lambda_override {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "λ override must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }
}

/// How λ is chosen for the physical estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleMode {
    /// λ = √f·10⁵⁷ s⁻², the spread of the meson-decay commutator spectrum.
    MesonScale,
    /// λ = 2π/δt_min², so that the minimum representative clock time equals δt_min.
    NatureChosen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScales {
    pub mode: ScaleMode,
    /// s⁻²
    pub lambda: f64,
    /// Minimum representative clock time 2π/(λ·δt_min), s.
    pub tc_min_peak: f64,
    /// Clock-time uncertainty √((1 − 2/π)/λ), s.
    pub delta_tc: f64,
}

pub fn physical_scales(input: &ScalesInput, mode: ScaleMode) -> Result<PhysicalScales> {
    input.validate()?;
    let lambda = match mode {
        ScaleMode::MesonScale => input
            .lambda_override
            .unwrap_or(input.f.sqrt() * MESON_LAMBDA_SCALE),
        ScaleMode::NatureChosen => TAU / (input.delta_t_min * input.delta_t_min),
    };
    Ok(PhysicalScales {
        mode,
        lambda,
        tc_min_peak: TAU / (lambda * input.delta_t_min),
        delta_tc: (HALF_NORMAL_FACTOR / lambda).sqrt(),
    })
}

/// The minimum-uncertainty analysis evaluated at θ* for the meson-scale λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub theta_star: f64,
    /// s²
    pub var_tc_bound: f64,
    /// s⁻² (energy² in units with ħ = 1)
    pub var_h: f64,
    /// s²
    pub var_tc_energy_time: f64,
    /// s
    pub tc_min_peak: f64,
    /// s
    pub delta_tc: f64,
    /// s⁻²
    pub lambda_used: f64,
}

pub fn uncertainty_report(input: &ScalesInput) -> Result<UncertaintyReport> {
    let scales = physical_scales(input, ScaleMode::MesonScale)?;
    let theta_star = solve_min_uncertainty_theta();
    let bounds = variance_bounds(theta_star, scales.lambda)?;
    Ok(UncertaintyReport {
        theta_star,
        var_tc_bound: bounds.var_tc_bound,
        var_h: bounds.var_h,
        var_tc_energy_time: bounds.var_tc_energy_time,
        tc_min_peak: scales.tc_min_peak,
        delta_tc: scales.delta_tc,
        lambda_used: scales.lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_star_root() {
        let t = solve_min_uncertainty_theta();
        assert!(t > TAU && t < 2.0 * TAU);
        assert!((t / PI - 2.2288).abs() < 1e-4);
        assert!(((t / 4.0).tan() + 5.504).abs() < 1e-3);
    }

    #[test]
    fn variance_bounds_basic() {
        let b = variance_bounds(2.5 * PI, 1.0).unwrap();
        assert_eq!(b.var_h, 0.25);
        assert!(variance_bounds(PI, 1.0).is_err());
        assert!(variance_bounds(2.5 * PI, 0.0).is_err());
    }

    #[test]
    fn fraction_is_validated() {
        for f in [0.0, -0.1, 1.5, f64::NAN] {
            let input = ScalesInput {
                f,
                ..Default::default()
            };
            assert!(matches!(
                physical_scales(&input, ScaleMode::MesonScale),
                Err(Error::InvalidFraction { .. })
            ));
        }
    }

    #[test]
    fn override_replaces_meson_lambda() {
        let input = ScalesInput {
            lambda_override: Some(4.0e60),
            ..Default::default()
        };
        let s = physical_scales(&input, ScaleMode::MesonScale).unwrap();
        assert_eq!(s.lambda, 4.0e60);
    }

    #[test]
    fn quadrature_scales_as_inverse_square() {
        let v1 = truncated_gaussian_variance(1.0, 4000);
        let v2 = truncated_gaussian_variance(2.0, 4000);
        assert!((v1 / v2 - 4.0).abs() < 1e-9);
    }
}
