//! Parameter bundles for the spatial and temporal constructions.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `⌈ratio⌉`, treating values within a relative 1e-9 of an integer as that integer.
fn ceil_count(ratio: f64) -> u64 {
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest as u64
    } else {
        ratio.ceil() as u64
    }
}

/// Parameters of the temporal virtual-path construction.
///
/// θ = σ_t²λ is the stored quantity; λ is always derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    sigma_t: f64,
    theta: f64,
    n_steps: u64,
    delta_t_min: Option<f64>,
}

impl ModelParams {
    pub fn new(sigma_t: f64, theta: f64, n_steps: u64) -> Result<Self> {
        if !(sigma_t > 0.0 && sigma_t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "σ_t must be positive and finite, got {sigma_t}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "θ must be finite, got {theta}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        Ok(ModelParams {
            sigma_t,
            theta,
            n_steps,
            delta_t_min: None,
        })
    }

    /// Build from λ instead of θ; θ is computed as σ_t²λ.
    pub fn from_lambda(sigma_t: f64, lambda: f64, n_steps: u64) -> Result<Self> {
        Self::new(sigma_t, sigma_t * sigma_t * lambda, n_steps)
    }

    /// Convenience constructor with σ_t = 1 and θ given in units of π.
    pub fn unit(theta_over_pi: f64, n_steps: u64) -> Result<Self> {
        Self::new(1.0, theta_over_pi * PI, n_steps)
    }

    pub fn with_delta_t_min(mut self, delta_t_min: f64) -> Result<Self> {
        if !(delta_t_min > 0.0 && delta_t_min.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "δt_min must be positive and finite, got {delta_t_min}"
            )));
        }
        self.delta_t_min = Some(delta_t_min);
        Ok(self)
    }

    pub fn with_n_steps(mut self, n_steps: u64) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        self.n_steps = n_steps;
        Ok(self)
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "θ must be finite, got {theta}"
            )));
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn sigma_t(&self) -> f64 {
        self.sigma_t
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_steps(&self) -> u64 {
        self.n_steps
    }

    pub fn delta_t_min(&self) -> Option<f64> {
        self.delta_t_min
    }

    /// λ = θ/σ_t².
    pub fn lambda(&self) -> f64 {
        self.theta / (self.sigma_t * self.sigma_t)
    }

    /// δt = σ_t/√N.
    pub fn delta_t(&self) -> f64 {
        self.sigma_t / (self.n_steps as f64).sqrt()
    }

    /// Interference argument z = δt²λ = θ/N.
    pub fn z(&self) -> f64 {
        self.theta / self.n_steps as f64
    }

    /// N_min = ⌈σ_t²/δt_min²⌉, if a resolution limit is set.
    pub fn n_min(&self) -> Option<u64> {
        self.delta_t_min
            .map(|d| ceil_count(self.sigma_t * self.sigma_t / (d * d)))
    }

    /// Net clock time t_c = (2n − N)δt of the n-th path class.
    pub fn clock_time(&self, n: u64) -> f64 {
        (2.0 * n as f64 - self.n_steps as f64) * self.delta_t()
    }

    /// Fails unless 2π < θ < 4π, the window in which the peak formulas hold.
    pub fn require_peak_window(&self) -> Result<()> {
        if self.theta > TAU && self.theta < 2.0 * TAU {
            Ok(())
        } else {
            Err(Error::ThetaOutOfRange { theta: self.theta })
        }
    }
}

/// Parameters of the spatial virtual-path construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialParams {
    sigma_x: f64,
    n_steps: u64,
    delta_x_min: f64,
}

impl SpatialParams {
    pub fn new(sigma_x: f64, n_steps: u64, delta_x_min: f64) -> Result<Self> {
        if !(sigma_x > 0.0 && sigma_x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "σ_x must be positive and finite, got {sigma_x}"
            )));
        }
        if !(delta_x_min > 0.0 && delta_x_min.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "δx_min must be positive and finite, got {delta_x_min}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        Ok(SpatialParams {
            sigma_x,
            n_steps,
            delta_x_min,
        })
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn n_steps(&self) -> u64 {
        self.n_steps
    }

    pub fn delta_x_min(&self) -> f64 {
        self.delta_x_min
    }

    /// Step length σ_x/√N.
    pub fn step_length(&self) -> f64 {
        self.sigma_x / (self.n_steps as f64).sqrt()
    }

    /// N_min = ⌈σ_x²/δx_min²⌉, where the step length reaches δx_min.
    pub fn n_min_space(&self) -> u64 {
        ceil_count(self.sigma_x * self.sigma_x / (self.delta_x_min * self.delta_x_min))
    }

    /// Displacement (2n − N)·σ_x/√N of the n-th binomial term.
    pub fn displacement(&self, n: u64) -> f64 {
        (2.0 * n as f64 - self.n_steps as f64) * self.step_length()
    }
}
