//! Interference function, binomial weights and their Gaussian limits.
//!
//! The interference function
//!
//! ```text
//! I_{N-n,n}(z) = exp[-i n(N-n) z/2] · ∏_{q=1}^{n} sin[(N+1-q) z/2] / sin(q z/2)
//! ```
//!
//! is the q-binomial coefficient at q = e^{-iz}. Its modulus spans hundreds of
//! orders of magnitude for N ~ 10⁴, so everything here is accumulated in the
//! log domain: log|sin| terms are summed in ascending q with Neumaier
//! compensation and the sign of each real factor is tracked as a phase of 0 or π.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logcomplex::LogComplex;
use crate::params::ModelParams;

/// Half-width of the band around sin(qz/2) = 0 treated as a pole, in radians.
pub const POLE_GUARD: f64 = 1e-12;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Low part of π in double-double form (π ≈ PI + PI_LO).
const PI_LO: f64 = 1.2246467991473532e-16;

/// sin(m·θ/2N) with the argument reduced against the nearest multiple of π
/// in double-double arithmetic.
#[derive(Debug, Clone, Copy)]
struct ReducedSine {
    ln_abs: f64,
    negative: bool,
    /// Signed distance of the argument from kπ.
    offset: f64,
    k: f64,
}

fn reduced_sine(m: u64, theta: f64, two_n: f64) -> ReducedSine {
    let mf = m as f64;
    // m·θ exactly, as hi + lo.
    let hi = mf * theta;
    let lo = mf.mul_add(theta, -hi);
    // Divide by 2N; the remainder of a rounded quotient is exact.
    let q1 = hi / two_n;
    let rem = (-q1).mul_add(two_n, hi) + lo;
    let q2 = rem / two_n;
    let k = (q1 / PI).round();
    let k_hi = k * PI;
    let k_lo = k.mul_add(PI, -k_hi);
    let offset = (q1 - k_hi) + (q2 - k_lo - k * PI_LO);
    let s = offset.sin();
    let odd = k.rem_euclid(2.0) == 1.0;
    ReducedSine {
        ln_abs: s.abs().ln(),
        negative: (s < 0.0) != odd,
        offset,
        k,
    }
}

fn is_pole(den: &ReducedSine) -> bool {
    den.k != 0.0 && den.offset.abs() < POLE_GUARD
}

/// Whether any denominator of I_{N-n,n}(θ/N), n ≤ N, falls inside the pole guard.
pub fn on_pole_lattice(params: &ModelParams) -> bool {
    if params.theta() == 0.0 {
        return false;
    }
    let two_n = 2.0 * params.n_steps() as f64;
    (1..=params.n_steps()).any(|q| is_pole(&reduced_sine(q, params.theta(), two_n)))
}

/// Shift applied to θ when a requested configuration sits on a pole.
pub const POLE_PERTURBATION: f64 = 1e-9;

/// θ nudged upward by [`POLE_PERTURBATION`] until no denominator is singular.
pub fn nudge_off_poles(params: &ModelParams) -> Result<ModelParams> {
    let mut p = *params;
    for _ in 0..16 {
        if !on_pole_lattice(&p) {
            return Ok(p);
        }
        p = p.with_theta(p.theta() + POLE_PERTURBATION)?;
    }
    Err(Error::InvalidParameter(format!(
        "θ = {} stays on the pole lattice after repeated perturbation",
        params.theta()
    )))
}

/// Incremental evaluation of I_{N-n,n}(z) for n = 0, 1, …, N.
///
/// Each step multiplies in one sine ratio, so the n-th item is bit-identical to
/// a standalone evaluation of [`interference`] at n.
#[derive(Debug, Clone)]
pub struct InterferenceScan {
    n_steps: u64,
    theta: f64,
    z: f64,
    next: u64,
    log_sum: CompensatedSum,
    negatives: u64,
    zero: bool,
    failed: bool,
}

impl InterferenceScan {
    pub fn new(params: &ModelParams) -> Self {
        InterferenceScan {
            n_steps: params.n_steps(),
            theta: params.theta(),
            z: params.z(),
            next: 0,
            log_sum: CompensatedSum::default(),
            negatives: 0,
            zero: false,
            failed: false,
        }
    }

    fn current(&self, n: u64) -> LogComplex {
        if self.zero {
            return LogComplex::ZERO;
        }
        let chirp = -(n as f64) * ((self.n_steps - n) as f64) * self.z / 2.0;
        let sign = if self.negatives % 2 == 1 { PI } else { 0.0 };
        LogComplex::from_log_polar(self.log_sum.value(), chirp + sign)
    }

    /// Multiply in the factor for q = `self.next`.
    fn absorb(&mut self, q: u64) -> Result<()> {
        if self.z == 0.0 {
            let numer_index = (self.n_steps + 1 - q) as f64;
            // z → 0: each ratio tends to (N+1-q)/q, building up C(N, n).
            self.log_sum.add(numer_index.ln());
            self.log_sum.add(-(q as f64).ln());
            return Ok(());
        }
        let two_n = 2.0 * self.n_steps as f64;
        let den = reduced_sine(q, self.theta, two_n);
        if is_pole(&den) {
            return Err(Error::SingularDenominator {
                q,
                z: self.z,
                theta: self.theta,
                n_steps: self.n_steps,
            });
        }
        let num = reduced_sine(self.n_steps + 1 - q, self.theta, two_n);
        if num.ln_abs == f64::NEG_INFINITY {
            self.zero = true;
            return Ok(());
        }
        let (ln_num, ln_den) = (num.ln_abs, den.ln_abs);
        let (neg_num, neg_den) = (num.negative, den.negative);
        self.log_sum.add(ln_num);
        self.log_sum.add(-ln_den);
        self.negatives += u64::from(neg_num) + u64::from(neg_den);
        Ok(())
    }
}

impl Iterator for InterferenceScan {
    type Item = Result<LogComplex>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next > self.n_steps {
            return None;
        }
        let n = self.next;
        if n > 0 {
            if let Err(e) = self.absorb(n) {
                self.failed = true;
                return Some(Err(e));
            }
        }
        self.next += 1;
        Some(Ok(self.current(n)))
    }
}

/// Evaluate the interference function I_{N-n,n}(θ/N).
///
/// `n = 0` gives exactly 1. With θ = 0 the binomial coefficient C(N, n) is
/// returned. A denominator within [`POLE_GUARD`] of a zero of sine is reported
/// as [`Error::SingularDenominator`].
pub fn interference(params: &ModelParams, n: u64) -> Result<LogComplex> {
    if n > params.n_steps() {
        return Err(Error::IndexOutOfRange {
            n,
            n_steps: params.n_steps(),
        });
    }
    let mut scan = InterferenceScan::new(params);
    let mut value = LogComplex::ONE;
    for _ in 0..=n {
        value = scan.next().expect("scan covers 0..=N")?;
    }
    Ok(value)
}

/// How a profile is scaled before reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Largest modulus equal to one.
    Max,
    /// Sum of squared moduli equal to one.
    L2,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Normalization::Max),
            "l2" => Ok(Normalization::L2),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization {other:?} (expected max or l2)"
            ))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Max => "max",
            Normalization::L2 => "l2",
        })
    }
}

/// log Σ exp(x_i), ignoring −∞ entries.
fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add((v - max).exp());
    }
    max + acc.value().ln()
}

/// Log-domain shift that applies `norm` to a set of log-moduli.
fn normalization_shift(log_mags: impl Iterator<Item = f64> + Clone, norm: Normalization) -> f64 {
    match norm {
        Normalization::Max => -log_mags.fold(f64::NEG_INFINITY, f64::max),
        Normalization::L2 => -0.5 * log_sum_exp(log_mags.map(|l| 2.0 * l)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub n: u64,
    pub amp: LogComplex,
    /// Net clock time (2n − N)δt.
    pub t_c: f64,
}

/// Interference amplitude as a function of the step index n for one (N, θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathAmplitudeProfile {
    params: ModelParams,
    entries: Vec<ProfileEntry>,
}

impl PathAmplitudeProfile {
    pub fn compute(params: &ModelParams) -> Result<Self> {
        let entries = InterferenceScan::new(params)
            .enumerate()
            .map(|(n, amp)| {
                let n = n as u64;
                Ok(ProfileEntry {
                    n,
                    amp: amp?,
                    t_c: params.clock_time(n),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PathAmplitudeProfile {
            params: *params,
            entries,
        })
    }

    /// Wrap precomputed amplitudes for n = 0..=N.
    pub fn from_amplitudes(params: &ModelParams, amps: Vec<LogComplex>) -> Result<Self> {
        if amps.len() as u64 != params.n_steps() + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                params.n_steps() + 1,
                amps.len()
            )));
        }
        let entries = amps
            .into_iter()
            .enumerate()
            .map(|(n, amp)| ProfileEntry {
                n: n as u64,
                amp,
                t_c: params.clock_time(n as u64),
            })
            .collect();
        Ok(PathAmplitudeProfile {
            params: *params,
            entries,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn entries(&self) -> &[ProfileEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn log_magnitudes(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.amp.log_mag()).collect()
    }

    /// Amplitudes rescaled according to `norm`, still in log form.
    pub fn normalized(&self, norm: Normalization) -> Vec<LogComplex> {
        let shift = normalization_shift(self.entries.iter().map(|e| e.amp.log_mag()), norm);
        self.entries
            .iter()
            .map(|e| e.amp.scale_log(shift))
            .collect()
    }

    /// Normalized moduli as plain floats (tails may underflow to zero).
    pub fn normalized_magnitudes(&self, norm: Normalization) -> Vec<f64> {
        self.normalized(norm).iter().map(LogComplex::abs).collect()
    }
}

/// Binomial weights B_n = C(N, n)/2^N in log form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialProfile {
    n_steps: u64,
    log_weights: Vec<f64>,
}

impl BinomialProfile {
    pub fn n_steps(&self) -> u64 {
        self.n_steps
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    pub fn normalized(&self, norm: Normalization) -> Vec<f64> {
        let shift = normalization_shift(self.log_weights.iter().copied(), norm);
        self.log_weights.iter().map(|l| (l + shift).exp()).collect()
    }

    /// Scaled abscissa (2n − N)/√N, i.e. x/σ_x of the n-th term.
    pub fn abscissa(&self, n: u64) -> f64 {
        (2.0 * n as f64 - self.n_steps as f64) / (self.n_steps as f64).sqrt()
    }
}

/// Binomial weights for the N-step spatial (or T-invariant temporal) walk.
pub fn binomial_profile(n_steps: u64) -> BinomialProfile {
    let ln2 = std::f64::consts::LN_2;
    let mut acc = CompensatedSum::default();
    let mut log_weights = Vec::with_capacity(n_steps as usize + 1);
    log_weights.push(-(n_steps as f64) * ln2);
    for q in 1..=n_steps {
        acc.add(((n_steps + 1 - q) as f64).ln());
        acc.add(-(q as f64).ln());
        log_weights.push(acc.value() - n_steps as f64 * ln2);
    }
    BinomialProfile {
        n_steps,
        log_weights,
    }
}

/// g(x, σ) = exp(−x²/2σ²).
pub fn gaussian_envelope(x: f64, sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    (-x * x / (2.0 * sigma * sigma)).exp()
}

/// |cos^N(A/√N) − exp(−A²/2)|.
pub fn cosine_limit_residual(a: f64, n_steps: u64) -> f64 {
    let n = n_steps as f64;
    let x = a / n.sqrt();
    let c = x.cos();
    let power = if c > 0.0 {
        // ln cos x = ln(1 − 2 sin²(x/2)) keeps precision for small x.
        let s = (x / 2.0).sin();
        (n * (-2.0 * s * s).ln_1p()).exp()
    } else {
        c.powf(n)
    };
    (power - (-a * a / 2.0).exp()).abs()
}

/// Which of the two interference maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// Peak positions n_± = N(1/2 ± π/θ).
pub(crate) fn peak_positions(params: &ModelParams) -> (f64, f64) {
    let n = params.n_steps() as f64;
    let ratio = PI / params.theta();
    (n * (0.5 + ratio), n * (0.5 - ratio))
}

/// |θ tan(θ/4)|, the curvature of the Gaussian peak shape.
pub(crate) fn peak_curvature(theta: f64) -> f64 {
    (theta * (theta / 4.0).tan()).abs()
}

/// f_n^(±)·g_n^(±) evaluated at a real index.
pub fn peak_approximant_at(params: &ModelParams, branch: Branch, n: f64) -> Result<LogComplex> {
    params.require_peak_window()?;
    let theta = params.theta();
    let big_n = params.n_steps() as f64;
    let (n_plus, n_minus) = peak_positions(params);
    let center = match branch {
        Branch::Plus => n_plus,
        Branch::Minus => n_minus,
    };
    let k2 = (n - center) * (n - center);
    let log_mag = -k2 * peak_curvature(theta) / (2.0 * big_n);
    let phase = -(n_plus * n_minus - k2) * theta / (2.0 * big_n);
    Ok(LogComplex::from_log_polar(log_mag, phase % TAU))
}

/// Gaussian approximant f_n^(±)·g_n^(±) of the interference function near a peak.
///
/// Only defined for 2π < θ < 4π, where θ·tan(θ/4) < 0.
pub fn peak_approximant(params: &ModelParams, branch: Branch, n: u64) -> Result<LogComplex> {
    peak_approximant_at(params, branch, n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_product_is_one() {
        for theta in [0.0, 1.0, 2.23 * PI, 3.7 * PI] {
            let p = ModelParams::new(1.0, theta, 50).unwrap();
            assert_eq!(interference(&p, 0).unwrap(), LogComplex::ONE);
        }
    }

    #[test]
    fn index_past_n_is_rejected() {
        let p = ModelParams::unit(2.23, 10).unwrap();
        assert!(matches!(
            interference(&p, 11),
            Err(Error::IndexOutOfRange { n: 11, n_steps: 10 })
        ));
    }

    #[test]
    fn small_cases_by_hand() {
        // N = 2: I_{1,1} = e^{-iz/2}·sin(z)/sin(z/2) = 2cos(z/2)e^{-iz/2}.
        let p = ModelParams::new(1.0, 1.3, 2).unwrap();
        let z = p.z();
        let i11 = interference(&p, 1).unwrap().to_complex().unwrap();
        let expect = num_complex::Complex64::from_polar(2.0 * (z / 2.0).cos(), -z / 2.0);
        assert!((i11 - expect).norm() < 1e-14);
        let i02 = interference(&p, 2).unwrap().to_complex().unwrap();
        assert!((i02 - num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pole_lattice_is_reported() {
        // z = 2π/5 puts sin(5z/2) = sin(π) in the denominator at q = 5.
        let p = ModelParams::new(1.0, 2.0 * PI, 5).unwrap();
        assert!(interference(&p, 4).is_ok());
        match interference(&p, 5) {
            Err(Error::SingularDenominator { q, .. }) => assert_eq!(q, 5),
            other => panic!("expected pole, got {other:?}"),
        }
        assert!(on_pole_lattice(&p));
        let nudged = nudge_off_poles(&p).unwrap();
        assert_eq!(nudged.theta(), 2.0 * PI + POLE_PERTURBATION);
        assert!(interference(&nudged, 5).is_ok());
        assert!(!on_pole_lattice(&ModelParams::unit(2.23, 1000).unwrap()));
    }

    #[test]
    fn removable_singularity_after_nudge() {
        // θ = 3π, N = 3: I_{1,2} = e^{-iz}·[sin(3z/2)/sin(z/2)]·[sin(z)/sin(z)] with
        // z = π gives e^{-iπ}·(−1)·1 = 1; the second factor is 0/0 on the lattice.
        let p = ModelParams::unit(3.0, 3).unwrap();
        assert!(interference(&p, 2).is_err());
        let nudged = nudge_off_poles(&p).unwrap();
        let v = interference(&nudged, 2).unwrap().to_complex().unwrap();
        assert!(
            (v - num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-8,
            "{v}"
        );
    }

    #[test]
    fn reduced_sine_matches_libm_away_from_poles() {
        for m in [1u64, 7, 100, 999] {
            for theta in [0.3, 2.23 * PI, -5.0] {
                let r = reduced_sine(m, theta, 2000.0);
                let s = (m as f64 * theta / 2000.0).sin();
                assert!((r.ln_abs - s.abs().ln()).abs() < 1e-12);
                assert_eq!(r.negative, s < 0.0);
            }
        }
    }

    #[test]
    fn scan_matches_pointwise_evaluation() {
        let p = ModelParams::unit(2.23, 77).unwrap();
        let profile = PathAmplitudeProfile::compute(&p).unwrap();
        for e in profile.entries() {
            assert_eq!(e.amp, interference(&p, e.n).unwrap());
        }
    }

    #[test]
    fn profile_fails_on_pole() {
        let p = ModelParams::new(1.0, 2.0 * PI, 5).unwrap();
        assert!(matches!(
            PathAmplitudeProfile::compute(&p),
            Err(Error::SingularDenominator { .. })
        ));
    }

    #[test]
    fn binomial_small() {
        let b = binomial_profile(2).weights();
        assert!((b[0] - 0.25).abs() < 1e-15);
        assert!((b[1] - 0.5).abs() < 1e-15);
        assert!((b[2] - 0.25).abs() < 1e-15);
        let m = binomial_profile(2).normalized(Normalization::Max);
        assert_eq!(m[1], 1.0);
    }

    #[test]
    fn l2_normalization_has_unit_norm() {
        let p = ModelParams::unit(2.23, 300).unwrap();
        let mags = PathAmplitudeProfile::compute(&p)
            .unwrap()
            .normalized_magnitudes(Normalization::L2);
        let norm: f64 = mags.iter().map(|m| m * m).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_envelope_values() {
        assert_eq!(gaussian_envelope(0.0, 3.0), 1.0);
        assert!((gaussian_envelope(3.0, 3.0) - (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn cosine_limit_trivial_and_converging() {
        assert_eq!(cosine_limit_residual(0.0, 17), 0.0);
        let r: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| cosine_limit_residual(1.0, n))
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2]);
        assert!(cosine_limit_residual(2.0, 10_000) < 1e-3);
    }

    #[test]
    fn approximant_is_unity_at_integer_peak() {
        // θ = 2.5π, N = 100 → n_+ = 100(1/2 + 0.4) = 90 exactly.
        let p = ModelParams::unit(2.5, 100).unwrap();
        let v = peak_approximant(&p, Branch::Plus, 90).unwrap();
        assert!(v.log_mag().abs() < 1e-12);
        let v = peak_approximant(&p, Branch::Minus, 10).unwrap();
        assert!(v.log_mag().abs() < 1e-12);
    }

    #[test]
    fn approximant_requires_peak_window() {
        let p = ModelParams::unit(1.5, 100).unwrap();
        assert!(matches!(
            peak_approximant(&p, Branch::Plus, 3),
            Err(Error::ThetaOutOfRange { .. })
        ));
    }

    #[test]
    fn normalization_parses() {
        assert_eq!("max".parse::<Normalization>().unwrap(), Normalization::Max);
        assert_eq!("l2".parse::<Normalization>().unwrap(), Normalization::L2);
        assert!("l1".parse::<Normalization>().is_err());
    }
}
