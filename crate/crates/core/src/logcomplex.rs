//! Complex numbers in polar log form.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Div, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wrap an angle into (−π, π].
pub fn canonical_phase(phase: f64) -> f64 {
    let mut p = phase % TAU;
    if p > PI {
        p -= TAU;
    } else if p <= -PI {
        p += TAU;
    }
    p
}

/// A complex number `exp(log_mag + i·phase)`.
///
/// Zero is represented by `log_mag == −∞` with phase 0. Products and quotients
/// never leave the log domain, so values such as C(10000, 5000) stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    log_mag: f64,
    phase: f64,
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex {
        log_mag: 0.0,
        phase: 0.0,
    };

    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        phase: 0.0,
    };

    /// Build from a log-magnitude and an arbitrary phase (wrapped on entry).
    pub fn from_log_polar(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex {
            log_mag,
            phase: canonical_phase(phase),
        }
    }

    /// Exact conversion of a real number; negative values carry phase π.
    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            LogComplex {
                log_mag: x.ln(),
                phase: 0.0,
            }
        } else {
            LogComplex {
                log_mag: (-x).ln(),
                phase: PI,
            }
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            Self::from_log_polar(z.norm().ln(), z.arg())
        }
    }

    /// Unit-modulus value `exp(i·phase)`.
    pub fn cis(phase: f64) -> Self {
        Self::from_log_polar(0.0, phase)
    }

    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// `|z|`; may be `+∞` when the modulus exceeds the f64 range.
    pub fn abs(&self) -> f64 {
        self.log_mag.exp()
    }

    pub fn conj(&self) -> Self {
        Self::from_log_polar(self.log_mag, -self.phase)
    }

    /// Multiply the modulus by `exp(shift)`.
    pub fn scale_log(&self, shift: f64) -> Self {
        if self.is_zero() {
            *self
        } else {
            LogComplex {
                log_mag: self.log_mag + shift,
                phase: self.phase,
            }
        }
    }

    /// Convert to an ordinary complex number.
    ///
    /// Fails with [`Error::Overflow`] if the modulus is not representable.
    pub fn to_complex(&self) -> Result<Complex64> {
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if self.log_mag.is_nan() || self.log_mag >= f64::MAX.ln() {
            return Err(Error::Overflow {
                log_mag: self.log_mag,
            });
        }
        Ok(Complex64::from_polar(self.log_mag.exp(), self.phase))
    }
}

impl Default for LogComplex {
    fn default() -> Self {
        Self::ONE
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;

    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::from_log_polar(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }
}

impl Div for LogComplex {
    type Output = LogComplex;

    /// Division by zero yields a modulus of `+∞`; callers guard their denominators.
    fn div(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::from_log_polar(self.log_mag - rhs.log_mag, self.phase - rhs.phase)
    }
}

impl fmt::Display for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "exp({} + {}i)", self.log_mag, self.phase)
        }
    }
}
