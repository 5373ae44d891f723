use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BOUNDARY_ULPS: f64 = 8.0;

/// The open wedge `S_α = { z : arg z ∈ (−π/4 + α, π/4 + α) }`, `|α| < π/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Sector {
    alpha: f64,
}

impl Sector {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha.abs() < FRAC_PI_4) {
            return Err(Error::DomainViolation(format!(
                "sector angle must satisfy |alpha| < pi/4, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    /// `S_0`, the sector around the positive real axis.
    pub fn principal() -> Self {
        Self { alpha: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `e^{-iα}`, the rotation bringing `S_α` onto `S_0`.
    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.alpha)
    }

    /// Strict membership. Boundary rays are excluded, including points that differ from a
    /// boundary ray only by rounding (e.g. `e^{iπ/4}` evaluated in floating point).
    pub fn contains(&self, z: Complex64) -> Result<bool> {
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroScaling);
        }
        let w = z * self.rotation();
        Ok(w.re - w.im.abs() > BOUNDARY_ULPS * f64::EPSILON * w.norm())
    }

    /// `Re(z² e^{-2iα}) > 0`. This agrees with [`Sector::contains`] on the half-plane
    /// `Re(z e^{-iα}) > 0`; on the opposite half-plane it also accepts `−S_α`.
    pub fn sign_test(&self, z: Complex64) -> bool {
        let w = z * self.rotation();
        (w * w).re > 0.0
    }

    /// `Re(z² e^{-2iα})`, the decay rate of the Gaussian integrals along the rotated contour.
    pub fn decay_rate(&self, z: Complex64) -> f64 {
        let w = z * self.rotation();
        (w * w).re
    }

    pub fn require(&self, z: Complex64) -> Result<()> {
        if self.contains(z)? {
            Ok(())
        } else {
            Err(Error::SectorViolation {
                z,
                alpha: self.alpha,
            })
        }
    }
}

impl TryFrom<f64> for Sector {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<Sector> for f64 {
    fn from(s: Sector) -> f64 {
        s.alpha
    }
}
