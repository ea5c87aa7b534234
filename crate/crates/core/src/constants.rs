use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permittivity, F/m (CODATA 2018).
pub const EPS0_SI: f64 = 8.8541878128e-12;
/// Vacuum permeability, H/m (CODATA 2018).
pub const MU0_SI: f64 = 1.25663706212e-6;

/// Vacuum constants. `c` is always derived from `eps0` and `mu0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstants", into = "RawConstants")]
pub struct PhysicalConstants {
    eps0: f64,
    mu0: f64,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct RawConstants {
    eps0: f64,
    mu0: f64,
}

impl TryFrom<RawConstants> for PhysicalConstants {
    type Error = Error;
    fn try_from(r: RawConstants) -> Result<Self> {
        PhysicalConstants::new(r.eps0, r.mu0)
    }
}

impl From<PhysicalConstants> for RawConstants {
    fn from(k: PhysicalConstants) -> Self {
        RawConstants {
            eps0: k.eps0,
            mu0: k.mu0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(eps0: f64, mu0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0.is_finite() && mu0 > 0.0 && mu0.is_finite()) {
            return Err(Error::InvalidConstants(format!(
                "eps0 and mu0 must be positive and finite (got {eps0}, {mu0})"
            )));
        }
        Ok(Self {
            eps0,
            mu0,
            c: 1.0 / (mu0 * eps0).sqrt(),
        })
    }

    pub fn si() -> Self {
        Self::new(EPS0_SI, MU0_SI).expect("SI constants are valid")
    }

    /// eps0 = mu0 = c = 1.
    pub fn normalized() -> Self {
        Self::new(1.0, 1.0).expect("unit constants are valid")
    }

    #[inline]
    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    #[inline]
    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    /// 1/(eps0 mu0), the coefficient of curl B in Ampère's law.
    #[inline]
    pub fn c_squared(&self) -> f64 {
        1.0 / (self.eps0 * self.mu0)
    }

    /// Dimensionless speed |u|/c.
    pub fn beta(&self, speed: f64) -> f64 {
        speed / self.c
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::si()
    }
}
