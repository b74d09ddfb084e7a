use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lamé coefficients of the viscous stress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscosityParams {
    pub mu: f64,
    pub lambda: f64,
}

impl ViscosityParams {
    /// Requires `mu > 0` and `lambda + 2 mu > 0`.
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        let p = Self { mu, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter("viscosities must be finite".into()));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {}", self.mu)));
        }
        if self.lambda + 2.0 * self.mu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda + 2 mu must be positive, got {}",
                self.lambda + 2.0 * self.mu
            )));
        }
        Ok(())
    }

    /// Longitudinal viscosity `nu = lambda + 2 mu`.
    pub fn nu(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// `mu + |lambda + mu|`.
    pub fn nu_bar(&self) -> f64 {
        self.mu + (self.lambda + self.mu).abs()
    }

    /// `b_under * min(mu, lambda + 2 mu)`.
    pub fn nu_under(&self, b_under: f64) -> f64 {
        b_under * self.min_eigen()
    }

    /// Smallest eigenvalue magnitude per unit `|k|^2`: `min(mu, lambda + 2 mu)`.
    pub fn min_eigen(&self) -> f64 {
        self.mu.min(self.nu())
    }
}
