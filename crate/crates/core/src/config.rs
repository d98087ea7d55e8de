//! Material, geometry and frequency parameters of one scattering run.

use crate::special::{MAX_ORDER, ORDER_SAFETY};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConfig {
    /// Lame constant lambda.
    pub lambda: f64,
    /// Lame constant mu (shear modulus).
    pub mu: f64,
    /// Solid density.
    pub rho: f64,
    /// Fluid density.
    pub rho_f: f64,
    pub omega: f64,
    /// Fluid wave number.
    pub k: f64,
    /// Radius of the elastic disc.
    pub r0: f64,
    /// Radius of the artificial boundary.
    pub r: f64,
    /// DtN truncation order.
    pub n_trunc: usize,
    /// Incident direction (unit vector).
    pub direction: [f64; 2],
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self::reference(1.0)
    }
}

impl PhysicalConfig {
    /// Unit materials and frequency, `R0 = 1`, `R = 2`, `N = 20`, incidence
    /// along +x, at wave number `k`.
    pub fn reference(k: f64) -> Self {
        Self {
            lambda: 1.0,
            mu: 1.0,
            rho: 1.0,
            rho_f: 1.0,
            omega: 1.0,
            k,
            r0: 1.0,
            r: 2.0,
            n_trunc: 20,
            direction: [1.0, 0.0],
        }
    }

    pub fn with_truncation(mut self, n: usize) -> Self {
        self.n_trunc = n;
        self
    }

    /// Compressional wave number `omega sqrt(rho / (lambda + 2 mu))`.
    pub fn k_p(&self) -> f64 {
        self.omega * (self.rho / (self.lambda + 2.0 * self.mu)).sqrt()
    }

    /// Shear wave number `omega sqrt(rho / mu)`.
    pub fn k_s(&self) -> f64 {
        self.omega * (self.rho / self.mu).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let positive = [
            ("mu", self.mu),
            ("rho", self.rho),
            ("rho_f", self.rho_f),
            ("omega", self.omega),
            ("k", self.k),
            ("R0", self.r0),
            ("R", self.r),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.lambda + self.mu > 0.0) || !self.lambda.is_finite() {
            return bad(format!(
                "lambda + mu must be positive, got {}",
                self.lambda + self.mu
            ));
        }
        if self.r <= self.r0 {
            return Err(Error::Radii { inner: self.r0, outer: self.r });
        }
        let d = self.direction[0].hypot(self.direction[1]);
        if (d - 1.0).abs() > 1e-12 {
            return bad(format!("incident direction must be a unit vector, |d| = {d}"));
        }
        if 2 * self.n_trunc + ORDER_SAFETY > MAX_ORDER {
            return bad(format!("truncation order {} is too large", self.n_trunc));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_numbers() {
        let c = PhysicalConfig::reference(1.0);
        assert!((c.k_p() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.k_s(), 1.0);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_materials() {
        let mut c = PhysicalConfig::reference(1.0);
        c.lambda = -1.5;
        assert!(c.validate().is_err());
        let mut c = PhysicalConfig::reference(1.0);
        c.mu = 0.0;
        assert!(c.validate().is_err());
        let mut c = PhysicalConfig::reference(1.0);
        c.direction = [1.0, 1.0];
        assert!(c.validate().is_err());
        let mut c = PhysicalConfig::reference(1.0);
        c.r = 0.5;
        assert!(matches!(c.validate(), Err(Error::Radii { .. })));
    }
}
