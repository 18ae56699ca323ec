//! Radial kernels supported in the unit ball.
//!
//! Every profile has the form `K(u) = c_{k,d} (1 − ‖u‖²)^k` on `‖u‖ < 1`, with
//! `k = 1` (Epanechnikov), `k = 2` (biweight) or `k = 0` (uniform). The
//! normalising constant has the closed form
//!
//! ```text
//! c_{k,d} = Γ(k + 1 + d/2) / (π^{d/2} Γ(k + 1))
//! ```
//!
//! obtained from the Beta integral `∫_B (1 − ‖u‖²)^k du = π^{d/2} B(k + 1, d/2) / Γ(d/2)`.
//! The uniform profile is discontinuous at the boundary and therefore not
//! Hölder continuous; it is kept for comparisons only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelProfile {
    #[default]
    EpanechnikovBall,
    BiweightBall,
    UniformBall,
}

impl KernelProfile {
    fn exponent(self) -> i32 {
        match self {
            KernelProfile::UniformBall => 0,
            KernelProfile::EpanechnikovBall => 1,
            KernelProfile::BiweightBall => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelProfile::EpanechnikovBall => "epanechnikov",
            KernelProfile::BiweightBall => "biweight",
            KernelProfile::UniformBall => "uniform",
        }
    }
}

impl fmt::Display for KernelProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" | "epanechnikov_ball" => Ok(KernelProfile::EpanechnikovBall),
            "biweight" | "biweight_ball" | "quartic" => Ok(KernelProfile::BiweightBall),
            "uniform" | "uniform_ball" => Ok(KernelProfile::UniformBall),
            other => Err(Error::config(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    profile: KernelProfile,
    dim: usize,
    norm: f64,
}

impl KernelSpec {
    pub fn new(profile: KernelProfile, dim: usize) -> Self {
        assert!(dim >= 1, "kernel dimension must be positive");
        let k = profile.exponent() as f64;
        let half_d = dim as f64 / 2.0;
        let ln_norm = ln_gamma(k + 1.0 + half_d)
            - half_d * std::f64::consts::PI.ln()
            - ln_gamma(k + 1.0);
        KernelSpec { profile, dim, norm: ln_norm.exp() }
    }

    pub fn epanechnikov(dim: usize) -> Self {
        KernelSpec::new(KernelProfile::EpanechnikovBall, dim)
    }

    pub fn profile(&self) -> KernelProfile {
        self.profile
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Value at the origin.
    pub fn peak(&self) -> f64 {
        self.norm
    }

    /// `K` as a function of `‖u‖²`.
    #[inline]
    pub fn eval_sq_norm(&self, r2: f64) -> f64 {
        if r2 >= 1.0 {
            return 0.0;
        }
        let base = 1.0 - r2;
        match self.profile {
            KernelProfile::UniformBall => self.norm,
            KernelProfile::EpanechnikovBall => self.norm * base,
            KernelProfile::BiweightBall => self.norm * base * base,
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        self.eval_sq_norm(u.iter().map(|v| v * v).sum())
    }

    /// `K_h(x − xi) = h^{−d} K((x − xi)/h)`.
    pub fn eval_scaled(&self, x: &[f64], xi: &[f64], h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::domain(format!("bandwidth must be positive, got {h}")));
        }
        let r2: f64 = x.iter().zip(xi).map(|(a, b)| ((a - b) / h).powi(2)).sum();
        Ok(self.eval_sq_norm(r2) / h.powi(self.dim as i32))
    }

    /// Lipschitz constant on `R^d`; `None` for the discontinuous uniform profile.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        match self.profile {
            KernelProfile::UniformBall => None,
            // |∇ c(1 − r²)| = 2cr ≤ 2c
            KernelProfile::EpanechnikovBall => Some(2.0 * self.norm),
            // |∇ c(1 − r²)²| = 4cr(1 − r²), maximal at r = 1/√3
            KernelProfile::BiweightBall => Some(8.0 * self.norm / (3.0 * 3f64.sqrt())),
        }
    }

    pub fn is_holder_continuous(&self) -> bool {
        self.lipschitz_constant().is_some()
    }
}
