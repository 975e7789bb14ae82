//! Quadrature engines shared by every physics module.
//!
//! All integrands are complex valued. The adaptive engine is a globally
//! adaptive 21-point Gauss–Kronrod scheme with bisection; on top of it sit
//! the principal-value kernel used by the transverse-field correction and
//! the oscillatory Fresnel tail used by the point-source correction.

mod fresnel;
mod kronrod;
mod multi;
mod pv;

pub use fresnel::integrate_fresnel_tail;
pub use kronrod::{integrate_adaptive, integrate_adaptive_with_breaks};
pub use multi::{integrate_adaptive_multi, MultiEstimate};
pub use pv::{cos_ratio, integrate_pv_kernel, integrate_pv_kernel_multi, integrate_pv_kernel_multi_noisy, pv_weight, sinc, PvEstimate, PvMultiEstimate};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Kronrod error estimates never drop below 50ε·∫|f|; asking for less
/// than this cannot succeed.
const ROUNDOFF_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Tolerances and truncation parameters for every numerical integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Symmetric truncation of the principal-value integral, |ξ| ≤ xi_cutoff.
    pub xi_cutoff: f64,
    /// Value of c·u beyond which the Fresnel tail switches to asymptotics.
    pub tail_switch_u: f64,
    /// Half-width around removable singular points where limits replace
    /// direct evaluation.
    pub singularity_guard_delta: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_subdivisions: 4000,
            xi_cutoff: 60.0,
            tail_switch_u: 1e3,
            singularity_guard_delta: 1e-4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), QuadError> {
        let bad = |what: &str| Err(QuadError::InvalidConfig(what.to_string()));
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol must be > 0");
        }
        if !(self.abs_tol >= 0.0) {
            return bad("abs_tol must be >= 0");
        }
        if self.max_subdivisions < 1 {
            return bad("max_subdivisions must be >= 1");
        }
        if !(self.singularity_guard_delta > 0.0) {
            return bad("singularity_guard_delta must be > 0");
        }
        if !(self.xi_cutoff > std::f64::consts::FRAC_PI_2 + self.singularity_guard_delta) {
            return bad("xi_cutoff must exceed pi/2 + singularity_guard_delta");
        }
        if !(self.tail_switch_u > 0.0) {
            return bad("tail_switch_u must be > 0");
        }
        Ok(())
    }

    /// Same configuration with a different relative tolerance.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub(crate) fn tolerance(&self, value: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

/// An integral value together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub abs_error: f64,
    pub evaluations: usize,
}

impl Estimate {
    pub fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            abs_error: 0.0,
            evaluations: 0,
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            abs_error: self.abs_error + rhs.abs_error,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: best estimate {estimate}, error {abs_error:.3e} (tolerance {tolerance:.3e})")]
    NonConvergence {
        estimate: Complex64,
        abs_error: f64,
        tolerance: f64,
    },
    #[error("oscillation constant must be positive, got {0}")]
    InvalidPhase(f64),
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
}
