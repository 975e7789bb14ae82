//! First-order correction for a point source `φ(r) = λ δ(r − r₀)`.
//!
//! The correction is the single time integral
//! `Ψ⁽¹⁾(t, r) = −(ieλ/ħ) ∫₀ᵗ dt′ G(t − t′, r − r₀) S(t′)` with the source
//! amplitude `S(t′)` sampled at r₀. The part of the integral next to
//! `t′ = t`, where G oscillates without bound, is mapped to a Fresnel tail
//! by `u = 1/(t − t′)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lg_core::{psi_free, PacketParams, SpacetimePoint, HBAR};
use crate::numerics::{
    integrate_adaptive, integrate_adaptive_with_breaks, integrate_fresnel_tail, Estimate, QuadratureConfig,
};

/// Points closer than this to r₀ are refused.
pub const SOURCE_GUARD: f64 = 1e-3;

/// How the source amplitude S(t′) is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaNormalization {
    /// S(t′) = Ψ⁽⁰⁾(t′, r₀).
    #[default]
    Physical,
    /// S(t′) = σ_⊥(t′)^{l+3/2} Ψ⁽⁰⁾(t′, r₀), the closed form without the
    /// source-width factor; the figure coupling constants refer to this form.
    Unscaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaPerturbation {
    /// Coupling λ (Hartree·a₀³).
    pub lambda: f64,
    /// Cylindrical radius of r₀; the source sits at azimuth 0.
    pub rho0: f64,
    pub z0: f64,
    #[serde(default)]
    pub normalization: DeltaNormalization,
}

impl DeltaPerturbation {
    pub fn new(lambda: f64, rho0: f64, z0: f64) -> Result<Self> {
        let p = Self {
            lambda,
            rho0,
            z0,
            normalization: DeltaNormalization::Physical,
        };
        p.validate()?;
        Ok(p)
    }

    /// Coupling used in the reference density plots for a given l, with
    /// ρ₀ = 10, z₀ = 0 and the matching normalization.
    pub fn figure(l: u32) -> Option<Self> {
        let lambda = match l {
            1 => 30.0,
            2 => 3.0,
            3 => 0.2,
            4 => 0.045,
            5 => 0.007,
            6 => 0.002,
            7 => 2e-4,
            8 => 4e-5,
            _ => return None,
        };
        Some(Self {
            lambda,
            rho0: 10.0,
            z0: 0.0,
            normalization: DeltaNormalization::Unscaled,
        })
    }

    pub fn with_normalization(mut self, normalization: DeltaNormalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 >= 0.0 && self.rho0.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho0 must be >= 0, got {}", self.rho0)));
        }
        if !self.lambda.is_finite() || !self.z0.is_finite() {
            return Err(Error::InvalidParameter("lambda and z0 must be finite".into()));
        }
        Ok(())
    }

    fn source_point(&self, t: f64) -> SpacetimePoint {
        SpacetimePoint::new(t, self.rho0, 0.0, self.z0)
    }

    fn source(&self, t_prime: f64, params: &PacketParams) -> Complex64 {
        let psi = psi_free(&self.source_point(t_prime), params);
        match self.normalization {
            DeltaNormalization::Physical => psi,
            DeltaNormalization::Unscaled => psi * params.width(t_prime).powf(f64::from(params.l) + 1.5),
        }
    }

    fn distance_sq(&self, pt: &SpacetimePoint) -> f64 {
        let dx = pt.x - self.rho0;
        let dz = pt.z - self.z0;
        dx * dx + pt.y * pt.y + dz * dz
    }
}

/// `−(ieλ/ħ)(m/(2πiħ))^{3/2}`.
fn coupling(params: &PacketParams, pert: &DeltaPerturbation) -> Complex64 {
    let green = (params.mass / (2.0 * PI * HBAR)).powf(1.5) * Complex64::from_polar(1.0, -0.75 * PI);
    Complex64::new(0.0, -params.charge * pert.lambda / HBAR) * green
}

struct Setup {
    c: f64,
    split: f64,
}

fn setup(pt: &SpacetimePoint, params: &PacketParams, pert: &DeltaPerturbation) -> Result<Setup> {
    params.validate()?;
    pert.validate()?;
    if !(pt.t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {}", pt.t)));
    }
    let r2 = pert.distance_sq(pt);
    if r2 < SOURCE_GUARD * SOURCE_GUARD {
        return Err(Error::TooCloseToSource {
            distance: r2.sqrt(),
            guard: SOURCE_GUARD,
        });
    }
    let c = params.mass * r2 / (2.0 * HBAR);
    // Below t − split the integral is taken in t′; above it, in u. The
    // split keeps the source's own phase, which turns at about
    // p̄²/(2mħ) per unit time, nearly frozen across the tail's
    // finite-difference stencil.
    let rate = params.energy_hartree() / HBAR + 1.0;
    let split = (0.5 * pt.t).min(1e-3 / rate);
    Ok(Setup { c, split })
}

/// Ψ⁽¹⁾(t, r) for the point source.
pub fn psi1_delta(
    pt: &SpacetimePoint,
    params: &PacketParams,
    pert: &DeltaPerturbation,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    psi1_delta_detailed(pt, params, pert, cfg).map(|e| e.value)
}

/// [`psi1_delta`] with the combined error estimate of its two integrals.
pub fn psi1_delta_detailed(
    pt: &SpacetimePoint,
    params: &PacketParams,
    pert: &DeltaPerturbation,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let Setup { c, split } = setup(pt, params, pert)?;
    if pert.lambda == 0.0 {
        return Ok(Estimate::zero());
    }
    let t = pt.t;
    let integrand = |tp: f64| {
        let tau = t - tp;
        pert.source(tp, params) * Complex64::from_polar(tau.powf(-1.5), c / tau)
    };
    let body = integrate_adaptive_with_breaks(integrand, &breakpoints(params, pert, t - split), cfg)?;
    let tail = integrate_fresnel_tail(c, 1.0 / split, |u| pert.source(t - 1.0 / u, params), cfg)?;
    let k = coupling(params, pert);
    Ok(Estimate {
        value: k * (body.value + tail.value),
        abs_error: k.norm() * (body.abs_error + tail.abs_error),
        evaluations: body.evaluations + tail.evaluations,
    })
}

// Panel boundaries around the time the packet centre passes z₀, where the
// source amplitude is concentrated.
fn breakpoints(params: &PacketParams, pert: &DeltaPerturbation, end: f64) -> Vec<f64> {
    let speed = params.pbar / params.mass;
    let centre = (pert.z0 / speed).max(0.0);
    let width = params.width(end) / speed;
    let mut pts = vec![0.0, end];
    for k in [-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let p = centre + k * width;
        if p > 0.0 && p < end {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

/// Second evaluation path: plain adaptive quadrature on `[0, t − δ]` with
/// no initial panel hints, plus the leading integration-by-parts term for
/// `[t − δ, t)`. Used to cross-check [`psi1_delta`].
pub fn psi1_delta_reference(
    pt: &SpacetimePoint,
    params: &PacketParams,
    pert: &DeltaPerturbation,
    cfg: &QuadratureConfig,
    delta: f64,
) -> Result<Complex64> {
    let Setup { c, .. } = setup(pt, params, pert)?;
    if !(delta > 0.0 && delta < pt.t) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, t), got {delta}")));
    }
    let t = pt.t;
    let integrand = |tp: f64| {
        let tau = t - tp;
        pert.source(tp, params) * Complex64::from_polar(tau.powf(-1.5), c / tau)
    };
    let body = integrate_adaptive(integrand, 0.0, t - delta, cfg)?;
    // ∫_U^∞ u^{−1/2} e^{icu} s(u) du ≈ i U^{−1/2} e^{icU} s(U)/c
    let upper = 1.0 / delta;
    let endpoint =
        Complex64::new(0.0, 1.0) * pert.source(t - delta, params) * Complex64::from_polar(upper.powf(-0.5) / c, c * upper);
    Ok(coupling(params, pert) * (body.value + endpoint))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_point(params: &PacketParams, phi: f64) -> SpacetimePoint {
        let t = 3500.0;
        SpacetimePoint::from_polar(t, params.width(t), phi, params.center_z(t))
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let p = PacketParams::figure(1);
        let pert = DeltaPerturbation::new(0.0, 10.0, 0.0).unwrap();
        let v = psi1_delta(&ring_point(&p, 0.3), &p, &pert, &QuadratureConfig::default()).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn refuses_points_at_the_source() {
        let p = PacketParams::figure(1);
        let pert = DeltaPerturbation::new(1.0, 10.0, 5.0).unwrap();
        let pt = SpacetimePoint::new(100.0, 10.0, 0.0, 5.0 + 1e-4);
        assert!(matches!(
            psi1_delta(&pt, &p, &pert, &QuadratureConfig::default()),
            Err(Error::TooCloseToSource { .. })
        ));
    }

    #[test]
    fn figure_couplings() {
        let got: Vec<f64> = (1..=8).map(|l| DeltaPerturbation::figure(l).unwrap().lambda).collect();
        assert_eq!(got, vec![30.0, 3.0, 0.2, 0.045, 0.007, 0.002, 2e-4, 4e-5]);
        assert!(DeltaPerturbation::figure(9).is_none());
    }

    #[test]
    fn normalizations_differ_by_width_power_only_at_fixed_time() {
        let p = PacketParams::figure(2);
        let phys = DeltaPerturbation::new(1.0, 10.0, 0.0).unwrap();
        let unscaled = phys.with_normalization(DeltaNormalization::Unscaled);
        let tp = 12.0;
        let ratio = unscaled.source(tp, &p) / phys.source(tp, &p);
        assert!((ratio.re - p.width(tp).powf(3.5)).abs() < 1e-12 * ratio.re);
        assert!(ratio.im.abs() < 1e-12 * ratio.re);
    }
}
