//! The unperturbed Laguerre–Gaussian packet (radial index 0).
//!
//! Atomic units throughout: ħ = 1, lengths in bohr, times in ħ/E_h. The
//! electron mass and charge are carried in [`PacketParams`] with defaults
//! `m = 1`, `e = −1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, QuadratureConfig};

/// Reduced Planck constant in atomic units.
pub const HBAR: f64 = 1.0;

/// Hartree energy in eV.
pub const HARTREE_EV: f64 = 27.211_386;

/// Atomic unit of electric field in V/m.
pub const FIELD_AU_V_PER_M: f64 = 5.142_206_75e11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketParams {
    /// Momentum-space width σ (inverse length).
    pub sigma: f64,
    /// Central longitudinal momentum p̄.
    pub pbar: f64,
    /// Orbital angular momentum projection, l ≥ 1.
    pub l: u32,
    pub mass: f64,
    pub charge: f64,
}

impl PacketParams {
    pub fn new(sigma: f64, pbar: f64, l: u32) -> Result<Self> {
        let p = Self {
            sigma,
            pbar,
            l,
            mass: 1.0,
            charge: -1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Packet whose kinetic energy p̄²/2m equals `energy_kev`.
    pub fn from_energy_kev(sigma: f64, energy_kev: f64, l: u32) -> Result<Self> {
        if !(energy_kev >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "energy must be non-negative, got {energy_kev} keV"
            )));
        }
        Self::new(sigma, pbar_from_energy_kev(energy_kev, 1.0), l)
    }

    /// The packet used for every figure: σ = 0.02 a.u., 2 keV.
    pub fn figure(l: u32) -> Self {
        Self::from_energy_kev(0.02, 2.0, l).expect("valid constants")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.l < 1 || self.l > 64 {
            return Err(Error::InvalidParameter(format!("l must lie in 1..=64, got {}", self.l)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {}", self.mass)));
        }
        if !self.pbar.is_finite() || !self.charge.is_finite() {
            return Err(Error::InvalidParameter("pbar and charge must be finite".into()));
        }
        Ok(())
    }

    /// t_d = m/(σ²ħ).
    pub fn diffraction_time(&self) -> f64 {
        self.mass / (self.sigma * self.sigma * HBAR)
    }

    /// σ_⊥(t) = (1/σ)·√(1 + t²/t_d²).
    pub fn width(&self, t: f64) -> f64 {
        let r = t / self.diffraction_time();
        (1.0 + r * r).sqrt() / self.sigma
    }

    /// Longitudinal centre p̄t/m of the packet.
    pub fn center_z(&self, t: f64) -> f64 {
        self.pbar * t / self.mass
    }

    pub fn energy_hartree(&self) -> f64 {
        self.pbar * self.pbar / (2.0 * self.mass)
    }

    /// ln √(l!).
    pub(crate) fn ln_sqrt_factorial(&self) -> f64 {
        0.5 * (2..=self.l).map(|k| f64::from(k).ln()).sum::<f64>()
    }
}

pub fn pbar_from_energy_kev(energy_kev: f64, mass: f64) -> f64 {
    (2.0 * mass * energy_kev * 1e3 / HARTREE_EV).sqrt()
}

pub fn field_au_from_v_per_m(field: f64) -> f64 {
    field / FIELD_AU_V_PER_M
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { t, x, y, z }
    }

    pub fn from_polar(t: f64, rho: f64, phi: f64, z: f64) -> Self {
        Self::new(t, rho * phi.cos(), rho * phi.sin(), z)
    }

    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Azimuth in (−π, π].
    pub fn phi(&self) -> f64 {
        let p = self.y.atan2(self.x);
        if p == -PI {
            PI
        } else {
            p
        }
    }

    pub(crate) fn transverse(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// Initial packet Ψ₀(r) at t = 0 (the `t` field of `pt` is ignored).
pub fn psi0(pt: &SpacetimePoint, params: &PacketParams) -> Complex64 {
    let s = params.sigma;
    let norm = (1.5 * s.ln() - 0.75 * PI.ln() - params.ln_sqrt_factorial()).exp();
    let vortex = (pt.transverse() * s).powi(params.l as i32);
    let r2 = pt.z * pt.z + pt.x * pt.x + pt.y * pt.y;
    let envelope = (-0.5 * s * s * r2).exp();
    vortex * Complex64::from_polar(norm * envelope, params.pbar * pt.z / HBAR)
}

/// Momentum representation Φ₀(p) = ∫ dr e^{−ipr/ħ} Ψ₀(r).
pub fn phi0(p: [f64; 3], params: &PacketParams) -> Complex64 {
    let s = params.sigma;
    let [px, py, pz] = p;
    let width = s * HBAR;
    let ln_norm = 1.5 * 2f64.ln() + 0.75 * PI.ln() - params.ln_sqrt_factorial() - 1.5 * s.ln();
    let dz = pz - params.pbar;
    let gauss = -(dz * dz + px * px + py * py) / (2.0 * width * width);
    let vortex = (Complex64::new(px, py) / width).powi(params.l as i32);
    let minus_i_pow = Complex64::new(0.0, -1.0).powi(params.l as i32);
    minus_i_pow * vortex * (ln_norm + gauss).exp()
}

/// Freely spreading packet Ψ⁽⁰⁾(t, r).
pub fn psi_free(pt: &SpacetimePoint, params: &PacketParams) -> Complex64 {
    let l = f64::from(params.l);
    let td = params.diffraction_time();
    let ratio = pt.t / td;
    let w = params.width(pt.t);
    let dz = pt.z - params.center_z(pt.t);
    let r2 = pt.x * pt.x + pt.y * pt.y + dz * dz;

    let ln_mag = -0.75 * PI.ln() - params.ln_sqrt_factorial() - 1.5 * w.ln() - r2 / (2.0 * w * w);
    let phase = params.pbar * pt.z / HBAR
        - params.pbar * params.pbar * pt.t / (2.0 * params.mass * HBAR)
        - (l + 1.5) * ratio.atan()
        + ratio * r2 / (2.0 * w * w);
    let vortex = (pt.transverse() / w).powi(params.l as i32);
    vortex * Complex64::from_polar(ln_mag.exp(), phase)
}

/// Longitudinal factor Q(t, z), defined through
/// `∫ dp_z/(2πħ) e^{ip_z z/ħ} e^{−ip_z² t/(2mħ)} e^{−(p_z−p̄)²/(2σ²ħ²)} = (σ/√(2π)) Q(t, z)`.
pub fn q_factor(t: f64, z: f64, params: &PacketParams) -> Complex64 {
    let td = params.diffraction_time();
    let ratio = t / td;
    let w = params.width(t);
    let dz = z - params.center_z(t);
    let mag = (params.sigma * w).powf(-0.5) * (-dz * dz / (2.0 * w * w)).exp();
    let phase = params.pbar * z / HBAR - params.pbar * params.pbar * t / (2.0 * params.mass * HBAR)
        - 0.5 * ratio.atan()
        + ratio * dz * dz / (2.0 * w * w);
    Complex64::from_polar(mag, phase)
}

/// Direct quadrature of the p_z integral that defines [`q_factor`], returned
/// already multiplied by √(2π)/σ. Used as an oracle.
pub fn q_factor_by_quadrature(
    t: f64,
    z: f64,
    params: &PacketParams,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let s = params.sigma * HBAR;
    let m = params.mass;
    let pbar = params.pbar;
    // p_z = p̄ + q; the large carrier phase p̄z − p̄²t/2m is factored out exactly.
    let carrier = Complex64::from_polar(1.0, pbar * z / HBAR - pbar * pbar * t / (2.0 * m * HBAR));
    let shift = z - pbar * t / m;
    let integrand = |q: f64| {
        let phase = q * shift / HBAR - q * q * t / (2.0 * m * HBAR);
        Complex64::from_polar((-q * q / (2.0 * s * s)).exp(), phase)
    };
    let half = 12.0 * s;
    let est = integrate_adaptive(integrand, -half, half, cfg)?;
    Ok(carrier * est.value / (2.0 * PI * HBAR) * (2.0 * PI).sqrt() / params.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure3() -> PacketParams {
        PacketParams::figure(3)
    }

    #[test]
    fn energy_conversion() {
        let p = PacketParams::figure(1);
        assert!((p.pbar - 12.1243).abs() < 1e-4, "{}", p.pbar);
        assert!((p.diffraction_time() - 2500.0).abs() < 1e-9);
        assert!((p.width(3500.0) - 86.023).abs() < 1e-3);
    }

    #[test]
    fn field_conversion() {
        assert!((field_au_from_v_per_m(1e7) - 1.9447e-5).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(PacketParams::new(0.0, 1.0, 1).is_err());
        assert!(PacketParams::new(0.1, 1.0, 0).is_err());
        assert!(PacketParams::new(f64::NAN, 1.0, 1).is_err());
    }

    #[test]
    fn psi0_vanishes_on_axis() {
        let p = PacketParams::figure(1);
        for z in [-30.0, 0.0, 12.0] {
            assert_eq!(psi0(&SpacetimePoint::new(0.0, 0.0, 0.0, z), &p), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn psi0_azimuthal_phase() {
        let p = figure3();
        let a = psi0(&SpacetimePoint::from_polar(0.0, 40.0, 0.3, 5.0), &p);
        let b = psi0(&SpacetimePoint::from_polar(0.0, 40.0, 1.0, 5.0), &p);
        let expected = a * Complex64::from_polar(1.0, 3.0 * 0.7);
        assert!((b - expected).norm() < 1e-13 * a.norm());
    }

    #[test]
    fn phi0_vanishes_on_axis() {
        let p = PacketParams::figure(2);
        assert_eq!(phi0([0.0, 0.0, p.pbar], &p), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn psi_free_reduces_to_psi0() {
        let p = figure3();
        for &(x, y, z) in &[(10.0, -3.0, 2.0), (80.0, 55.0, -40.0), (-120.0, 7.0, 90.0)] {
            let a = psi0(&SpacetimePoint::new(0.0, x, y, z), &p);
            let b = psi_free(&SpacetimePoint::new(0.0, x, y, z), &p);
            assert!((a - b).norm() <= 1e-14 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn radial_maximum_sits_at_sqrt_l_width() {
        let p = figure3();
        let t = 3500.0;
        let z = p.center_z(t);
        let density = |rho: f64| psi_free(&SpacetimePoint::new(t, rho, 0.0, z), &p).norm_sqr();
        // golden-section search on [100, 200]
        let (mut a, mut b) = (100.0, 200.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..100 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if density(c) > density(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let rho_max = 0.5 * (a + b);
        assert!((rho_max - 148.99).abs() < 0.01, "{rho_max}");
    }

    #[test]
    fn q_factor_peaks_at_packet_centre() {
        let p = PacketParams::figure(1);
        let t = 3500.0;
        let c = p.center_z(t);
        let at = q_factor(t, c, &p).norm();
        for dz in [-5.0, -0.5, 0.5, 5.0] {
            assert!(q_factor(t, c + dz, &p).norm() < at);
        }
    }

    #[test]
    fn q_factor_matches_its_defining_integral() {
        let p = PacketParams::figure(1);
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
        for &(t, z) in &[(0.0, 0.0), (0.0, 31.0), (3500.0, 42424.0), (1200.0, 14500.0)] {
            let a = q_factor(t, z, &p);
            let b = q_factor_by_quadrature(t, z, &p, &cfg).unwrap();
            assert!((a - b).norm() <= 1e-10 * a.norm(), "t={t} z={z}: {a} vs {b}");
        }
    }
}
