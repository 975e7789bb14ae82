//! Exact solution for a spatially homogeneous field `φ(t, x) = −E(t) x`.
//!
//! A gauge phase removes the potential, a second phase removes the A²
//! term, and a shift by the classical displacement s(t) leaves free
//! evolution. The density is therefore the free density moved by s(t).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lg_core::{psi_free, PacketParams, SpacetimePoint, HBAR};

/// Time profile of the field E(t) along x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum HomogeneousField {
    Constant {
        #[serde(rename = "E0")]
        e0: f64,
    },
    /// E₀ sin(ωt).
    Sinusoid {
        #[serde(rename = "E0")]
        e0: f64,
        omega: f64,
    },
    /// Piecewise-linear samples; zero outside the sampled range.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl HomogeneousField {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { e0 } if e0.is_finite() => Ok(()),
            Self::Sinusoid { e0, omega } if e0.is_finite() && omega.is_finite() && *omega != 0.0 => Ok(()),
            Self::Tabulated { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(Error::InvalidParameter(
                        "tabulated field needs at least two (time, value) pairs of equal length".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] >= 0.0) {
                    return Err(Error::InvalidParameter(
                        "tabulated field times must be >= 0 and strictly increasing".into(),
                    ));
                }
                if values.iter().chain(times).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("tabulated field must be finite".into()));
                }
                Ok(())
            }
            _ => Err(Error::InvalidParameter(format!("invalid homogeneous field {self:?}"))),
        }
    }

    pub fn field(&self, t: f64) -> f64 {
        match self {
            Self::Constant { e0 } => *e0,
            Self::Sinusoid { e0, omega } => e0 * (omega * t).sin(),
            Self::Tabulated { times, values } => {
                if t < times[0] || t > times[times.len() - 1] {
                    return 0.0;
                }
                let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[k - 1], times[k]);
                let w = (t - t0) / (t1 - t0);
                values[k - 1] * (1.0 - w) + values[k] * w
            }
        }
    }

    /// A(t) = −∫₀ᵗ E(t′) dt′. Exact for every profile.
    pub fn vector_potential(&self, t: f64) -> f64 {
        match self {
            Self::Constant { e0 } => -e0 * t,
            Self::Sinusoid { e0, omega } => e0 / omega * ((omega * t).cos() - 1.0),
            Self::Tabulated { times, values } => {
                // Trapezoids are exact for piecewise-linear E.
                let mut acc = 0.0;
                for k in 1..times.len() {
                    let (t0, t1) = (times[k - 1], times[k]);
                    if t <= t0 {
                        break;
                    }
                    let end = t.min(t1);
                    acc += 0.5 * (values[k - 1] + self.field(end)) * (end - t0);
                }
                -acc
            }
        }
    }

    /// (∫₀ᵗ A, ∫₀ᵗ A²) for a table. A is quadratic on each segment, so a
    /// three-point Gauss rule per segment is exact for both.
    fn tabulated_integrals(times: &[f64], values: &[f64], t: f64) -> (f64, f64) {
        const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let (mut int_a, mut int_a2) = (0.0, 0.0);
        let mut a_start = 0.0;
        for k in 1..times.len() {
            let t0 = times[k - 1];
            if t <= t0 {
                break;
            }
            let end = t.min(times[k]);
            let slope = (values[k] - values[k - 1]) / (times[k] - t0);
            let a_at = |s: f64| a_start - (values[k - 1] * (s - t0) + 0.5 * slope * (s - t0).powi(2));
            let (mid, half) = (0.5 * (t0 + end), 0.5 * (end - t0));
            for (x, w) in NODES.iter().zip(WEIGHTS) {
                let a = a_at(mid + half * x);
                int_a += w * half * a;
                int_a2 += w * half * a * a;
            }
            a_start = a_at(end);
        }
        (int_a, int_a2)
    }

    /// ∫₀ᵗ A(t′) dt′.
    fn potential_integral(&self, t: f64) -> f64 {
        match self {
            Self::Constant { e0 } => -0.5 * e0 * t * t,
            Self::Sinusoid { e0, omega } => e0 / omega * ((omega * t).sin() / omega - t),
            Self::Tabulated { times, values } => Self::tabulated_integrals(times, values, t).0,
        }
    }

    /// ∫₀ᵗ A²(t′) dt′.
    pub fn potential_square_integral(&self, t: f64) -> f64 {
        match self {
            Self::Constant { e0 } => e0 * e0 * t * t * t / 3.0,
            Self::Sinusoid { e0, omega } => {
                let (w, k) = (*omega, e0 / omega);
                k * k * (1.5 * t - 2.0 * (w * t).sin() / w + (2.0 * w * t).sin() / (4.0 * w))
            }
            Self::Tabulated { times, values } => Self::tabulated_integrals(times, values, t).1,
        }
    }

    /// Classical displacement s(t) = −(e/m) ∫₀ᵗ A(t′) dt′.
    pub fn displacement(&self, t: f64, params: &PacketParams) -> f64 {
        -params.charge / params.mass * self.potential_integral(t)
    }
}

/// The three factors of the exact solution, kept apart for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeChain {
    /// e^{−ieA(t)x/ħ}
    pub gauge: Complex64,
    /// exp[−(ie²/(2mħ)) ∫₀ᵗ A²]
    pub square: Complex64,
    /// Ψ⁽⁰⁾(t, x − s(t), y, z)
    pub shifted: Complex64,
    pub displacement: f64,
}

impl GaugeChain {
    pub fn value(&self) -> Complex64 {
        self.gauge * self.square * self.shifted
    }
}

pub fn gauge_chain(pt: &SpacetimePoint, params: &PacketParams, field: &HomogeneousField) -> Result<GaugeChain> {
    field.validate()?;
    if !(pt.t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {}", pt.t)));
    }
    let e = params.charge;
    let a = field.vector_potential(pt.t);
    let s = field.displacement(pt.t, params);
    let a2 = field.potential_square_integral(pt.t);
    let shifted_pt = SpacetimePoint::new(pt.t, pt.x - s, pt.y, pt.z);
    Ok(GaugeChain {
        gauge: Complex64::from_polar(1.0, -e * a * pt.x / HBAR),
        square: Complex64::from_polar(1.0, -e * e * a2 / (2.0 * params.mass * HBAR)),
        shifted: psi_free(&shifted_pt, params),
        displacement: s,
    })
}

/// Ψ(t, r) in the homogeneous field, to all orders.
pub fn psi_homogeneous(pt: &SpacetimePoint, params: &PacketParams, field: &HomogeneousField) -> Result<Complex64> {
    Ok(gauge_chain(pt, params, field)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lg_core::psi0;

    #[test]
    fn zero_field_has_no_potential_or_shift() {
        let f = HomogeneousField::Constant { e0: 0.0 };
        let p = PacketParams::figure(1);
        assert_eq!(f.vector_potential(10.0), 0.0);
        assert_eq!(f.displacement(10.0, &p), 0.0);
    }

    #[test]
    fn constant_field_closed_forms() {
        let (e0, t) = (1e-4, 100.0);
        let f = HomogeneousField::Constant { e0 };
        let p = PacketParams::figure(1);
        assert_eq!(f.vector_potential(t), -e0 * t);
        let s = f.displacement(t, &p);
        assert!((s - p.charge * e0 * t * t / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sinusoid_closed_forms_match_quadrature() {
        let (e0, w, t) = (2e-4, 0.03, 170.0);
        let f = HomogeneousField::Sinusoid { e0, omega: w };
        let as_table = {
            let times: Vec<f64> = (0..=20000).map(|k| k as f64 * t / 20000.0).collect();
            let values = times.iter().map(|&s| f.field(s)).collect();
            HomogeneousField::Tabulated { times, values }
        };
        let p = PacketParams::figure(2);
        assert!((f.vector_potential(t) - (e0 / w) * ((w * t).cos() - 1.0)).abs() < 1e-15);
        let expected_s = -(p.charge / p.mass) * (e0 / w) * ((w * t).sin() / w - t);
        assert!((f.displacement(t, &p) - expected_s).abs() < 1e-12 * expected_s.abs());
        // Piecewise-linear sampling is second-order accurate.
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(as_table.vector_potential(t), f.vector_potential(t)) < 1e-7);
        assert!(rel(as_table.displacement(t, &p), expected_s) < 1e-7);
        let a2 = f.potential_square_integral(t);
        assert!(rel(as_table.potential_square_integral(t), a2) < 1e-7);
    }

    #[test]
    fn initial_state_is_unchanged() {
        let f = HomogeneousField::Sinusoid { e0: 1e-3, omega: 0.2 };
        let p = PacketParams::figure(3);
        let pt = SpacetimePoint::new(0.0, 30.0, -12.0, 4.0);
        let v = psi_homogeneous(&pt, &p, &f).unwrap();
        let reference = psi0(&pt, &p);
        assert!((v - reference).norm() <= 1e-14 * reference.norm());
    }

    #[test]
    fn rejects_bad_tables() {
        let bad = HomogeneousField::Tabulated {
            times: vec![0.0, 1.0, 1.0],
            values: vec![0.0, 1.0, 2.0],
        };
        assert!(bad.validate().is_err());
        let short = HomogeneousField::Tabulated {
            times: vec![0.0],
            values: vec![1.0],
        };
        assert!(short.validate().is_err());
    }
}
