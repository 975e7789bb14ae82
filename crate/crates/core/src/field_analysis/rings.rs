use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lg_core::SpacetimePoint;
use crate::model::{Component, Model};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingMaximum {
    pub phi: f64,
    pub rho: f64,
    pub density: f64,
}

/// Radius and value of the density maximum along the ray at azimuth phi,
/// searched over [0.2, 3]σ_⊥ with a coarse scan and golden-section refinement.
fn ridge(model: &Model, t: f64, z: f64, which: Component, phi: f64) -> Result<(f64, f64)> {
    let w = model.params.width(t);
    let density = |rho: f64| -> Result<f64> {
        Ok(model.evaluate(&SpacetimePoint::from_polar(t, rho, phi, z), which)?.norm_sqr())
    };
    let (lo, hi, n) = (0.2 * w, 3.0 * w, 56);
    let step = (hi - lo) / n as f64;
    let mut best = (lo, density(lo)?);
    for k in 1..=n {
        let r = lo + k as f64 * step;
        let d = density(r)?;
        if d > best.1 {
            best = (r, d);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (density(c)?, density(d)?);
    while b - a > 1e-6 * w {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = density(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = density(d)?;
        }
    }
    let rho = 0.5 * (a + b);
    Ok((rho, density(rho)?))
}

/// Local maxima of the ring's azimuthal density profile (the ridge value
/// at each of `n_phi` azimuths) that exceed half the largest ridge value.
/// Sorted by azimuth in [0, 2π).
pub fn ring_maxima(model: &Model, t: f64, z: f64, which: Component, n_phi: usize) -> Result<Vec<RingMaximum>> {
    let profile: Vec<Result<(f64, f64)>> = (0..n_phi)
        .into_par_iter()
        .map(|k| ridge(model, t, z, which, 2.0 * PI * k as f64 / n_phi as f64))
        .collect();
    let profile = profile.into_iter().collect::<Result<Vec<_>>>()?;
    let top = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut out = Vec::new();
    for k in 0..n_phi {
        let prev = profile[(k + n_phi - 1) % n_phi].1;
        let next = profile[(k + 1) % n_phi].1;
        let (rho, d) = profile[k];
        if d > prev && d >= next && d > 0.5 * top {
            out.push(RingMaximum {
                phi: 2.0 * PI * k as f64 / n_phi as f64,
                rho,
                density: d,
            });
        }
    }
    Ok(out)
}
