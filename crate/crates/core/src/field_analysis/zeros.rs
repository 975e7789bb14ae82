use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FieldMap;
use crate::error::{Error, Result};
use crate::model::{Component, Model};

/// Settings for [`find_zeros`]. Unset lengths take grid-relative defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroSearch {
    /// Zeros closer than this are merged. Default: half a cell diagonal.
    pub dedupe_radius: Option<f64>,
    /// Radius of the charge circle. Default: two cells, capped at 0.45 of
    /// the distance to the nearest other zero.
    pub winding_radius: Option<f64>,
    /// Only cells within this distance of the axis are searched.
    /// Default: 3σ_⊥(t).
    pub search_radius: Option<f64>,
    /// Accepted |Ψ| at a refined zero, relative to the map maximum.
    pub residual_tol: f64,
    pub max_newton_steps: usize,
    pub initial_samples: usize,
    pub max_samples: usize,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        Self {
            dedupe_radius: None,
            winding_radius: None,
            search_radius: None,
            residual_tol: 1e-8,
            max_newton_steps: 200,
            initial_samples: 64,
            max_samples: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub x: f64,
    pub y: f64,
    pub charge: i64,
    /// |Ψ| at the refined position.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSet {
    /// Sorted by (x, y).
    pub zeros: Vec<Zero>,
    pub dedupe_radius: f64,
    pub search_radius: f64,
    pub map_max: f64,
    /// Candidates dropped because Newton stalled.
    pub stalled: usize,
    pub fingerprint: String,
}

impl VortexSet {
    pub fn total_charge(&self) -> i64 {
        self.zeros.iter().map(|z| z.charge).sum()
    }
}

/// Winding of the phase of Ψ along a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub charge: i64,
    /// Unwrapped phase / 2π minus `charge`.
    pub residue: f64,
    pub samples: usize,
    pub min_modulus: f64,
}

/// Point k of an n-gon on the circle. Points k and n − k share their x
/// coordinate bit for bit, so column-based evaluators can reuse work.
fn circle_point(center: [f64; 2], radius: f64, k: usize, n: usize) -> [f64; 2] {
    let (j, sign) = if 2 * k <= n { (k, 1.0) } else { (n - k, -1.0) };
    let theta = 2.0 * PI * j as f64 / n as f64;
    [center[0] + radius * theta.cos(), center[1] + sign * radius * theta.sin()]
}

/// Topological charge of Ψ on the circle of `radius` around `center`.
///
/// `eval` maps a batch of points to amplitudes. The sample count starts at
/// `n_samples` and doubles, up to `max_samples`, until no step of the
/// wrapped phase exceeds π/2.
pub fn winding_number<F>(eval: F, center: [f64; 2], radius: f64, n_samples: usize, max_samples: usize) -> Result<Winding>
where
    F: Fn(&[[f64; 2]]) -> Result<Vec<Complex64>>,
{
    if !(radius > 0.0) || n_samples < 4 {
        return Err(Error::InvalidParameter("winding needs radius > 0 and at least 4 samples".into()));
    }
    let mut n = n_samples;
    let pts: Vec<[f64; 2]> = (0..n).map(|k| circle_point(center, radius, k, n)).collect();
    let mut values = eval(&pts)?;
    loop {
        let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let min = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(min > 1e-10 * max) {
            return Err(Error::ZeroOnContour { min_modulus: min });
        }
        let steps: Vec<f64> = (0..n).map(|k| (values[(k + 1) % n] / values[k]).arg()).collect();
        let largest = steps.iter().map(|s| s.abs()).fold(0.0, f64::max);
        if largest <= 0.5 * PI {
            let turns = steps.iter().sum::<f64>() / (2.0 * PI);
            let charge = turns.round();
            return Ok(Winding {
                charge: charge as i64,
                residue: turns - charge,
                samples: n,
                min_modulus: min,
            });
        }
        if 2 * n > max_samples {
            return Err(Error::Unresolved { samples: n });
        }
        // Keep the old samples at the even positions of the refined polygon.
        let odd: Vec<[f64; 2]> = (0..n).map(|k| circle_point(center, radius, 2 * k + 1, 2 * n)).collect();
        let fresh = eval(&odd)?;
        values = values.into_iter().zip(fresh).flat_map(|(a, b)| [a, b]).collect();
        n *= 2;
    }
}

/// [`winding_number`] for one component of a model in the plane (t, z).
pub fn winding_on_circle(model: &Model, t: f64, z: f64, which: Component, center: [f64; 2], radius: f64) -> Result<Winding> {
    let s = ZeroSearch::default();
    winding_number(
        |pts| model.evaluate_points(t, z, pts, which),
        center,
        radius,
        s.initial_samples,
        s.max_samples,
    )
}

/// 2D Newton iteration on (Re Ψ, Im Ψ) with a forward-difference Jacobian.
/// Returns the refined point and |Ψ| there, or `None` on a stall.
fn refine<F>(eval: &F, start: [f64; 2], cell: f64, target: f64, max_steps: usize) -> Result<Option<([f64; 2], f64)>>
where
    F: Fn(&[[f64; 2]]) -> Result<Vec<Complex64>>,
{
    let mut p = start;
    let mut fp = eval(&[p])?[0];
    let mut last_step = cell;
    for _ in 0..max_steps {
        // A multiple zero is approached linearly; insist on a small step as
        // well as a small residual so all starts reach the same point.
        if fp.norm() <= target && last_step <= 1e-4 * cell {
            return Ok(Some((p, fp.norm())));
        }
        let h = 1e-3 * last_step.max(1e-6 * cell);
        let v = eval(&[[p[0], p[1] + h], [p[0] + h, p[1]]])?;
        let (fy, fx) = ((v[0] - fp) / h, (v[1] - fp) / h);
        let det = fx.re * fy.im - fy.re * fx.im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (-fp.re * fy.im + fy.re * fp.im) / det;
        let dy = (-fx.re * fp.im + fx.im * fp.re) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let q = [p[0] + lambda * dx, p[1] + lambda * dy];
            let fq = eval(&[q])?[0];
            if fq.norm() < fp.norm() || (fq.norm() <= target && fp.norm() <= target) {
                last_step = lambda * dx.hypot(dy);
                p = q;
                fp = fq;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        if (p[0] - start[0]).hypot(p[1] - start[1]) > 4.0 * cell {
            return Ok(None);
        }
    }
    Ok((fp.norm() <= target).then_some((p, fp.norm())))
}

/// Locates the zeros of the map's component: cells where both Re Ψ and
/// Im Ψ change sign seed a Newton iteration on the wave function itself;
/// converged points closer than the dedupe radius are merged and each
/// survivor gets its charge from a small circle around it.
pub fn find_zeros(map: &FieldMap, search: &ZeroSearch) -> Result<VortexSet> {
    let g = &map.grid;
    let model = &map.model;
    let cell = g.dx().max(g.dy());
    let dedupe = search.dedupe_radius.unwrap_or(0.5 * g.cell_diagonal());
    let radius = search.search_radius.unwrap_or(3.0 * model.params.width(g.t));
    let map_max = map.max_abs();
    let target = search.residual_tol * map_max;
    let eval = |pts: &[[f64; 2]]| model.evaluate_points(g.t, g.z, pts, g.which);

    let mut starts = Vec::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let corners = [map.value(i, j), map.value(i + 1, j), map.value(i, j + 1), map.value(i + 1, j + 1)];
            let changes = |f: fn(&Complex64) -> f64| {
                corners.iter().any(|c| f(c) > 0.0) && corners.iter().any(|c| f(c) <= 0.0)
            };
            let centre = [0.5 * (g.x(i) + g.x(i + 1)), 0.5 * (g.y(j) + g.y(j + 1))];
            if changes(|c| c.re) && changes(|c| c.im) && centre[0].hypot(centre[1]) <= radius {
                starts.push(centre);
            }
        }
    }

    let refined: Vec<Result<Option<([f64; 2], f64)>>> = starts
        .par_iter()
        .map(|&s| refine(&eval, s, cell, target, search.max_newton_steps))
        .collect();
    let mut found = Vec::new();
    let mut stalled = 0;
    for (s, r) in starts.iter().zip(refined) {
        match r? {
            Some((p, res)) if p[0].hypot(p[1]) <= radius => found.push((p, res)),
            Some(_) => {}
            None => {
                warn!("Newton stalled from ({:.4}, {:.4}); candidate dropped", s[0], s[1]);
                stalled += 1;
            }
        }
    }

    // Best residual wins inside each dedupe disc.
    found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0[0].total_cmp(&b.0[0])).then(a.0[1].total_cmp(&b.0[1])));
    let mut kept: Vec<([f64; 2], f64)> = Vec::new();
    for (p, res) in found {
        if kept.iter().all(|(q, _)| (p[0] - q[0]).hypot(p[1] - q[1]) >= dedupe) {
            kept.push((p, res));
        }
    }
    kept.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));

    let charges: Vec<Result<Winding>> = kept
        .par_iter()
        .map(|(p, _)| {
            let nearest = kept
                .iter()
                .map(|(q, _)| (p[0] - q[0]).hypot(p[1] - q[1]))
                .filter(|&d| d > 0.0)
                .fold(f64::INFINITY, f64::min);
            let r = search.winding_radius.unwrap_or(2.0 * cell).min(0.45 * nearest);
            winding_number(eval, *p, r, search.initial_samples, search.max_samples)
        })
        .collect();
    let mut zeros = Vec::with_capacity(kept.len());
    for ((p, res), w) in kept.into_iter().zip(charges) {
        zeros.push(Zero {
            x: p[0],
            y: p[1],
            charge: w?.charge,
            residual: res,
        });
    }
    Ok(VortexSet {
        zeros,
        dedupe_radius: dedupe,
        search_radius: radius,
        map_max,
        stalled,
        fingerprint: map.fingerprint.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_points_pair_up_in_x() {
        let n = 64;
        for k in 1..n {
            let a = circle_point([3.0, -1.0], 2.5, k, n);
            let b = circle_point([3.0, -1.0], 2.5, n - k, n);
            assert_eq!(a[0].to_bits(), b[0].to_bits());
        }
    }

    #[test]
    fn constant_has_no_winding() {
        let w = winding_number(|p| Ok(vec![Complex64::new(2.0, 1.0); p.len()]), [0.0, 0.0], 1.0, 64, 4096).unwrap();
        assert_eq!(w.charge, 0);
    }

    #[test]
    fn polynomial_charges() {
        // (z − 1)²(z + 2)^{-1}-like structure through conj for a negative charge.
        let f = |p: &[[f64; 2]]| {
            Ok(p.iter()
                .map(|q| {
                    let z = Complex64::new(q[0], q[1]);
                    (z - 1.0).powi(2) * (z + 2.0).conj()
                })
                .collect())
        };
        assert_eq!(winding_number(f, [1.0, 0.0], 0.5, 64, 4096).unwrap().charge, 2);
        assert_eq!(winding_number(f, [-2.0, 0.0], 0.5, 64, 4096).unwrap().charge, -1);
        assert_eq!(winding_number(f, [0.0, 0.0], 10.0, 8, 4096).unwrap().charge, 1);
    }

    #[test]
    fn zero_on_contour_and_unresolved() {
        let f = |p: &[[f64; 2]]| Ok(p.iter().map(|q| Complex64::new(q[0], q[1])).collect());
        assert!(matches!(
            winding_number(f, [1.0, 0.0], 1.0, 64, 4096),
            Err(Error::ZeroOnContour { .. })
        ));
        let fast = |p: &[[f64; 2]]| Ok(p.iter().map(|q| Complex64::new(q[0], q[1]).powi(40)).collect());
        assert!(matches!(winding_number(fast, [0.0, 0.0], 1.0, 16, 64), Err(Error::Unresolved { .. })));
        assert_eq!(winding_number(fast, [0.0, 0.0], 1.0, 16, 4096).unwrap().charge, 40);
    }
}
