use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::kronrod::{WG, WGK, XGK};
use super::{QuadError, QuadratureConfig, ROUNDOFF_FLOOR};

/// Components whose value has cancelled below this fraction of their L1
/// norm are converged relative to the L1 norm instead.
const CANCELLATION_FLOOR: f64 = 1e-4;

/// Result of [`integrate_adaptive_multi`], one entry per component.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiEstimate {
    pub values: Vec<Complex64>,
    pub abs_errors: Vec<f64>,
    /// ∫|f_k| as seen by the Kronrod rule.
    pub l1_norms: Vec<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    values: Vec<Complex64>,
    errors: Vec<f64>,
    resabs: Vec<f64>,
    priority: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

struct Rule<'a, F> {
    f: &'a F,
    dim: usize,
    buf: Vec<Complex64>,
}

impl<F> Rule<'_, F>
where
    F: Fn(f64, &mut [Complex64]),
{
    fn panel(&mut self, a: f64, b: f64) -> Result<Panel, QuadError> {
        let dim = self.dim;
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for j in 0..21 {
            let x = match j.cmp(&10) {
                Ordering::Less => center - half * XGK[j],
                Ordering::Equal => center,
                Ordering::Greater => center + half * XGK[20 - j],
            };
            let out = &mut self.buf[j * dim..(j + 1) * dim];
            (self.f)(x, out);
            if out.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(QuadError::NonFinite(x));
            }
        }
        let mut values = Vec::with_capacity(dim);
        let mut errors = Vec::with_capacity(dim);
        let mut resabs_all = Vec::with_capacity(dim);
        let abs_half = half.abs();
        for k in 0..dim {
            let fv = |j: usize| self.buf[j * dim + k];
            let mut resk = fv(10) * WGK[10];
            let mut resg = Complex64::new(0.0, 0.0);
            let mut resabs = fv(10).norm() * WGK[10];
            for j in 0..10 {
                let pair = fv(j) + fv(20 - j);
                resk += pair * WGK[j];
                resabs += WGK[j] * (fv(j).norm() + fv(20 - j).norm());
                if j % 2 == 1 {
                    resg += pair * WG[j / 2];
                }
            }
            let mean = resk * 0.5;
            let mut resasc = WGK[10] * (fv(10) - mean).norm();
            for j in 0..10 {
                resasc += WGK[j] * ((fv(j) - mean).norm() + (fv(20 - j) - mean).norm());
            }
            resabs *= abs_half;
            resasc *= abs_half;
            let mut error = ((resk - resg) * half).norm();
            if resasc != 0.0 && error != 0.0 {
                error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
            }
            if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
                error = error.max(50.0 * f64::EPSILON * resabs);
            }
            values.push(resk * half);
            errors.push(error);
            resabs_all.push(resabs);
        }
        Ok(Panel {
            a,
            b,
            values,
            errors,
            resabs: resabs_all,
            priority: 0.0,
        })
    }
}

/// Adaptive Gauss–Kronrod integration of a vector of `dim` complex
/// integrands sharing one panel partition. `f(x, out)` fills `out[..dim]`.
///
/// Component k converges when its error is at most
/// `max(abs_tol, rel_tol·max(|I_k|, 1e-4·∫|f_k|), 100ε·∫|f_k|)`.
pub fn integrate_adaptive_multi<F>(
    f: F,
    dim: usize,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<MultiEstimate, QuadError>
where
    F: Fn(f64, &mut [Complex64]),
{
    integrate_multi_core(f, dim, 0, points, cfg, 0.0)
}

/// Like [`integrate_adaptive_multi`] for integrands whose values carry a
/// relative noise `noise`. `f` fills `2·dim` slots: the integrands, then a
/// non-negative scale s_k(x) in the real part of each trailing slot.
/// Component k also accepts an error of `noise·∫s_k`. The returned
/// estimate covers the first `dim` components only.
pub(crate) fn integrate_adaptive_multi_noisy<F>(
    f: F,
    dim: usize,
    points: &[f64],
    cfg: &QuadratureConfig,
    noise: f64,
) -> Result<MultiEstimate, QuadError>
where
    F: Fn(f64, &mut [Complex64]),
{
    let mut est = integrate_multi_core(f, dim, dim, points, cfg, noise)?;
    est.values.truncate(dim);
    est.abs_errors.truncate(dim);
    est.l1_norms.truncate(dim);
    Ok(est)
}

fn integrate_multi_core<F>(
    f: F,
    dim: usize,
    scales: usize,
    points: &[f64],
    cfg: &QuadratureConfig,
    noise: f64,
) -> Result<MultiEstimate, QuadError>
where
    F: Fn(f64, &mut [Complex64]),
{
    let (&first, &last) = match (points.first(), points.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(QuadError::InvalidInterval { a: f64::NAN, b: f64::NAN }),
    };
    if !(first.is_finite() && last.is_finite()) || points.windows(2).any(|w| w[1] < w[0]) {
        return Err(QuadError::InvalidInterval { a: first, b: last });
    }
    let width = dim + scales;
    let empty = MultiEstimate {
        values: vec![Complex64::new(0.0, 0.0); width],
        abs_errors: vec![0.0; width],
        l1_norms: vec![0.0; width],
        evaluations: 0,
    };
    if first == last || dim == 0 {
        return Ok(empty);
    }

    let mut rule = Rule {
        f: &f,
        dim: width,
        buf: vec![Complex64::new(0.0, 0.0); 21 * width],
    };
    let mut initial = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            initial.push(rule.panel(w[0], w[1])?);
        }
    }
    let mut evaluations = 21 * initial.len();

    // Fixed per-component weights for ordering panels; scale slots do not
    // steer refinement.
    let mut weights = vec![0.0; dim];
    for p in &initial {
        for k in 0..dim {
            weights[k] += p.resabs[k];
        }
    }
    let weights: Vec<f64> = weights.iter().map(|&w| w.max(f64::MIN_POSITIVE)).collect();
    let prioritize = |mut p: Panel| {
        p.priority = p
            .errors
            .iter()
            .zip(&weights)
            .map(|(e, w)| e / w)
            .fold(0.0, f64::max);
        p
    };

    let mut heap: BinaryHeap<Panel> = initial.into_iter().map(prioritize).collect();
    let scale = first.abs().max(last.abs());
    let min_width = 64.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut subdivisions = heap.len();

    loop {
        let totals = totals(&heap, width);
        let worst_component = (0..dim)
            .map(|k| {
                let mut tol = component_tolerance(cfg, totals.values[k], totals.l1_norms[k]);
                if scales > 0 {
                    tol = tol.max(noise * totals.values[dim + k].re.abs());
                }
                (k, totals.abs_errors[k] / tol.max(f64::MIN_POSITIVE), tol)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("dim > 0");
        if worst_component.1 <= 1.0 {
            return Ok(MultiEstimate { evaluations, ..totals });
        }
        let worst = heap.peek().expect("at least one panel");
        if subdivisions >= cfg.max_subdivisions || worst.b - worst.a <= min_width {
            let k = worst_component.0;
            return Err(QuadError::NonConvergence {
                estimate: totals.values[k],
                abs_error: totals.abs_errors[k],
                tolerance: worst_component.2,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(prioritize(rule.panel(worst.a, mid)?));
        heap.push(prioritize(rule.panel(mid, worst.b)?));
        evaluations += 42;
        subdivisions += 1;
    }
}

pub(crate) fn component_tolerance(cfg: &QuadratureConfig, value: Complex64, l1: f64) -> f64 {
    cfg.abs_tol
        .max(cfg.rel_tol * value.norm().max(CANCELLATION_FLOOR * l1))
        .max(ROUNDOFF_FLOOR * l1)
}

// Position-ordered summation, independent of heap layout.
fn totals(heap: &BinaryHeap<Panel>, dim: usize) -> MultiEstimate {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut out = MultiEstimate {
        values: vec![Complex64::new(0.0, 0.0); dim],
        abs_errors: vec![0.0; dim],
        l1_norms: vec![0.0; dim],
        evaluations: 0,
    };
    for p in panels {
        for k in 0..dim {
            out.values[k] += p.values[k];
            out.abs_errors[k] += p.errors[k];
            out.l1_norms[k] += p.resabs[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_adaptive;

    #[test]
    fn components_match_scalar_integration() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64, out: &mut [Complex64]| {
            out[0] = Complex64::new(x.cos(), 0.0);
            out[1] = Complex64::new(0.0, 40.0 * x).exp() * 1e6;
            out[2] = Complex64::new((-x * x).exp(), x);
        };
        let multi = integrate_adaptive_multi(f, 3, &[-3.0, 0.0, 3.0], &cfg).unwrap();
        for k in 0..3 {
            let scalar = integrate_adaptive(
                |x| {
                    let mut out = [Complex64::new(0.0, 0.0); 3];
                    f(x, &mut out);
                    out[k]
                },
                -3.0,
                3.0,
                &cfg,
            )
            .unwrap();
            let scale = scalar.value.norm().max(1.0);
            assert!((multi.values[k] - scalar.value).norm() < 1e-9 * scale, "component {k}");
        }
    }

    #[test]
    fn cancelling_component_uses_l1_floor() {
        // ∫ sin over a full period is zero; without the L1 floor the
        // relative criterion could never be met.
        let cfg = QuadratureConfig {
            abs_tol: 0.0,
            ..QuadratureConfig::default()
        };
        let f = |x: f64, out: &mut [Complex64]| out[0] = Complex64::new(x.sin(), 0.0);
        let r = integrate_adaptive_multi(f, 1, &[0.0, 2.0 * std::f64::consts::PI], &cfg).unwrap();
        assert!(r.values[0].norm() < 1e-12);
        assert!((r.l1_norms[0] - 4.0).abs() < 0.1, "{}", r.l1_norms[0]);
    }
}
