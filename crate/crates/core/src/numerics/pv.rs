use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::multi::{component_tolerance, integrate_adaptive_multi_noisy};
use super::{integrate_adaptive_multi, integrate_adaptive_with_breaks, Estimate, QuadError, QuadratureConfig};

/// `sin(x)/x`, with its Taylor series close to the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `cos ξ / (4ξ² − π²)` for ξ ≥ 0, finite at ξ = π/2 where it equals −1/(4π).
///
/// Uses `cos ξ = −sin(ξ − π/2)` so the removable zero cancels analytically.
/// Within `guard` of π/2 the value comes from the limit series.
pub fn cos_ratio(xi: f64, guard: f64) -> f64 {
    let xi = xi.abs();
    let u = xi - FRAC_PI_2;
    let s = if u.abs() < guard {
        1.0 - u * u / 6.0
    } else {
        sinc(u)
    };
    -s / (2.0 * (2.0 * xi + PI))
}

/// The odd weight `cos ξ / (ξ(4ξ² − π²))` of the principal-value prescription.
/// Singular at ξ = 0; only meaningful away from it.
pub fn pv_weight(xi: f64, guard: f64) -> f64 {
    xi.signum() * cos_ratio(xi, guard) / xi.abs()
}

/// Result of [`integrate_pv_kernel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvEstimate {
    pub estimate: Estimate,
    /// Estimated size of the neglected |ξ| > xi_cutoff contribution.
    pub tail_estimate: f64,
    /// Set when `tail_estimate` exceeds the requested tolerance.
    pub tail_warning: bool,
}

/// Vector form of [`PvEstimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PvMultiEstimate {
    pub values: Vec<Complex64>,
    pub abs_errors: Vec<f64>,
    pub tail_estimates: Vec<f64>,
    pub tail_warning: bool,
    pub evaluations: usize,
}

// First integration-by-parts term of the truncated tail
// 2iπ² ∫_L^∞ [h(ξ) − h(−ξ)] cos ξ / (ξ(4ξ² − π²)) dξ.
fn tail_estimate(edge: f64, cutoff: f64) -> f64 {
    2.0 * PI * PI * edge / (cutoff * (4.0 * cutoff * cutoff - PI * PI))
}

/// Evaluates `I = ∫ h(ξ) [ĝ(ξ) − 2i P(1/ξ)] dξ` for the sine-ramp profile as
/// the regular integral
///
/// `I = 2iπ² ∫ [h(ξ) − h(0)] cos ξ / (ξ(4ξ² − π²)) dξ`
///
/// truncated to `|ξ| ≤ xi_cutoff`. The weight is odd, so the integral is
/// accumulated over `ξ > 0` from the pairing `h(ξ) − h(−ξ)`, in which the
/// `h(0)` subtraction cancels identically. Inside `singularity_guard_delta`
/// of the origin the quotient `[h(ξ) − h(−ξ)]/ξ` is replaced by its
/// difference quotient at the guard.
pub fn integrate_pv_kernel<H>(h: H, cfg: &QuadratureConfig) -> Result<PvEstimate, QuadError>
where
    H: Fn(f64) -> Complex64,
{
    let guard = cfg.singularity_guard_delta;
    let cutoff = cfg.xi_cutoff;
    let quotient_at_guard = (h(guard) - h(-guard)) / guard;

    let integrand = |xi: f64| -> Complex64 {
        let q = if xi < guard {
            quotient_at_guard
        } else {
            (h(xi) - h(-xi)) / xi
        };
        q * cos_ratio(xi, guard)
    };

    let mut est = integrate_adaptive_with_breaks(integrand, &[0.0, guard, FRAC_PI_2, cutoff], cfg)?;
    let prefactor = Complex64::new(0.0, 2.0 * PI * PI);
    est.value *= prefactor;
    est.abs_error *= prefactor.norm();
    est.evaluations += 4;

    let tail = tail_estimate((h(cutoff) - h(-cutoff)).norm(), cutoff);
    let tail_warning = tail > cfg.tolerance(est.value);
    if tail_warning {
        log::warn!(
            "principal-value tail beyond |xi| = {cutoff} estimated at {tail:.3e} (|I| = {:.3e})",
            est.value.norm()
        );
    }
    Ok(PvEstimate {
        estimate: est,
        tail_estimate: tail,
        tail_warning,
    })
}

/// [`integrate_pv_kernel`] for `dim` functions at once; `h(ξ, out)` fills
/// `out[..dim]`. All components share one adaptive partition.
pub fn integrate_pv_kernel_multi<H>(h: H, dim: usize, cfg: &QuadratureConfig) -> Result<PvMultiEstimate, QuadError>
where
    H: Fn(f64, &mut [Complex64]),
{
    integrate_pv_kernel_multi_noisy(h, dim, 0.0, cfg)
}

/// [`integrate_pv_kernel_multi`] for h values that are themselves only
/// accurate to the relative level `noise`, such as the results of inner
/// quadratures. The pairing h(ξ) − h(−ξ) cannot resolve an odd part below
/// `noise·(|h(ξ)| + |h(−ξ)|)`, so each component also accepts an error of
/// `noise` times the weighted integral of that sum.
pub fn integrate_pv_kernel_multi_noisy<H>(
    h: H,
    dim: usize,
    noise: f64,
    cfg: &QuadratureConfig,
) -> Result<PvMultiEstimate, QuadError>
where
    H: Fn(f64, &mut [Complex64]),
{
    let guard = cfg.singularity_guard_delta;
    let cutoff = cfg.xi_cutoff;
    let noisy = noise > 0.0;
    // Fills out[..dim] with the odd pairing and, when noisy, out[dim..] with
    // |h(ξ)| + |h(−ξ)|.
    let pair = |xi: f64, out: &mut [Complex64]| {
        let mut minus = vec![Complex64::new(0.0, 0.0); dim];
        h(xi, &mut out[..dim]);
        h(-xi, &mut minus);
        for k in 0..dim {
            if noisy {
                out[dim + k] = Complex64::new(out[k].norm() + minus[k].norm(), 0.0);
            }
            out[k] -= minus[k];
        }
    };
    let width = if noisy { 2 * dim } else { dim };
    let mut at_guard = vec![Complex64::new(0.0, 0.0); width];
    pair(guard, &mut at_guard);

    let integrand = |xi: f64, out: &mut [Complex64]| {
        let w = if xi < guard {
            out.copy_from_slice(&at_guard);
            cos_ratio(xi, guard) / guard
        } else {
            pair(xi, out);
            cos_ratio(xi, guard) / xi
        };
        out[..dim].iter_mut().for_each(|o| *o *= w);
        out[dim..].iter_mut().for_each(|o| *o *= w.abs());
    };
    let points = [0.0, guard, FRAC_PI_2, cutoff];
    let est = if noisy {
        integrate_adaptive_multi_noisy(integrand, dim, &points, cfg, noise)?
    } else {
        integrate_adaptive_multi(integrand, dim, &points, cfg)?
    };
    let prefactor = Complex64::new(0.0, 2.0 * PI * PI);
    let values: Vec<Complex64> = est.values.iter().map(|v| v * prefactor).collect();
    let abs_errors: Vec<f64> = est.abs_errors.iter().map(|e| e * prefactor.norm()).collect();

    let mut edge = vec![Complex64::new(0.0, 0.0); width];
    pair(cutoff, &mut edge);
    let tail_estimates: Vec<f64> = edge[..dim].iter().map(|e| tail_estimate(e.norm(), cutoff)).collect();
    let tail_warning = (0..dim).any(|k| {
        let tol = component_tolerance(cfg, values[k], est.l1_norms[k] * prefactor.norm());
        tail_estimates[k] > tol.max(noise * tail_estimate(edge.get(dim + k).map_or(0.0, |e| e.re), cutoff))
    });
    if tail_warning {
        log::warn!("principal-value tail beyond |xi| = {cutoff} exceeds the tolerance");
    }
    Ok(PvMultiEstimate {
        values,
        abs_errors,
        tail_estimates,
        tail_warning,
        evaluations: est.evaluations + 2 * dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_ratio_limit_at_half_pi() {
        let v = cos_ratio(FRAC_PI_2, 1e-4);
        assert!((v + 1.0 / (4.0 * PI)).abs() < 1e-15);
        // Continuity across the guard.
        let near = cos_ratio(FRAC_PI_2 + 2e-4, 1e-4);
        let direct = (FRAC_PI_2 + 2e-4f64).cos() / (4.0 * (FRAC_PI_2 + 2e-4f64).powi(2) - PI * PI);
        assert!((near - direct).abs() < 1e-9);
    }

    #[test]
    fn cos_ratio_matches_direct_formula_away_from_singularity() {
        for &xi in &[0.0f64, 0.3, 1.0, 2.5, 7.0, 40.0] {
            let direct = xi.cos() / (4.0 * xi * xi - PI * PI);
            assert!((cos_ratio(xi, 1e-4) - direct).abs() < 1e-14 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn even_function_integrates_to_zero() {
        let cfg = QuadratureConfig::default();
        let r = integrate_pv_kernel(|x| Complex64::new((-x * x).exp(), 0.0), &cfg).unwrap();
        assert_eq!(r.estimate.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn constant_integrates_to_zero() {
        let cfg = QuadratureConfig::default();
        let r = integrate_pv_kernel(|_| Complex64::new(2.5, -1.0), &cfg).unwrap();
        assert_eq!(r.estimate.value, Complex64::new(0.0, 0.0));
        assert!(!r.tail_warning);
    }

    #[test]
    fn odd_real_function_gives_imaginary_result() {
        let cfg = QuadratureConfig::default();
        let r = integrate_pv_kernel(|x| Complex64::new(x * (-x * x / 3.0).exp(), 0.0), &cfg).unwrap();
        assert_eq!(r.estimate.value.re, 0.0);
        assert!(r.estimate.value.im.abs() > 1e-3);
    }

    #[test]
    fn multi_matches_scalar() {
        let cfg = QuadratureConfig::default();
        let h0 = |x: f64| Complex64::new(x * (-x * x).exp(), 0.3 * (x - 1.0).powi(2) * (-0.5 * x * x).exp());
        let h1 = |x: f64| Complex64::new(0.0, 2.0 * x).exp() * (-0.2 * x * x).exp();
        let multi = integrate_pv_kernel_multi(
            |x, out: &mut [Complex64]| {
                out[0] = h0(x);
                out[1] = h1(x);
            },
            2,
            &cfg,
        )
        .unwrap();
        let s0 = integrate_pv_kernel(h0, &cfg).unwrap().estimate.value;
        let s1 = integrate_pv_kernel(h1, &cfg).unwrap().estimate.value;
        assert!((multi.values[0] - s0).norm() < 1e-9 * s0.norm());
        assert!((multi.values[1] - s1).norm() < 1e-9 * s1.norm());
        assert!(!multi.tail_warning);
    }

    #[test]
    fn slowly_decaying_h_raises_tail_warning() {
        let cfg = QuadratureConfig::default();
        let r = integrate_pv_kernel(|x| Complex64::new(x, 0.0), &cfg).unwrap();
        assert!(r.tail_warning);
    }
}
