use num_complex::Complex64;

use super::{integrate_adaptive, Estimate, QuadError, QuadratureConfig};

/// `∫_U^∞ u^{-1/2} e^{icu} s(u) du` for a smooth envelope `s` that tends to a
/// constant.
///
/// Below the switch point `W = max(U, tail_switch_u / c)` the integral is
/// done adaptively; beyond it, by four terms of repeated integration by
/// parts with finite-difference derivatives of `u^{-1/2} s(u)`. The first
/// neglected term is of relative size `(cW)^{-4}`.
pub fn integrate_fresnel_tail<S>(
    c: f64,
    lower: f64,
    s: S,
    cfg: &QuadratureConfig,
) -> Result<Estimate, QuadError>
where
    S: Fn(f64) -> Complex64,
{
    if !(c > 0.0) || !c.is_finite() {
        return Err(QuadError::InvalidPhase(c));
    }
    if !(lower > 0.0) || !lower.is_finite() {
        return Err(QuadError::InvalidInterval {
            a: lower,
            b: f64::INFINITY,
        });
    }
    let envelope = |u: f64| s(u) / u.sqrt();
    let switch = lower.max(cfg.tail_switch_u / c);

    let body = if switch > lower {
        integrate_adaptive(|u| envelope(u) * Complex64::new(0.0, c * u).exp(), lower, switch, cfg)?
    } else {
        Estimate::zero()
    };

    let step = switch / 20.0;
    let f = |k: i32| envelope(switch + f64::from(k) * step);
    let (fm2, fm1, f0, fp1, fp2) = (f(-2), f(-1), f(0), f(1), f(2));
    for v in [fm2, fm1, f0, fp1, fp2] {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(QuadError::NonFinite(switch));
        }
    }
    let d1 = (fm2 - fm1 * 8.0 + fp1 * 8.0 - fp2) / (12.0 * step);
    let d2 = (-fm2 + fm1 * 16.0 - f0 * 30.0 + fp1 * 16.0 - fp2) / (12.0 * step * step);
    let d3 = (fp2 - fp1 * 2.0 + fm1 * 2.0 - fm2) / (2.0 * step.powi(3));

    let ic = Complex64::new(0.0, c);
    let terms = [f0 / ic, -d1 / (ic * ic), d2 / (ic * ic * ic), -d3 / (ic * ic * ic * ic)];
    let series: Complex64 = terms.iter().sum();
    let tail = -Complex64::new(0.0, c * switch).exp() * series;

    Ok(body
        + Estimate {
            value: tail,
            abs_error: terms[3].norm(),
            evaluations: 5,
        })
}
