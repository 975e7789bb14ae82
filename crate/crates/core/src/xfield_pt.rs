//! First-order correction for the transverse field profile
//! `φ(x) = −E₀ d f((x − a)/d)` with the sine ramp
//! `f(ξ) = sin(πξ/2)` on (−1, 1) and `±1` outside.
//!
//! The correction is assembled in momentum space: Gaussian integrals over
//! p are done in closed form, leaving a τ-integral (the kernel I_l) nested
//! inside a principal-value ξ-integral.

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lg_core::{q_factor, PacketParams, SpacetimePoint, HBAR};
use crate::numerics::{
    cos_ratio, integrate_adaptive_multi, integrate_adaptive_with_breaks, integrate_pv_kernel_multi_noisy, sinc, Estimate,
    MultiEstimate, QuadratureConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XFieldPerturbation {
    /// Field strength E₀ (a.u.).
    #[serde(rename = "E0")]
    pub e0: f64,
    /// Centre of the ramp.
    pub a: f64,
    /// Half-width of the ramp, d > 0.
    pub d: f64,
}

impl XFieldPerturbation {
    pub fn new(e0: f64, a: f64, d: f64) -> Result<Self> {
        let p = Self { e0, a, d };
        p.validate()?;
        Ok(p)
    }

    /// E₀ = 1.0e7 V/m, d = 10 a.u., a = 0.
    pub fn figure() -> Self {
        Self {
            e0: crate::lg_core::field_au_from_v_per_m(1.0e7),
            a: 0.0,
            d: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidParameter(format!("field width d must be > 0, got {}", self.d)));
        }
        if !self.e0.is_finite() || !self.a.is_finite() {
            return Err(Error::InvalidParameter("E0 and a must be finite".into()));
        }
        Ok(())
    }

    /// Scalar potential φ(x).
    pub fn potential(&self, x: f64) -> f64 {
        -self.e0 * self.d * profile((x - self.a) / self.d)
    }
}

/// Sine-ramp profile f(ξ).
pub fn profile(xi: f64) -> f64 {
    if xi >= 1.0 {
        1.0
    } else if xi <= -1.0 {
        -1.0
    } else {
        (FRAC_PI_2 * xi).sin()
    }
}

/// Localized part g(ξ) = f(ξ) − (2θ(ξ) − 1); zero for |ξ| > 1.
pub fn profile_remainder(xi: f64) -> f64 {
    let step = if xi > 0.0 {
        1.0
    } else if xi < 0.0 {
        -1.0
    } else {
        0.0
    };
    if xi.abs() > 1.0 {
        0.0
    } else {
        profile(xi) - step
    }
}

/// Fourier transform ĝ(η) = ∫ e^{−iηξ} g(ξ) dξ of the ramp remainder,
/// `(2i/η)(4η² − π² + π² cos η)/(4η² − π²)`, with both removable points
/// handled analytically. Odd by construction.
pub fn ghat(eta: f64) -> Complex64 {
    let x = eta.abs();
    let value = if x < 0.5 {
        // 4η² − π² + π² cos η = 4η² − 2π² sin²(η/2)
        let s = sinc(0.5 * x);
        2.0 * x * (4.0 - 0.5 * PI * PI * s * s) / (4.0 * x * x - PI * PI)
    } else {
        (2.0 / x) * (1.0 + PI * PI * cos_ratio(x, 1e-4))
    };
    Complex64::new(0.0, eta.signum() * value)
}

/// α = (1 + it/t_d)/(2σ²ħ²).
pub fn alpha(t: f64, params: &PacketParams) -> Complex64 {
    let s2 = params.sigma * params.sigma * HBAR * HBAR;
    Complex64::new(1.0, t / params.diffraction_time()) / (2.0 * s2)
}

/// β = x/ħ − ξ(t − t′)/(m d).
pub fn beta(t: f64, t_prime: f64, x: f64, xi: f64, params: &PacketParams, d: f64) -> f64 {
    x / HBAR - xi * (t - t_prime) / (params.mass * d)
}

/// Ξ_l in its collapsed form σ^l (iy + βħ)^l e^{−β²/(4α)}.
pub fn xi_closed_form(
    t: f64,
    t_prime: f64,
    x: f64,
    y: f64,
    xi: f64,
    params: &PacketParams,
    d: f64,
) -> Complex64 {
    let a = alpha(t, params);
    let b = beta(t, t_prime, x, xi, params, d);
    let base = Complex64::new(b * HBAR, y) * params.sigma;
    base.powi(params.l as i32) * (-(b * b) / (a * 4.0)).exp()
}

/// Ξ_l as the double sum produced by the p_x and p_y Gaussian integrals,
/// before the collapse to the single n = k = 0 term.
///
/// Terms of equal n + k cancel, and each can exceed the surviving term by
/// many orders of magnitude, so the polynomial part is summed in exact
/// rational arithmetic from the f64 values of 4ħ²α and iy + βħ.
pub fn xi_double_sum(
    t: f64,
    t_prime: f64,
    x: f64,
    y: f64,
    xi: f64,
    params: &PacketParams,
    d: f64,
) -> Complex64 {
    let l = params.l as usize;
    let a = alpha(t, params);
    let b = beta(t, t_prime, x, xi, params, d);
    let four_alpha = a * (4.0 * HBAR * HBAR);
    let gauss = (-(b * b) / (a * 4.0)).exp();
    if !(four_alpha.is_finite() && b.is_finite() && y.is_finite()) {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    let base = exact_complex(Complex64::new(b * HBAR, y));
    let four_alpha = exact_complex(four_alpha);
    let mut sum = Complex::new(BigRational::zero(), BigRational::zero());
    for n in 0..=l / 2 {
        let outer = binomial_exact(l, 2 * n) * double_factorial_over_power(n);
        let outer = if n % 2 == 0 { outer } else { -outer };
        for k in 0..=(l / 2 - n) {
            let coeff = &outer * binomial_exact(l - 2 * n, 2 * k) * double_factorial_over_power(k);
            let power = (l - 2 * n - 2 * k) as u32;
            let term = four_alpha.powu((n + k) as u32) * base.powu(power);
            sum = sum + Complex::new(term.re * &coeff, term.im * &coeff);
        }
    }
    let rounded = Complex64::new(
        sum.re.to_f64().unwrap_or(f64::NAN),
        sum.im.to_f64().unwrap_or(f64::NAN),
    );
    rounded * params.sigma.powi(l as i32) * gauss
}

fn exact_complex(v: Complex64) -> Complex<BigRational> {
    let exact = |x: f64| BigRational::from_float(x).expect("finite value");
    Complex::new(exact(v.re), exact(v.im))
}

fn binomial_exact(n: usize, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, i| {
        acc * BigRational::new(BigInt::from(n - i), BigInt::from(i + 1))
    })
}

/// (2n − 1)!!/2^n, with (−1)!! = 1.
fn double_factorial_over_power(n: usize) -> BigRational {
    (1..=n).fold(BigRational::one(), |acc, i| {
        acc * BigRational::new(BigInt::from(2 * i - 1), BigInt::from(2))
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of the τ-integrand of I_l at fixed (t, x, y, ξ):
/// `exp(−A τ² + B τ) (w − b τ)^l`.
#[derive(Debug, Clone, Copy)]
struct KernelShape {
    quad: Complex64,
    lin: Complex64,
    w: Complex64,
    slope: f64,
    l: i32,
}

impl KernelShape {
    fn new(t: f64, x: f64, y: f64, xi: f64, params: &PacketParams, d: f64) -> Self {
        let a = alpha(t, params);
        let md = params.mass * d;
        let quad = Complex64::new(xi * xi / (4.0 * md * md), 0.0) / a;
        let lin = (Complex64::new(x / HBAR, 0.0) / a - Complex64::new(0.0, HBAR * xi / d)) * (xi / (2.0 * md));
        Self {
            quad,
            lin,
            w: Complex64::new(x, y),
            slope: HBAR * xi / md,
            l: params.l as i32,
        }
    }

    #[inline]
    fn eval(&self, tau: f64) -> Complex64 {
        let exponent = -self.quad * (tau * tau) + self.lin * tau;
        exponent.exp() * (self.w - self.slope * tau).powi(self.l)
    }

    #[inline]
    fn exponent(&self, tau: Complex64) -> Complex64 {
        (-self.quad * tau + self.lin) * tau
    }

    #[inline]
    fn poly(&self, tau: Complex64) -> Complex64 {
        (self.w - tau * self.slope).powi(self.l)
    }

    // Initial panel boundaries: the decay length from τ = 0 and the ridge
    // where β vanishes.
    fn breakpoints(&self, t: f64) -> Vec<f64> {
        let mut pts = vec![0.0, t];
        if self.quad.re > 0.0 {
            let width = 1.0 / self.quad.re.sqrt();
            let centre = self.lin.re / (2.0 * self.quad.re);
            for p in [4.0 * width, centre - 4.0 * width, centre, centre + 4.0 * width] {
                if p > 0.0 && p < t {
                    pts.push(p);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Distance, in units of the exponent, from the endpoint to the branch
    /// point of its steepest-descent path.
    fn branch_distance(&self, tau_e: f64) -> f64 {
        let slope = self.lin - self.quad * (2.0 * tau_e);
        (slope * slope / (self.quad * 4.0)).norm()
    }

    /// Integral along the steepest-descent path leaving `tau_e`, on which
    /// the exponent drops by exactly `s`. Returns the value and the valley
    /// label of the path's far end.
    fn descent_path(&self, tau_e: f64, cfg: &QuadratureConfig) -> Result<(Estimate, f64)> {
        let r0 = self.lin - self.quad * (2.0 * tau_e);
        let four_a = self.quad * 4.0;
        let s_star = -(r0 * r0) / four_a;
        let base = four_a.sqrt();
        let at_start = base * (-s_star).sqrt();
        let valley = if (at_start - r0).norm() <= (at_start + r0).norm() { 1.0 } else { -1.0 };
        let start = Complex64::new(tau_e, 0.0);
        let integrand = |s: f64| {
            let root = base * (Complex64::new(s, 0.0) - s_star).sqrt() * valley;
            let tau = start - 2.0 * s / (r0 + root);
            -self.poly(tau) * (-s).exp() / root
        };
        let mut est = integrate_adaptive_with_breaks(integrand, &DESCENT_BREAKS, cfg)?;
        let scale = self.exponent(start).exp();
        est.value *= scale;
        est.abs_error *= scale.norm();
        Ok((est, valley))
    }

    /// Integral across the saddle from one valley to the other, in closed
    /// form, for the polynomial (w − bτ)^order.
    fn saddle(&self, order: usize) -> Complex64 {
        let centre = self.lin / (self.quad * 2.0);
        let u = self.w - centre * self.slope;
        let four_a = self.quad * 4.0;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut coeff = 1.0;
        for n in 0..=order / 2 {
            if n > 0 {
                let k = 2 * n;
                coeff *= ((order + 2 - k) * (order + 1 - k)) as f64 * self.slope * self.slope / n as f64;
            }
            sum += u.powi((order - 2 * n) as i32) * coeff / four_a.powi(n as i32);
        }
        (self.exponent(centre)).exp() * (Complex64::new(PI, 0.0) / self.quad).sqrt() * sum
    }

    /// Vector form of [`Self::descent_path`] for every power 0..=l.
    fn descent_path_moments(&self, tau_e: f64, cfg: &QuadratureConfig) -> Result<(MultiEstimate, f64)> {
        let r0 = self.lin - self.quad * (2.0 * tau_e);
        let four_a = self.quad * 4.0;
        let s_star = -(r0 * r0) / four_a;
        let base = four_a.sqrt();
        let at_start = base * (-s_star).sqrt();
        let valley = if (at_start - r0).norm() <= (at_start + r0).norm() { 1.0 } else { -1.0 };
        let start = Complex64::new(tau_e, 0.0);
        let integrand = |s: f64, out: &mut [Complex64]| {
            let root = base * (Complex64::new(s, 0.0) - s_star).sqrt() * valley;
            let tau = start - 2.0 * s / (r0 + root);
            fill_powers(-(-s).exp() / root, self.w - tau * self.slope, out);
        };
        let mut est = integrate_adaptive_multi(integrand, self.l as usize + 1, &DESCENT_BREAKS, cfg)?;
        let scale = self.exponent(start).exp();
        est.values.iter_mut().for_each(|v| *v *= scale);
        est.abs_errors.iter_mut().for_each(|e| *e *= scale.norm());
        Ok((est, valley))
    }

    fn moments_by_descent(&self, t: f64, cfg: &QuadratureConfig) -> Result<Option<Moments>> {
        let (from_start, v0) = self.descent_path_moments(0.0, cfg)?;
        let (from_end, v1) = self.descent_path_moments(t, cfg)?;
        let mut values: Vec<Complex64> = from_start.values.iter().zip(&from_end.values).map(|(a, b)| a - b).collect();
        if v0 != v1 {
            for (k, v) in values.iter_mut().enumerate() {
                let across = self.saddle(k) * v0;
                if !(across.re.is_finite() && across.im.is_finite()) {
                    return Ok(None);
                }
                *v += across;
            }
        }
        Ok(Some(values))
    }

    /// ∫₀ᵗ by deforming onto the steepest-descent paths of both endpoints.
    fn by_descent(&self, t: f64, cfg: &QuadratureConfig) -> Result<Option<Estimate>> {
        let (from_start, v0) = self.descent_path(0.0, cfg)?;
        let (from_end, v1) = self.descent_path(t, cfg)?;
        let mut value = from_start.value - from_end.value;
        if v0 != v1 {
            let across = self.saddle(self.l as usize) * v0;
            if !(across.re.is_finite() && across.im.is_finite()) {
                return Ok(None);
            }
            value += across;
        }
        Ok(Some(Estimate {
            value,
            abs_error: from_start.abs_error + from_end.abs_error,
            evaluations: from_start.evaluations + from_end.evaluations,
        }))
    }
}

/// out[k] = scale·u^k.
#[inline]
fn fill_powers(scale: Complex64, u: Complex64, out: &mut [Complex64]) {
    let mut acc = scale;
    for o in out.iter_mut() {
        *o = acc;
        acc *= u;
    }
}

/// The τ-integrals of exp(−Aτ² + Bτ)(w − bτ)^k for k = 0..=l. Their
/// quadrature errors are folded into the outer ξ-integral's estimate.
type Moments = Vec<Complex64>;

const DESCENT_BREAKS: [f64; 6] = [0.0, 1.0, 5.0, 15.0, 35.0, 75.0];

/// Endpoint paths are used once their branch points are this far away;
/// closer than that the direct τ quadrature is cheap anyway.
const DESCENT_MIN_DISTANCE: f64 = 100.0;

/// The τ-kernel
/// `I_l(t,x,y,ξ) = ∫₀ᵗ dτ exp[−ξ²τ²/(4αm²d²) + (ξ/(2md))(x/(αħ) − iħξ/d) τ] (x + iy − ħξτ/(md))^l`.
pub fn i_l_kernel(
    t: f64,
    x: f64,
    y: f64,
    xi: f64,
    params: &PacketParams,
    d: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    let shape = KernelShape::new(t, x, y, xi, params, d);
    if xi == 0.0 {
        return Ok(Estimate {
            value: shape.w.powi(shape.l) * t,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    if shape.branch_distance(0.0) > DESCENT_MIN_DISTANCE && shape.branch_distance(t) > DESCENT_MIN_DISTANCE {
        if let Some(est) = shape.by_descent(t, cfg)? {
            return Ok(est);
        }
    }
    i_l_direct(&shape, t, cfg)
}

fn i_l_direct(shape: &KernelShape, t: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    Ok(integrate_adaptive_with_breaks(|tau| shape.eval(tau), &shape.breakpoints(t), cfg)?)
}

// I_k(t, x, 0, ξ) for every k ≤ l at once.
fn kernel_moments(shape: &KernelShape, t: f64, cfg: &QuadratureConfig) -> Result<Moments> {
    let dim = shape.l as usize + 1;
    if shape.slope == 0.0 {
        let mut values = vec![Complex64::new(0.0, 0.0); dim];
        fill_powers(Complex64::new(t, 0.0), shape.w, &mut values);
        return Ok(values);
    }
    if shape.branch_distance(0.0) > DESCENT_MIN_DISTANCE && shape.branch_distance(t) > DESCENT_MIN_DISTANCE {
        if let Some(m) = shape.moments_by_descent(t, cfg)? {
            return Ok(m);
        }
    }
    let integrand = |tau: f64, out: &mut [Complex64]| {
        let exponent = -shape.quad * (tau * tau) + shape.lin * tau;
        fill_powers(exponent.exp(), shape.w - shape.slope * tau, out);
    };
    Ok(integrate_adaptive_multi(integrand, dim, &shape.breakpoints(t), cfg)?.values)
}

/// Ψ⁽¹⁾ together with its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderValue {
    pub value: Complex64,
    pub abs_error: f64,
    pub tail_warning: bool,
}

/// First-order correction Ψ⁽¹⁾(t, r) for the transverse field.
pub fn psi1_xfield(
    pt: &SpacetimePoint,
    params: &PacketParams,
    pert: &XFieldPerturbation,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    psi1_xfield_detailed(pt, params, pert, cfg).map(|v| v.value)
}

pub fn psi1_xfield_detailed(
    pt: &SpacetimePoint,
    params: &PacketParams,
    pert: &XFieldPerturbation,
    cfg: &QuadratureConfig,
) -> Result<FirstOrderValue> {
    Ok(XFieldColumn::new(pt.t, pt.x, params, pert, cfg)?.eval(pt.y, pt.z))
}

/// Ψ⁽¹⁾ along a line of fixed (t, x).
///
/// Expanding `(x + iy − bτ)^l = Σ_k C(l,k) (iy)^{l−k} (x − bτ)^k` moves all
/// y-dependence out of the ξ-integral, so l + 1 principal-value integrals
/// serve every y (and every z) in the column.
#[derive(Debug, Clone)]
pub struct XFieldColumn {
    t: f64,
    x: f64,
    params: PacketParams,
    d: f64,
    coupling: f64,
    integrals: Vec<Complex64>,
    abs_errors: Vec<f64>,
    tail_warning: bool,
}

impl XFieldColumn {
    pub fn new(
        t: f64,
        x: f64,
        params: &PacketParams,
        pert: &XFieldPerturbation,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        params.validate()?;
        pert.validate()?;
        cfg.validate()?;
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
        }
        let dim = params.l as usize + 1;
        let d = pert.d;
        let coupling = -params.charge * pert.e0 * d * d;
        if pert.e0 == 0.0 {
            return Ok(Self {
                t,
                x,
                params: *params,
                d,
                coupling,
                integrals: vec![Complex64::new(0.0, 0.0); dim],
                abs_errors: vec![0.0; dim],
                tail_warning: false,
            });
        }
        let inner = cfg.with_rel_tol(cfg.rel_tol * 1e-2);

        // h_k(ξ) = I_k(t, x, 0, ξ) e^{iξ(x − a)/d}
        // After the first inner failure the remaining samples are skipped.
        let failure = std::cell::RefCell::new(None);
        let h = |xi: f64, out: &mut [Complex64]| {
            if failure.borrow().is_some() {
                out.fill(Complex64::new(0.0, 0.0));
                return;
            }
            let shape = KernelShape::new(t, x, 0.0, xi, params, d);
            match kernel_moments(&shape, t, &inner) {
                Ok(m) => {
                    let phase = Complex64::from_polar(1.0, xi * (x - pert.a) / d);
                    for (o, v) in out.iter_mut().zip(&m) {
                        *o = v * phase;
                    }
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    out.fill(Complex64::new(0.0, 0.0));
                }
            }
        };
        let pv = integrate_pv_kernel_multi_noisy(h, dim, inner.rel_tol, cfg);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let pv = pv?;
        Ok(Self {
            t,
            x,
            params: *params,
            d,
            coupling,
            integrals: pv.values,
            abs_errors: pv.abs_errors,
            tail_warning: pv.tail_warning,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn tail_warning(&self) -> bool {
        self.tail_warning
    }

    pub fn eval(&self, y: f64, z: f64) -> FirstOrderValue {
        let l = self.params.l as usize;
        let iy = Complex64::new(0.0, y);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for k in 0..=l {
            let c = binomial(l, k) * y.abs().powi((l - k) as i32);
            sum += iy.powi((l - k) as i32) * binomial(l, k) * self.integrals[k];
            err += c * self.abs_errors[k];
        }
        let pt = SpacetimePoint::new(self.t, self.x, y, z);
        let scale = prefactor(&pt, &self.params, self.d) * self.coupling;
        FirstOrderValue {
            value: scale * sum,
            abs_error: scale.norm() * err,
            tail_warning: self.tail_warning,
        }
    }
}

/// Everything in front of the ξ-integral:
/// `−(i/(2ħd)) π^{−7/4}/√l! · σ^{l+3/2}/(σσ_⊥)^{2l+2} · (1 − it/t_d)^{l+1} Q(t,z) e^{−ρ²(1−it/t_d)/(2σ_⊥²)}`.
fn prefactor(pt: &SpacetimePoint, params: &PacketParams, d: f64) -> Complex64 {
    let l = f64::from(params.l);
    let ratio = pt.t / params.diffraction_time();
    let w = params.width(pt.t);
    let sw = params.sigma * w;
    let ln_mag = -1.75 * PI.ln() - params.ln_sqrt_factorial() + (l + 1.5) * params.sigma.ln() - (2.0 * l + 2.0) * sw.ln();
    let rho2 = pt.x * pt.x + pt.y * pt.y;
    let envelope = (-Complex64::new(1.0, -ratio) * rho2 / (2.0 * w * w)).exp();
    let chirp = Complex64::new(1.0, -ratio).powi(params.l as i32 + 1);
    Complex64::new(0.0, -1.0 / (2.0 * HBAR * d))
        * ln_mag.exp()
        * chirp
        * q_factor(pt.t, pt.z, params)
        * envelope
}
