//! Independent evaluation paths used only to validate the closed forms.
//!
//! None of these share code with the production formulas beyond Ψ₀/Φ₀ and
//! the generic quadrature engines. They are slow and run at modest
//! tolerances.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lg_core::{phi0, q_factor_by_quadrature, PacketParams, SpacetimePoint, HBAR};
use crate::numerics::{
    integrate_adaptive, integrate_adaptive_with_breaks, integrate_fresnel_tail, QuadError, QuadratureConfig,
};
use crate::xfield_pt::{ghat, XFieldPerturbation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_points: usize,
    pub per_point_tol: f64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_points: 16,
            per_point_tol: 1e-5,
        }
    }
}

impl OracleBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_points < 1 {
            return Err(Error::InvalidParameter("oracle budget needs max_points >= 1".into()));
        }
        if !(self.per_point_tol > 0.0) {
            return Err(Error::InvalidParameter("oracle per_point_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Free 3D propagator θ(t)(m/(2πiħt))^{3/2} exp(imr²/(2ħt)).
pub fn greens_function(t: f64, r: [f64; 3], params: &PacketParams) -> Complex64 {
    if t <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r2 = r.iter().map(|v| v * v).sum::<f64>();
    let m = params.mass;
    Complex64::from_polar((m / (2.0 * PI * HBAR * t)).powf(1.5), m * r2 / (2.0 * HBAR * t) - 0.75 * PI)
}

/// Free 1D propagator θ(t)(m/(2πiħt))^{1/2} exp(imx²/(2ħt)).
pub fn greens_function_1d(t: f64, x: f64, params: &PacketParams) -> Complex64 {
    if t <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let m = params.mass;
    Complex64::from_polar((m / (2.0 * PI * HBAR * t)).sqrt(), m * x * x / (2.0 * HBAR * t) - 0.25 * PI)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// ∫ G₁(t, x − x′) f(x′) dx′ for an f that is negligible outside
/// `|x′| ≤ half_width`.
fn convolve_1d<F>(t: f64, x: f64, f: F, half_width: f64, params: &PacketParams, cfg: &QuadratureConfig) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let est = integrate_adaptive(|xp| greens_function_1d(t, x - xp, params) * f(xp), -half_width, half_width, cfg)?;
    Ok(est.value)
}

/// ∫ G(t, r − r′) Ψ₀(r′) d³r′, factorized into 1D convolutions through the
/// binomial expansion of (x′ + iy′)^l.
pub fn free_propagation_by_green(pt: &SpacetimePoint, params: &PacketParams, cfg: &QuadratureConfig) -> Result<Complex64> {
    params.validate()?;
    if !(pt.t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {}", pt.t)));
    }
    let s = params.sigma;
    let l = params.l;
    let reach = 14.0 / s;
    let gauss = |u: f64| (-0.5 * s * s * u * u).exp();
    let moment =
        |j: u32, at: f64| convolve_1d(pt.t, at, |u| Complex64::new(u.powi(j as i32) * gauss(u), 0.0), reach, params, cfg);
    let longitudinal = convolve_1d(
        pt.t,
        pt.z,
        |u| Complex64::from_polar(gauss(u), params.pbar * u / HBAR),
        reach,
        params,
        cfg,
    )?;
    let mut transverse = Complex64::new(0.0, 0.0);
    for j in 0..=l {
        let ipow = Complex64::new(0.0, 1.0).powi((l - j) as i32);
        transverse += ipow * binomial(l, j) * moment(j, pt.x)? * moment(l - j, pt.y)?;
    }
    let norm = (1.5 * s.ln() - 0.75 * PI.ln() - params.ln_sqrt_factorial()).exp() * s.powi(l as i32);
    Ok(transverse * longitudinal * norm)
}

/// ∫ G₁(t₁, x − x″) G₁(t₂, x″ − x′) dx″. The stationary point splits the
/// line; a finite window around it is integrated directly and the two
/// outer pieces become Fresnel tails in v = (x″ − c)².
pub fn semigroup_1d(t1: f64, t2: f64, x: f64, x_prime: f64, params: &PacketParams, cfg: &QuadratureConfig) -> Result<Complex64> {
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::InvalidParameter("semigroup times must be > 0".into()));
    }
    let m = params.mass;
    let product = |u: f64| greens_function_1d(t1, x - u, params) * greens_function_1d(t2, u - x_prime, params);
    let a = 0.5 * m / HBAR * (1.0 / t1 + 1.0 / t2);
    let centre = (x * t2 + x_prime * t1) / (t1 + t2);
    let half = (cfg.tail_switch_u / a).sqrt();
    let body = integrate_adaptive(product, centre - half, centre + half, cfg)?.value;
    let mut tails = Complex64::new(0.0, 0.0);
    for side in [1.0, -1.0] {
        // dx″ = dv/(2√v); the envelope strips the e^{iav} carrier numerically.
        let envelope = |v: f64| {
            let u = centre + side * v.sqrt();
            product(u) * Complex64::from_polar(0.5, -a * v)
        };
        tails += integrate_fresnel_tail(a, half * half, envelope, cfg)?.value;
    }
    Ok(body + tails)
}

/// Semigroup residual |∫G(t₁)G(t₂) − G(t₁+t₂)| / |G(t₁+t₂)| for one pair of
/// points, with the 3D integral as a product of 1D ones.
pub fn semigroup_residual(t1: f64, t2: f64, r: [f64; 3], r_prime: [f64; 3], params: &PacketParams, cfg: &QuadratureConfig) -> Result<f64> {
    let mut product = Complex64::new(1.0, 0.0);
    for k in 0..3 {
        product *= semigroup_1d(t1, t2, r[k], r_prime[k], params, cfg)?;
    }
    let diff = [r[0] - r_prime[0], r[1] - r_prime[1], r[2] - r_prime[2]];
    let direct = greens_function(t1 + t2, diff, params);
    Ok((product - direct).norm() / direct.norm())
}

/// Nested adaptive quadrature `∫∫ f(p, q) dq dp` over a square.
fn nested_2d<F>(f: F, half: f64, cfg: &QuadratureConfig) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64,
{
    let inner_cfg = cfg.with_rel_tol(cfg.rel_tol * 1e-2);
    let failure = Cell::new(None);
    let outer = integrate_adaptive(
        |p| match integrate_adaptive(|q| f(p, q), -half, half, &inner_cfg) {
            Ok(est) => est.value,
            Err(e) => {
                failure.set(Some(e));
                Complex64::new(0.0, 0.0)
            }
        },
        -half,
        half,
        cfg,
    );
    if let Some(e) = failure.take() {
        return Err(e.into());
    }
    Ok(outer?.value)
}

/// Ψ⁽⁰⁾(t, r) by Fourier quadrature of Φ₀ with the kinetic phase:
/// `∫ d³p/(2πħ)³ e^{ip·r/ħ} e^{−ip²t/(2mħ)} Φ₀(p)`.
///
/// Φ₀ separates into transverse and longitudinal factors, which are
/// recovered from Φ₀ itself as slices through p_z = p̄ and p_⊥ = (σ, 0).
pub fn momentum_propagate(pt: &SpacetimePoint, params: &PacketParams, cfg: &QuadratureConfig) -> Result<Complex64> {
    params.validate()?;
    if !(pt.t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {}", pt.t)));
    }
    let (s, m, t) = (params.sigma * HBAR, params.mass, pt.t);
    let half = 12.0 * s;
    let kinetic = |p: f64| -p * p * t / (2.0 * m * HBAR);
    let transverse = nested_2d(
        |px, py| {
            phi0([px, py, params.pbar], params) * Complex64::from_polar(1.0, (px * pt.x + py * pt.y) / HBAR + kinetic(px) + kinetic(py))
        },
        half,
        cfg,
    )?;
    let reference = [s, 0.0];
    let at_centre = phi0([reference[0], reference[1], params.pbar], params);
    // p_z = p̄ + q with the carrier phase p̄z − p̄²t/2m taken out exactly.
    let shift = pt.z - params.pbar * t / m;
    let longitudinal = integrate_adaptive(
        |q| {
            phi0([reference[0], reference[1], params.pbar + q], params) / at_centre
                * Complex64::from_polar(1.0, q * shift / HBAR + kinetic(q))
        },
        -half,
        half,
        cfg,
    )?
    .value;
    let carrier = Complex64::from_polar(1.0, params.pbar * pt.z / HBAR + kinetic(params.pbar));
    Ok(transverse * longitudinal * carrier / (2.0 * PI * HBAR).powi(3))
}

/// Overlap ⟨Ψ_a|Ψ_b⟩ in momentum space, `∫ d³p/(2πħ)³ Φ_a*(p) Φ_b(p)`,
/// by nested quadrature over (p_x, p_y) and a separate p_z integral.
/// Free evolution multiplies both by the same phase, so the overlap is
/// time independent.
pub fn momentum_overlap(a: &PacketParams, b: &PacketParams, cfg: &QuadratureConfig) -> Result<Complex64> {
    a.validate()?;
    b.validate()?;
    let half = 12.0 * a.sigma.max(b.sigma) * HBAR;
    let pz0 = 0.5 * (a.pbar + b.pbar);
    let transverse = nested_2d(|px, py| phi0([px, py, pz0], a).conj() * phi0([px, py, pz0], b), half, cfg)?;
    let reference = [a.sigma * HBAR, 0.0];
    let norm_a = phi0([reference[0], reference[1], pz0], a);
    let norm_b = phi0([reference[0], reference[1], pz0], b);
    let longitudinal = integrate_adaptive(
        |q| {
            let p = [reference[0], reference[1], pz0 + q];
            (phi0(p, a) / norm_a).conj() * (phi0(p, b) / norm_b)
        },
        -half,
        half,
        cfg,
    )?
    .value;
    Ok(transverse * longitudinal / (2.0 * PI * HBAR).powi(3))
}

/// Periodic grid for the spectral oracle.
struct Grid {
    n: usize,
    dx: f64,
    k: Vec<f64>,
}

impl Grid {
    fn new(n: usize, dx: f64) -> Self {
        let k = (0..n)
            .map(|m| {
                let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                2.0 * PI * signed / (n as f64 * dx)
            })
            .collect();
        Self { n, dx, k }
    }

    /// DFT of f sampled on x_j = (j − n/2)dx, reordered so that index 0 is x = 0.
    fn forward(&self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let n = self.n;
        let mut buf: Vec<Complex64> = (0..n).map(|j| f((j as f64 - (n / 2) as f64) * self.dx)).collect();
        buf.rotate_left(n / 2);
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        buf
    }

    /// Band-limited interpolation of a spectrum at an arbitrary x.
    fn eval(&self, spectrum: &[Complex64], x: f64) -> Complex64 {
        let sum: Complex64 = self.k.iter().zip(spectrum).map(|(k, v)| v * Complex64::from_polar(1.0, k * x)).sum();
        sum / self.n as f64
    }
}

/// Spectra of the first-order x-kernels K_j and free-evolved Y_j at one t.
struct SpectralSolution {
    grid: Grid,
    kernels: Vec<Vec<Complex64>>,
    free: Vec<Vec<Complex64>>,
}

impl SpectralSolution {
    /// K_j(t) = −(i/ħ) ∫₀ᵗ dt′ U(t − t′) eφ U(t′) X_j on a periodic grid.
    /// With U diagonal in k, the t′ integral of each mode pair is exact:
    /// `K̂(k) = −(i/ħ) e^{−iE_k t/ħ} (1/n) Σ_q V̂(k − q) X̂(q) (e^{iΔt/ħ} − 1)/(iΔ/ħ)`, Δ = E_k − E_q.
    fn new(t: f64, params: &PacketParams, pert: &XFieldPerturbation, n: usize, dx: f64) -> Self {
        let grid = Grid::new(n, dx);
        let s = params.sigma;
        let m = params.mass;
        let energy = |k: f64| HBAR * HBAR * k * k / (2.0 * m);
        let potential = grid.forward(|x| Complex64::new(params.charge * pert.potential(x), 0.0));
        // X̂_j is negligible beyond |q| = 12σ.
        let support: Vec<usize> = (0..n).filter(|&q| grid.k[q].abs() < 12.0 * s).collect();
        let mut kernels = Vec::new();
        let mut free = Vec::new();
        for j in 0..=params.l {
            let xj = grid.forward(|x| Complex64::new(x.powi(j as i32) * (-0.5 * s * s * x * x).exp(), 0.0));
            let kernel: Vec<Complex64> = (0..n)
                .into_par_iter()
                .map(|kk| {
                    let ek = energy(grid.k[kk]);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &q in &support {
                        let delta = (ek - energy(grid.k[q])) / HBAR;
                        let time_integral = if (delta * t).abs() < 1e-8 {
                            Complex64::new(t, 0.5 * delta * t * t)
                        } else {
                            (Complex64::new(0.0, delta * t).exp() - 1.0) / Complex64::new(0.0, delta)
                        };
                        acc += potential[(kk + n - q) % n] * xj[q] * time_integral;
                    }
                    acc * Complex64::from_polar(1.0 / (HBAR * n as f64), -ek * t / HBAR - 0.5 * PI)
                })
                .collect();
            kernels.push(kernel);
            free.push(xj.iter().zip(&grid.k).map(|(v, &k)| v * Complex64::from_polar(1.0, -energy(k) * t / HBAR)).collect());
        }
        Self { grid, kernels, free }
    }

    /// Transverse factor Σ_j C(l,j) i^{l−j} K_j(x) Y_{l−j}(y).
    fn transverse(&self, x: f64, y: f64, l: u32) -> Complex64 {
        (0..=l)
            .map(|j| {
                let kx = self.grid.eval(&self.kernels[j as usize], x);
                let yv = self.grid.eval(&self.free[(l - j) as usize], y);
                kx * yv * Complex64::new(0.0, 1.0).powi((l - j) as i32) * binomial(l, j)
            })
            .sum()
    }
}

/// First-order x-field correction by an independent route: Ψ₀ is split as
/// Σ_j C(l,j) i^{l−j} X_j(x) X_{l−j}(y) Z(z); only the x factor feels the
/// field. Its first-order Duhamel term is solved spectrally on a periodic
/// grid; y is evolved freely on the same grid and z by direct p_z
/// quadrature. Each oracle is built for one time and evaluated at up to
/// `budget.max_points` points.
pub struct FactorizedOracle {
    t: f64,
    params: PacketParams,
    budget: OracleBudget,
    coarse: SpectralSolution,
    fine: SpectralSolution,
    norm: f64,
    used: Cell<usize>,
}

/// Grid for the coarse solution; the fine one halves the spacing at equal
/// domain length.
const ORACLE_POINTS: usize = 1 << 15;
const ORACLE_SPACING: f64 = 0.25;

impl FactorizedOracle {
    pub fn new(t: f64, params: &PacketParams, pert: &XFieldPerturbation, budget: OracleBudget) -> Result<Self> {
        params.validate()?;
        pert.validate()?;
        budget.validate()?;
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
        }
        let domain = ORACLE_POINTS as f64 * ORACLE_SPACING;
        if domain < 24.0 * params.width(t) + 4.0 * (pert.a.abs() + pert.d) {
            return Err(Error::InvalidParameter("packet too wide for the oracle grid".into()));
        }
        let coarse = SpectralSolution::new(t, params, pert, ORACLE_POINTS, ORACLE_SPACING);
        let fine = SpectralSolution::new(t, params, pert, 2 * ORACLE_POINTS, 0.5 * ORACLE_SPACING);
        let s = params.sigma;
        let norm = (1.5 * s.ln() - 0.75 * PI.ln() - params.ln_sqrt_factorial()).exp() * s.powi(params.l as i32);
        Ok(Self {
            t,
            params: *params,
            budget,
            coarse,
            fine,
            norm,
            used: Cell::new(0),
        })
    }

    pub fn evaluate(&self, pt: &SpacetimePoint) -> Result<Complex64> {
        if pt.t != self.t {
            return Err(Error::InvalidParameter(format!("oracle built for t = {}, asked for t = {}", self.t, pt.t)));
        }
        let used = self.used.get() + 1;
        if used > self.budget.max_points {
            return Err(Error::BudgetExhausted(format!("oracle allows {} points", self.budget.max_points)));
        }
        self.used.set(used);
        let l = self.params.l;
        let coarse = self.coarse.transverse(pt.x, pt.y, l);
        let fine = self.fine.transverse(pt.x, pt.y, l);
        let tol = self.budget.per_point_tol;
        if (fine - coarse).norm() > tol * fine.norm() {
            return Err(Error::Quadrature(QuadError::NonConvergence {
                estimate: fine,
                abs_error: (fine - coarse).norm(),
                tolerance: tol * fine.norm(),
            }));
        }
        let cfg = QuadratureConfig::default().with_rel_tol(tol * 1e-3);
        let z = q_factor_by_quadrature(pt.t, pt.z, &self.params, &cfg)?;
        Ok(fine * z * self.norm)
    }
}

/// One-point convenience wrapper around [`FactorizedOracle`].
pub fn factorized_pt1_oracle(
    pt: &SpacetimePoint,
    params: &PacketParams,
    pert: &XFieldPerturbation,
    budget: OracleBudget,
) -> Result<Complex64> {
    if pert.e0 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    FactorizedOracle::new(pt.t, params, pert, budget)?.evaluate(pt)
}

/// The principal-value prescription by symmetric excision:
/// ∫ h ĝ − 2i ∫_{ε<|ξ|} h/ξ over |ξ| ≤ cutoff, Richardson-extrapolated in ε
/// to remove the leading 2εh′(0) excision error.
pub fn pv_by_symmetric_excision<H>(h: H, cutoff: f64, cfg: &QuadratureConfig) -> Result<Complex64>
where
    H: Fn(f64) -> Complex64,
{
    let regular =
        integrate_adaptive_with_breaks(|x| h(x) * ghat(x), &[-cutoff, -FRAC_PI_2, 0.0, FRAC_PI_2, cutoff], cfg)?.value;
    let excised = |eps: f64| -> Result<Complex64> {
        let over = |x: f64| h(x) / x;
        let left = integrate_adaptive_with_breaks(over, &[-cutoff, -1.0, -eps], cfg)?.value;
        let right = integrate_adaptive_with_breaks(over, &[eps, 1.0, cutoff], cfg)?.value;
        Ok(left + right)
    };
    let eps = 1e-3;
    let pv = excised(0.5 * eps)? * 2.0 - excised(eps)?;
    Ok(regular - Complex64::new(0.0, 2.0) * pv)
}
