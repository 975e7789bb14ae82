mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use vpl_core::numerics::{integrate_adaptive, integrate_pv_kernel};
use vpl_core::oracles::pv_by_symmetric_excision;
use vpl_core::xfield_pt::ghat;
use vpl_core::QuadratureConfig;

use common::{proptest_config, rng};

/// (a + bξ + cξ²) e^{−(ξ−μ)²/(2s²)}
#[derive(Debug, Clone, Copy)]
struct GaussPoly {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    mu: f64,
    s: f64,
}

impl GaussPoly {
    fn random(r: &mut impl Rng) -> Self {
        let mut c = || Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let (a, b, cc) = (c(), c(), c());
        Self {
            a,
            b,
            c: cc,
            mu: r.gen_range(-2.0..2.0),
            s: r.gen_range(0.5..3.0),
        }
    }

    fn eval(&self, x: f64) -> Complex64 {
        let d = x - self.mu;
        (self.a + self.b * x + self.c * x * x) * (-d * d / (2.0 * self.s * self.s)).exp()
    }
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default().with_rel_tol(1e-12)
}

#[test]
fn pv_kernel_matches_symmetric_oracle() {
    let mut r = rng(3);
    let mut cases: Vec<Box<dyn Fn(f64) -> Complex64>> =
        vec![Box::new(|x: f64| Complex64::new(x * (-x * x).exp(), 0.0))];
    for _ in 0..2 {
        let g = GaussPoly::random(&mut r);
        cases.push(Box::new(move |x| g.eval(x)));
    }
    let c = cfg();
    for (k, h) in cases.iter().enumerate() {
        let got = integrate_pv_kernel(h, &c).unwrap();
        let want = pv_by_symmetric_excision(h, c.xi_cutoff, &c).unwrap();
        assert!(!got.tail_warning);
        let err = (got.estimate.value - want).norm();
        assert!(err <= 1e-8 * want.norm().max(1.0), "case {k}: {} vs {want}", got.estimate.value);
    }
}

#[test]
fn ghat_special_values() {
    let at_half_pi = ghat(FRAC_PI_2);
    let expected = Complex64::new(0.0, (4.0 - PI) / PI);
    assert!((at_half_pi - expected).norm() <= 1e-10);
    let eta = 1e-6;
    let slope = ghat(eta) / eta;
    let expected = Complex64::new(0.0, (PI * PI - 8.0) / (PI * PI));
    assert!((slope - expected).norm() <= 1e-8);
    for eta in [0.0, 1e-9, 0.3, FRAC_PI_2, 2.0, 17.5] {
        assert_eq!(ghat(-eta), -ghat(eta));
    }
}

#[test]
fn pv_kernel_is_stable_under_cutoff_doubling() {
    let g = GaussPoly::random(&mut rng(8));
    let h = |x: f64| g.eval(x);
    let base = cfg();
    let a = integrate_pv_kernel(h, &base).unwrap();
    let b = integrate_pv_kernel(h, &QuadratureConfig { xi_cutoff: 2.0 * base.xi_cutoff, ..base }).unwrap();
    assert!(!a.tail_warning);
    let diff = (a.estimate.value - b.estimate.value).norm();
    assert!(diff <= base.rel_tol * a.estimate.value.norm().max(1e-3));
}

fn smooth(amp: Complex64, centre: f64, freq: f64) -> impl Fn(f64) -> Complex64 {
    move |x: f64| amp * Complex64::from_polar((-(x - centre) * (x - centre)).exp(), freq * x)
}

proptest! {
    #![proptest_config(proptest_config(48))]

    #[test]
    fn integration_is_linear(
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        c1 in -2.0f64..2.0,
        c2 in -2.0f64..2.0,
        k1 in 0.0f64..3.0,
        k2 in 0.0f64..3.0,
    ) {
        let c = QuadratureConfig::default().with_rel_tol(1e-10);
        let f = smooth(Complex64::new(1.0, 0.5), c1, k1);
        let g = smooth(Complex64::new(-0.3, 1.0), c2, k2);
        let (a, b) = (-10.0, 10.0);
        let i_f = integrate_adaptive(&f, a, b, &c).unwrap().value;
        let i_g = integrate_adaptive(&g, a, b, &c).unwrap().value;
        let i_sum = integrate_adaptive(|x| f(x) * alpha + g(x) * beta, a, b, &c).unwrap().value;
        let scale = (i_f * alpha).norm() + (i_g * beta).norm();
        prop_assert!((i_sum - (i_f * alpha + i_g * beta)).norm() <= 10.0 * c.rel_tol * scale + c.abs_tol);
    }

    #[test]
    fn halving_tolerance_moves_value_within_error_estimate(
        centre in -2.0f64..2.0,
        freq in 0.0f64..8.0,
        tol_exp in 4.0f64..10.0,
    ) {
        let f = smooth(Complex64::new(0.7, -0.2), centre, freq);
        let coarse_cfg = QuadratureConfig::default().with_rel_tol(10f64.powf(-tol_exp));
        let fine_cfg = coarse_cfg.with_rel_tol(0.5 * coarse_cfg.rel_tol);
        let coarse = integrate_adaptive(&f, -8.0, 8.0, &coarse_cfg).unwrap();
        let fine = integrate_adaptive(&f, -8.0, 8.0, &fine_cfg).unwrap();
        prop_assert!((fine.value - coarse.value).norm() <= coarse.abs_error.max(f64::EPSILON * coarse.value.norm()));
    }

    #[test]
    fn pv_of_real_odd_function_is_imaginary(
        c1 in -2.0f64..2.0,
        c3 in -2.0f64..2.0,
        s in 0.5f64..4.0,
    ) {
        let h = |x: f64| Complex64::new((c1 * x + c3 * x * x * x) * (-x * x / (s * s)).exp(), 0.0);
        let c = QuadratureConfig::default();
        let v = integrate_pv_kernel(h, &c).unwrap().estimate.value;
        prop_assert!(v.re.abs() <= c.abs_tol, "{}", v);
    }
}
