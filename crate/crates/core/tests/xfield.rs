mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use vpl_core::field_analysis::{check_symmetry, evaluate_map, first_order_inversion_factor, GridSpec, Parity};
use vpl_core::lg_core::q_factor;
use vpl_core::model::{Component, Model, Perturbation};
use vpl_core::oracles::{FactorizedOracle, OracleBudget};
use vpl_core::xfield_pt::{
    alpha, i_l_kernel, psi1_xfield, psi1_xfield_detailed, xi_closed_form, xi_double_sum, XFieldColumn,
    XFieldPerturbation,
};
use vpl_core::{PacketParams, QuadratureConfig, SpacetimePoint};

use common::{proptest_config, rel, rng};

const T: f64 = 3500.0;

fn model(l: u32, pert: XFieldPerturbation) -> Model {
    Model::new(PacketParams::figure(l), Perturbation::XField(pert), QuadratureConfig::default()).unwrap()
}

fn probe(l: u32, x: f64, y: f64) -> SpacetimePoint {
    SpacetimePoint::new(T, x, y, PacketParams::figure(l).center_z(T))
}

// ξ chosen so that β = x − ξ(t − t′)/d lands where the Gaussian factor is
// not negligible, |βσ| ≤ 8.
fn xi_for_beta(x: f64, beta: f64, t: f64, tp: f64, d: f64) -> f64 {
    (x - beta) * d / (t - tp)
}

#[test]
fn xi_closed_form_equals_double_sum() {
    let mut r = rng(21);
    let d = 10.0;
    for l in 1u32..=8 {
        let p = PacketParams::figure(l);
        let reach = 8.0 / p.sigma;
        for _ in 0..100 {
            let t = r.gen_range(1.0..5000.0);
            let tp = r.gen_range(0.0..0.99 * t);
            let (x, y) = (r.gen_range(-200.0..200.0), r.gen_range(-200.0..200.0));
            let xi = xi_for_beta(x, r.gen_range(-reach..reach), t, tp, d);
            let a = xi_closed_form(t, tp, x, y, xi, &p, d);
            let b = xi_double_sum(t, tp, x, y, xi, &p, d);
            assert!(b.norm() > 0.0);
            assert!(rel(a, b) <= 1e-10, "l={l} {a} vs {b}");
        }
    }
}

// Composite trapezoid on n panels, then one Richardson step against n/2.
fn richardson_trapezoid(f: &dyn Fn(f64) -> Complex64, t: f64, n: usize) -> Complex64 {
    let trap = |n: usize| {
        let h = t / n as f64;
        let mut s = (f(0.0) + f(t)) * 0.5;
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h
    };
    (trap(n) * 4.0 - trap(n / 2)) / 3.0
}

#[test]
fn tau_kernel_matches_trapezoid_reference() {
    let d = 10.0;
    for (l, t, x, y, xi) in [(3u32, 3500.0, 30.0, -20.0, 2.5), (1, 1000.0, -60.0, 5.0, -7.0), (5, 3500.0, 0.0, 40.0, 0.3)] {
        let p = PacketParams::figure(l);
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
        let got = i_l_kernel(t, x, y, xi, &p, d, &cfg).unwrap().value;
        let a = alpha(t, &p);
        let slope = xi / d;
        let f = |tau: f64| {
            let exponent = -(xi * xi * tau * tau) / (a * 4.0 * d * d)
                + (Complex64::new(x, 0.0) / a - Complex64::new(0.0, slope)) * (xi / (2.0 * d)) * tau;
            exponent.exp() * (Complex64::new(x, y) - slope * tau).powi(l as i32)
        };
        let want = richardson_trapezoid(&f, t, 40_000);
        assert!(rel(got, want) <= 1e-8, "l={l} xi={xi}: {got} vs {want}");
    }
}

#[test]
fn first_order_map_has_point_parity() {
    for l in 1u32..=4 {
        let m = model(l, XFieldPerturbation::figure());
        let w = m.params.width(T);
        let g = GridSpec::centered(1.5 * w, 41, T, m.params.center_z(T), Component::First);
        let map = evaluate_map(&g, &m).unwrap();
        let dev = check_symmetry(&map, Parity::Inversion, first_order_inversion_factor(l)).unwrap();
        assert!(dev <= 1e-6, "l={l} deviation {dev:e}");
    }
}

#[test]
fn off_centre_ramp_breaks_parity() {
    let m = model(1, XFieldPerturbation { a: 5.0, ..XFieldPerturbation::figure() });
    let w = m.params.width(T);
    let g = GridSpec::centered(1.5 * w, 21, T, m.params.center_z(T), Component::First);
    let map = evaluate_map(&g, &m).unwrap();
    let dev = check_symmetry(&map, Parity::Inversion, first_order_inversion_factor(1)).unwrap();
    assert!(dev > 1e-3, "deviation {dev:e}");
}

#[test]
fn even_l_correction_vanishes_on_axis() {
    for l in [2u32, 4] {
        let p = PacketParams::figure(l);
        let pert = XFieldPerturbation::figure();
        let cfg = QuadratureConfig::default();
        let column = XFieldColumn::new(T, 0.0, &p, &pert, &cfg).unwrap();
        let w = p.width(T);
        let scale = (1..=8)
            .map(|k| column.eval(0.25 * k as f64 * w, p.center_z(T)).value.norm())
            .fold(0.0, f64::max);
        let centre = psi1_xfield(&probe(l, 0.0, 0.0), &p, &pert, &cfg).unwrap();
        assert!(scale > 0.0);
        assert!(centre.norm() <= 1e-12 * scale, "l={l} |psi1(0)|={:e}", centre.norm());
    }
}

#[test]
fn correction_is_linear_in_field_strength() {
    let p = PacketParams::figure(2);
    let cfg = QuadratureConfig::default();
    let base = XFieldPerturbation::figure();
    for (x, y) in [(40.0, -25.0), (-90.0, 10.0)] {
        let pt = probe(2, x, y);
        let one = psi1_xfield(&pt, &p, &base, &cfg).unwrap();
        for k in [2.0, 3.0, -0.5] {
            let scaled = psi1_xfield(&pt, &p, &XFieldPerturbation { e0: k * base.e0, ..base }, &cfg).unwrap();
            assert!(rel(scaled, one * k) <= 1e-13);
        }
    }
}

#[test]
fn z_dependence_follows_longitudinal_profile() {
    let p = PacketParams::figure(3);
    let column = XFieldColumn::new(T, 35.0, &p, &XFieldPerturbation::figure(), &QuadratureConfig::default()).unwrap();
    let zc = p.center_z(T);
    for y in [-50.0, 12.0] {
        let (z1, z2) = (zc - 40.0, zc + 75.0);
        let lhs = column.eval(y, z1).value / column.eval(y, z2).value;
        let rhs = q_factor(T, z1, &p) / q_factor(T, z2, &p);
        assert!(rel(lhs, rhs) <= 1e-10);
    }
}

#[test]
fn doubling_xi_cutoff_leaves_values_unchanged() {
    let pert = XFieldPerturbation::figure();
    let base = QuadratureConfig::default();
    let doubled = QuadratureConfig { xi_cutoff: 2.0 * base.xi_cutoff, ..base };
    let points = [(1u32, 60.0, -40.0), (1, -10.0, 90.0), (2, 25.0, 25.0), (3, -70.0, -5.0), (5, 100.0, 60.0)];
    for (l, x, y) in points {
        let p = PacketParams::figure(l);
        let pt = probe(l, x, y);
        let a = psi1_xfield_detailed(&pt, &p, &pert, &base).unwrap();
        let b = psi1_xfield(&pt, &p, &pert, &doubled).unwrap();
        assert!(!a.tail_warning);
        assert!(rel(b, a.value) <= base.rel_tol, "l={l} ({x}, {y}): {:e}", rel(b, a.value));
    }
}

#[test]
fn closed_form_agrees_with_factorized_oracle() {
    let p = PacketParams::figure(1);
    let pert = XFieldPerturbation::figure();
    let cfg = QuadratureConfig::default();
    let oracle = FactorizedOracle::new(T, &p, &pert, OracleBudget::default()).unwrap();
    for (x, y, dz) in [(50.0, 30.0, 10.0), (-120.0, 15.0, 0.0)] {
        let pt = SpacetimePoint::new(T, x, y, p.center_z(T) + dz);
        let want = oracle.evaluate(&pt).unwrap();
        let got = psi1_xfield(&pt, &p, &pert, &cfg).unwrap();
        assert!(rel(got, want) <= 1e-6, "({x}, {y}): {:e}", rel(got, want));
    }
    // The oracle is itself linear in E₀.
    let doubled = XFieldPerturbation { e0: 2.0 * pert.e0, ..pert };
    let other = FactorizedOracle::new(T, &p, &doubled, OracleBudget::default()).unwrap();
    let pt = probe(1, 50.0, 30.0);
    let (a, b) = (oracle.evaluate(&pt).unwrap(), other.evaluate(&pt).unwrap());
    assert!(rel(b, a * 2.0) <= 1e-12);
}

proptest! {
    #![proptest_config(proptest_config(64))]

    #[test]
    fn xi_identity_holds_for_random_inputs(
        l in 1u32..=8,
        t in 1.0f64..5000.0,
        frac in 0.0f64..0.99,
        x in -200.0f64..200.0,
        y in -200.0f64..200.0,
        beta_sigma in -8.0f64..8.0,
        d in 1.0f64..30.0,
    ) {
        let p = PacketParams::figure(l);
        let xi = xi_for_beta(x, beta_sigma / p.sigma, t, frac * t, d);
        let a = xi_closed_form(t, frac * t, x, y, xi, &p, d);
        let b = xi_double_sum(t, frac * t, x, y, xi, &p, d);
        prop_assert!(b.norm() > 0.0);
        prop_assert!(rel(a, b) <= 1e-10, "{} vs {}", a, b);
    }
}
