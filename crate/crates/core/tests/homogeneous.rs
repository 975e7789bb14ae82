mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use vpl_core::homogeneous::{gauge_chain, psi_homogeneous, HomogeneousField};
use vpl_core::lg_core::{psi_free, HBAR};
use vpl_core::numerics::integrate_adaptive;
use vpl_core::{PacketParams, QuadratureConfig, SpacetimePoint};

use common::rng;

fn fields() -> Vec<HomogeneousField> {
    vec![
        HomogeneousField::Constant { e0: 1e-4 },
        HomogeneousField::Sinusoid { e0: 3e-4, omega: 0.05 },
        HomogeneousField::Tabulated {
            times: vec![0.0, 40.0, 90.0, 400.0],
            values: vec![0.0, 2e-4, -1e-4, 5e-5],
        },
    ]
}

#[test]
fn density_is_the_shifted_free_density() {
    let mut r = rng(17);
    for field in fields() {
        for _ in 0..10 {
            let l = r.gen_range(1..=8);
            let p = PacketParams::figure(l);
            let t = r.gen_range(0.0..3500.0);
            let w = p.width(t);
            let s = field.displacement(t, &p);
            let pt = SpacetimePoint::new(
                t,
                s + r.gen_range(-2.0..2.0) * w,
                r.gen_range(-2.0..2.0) * w,
                p.center_z(t) + r.gen_range(-1.0..1.0) * w,
            );
            let lhs = psi_homogeneous(&pt, &p, &field).unwrap().norm_sqr();
            let rhs = psi_free(&SpacetimePoint::new(t, pt.x - s, pt.y, pt.z), &p).norm_sqr();
            assert!(((lhs - rhs) / rhs).abs() <= 1e-12, "{field:?} {pt:?}");
        }
    }
}

#[test]
fn gauge_factors_are_unimodular() {
    let mut r = rng(19);
    let p = PacketParams::figure(2);
    for field in fields() {
        for _ in 0..10 {
            let pt = SpacetimePoint::new(r.gen_range(0.0..4000.0), r.gen_range(-300.0..300.0), 1.0, 0.0);
            let chain = gauge_chain(&pt, &p, &field).unwrap();
            assert!((chain.gauge.norm() - 1.0).abs() <= 4.0 * f64::EPSILON);
            assert!((chain.square.norm() - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }
}

#[test]
fn norm_is_conserved() {
    let cfg = QuadratureConfig::default().with_rel_tol(1e-11);
    let p = PacketParams::figure(3);
    for field in fields() {
        let t = 300.0;
        let w = p.width(t);
        let s = field.displacement(t, &p);
        let zc = p.center_z(t);
        // The density is symmetric about the displaced axis x = s, y = 0.
        let radial = |rho: f64| {
            let line = integrate_adaptive(
                |z| {
                    let v = psi_homogeneous(&SpacetimePoint::new(t, s + rho, 0.0, z), &p, &field).unwrap();
                    Complex64::new(v.norm_sqr(), 0.0)
                },
                zc - 12.0 * w,
                zc + 12.0 * w,
                &cfg,
            )
            .unwrap();
            line.value * rho
        };
        let n = 2.0 * PI * integrate_adaptive(radial, 0.0, 12.0 * w, &cfg).unwrap().value.re;
        assert!((n - 1.0).abs() <= 1e-6, "{field:?}: {n}");
    }
}

// Fourth-order central differences: the packet carries a phase turning at
// about p̄²/(2mħ) ≈ 73 per unit time, for which the three-point time
// derivative with step 1e−3 is only accurate to about 1e−3.
fn d1(f: &dyn Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    (f(x - 2.0 * h) - f(x + 2.0 * h) + (f(x + h) - f(x - h)) * 8.0) / (12.0 * h)
}

fn d2(f: &dyn Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    ((f(x + h) + f(x - h)) * 16.0 - (f(x + 2.0 * h) + f(x - 2.0 * h)) - f(x) * 30.0) / (12.0 * h * h)
}

#[test]
fn satisfies_schrodinger_equation() {
    let field = HomogeneousField::Constant { e0: 1e-4 };
    let p = PacketParams::figure(1);
    let t = 100.0;
    let h = 1e-3;
    let w = p.width(t);
    let s = field.displacement(t, &p);
    let zc = p.center_z(t);
    let psi = |t: f64, x: f64, y: f64, z: f64| psi_homogeneous(&SpacetimePoint::new(t, x, y, z), &p, &field).unwrap();
    let (mut res2, mut h2) = (0.0, 0.0);
    let axis = |k: usize| -2.0 * w + 4.0 * w * k as f64 / 20.0;
    for i in 0..21 {
        for j in 0..21 {
            for k in 0..21 {
                let (x, y, z) = (s + axis(i), axis(j), zc + axis(k));
                let dt = d1(&|tt| psi(tt, x, y, z), t, h);
                let lap = d2(&|xx| psi(t, xx, y, z), x, h)
                    + d2(&|yy| psi(t, x, yy, z), y, h)
                    + d2(&|zz| psi(t, x, y, zz), z, h);
                let potential = p.charge * (-field.field(t) * x);
                let h_psi = lap * (-HBAR * HBAR / (2.0 * p.mass)) + psi(t, x, y, z) * potential;
                let residual = dt * Complex64::new(0.0, HBAR) - h_psi;
                res2 += residual.norm_sqr();
                h2 += h_psi.norm_sqr();
            }
        }
    }
    let ratio = (res2 / h2).sqrt();
    assert!(ratio <= 1e-4, "residual ratio {ratio:e}");
}
