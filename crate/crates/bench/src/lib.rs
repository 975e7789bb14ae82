//! Shared fixtures for the benchmarks: figure parameters at t = 3500.

use vpl_core::delta_pt::DeltaPerturbation;
use vpl_core::field_analysis::GridSpec;
use vpl_core::model::{Component, Model, Perturbation};
use vpl_core::xfield_pt::XFieldPerturbation;
use vpl_core::{PacketParams, QuadratureConfig, SpacetimePoint};

pub const T: f64 = 3500.0;

/// A point on the density ring, away from the axes.
pub fn ring_point(params: &PacketParams) -> SpacetimePoint {
    SpacetimePoint::from_polar(T, params.width(T), 0.7, params.center_z(T))
}

pub fn delta_model(l: u32) -> Model {
    let pert = DeltaPerturbation::figure(l).expect("figure coupling exists for l <= 8");
    Model::new(PacketParams::figure(l), Perturbation::Delta(pert), QuadratureConfig::default()).expect("valid")
}

pub fn xfield_model(l: u32) -> Model {
    Model::new(PacketParams::figure(l), Perturbation::XField(XFieldPerturbation::figure()), QuadratureConfig::default())
        .expect("valid")
}

/// Square grid of n×n points over ±1.5σ_⊥.
pub fn grid(model: &Model, n: usize, which: Component) -> GridSpec {
    let w = model.params.width(T);
    GridSpec::centered(1.5 * w, n, T, model.params.center_z(T), which)
}
