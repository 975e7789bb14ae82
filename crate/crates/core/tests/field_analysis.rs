use vpl_core::delta_pt::DeltaPerturbation;
use vpl_core::field_analysis::{
    evaluate_map, find_zeros, nodal_lines, read_binary, read_csv, ring_maxima, winding_on_circle, write_binary,
    write_csv, FieldMap, GridSpec, NodalSet, Part, VortexSet, ZeroSearch,
};
use vpl_core::model::{Component, Model, Perturbation};
use vpl_core::xfield_pt::XFieldPerturbation;
use vpl_core::{PacketParams, QuadratureConfig};

const T: f64 = 3500.0;

fn xfield_model(l: u32) -> Model {
    Model::new(PacketParams::figure(l), Perturbation::XField(XFieldPerturbation::figure()), QuadratureConfig::default())
        .unwrap()
}

fn delta_model(l: u32) -> Model {
    Model::new(
        PacketParams::figure(l),
        Perturbation::Delta(DeltaPerturbation::figure(l).unwrap()),
        QuadratureConfig::default(),
    )
    .unwrap()
}

fn total_map(model: &Model, half_widths: f64, n: usize) -> FieldMap {
    let w = model.params.width(T);
    let g = GridSpec::centered(half_widths * w, n, T, model.params.center_z(T), Component::Total);
    evaluate_map(&g, model).unwrap()
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let map = total_map(&delta_model(2), 2.0, 17);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    write_csv(&map, &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back, map);
    // Rewriting yields identical bytes.
    let again = dir.path().join("again.csv");
    write_csv(&back, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn binary_round_trip_is_bit_exact() {
    let map = total_map(&delta_model(3), 2.0, 15);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.bin");
    write_binary(&map, &path).unwrap();
    assert!(path.with_extension("json").exists());
    assert_eq!(read_binary(&path).unwrap(), map);
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 16 * 15 * 15);
}

#[test]
fn map_evaluation_is_deterministic() {
    let model = delta_model(4);
    let a = total_map(&model, 2.0, 21);
    let b = total_map(&model, 2.0, 21);
    assert_eq!(a.fingerprint, b.fingerprint);
    assert_eq!(a.content_hash(), b.content_hash());
}

#[test]
fn xfield_zeros_are_refined_and_charged() {
    let model = xfield_model(1);
    let map = total_map(&model, 1.5, 41);
    let zeros = find_zeros(&map, &ZeroSearch::default()).unwrap();
    assert_eq!(zeros.stalled, 0);
    assert_eq!(zeros.total_charge(), 1);
    for z in &zeros.zeros {
        assert!(z.residual <= 1e-8 * zeros.map_max, "{z:?}");
    }
    let json = serde_json::to_string(&zeros).unwrap();
    assert_eq!(serde_json::from_str::<VortexSet>(&json).unwrap(), zeros);
}

#[test]
fn total_charge_is_conserved_on_a_wide_circle() {
    for model in [delta_model(3), xfield_model(2)] {
        let w = model.params.width(T);
        let winding =
            winding_on_circle(&model, T, model.params.center_z(T), Component::Total, [0.0, 0.0], 3.0 * w).unwrap();
        assert_eq!(winding.charge, i64::from(model.params.l));
    }
}

#[test]
fn delta_density_ring_has_l_maxima() {
    let model = delta_model(3);
    let maxima = ring_maxima(&model, T, model.params.center_z(T), Component::Total, 360).unwrap();
    assert_eq!(maxima.len(), 3, "{maxima:?}");
}

#[test]
fn nodal_set_serializes() {
    let map = total_map(&xfield_model(1), 1.5, 21);
    let set = NodalSet {
        real: nodal_lines(&map, Part::Real),
        imag: nodal_lines(&map, Part::Imag),
        fingerprint: map.fingerprint.clone(),
    };
    assert!(!set.real.is_empty() && !set.imag.is_empty());
    let json = serde_json::to_string(&set).unwrap();
    assert_eq!(serde_json::from_str::<NodalSet>(&json).unwrap(), set);
}
