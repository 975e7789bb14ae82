//! The `run` command: evaluate maps, extract topology, write artifacts.
//!
//! Everything is computed first; files are written single-threaded at the
//! end, followed by the manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vpl_core::field_analysis::{
    check_symmetry, evaluate_map, find_zeros, first_order_inversion_factor, fingerprint, nodal_lines, ring_maxima,
    winding_on_circle, write_binary, write_csv, FieldMap, NodalSet, Parity, Part, VortexSet,
};
use vpl_core::model::{Component, Perturbation};

use crate::error::Result;
use crate::scenario::{Output, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MapFormat {
    #[default]
    Csv,
    Binary,
}

pub fn component_name(c: Component) -> &'static str {
    match c {
        Component::Zeroth => "zeroth",
        Component::First => "first",
        Component::Total => "total",
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryEntry {
    pub component: String,
    /// Expected factor under (x, y) → (−x, −y).
    pub factor: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub component: String,
    pub map_max: f64,
    pub zero_count: Option<usize>,
    pub total_charge: Option<i64>,
    pub stalled: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub components: Vec<ComponentSummary>,
    /// Winding of the total wave function on the circle of radius 3σ_⊥(t).
    pub winding_3_sigma_perp: Option<i64>,
    pub winding_error: Option<String>,
    /// Azimuthal maxima of the total density ring (delta perturbation).
    pub ring_maxima: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub source: String,
    pub scenario: Scenario,
    pub format: MapFormat,
    pub workers: usize,
    pub fingerprints: BTreeMap<String, String>,
    pub artifacts: Vec<ArtifactRecord>,
    pub timings: BTreeMap<String, f64>,
    pub summary: Summary,
}

/// Results of a run held in memory until they are written.
pub struct RunResult {
    pub maps: Vec<FieldMap>,
    pub nodal: Vec<(Component, NodalSet)>,
    pub zeros: Vec<(Component, VortexSet)>,
    pub symmetry: Vec<SymmetryEntry>,
    pub summary: Summary,
    pub timings: BTreeMap<String, f64>,
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, key: String, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    timings.insert(key, start.elapsed().as_secs_f64());
    Ok(out)
}

/// Maps of every requested component. The total is assembled from the
/// other two when both are needed, which is bit-identical to evaluating
/// it directly.
pub fn component_maps(scenario: &Scenario, timings: &mut BTreeMap<String, f64>) -> Result<Vec<FieldMap>> {
    let model = &scenario.model;
    let wants = |c| scenario.components.contains(&c);
    let composable = !matches!(model.perturbation, Perturbation::Homogeneous(_));
    let compose_total = composable && wants(Component::Total);
    let mut computed: BTreeMap<&'static str, FieldMap> = BTreeMap::new();
    for c in [Component::Zeroth, Component::First] {
        if wants(c) || compose_total {
            let grid = scenario.grid.with_component(c);
            let map = timed(timings, format!("map_{}", component_name(c)), || Ok(evaluate_map(&grid, model)?))?;
            computed.insert(component_name(c), map);
        }
    }
    if wants(Component::Total) {
        let map = if compose_total {
            let (zeroth, first) = (&computed["zeroth"], &computed["first"]);
            let mut total = zeroth.zip_with(first, |a, b| a + b)?;
            total.grid = total.grid.with_component(Component::Total);
            total.fingerprint = fingerprint(&total.grid, model);
            total
        } else {
            let grid = scenario.grid.with_component(Component::Total);
            timed(timings, "map_total".into(), || Ok(evaluate_map(&grid, model)?))?
        };
        computed.insert("total", map);
    }
    Ok(scenario
        .components
        .iter()
        .map(|&c| computed[component_name(c)].clone())
        .collect())
}

pub fn execute(scenario: &Scenario) -> Result<RunResult> {
    let mut timings = BTreeMap::new();
    let maps = component_maps(scenario, &mut timings)?;
    let model = &scenario.model;
    let l = model.params.l;

    let mut nodal = Vec::new();
    let mut zeros = Vec::new();
    let mut symmetry = Vec::new();
    let mut components = Vec::new();
    for map in &maps {
        let c = map.grid.which;
        let name = component_name(c);
        if scenario.wants(Output::Nodal) {
            let set = NodalSet {
                real: nodal_lines(map, Part::Real),
                imag: nodal_lines(map, Part::Imag),
                fingerprint: map.fingerprint.clone(),
            };
            nodal.push((c, set));
        }
        let mut summary = ComponentSummary {
            component: name.into(),
            map_max: map.max_abs(),
            zero_count: None,
            total_charge: None,
            stalled: None,
        };
        if scenario.wants(Output::Zeros) {
            let set = timed(&mut timings, format!("zeros_{name}"), || Ok(find_zeros(map, &scenario.zeros)?))?;
            info!("{name}: {} zeros, total charge {}", set.zeros.len(), set.total_charge());
            summary.zero_count = Some(set.zeros.len());
            summary.total_charge = Some(set.total_charge());
            summary.stalled = Some(set.stalled);
            zeros.push((c, set));
        }
        if scenario.wants(Output::SymmetryReport) {
            // Ψ⁽⁰⁾ and Ψ⁽¹⁾ carry opposite factors, so the total has none.
            let factor = match c {
                Component::Zeroth => Some(-first_order_inversion_factor(l)),
                Component::First => Some(first_order_inversion_factor(l)),
                Component::Total => None,
            };
            if let Some(factor) = factor {
                let deviation = check_symmetry(map, Parity::Inversion, factor)?;
                symmetry.push(SymmetryEntry {
                    component: name.into(),
                    factor,
                    deviation,
                });
            }
        }
        components.push(summary);
    }

    let mut summary = Summary {
        components,
        winding_3_sigma_perp: None,
        winding_error: None,
        ring_maxima: None,
    };
    if scenario.components.contains(&Component::Total) {
        let g = &scenario.grid;
        let radius = 3.0 * model.params.width(g.t);
        let start = Instant::now();
        match winding_on_circle(model, g.t, g.z, Component::Total, [0.0, 0.0], radius) {
            Ok(w) => summary.winding_3_sigma_perp = Some(w.charge),
            Err(e) => summary.winding_error = Some(e.to_string()),
        }
        timings.insert("winding".into(), start.elapsed().as_secs_f64());
        if matches!(model.perturbation, Perturbation::Delta(_)) && scenario.wants(Output::DensityMap) {
            let maxima = timed(&mut timings, "ring_maxima".into(), || {
                Ok(ring_maxima(model, g.t, g.z, Component::Total, 360)?)
            })?;
            summary.ring_maxima = Some(maxima.len());
        }
    }
    Ok(RunResult {
        maps,
        nodal,
        zeros,
        symmetry,
        summary,
        timings,
    })
}

fn record(dir: &Path, name: &str) -> Result<ArtifactRecord> {
    let bytes = std::fs::read(dir.join(name))?;
    Ok(ArtifactRecord {
        path: name.into(),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

/// Writes every artifact of a finished run, then the manifest.
pub fn write_outputs(
    scenario: &Scenario,
    source: &str,
    result: RunResult,
    format: MapFormat,
    out: &Path,
) -> Result<Manifest> {
    std::fs::create_dir_all(out)?;
    let mut names = Vec::new();
    let mut fingerprints = BTreeMap::new();
    let write_maps = scenario.wants(Output::DensityMap) || scenario.wants(Output::PhaseMap);
    for map in &result.maps {
        let name = component_name(map.grid.which);
        fingerprints.insert(name.to_string(), map.fingerprint.clone());
        if write_maps {
            match format {
                MapFormat::Csv => {
                    let file = format!("map_{name}.csv");
                    write_csv(map, &out.join(&file))?;
                    names.push(file);
                }
                MapFormat::Binary => {
                    let file = format!("map_{name}.bin");
                    write_binary(map, &out.join(&file))?;
                    names.push(file);
                    names.push(format!("map_{name}.json"));
                }
            }
        }
    }
    for (c, set) in &result.nodal {
        let file = format!("nodal_{}.json", component_name(*c));
        write_json(out, &file, set)?;
        names.push(file);
    }
    for (c, set) in &result.zeros {
        let file = format!("zeros_{}.json", component_name(*c));
        write_json(out, &file, set)?;
        names.push(file);
    }
    if scenario.wants(Output::SymmetryReport) {
        write_json(out, "symmetry.json", &result.symmetry)?;
        names.push("symmetry.json".into());
    }
    let artifacts = names.iter().map(|n| record(out, n)).collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        tool: "vpl",
        version: env!("CARGO_PKG_VERSION"),
        source: source.to_string(),
        scenario: scenario.clone(),
        format,
        workers: rayon::current_num_threads(),
        fingerprints,
        artifacts,
        timings: result.timings,
        summary: result.summary,
    };
    write_json(out, "manifest.json", &manifest)?;
    Ok(manifest)
}

/// Loads, executes and writes one scenario.
pub fn run(spec: &str, rel_tol: Option<f64>, format: MapFormat, out: &Path) -> Result<Manifest> {
    let mut scenario = Scenario::load(spec)?;
    if let Some(tol) = rel_tol {
        scenario.model.quadrature.rel_tol = tol;
        scenario.model.validate().map_err(|e| crate::error::CliError::Config(format!("--tol: {e}")))?;
    }
    info!("running {} into {}", scenario.name, out.display());
    let result = execute(&scenario)?;
    write_outputs(&scenario, spec, result, format, out)
}

pub fn default_out_dir(scenario: &str) -> PathBuf {
    let stem = Path::new(scenario).file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    PathBuf::from("out").join(stem)
}
