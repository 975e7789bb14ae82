//! Scenario files: a TOML document with `[packet]`, `[perturbation]`,
//! `[grid]`, optional `[quadrature]` and `[zeros]` sections, and a
//! top-level `outputs` list.
//!
//! Quantities are in atomic units unless the key carries a unit suffix
//! (`energy_keV`, `E0_V_per_m`, `values_V_per_m`); those are converted at
//! parse time.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vpl_core::delta_pt::{DeltaNormalization, DeltaPerturbation};
use vpl_core::field_analysis::{GridSpec, ZeroSearch};
use vpl_core::homogeneous::HomogeneousField;
use vpl_core::lg_core::{field_au_from_v_per_m, pbar_from_energy_kev};
use vpl_core::model::{Component, Model, Perturbation};
use vpl_core::xfield_pt::XFieldPerturbation;
use vpl_core::{PacketParams, QuadratureConfig};

use crate::error::{CliError, Result};

/// Artifacts a run can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    DensityMap,
    PhaseMap,
    Nodal,
    Zeros,
    SymmetryReport,
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub model: Model,
    /// Grid of the first requested component; the others share it.
    pub grid: GridSpec,
    pub components: Vec<Component>,
    pub outputs: Vec<Output>,
    pub zeros: ZeroSearch,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    outputs: Vec<Output>,
    packet: RawPacket,
    perturbation: RawPerturbation,
    grid: RawGrid,
    #[serde(default)]
    quadrature: QuadratureConfig,
    #[serde(default)]
    zeros: ZeroSearch,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    l: u32,
    sigma: f64,
    #[serde(rename = "energy_keV")]
    energy_kev: Option<f64>,
    pbar: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    Delta,
    Xfield,
    Homogeneous,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Profile {
    Constant,
    Sinusoid,
    Tabulated,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerturbation {
    kind: Option<Kind>,
    lambda: Option<f64>,
    rho0: Option<f64>,
    z0: Option<f64>,
    normalization: Option<DeltaNormalization>,
    #[serde(rename = "E0")]
    e0: Option<f64>,
    #[serde(rename = "E0_V_per_m")]
    e0_v_per_m: Option<f64>,
    a: Option<f64>,
    d: Option<f64>,
    profile: Option<Profile>,
    omega: Option<f64>,
    times: Option<Vec<f64>>,
    values: Option<Vec<f64>>,
    #[serde(rename = "values_V_per_m")]
    values_v_per_m: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t: f64,
    n: Option<usize>,
    nx: Option<usize>,
    ny: Option<usize>,
    half_width: Option<f64>,
    half_width_sigma_perp: Option<f64>,
    /// Defaults to the packet centre p̄t/m.
    z: Option<f64>,
    components: Option<Vec<Component>>,
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| config(format!("missing key '{key}'")))
}

/// Exactly one of two alternative keys.
fn one_of<T>(a: Option<T>, a_key: &str, b: Option<T>, b_key: &str) -> Result<T> {
    match (a, b) {
        (Some(v), None) | (None, Some(v)) => Ok(v),
        (Some(_), Some(_)) => Err(config(format!("give only one of '{a_key}' and '{b_key}'"))),
        (None, None) => Err(config(format!("missing key '{a_key}' (or '{b_key}')"))),
    }
}

impl RawPerturbation {
    /// Keys that are set but meaningless for the chosen kind.
    fn reject_unused(&self, allowed: &[&str]) -> Result<()> {
        let set = [
            ("lambda", self.lambda.is_some()),
            ("rho0", self.rho0.is_some()),
            ("z0", self.z0.is_some()),
            ("normalization", self.normalization.is_some()),
            ("E0", self.e0.is_some()),
            ("E0_V_per_m", self.e0_v_per_m.is_some()),
            ("a", self.a.is_some()),
            ("d", self.d.is_some()),
            ("profile", self.profile.is_some()),
            ("omega", self.omega.is_some()),
            ("times", self.times.is_some()),
            ("values", self.values.is_some()),
            ("values_V_per_m", self.values_v_per_m.is_some()),
        ];
        match set.iter().find(|(key, present)| *present && !allowed.contains(key)) {
            Some((key, _)) => Err(config(format!("key 'perturbation.{key}' does not apply to this kind"))),
            None => Ok(()),
        }
    }

    fn field_au(&self) -> Result<f64> {
        let e = one_of(
            self.e0,
            "perturbation.E0",
            self.e0_v_per_m.map(field_au_from_v_per_m),
            "perturbation.E0_V_per_m",
        )?;
        Ok(e)
    }

    fn resolve(self) -> Result<Perturbation> {
        match required(self.kind.as_ref(), "perturbation.kind")? {
            Kind::Delta => {
                self.reject_unused(&["lambda", "rho0", "z0", "normalization"])?;
                Ok(Perturbation::Delta(DeltaPerturbation {
                    lambda: required(self.lambda, "perturbation.lambda")?,
                    rho0: required(self.rho0, "perturbation.rho0")?,
                    z0: self.z0.unwrap_or(0.0),
                    normalization: self.normalization.unwrap_or_default(),
                }))
            }
            Kind::Xfield => {
                self.reject_unused(&["E0", "E0_V_per_m", "a", "d"])?;
                Ok(Perturbation::XField(XFieldPerturbation {
                    e0: self.field_au()?,
                    a: self.a.unwrap_or(0.0),
                    d: required(self.d, "perturbation.d")?,
                }))
            }
            Kind::Homogeneous => {
                let field = match required(self.profile.as_ref(), "perturbation.profile")? {
                    Profile::Constant => {
                        self.reject_unused(&["profile", "E0", "E0_V_per_m"])?;
                        HomogeneousField::Constant { e0: self.field_au()? }
                    }
                    Profile::Sinusoid => {
                        self.reject_unused(&["profile", "E0", "E0_V_per_m", "omega"])?;
                        HomogeneousField::Sinusoid {
                            e0: self.field_au()?,
                            omega: required(self.omega, "perturbation.omega")?,
                        }
                    }
                    Profile::Tabulated => {
                        self.reject_unused(&["profile", "times", "values", "values_V_per_m"])?;
                        let converted = self
                            .values_v_per_m
                            .clone()
                            .map(|v| v.into_iter().map(field_au_from_v_per_m).collect());
                        HomogeneousField::Tabulated {
                            times: required(self.times.clone(), "perturbation.times")?,
                            values: one_of(
                                self.values.clone(),
                                "perturbation.values",
                                converted,
                                "perturbation.values_V_per_m",
                            )?,
                        }
                    }
                };
                Ok(Perturbation::Homogeneous(field))
            }
        }
    }
}

impl Scenario {
    /// Parses a scenario document. Error messages name the offending key.
    pub fn from_toml(text: &str, fallback_name: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| config(e.to_string().trim_end().to_string()))?;
        if raw.outputs.is_empty() {
            return Err(config("'outputs' must list at least one artifact"));
        }
        let mut outputs = raw.outputs;
        outputs.sort();
        outputs.dedup();

        let p = &raw.packet;
        let pbar = one_of(
            p.pbar,
            "packet.pbar",
            p.energy_kev.map(|e| pbar_from_energy_kev(e, 1.0)),
            "packet.energy_keV",
        )?;
        if let Some(e) = p.energy_kev {
            if !(e >= 0.0) {
                return Err(config(format!("'packet.energy_keV' must be >= 0, got {e}")));
            }
        }
        let params = PacketParams::new(p.sigma, pbar, p.l).map_err(|e| config(format!("[packet]: {e}")))?;
        let perturbation = raw.perturbation.resolve()?;
        perturbation.validate().map_err(|e| config(format!("[perturbation]: {e}")))?;
        raw.quadrature.validate().map_err(|e| config(format!("[quadrature]: {e}")))?;
        let model = Model::new(params, perturbation, raw.quadrature).map_err(|e| config(e.to_string()))?;

        let g = raw.grid;
        let (nx, ny) = match (g.n, g.nx, g.ny) {
            (Some(n), None, None) => (n, n),
            (None, Some(nx), Some(ny)) => (nx, ny),
            (None, _, _) => return Err(config("missing key 'grid.n' (or both 'grid.nx' and 'grid.ny')")),
            _ => return Err(config("give either 'grid.n' or 'grid.nx' with 'grid.ny'")),
        };
        let half = one_of(
            g.half_width,
            "grid.half_width",
            g.half_width_sigma_perp.map(|k| k * params.width(g.t)),
            "grid.half_width_sigma_perp",
        )?;
        if !(half > 0.0) {
            return Err(config(format!("grid half width must be > 0, got {half}")));
        }
        let components = g.components.unwrap_or_else(|| vec![Component::Total]);
        if components.is_empty() {
            return Err(config("'grid.components' must not be empty"));
        }
        let mut grid = GridSpec::centered(half, nx, g.t, g.z.unwrap_or(params.center_z(g.t)), components[0]);
        grid.ny = ny;
        grid.validate().map_err(|e| config(format!("[grid]: {e}")))?;

        Ok(Self {
            name: raw.name.unwrap_or_else(|| fallback_name.to_string()),
            model,
            grid,
            components,
            outputs,
            zeros: raw.zeros,
        })
    }

    /// A builtin name, or else a path to a scenario file.
    pub fn load(spec: &str) -> Result<Self> {
        if let Some(text) = builtin_toml(spec) {
            return Self::from_toml(&text, spec);
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read scenario '{spec}': {e} (builtins: vpl list-scenarios)")))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::from_toml(&text, stem)
    }

    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }
}

/// Figure number and the l values it shows.
const FIGURES: [(u32, [u32; 4]); 8] = [
    (1, [1, 3, 5, 7]),
    (2, [2, 4, 6, 8]),
    (3, [1, 3, 5, 7]),
    (4, [2, 4, 6, 8]),
    (5, [1, 3, 5, 7]),
    (6, [1, 3, 5, 7]),
    (7, [1, 3, 5, 7]),
    (8, [2, 4, 6, 8]),
];

/// Time of every figure and the packet's common settings.
const FIGURE_T: f64 = 3500.0;
const FIGURE_SIGMA: f64 = 0.02;
const FIGURE_ENERGY_KEV: f64 = 2.0;
const FIGURE_E0_V_PER_M: f64 = 1.0e7;
const FIGURE_D: f64 = 10.0;

pub fn builtin_names() -> Vec<String> {
    FIGURES
        .iter()
        .flat_map(|(fig, ls)| ls.iter().map(move |l| format!("fig{fig}_l{l}")))
        .collect()
}

fn parse_builtin(name: &str) -> Option<(u32, u32)> {
    let rest = name.strip_prefix("fig")?;
    let (fig, l) = rest.split_once("_l")?;
    let (fig, l): (u32, u32) = (fig.parse().ok()?, l.parse().ok()?);
    FIGURES
        .iter()
        .any(|(f, ls)| *f == fig && ls.contains(&l))
        .then_some((fig, l))
}

/// TOML text of a builtin scenario reproducing one panel row of a figure.
pub fn builtin_toml(name: &str) -> Option<String> {
    let (fig, l) = parse_builtin(name)?;
    let (perturbation, components, outputs, extent) = match fig {
        1..=4 => {
            let p = DeltaPerturbation::figure(l)?;
            let perturbation = format!(
                "kind = \"delta\"\nlambda = {:?}\nrho0 = {:?}\nz0 = {:?}\nnormalization = \"unscaled\"\n",
                p.lambda, p.rho0, p.z0
            );
            let outputs = if fig <= 2 { "\"density_map\"" } else { "\"nodal\", \"zeros\"" };
            let extent = if fig <= 2 { 2.5 } else { 1.5 };
            (perturbation, "\"zeroth\", \"total\"", outputs, extent)
        }
        _ => {
            let perturbation = format!(
                "kind = \"xfield\"\nE0_V_per_m = {FIGURE_E0_V_PER_M:?}\nd = {FIGURE_D:?}\na = 0.0\n"
            );
            let (outputs, extent) = match fig {
                5 => ("\"density_map\"", 2.5),
                6 => ("\"phase_map\"", 2.5),
                _ => ("\"nodal\", \"zeros\", \"symmetry_report\"", 1.5),
            };
            (perturbation, "\"zeroth\", \"first\", \"total\"", outputs, extent)
        }
    };
    Some(format!(
        "name = \"{name}\"\noutputs = [{outputs}]\n\n\
         [packet]\nl = {l}\nsigma = {FIGURE_SIGMA:?}\nenergy_keV = {FIGURE_ENERGY_KEV:?}\n\n\
         [perturbation]\n{perturbation}\n\
         [grid]\nt = {FIGURE_T:?}\nn = 161\nhalf_width_sigma_perp = {extent:?}\ncomponents = [{components}]\n"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario> {
        Scenario::from_toml(text, "test")
    }

    const MINIMAL: &str = r#"
outputs = ["zeros"]
[packet]
l = 2
sigma = 0.02
energy_keV = 2.0
[perturbation]
kind = "xfield"
E0 = 1e-5
d = 10.0
[grid]
t = 3500.0
n = 41
half_width = 100.0
"#;

    #[test]
    fn every_builtin_parses() {
        for name in builtin_names() {
            let s = Scenario::load(&name).unwrap();
            assert_eq!(s.name, name);
            assert_eq!(s.grid.nx, 161);
        }
        assert_eq!(builtin_names().len(), 32);
    }

    #[test]
    fn builtins_carry_figure_parameters() {
        let s = Scenario::load("fig3_l3").unwrap();
        assert_eq!(s.model.params, PacketParams::figure(3));
        assert_eq!(s.model.perturbation, Perturbation::Delta(DeltaPerturbation::figure(3).unwrap()));
        assert_eq!(s.grid.t, 3500.0);
        let s = Scenario::load("fig5_l1").unwrap();
        assert_eq!(s.model.perturbation, Perturbation::XField(XFieldPerturbation::figure()));
        assert!(Scenario::load("fig5_l2").is_err());
    }

    #[test]
    fn energy_converts_to_momentum() {
        let s = parse(MINIMAL).unwrap();
        assert!((s.model.params.pbar - 12.1243).abs() < 1e-4);
        assert_eq!(s.components, vec![Component::Total]);
        assert_eq!(s.grid.z, s.model.params.center_z(3500.0));
    }

    #[test]
    fn empty_outputs_names_the_key() {
        let e = parse(&MINIMAL.replace("[\"zeros\"]", "[]")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("'outputs'"), "{e}");
    }

    #[test]
    fn errors_name_the_offending_key() {
        let cases = [
            (MINIMAL.replace("d = 10.0", "d = 10.0\nlambda = 1.0"), "perturbation.lambda"),
            (MINIMAL.replace("energy_keV = 2.0", "energy_keV = 2.0\npbar = 3.0"), "packet.pbar"),
            (MINIMAL.replace("d = 10.0\n", ""), "perturbation.d"),
            (MINIMAL.replace("n = 41", "n = 41\nwidth = 3"), "width"),
            (MINIMAL.replace("d = 10.0", "d = -1.0"), "field width d"),
            (MINIMAL.replace("E0 = 1e-5", "E0 = 1e-5\nE0_V_per_m = 1e7"), "perturbation.E0_V_per_m"),
        ];
        for (text, key) in cases {
            let e = parse(&text).unwrap_err();
            assert_eq!(e.exit_code(), 2);
            assert!(e.to_string().contains(key), "{key}: {e}");
        }
    }

    #[test]
    fn unit_suffixed_field_is_converted() {
        let s = parse(&MINIMAL.replace("E0 = 1e-5", "E0_V_per_m = 1e7")).unwrap();
        match s.model.perturbation {
            Perturbation::XField(p) => assert_eq!(p, XFieldPerturbation::figure()),
            _ => unreachable!(),
        }
    }
}
