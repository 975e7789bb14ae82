//! Convergence ladders: re-evaluate a scenario while one numerical knob is
//! tightened and tabulate the successive differences.

use serde::Serialize;
use vpl_core::field_analysis::{evaluate_map, find_zeros, Zero};
use vpl_core::model::Component;
use vpl_core::{Complex64, QuadratureConfig, SpacetimePoint};

use crate::error::{CliError, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    RelTol,
    XiCutoff,
    Grid,
}

impl Parameter {
    pub fn default_ladder(self) -> Vec<f64> {
        match self {
            Self::RelTol => vec![1e-6, 1e-7, 1e-8, 1e-9, 1e-10],
            Self::XiCutoff => vec![30.0, 60.0, 120.0],
            Self::Grid => vec![81.0, 161.0, 321.0],
        }
    }
}

/// Successive differences below this are roundoff and never count as an
/// increase.
pub const DIFF_FLOOR: f64 = 1e-13;

/// The last xi_cutoff difference must not exceed this.
pub const XI_CUTOFF_LAST_DIFF: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Rung {
    pub value: f64,
    /// Probe values (rel_tol, xi_cutoff) or zero positions as x + iy (grid).
    pub samples: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub scenario: String,
    pub parameter: Parameter,
    pub rungs: Vec<Rung>,
    /// Relative probe differences, or zero displacements in a.u. (grid).
    pub diffs: Vec<f64>,
    /// Allowed displacement per refinement (grid only): dedupe_radius/4
    /// of the finer rung.
    pub allowed: Vec<f64>,
    pub criterion: String,
    pub passed: bool,
}

/// Probe points on the ring, where Ψ⁽¹⁾ is largest.
pub fn probe_points(scenario: &Scenario) -> Vec<SpacetimePoint> {
    let g = &scenario.grid;
    let w = scenario.model.params.width(g.t);
    [(0.5, 0.3), (1.0, 2.0), (1.5, 4.0)]
        .iter()
        .map(|&(r, phi)| SpacetimePoint::from_polar(g.t, r * w, phi, g.z))
        .collect()
}

fn probe_values(scenario: &Scenario, quadrature: QuadratureConfig) -> Result<Vec<Complex64>> {
    let mut model = scenario.model.clone();
    model.quadrature = quadrature;
    model.validate().map_err(|e| CliError::Config(e.to_string()))?;
    probe_points(scenario)
        .iter()
        .map(|pt| Ok(model.evaluate(pt, Component::First)?))
        .collect()
}

fn max_relative_change(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / y.norm())
        .fold(0.0, f64::max)
}

/// Each zero of the coarser rung moved to its nearest partner in the finer
/// one; infinite when the counts differ.
fn max_displacement(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Non-increasing up to the roundoff floor.
pub fn is_monotone(diffs: &[f64]) -> bool {
    diffs.windows(2).all(|w| w[1] <= w[0] || w[1] <= DIFF_FLOOR)
}

pub fn convergence(scenario: &Scenario, parameter: Parameter, ladder: &[f64]) -> Result<ConvergenceTable> {
    if ladder.len() < 3 {
        return Err(CliError::Config(format!("a ladder needs at least 3 values, got {}", ladder.len())));
    }
    let base = scenario.model.quadrature;
    let mut rungs = Vec::with_capacity(ladder.len());
    let mut dedupe = Vec::with_capacity(ladder.len());
    for &value in ladder {
        let samples = match parameter {
            Parameter::RelTol => probe_values(scenario, base.with_rel_tol(value))?,
            Parameter::XiCutoff => probe_values(scenario, QuadratureConfig { xi_cutoff: value, ..base })?,
            Parameter::Grid => {
                if value.fract() != 0.0 || value < 8.0 {
                    return Err(CliError::Config(format!("grid ladder values must be integers >= 8, got {value}")));
                }
                let n = value as usize;
                let mut grid = scenario.grid.with_component(Component::Total);
                (grid.nx, grid.ny) = (n, n);
                let zeros = find_zeros(&evaluate_map(&grid, &scenario.model)?, &scenario.zeros)?;
                dedupe.push(zeros.dedupe_radius);
                zeros.zeros.iter().map(|z: &Zero| Complex64::new(z.x, z.y)).collect()
            }
        };
        rungs.push(Rung { value, samples });
    }
    let diffs: Vec<f64> = rungs
        .windows(2)
        .map(|w| match parameter {
            Parameter::Grid => max_displacement(&w[0].samples, &w[1].samples),
            _ => max_relative_change(&w[0].samples, &w[1].samples),
        })
        .collect();
    let mut allowed = Vec::new();
    let (criterion, passed) = match parameter {
        Parameter::RelTol => ("successive differences non-increasing".to_string(), is_monotone(&diffs)),
        Parameter::XiCutoff => {
            let last = *diffs.last().expect("ladder has >= 3 rungs");
            (format!("last difference <= {XI_CUTOFF_LAST_DIFF:e}"), last <= XI_CUTOFF_LAST_DIFF)
        }
        Parameter::Grid => {
            let ok = diffs.iter().zip(&dedupe[1..]).all(|(d, r)| *d <= 0.25 * r);
            allowed = dedupe[1..].iter().map(|r| 0.25 * r).collect();
            ("zero positions move by <= dedupe_radius/4 per refinement".to_string(), ok)
        }
    };
    Ok(ConvergenceTable {
        scenario: scenario.name.clone(),
        parameter,
        rungs,
        diffs,
        allowed,
        criterion,
        passed,
    })
}

impl ConvergenceTable {
    /// Plain-text table for the terminal.
    pub fn render(&self) -> String {
        let mut out = format!("convergence of {} in {:?}\n", self.scenario, self.parameter);
        for (k, rung) in self.rungs.iter().enumerate() {
            let diff = if k == 0 {
                "-".to_string()
            } else {
                format!("{:.3e}", self.diffs[k - 1])
            };
            out.push_str(&format!("  {:>12e}  samples={:<3}  diff={diff}\n", rung.value, rung.samples.len()));
        }
        let verdict = if self.passed { "PASS" } else { "FLAGGED" };
        out.push_str(&format!("  {verdict}: {}\n", self.criterion));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotonicity_ignores_roundoff() {
        assert!(is_monotone(&[1e-7, 1e-8, 1e-9]));
        assert!(!is_monotone(&[1e-7, 1e-8, 1e-6]));
        assert!(is_monotone(&[1e-9, 1e-15, 5e-14]));
    }

    #[test]
    fn displacement_matches_nearest_partner() {
        let a = [Complex64::new(0.0, 0.0), Complex64::new(5.0, 0.0)];
        let b = [Complex64::new(5.0, 0.1), Complex64::new(0.0, -0.2)];
        assert!((max_displacement(&a, &b) - 0.2).abs() < 1e-15);
        assert_eq!(max_displacement(&a, &b[..1]), f64::INFINITY);
    }

    #[test]
    fn short_ladder_is_a_config_error() {
        let s = Scenario::load("fig5_l1").unwrap();
        let e = convergence(&s, Parameter::RelTol, &[1e-6, 1e-7]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
