//! One entry point for Ψ⁽⁰⁾, Ψ⁽¹⁾ and their sum under any perturbation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delta_pt::{psi1_delta, DeltaPerturbation};
use crate::error::{Error, Result};
use crate::homogeneous::{psi_homogeneous, HomogeneousField};
use crate::lg_core::{psi_free, PacketParams, SpacetimePoint};
use crate::numerics::QuadratureConfig;
use crate::xfield_pt::{XFieldColumn, XFieldPerturbation};

/// Exactly one perturbing potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    Delta(DeltaPerturbation),
    XField(XFieldPerturbation),
    Homogeneous(HomogeneousField),
}

impl Perturbation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Delta(p) => p.validate(),
            Self::XField(p) => p.validate(),
            Self::Homogeneous(f) => f.validate(),
        }
    }
}

/// Which part of the wave function to evaluate. For the homogeneous field,
/// whose solution is exact, `First` is the difference from free evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Zeroth,
    First,
    Total,
}

/// Packet, perturbation and quadrature settings bundled for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub params: PacketParams,
    pub perturbation: Perturbation,
    pub quadrature: QuadratureConfig,
}

impl Model {
    pub fn new(params: PacketParams, perturbation: Perturbation, quadrature: QuadratureConfig) -> Result<Self> {
        let m = Self {
            params,
            perturbation,
            quadrature,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.perturbation.validate()?;
        self.quadrature.validate()?;
        Ok(())
    }

    fn first(&self, pt: &SpacetimePoint) -> Result<Complex64> {
        match &self.perturbation {
            Perturbation::Delta(p) => psi1_delta(pt, &self.params, p, &self.quadrature),
            Perturbation::XField(p) => Ok(XFieldColumn::new(pt.t, pt.x, &self.params, p, &self.quadrature)?
                .eval(pt.y, pt.z)
                .value),
            Perturbation::Homogeneous(f) => Ok(psi_homogeneous(pt, &self.params, f)? - psi_free(pt, &self.params)),
        }
    }

    pub fn evaluate(&self, pt: &SpacetimePoint, which: Component) -> Result<Complex64> {
        let zeroth = || psi_free(pt, &self.params);
        match which {
            Component::Zeroth => Ok(zeroth()),
            Component::First => self.first(pt),
            Component::Total => match &self.perturbation {
                Perturbation::Homogeneous(f) => psi_homogeneous(pt, &self.params, f),
                _ => Ok(zeroth() + self.first(pt)?),
            },
        }
    }

    /// Values along a line of fixed (t, x, z). The transverse-field
    /// correction shares its ξ-integrals along the line.
    pub fn evaluate_column(&self, t: f64, x: f64, ys: &[f64], z: f64, which: Component) -> Result<Vec<Complex64>> {
        let at = |y: f64, e: Error| Error::AtPoint { x, y, source: Box::new(e) };
        match (&self.perturbation, which) {
            (Perturbation::XField(p), Component::First | Component::Total) => {
                let column =
                    XFieldColumn::new(t, x, &self.params, p, &self.quadrature).map_err(|e| at(ys.first().copied().unwrap_or(0.0), e))?;
                Ok(ys
                    .iter()
                    .map(|&y| {
                        let first = column.eval(y, z).value;
                        match which {
                            Component::Total => first + psi_free(&SpacetimePoint::new(t, x, y, z), &self.params),
                            _ => first,
                        }
                    })
                    .collect())
            }
            _ => ys
                .iter()
                .map(|&y| self.evaluate(&SpacetimePoint::new(t, x, y, z), which).map_err(|e| at(y, e)))
                .collect(),
        }
    }

    /// Values at scattered transverse points in one plane, in input order.
    /// Points with bit-identical x share a column; columns run in parallel.
    pub fn evaluate_points(&self, t: f64, z: f64, points: &[[f64; 2]], which: Component) -> Result<Vec<Complex64>> {
        let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (k, p) in points.iter().enumerate() {
            groups.entry(p[0].to_bits()).or_default().push(k);
        }
        let groups: Vec<(f64, Vec<usize>)> = groups.into_iter().map(|(bits, idx)| (f64::from_bits(bits), idx)).collect();
        let columns: Vec<Result<Vec<Complex64>>> = groups
            .par_iter()
            .map(|(x, idx)| {
                let ys: Vec<f64> = idx.iter().map(|&k| points[k][1]).collect();
                self.evaluate_column(t, *x, &ys, z, which)
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); points.len()];
        for ((_, idx), column) in groups.iter().zip(columns) {
            for (&k, v) in idx.iter().zip(column?) {
                out[k] = v;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_round_trips_through_json() {
        let cases = vec![
            Perturbation::Delta(DeltaPerturbation::figure(3).unwrap()),
            Perturbation::XField(XFieldPerturbation::figure()),
            Perturbation::Homogeneous(HomogeneousField::Sinusoid { e0: 1e-4, omega: 0.1 }),
        ];
        for p in cases {
            let text = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<Perturbation>(&text).unwrap(), p, "{text}");
        }
    }

    #[test]
    fn components_compose_linearly() {
        let params = PacketParams::figure(2);
        let model = Model::new(
            params,
            Perturbation::Delta(DeltaPerturbation::figure(2).unwrap()),
            QuadratureConfig::default(),
        )
        .unwrap();
        let pt = SpacetimePoint::new(3500.0, 40.0, -25.0, params.center_z(3500.0));
        let total = model.evaluate(&pt, Component::Total).unwrap();
        let parts = model.evaluate(&pt, Component::Zeroth).unwrap() + model.evaluate(&pt, Component::First).unwrap();
        assert_eq!(total, parts);
    }
}
