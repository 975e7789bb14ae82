use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FieldMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Real,
    Imag,
}

/// Ordered vertices of one zero-level curve; closed curves repeat the
/// first vertex at the end.
pub type Polyline = Vec<[f64; 2]>;

// Edge identifiers: 2·(j·nx + i) for the edge from node (i, j) to (i+1, j),
// one more for the edge from (i, j) to (i, j+1).
fn horizontal(nx: usize, i: usize, j: usize) -> usize {
    2 * (j * nx + i)
}

fn vertical(nx: usize, i: usize, j: usize) -> usize {
    2 * (j * nx + i) + 1
}

/// Zero-level curves of Re Ψ or Im Ψ by marching squares with linear
/// interpolation along cell edges. Saddle cells are resolved by the sign
/// of the cell mean.
pub fn nodal_lines(map: &FieldMap, part: Part) -> Vec<Polyline> {
    let g = &map.grid;
    let nx = g.nx;
    let f = |i: usize, j: usize| {
        let v = map.value(i, j);
        match part {
            Part::Real => v.re,
            Part::Imag => v.im,
        }
    };
    let above = |i: usize, j: usize| f(i, j) > 0.0;

    // Crossing point on each edge that changes sign.
    let crossing = |a: (usize, usize), b: (usize, usize)| {
        let (fa, fb) = (f(a.0, a.1), f(b.0, b.1));
        let w = if fa == fb { 0.5 } else { fa / (fa - fb) };
        let (xa, ya) = (g.x(a.0), g.y(a.1));
        let (xb, yb) = (g.x(b.0), g.y(b.1));
        [xa + w * (xb - xa), ya + w * (yb - ya)]
    };

    let mut points: BTreeMap<usize, [f64; 2]> = BTreeMap::new();
    let mut links: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for j in 0..g.ny - 1 {
        for i in 0..nx - 1 {
            // Corners counter-clockwise from (i, j); edges bottom, right, top, left.
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let edges = [
                horizontal(nx, i, j),
                vertical(nx, i + 1, j),
                horizontal(nx, i, j + 1),
                vertical(nx, i, j),
            ];
            let signs: Vec<bool> = corners.iter().map(|&(a, b)| above(a, b)).collect();
            let cut: Vec<usize> = (0..4).filter(|&e| signs[e] != signs[(e + 1) % 4]).collect();
            for &e in &cut {
                points
                    .entry(edges[e])
                    .or_insert_with(|| crossing(corners[e], corners[(e + 1) % 4]));
            }
            let pairs: Vec<(usize, usize)> = match cut.len() {
                2 => vec![(cut[0], cut[1])],
                4 => {
                    let mean: f64 = corners.iter().map(|&(a, b)| f(a, b)).sum::<f64>() / 4.0;
                    // Corner 0 joins the region of the centre or is cut off alone.
                    if (mean > 0.0) == signs[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
                _ => vec![],
            };
            for (a, b) in pairs {
                links.entry(edges[a]).or_default().push(edges[b]);
                links.entry(edges[b]).or_default().push(edges[a]);
            }
        }
    }

    // Walk chains from open ends first, then the remaining cycles.
    let mut visited: BTreeMap<usize, bool> = links.keys().map(|&k| (k, false)).collect();
    let mut lines = Vec::new();
    let starts: Vec<usize> = links
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(&k, _)| k)
        .chain(links.keys().copied())
        .collect();
    for start in starts {
        if visited[&start] {
            continue;
        }
        let mut line = vec![points[&start]];
        visited.insert(start, true);
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            let next = links[&cur].iter().copied().find(|&n| n != prev && !visited[&n]);
            match next {
                Some(n) => {
                    line.push(points[&n]);
                    visited.insert(n, true);
                    prev = cur;
                    cur = n;
                }
                None => {
                    if cur != start && links[&cur].contains(&start) && line.len() > 2 {
                        line.push(points[&start]);
                    }
                    break;
                }
            }
        }
        lines.push(line);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_analysis::{evaluate_map, GridSpec};
    use crate::lg_core::PacketParams;
    use crate::model::{Component, Model, Perturbation};
    use crate::numerics::QuadratureConfig;
    use crate::xfield_pt::XFieldPerturbation;
    use num_complex::Complex64;

    fn zeroth_map(l: u32, n: usize) -> FieldMap {
        let model = Model::new(
            PacketParams::figure(l),
            Perturbation::XField(XFieldPerturbation::figure()),
            QuadratureConfig::default(),
        )
        .unwrap();
        evaluate_map(&GridSpec::centered(150.0, n, 0.0, 0.0, Component::Zeroth), &model).unwrap()
    }

    #[test]
    fn constant_map_has_no_nodal_lines() {
        let mut map = zeroth_map(1, 9);
        map.values.iter_mut().for_each(|v| *v = Complex64::new(1.0, 0.0));
        assert!(nodal_lines(&map, Part::Real).is_empty());
        assert!(nodal_lines(&map, Part::Imag).is_empty());
    }

    #[test]
    fn l1_nodal_lines_are_the_axes() {
        let map = zeroth_map(1, 40);
        let cell = map.grid.dx();
        let re = nodal_lines(&map, Part::Real);
        let im = nodal_lines(&map, Part::Imag);
        assert!(!re.is_empty() && !im.is_empty());
        // Re Ψ₀ ∝ x vanishes on x = 0; Im Ψ₀ ∝ y on y = 0.
        assert!(re.iter().flatten().all(|p| p[0].abs() <= cell));
        assert!(im.iter().flatten().all(|p| p[1].abs() <= cell));
        let span = |ls: &[Polyline], k: usize| {
            let v: Vec<f64> = ls.iter().flatten().map(|p| p[k]).collect();
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        assert!(span(&re, 1) > 290.0 && span(&im, 0) > 290.0);
    }

    #[test]
    fn l3_has_six_rays_meeting_at_the_centre() {
        let map = zeroth_map(3, 60);
        let g = map.grid;
        for part in [Part::Real, Part::Imag] {
            let lines = nodal_lines(&map, part);
            let edge = |p: &[f64; 2]| {
                p[0] <= g.x_min + 1e-9 || p[0] >= g.x_max - 1e-9 || p[1] <= g.y_min + 1e-9 || p[1] >= g.y_max - 1e-9
            };
            let boundary_ends = lines
                .iter()
                .flat_map(|l| [l.first().unwrap(), l.last().unwrap()])
                .filter(|p| edge(p))
                .count();
            assert_eq!(boundary_ends, 6, "{part:?}");
            let diag = g.cell_diagonal();
            for l in &lines {
                let closest = l.iter().map(|p| p[0].hypot(p[1])).fold(f64::MAX, f64::min);
                assert!(closest <= diag, "{part:?} line misses the centre by {closest}");
            }
        }
    }
}
