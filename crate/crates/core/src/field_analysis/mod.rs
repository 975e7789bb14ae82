//! Transverse maps of the wave function and their topology: nodal lines,
//! zeros with charges, symmetry deviations and ring maxima.

mod io;
mod nodal;
mod rings;
mod zeros;

pub use io::{read_binary, read_csv, write_binary, write_csv, BinarySidecar, NodalSet};
pub use nodal::{nodal_lines, Part, Polyline};
pub use rings::{ring_maxima, RingMaximum};
pub use zeros::{find_zeros, winding_number, winding_on_circle, VortexSet, Winding, Zero, ZeroSearch};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Component, Model};

/// A rectangular transverse grid in the plane z at time t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub t: f64,
    pub z: f64,
    pub which: Component,
}

impl GridSpec {
    /// Square grid of n×n points on [−half, half]² (odd n puts a node at the origin).
    pub fn centered(half: f64, n: usize, t: f64, z: f64, which: Component) -> Self {
        Self {
            x_min: -half,
            x_max: half,
            y_min: -half,
            y_max: half,
            nx: n,
            ny: n,
            t,
            z,
            which,
        }
    }

    pub fn with_component(mut self, which: Component) -> Self {
        self.which = which;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.nx < 8 || self.ny < 8 {
            return bad(format!("grid needs nx, ny >= 8, got {} x {}", self.nx, self.ny));
        }
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max, self.t, self.z]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad("grid bounds, t and z must be finite".into());
        }
        if !(self.x_min < self.x_max && self.y_min < self.y_max) {
            return bad("grid needs x_min < x_max and y_min < y_max".into());
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    // Measured from the midpoint so that symmetric grids have exactly
    // antisymmetric coordinates.
    pub fn x(&self, i: usize) -> f64 {
        0.5 * (self.x_min + self.x_max) + (i as f64 - 0.5 * (self.nx - 1) as f64) * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        0.5 * (self.y_min + self.y_max) + (j as f64 - 0.5 * (self.ny - 1) as f64) * self.dy()
    }

    pub fn is_symmetric(&self) -> bool {
        self.x_min == -self.x_max && self.y_min == -self.y_max && self.nx % 2 == 1 && self.ny % 2 == 1
    }
}

/// Samples of one wave-function component on a grid, row-major with y as
/// the row index: `values[j·nx + i]` sits at `(x(i), y(j))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub grid: GridSpec,
    pub model: Model,
    pub values: Vec<Complex64>,
    /// SHA-256 of the inputs (grid, model, crate version).
    pub fingerprint: String,
}

/// Fingerprint of the inputs that determine a map.
pub fn fingerprint(grid: &GridSpec, model: &Model) -> String {
    #[derive(Serialize)]
    struct Inputs<'a> {
        version: &'a str,
        grid: &'a GridSpec,
        model: &'a Model,
    }
    let text = serde_json::to_string(&Inputs {
        version: env!("CARGO_PKG_VERSION"),
        grid,
        model,
    })
    .expect("plain data serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl FieldMap {
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// SHA-256 of the raw little-endian value bytes.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.values {
            h.update(v.re.to_le_bytes());
            h.update(v.im.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Pointwise combination of two maps on the same grid.
    pub fn zip_with(&self, other: &FieldMap, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<FieldMap> {
        let same = GridSpec {
            which: self.grid.which,
            ..other.grid
        };
        if same != self.grid {
            return Err(Error::InvalidParameter("maps are on different grids".into()));
        }
        Ok(FieldMap {
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
            ..self.clone()
        })
    }
}

/// Evaluates the selected component on every grid point, in parallel over
/// columns. The result does not depend on the number of worker threads.
pub fn evaluate_map(grid: &GridSpec, model: &Model) -> Result<FieldMap> {
    grid.validate()?;
    model.validate()?;
    let ys: Vec<f64> = (0..grid.ny).map(|j| grid.y(j)).collect();
    let columns: Vec<Result<Vec<Complex64>>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| model.evaluate_column(grid.t, grid.x(i), &ys, grid.z, grid.which))
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.nx * grid.ny];
    for (i, column) in columns.into_iter().enumerate() {
        for (j, v) in column?.into_iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::AtPoint {
                    x: grid.x(i),
                    y: ys[j],
                    source: Box::new(Error::InvalidParameter("non-finite amplitude".into())),
                });
            }
            values[j * grid.nx + i] = v;
        }
    }
    Ok(FieldMap {
        grid: *grid,
        model: model.clone(),
        values,
        fingerprint: fingerprint(grid, model),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// (x, y) → (−x, −y).
    Inversion,
}

/// `max |Ψ(−x,−y) − factor·Ψ(x,y)| / max |Ψ|` over the grid.
pub fn check_symmetry(map: &FieldMap, parity: Parity, factor: f64) -> Result<f64> {
    let Parity::Inversion = parity;
    let g = &map.grid;
    if !g.is_symmetric() {
        return Err(Error::AsymmetricGrid);
    }
    let max = map.max_abs();
    if max == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let mirrored = map.value(g.nx - 1 - i, g.ny - 1 - j);
            worst = worst.max((mirrored - factor * map.value(i, j)).norm());
        }
    }
    Ok(worst / max)
}

/// Expected inversion factor of Ψ⁽¹⁾ for the transverse field centred at
/// the axis: (−1)^{l+1}.
pub fn first_order_inversion_factor(l: u32) -> f64 {
    if l % 2 == 0 {
        -1.0
    } else {
        1.0
    }
}
