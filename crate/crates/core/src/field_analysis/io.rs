use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FieldMap, GridSpec, Polyline};
use crate::error::{Error, Result};
use crate::model::Model;

const CSV_COLUMNS: &str = "x,y,re,im,density,phase";

fn sci(v: f64) -> String {
    // 17 significant digits round-trip every f64.
    format!("{v:.16e}")
}

/// Writes the map as CSV: '#' metadata lines (fingerprint, grid and model
/// as JSON), the column header, then one row per point with y outer and
/// x inner.
pub fn write_csv(map: &FieldMap, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# vpl field map")?;
    writeln!(out, "# fingerprint: {}", map.fingerprint)?;
    writeln!(out, "# grid: {}", serde_json::to_string(&map.grid)?)?;
    writeln!(out, "# model: {}", serde_json::to_string(&map.model)?)?;
    writeln!(out, "{CSV_COLUMNS}")?;
    let g = &map.grid;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let v = map.value(i, j);
            let row = [g.x(i), g.y(j), v.re, v.im, v.norm_sqr(), v.im.atan2(v.re)].map(sci).join(",");
            writeln!(out, "{row}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<FieldMap> {
    let reader = BufReader::new(fs::File::open(path)?);
    let (mut fingerprint, mut grid, mut model) = (None, None, None);
    let mut values = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if let Some(meta) = line.strip_prefix("# ") {
            if let Some(v) = meta.strip_prefix("fingerprint: ") {
                fingerprint = Some(v.to_string());
            } else if let Some(v) = meta.strip_prefix("grid: ") {
                grid = Some(serde_json::from_str::<GridSpec>(v)?);
            } else if let Some(v) = meta.strip_prefix("model: ") {
                model = Some(serde_json::from_str::<Model>(v)?);
            }
            continue;
        }
        if line == CSV_COLUMNS || line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| Error::Io(format!("bad CSV number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if fields.len() != 6 {
            return Err(Error::Io(format!("expected 6 CSV columns, got {}", fields.len())));
        }
        values.push(Complex64::new(fields[2], fields[3]));
    }
    let missing = |what: &str| Error::Io(format!("CSV header lacks {what}"));
    let grid = grid.ok_or_else(|| missing("grid"))?;
    if values.len() != grid.nx * grid.ny {
        return Err(Error::Io(format!("CSV has {} rows, grid needs {}", values.len(), grid.nx * grid.ny)));
    }
    Ok(FieldMap {
        grid,
        model: model.ok_or_else(|| missing("model"))?,
        values,
        fingerprint: fingerprint.ok_or_else(|| missing("fingerprint"))?,
    })
}

/// JSON sidecar describing a binary map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySidecar {
    pub format: String,
    pub layout: String,
    pub grid: GridSpec,
    pub model: Model,
    pub fingerprint: String,
    pub data_file: String,
}

const BINARY_FORMAT: &str = "vpl-fieldmap-f64le";
const BINARY_LAYOUT: &str = "row-major, y outer, x inner; (re, im) pairs of little-endian float64";

/// Writes raw values to `path` and the sidecar to `path` with a `.json`
/// extension.
pub fn write_binary(map: &FieldMap, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 * map.values.len());
    for v in &map.values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let sidecar = BinarySidecar {
        format: BINARY_FORMAT.into(),
        layout: BINARY_LAYOUT.into(),
        grid: map.grid,
        model: map.model.clone(),
        fingerprint: map.fingerprint.clone(),
        data_file: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    fs::write(path.with_extension("json"), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<FieldMap> {
    let sidecar: BinarySidecar = serde_json::from_str(&fs::read_to_string(path.with_extension("json"))?)?;
    if sidecar.format != BINARY_FORMAT {
        return Err(Error::Io(format!("unknown binary format {:?}", sidecar.format)));
    }
    let bytes = fs::read(path)?;
    let n = sidecar.grid.nx * sidecar.grid.ny;
    if bytes.len() != 16 * n {
        return Err(Error::Io(format!("binary map has {} bytes, expected {}", bytes.len(), 16 * n)));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    Ok(FieldMap {
        grid: sidecar.grid,
        model: sidecar.model,
        values: (0..n).map(|k| Complex64::new(f(2 * k), f(2 * k + 1))).collect(),
        fingerprint: sidecar.fingerprint,
    })
}

/// Nodal lines of both parts, as written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSet {
    pub real: Vec<Polyline>,
    pub imag: Vec<Polyline>,
    pub fingerprint: String,
}
