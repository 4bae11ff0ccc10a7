//! Text field files: one JSON header line, then one row of decimal values
//! (17 significant digits) per node in row-major order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::{Field, NodeKind, TimeSeries};
use super::grid::Grid;
use crate::error::{LabError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    n: usize,
    shape: Vec<usize>,
    origin: Vec<f64>,
    h: f64,
    halfspace: bool,
    components: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    periodic: Option<Vec<bool>>,
}

pub fn field_to_string(f: &Field) -> String {
    let g = &f.grid;
    let header = Header {
        n: g.n,
        shape: g.shape.clone(),
        origin: g.origin.clone(),
        h: g.h,
        halfspace: g.halfspace,
        components: f.components,
        periodic: if g.periodic.iter().any(|&p| p) { Some(g.periodic.clone()) } else { None },
    };
    let mut s = serde_json::to_string(&header).expect("header serialises");
    s.push('\n');
    for p in 0..g.len() {
        for c in 0..f.components {
            if c > 0 {
                s.push(' ');
            }
            write!(s, "{:.16e}", f.values[p * f.components + c]).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn field_from_str(text: &str) -> Result<Field> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| LabError::MalformedHeader("empty file".into()))?;
    let header: Header = serde_json::from_str(head).map_err(|e| LabError::MalformedHeader(e.to_string()))?;
    let periodic = header.periodic.clone().unwrap_or_else(|| vec![false; header.n]);
    let grid = Grid::with_periodic(header.n, header.shape, header.origin, header.h, header.halfspace, periodic)
        .map_err(|e| LabError::MalformedHeader(e.to_string()))?;
    let c = header.components;
    let mut values = Vec::with_capacity(grid.len() * c);
    let mut rows = 0;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| LabError::MalformedHeader(format!("row {rows}: bad number {tok:?}")))?;
            values.push(v);
        }
        if values.len() - before != c {
            return Err(LabError::ComponentMismatch { expected: c, found: values.len() - before });
        }
        rows += 1;
    }
    if rows != grid.len() {
        return Err(LabError::MalformedHeader(format!(
            "header promises {} rows, file has {rows} (truncated?)",
            grid.len()
        )));
    }
    Field::new(grid, c, values)
}

pub fn write_field(path: &Path, f: &Field) -> Result<()> {
    fs::write(path, field_to_string(f)).map_err(|e| LabError::io(path.display().to_string(), e))
}

pub fn read_field(path: &Path) -> Result<Field> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path.display().to_string(), e))?;
    field_from_str(&text)
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesIndex {
    times: Vec<f64>,
    kind: NodeKind,
    files: Vec<String>,
}

/// Writes `series.json` plus one field file per snapshot into `dir`.
pub fn write_series(dir: &Path, s: &TimeSeries) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir.display().to_string(), e))?;
    let mut files = Vec::new();
    for (k, f) in s.snapshots.iter().enumerate() {
        let name = format!("snap_{k:05}.field");
        write_field(&dir.join(&name), f)?;
        files.push(name);
    }
    let idx = SeriesIndex { times: s.times.clone(), kind: s.kind, files };
    let p = dir.join("series.json");
    let text = serde_json::to_string_pretty(&idx).expect("index serialises");
    fs::write(&p, text).map_err(|e| LabError::io(p.display().to_string(), e))
}

pub fn read_series(dir: &Path) -> Result<TimeSeries> {
    let p = dir.join("series.json");
    let text = fs::read_to_string(&p).map_err(|e| LabError::io(p.display().to_string(), e))?;
    let idx: SeriesIndex = serde_json::from_str(&text).map_err(|e| LabError::MalformedHeader(e.to_string()))?;
    let snaps = idx
        .files
        .iter()
        .map(|f| read_field(&dir.join(f)))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(idx.times, snaps, idx.kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Grid::new(2, vec![9, 7], vec![-1.0, 0.0], 0.125, true).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1e3..1e3) * rng.gen::<f64>().powi(7)).collect();
        let f = Field::new(g, 1, vals).unwrap();
        let back = field_from_str(&field_to_string(&f)).unwrap();
        assert_eq!(back.grid, f.grid);
        for (a, b) in back.values.iter().zip(&f.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn tensor_round_trip_n3() {
        let g = Grid::with_periodic(3, vec![4, 5, 4], vec![0.0, 0.0, 0.0], 0.3, true, vec![true, false, false]).unwrap();
        let f = Field::from_fn(&g, 9, |x, o| {
            for (c, v) in o.iter_mut().enumerate() {
                *v = (c as f64 + 1.0) * x[0].sin() - x[2] / 3.0;
            }
        });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.field");
        write_field(&p, &f).unwrap();
        assert_eq!(read_field(&p).unwrap(), f);
    }

    #[test]
    fn truncated_file_reports_malformed_header() {
        let g = Grid::new(2, vec![4, 4], vec![0.0, 0.0], 1.0, false).unwrap();
        let text = field_to_string(&Field::zeros(&g, 1));
        let cut = &text[..text.len() / 2];
        assert!(matches!(field_from_str(cut), Err(LabError::MalformedHeader(_))));
        let head_only = &text[..10];
        assert!(matches!(field_from_str(head_only), Err(LabError::MalformedHeader(_))));
    }

    #[test]
    fn wrong_row_width_is_a_component_mismatch() {
        let g = Grid::new(2, vec![4, 4], vec![0.0, 0.0], 1.0, false).unwrap();
        let mut text = field_to_string(&Field::zeros(&g, 2));
        text.push_str("1.0\n");
        let bad = text.replacen(" 0.0000000000000000e0\n", "\n", 1);
        assert!(matches!(field_from_str(&bad), Err(LabError::ComponentMismatch { .. })));
    }

    #[test]
    fn series_round_trip() {
        let g = Grid::new(2, vec![4, 4], vec![0.0, 0.0], 1.0, false).unwrap();
        let s = TimeSeries::new(
            vec![0.0, 0.5],
            vec![Field::zeros(&g, 1), Field::scalar_from_fn(&g, |x| x[0])],
            NodeKind::Chebyshev,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_series(dir.path(), &s).unwrap();
        let back = read_series(dir.path()).unwrap();
        assert_eq!(back.times, s.times);
        assert_eq!(back.kind, NodeKind::Chebyshev);
        assert_eq!(back.snapshots[1], s.snapshots[1]);
    }
}
