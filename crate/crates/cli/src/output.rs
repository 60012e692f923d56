//! CSV, OBJ and JSON emission.

use std::fmt::Write as _;
use std::path::Path;

use cpsurf::Complex64;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn cx(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn matrix(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| cx(m[(i, j)])).collect()).collect()
}

/// Seventeen significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes JSON to `path`, or to stdout when no path is given.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let text = to_json(value);
    match path {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// A sampled surface: grid dimensions and one optional coordinate row per
/// node in row-major order (`y` outer, `x` inner).
pub struct SurfaceGrid {
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<Complex64>,
    pub coords: Vec<Option<Vec<f64>>>,
    pub labels: Vec<String>,
    pub basis: String,
}

impl SurfaceGrid {
    pub fn skipped(&self) -> usize {
        self.coords.iter().filter(|c| c.is_none()).count()
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# format_version: 1").unwrap();
        writeln!(out, "# basis: {}", self.basis).unwrap();
        let mut header = vec!["x".to_string(), "y".to_string()];
        header.extend(self.labels.iter().cloned());
        writeln!(out, "{}", header.join(",")).unwrap();
        for (z, c) in self.points.iter().zip(&self.coords) {
            if let Some(c) = c {
                let mut row = vec![num(z.re), num(z.im)];
                row.extend(c.iter().map(|v| num(*v)));
                writeln!(out, "{}", row.join(",")).unwrap();
            }
        }
        writeln!(out, "# skipped {} singular points", self.skipped()).unwrap();
        out
    }

    /// Vertices from the three chosen coordinates (0-based) and one quad per
    /// grid cell whose four corners are regular.
    pub fn obj(&self, project: [usize; 3]) -> String {
        let mut out = String::new();
        let mut index = vec![0usize; self.coords.len()];
        let mut next = 1;
        for (i, c) in self.coords.iter().enumerate() {
            if let Some(c) = c {
                writeln!(out, "v {} {} {}", num(c[project[0]]), num(c[project[1]]), num(c[project[2]])).unwrap();
                index[i] = next;
                next += 1;
            }
        }
        for j in 0..self.ny.saturating_sub(1) {
            for i in 0..self.nx.saturating_sub(1) {
                let corners = [j * self.nx + i, j * self.nx + i + 1, (j + 1) * self.nx + i + 1, (j + 1) * self.nx + i];
                if corners.iter().all(|&k| index[k] != 0) {
                    writeln!(out, "f {} {} {} {}", index[corners[0]], index[corners[1]], index[corners[2]], index[corners[3]])
                        .unwrap();
                }
            }
        }
        out
    }
}
