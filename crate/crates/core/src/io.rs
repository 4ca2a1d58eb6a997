//! Text artifacts: OBJ meshes, multi-column frame CSV and JSON reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FieldN, Grid2D, ScalarField2D};
use crate::verify::{Ambient, Frame};

/// Wavefront OBJ of a sampled surface, one vertex per node and one quad per cell.
///
/// Cells touching a non-finite vertex are left out.
pub fn to_obj(xyz: [&ScalarField2D; 3]) -> String {
    let g = *xyz[0].grid();
    let mut s = String::new();
    for k in 0..g.len() {
        let _ = writeln!(s, "v {} {} {}", xyz[0].values()[k], xyz[1].values()[k], xyz[2].values()[k]);
    }
    let finite = |k: usize| xyz.iter().all(|f| f.values()[k].is_finite());
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let q = [g.idx(i, j), g.idx(i + 1, j), g.idx(i + 1, j + 1), g.idx(i, j + 1)];
            if q.iter().all(|&k| finite(k)) {
                let _ = writeln!(s, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
            }
        }
    }
    s
}

pub fn write_obj(path: impl AsRef<Path>, xyz: [&ScalarField2D; 3]) -> Result<()> {
    std::fs::write(path, to_obj(xyz))?;
    Ok(())
}

/// Several fields on one grid as `x,y,<name>...`.
pub fn fields_to_csv(names: &[String], fields: &[&ScalarField2D]) -> String {
    let g = *fields[0].grid();
    let mut s = String::from("x,y");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for k in 0..g.len() {
        let (x, y) = g.coords(k);
        let _ = write!(s, "{x},{y}");
        for f in fields {
            let _ = write!(s, ",{}", f.values()[k]);
        }
        s.push('\n');
    }
    s
}

/// Parses [`fields_to_csv`] output; rows must come in grid order.
pub fn fields_from_csv(text: &str) -> Result<(Vec<String>, Vec<ScalarField2D>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV".into()))?
        .split(',')
        .map(|t| t.trim().to_string())
        .collect();
    if header.len() < 3 || header[0] != "x" || header[1] != "y" {
        return Err(Error::Config("CSV header must start with x,y".into()));
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (n, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != header.len() {
            return Err(Error::Config(format!("CSV row {} has {} columns", n + 2, parts.len())));
        }
        for (c, p) in parts.iter().enumerate() {
            cols[c].push(p.trim().parse().map_err(|e| Error::Config(format!("CSV row {}: {e}", n + 2)))?);
        }
    }
    let xs = distinct(&cols[0]);
    let ys = distinct(&cols[1]);
    if xs.len() < 3 || ys.len() < 3 || xs.len() * ys.len() != cols[0].len() {
        return Err(Error::Config("CSV does not describe a full tensor grid".into()));
    }
    let g = Grid2D::spanning(xs.len(), ys.len(), (xs[0], xs[xs.len() - 1]), (ys[0], ys[ys.len() - 1]))?;
    for k in 0..g.len() {
        let (x, y) = g.coords(k);
        let tol = 1e-9 * (1.0 + x.abs().max(y.abs()));
        if (cols[0][k] - x).abs() > tol || (cols[1][k] - y).abs() > tol {
            return Err(Error::Config("CSV rows are not in grid order".into()));
        }
    }
    let fields = cols.drain(2..).map(|v| ScalarField2D::from_values(g, v)).collect::<Result<_>>()?;
    Ok((header[2..].to_vec(), fields))
}

fn distinct(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    v
}

/// Frame of a surface as CSV.
///
/// Sphere frames use columns `w<row>_<col>` (1-based, column 1 is the
/// position); Euclidean frames `r<i>` then `n<a>_<i>`.
pub fn frame_to_csv(frame: &Frame) -> Result<String> {
    let g = frame.grid().as_grid2d().ok_or(Error::GridMismatch)?;
    let to2 = |f: &FieldN| ScalarField2D::from_values(g, f.values().to_vec());
    let mut names = Vec::new();
    let mut fields = Vec::new();
    match frame.ambient() {
        Ambient::Sphere => {
            let rows = frame.position().len();
            for r in 0..rows {
                for (c, n) in frame.normals().iter().enumerate() {
                    names.push(format!("w{}_{}", r + 1, c + 1));
                    fields.push(to2(&n[r])?);
                }
            }
        }
        Ambient::Euclidean => {
            for (i, p) in frame.position().iter().enumerate() {
                names.push(format!("r{}", i + 1));
                fields.push(to2(p)?);
            }
            for (a, n) in frame.normals().iter().enumerate() {
                for (i, f) in n.iter().enumerate() {
                    names.push(format!("n{}_{}", a + 1, i + 1));
                    fields.push(to2(f)?);
                }
            }
        }
    }
    Ok(fields_to_csv(&names, &fields.iter().collect::<Vec<_>>()))
}

fn parse_index(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once('_')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

/// Reads [`frame_to_csv`] output; the ambient is told by the column names.
pub fn frame_from_csv(text: &str) -> Result<Frame> {
    let (names, fields) = fields_from_csv(text)?;
    let bad = |n: &str| Error::Config(format!("unexpected frame column {n}"));
    let mut cells: BTreeMap<(usize, usize), FieldN> = BTreeMap::new();
    let mut position: BTreeMap<usize, FieldN> = BTreeMap::new();
    let sphere = names.iter().all(|n| n.starts_with('w'));
    for (n, f) in names.iter().zip(&fields) {
        let f = FieldN::from(f);
        if sphere {
            let (r, c) = parse_index(&n[1..]).ok_or_else(|| bad(n))?;
            cells.insert((c, r), f);
        } else if let Some(rest) = n.strip_prefix('n') {
            let (a, i) = parse_index(rest).ok_or_else(|| bad(n))?;
            cells.insert((a, i), f);
        } else if let Some(rest) = n.strip_prefix('r') {
            position.insert(rest.parse().map_err(|_| bad(n))?, f);
        } else {
            return Err(bad(n));
        }
    }
    let mut normals: Vec<Vec<FieldN>> = Vec::new();
    for ((a, i), f) in cells {
        if a == 0 || i == 0 || a > normals.len() + 1 {
            return Err(Error::Config("frame columns are not numbered consecutively from 1".into()));
        }
        if a == normals.len() + 1 {
            normals.push(Vec::new());
        }
        if i != normals[a - 1].len() + 1 {
            return Err(Error::Config("frame columns are not numbered consecutively from 1".into()));
        }
        normals[a - 1].push(f);
    }
    if normals.is_empty() {
        return Err(Error::Config("frame CSV has no normal columns".into()));
    }
    if sphere {
        Frame::new(normals[0].clone(), normals, Ambient::Sphere)
    } else {
        Frame::new(position.into_values().collect(), normals, Ambient::Euclidean)
    }
}

/// One named residual against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// JSON report written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub failed: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), metrics: BTreeMap::new(), checks: Vec::new(), failed: Vec::new(), pass: true }
    }

    pub fn metric(&mut self, name: &str, value: impl Into<serde_json::Value>) {
        self.metrics.insert(name.into(), value.into());
    }

    /// Records `value ≤ threshold`; NaN fails.
    pub fn check(&mut self, name: &str, value: f64, threshold: f64) {
        let pass = value <= threshold;
        if !pass {
            self.failed.push(name.into());
            self.pass = false;
        }
        self.checks.push(Check { name: name.into(), value, threshold, pass });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_has_quads() {
        let g = Grid2D::spanning(3, 3, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let x = ScalarField2D::from_fn(g, |x, _| x);
        let y = ScalarField2D::from_fn(g, |_, y| y);
        let z = ScalarField2D::zeros(g);
        let obj = to_obj([&x, &y, &z]);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 9);
        let faces: Vec<_> = obj.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces, ["f 1 2 5 4", "f 2 3 6 5", "f 4 5 8 7", "f 5 6 9 8"]);
    }

    #[test]
    fn frame_round_trip() {
        let g = Grid2D::spanning(4, 3, (0.0, 1.0), (0.0, 0.5)).unwrap();
        let f = |v: fn(f64, f64) -> f64| FieldN::from(&ScalarField2D::from_fn(g, v));
        let frame = Frame::new(
            vec![f(|x, _| x), f(|_, y| y), f(|x, y| x * y)],
            vec![vec![f(|_, _| 0.0), f(|_, _| 0.0), f(|_, _| 1.0)]],
            Ambient::Euclidean,
        )
        .unwrap();
        let text = frame_to_csv(&frame).unwrap();
        assert!(text.starts_with("x,y,r1,r2,r3,n1_1,n1_2,n1_3\n"));
        let back = frame_from_csv(&text).unwrap();
        assert_eq!(back.ambient(), Ambient::Euclidean);
        assert!(back.position()[2].max_abs_diff(&frame.position()[2]) < 1e-15);
    }

    #[test]
    fn report_collects_failures() {
        let mut r = Report::new("solve");
        r.check("a", 1e-3, 1e-2);
        r.check("b", f64::NAN, 1.0);
        assert_eq!(r.failed, ["b"]);
        assert!(!r.pass);
        assert!(r.to_json().contains("\"command\": \"solve\""));
    }
}
