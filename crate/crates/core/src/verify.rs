//! Residual checks of the Gauss–Codazzi system and of the flat-normal-bundle
//! property for any sampled frame.

use nalgebra::DMatrix;

use crate::construction::WField;
use crate::error::{Error, Result};
use crate::euclid3::Surface3;
use crate::grid::{FieldN, GridN};
use crate::highdim::Submanifold;

/// Nodes skipped at every edge when second derivatives of extracted data are involved.
pub const CODAZZI_MARGIN: usize = 4;

/// Where the position vector lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// Position on the unit hypersphere; it is itself a normal with Weingarten operator `E`.
    Sphere,
    /// Position in Euclidean space; only the listed normals enter the Gauss equation.
    Euclidean,
}

/// Position and unit normals sampled on an `n`-dimensional grid.
#[derive(Debug, Clone)]
pub struct Frame {
    grid: GridN,
    position: Vec<FieldN>,
    normals: Vec<Vec<FieldN>>,
    ambient: Ambient,
}

impl Frame {
    pub fn new(position: Vec<FieldN>, normals: Vec<Vec<FieldN>>, ambient: Ambient) -> Result<Self> {
        let grid = position.first().ok_or(Error::GridMismatch)?.grid().clone();
        let dim = position.len();
        if normals.iter().any(|n| n.len() != dim)
            || position.iter().chain(normals.iter().flatten()).any(|f| *f.grid() != grid)
        {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, position, normals, ambient })
    }

    /// Columns of `W`: `w¹` is the position, every column (including `w¹`) a normal.
    pub fn from_wfield(w: &WField) -> Self {
        let cols: Vec<Vec<FieldN>> = (0..w.cols())
            .map(|c| (0..w.rows()).map(|r| FieldN::from(w.entry(r, c))).collect())
            .collect();
        Self { grid: GridN::from(w.grid()), position: cols[0].clone(), normals: cols, ambient: Ambient::Sphere }
    }

    pub fn from_submanifold(sub: &Submanifold) -> Self {
        let rows = sub.n() + sub.m();
        let cols: Vec<Vec<FieldN>> =
            (0..sub.m()).map(|c| (0..rows).map(|r| sub.w_entry(r, c).clone()).collect()).collect();
        Self { grid: sub.grid().clone(), position: cols[0].clone(), normals: cols, ambient: Ambient::Sphere }
    }

    pub fn from_surface3(s: &Surface3) -> Self {
        Self {
            grid: GridN::from(s.r[0].grid()),
            position: s.r.iter().map(FieldN::from).collect(),
            normals: vec![s.n.iter().map(FieldN::from).collect()],
            ambient: Ambient::Euclidean,
        }
    }

    pub fn grid(&self) -> &GridN {
        &self.grid
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn position(&self) -> &[FieldN] {
        &self.position
    }

    pub fn normals(&self) -> &[Vec<FieldN>] {
        &self.normals
    }

    /// Replaces normal `a`.
    pub fn set_normal(&mut self, a: usize, n: Vec<FieldN>) -> Result<()> {
        if n.len() != self.position.len() || n.iter().any(|f| *f.grid() != self.grid) {
            return Err(Error::GridMismatch);
        }
        if self.ambient == Ambient::Sphere && a == 0 {
            self.position = n.clone();
        }
        self.normals[a] = n;
        Ok(())
    }

    /// `max |(w^a, w^b) - δ_ab|` over the normals.
    pub fn orthonormal_residual(&self) -> f64 {
        let m = self.normals.len();
        let mut worst: f64 = 0.0;
        for k in 0..self.grid.len() {
            for a in 0..m {
                for b in a..m {
                    let d: f64 = (0..self.position.len())
                        .map(|r| self.normals[a][r].values()[k] * self.normals[b][r].values()[k])
                        .sum();
                    worst = worst.max((d - if a == b { 1.0 } else { 0.0 }).abs());
                }
            }
        }
        worst
    }
}

fn dot_at(a: &[FieldN], b: &[FieldN], k: usize) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.values()[k] * y.values()[k]).sum()
}

/// Lamé and rotation coefficients of a frame, with `H^α_i` of every normal.
#[derive(Debug, Clone)]
pub struct GeometryData {
    pub grid: GridN,
    pub h: Vec<FieldN>,
    /// `beta[i * n + j] = ∂_i H_j / H_i` (diagonal unused).
    pub beta: Vec<FieldN>,
    /// `h_alpha[α][i]`.
    pub h_alpha: Vec<Vec<FieldN>>,
    /// `max |∂_i w^α - (H^α_i / H_i) ∂_i r|`, zero for curvature-line frames with flat normal bundle.
    pub projection_residual: f64,
}

impl GeometryData {
    pub fn n(&self) -> usize {
        self.grid.dim()
    }

    pub fn beta(&self, i: usize, j: usize) -> &FieldN {
        &self.beta[i * self.n() + j]
    }
}

/// Extracts `H_i = |∂_i r|`, `β_ij`, and `H^α_i = (∂_i w^α, ∂_i r) / H_i`.
pub fn extract_geometry(frame: &Frame) -> Result<GeometryData> {
    let g = &frame.grid;
    let n = g.dim();
    let tangents: Vec<Vec<FieldN>> = (0..n).map(|i| frame.position.iter().map(|f| f.diff(i)).collect()).collect();
    let mut h = Vec::with_capacity(n);
    let scale = tangents
        .iter()
        .flat_map(|t| (0..g.len()).map(move |k| dot_at(t, t, k).sqrt()))
        .fold(0.0, f64::max);
    for (i, t) in tangents.iter().enumerate() {
        let mut v = Vec::with_capacity(g.len());
        for k in 0..g.len() {
            let len = dot_at(t, t, k).sqrt();
            if len <= 1e-10 * scale.max(1e-300) {
                return Err(Error::DegenerateTangent { axis: i, node: g.multi_index(k) });
            }
            v.push(len);
        }
        h.push(FieldN::from_values(g.clone(), v)?);
    }
    let mut beta = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            beta.push(if i == j {
                FieldN::constant(g, 0.0)
            } else {
                h[j].diff(i).zip_map(&h[i], |d, hi| d / hi)
            });
        }
    }
    let mut h_alpha = Vec::with_capacity(frame.normals.len());
    let mut projection: f64 = 0.0;
    for nrm in &frame.normals {
        let mut per = Vec::with_capacity(n);
        for i in 0..n {
            let dn: Vec<FieldN> = nrm.iter().map(|f| f.diff(i)).collect();
            let t = &tangents[i];
            let mut v = Vec::with_capacity(g.len());
            for k in 0..g.len() {
                let hi = h[i].values()[k];
                let ratio = dot_at(&dn, t, k) / (hi * hi);
                let off: f64 = dn
                    .iter()
                    .zip(t)
                    .map(|(a, b)| (a.values()[k] - ratio * b.values()[k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                projection = projection.max(off);
                v.push(ratio * hi);
            }
            per.push(FieldN::from_values(g.clone(), v)?);
        }
        h_alpha.push(per);
    }
    Ok(GeometryData { grid: g.clone(), h, beta, h_alpha, projection_residual: projection })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodazziReport {
    /// `max |∂_i H^α_j - β_ij H^α_i|`.
    pub lame: f64,
    /// `max |∂_k β_ij - β_ik β_kj|` (three distinct indices; zero for surfaces).
    pub rotation: f64,
    /// `max |∂_i β_ij + ∂_j β_ji + Σ_k β_ki β_kj + Σ_α H^α_i H^α_j|`.
    pub gauss: f64,
}

impl CodazziReport {
    pub fn max(&self) -> f64 {
        self.lame.max(self.rotation).max(self.gauss)
    }
}

/// Residuals of the curvature-line Gauss–Codazzi system on nodes at least
/// [`CODAZZI_MARGIN`] away from the edges.
pub fn codazzi_residual(data: &GeometryData) -> CodazziReport {
    let g = &data.grid;
    let n = g.dim();
    let inner: Vec<usize> = (0..g.len()).filter(|&k| g.is_inner(k, CODAZZI_MARGIN)).collect();
    let (mut lame, mut rotation, mut gauss): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let b = data.beta(i, j);
            for ha in &data.h_alpha {
                let d = ha[j].diff(i);
                for &k in &inner {
                    lame = lame.max((d.values()[k] - b.values()[k] * ha[i].values()[k]).abs());
                }
            }
            for kk in (0..n).filter(|&kk| kk != i && kk != j) {
                let d = b.diff(kk);
                for &k in &inner {
                    let rhs = data.beta(i, kk).values()[k] * data.beta(kk, j).values()[k];
                    rotation = rotation.max((d.values()[k] - rhs).abs());
                }
            }
            if j > i {
                let (a, c) = (b.diff(i), data.beta(j, i).diff(j));
                for &k in &inner {
                    let mut s = a.values()[k] + c.values()[k];
                    for kk in (0..n).filter(|&kk| kk != i && kk != j) {
                        s += data.beta(kk, i).values()[k] * data.beta(kk, j).values()[k];
                    }
                    for ha in &data.h_alpha {
                        s += ha[i].values()[k] * ha[j].values()[k];
                    }
                    gauss = gauss.max(s.abs());
                }
            }
        }
    }
    CodazziReport { lame, rotation, gauss }
}

/// `max |(∂_i w^α, w^β)|` over directions, nodes and pairs of distinct normals:
/// the normal connection forms, which vanish for parallel normals.
pub fn flat_normal_check(frame: &Frame) -> f64 {
    let g = &frame.grid;
    let m = frame.normals.len();
    let mut worst: f64 = 0.0;
    for i in 0..g.dim() {
        let dn: Vec<Vec<FieldN>> = frame.normals.iter().map(|v| v.iter().map(|f| f.diff(i)).collect()).collect();
        for a in 0..m {
            for b in (0..m).filter(|&b| b != a) {
                for k in 0..g.len() {
                    worst = worst.max(dot_at(&dn[a], &frame.normals[b], k).abs());
                }
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeingartenReport {
    /// Largest off-diagonal Weingarten entry relative to the largest entry overall.
    pub off_diagonal: f64,
    /// Largest `‖[w^α, w^β]‖` relative to the square of the largest entry.
    pub commutator: f64,
}

/// Least-squares Weingarten matrices `∂_j w^α = Σ_i A_ij ∂_i r` at every node.
pub fn weingarten_matrices(frame: &Frame) -> Vec<Vec<DMatrix<f64>>> {
    let g = &frame.grid;
    let n = g.dim();
    let rows = frame.position.len();
    let tangents: Vec<Vec<FieldN>> = (0..n).map(|i| frame.position.iter().map(|f| f.diff(i)).collect()).collect();
    let dn: Vec<Vec<Vec<FieldN>>> = frame
        .normals
        .iter()
        .map(|v| (0..n).map(|j| v.iter().map(|f| f.diff(j)).collect()).collect())
        .collect();
    (0..g.len())
        .map(|k| {
            let t = DMatrix::from_fn(rows, n, |r, i| tangents[i][r].values()[k]);
            let pinv = (t.transpose() * &t).try_inverse().unwrap_or_else(|| DMatrix::zeros(n, n)) * t.transpose();
            dn.iter()
                .map(|d| {
                    let rhs = DMatrix::from_fn(rows, n, |r, j| d[j][r].values()[k]);
                    &pinv * rhs
                })
                .collect()
        })
        .collect()
}

/// Off-diagonal size and commutators of the Weingarten matrices over inner nodes.
pub fn weingarten_commutativity(frame: &Frame) -> WeingartenReport {
    let g = &frame.grid;
    let mats = weingarten_matrices(frame);
    let inner: Vec<usize> = (0..g.len()).filter(|&k| g.is_inner(k, 1)).collect();
    let scale = inner.iter().flat_map(|&k| mats[k].iter().map(|a| a.amax())).fold(0.0, f64::max);
    if scale == 0.0 {
        return WeingartenReport { off_diagonal: 0.0, commutator: 0.0 };
    }
    let (mut off, mut comm): (f64, f64) = (0.0, 0.0);
    for &k in &inner {
        let a = &mats[k];
        for x in a {
            for (r, c) in (0..x.nrows()).flat_map(|r| (0..x.ncols()).map(move |c| (r, c))) {
                if r != c {
                    off = off.max(x[(r, c)].abs());
                }
            }
        }
        for p in 0..a.len() {
            for q in p + 1..a.len() {
                comm = comm.max((&a[p] * &a[q] - &a[q] * &a[p]).amax());
            }
        }
    }
    WeingartenReport { off_diagonal: off / scale, commutator: comm / (scale * scale) }
}

/// Rotates normals `a` and `b` into each other by `angle(u)`; a frame whose
/// normal connection form is `dangle`.
pub fn rotate_normals(frame: &Frame, a: usize, b: usize, angle: impl Fn(&[f64]) -> f64) -> Result<Frame> {
    let g = frame.grid.clone();
    let th = FieldN::from_fn(&g, angle);
    let (na, nb) = (frame.normals[a].clone(), frame.normals[b].clone());
    let mix = |p: &[FieldN], q: &[FieldN], sign: f64| -> Vec<FieldN> {
        p.iter()
            .zip(q)
            .map(|(x, y)| {
                let v = (0..g.len())
                    .map(|k| {
                        let (s, c) = th.values()[k].sin_cos();
                        c * x.values()[k] + sign * s * y.values()[k]
                    })
                    .collect();
                FieldN::from_values(g.clone(), v).expect("node count")
            })
            .collect()
    };
    let mut out = frame.clone();
    out.set_normal(a, mix(&na, &nb, 1.0))?;
    out.set_normal(b, mix(&nb, &na, -1.0))?;
    Ok(out)
}
