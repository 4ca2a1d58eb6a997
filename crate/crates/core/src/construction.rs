//! Frames `W = (U V⁻¹ ; V⁻¹ - E)` of submanifolds with flat normal bundle built
//! from solution pairs, plus their consistency checks and the inverse map.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{integrate_closed_form, Axis, Grid2D, ScalarField2D};
use crate::linsys::{PhiField, SolutionPair};

pub const DET_MIN: f64 = 1e-12;
pub const COND_MAX: f64 = 1e8;
/// Singular values below `RANK_TOL * σ₁` count as zero.
pub const RANK_TOL: f64 = 1e-6;
/// Allowed `|λμ + 1|` in [`reconstruct`].
pub const RECONSTRUCT_TOL: f64 = 1e-2;

/// A field of `rows x cols` matrices, stored entry by entry.
#[derive(Debug, Clone)]
pub struct MatrixField {
    grid: Grid2D,
    rows: usize,
    cols: usize,
    entries: Vec<ScalarField2D>,
}

/// `2 x m`: rows `κ` and `s`.
pub type UField = MatrixField;
/// `m x m` potentials with `dV = Uᵗ dU`.
pub type VField = MatrixField;
/// `(m+2) x m` orthonormal frame; column 1 is the point, the rest are parallel normals.
pub type WField = MatrixField;

impl MatrixField {
    pub fn new(rows: usize, cols: usize, entries: Vec<ScalarField2D>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::Config(format!("need {} entry fields for a {rows}x{cols} matrix field", rows * cols)));
        }
        let grid = *entries[0].grid();
        if entries.iter().any(|e| !e.grid().same_as(&grid)) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, rows, cols, entries })
    }

    pub fn from_nodes(grid: Grid2D, rows: usize, cols: usize, f: impl Fn(usize) -> DMatrix<f64>) -> Self {
        let mut data = vec![vec![0.0; grid.len()]; rows * cols];
        for k in 0..grid.len() {
            let m = f(k);
            for r in 0..rows {
                for c in 0..cols {
                    data[r * cols + c][k] = m[(r, c)];
                }
            }
        }
        let entries = data.into_iter().map(|v| ScalarField2D::raw(grid, v)).collect();
        Self { grid, rows, cols, entries }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> &ScalarField2D {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[ScalarField2D] {
        &self.entries
    }

    pub fn node(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.entries[r * self.cols + c].values()[k])
    }

    /// Column `c` as a per-node vector of length `rows`.
    pub fn column_at(&self, c: usize, k: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.entry(r, c).values()[k]).collect()
    }

    pub fn diff(&self, axis: Axis) -> Self {
        Self {
            grid: self.grid,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.diff(axis)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// `σ₂/σ₁` of a small matrix; `None` when `σ₁` vanishes.
pub fn sigma_ratio(m: &DMatrix<f64>) -> Option<f64> {
    if m.ncols() < 2 || m.nrows() < 2 {
        return Some(0.0);
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if sv[0] <= f64::MIN_POSITIVE {
        return None;
    }
    Some(sv[1] / sv[0])
}

/// Largest `σ₂/σ₁` of a matrix field over nodes `margin` away from the edge,
/// with the count of skipped nodes where `σ₁ = 0`.
pub fn max_sigma_ratio(f: &MatrixField, margin: usize) -> (f64, usize) {
    let g = f.grid;
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        if !g.is_inner(i, j, margin) {
            continue;
        }
        match sigma_ratio(&f.node(k)) {
            Some(r) => worst = worst.max(r),
            None => skipped += 1,
        }
    }
    (worst, skipped)
}

/// Numerical rank of a small matrix with threshold `RANK_TOL * σ₁`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_TOL * top && s > 0.0).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank1Report {
    pub ratio_x: f64,
    pub ratio_y: f64,
    pub skipped: usize,
}

pub fn assemble_u(pairs: &[SolutionPair]) -> Result<UField> {
    let first = pairs.first().ok_or_else(|| Error::Config("at least one pair is required".into()))?;
    let g = *first.s.grid();
    if pairs.iter().any(|p| !p.s.grid().same_as(&g) || !p.kappa.grid().same_as(&g)) {
        return Err(Error::GridMismatch);
    }
    let mut entries: Vec<ScalarField2D> = pairs.iter().map(|p| p.kappa.clone()).collect();
    entries.extend(pairs.iter().map(|p| p.s.clone()));
    MatrixField::new(2, pairs.len(), entries)
}

/// `σ₂/σ₁` of `U_x` and `U_y`; the characteristic system forces rank one.
pub fn u_rank_diagnostics(u: &UField) -> Rank1Report {
    let (ratio_x, sx) = max_sigma_ratio(&u.diff(Axis::X), 0);
    let (ratio_y, sy) = max_sigma_ratio(&u.diff(Axis::Y), 0);
    Rank1Report { ratio_x, ratio_y, skipped: sx + sy }
}

/// Potential of `κ^a dκ^b + s^a ds^b` with the value `base` at the grid origin.
pub fn potential_entry(u: &UField, a: usize, b: usize, base: f64) -> Result<ScalarField2D> {
    let (ka, sa) = (u.entry(0, a), u.entry(1, a));
    let (kb, sb) = (u.entry(0, b), u.entry(1, b));
    let dx = &(ka * &kb.diff(Axis::X)) + &(sa * &sb.diff(Axis::X));
    let dy = &(ka * &kb.diff(Axis::Y)) + &(sa * &sb.diff(Axis::Y));
    Ok(integrate_closed_form(&dx, &dy, base)?.potential)
}

/// Value `(κ^a κ^b + s^a s^b + δ_ab) / 2` that pins `V^{ab}` at the base node.
pub fn pinned_base(u: &UField, a: usize, b: usize) -> f64 {
    let k = |r: usize, c: usize| u.entry(r, c).values()[0];
    let delta = if a == b { 1.0 } else { 0.0 };
    0.5 * (k(0, a) * k(0, b) + k(1, a) * k(1, b) + delta)
}

/// Integrates `dV = Uᵗ dU` entrywise; at the base node `V` is the symmetric
/// matrix `(UᵗU + E)/2`.
pub fn integrate_v(u: &UField) -> Result<VField> {
    let m = u.cols;
    let mut entries = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            entries.push(potential_entry(u, a, b, pinned_base(u, a, b))?);
        }
    }
    MatrixField::new(m, m, entries)
}

/// `max ‖V + Vᵗ - UᵗU - E‖`.
pub fn v_symmetry_residual(u: &UField, v: &VField) -> f64 {
    let m = u.cols;
    let e = DMatrix::<f64>::identity(m, m);
    (0..u.grid.len())
        .map(|k| {
            let (un, vn) = (u.node(k), v.node(k));
            (&vn + vn.transpose() - un.transpose() * &un - &e).amax()
        })
        .fold(0.0, f64::max)
}

/// `|det|` and 2-norm condition number of a square matrix.
pub(crate) fn det_cond(m: &DMatrix<f64>) -> (f64, f64) {
    let det = m.determinant().abs();
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (det, if lo > 0.0 { hi / lo } else { f64::INFINITY })
}

/// Inverts every node of `v` under the chart guards.
pub(crate) fn invert_guarded(v: &VField) -> Result<Vec<DMatrix<f64>>> {
    let g = v.grid;
    (0..g.len())
        .map(|k| {
            let vn = v.node(k);
            let (det, cond) = det_cond(&vn);
            let inv = if det >= DET_MIN && cond <= COND_MAX { vn.try_inverse() } else { None };
            inv.ok_or_else(|| {
                let (x, y) = g.coords(k);
                Error::SingularV { x, y, det, cond }
            })
        })
        .collect()
}

pub fn assemble_w(u: &UField, v: &VField) -> Result<WField> {
    if !u.grid.same_as(&v.grid) || v.rows != u.cols || v.cols != u.cols {
        return Err(Error::GridMismatch);
    }
    let m = u.cols;
    let inv = invert_guarded(v)?;
    Ok(MatrixField::from_nodes(u.grid, m + 2, m, |k| {
        let vi = &inv[k];
        let top = u.node(k) * vi;
        let bottom = vi - DMatrix::<f64>::identity(m, m);
        let mut w = DMatrix::zeros(m + 2, m);
        w.rows_mut(0, 2).copy_from(&top);
        w.rows_mut(2, m).copy_from(&bottom);
        w
    }))
}

/// Builds `U`, `V` and `W` from a list of pairs.
pub fn build_frame(pairs: &[SolutionPair]) -> Result<(UField, VField, WField)> {
    let u = assemble_u(pairs)?;
    let v = integrate_v(&u)?;
    let w = assemble_w(&u, &v)?;
    Ok((u, v, w))
}

/// `max ‖WᵗW - E‖_∞` over all nodes.
pub fn check_orthonormal(w: &WField) -> f64 {
    let e = DMatrix::<f64>::identity(w.cols, w.cols);
    (0..w.grid.len())
        .map(|k| {
            let n = w.node(k);
            (n.transpose() * &n - &e).amax()
        })
        .fold(0.0, f64::max)
}

/// `σ₂/σ₁` of `W_x` and `W_y` over interior nodes.
pub fn check_rank1(w: &WField) -> Rank1Report {
    if w.cols < 2 {
        return Rank1Report { ratio_x: 0.0, ratio_y: 0.0, skipped: 0 };
    }
    let (ratio_x, sx) = max_sigma_ratio(&w.diff(Axis::X), 1);
    let (ratio_y, sy) = max_sigma_ratio(&w.diff(Axis::Y), 1);
    Rank1Report { ratio_x, ratio_y, skipped: sx + sy }
}

/// Coefficients of `(dw^a, dw^b) = E dx² + M dx dy + G dy²` for every pair of
/// columns; `_fd` from differences of `W`, `_cf` from `V⁻ᵗ (dUᵗdU) V⁻¹`.
#[derive(Debug, Clone)]
pub struct FormsField {
    pub m: usize,
    pub e_fd: Vec<ScalarField2D>,
    pub g_fd: Vec<ScalarField2D>,
    pub mixed: Vec<ScalarField2D>,
    pub e_cf: Vec<ScalarField2D>,
    pub g_cf: Vec<ScalarField2D>,
}

impl FormsField {
    pub fn at(&self, f: &[ScalarField2D], a: usize, b: usize) -> ScalarField2D {
        f[a * self.m + b].clone()
    }

    pub fn max_mixed(&self) -> f64 {
        self.mixed.iter().map(ScalarField2D::max_abs).fold(0.0, f64::max)
    }

    /// Largest gap between the two ways of computing `E` and `G`.
    pub fn max_discrepancy(&self) -> f64 {
        let e = self.e_fd.iter().zip(&self.e_cf).map(|(a, b)| a.max_abs_diff(b));
        let g = self.g_fd.iter().zip(&self.g_cf).map(|(a, b)| a.max_abs_diff(b));
        e.chain(g).fold(0.0, f64::max)
    }
}

pub fn fundamental_forms(w: &WField, u: &UField, v: &VField, phi: &PhiField) -> Result<FormsField> {
    let m = w.cols;
    let g = w.grid;
    let (wx, wy) = (w.diff(Axis::X), w.diff(Axis::Y));
    let (sx, sy) = (u.diff(Axis::X), u.diff(Axis::Y));
    let inv = invert_guarded(v)?;
    let size = m * m;
    let mut out: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; g.len()]; size]; 5];
    for k in 0..g.len() {
        let (nx, ny) = (wx.node(k), wy.node(k));
        let e = nx.transpose() * &nx;
        let gg = ny.transpose() * &ny;
        let mixed = nx.transpose() * &ny + ny.transpose() * &nx;

        let f = phi.field().values()[k];
        let (c2, s2) = (f.cos().powi(2), f.sin().powi(2));
        let sxr = DMatrix::from_fn(1, m, |_, a| sx.entry(1, a).values()[k]);
        let syr = DMatrix::from_fn(1, m, |_, a| sy.entry(1, a).values()[k]);
        let vi = &inv[k];
        let e_cf = vi.transpose() * (sxr.transpose() * &sxr / c2) * vi;
        let g_cf = vi.transpose() * (syr.transpose() * &syr / s2) * vi;
        for a in 0..m {
            for b in 0..m {
                let t = a * m + b;
                out[0][t][k] = e[(a, b)];
                out[1][t][k] = gg[(a, b)];
                out[2][t][k] = mixed[(a, b)];
                out[3][t][k] = e_cf[(a, b)];
                out[4][t][k] = g_cf[(a, b)];
            }
        }
    }
    let mut fields = out
        .into_iter()
        .map(|set| set.into_iter().map(|v| ScalarField2D::raw(g, v)).collect::<Vec<_>>());
    Ok(FormsField {
        m,
        e_fd: fields.next().unwrap(),
        g_fd: fields.next().unwrap(),
        mixed: fields.next().unwrap(),
        e_cf: fields.next().unwrap(),
        g_cf: fields.next().unwrap(),
    })
}

/// Projection from the pole `(0, …, 0, -1)` of the unit sphere.
pub fn stereographic(point: &[f64]) -> Result<Vec<f64>> {
    let (last, head) = point.split_last().ok_or(Error::AtPole)?;
    let d = 1.0 + last;
    if d.abs() <= 1e-12 {
        return Err(Error::AtPole);
    }
    Ok(head.iter().map(|p| p / d).collect())
}

/// Pairs and angle recovered from a frame.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub pairs: Vec<SolutionPair>,
    pub phi: PhiField,
    /// `max |λμ + 1|`
    pub residual: f64,
}

/// Recovers `U`, `V` and the angle from a frame field: `V = (lower + E)⁻¹`,
/// `U = upper V`, `tanφ = κ¹_x / s¹_x`.
pub fn reconstruct(w: &WField) -> Result<Reconstruction> {
    reconstruct_with(w, RECONSTRUCT_TOL)
}

pub fn reconstruct_with(w: &WField, tol: f64) -> Result<Reconstruction> {
    let m = w.cols;
    if w.rows != m + 2 {
        return Err(Error::InconsistentFrame { reason: format!("expected {} rows, got {}", m + 2, w.rows) });
    }
    let g = w.grid;
    let mut nodes = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let n = w.node(k);
        let block = n.rows(2, m).into_owned() + DMatrix::<f64>::identity(m, m);
        let v = block.try_inverse().filter(|v| v.iter().all(|x| x.is_finite()));
        let v = v.ok_or_else(|| {
            let (x, y) = g.coords(k);
            Error::SingularBlock { x, y }
        })?;
        nodes.push(n.rows(0, 2).into_owned() * v);
    }
    let u = MatrixField::from_nodes(g, 2, m, |k| nodes[k].clone());
    let k1x = u.entry(0, 0).diff(Axis::X);
    let k1y = u.entry(0, 0).diff(Axis::Y);
    let s1x = u.entry(1, 0).diff(Axis::X);
    let s1y = u.entry(1, 0).diff(Axis::Y);
    let floor = 1e-12 * (1.0 + u.entry(1, 0).max_abs());
    let mut phi = vec![0.0; g.len()];
    let mut residual: f64 = 0.0;
    for k in 0..g.len() {
        let (dx, dy) = (s1x.values()[k], s1y.values()[k]);
        if dx.abs() <= floor || dy.abs() <= floor {
            let (x, y) = g.coords(k);
            return Err(Error::InconsistentFrame {
                reason: format!("s1 derivative vanishes at ({x:.6}, {y:.6})"),
            });
        }
        let lambda = k1x.values()[k] / dx;
        let mu = k1y.values()[k] / dy;
        residual = residual.max((lambda * mu + 1.0).abs());
        phi[k] = lambda.atan();
    }
    if residual > tol {
        return Err(Error::InconsistentFrame { reason: format!("|λμ+1| reaches {residual:.3e}") });
    }
    let phi = PhiField::new(ScalarField2D::raw(g, phi))?;
    let pairs = (0..m)
        .map(|a| SolutionPair::new(u.entry(0, a).clone(), u.entry(1, a).clone(), &phi))
        .collect::<Result<Vec<_>>>()?;
    Ok(Reconstruction { pairs, phi, residual })
}
