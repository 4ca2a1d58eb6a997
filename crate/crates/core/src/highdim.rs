//! Orthogonal nets in two and three dimensions: rotation coefficients, Lamé
//! solutions, direction cosines, flat coordinates and the frame `W` built on them.

use nalgebra::{DMatrix, DVector};

use crate::construction::{det_cond, sigma_ratio, COND_MAX, DET_MIN};
use crate::error::{Error, Result};
use crate::grid::{integrate_closed_form_n, Axis, FieldN, GridN, ScalarField2D, CLOSED_FORM_TOL};

/// Relative Lamé residual above which a march is declared non-convergent.
pub const LAME_TOL: f64 = 1e-2;

/// `β_ij`, `i ≠ j`, on a 2D or 3D grid.
#[derive(Debug, Clone)]
pub struct RotationCoeffs {
    grid: GridN,
    beta: Vec<FieldN>,
}

impl RotationCoeffs {
    /// `f(i, j, u)` is evaluated for `i ≠ j` only.
    pub fn from_fn(grid: &GridN, f: impl Fn(usize, usize, &[f64]) -> f64) -> Self {
        let n = grid.dim();
        let mut beta = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                beta.push(if i == j {
                    FieldN::constant(grid, 0.0)
                } else {
                    FieldN::from_fn(grid, |u| f(i, j, u))
                });
            }
        }
        Self { grid: grid.clone(), beta }
    }

    /// `fields[i * n + j]`; diagonal entries are ignored.
    pub fn from_fields(fields: Vec<FieldN>) -> Result<Self> {
        let grid = fields.first().ok_or(Error::GridMismatch)?.grid().clone();
        let n = grid.dim();
        if fields.len() != n * n || fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        let mut beta = fields;
        for i in 0..n {
            beta[i * n + i] = FieldN::constant(&grid, 0.0);
        }
        Ok(Self { grid, beta })
    }

    /// Surfaces: `β₁₂ = -φ_y`, `β₂₁ = φ_x`.
    pub fn from_phi(phi: &ScalarField2D) -> Self {
        let grid = GridN::from(phi.grid());
        let px = FieldN::from(&phi.diff(Axis::X));
        let py = FieldN::from(&phi.diff(Axis::Y));
        let zero = FieldN::constant(&grid, 0.0);
        Self { grid, beta: vec![zero.clone(), py.map(|v| -v), px, zero] }
    }

    pub fn grid(&self) -> &GridN {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldN {
        &self.beta[i * self.n() + j]
    }

    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.beta[i * self.n() + j].values()[k]
    }

    /// `Ω_d` with `∂_d X = X Ω_d`: `Ω_d[d][i] = β_id`, `Ω_d[i][d] = -β_id`.
    fn omega(&self, d: usize, k: usize) -> DMatrix<f64> {
        let n = self.n();
        let mut o = DMatrix::zeros(n, n);
        for i in (0..n).filter(|&i| i != d) {
            let b = self.at(i, d, k);
            o[(d, i)] = b;
            o[(i, d)] = -b;
        }
        o
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationReport {
    /// `max |∂_k β_ij - β_ik β_kj|` over distinct `i, j, k`; zero for `n = 2`.
    pub first: f64,
    /// `max |∂_i β_ij + ∂_j β_ji + Σ_k β_ki β_kj|`.
    pub second: f64,
}

pub fn check_rotation(beta: &RotationCoeffs) -> RotationReport {
    let n = beta.n();
    let len = beta.grid.len();
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for k in (0..n).filter(|&k| k != i && k != j) {
                let d = beta.get(i, j).diff(k);
                for p in 0..len {
                    first = first.max((d.values()[p] - beta.at(i, k, p) * beta.at(k, j, p)).abs());
                }
            }
            let (a, b) = (beta.get(i, j).diff(i), beta.get(j, i).diff(j));
            for p in 0..len {
                let sum: f64 = (0..n)
                    .filter(|&k| k != i && k != j)
                    .map(|k| beta.at(k, i, p) * beta.at(k, j, p))
                    .sum();
                second = second.max((a.values()[p] + b.values()[p] + sum).abs());
            }
        }
    }
    RotationReport { first, second }
}

/// One solution `H = (H_1, …, H_n)` of `∂_i H_j = β_ij H_i`.
#[derive(Debug, Clone)]
pub struct LameSolution {
    pub h: Vec<FieldN>,
    pub residual: f64,
}

/// `max |∂_i H_j - β_ij H_i|`, `i ≠ j`.
pub fn lame_residual(beta: &RotationCoeffs, h: &[FieldN]) -> f64 {
    let n = beta.n();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in (0..n).filter(|&i| i != j) {
            let d = h[j].diff(i);
            for p in 0..beta.grid.len() {
                worst = worst.max((d.values()[p] - beta.at(i, j, p) * h[i].values()[p]).abs());
            }
        }
    }
    worst
}

/// Marches the Lamé system from `H_j` given along the `u^j` axis
/// (`axis_data[j]`, length `shape[j]`).
///
/// At each node every available backward neighbour gives a trapezoid update;
/// the updates are averaged and the node values solved for implicitly.
pub fn solve_lame(beta: &RotationCoeffs, axis_data: &[Vec<f64>]) -> Result<LameSolution> {
    solve_lame_with(beta, axis_data, LAME_TOL)
}

/// As [`solve_lame`] with a custom relative acceptance tolerance.
pub fn solve_lame_with(beta: &RotationCoeffs, axis_data: &[Vec<f64>], tol: f64) -> Result<LameSolution> {
    let g = &beta.grid;
    let n = g.dim();
    if axis_data.len() != n {
        return Err(Error::AxisLength { expected: n, got: axis_data.len() });
    }
    for (j, d) in axis_data.iter().enumerate() {
        if d.len() != g.shape()[j] {
            return Err(Error::AxisLength { expected: g.shape()[j], got: d.len() });
        }
    }
    let mut h: Vec<Vec<f64>> = vec![vec![0.0; g.len()]; n];
    for k in 0..g.len() {
        let idx = g.multi_index(k);
        let mut m = DMatrix::<f64>::identity(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for j in 0..n {
            let avail: Vec<usize> = (0..n).filter(|&i| i != j && idx[i] > 0).collect();
            if avail.is_empty() {
                rhs[j] = axis_data[j][idx[j]];
                continue;
            }
            let w = 1.0 / avail.len() as f64;
            for &i in &avail {
                let km = k - g.stride(i);
                let half = 0.5 * g.spacing()[i];
                rhs[j] += w * (h[j][km] + half * beta.at(i, j, km) * h[i][km]);
                m[(j, i)] -= w * half * beta.at(i, j, k);
            }
        }
        let sol = m.lu().solve(&rhs).ok_or(Error::NonConvergent { residual: f64::INFINITY, tolerance: tol })?;
        for j in 0..n {
            h[j][k] = sol[j];
        }
    }
    let h: Vec<FieldN> = h.into_iter().map(|v| FieldN::from_values(g.clone(), v)).collect::<Result<_>>()?;
    let residual = lame_residual(beta, &h);
    let scale = h.iter().map(FieldN::max_abs).fold(0.0, f64::max);
    let tolerance = tol * (1.0 + scale);
    if !(residual <= tolerance) {
        return Err(Error::NonConvergent { residual, tolerance });
    }
    Ok(LameSolution { h, residual })
}

/// Orthogonal matrix field `X`; column `i` is the unit vector `X_i`.
#[derive(Debug, Clone)]
pub struct CosineFrame {
    grid: GridN,
    entries: Vec<FieldN>,
    /// `max ‖XᵗX - E‖` (no re-orthonormalisation is applied).
    pub orthogonality_drift: f64,
    /// `max |∂_d X - X Ω_d|`.
    pub residual: f64,
}

impl CosineFrame {
    pub fn n(&self) -> usize {
        self.grid.dim()
    }

    pub fn grid(&self) -> &GridN {
        &self.grid
    }

    /// `X_{ri}`.
    pub fn entry(&self, r: usize, i: usize) -> &FieldN {
        &self.entries[r * self.n() + i]
    }

    pub fn node(&self, k: usize) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |r, c| self.entries[r * n + c].values()[k])
    }
}

fn matrix_fields(grid: &GridN, rows: usize, cols: usize, nodes: &[DMatrix<f64>]) -> Vec<FieldN> {
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = nodes.iter().map(|m| m[(r, c)]).collect();
            out.push(FieldN::from_values(grid.clone(), v).expect("node count"));
        }
    }
    out
}

/// `max |∂_d X - X Ω_d|` over all directions and nodes.
pub fn cosine_residual(beta: &RotationCoeffs, frame: &CosineFrame) -> f64 {
    let n = beta.n();
    let mut worst: f64 = 0.0;
    for d in 0..n {
        let dx: Vec<FieldN> = frame.entries.iter().map(|f| f.diff(d)).collect();
        for k in 0..beta.grid.len() {
            let rhs = frame.node(k) * beta.omega(d, k);
            for r in 0..n {
                for c in 0..n {
                    worst = worst.max((dx[r * n + c].values()[k] - rhs[(r, c)]).abs());
                }
            }
        }
    }
    worst
}

/// Marches `∂_d X = X Ω_d` from `X0` at the base node with the same averaged
/// implicit trapezoid as [`solve_lame`].
pub fn direction_cosines(beta: &RotationCoeffs, x0: &DMatrix<f64>) -> Result<CosineFrame> {
    let g = &beta.grid;
    let n = g.dim();
    if x0.nrows() != n || x0.ncols() != n {
        return Err(Error::Config(format!("X0 must be {n}x{n}")));
    }
    let e = DMatrix::<f64>::identity(n, n);
    if (x0.transpose() * x0 - &e).amax() > 1e-10 {
        return Err(Error::Config("X0 is not orthogonal".into()));
    }
    let mut nodes: Vec<DMatrix<f64>> = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let idx = g.multi_index(k);
        let avail: Vec<usize> = (0..n).filter(|&d| idx[d] > 0).collect();
        if avail.is_empty() {
            nodes.push(x0.clone());
            continue;
        }
        let w = 1.0 / avail.len() as f64;
        let mut lhs = e.clone();
        let mut rhs = DMatrix::<f64>::zeros(n, n);
        for &d in &avail {
            let km = k - g.stride(d);
            let half = 0.5 * g.spacing()[d];
            rhs += &nodes[km] * (&e + beta.omega(d, km) * half) * w;
            lhs -= beta.omega(d, k) * (half * w);
        }
        // X lhs = rhs
        let xt = lhs
            .transpose()
            .lu()
            .solve(&rhs.transpose())
            .ok_or(Error::NonConvergent { residual: f64::INFINITY, tolerance: 0.0 })?;
        nodes.push(xt.transpose());
    }
    let drift = nodes.iter().map(|x| (x.transpose() * x - &e).amax()).fold(0.0, f64::max);
    let mut frame = CosineFrame {
        grid: g.clone(),
        entries: matrix_fields(g, n, n, &nodes),
        orthogonality_drift: drift,
        residual: 0.0,
    };
    frame.residual = cosine_residual(beta, &frame);
    Ok(frame)
}

/// Flat coordinates `s_i` of one Lamé solution.
#[derive(Debug, Clone)]
pub struct FlatCoords {
    pub s: Vec<FieldN>,
    /// Largest closedness residual of the forms `Σ_k X_ik H_k du^k`.
    pub closedness: f64,
    /// `max |Σ_i ∂_a s_i ∂_b s_i - δ_ab H_a²|`.
    pub metric_residual: f64,
}

/// Integrates `ds_i = Σ_k X_ik H_k du^k` with `s_i = base[i]` at the base node.
pub fn flat_coords(frame: &CosineFrame, lame: &LameSolution, base: &[f64]) -> Result<FlatCoords> {
    let n = frame.n();
    if lame.h.len() != n || base.len() != n {
        return Err(Error::GridMismatch);
    }
    let mut s = Vec::with_capacity(n);
    let mut closedness: f64 = 0.0;
    for i in 0..n {
        let comps: Vec<FieldN> =
            (0..n).map(|k| frame.entry(i, k).zip_map(&lame.h[k], |x, h| x * h)).collect();
        let (f, r) = integrate_closed_form_n(&comps, base[i], CLOSED_FORM_TOL)?;
        closedness = closedness.max(r);
        s.push(f);
    }
    let metric_residual = metric_residual(&s, &lame.h);
    Ok(FlatCoords { s, closedness, metric_residual })
}

/// `max |Σ_i ∂_a s_i ∂_b s_i - δ_ab H_a²|`.
pub fn metric_residual(s: &[FieldN], h: &[FieldN]) -> f64 {
    let n = s.len();
    let ds: Vec<Vec<FieldN>> = s.iter().map(|f| (0..n).map(|a| f.diff(a)).collect()).collect();
    let len = s[0].grid().len();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a..n {
            for p in 0..len {
                let g: f64 = (0..n).map(|i| ds[i][a].values()[p] * ds[i][b].values()[p]).sum();
                let target = if a == b { h[a].values()[p].powi(2) } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
    }
    worst
}

/// `U` (`n×m`), `V` (`m×m`) and `W` (`(n+m)×m`) on an `n`-dimensional grid.
#[derive(Debug, Clone)]
pub struct Submanifold {
    grid: GridN,
    m: usize,
    u: Vec<FieldN>,
    v: Vec<FieldN>,
    w: Vec<FieldN>,
}

impl Submanifold {
    pub fn grid(&self) -> &GridN {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.dim()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn u_node(&self, k: usize) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(self.n(), m, |r, c| self.u[r * m + c].values()[k])
    }

    pub fn v_node(&self, k: usize) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(m, m, |r, c| self.v[r * m + c].values()[k])
    }

    pub fn w_node(&self, k: usize) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(self.n() + m, m, |r, c| self.w[r * m + c].values()[k])
    }

    /// Entry `(r, c)` of `W`.
    pub fn w_entry(&self, r: usize, c: usize) -> &FieldN {
        &self.w[r * self.m + c]
    }

    /// `max ‖WᵗW - E_m‖_∞`.
    pub fn orthonormal_residual(&self) -> f64 {
        let e = DMatrix::<f64>::identity(self.m, self.m);
        (0..self.grid.len())
            .map(|k| {
                let w = self.w_node(k);
                (w.transpose() * &w - &e).amax()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `σ₂/σ₁` of `∂_d W` over inner nodes, for each direction `d`.
    pub fn rank1_ratios(&self) -> Vec<f64> {
        let (rows, m) = (self.n() + self.m, self.m);
        (0..self.n())
            .map(|d| {
                let dw: Vec<FieldN> = self.w.iter().map(|f| f.diff(d)).collect();
                (0..self.grid.len())
                    .filter(|&k| self.grid.is_inner(k, 1))
                    .filter_map(|k| sigma_ratio(&DMatrix::from_fn(rows, m, |r, c| dw[r * m + c].values()[k])))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// `max ‖V + Vᵗ - UᵗU - E‖`.
    pub fn v_symmetry_residual(&self) -> f64 {
        let e = DMatrix::<f64>::identity(self.m, self.m);
        (0..self.grid.len())
            .map(|k| {
                let (u, v) = (self.u_node(k), self.v_node(k));
                (&v + v.transpose() - u.transpose() * &u - &e).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// Assembles `W = (U V⁻¹; V⁻¹ - E)` from `m` sets of flat coordinates.
pub fn build_submanifold(flat: &[FlatCoords]) -> Result<Submanifold> {
    let first = flat.first().ok_or_else(|| Error::Config("at least one Lamé solution is required".into()))?;
    let grid = first.s[0].grid().clone();
    let n = grid.dim();
    let m = flat.len();
    if flat.iter().any(|f| f.s.len() != n || f.s.iter().any(|s| *s.grid() != grid)) {
        return Err(Error::GridMismatch);
    }
    let mut u = Vec::with_capacity(n * m);
    for i in 0..n {
        for f in flat {
            u.push(f.s[i].clone());
        }
    }
    let ds: Vec<Vec<Vec<FieldN>>> =
        flat.iter().map(|f| f.s.iter().map(|s| (0..n).map(|d| s.diff(d)).collect()).collect()).collect();
    let mut v = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let comps: Vec<FieldN> = (0..n)
                .map(|d| {
                    let mut acc = FieldN::constant(&grid, 0.0);
                    for i in 0..n {
                        let t = flat[a].s[i].zip_map(&ds[b][i][d], |x, y| x * y);
                        acc = acc.zip_map(&t, |x, y| x + y);
                    }
                    acc
                })
                .collect();
            let dot: f64 = (0..n).map(|i| flat[a].s[i].values()[0] * flat[b].s[i].values()[0]).sum();
            let base = 0.5 * (dot + if a == b { 1.0 } else { 0.0 });
            v.push(integrate_closed_form_n(&comps, base, CLOSED_FORM_TOL)?.0);
        }
    }
    let mut sub = Submanifold { grid: grid.clone(), m, u, v, w: Vec::new() };
    let e = DMatrix::<f64>::identity(m, m);
    let mut nodes = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let vn = sub.v_node(k);
        let (det, cond) = det_cond(&vn);
        let inv = if det >= DET_MIN && cond <= COND_MAX { vn.try_inverse() } else { None };
        let vi = inv.ok_or_else(|| {
            let p = grid.point(k);
            Error::SingularV { x: p[0], y: p[1], det, cond }
        })?;
        let mut w = DMatrix::zeros(n + m, m);
        w.rows_mut(0, n).copy_from(&(sub.u_node(k) * &vi));
        w.rows_mut(n, m).copy_from(&(&vi - &e));
        nodes.push(w);
    }
    sub.w = matrix_fields(&grid, n + m, m, &nodes);
    Ok(sub)
}

/// Direction cosines of a surface: columns `(cos φ, -sin φ)` and `(sin φ, cos φ)`.
pub fn phi_cosines(phi: f64) -> DMatrix<f64> {
    let (s, c) = phi.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize) -> GridN {
        GridN::spanning(&[n, n, n], &[(1.0, 1.4), (0.8, 1.2), (0.0, 0.4)]).unwrap()
    }

    /// Spherical coordinates `(r, θ, ϕ)` of flat space.
    fn spherical(g: &GridN) -> RotationCoeffs {
        RotationCoeffs::from_fn(g, |i, j, u| match (i, j) {
            (0, 1) => 1.0,
            (0, 2) => u[1].sin(),
            (1, 2) => u[1].cos(),
            _ => 0.0,
        })
    }

    fn spherical_frame(u: &[f64]) -> DMatrix<f64> {
        let (st, ct) = u[1].sin_cos();
        let (sp, cp) = u[2].sin_cos();
        DMatrix::from_row_slice(3, 3, &[st * cp, ct * cp, -sp, st * sp, ct * sp, cp, ct, -st, 0.0])
    }

    #[test]
    fn zero_rotation_is_trivial() {
        let g = GridN::spanning(&[5, 6, 7], &[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]).unwrap();
        let b = RotationCoeffs::from_fn(&g, |_, _, _| 0.0);
        assert_eq!(check_rotation(&b), RotationReport { first: 0.0, second: 0.0 });
        let data: Vec<Vec<f64>> = (0..3).map(|a| (0..g.shape()[a]).map(|i| 1.0 + (i as f64).sin()).collect()).collect();
        let lame = solve_lame(&b, &data).unwrap();
        for k in 0..g.len() {
            let idx = g.multi_index(k);
            for j in 0..3 {
                assert!((lame.h[j].values()[k] - data[j][idx[j]]).abs() < 1e-14);
            }
        }
        let x0 = phi_cosines(0.3).insert_row(2, 0.0).insert_column(2, 0.0);
        let mut x0 = x0;
        x0[(2, 2)] = 1.0;
        let frame = direction_cosines(&b, &x0).unwrap();
        assert!(frame.orthogonality_drift < 1e-14);
        assert!((frame.node(g.len() - 1) - &x0).amax() < 1e-14);
        let ones: Vec<Vec<f64>> = (0..3).map(|a| vec![1.0; g.shape()[a]]).collect();
        let lame = solve_lame(&b, &ones).unwrap();
        let id = DMatrix::identity(3, 3);
        let flat = flat_coords(&direction_cosines(&b, &id).unwrap(), &lame, &[0.0; 3]).unwrap();
        for k in 0..g.len() {
            let p = g.point(k);
            for i in 0..3 {
                assert!((flat.s[i].values()[k] - p[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rotation_negative_control() {
        let g = cube(9);
        let ok = RotationCoeffs::from_fn(&g, |i, j, _| if (i, j) == (0, 1) { 1.0 } else { 0.0 });
        let r = check_rotation(&ok);
        assert!(r.first < 1e-14 && r.second < 1e-14);
        let bad = RotationCoeffs::from_fn(&g, |i, j, u| if (i, j) == (0, 1) { u[2] } else { 0.0 });
        assert!((check_rotation(&bad).first - 1.0).abs() < 1e-12);
        let data: Vec<Vec<f64>> = (0..3).map(|a| vec![1.0; g.shape()[a]]).collect();
        assert!(matches!(solve_lame(&bad, &data), Err(Error::NonConvergent { .. })));
    }

    #[test]
    fn spherical_oracle_converges() {
        let mut errs = Vec::new();
        for n in [9, 17] {
            let g = cube(n);
            let b = spherical(&g);
            // H = (f(r), F(r) + g(θ), sinθ F(r) + G(θ) + k(ϕ)) with F' = f, G' = cosθ g.
            let (o, sp) = (g.origin().to_vec(), g.spacing().to_vec());
            let f = |r: f64| 1.0 + 0.5 * r;
            let big_f = |r: f64| r + 0.25 * r * r;
            let gg = |t: f64| 0.3 * t;
            let big_g = |t: f64| 0.3 * (t * t.sin() + t.cos());
            let k = |p: f64| 0.2 * p.cos();
            let axis = |a: usize| -> Vec<f64> {
                (0..n)
                    .map(|i| {
                        let mut u = o.clone();
                        u[a] += i as f64 * sp[a];
                        match a {
                            0 => f(u[0]),
                            1 => big_f(u[0]) + gg(u[1]),
                            _ => u[1].sin() * big_f(u[0]) + big_g(u[1]) + k(u[2]),
                        }
                    })
                    .collect()
            };
            let lame = solve_lame(&b, &[axis(0), axis(1), axis(2)]).unwrap();
            let mut e: f64 = 0.0;
            for p in 0..g.len() {
                let u = g.point(p);
                let exact = [f(u[0]), big_f(u[0]) + gg(u[1]), u[1].sin() * big_f(u[0]) + big_g(u[1]) + k(u[2])];
                for j in 0..3 {
                    e = e.max((lame.h[j].values()[p] - exact[j]).abs());
                }
            }
            let frame = direction_cosines(&b, &spherical_frame(&g.point(0))).unwrap();
            let mut ex: f64 = 0.0;
            for p in 0..g.len() {
                ex = ex.max((frame.node(p) - spherical_frame(&g.point(p))).amax());
            }
            errs.push((e, ex, frame.orthogonality_drift));
        }
        let (a, b) = (errs[0], errs[1]);
        assert!(a.0 / b.0 > 3.0, "{errs:?}");
        assert!(a.1 / b.1 > 3.0, "{errs:?}");
        assert!(b.1 < 1e-3);
    }

    #[test]
    fn spherical_flat_coords_are_cartesian() {
        let g = cube(17);
        let b = spherical(&g);
        let data: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                (0..g.shape()[a])
                    .map(|i| {
                        let mut u = g.origin().to_vec();
                        u[a] += i as f64 * g.spacing()[a];
                        [1.0, u[0], u[0] * u[1].sin()][a]
                    })
                    .collect()
            })
            .collect();
        let lame = solve_lame(&b, &data).unwrap();
        assert!(lame.residual < 1e-3);
        let frame = direction_cosines(&b, &spherical_frame(&g.point(0))).unwrap();
        let u0 = g.point(0);
        let base = [u0[0] * u0[1].sin() * u0[2].cos(), u0[0] * u0[1].sin() * u0[2].sin(), u0[0] * u0[1].cos()];
        let flat = flat_coords(&frame, &lame, &base).unwrap();
        let mut e: f64 = 0.0;
        for p in 0..g.len() {
            let u = g.point(p);
            let cart = [u[0] * u[1].sin() * u[2].cos(), u[0] * u[1].sin() * u[2].sin(), u[0] * u[1].cos()];
            for i in 0..3 {
                e = e.max((flat.s[i].values()[p] - cart[i]).abs());
            }
        }
        assert!(e < 1e-4, "{e}");
        assert!(flat.metric_residual < 1e-3);
    }

    #[test]
    fn phi_cosines_match_march() {
        let g2 = crate::grid::Grid2D::spanning(33, 33, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let phi = ScalarField2D::from_fn(g2, |x, y| 0.7 + 0.2 * (x * y).sin() + 0.1 * x);
        let b = RotationCoeffs::from_phi(&phi);
        assert!(check_rotation(&b).second < 1e-2);
        let frame = direction_cosines(&b, &phi_cosines(phi.values()[0])).unwrap();
        let mut e: f64 = 0.0;
        for k in 0..g2.len() {
            e = e.max((frame.node(k) - phi_cosines(phi.values()[k])).amax());
        }
        assert!(e < 1e-3, "{e}");
    }

    #[test]
    fn single_unit_column() {
        let g = GridN::spanning(&[5, 5], &[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let b = RotationCoeffs::from_fn(&g, |_, _, _| 0.0);
        let lame = solve_lame(&b, &[vec![0.0; 5], vec![0.0; 5]]).unwrap();
        let frame = direction_cosines(&b, &DMatrix::identity(2, 2)).unwrap();
        let flat = flat_coords(&frame, &lame, &[0.0, 0.0]).unwrap();
        let sub = build_submanifold(&[flat]).unwrap();
        let w = sub.w_node(7);
        assert_eq!(w.as_slice(), &[0.0, 0.0, 1.0]);
    }
}
