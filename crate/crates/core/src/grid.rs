//! Tensor-product grids, finite differences and the two integrators every
//! other module leans on: path integration of closed 1-forms and a Goursat
//! solver for `u_xy = p u_x + q u_y + r u`.
//!
//! Fields are stored with the x index running fastest (`k = j * nx + i`), which
//! is also the row order of the CSV export.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use crate::error::{Error, Result};

/// Default relative tolerance for the closedness test of [`integrate_closed_form`].
pub const CLOSED_FORM_TOL: f64 = 1e-2;

/// Fixed-point iterations allowed per Goursat cell.
pub const GOURSAT_MAX_SWEEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Rectangular node grid; node `(i, j)` sits at `(x0 + i hx, y0 + j hy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, hx: f64, hy: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Config(format!("grid needs at least 3x3 nodes, got {nx}x{ny}")));
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(Error::Config(format!("grid spacings must be positive, got {hx}, {hy}")));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::Config("grid origin must be finite".into()));
        }
        Ok(Self { nx, ny, x0, y0, hx, hy })
    }

    /// Grid with `nx` by `ny` nodes whose first and last nodes sit on the interval ends.
    pub fn spanning(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Config(format!("grid needs at least 3x3 nodes, got {nx}x{ny}")));
        }
        let hx = (x.1 - x.0) / (nx - 1) as f64;
        let hy = (y.1 - y.0) / (ny - 1) as f64;
        Self::new(nx, ny, x.0, y.0, hx, hy)
    }

    /// Grid covering one period `[x0, x0 + lx) x [y0, y0 + ly)` without the duplicated end nodes.
    pub fn periodic(nx: usize, ny: usize, x0: f64, y0: f64, lx: f64, ly: f64) -> Result<Self> {
        Self::new(nx, ny, x0, y0, lx / nx as f64, ly / ny as f64)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.x(i), self.y(j))
    }

    pub fn h_max(&self) -> f64 {
        self.hx.max(self.hy)
    }

    pub fn same_as(&self, other: &Grid2D) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.x0 - other.x0).abs() <= 1e-12 * (1.0 + self.x0.abs())
            && (self.y0 - other.y0).abs() <= 1e-12 * (1.0 + self.y0.abs())
            && (self.hx - other.hx).abs() <= 1e-12 * self.hx
            && (self.hy - other.hy).abs() <= 1e-12 * self.hy
    }

    /// True when `(i, j)` is at least `margin` nodes away from every edge.
    pub fn is_inner(&self, i: usize, j: usize, margin: usize) -> bool {
        i >= margin && j >= margin && i + margin < self.nx && j + margin < self.ny
    }

    pub fn x_coords(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn y_coords(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }
}

/// Real samples on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("field contains non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values already known to fit the grid.
    pub(crate) fn raw(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coords(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest magnitude over nodes at least `margin` away from the boundary.
    pub fn max_abs_inner(&self, margin: usize) -> f64 {
        let g = self.grid;
        let mut m: f64 = 0.0;
        for j in margin..g.ny.saturating_sub(margin) {
            for i in margin..g.nx.saturating_sub(margin) {
                m = m.max(self.at(i, j).abs());
            }
        }
        m
    }

    /// Values along the bottom edge `y = y0`.
    pub fn x_axis(&self) -> Vec<f64> {
        (0..self.grid.nx).map(|i| self.at(i, 0)).collect()
    }

    /// Values along the left edge `x = x0`.
    pub fn y_axis(&self) -> Vec<f64> {
        (0..self.grid.ny).map(|j| self.at(0, j)).collect()
    }

    pub fn diff(&self, axis: Axis) -> Self {
        diff(self, axis)
    }

    /// CSV with header `x,y,value`, x running fastest.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,value\n");
        for k in 0..self.grid.len() {
            let (x, y) = self.grid.coords(k);
            let _ = writeln!(s, "{},{},{}", x, y, self.values[k]);
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses the `x,y,value` layout written by [`to_csv`](Self::to_csv); the
    /// grid is inferred from the distinct coordinates.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with('x')) {
                continue;
            }
            let parts: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad CSV line {}: {e}", n + 1)))?;
            if parts.len() != 3 {
                return Err(Error::Config(format!("CSV line {} needs 3 columns", n + 1)));
            }
            rows.push((parts[0], parts[1], parts[2]));
        }
        let distinct = |sel: fn(&(f64, f64, f64)) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(sel).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
            v
        };
        let xs = distinct(|r| r.0);
        let ys = distinct(|r| r.1);
        if xs.len() < 3 || ys.len() < 3 || xs.len() * ys.len() != rows.len() {
            return Err(Error::Config("CSV does not describe a full tensor grid".into()));
        }
        let grid = Grid2D::spanning(xs.len(), ys.len(), (xs[0], xs[xs.len() - 1]), (ys[0], ys[ys.len() - 1]))?;
        let mut values = vec![f64::NAN; grid.len()];
        for (x, y, v) in rows {
            let i = ((x - grid.x0) / grid.hx).round() as usize;
            let j = ((y - grid.y0) / grid.hy).round() as usize;
            if i >= grid.nx || j >= grid.ny {
                return Err(Error::Config("CSV grid is not uniform".into()));
            }
            values[grid.idx(i, j)] = v;
        }
        Self::from_values(grid, values)
    }
}

macro_rules! field_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ScalarField2D> for &ScalarField2D {
            type Output = ScalarField2D;
            fn $method(self, rhs: &ScalarField2D) -> ScalarField2D {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $tr<f64> for &ScalarField2D {
            type Output = ScalarField2D;
            fn $method(self, rhs: f64) -> ScalarField2D {
                self.map(|a| a $op rhs)
            }
        }
    };
}
field_binop!(Add, add, +);
field_binop!(Sub, sub, -);
field_binop!(Mul, mul, *);

impl Neg for &ScalarField2D {
    type Output = ScalarField2D;
    fn neg(self) -> ScalarField2D {
        self.map(|a| -a)
    }
}

/// Second-order derivative of a strided line: centered inside, one-sided
/// three-point stencils at both ends.
pub(crate) fn diff_line(src: &[f64], dst: &mut [f64], start: usize, stride: usize, n: usize, h: f64) {
    debug_assert!(n >= 3);
    let v = |k: usize| src[start + k * stride];
    let inv = 1.0 / (2.0 * h);
    dst[start] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) * inv;
    for k in 1..n - 1 {
        dst[start + k * stride] = (v(k + 1) - v(k - 1)) * inv;
    }
    dst[start + (n - 1) * stride] = (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) * inv;
}

/// Partial derivative along `axis`, second order everywhere.
pub fn diff(f: &ScalarField2D, axis: Axis) -> ScalarField2D {
    let g = f.grid;
    let mut out = vec![0.0; g.len()];
    match axis {
        Axis::X => {
            for j in 0..g.ny {
                diff_line(&f.values, &mut out, g.idx(0, j), 1, g.nx, g.hx);
            }
        }
        Axis::Y => {
            for i in 0..g.nx {
                diff_line(&f.values, &mut out, g.idx(i, 0), g.nx, g.ny, g.hy);
            }
        }
    }
    ScalarField2D { grid: g, values: out }
}

/// Potential of a closed 1-form together with its consistency diagnostics.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub potential: ScalarField2D,
    /// `max |a_y - b_x|` with finite differences.
    pub closedness_residual: f64,
    /// Largest disagreement between the x-then-y and y-then-x staircases.
    pub path_discrepancy: f64,
}

/// Integrates `a dx + b dy` from the grid origin with `F(x0, y0) = base`,
/// using [`CLOSED_FORM_TOL`].
pub fn integrate_closed_form(a: &ScalarField2D, b: &ScalarField2D, base: f64) -> Result<ClosedForm> {
    integrate_closed_form_with(a, b, base, CLOSED_FORM_TOL)
}

/// As [`integrate_closed_form`]; the form is rejected when
/// `max|a_y - b_x| > tol * (1 + max(|a_y|, |b_x|))`.
pub fn integrate_closed_form_with(
    a: &ScalarField2D,
    b: &ScalarField2D,
    base: f64,
    tol: f64,
) -> Result<ClosedForm> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let a_y = diff(a, Axis::Y);
    let b_x = diff(b, Axis::X);
    let residual = a_y.max_abs_diff(&b_x);
    let scale = a_y.max_abs().max(b_x.max_abs());
    let tolerance = tol * (1.0 + scale);
    if residual > tolerance {
        return Err(Error::NotClosed { residual, tolerance });
    }

    let potential = staircase_xy(a, b, base);
    let other = staircase_yx(a, b, base);
    Ok(ClosedForm {
        path_discrepancy: potential.max_abs_diff(&other),
        potential,
        closedness_residual: residual,
    })
}

fn staircase_xy(a: &ScalarField2D, b: &ScalarField2D, base: f64) -> ScalarField2D {
    let g = a.grid;
    let mut f = vec![0.0; g.len()];
    f[0] = base;
    for i in 1..g.nx {
        f[g.idx(i, 0)] = f[g.idx(i - 1, 0)] + 0.5 * g.hx * (a.at(i - 1, 0) + a.at(i, 0));
    }
    for i in 0..g.nx {
        for j in 1..g.ny {
            f[g.idx(i, j)] = f[g.idx(i, j - 1)] + 0.5 * g.hy * (b.at(i, j - 1) + b.at(i, j));
        }
    }
    ScalarField2D { grid: g, values: f }
}

fn staircase_yx(a: &ScalarField2D, b: &ScalarField2D, base: f64) -> ScalarField2D {
    let g = a.grid;
    let mut f = vec![0.0; g.len()];
    f[0] = base;
    for j in 1..g.ny {
        f[g.idx(0, j)] = f[g.idx(0, j - 1)] + 0.5 * g.hy * (b.at(0, j - 1) + b.at(0, j));
    }
    for j in 0..g.ny {
        for i in 1..g.nx {
            f[g.idx(i, j)] = f[g.idx(i - 1, j)] + 0.5 * g.hx * (a.at(i - 1, j) + a.at(i, j));
        }
    }
    ScalarField2D { grid: g, values: f }
}

/// Solves `u_xy = p u_x + q u_y + r u` with `u` prescribed on `y = y0`
/// (`u_on_x_axis`, length `nx`) and on `x = x0` (`u_on_y_axis`, length `ny`).
///
/// Each cell is closed by the box rule
/// `u11 = u10 + u01 - u00 + hx hy RHS(mid)`, where the midpoint right-hand side
/// uses cell averages of the coefficients, of `u`, and of its edge differences.
/// The unknown corner enters `RHS(mid)` and is found by a fixed-point sweep.
pub fn goursat_solve(
    p: &ScalarField2D,
    q: &ScalarField2D,
    r: &ScalarField2D,
    u_on_x_axis: &[f64],
    u_on_y_axis: &[f64],
) -> Result<ScalarField2D> {
    let g = p.grid;
    if !g.same_as(&q.grid) || !g.same_as(&r.grid) {
        return Err(Error::GridMismatch);
    }
    if u_on_x_axis.len() != g.nx {
        return Err(Error::AxisLength { expected: g.nx, got: u_on_x_axis.len() });
    }
    if u_on_y_axis.len() != g.ny {
        return Err(Error::AxisLength { expected: g.ny, got: u_on_y_axis.len() });
    }
    let (cx, cy) = (u_on_x_axis[0], u_on_y_axis[0]);
    if (cx - cy).abs() > 1e-9 * (1.0 + cx.abs().max(cy.abs())) {
        return Err(Error::CornerMismatch { x_axis: cx, y_axis: cy });
    }

    let (hx, hy) = (g.hx, g.hy);
    let mut u = vec![0.0; g.len()];
    for i in 0..g.nx {
        u[g.idx(i, 0)] = u_on_x_axis[i];
    }
    for j in 0..g.ny {
        u[g.idx(0, j)] = u_on_y_axis[j];
    }
    let avg4 = |f: &ScalarField2D, i: usize, j: usize| {
        0.25 * (f.at(i, j) + f.at(i + 1, j) + f.at(i, j + 1) + f.at(i + 1, j + 1))
    };

    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let u00 = u[g.idx(i, j)];
            let u10 = u[g.idx(i + 1, j)];
            let u01 = u[g.idx(i, j + 1)];
            let (pm, qm, rm) = (avg4(p, i, j), avg4(q, i, j), avg4(r, i, j));
            let box_rule = |u11: f64| {
                let ux = ((u10 - u00) + (u11 - u01)) / (2.0 * hx);
                let uy = ((u01 - u00) + (u11 - u10)) / (2.0 * hy);
                let um = 0.25 * (u00 + u10 + u01 + u11);
                u10 + u01 - u00 + hx * hy * (pm * ux + qm * uy + rm * um)
            };

            let mut cur = u10 + u01 - u00;
            let mut prev_step = f64::INFINITY;
            let mut converged = false;
            for _ in 0..GOURSAT_MAX_SWEEPS {
                let next = box_rule(cur);
                let step = (next - cur).abs();
                cur = next;
                if step <= 1e-15 * (1.0 + cur.abs()) {
                    converged = true;
                    break;
                }
                if step >= prev_step {
                    return Err(Error::GoursatDiverged { x: g.x(i), y: g.y(j) });
                }
                prev_step = step;
            }
            // After the sweep cap the leftover is contraction^8 of the first step,
            // far below the O(h^4) cell truncation error unless the map barely contracts.
            if !converged {
                let again = box_rule(cur);
                if (again - cur).abs() > 1e-10 * (1.0 + cur.abs()) {
                    return Err(Error::GoursatDiverged { x: g.x(i), y: g.y(j) });
                }
            }
            u[g.idx(i + 1, j + 1)] = cur;
        }
    }
    Ok(ScalarField2D { grid: g, values: u })
}

/// Trapezoidal weight of node `k` out of `n` along one axis.
#[inline]
pub(crate) fn trap_weight(k: usize, n: usize) -> f64 {
    if k == 0 || k == n - 1 {
        0.5
    } else {
        1.0
    }
}

/// Two-dimensional trapezoidal rule over the grid rectangle.
pub fn surface_integral(f: &ScalarField2D) -> f64 {
    let g = f.grid;
    let mut sum = 0.0;
    for j in 0..g.ny {
        let wy = trap_weight(j, g.ny);
        for i in 0..g.nx {
            sum += wy * trap_weight(i, g.nx) * f.at(i, j);
        }
    }
    sum * g.hx * g.hy
}

/// Rectangle-rule integral over one period of a periodic grid.
pub fn periodic_integral(f: &ScalarField2D) -> f64 {
    let g = f.grid;
    f.values.iter().sum::<f64>() * g.hx * g.hy
}

/// Tensor grid in two or three dimensions; axis 0 runs fastest in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct GridN {
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
}

impl GridN {
    pub fn new(shape: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        let n = shape.len();
        if !(2..=3).contains(&n) || origin.len() != n || spacing.len() != n {
            return Err(Error::Config("GridN needs 2 or 3 consistent axes".into()));
        }
        if shape.iter().any(|&s| s < 3) {
            return Err(Error::Config("each axis needs at least 3 nodes".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Config("spacings must be positive".into()));
        }
        let mut strides = vec![1; n];
        for a in 1..n {
            strides[a] = strides[a - 1] * shape[a - 1];
        }
        Ok(Self { shape, origin, spacing, strides })
    }

    /// Grid whose axis `a` spans `bounds[a]` with `shape[a]` nodes.
    pub fn spanning(shape: &[usize], bounds: &[(f64, f64)]) -> Result<Self> {
        if shape.len() != bounds.len() || shape.iter().any(|&s| s < 2) {
            return Err(Error::Config("shape and bounds disagree".into()));
        }
        let origin = bounds.iter().map(|b| b.0).collect();
        let spacing = shape.iter().zip(bounds).map(|(&s, b)| (b.1 - b.0) / (s - 1) as f64).collect();
        Self::new(shape.to_vec(), origin, spacing)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h_max(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for a in 0..self.dim() {
            out[a] = k % self.shape[a];
            k /= self.shape[a];
        }
        out
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.multi_index(k).iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    pub fn is_inner(&self, k: usize, margin: usize) -> bool {
        self.multi_index(k)
            .iter()
            .zip(&self.shape)
            .all(|(&i, &n)| i >= margin && i + margin < n)
    }

    /// The 2D grid with the same nodes, when `dim() == 2`.
    pub fn as_grid2d(&self) -> Option<Grid2D> {
        (self.dim() == 2).then(|| Grid2D {
            nx: self.shape[0],
            ny: self.shape[1],
            x0: self.origin[0],
            y0: self.origin[1],
            hx: self.spacing[0],
            hy: self.spacing[1],
        })
    }
}

impl From<&Grid2D> for GridN {
    fn from(g: &Grid2D) -> Self {
        GridN::new(vec![g.nx, g.ny], vec![g.x0, g.y0], vec![g.hx, g.hy]).expect("valid Grid2D")
    }
}

/// Real samples on a [`GridN`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldN {
    grid: GridN,
    values: Vec<f64>,
}

impl FieldN {
    pub fn from_values(grid: GridN, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &GridN, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn constant(grid: &GridN, v: f64) -> Self {
        Self { grid: grid.clone(), values: vec![v; grid.len()] }
    }

    pub fn grid(&self) -> &GridN {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn diff(&self, axis: usize) -> Self {
        let g = &self.grid;
        let mut out = vec![0.0; g.len()];
        let stride = g.stride(axis);
        let n = g.shape[axis];
        for k in 0..g.len() {
            if g.multi_index(k)[axis] == 0 {
                diff_line(&self.values, &mut out, k, stride, n, g.spacing[axis]);
            }
        }
        Self { grid: g.clone(), values: out }
    }

    pub fn to_2d(&self) -> Option<ScalarField2D> {
        self.grid.as_grid2d().map(|g| ScalarField2D::raw(g, self.values.clone()))
    }
}

impl From<&ScalarField2D> for FieldN {
    fn from(f: &ScalarField2D) -> Self {
        FieldN { grid: GridN::from(f.grid()), values: f.values.clone() }
    }
}

/// Integrates the closed 1-form `sum_a c[a] du^a` along the axis-ordered
/// staircase (axis 0, then 1, then 2) with trapezoids, starting from `base` at
/// the grid origin. Returns the potential and `max |d_b c_a - d_a c_b|`.
pub fn integrate_closed_form_n(components: &[FieldN], base: f64, tol: f64) -> Result<(FieldN, f64)> {
    let g = components
        .first()
        .map(|c| c.grid.clone())
        .ok_or_else(|| Error::Config("no components".into()))?;
    let n = g.dim();
    if components.len() != n || components.iter().any(|c| c.grid != g) {
        return Err(Error::GridMismatch);
    }
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let da = components[a].diff(b);
            let db = components[b].diff(a);
            residual = residual.max(da.max_abs_diff(&db));
            scale = scale.max(da.max_abs()).max(db.max_abs());
        }
    }
    let tolerance = tol * (1.0 + scale);
    if residual > tolerance {
        return Err(Error::NotClosed { residual, tolerance });
    }

    let mut f = vec![0.0; g.len()];
    f[0] = base;
    for a in 0..n {
        let stride = g.stride(a);
        let h = g.spacing[a];
        for k in 0..g.len() {
            let idx = g.multi_index(k);
            if idx[a] == 0 || idx[a + 1..].iter().any(|&i| i != 0) {
                continue;
            }
            let c = &components[a].values;
            f[k] = f[k - stride] + 0.5 * h * (c[k - stride] + c[k]);
        }
    }
    Ok((FieldN { grid: g, values: f }, residual))
}
