//! Integrable evolutions of the angle field and of its solution pairs, with
//! the nonlocal potentials `p`, `q` and the conserved functional `∬ φ_x φ_y`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{diff, periodic_integral, surface_integral, Axis, Grid2D, ScalarField2D};
use crate::linsys::PhiField;

/// Default constant in `dt ≤ C · min(hx, hy)³`.
pub const CFL_DEFAULT: f64 = 0.1;

/// Width of the frozen boundary band; the third-derivative stencil reaches two nodes.
pub const FROZEN_BAND: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    /// Third-order flow in `x` with nonlocality `p`.
    T,
    /// Third-order flow in `y` with nonlocality `q`.
    Tau,
    /// Sum of both.
    Mvn,
}

impl FromStr for Flow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(Flow::T),
            "tau" => Ok(Flow::Tau),
            "mvn" => Ok(Flow::Mvn),
            other => Err(Error::Config(format!("unknown flow '{other}' (expected t, tau or mvn)"))),
        }
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flow::T => "t",
            Flow::Tau => "tau",
            Flow::Mvn => "mvn",
        })
    }
}

/// How the grid edges are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// A band of [`FROZEN_BAND`] nodes is held fixed; `p = 0` on `y = y0`, `q = 0` on `x = x0`.
    Frozen,
    /// Periodic grid (see [`Grid2D::periodic`]); `p`, `q` have zero mean along
    /// their integration direction.
    Periodic,
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frozen" => Ok(Boundary::Frozen),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Config(format!("unknown boundary '{other}' (expected frozen or periodic)"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Frozen => "frozen",
            Boundary::Periodic => "periodic",
        })
    }
}

/// Derivatives along one axis. In periodic mode a field may grow by a constant
/// `jump` over one period (pairs of a periodic angle are only quasi-periodic).
struct Line<'a> {
    v: &'a [f64],
    g: Grid2D,
    axis: Axis,
    jump: f64,
}

impl Line<'_> {
    fn n(&self) -> usize {
        match self.axis {
            Axis::X => self.g.nx,
            Axis::Y => self.g.ny,
        }
    }

    fn h(&self) -> f64 {
        match self.axis {
            Axis::X => self.g.hx,
            Axis::Y => self.g.hy,
        }
    }

    /// Value `m` nodes away from `(i, j)` along the axis, unwrapped.
    fn at(&self, i: usize, j: usize, m: isize) -> f64 {
        let n = self.n() as isize;
        let pos = match self.axis {
            Axis::X => i as isize,
            Axis::Y => j as isize,
        } + m;
        let wraps = pos.div_euclid(n);
        let p = pos.rem_euclid(n) as usize;
        let k = match self.axis {
            Axis::X => self.g.idx(p, j),
            Axis::Y => self.g.idx(i, p),
        };
        self.v[k] + wraps as f64 * self.jump
    }

    fn field(&self, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        (0..self.g.len())
            .map(|k| {
                let (i, j) = self.g.ij(k);
                f(i, j)
            })
            .collect()
    }

    fn d1(&self) -> Vec<f64> {
        let c = 0.5 / self.h();
        self.field(|i, j| (self.at(i, j, 1) - self.at(i, j, -1)) * c)
    }

    fn d2(&self) -> Vec<f64> {
        let c = 1.0 / (self.h() * self.h());
        self.field(|i, j| (self.at(i, j, 1) - 2.0 * self.at(i, j, 0) + self.at(i, j, -1)) * c)
    }

    fn d3(&self) -> Vec<f64> {
        let c = 0.5 / self.h().powi(3);
        self.field(|i, j| {
            (self.at(i, j, 2) - 2.0 * self.at(i, j, 1) + 2.0 * self.at(i, j, -1) - self.at(i, j, -2)) * c
        })
    }
}

fn line(f: &ScalarField2D, axis: Axis, jump: f64) -> Line<'_> {
    Line { v: f.values(), g: *f.grid(), axis, jump }
}

/// First derivative: periodic stencil, or the grid's second-order stencil.
fn d1(f: &ScalarField2D, axis: Axis, jump: f64, b: Boundary) -> ScalarField2D {
    match b {
        Boundary::Periodic => ScalarField2D::raw(*f.grid(), line(f, axis, jump).d1()),
        Boundary::Frozen => diff(f, axis),
    }
}

fn in_band(g: &Grid2D, k: usize) -> bool {
    let (i, j) = g.ij(k);
    !g.is_inner(i, j, FROZEN_BAND)
}

fn zero_band(v: &mut [f64], g: &Grid2D, b: Boundary) {
    if b == Boundary::Frozen {
        for (k, x) in v.iter_mut().enumerate() {
            if in_band(g, k) {
                *x = 0.0;
            }
        }
    }
}

/// Cumulative trapezoid of `f` along `axis` from the first node.
fn cumulative(f: &[f64], g: &Grid2D, axis: Axis) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    match axis {
        Axis::Y => {
            for i in 0..g.nx {
                for j in 1..g.ny {
                    out[g.idx(i, j)] = out[g.idx(i, j - 1)] + 0.5 * g.hy * (f[g.idx(i, j - 1)] + f[g.idx(i, j)]);
                }
            }
        }
        Axis::X => {
            for j in 0..g.ny {
                for i in 1..g.nx {
                    out[g.idx(i, j)] = out[g.idx(i - 1, j)] + 0.5 * g.hx * (f[g.idx(i - 1, j)] + f[g.idx(i, j)]);
                }
            }
        }
    }
    out
}

/// Removes the mean along `axis` from every line.
fn remove_line_means(v: &mut [f64], g: &Grid2D, axis: Axis) -> f64 {
    let mut worst: f64 = 0.0;
    let (outer, inner) = match axis {
        Axis::Y => (g.nx, g.ny),
        Axis::X => (g.ny, g.nx),
    };
    for a in 0..outer {
        let k = |b: usize| match axis {
            Axis::Y => g.idx(a, b),
            Axis::X => g.idx(b, a),
        };
        let mean = (0..inner).map(|b| v[k(b)]).sum::<f64>() / inner as f64;
        worst = worst.max(mean.abs());
        for b in 0..inner {
            v[k(b)] -= mean;
        }
    }
    worst
}

fn nonlocal(phi: &ScalarField2D, b: Boundary, along: Axis) -> (ScalarField2D, f64) {
    let g = *phi.grid();
    let (px, py) = (d1(phi, Axis::X, 0.0, b), d1(phi, Axis::Y, 0.0, b));
    let prod = &px * &py;
    let across = match along {
        Axis::Y => Axis::X,
        Axis::X => Axis::Y,
    };
    let mut src = d1(&prod, across, 0.0, b).into_values();
    let mut defect = 0.0;
    if b == Boundary::Periodic {
        // Only the part with zero mean along the integration line has a periodic antiderivative.
        defect = remove_line_means(&mut src, &g, along);
        // The shifted source sums to zero over a period, so the cumulative
        // integral closes up across the seam.
        let mut out = cumulative(&src, &g, along);
        remove_line_means(&mut out, &g, along);
        return (ScalarField2D::raw(g, out), defect);
    }
    (ScalarField2D::raw(g, cumulative(&src, &g, along)), defect)
}

/// `p` with `p_y = (φ_x φ_y)_x`.
pub fn nonlocal_p(phi: &ScalarField2D, b: Boundary) -> ScalarField2D {
    nonlocal(phi, b, Axis::Y).0
}

/// `q` with `q_x = (φ_x φ_y)_y`.
pub fn nonlocal_q(phi: &ScalarField2D, b: Boundary) -> ScalarField2D {
    nonlocal(phi, b, Axis::X).0
}

/// Largest line mean of `(φ_x φ_y)_x` along `y` and of `(φ_x φ_y)_y` along `x`
/// that the periodic gauge discards; zero for frozen boundaries.
pub fn nonlocal_defect(phi: &ScalarField2D, b: Boundary) -> f64 {
    nonlocal(phi, b, Axis::Y).1.max(nonlocal(phi, b, Axis::X).1)
}

fn third(f: &ScalarField2D, axis: Axis, jump: f64) -> Vec<f64> {
    line(f, axis, jump).d3()
}

fn second(f: &ScalarField2D, axis: Axis, jump: f64) -> Vec<f64> {
    line(f, axis, jump).d2()
}

fn phi_rhs_axis(phi: &ScalarField2D, nl: &ScalarField2D, b: Boundary, axis: Axis) -> Vec<f64> {
    let f3 = third(phi, axis, 0.0);
    let f1 = d1(phi, axis, 0.0, b);
    let mut out: Vec<f64> = (0..f3.len())
        .map(|k| {
            let d = f1.values()[k];
            f3[k] - d * d * d + 3.0 * nl.values()[k] * d
        })
        .collect();
    zero_band(&mut out, phi.grid(), b);
    out
}

/// `φ_xxx - φ_x³ + 3 p φ_x`; zero on the frozen band.
pub fn rhs_phi(phi: &ScalarField2D, p: &ScalarField2D, b: Boundary) -> ScalarField2D {
    ScalarField2D::raw(*phi.grid(), phi_rhs_axis(phi, p, b, Axis::X))
}

/// `φ_yyy - φ_y³ + 3 q φ_y`; zero on the frozen band.
pub fn rhs_phi_tau(phi: &ScalarField2D, q: &ScalarField2D, b: Boundary) -> ScalarField2D {
    ScalarField2D::raw(*phi.grid(), phi_rhs_axis(phi, q, b, Axis::Y))
}

/// A solution pair under evolution together with its per-period growth
/// `[κ along x, κ along y, s along x, s along y]` (zero unless periodic).
#[derive(Debug, Clone)]
pub struct FlowPair {
    pub kappa: ScalarField2D,
    pub s: ScalarField2D,
    pub jumps: [f64; 4],
}

impl FlowPair {
    pub fn new(kappa: ScalarField2D, s: ScalarField2D) -> Self {
        Self { kappa, s, jumps: [0.0; 4] }
    }

    pub fn with_jumps(kappa: ScalarField2D, s: ScalarField2D, jumps: [f64; 4]) -> Self {
        Self { kappa, s, jumps }
    }
}

fn pair_rhs_axis(
    pair: &FlowPair,
    phi: &ScalarField2D,
    nl: &ScalarField2D,
    b: Boundary,
    axis: Axis,
) -> (Vec<f64>, Vec<f64>) {
    let (jk, js) = match axis {
        Axis::X => (pair.jumps[0], pair.jumps[2]),
        Axis::Y => (pair.jumps[1], pair.jumps[3]),
    };
    let (k1, k2, k3) = (d1(&pair.kappa, axis, jk, b), second(&pair.kappa, axis, jk), third(&pair.kappa, axis, jk));
    let (s1, s2, s3) = (d1(&pair.s, axis, js, b), second(&pair.s, axis, js), third(&pair.s, axis, js));
    let f1 = d1(phi, axis, 0.0, b);
    let n = phi.values().len();
    let mut kt = vec![0.0; n];
    let mut st = vec![0.0; n];
    for k in 0..n {
        let (t, c) = {
            let a = phi.values()[k];
            (a.tan(), 1.0 / a.tan())
        };
        let (fx, p) = (f1.values()[k], nl.values()[k]);
        let (kx, sx) = (k1.values()[k], s1.values()[k]);
        match axis {
            Axis::X => {
                kt[k] = k3[k] - 3.0 * c * fx * (k2[k] - fx * sx) + 3.0 * p * kx;
                st[k] = s3[k] + 3.0 * t * fx * (s2[k] + fx * kx) + 3.0 * p * sx;
            }
            Axis::Y => {
                kt[k] = k3[k] + 3.0 * t * fx * (k2[k] - fx * sx) + 3.0 * p * kx;
                st[k] = s3[k] - 3.0 * c * fx * (s2[k] + fx * kx) + 3.0 * p * sx;
            }
        }
    }
    zero_band(&mut kt, phi.grid(), b);
    zero_band(&mut st, phi.grid(), b);
    (kt, st)
}

fn check_angle(phi: &ScalarField2D) -> Result<()> {
    PhiField::new(phi.clone()).map(|_| ())
}

/// `(κ_t, s_t)` of the `x`-flow.
pub fn rhs_pair(
    pair: &FlowPair,
    phi: &ScalarField2D,
    p: &ScalarField2D,
    b: Boundary,
) -> Result<(ScalarField2D, ScalarField2D)> {
    check_angle(phi)?;
    let (k, s) = pair_rhs_axis(pair, phi, p, b, Axis::X);
    Ok((ScalarField2D::raw(*phi.grid(), k), ScalarField2D::raw(*phi.grid(), s)))
}

/// `(κ_τ, s_τ)` of the `y`-flow.
pub fn rhs_pair_tau(
    pair: &FlowPair,
    phi: &ScalarField2D,
    q: &ScalarField2D,
    b: Boundary,
) -> Result<(ScalarField2D, ScalarField2D)> {
    check_angle(phi)?;
    let (k, s) = pair_rhs_axis(pair, phi, q, b, Axis::Y);
    Ok((ScalarField2D::raw(*phi.grid(), k), ScalarField2D::raw(*phi.grid(), s)))
}

/// `∬ φ_x φ_y`; periodic grids use the rectangle rule over one period.
pub fn conserved(phi: &ScalarField2D, b: Boundary) -> f64 {
    let prod = &d1(phi, Axis::X, 0.0, b) * &d1(phi, Axis::Y, 0.0, b);
    match b {
        Boundary::Periodic => periodic_integral(&prod),
        Boundary::Frozen => surface_integral(&prod),
    }
}

/// `∬ |φ_x φ_y|`, the scale used for relative drift when the functional itself vanishes.
pub fn conserved_scale(phi: &ScalarField2D, b: Boundary) -> f64 {
    let prod = (&d1(phi, Axis::X, 0.0, b) * &d1(phi, Axis::Y, 0.0, b)).map(f64::abs);
    match b {
        Boundary::Periodic => periodic_integral(&prod),
        Boundary::Frozen => surface_integral(&prod),
    }
}

/// Relative change of the functional: `|c - c0| / max(|c0|, scale)`.
pub fn relative_drift(c0: f64, c: f64, scale: f64) -> f64 {
    let denom = c0.abs().max(scale);
    if denom > 0.0 {
        (c - c0).abs() / denom
    } else {
        (c - c0).abs()
    }
}

/// `dt` bound for the explicit step.
pub fn cfl_bound(g: &Grid2D, cfl: f64) -> f64 {
    cfl * g.hx.min(g.hy).powi(3)
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub phi: ScalarField2D,
    pub pairs: Vec<FlowPair>,
    pub p: ScalarField2D,
    pub q: ScalarField2D,
    pub t: f64,
    pub boundary: Boundary,
}

impl FlowState {
    pub fn new(phi: ScalarField2D, pairs: Vec<FlowPair>, boundary: Boundary) -> Result<Self> {
        let g = *phi.grid();
        if pairs.iter().any(|p| !p.kappa.grid().same_as(&g) || !p.s.grid().same_as(&g)) {
            return Err(Error::GridMismatch);
        }
        if !pairs.is_empty() {
            check_angle(&phi)?;
        }
        let p = nonlocal_p(&phi, boundary);
        let q = nonlocal_q(&phi, boundary);
        Ok(Self { phi, pairs, p, q, t: 0.0, boundary })
    }

    pub fn conserved(&self) -> f64 {
        conserved(&self.phi, self.boundary)
    }

    /// `max |κ_x - tan φ s_x|, |κ_y + cot φ s_y|` for every pair.
    pub fn pair_residuals(&self) -> Vec<f64> {
        let b = self.boundary;
        self.pairs
            .iter()
            .map(|pr| {
                let kx = d1(&pr.kappa, Axis::X, pr.jumps[0], b);
                let ky = d1(&pr.kappa, Axis::Y, pr.jumps[1], b);
                let sx = d1(&pr.s, Axis::X, pr.jumps[2], b);
                let sy = d1(&pr.s, Axis::Y, pr.jumps[3], b);
                (0..self.phi.values().len())
                    .map(|k| {
                        let t = self.phi.values()[k].tan();
                        let rx = kx.values()[k] - t * sx.values()[k];
                        let ry = ky.values()[k] + sy.values()[k] / t;
                        rx.abs().max(ry.abs())
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    fn with_fields(&self, fields: Vec<Vec<f64>>, t: f64) -> Result<Self> {
        let g = *self.phi.grid();
        let mut it = fields.into_iter();
        let phi = ScalarField2D::from_values(g, it.next().expect("phi"))?;
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for old in &self.pairs {
            let kappa = ScalarField2D::from_values(g, it.next().expect("kappa"))?;
            let s = ScalarField2D::from_values(g, it.next().expect("s"))?;
            pairs.push(FlowPair { kappa, s, jumps: old.jumps });
        }
        let mut next = Self::new(phi, pairs, self.boundary)?;
        next.t = t;
        Ok(next)
    }

    fn fields(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.phi.values().to_vec()];
        for p in &self.pairs {
            out.push(p.kappa.values().to_vec());
            out.push(p.s.values().to_vec());
        }
        out
    }

    fn rhs(&self, flow: Flow) -> Result<Vec<Vec<f64>>> {
        let b = self.boundary;
        let g = *self.phi.grid();
        let mut out = vec![vec![0.0; g.len()]; 1 + 2 * self.pairs.len()];
        let add = |dst: &mut Vec<f64>, src: &[f64]| dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        if matches!(flow, Flow::T | Flow::Mvn) {
            add(&mut out[0], rhs_phi(&self.phi, &self.p, b).values());
            for (a, pr) in self.pairs.iter().enumerate() {
                let (k, s) = rhs_pair(pr, &self.phi, &self.p, b)?;
                add(&mut out[1 + 2 * a], k.values());
                add(&mut out[2 + 2 * a], s.values());
            }
        }
        if matches!(flow, Flow::Tau | Flow::Mvn) {
            add(&mut out[0], rhs_phi_tau(&self.phi, &self.q, b).values());
            for (a, pr) in self.pairs.iter().enumerate() {
                let (k, s) = rhs_pair_tau(pr, &self.phi, &self.q, b)?;
                add(&mut out[1 + 2 * a], k.values());
                add(&mut out[2 + 2 * a], s.values());
            }
        }
        Ok(out)
    }
}

fn axpy(base: &[Vec<f64>], k: &[Vec<f64>], a: f64) -> Vec<Vec<f64>> {
    base.iter()
        .zip(k)
        .map(|(b, k)| b.iter().zip(k).map(|(x, y)| x + a * y).collect())
        .collect()
}

/// One classical Runge–Kutta step; `p` and `q` are recomputed at every stage.
pub fn step(state: &FlowState, dt: f64, flow: Flow) -> Result<FlowState> {
    step_with(state, dt, flow, CFL_DEFAULT)
}

pub fn step_with(state: &FlowState, dt: f64, flow: Flow, cfl: f64) -> Result<FlowState> {
    let bound = cfl_bound(state.phi.grid(), cfl);
    if !(dt > 0.0 && dt <= bound) {
        return Err(Error::CflViolation { dt, bound });
    }
    let y0 = state.fields();
    let t0 = state.t;
    let k1 = state.rhs(flow)?;
    let s2 = state.with_fields(axpy(&y0, &k1, 0.5 * dt), t0 + 0.5 * dt)?;
    let k2 = s2.rhs(flow)?;
    let s3 = state.with_fields(axpy(&y0, &k2, 0.5 * dt), t0 + 0.5 * dt)?;
    let k3 = s3.rhs(flow)?;
    let s4 = state.with_fields(axpy(&y0, &k3, dt), t0 + dt)?;
    let k4 = s4.rhs(flow)?;
    let mut y = y0;
    for c in 0..y.len() {
        for k in 0..y[c].len() {
            y[c][k] += dt / 6.0 * (k1[c][k] + 2.0 * k2[c][k] + 2.0 * k3[c][k] + k4[c][k]);
        }
    }
    state.with_fields(y, t0 + dt)
}

/// Runs `steps` steps, calling `observe` after each one.
pub fn evolve(
    state: &FlowState,
    dt: f64,
    steps: usize,
    flow: Flow,
    cfl: f64,
    mut observe: impl FnMut(usize, &FlowState) -> Result<()>,
) -> Result<FlowState> {
    let mut cur = state.clone();
    for n in 1..=steps {
        cur = step_with(&cur, dt, flow, cfl)?;
        observe(n, &cur)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn periodic(n: usize) -> Grid2D {
        Grid2D::periodic(n, n, 0.0, 0.0, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn nonlocal_examples() {
        let g = Grid2D::spanning(11, 11, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let c = ScalarField2D::constant(g, 0.3);
        assert!(nonlocal_p(&c, Boundary::Frozen).max_abs() < 1e-14);
        let x = ScalarField2D::from_fn(g, |x, _| x);
        assert!(nonlocal_p(&x, Boundary::Frozen).max_abs() < 1e-14);
        let xy = ScalarField2D::from_fn(g, |x, y| x * y);
        let p = nonlocal_p(&xy, Boundary::Frozen);
        for k in 0..g.len() {
            let y = g.coords(k).1;
            assert!((p.values()[k] - 0.5 * y * y).abs() < 1e-13);
        }
    }

    #[test]
    fn rhs_examples() {
        let g = Grid2D::spanning(11, 11, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let x = ScalarField2D::from_fn(g, |x, _| x);
        let third = ScalarField2D::constant(g, 1.0 / 3.0);
        assert!(rhs_phi(&x, &third, Boundary::Frozen).max_abs() < 1e-12);
        let phi = ScalarField2D::constant(g, FRAC_PI_4);
        let zero = ScalarField2D::zeros(g);
        let pair = FlowPair::new(ScalarField2D::from_fn(g, |x, y| x - y), ScalarField2D::from_fn(g, |x, y| x + y));
        let (k, s) = rhs_pair(&pair, &phi, &zero, Boundary::Frozen).unwrap();
        assert!(k.max_abs() < 1e-10 && s.max_abs() < 1e-10);
        let bad = ScalarField2D::constant(g, 0.0);
        assert!(matches!(rhs_pair(&pair, &bad, &zero, Boundary::Frozen), Err(Error::DegenerateAngle { .. })));
    }

    #[test]
    fn rhs_converges() {
        let exact = |x: f64, y: f64| {
            // φ = sin x cos y, p ≡ 0 imposed
            let fx = x.cos() * y.cos();
            -x.cos() * y.cos() - fx * fx * fx
        };
        let mut errs = Vec::new();
        for n in [16, 32] {
            let g = periodic(n);
            let phi = ScalarField2D::from_fn(g, |x, y| x.sin() * y.cos());
            let r = rhs_phi(&phi, &ScalarField2D::zeros(g), Boundary::Periodic);
            errs.push(r.max_abs_diff(&ScalarField2D::from_fn(g, exact)));
        }
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn constant_phi_is_fixed() {
        let g = periodic(16);
        for b in [Boundary::Periodic, Boundary::Frozen] {
            let st = FlowState::new(ScalarField2D::constant(g, 0.7), vec![], b).unwrap();
            for flow in [Flow::T, Flow::Tau, Flow::Mvn] {
                let next = step(&st, 1e-3, flow).unwrap();
                assert_eq!(next.phi.values(), st.phi.values());
            }
        }
    }

    #[test]
    fn cfl_is_enforced() {
        let g = periodic(16);
        let st = FlowState::new(ScalarField2D::constant(g, 0.7), vec![], Boundary::Periodic).unwrap();
        assert!(matches!(step(&st, 1.0, Flow::Mvn), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn periodic_p_solves_its_equation() {
        let g = periodic(64);
        let phi = ScalarField2D::from_fn(g, |x, y| FRAC_PI_4 + 0.1 * x.sin() * y.sin());
        let p = nonlocal_p(&phi, Boundary::Periodic);
        let py = d1(&p, Axis::Y, 0.0, Boundary::Periodic);
        let prod = &d1(&phi, Axis::X, 0.0, Boundary::Periodic) * &d1(&phi, Axis::Y, 0.0, Boundary::Periodic);
        let src = d1(&prod, Axis::X, 0.0, Boundary::Periodic);
        assert!(py.max_abs_diff(&src) < 1e-4);
        assert!(nonlocal_defect(&phi, Boundary::Periodic) < 1e-15);
    }
}
