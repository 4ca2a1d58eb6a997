//! Named angle fields and boundary profiles used by the examples, the CLI and the tests.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridN, ScalarField2D};
use crate::highdim::RotationCoeffs;
use crate::linsys::{solve_pair, PhiField, SolutionPair};
use crate::mvn::FlowPair;

/// Angle fields `φ(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Const { value: f64 },
    /// `a + b x + c y`
    Linear { a: f64, b: f64, c: f64 },
    /// `base + amp sin(kx x) sin(ky y)`
    ProductSine { base: f64, amp: f64, kx: f64, ky: f64 },
    /// `base + amp sin(x y) + slope x`
    SineXy { base: f64, amp: f64, slope: f64 },
    /// `base + amp sin(x + y)`
    PlaneWave { base: f64, amp: f64 },
}

impl PhiSpec {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            PhiSpec::Const { value } => value,
            PhiSpec::Linear { a, b, c } => a + b * x + c * y,
            PhiSpec::ProductSine { base, amp, kx, ky } => base + amp * (kx * x).sin() * (ky * y).sin(),
            PhiSpec::SineXy { base, amp, slope } => base + amp * (x * y).sin() + slope * x,
            PhiSpec::PlaneWave { base, amp } => base + amp * (x + y).sin(),
        }
    }

    pub fn sample(&self, grid: Grid2D) -> ScalarField2D {
        ScalarField2D::from_fn(grid, |x, y| self.eval(x, y))
    }
}

/// Goursat data `t ↦ value` along one axis, with `t` measured from the grid origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `slope t`
    Linear { slope: f64 },
    /// `amp (t + wiggle sin(freq t))`; strictly monotone when `|wiggle freq| < 1`.
    Monotone { amp: f64, wiggle: f64, freq: f64 },
    /// `amp sin(freq t)`
    Sine { amp: f64, freq: f64 },
    /// Explicit samples, one per node.
    Table { values: Vec<f64> },
}

impl Profile {
    pub fn sample(&self, h: f64, n: usize) -> Result<Vec<f64>> {
        let t = |k: usize| k as f64 * h;
        Ok(match self {
            Profile::Linear { slope } => (0..n).map(|k| slope * t(k)).collect(),
            Profile::Monotone { amp, wiggle, freq } => {
                (0..n).map(|k| amp * (t(k) + wiggle * (freq * t(k)).sin())).collect()
            }
            Profile::Sine { amp, freq } => (0..n).map(|k| amp * (freq * t(k)).sin()).collect(),
            Profile::Table { values } => {
                if values.len() != n {
                    return Err(Error::AxisLength { expected: n, got: values.len() });
                }
                values.clone()
            }
        })
    }
}

/// Boundary data of one solution pair: `s` on both axes and `κ` at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub s_x: Profile,
    pub s_y: Profile,
    #[serde(default)]
    pub kappa0: f64,
}

impl PairSpec {
    /// Linear data `s = a t` on `y = y0`, `b t` on `x = x0`.
    pub fn linear(a: f64, b: f64, kappa0: f64) -> Self {
        Self { s_x: Profile::Linear { slope: a }, s_y: Profile::Linear { slope: b }, kappa0 }
    }

    /// Monotone data `a (t + 0.3 sin 2t)` and `b (t + 0.2 sin 3t)`.
    pub fn monotone(a: f64, b: f64, kappa0: f64) -> Self {
        Self {
            s_x: Profile::Monotone { amp: a, wiggle: 0.3, freq: 2.0 },
            s_y: Profile::Monotone { amp: b, wiggle: 0.2, freq: 3.0 },
            kappa0,
        }
    }

    pub fn solve(&self, phi: &PhiField) -> Result<SolutionPair> {
        let g = *phi.field().grid();
        let xa = self.s_x.sample(g.hx, g.nx)?;
        let ya = self.s_y.sample(g.hy, g.ny)?;
        solve_pair(phi, &xa, &ya, self.kappa0)
    }
}

/// A profile shifted by its value at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisData {
    #[serde(default)]
    pub origin: f64,
    #[serde(flatten)]
    pub profile: Profile,
}

impl AxisData {
    pub fn new(origin: f64, profile: Profile) -> Self {
        Self { origin, profile }
    }

    pub fn sample(&self, h: f64, n: usize) -> Result<Vec<f64>> {
        Ok(self.profile.sample(h, n)?.into_iter().map(|v| v + self.origin).collect())
    }
}

/// Goursat data of one Moutard solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoutardData {
    pub x: AxisData,
    pub y: AxisData,
}

impl MoutardData {
    /// `origin + a t` on the x-axis and `origin + b t` on the y-axis.
    pub fn linear(origin: f64, a: f64, b: f64) -> Self {
        Self {
            x: AxisData::new(origin, Profile::Linear { slope: a }),
            y: AxisData::new(origin, Profile::Linear { slope: b }),
        }
    }

    pub fn sample(&self, g: &Grid2D) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.x.sample(g.hx, g.nx)?, self.y.sample(g.hy, g.ny)?))
    }
}

/// Spherical coordinates `(r, θ, ϕ)` of `E³` as a triply orthogonal system.
pub fn spherical_rotation(grid: &GridN) -> RotationCoeffs {
    RotationCoeffs::from_fn(grid, |i, j, u| match (i, j) {
        (0, 1) => 1.0,
        (0, 2) => u[1].sin(),
        (1, 2) => u[1].cos(),
        _ => 0.0,
    })
}

/// Cartesian components (rows) of the unit vectors `e_r, e_θ, e_ϕ` (columns).
pub fn spherical_cosines(u: &[f64]) -> DMatrix<f64> {
    let (st, ct) = u[1].sin_cos();
    let (sp, cp) = u[2].sin_cos();
    DMatrix::from_row_slice(3, 3, &[st * cp, ct * cp, -sp, st * sp, ct * sp, cp, ct, -st, 0.0])
}

/// Lamé coefficients solving the spherical-coordinate system in closed form:
/// `H = (f, F + g, sin θ F + G + k)` with `f = 1 + a r`, `F = r + a r²/2`,
/// `g = b θ`, `G = b (θ sin θ + cos θ)`, `k = c cos ϕ`.
/// `a = b = c = 0` gives the Lamé coefficients of the coordinates themselves.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphericalLame {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SphericalLame {
    pub fn exact(&self, u: &[f64]) -> [f64; 3] {
        let (r, th, ph) = (u[0], u[1], u[2]);
        let big_f = r + 0.5 * self.a * r * r;
        let big_g = self.b * (th * th.sin() + th.cos());
        [1.0 + self.a * r, big_f + self.b * th, th.sin() * big_f + big_g + self.c * ph.cos()]
    }

    /// Values on the coordinate axes through the grid origin.
    pub fn axis_data(&self, grid: &GridN) -> Vec<Vec<f64>> {
        (0..3)
            .map(|a| {
                (0..grid.shape()[a])
                    .map(|i| {
                        let mut u = grid.origin().to_vec();
                        u[a] += i as f64 * grid.spacing()[a];
                        self.exact(&u)[a]
                    })
                    .collect()
            })
            .collect()
    }
}

/// `∫₀^t f` on `0, h, 2h, …, (n-1)h` by composite Simpson with `sub` panels per step.
fn cumulative_simpson(f: impl Fn(f64) -> f64, h: f64, n: usize, sub: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    out.push(0.0);
    let d = h / sub as f64;
    for k in 1..n {
        let a = (k - 1) as f64 * h;
        let mut s = 0.0;
        for m in 0..sub {
            let l = a + m as f64 * d;
            s += d / 6.0 * (f(l) + 4.0 * f(l + 0.5 * d) + f(l + d));
        }
        acc += s;
        out.push(acc);
    }
    out
}

/// Solution pair of the plane-wave angle `φ = base + amp sin(x + y)`, sampled
/// from its one-dimensional quadrature on a grid starting at the origin with
/// `hx = hy`:
/// `s = A(x+y) - ½ sin c (x-y)`, `κ = C(x+y) - ½ cos c (x-y)`,
/// `A' = -½ sin(2φ + c)`, `C' = ½ cos(2φ + c)`.
///
/// Jumps over one `2π` period are returned in [`FlowPair`] order.
pub fn plane_wave_pair(grid: Grid2D, base: f64, amp: f64, c: f64) -> Result<FlowPair> {
    if grid.x0 != 0.0 || grid.y0 != 0.0 || (grid.hx - grid.hy).abs() > 1e-15 * grid.hx {
        return Err(Error::Config("plane-wave pairs need a square-celled grid at the origin".into()));
    }
    let h = grid.hx;
    let f = |t: f64| base + amp * t.sin();
    let n = grid.nx + grid.ny - 1;
    let a = cumulative_simpson(|t| -0.5 * (2.0 * f(t) + c).sin(), h, n, 64);
    let cc = cumulative_simpson(|t| 0.5 * (2.0 * f(t) + c).cos(), h, n, 64);
    let (sc, cs) = c.sin_cos();
    let mut s = vec![0.0; grid.len()];
    let mut kappa = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let eta = (i as f64 - j as f64) * h;
            let k = grid.idx(i, j);
            s[k] = a[i + j] - 0.5 * sc * eta;
            kappa[k] = cc[i + j] - 0.5 * cs * eta;
        }
    }
    // Means of A' and C' over a period by the (spectrally accurate) periodic rectangle rule.
    let m = 4096;
    let mean = |g: &dyn Fn(f64) -> f64| (0..m).map(|k| g(2.0 * PI * k as f64 / m as f64)).sum::<f64>() / m as f64;
    let ma = mean(&|t| -0.5 * (2.0 * f(t) + c).sin());
    let mc = mean(&|t| 0.5 * (2.0 * f(t) + c).cos());
    let l = 2.0 * PI;
    let jumps = [l * (mc - 0.5 * cs), l * (mc + 0.5 * cs), l * (ma - 0.5 * sc), l * (ma + 0.5 * sc)];
    Ok(FlowPair::with_jumps(ScalarField2D::raw(grid, kappa), ScalarField2D::raw(grid, s), jumps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvn::{Boundary, FlowState};

    #[test]
    fn spherical_lame_is_exact() {
        use crate::highdim::lame_residual;
        let g = GridN::spanning(&[9, 9, 9], &[(1.0, 1.4), (0.8, 1.2), (0.0, 0.4)]).unwrap();
        let beta = spherical_rotation(&g);
        let l = SphericalLame { a: 0.5, b: 0.3, c: 0.2 };
        let h: Vec<_> = (0..3).map(|a| crate::grid::FieldN::from_fn(&g, |u| l.exact(u)[a])).collect();
        // Exact fields leave only the difference-quotient error.
        assert!(lame_residual(&beta, &h) < 5e-3);
        let x = spherical_cosines(&[1.0, 0.9, 0.3]);
        assert!((x.transpose() * &x - DMatrix::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn axis_data_serde() {
        let d: MoutardData = serde_json::from_str(
            r#"{"x":{"origin":1,"kind":"linear","slope":0},"y":{"kind":"sine","amp":1,"freq":2}}"#,
        )
        .unwrap();
        assert_eq!(d.x.origin, 1.0);
        assert_eq!(d.y.origin, 0.0);
    }

    #[test]
    fn profiles() {
        let p = Profile::Linear { slope: 2.0 }.sample(0.5, 3).unwrap();
        assert_eq!(p, vec![0.0, 1.0, 2.0]);
        assert!(Profile::Table { values: vec![1.0] }.sample(0.1, 3).is_err());
    }

    #[test]
    fn specs_round_trip_json() {
        let s = PhiSpec::PlaneWave { base: 0.8, amp: 0.3 };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"kind":"plane_wave","base":0.8,"amp":0.3}"#);
        assert_eq!(serde_json::from_str::<PhiSpec>(&text).unwrap(), s);
        let p: PairSpec = serde_json::from_str(r#"{"s_x":{"kind":"linear","slope":1},"s_y":{"kind":"linear","slope":1}}"#).unwrap();
        assert_eq!(p, PairSpec::linear(1.0, 1.0, 0.0));
    }

    #[test]
    fn plane_wave_pair_is_consistent() {
        let mut res = Vec::new();
        for n in [32, 64] {
            let g = Grid2D::periodic(n, n, 0.0, 0.0, 2.0 * PI, 2.0 * PI).unwrap();
            let phi = PhiSpec::PlaneWave { base: std::f64::consts::FRAC_PI_4, amp: 0.3 }.sample(g);
            let pair = plane_wave_pair(g, std::f64::consts::FRAC_PI_4, 0.3, 0.5).unwrap();
            let st = FlowState::new(phi, vec![pair], Boundary::Periodic).unwrap();
            res.push(st.pair_residuals()[0]);
        }
        assert!(res[0] / res[1] > 3.5, "{res:?}");
    }
}
