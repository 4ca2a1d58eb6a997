//! Ribaucour sphere congruences from three solution pairs and their image on
//! the Lie quadric.

use nalgebra::{DMatrix, DVector};

use crate::construction::{assemble_u, pinned_base, potential_entry, sigma_ratio};
use crate::error::{Error, Result};
use crate::euclid3::{build_surface, CurvatureData, Surface3, SurfaceOptions};
use crate::grid::{Axis, ScalarField2D};
use crate::linsys::{PhiField, SolutionPair};

/// Offsets added to the pinned base values of `V³¹` and `V³²`, and the base
/// value of `A`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RibaucourConstants {
    pub c31: f64,
    pub c32: f64,
    pub a0: f64,
}

#[derive(Debug, Clone)]
pub struct SphereCongruence {
    pub centers: [ScalarField2D; 3],
    pub radius: ScalarField2D,
    pub p: ScalarField2D,
    pub q: ScalarField2D,
    pub v31: ScalarField2D,
    pub v32: ScalarField2D,
    pub surface: Surface3,
    pub curv: CurvatureData,
}

/// Six homogeneous coordinates per node.
#[derive(Debug, Clone)]
pub struct HexaField {
    pub z: [ScalarField2D; 6],
}

impl HexaField {
    pub fn at(&self, k: usize) -> [f64; 6] {
        std::array::from_fn(|c| self.z[c].values()[k])
    }

    pub fn len(&self) -> usize {
        self.z[0].values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest quadric defect relative to `Σ z_i²`.
    pub fn quadric_residual(&self) -> f64 {
        (0..self.len()).map(|k| lie_quadric(&self.at(k))).fold(0.0, f64::max)
    }
}

struct Potentials {
    v31: ScalarField2D,
    v32: ScalarField2D,
}

fn potentials(pairs: [&SolutionPair; 3], consts: &RibaucourConstants) -> Result<Potentials> {
    let u = assemble_u(&[pairs[0].clone(), pairs[1].clone(), pairs[2].clone()])?;
    let v31 = potential_entry(&u, 2, 0, pinned_base(&u, 2, 0) + consts.c31)?;
    let v32 = potential_entry(&u, 2, 1, pinned_base(&u, 2, 1) + consts.c32)?;
    let g = v31.grid();
    let floor = 1e-12 * (1.0 + v31.max_abs());
    if let Some(k) = v31.values().iter().position(|v| v.abs() <= floor) {
        let (x, y) = g.coords(k);
        return Err(Error::ZeroDenominator { x, y });
    }
    Ok(Potentials { v31, v32 })
}

pub fn ribaucour_from_three(
    pair1: &SolutionPair,
    pair2: &SolutionPair,
    pair3: &SolutionPair,
    phi: &PhiField,
    consts: &RibaucourConstants,
    opts: &SurfaceOptions,
) -> Result<SphereCongruence> {
    let opts = SurfaceOptions { a0: consts.a0, ..*opts };
    let (surface, curv) = build_surface(pair1, pair2, phi, &opts)?;
    let pot = potentials([pair1, pair2, pair3], consts)?;
    let (a, b) = (&curv.a, &curv.b);
    let p = &pot.v32 - &(&pot.v31 * &a.zip_map(b, |a, b| a / b));
    let q = pot.v31.zip_map(b, |v, b| v / b);
    let radius = p.zip_map(&q, |p, q| p / q);
    let centers = std::array::from_fn(|c| &surface.r[c] - &(&radius * &surface.n[c]));
    Ok(SphereCongruence { centers, radius, p, q, v31: pot.v31, v32: pot.v32, surface, curv })
}

/// `max |P_x - ρ¹ Q_x|` and `max |P_y - ρ² Q_y|` over valid nodes.
pub fn pq_residual(c: &SphereCongruence) -> (f64, f64) {
    let (px, py) = (c.p.diff(Axis::X), c.p.diff(Axis::Y));
    let (qx, qy) = (c.q.diff(Axis::X), c.q.diff(Axis::Y));
    let mut rx: f64 = 0.0;
    let mut ry: f64 = 0.0;
    for k in 0..c.curv.valid.len() {
        if !c.curv.valid[k] {
            continue;
        }
        rx = rx.max((px.values()[k] - c.curv.rho1.values()[k] * qx.values()[k]).abs());
        ry = ry.max((py.values()[k] - c.curv.rho2.values()[k] * qy.values()[k]).abs());
    }
    (rx, ry)
}

/// Residual of `R_xy = (a + ln(ρ¹-R)_y) R_x + (b + ln(ρ²-R)_x) R_y` with
/// `a = ρ¹_y/(ρ²-ρ¹)`, `b = ρ²_x/(ρ¹-ρ²)`. Nodes where `valid` is false or
/// where any of `ρ¹-R`, `ρ²-R`, `ρ¹-ρ²` nearly vanishes are skipped.
pub fn check_dr(r: &ScalarField2D, rho1: &ScalarField2D, rho2: &ScalarField2D, valid: &[bool]) -> f64 {
    let (rx, ry) = (r.diff(Axis::X), r.diff(Axis::Y));
    let rxy = rx.diff(Axis::Y);
    let d1 = rho1 - r;
    let d2 = rho2 - r;
    let (d1y, d2x) = (d1.diff(Axis::Y), d2.diff(Axis::X));
    let (r1y, r2x) = (rho1.diff(Axis::Y), rho2.diff(Axis::X));
    let tiny = 1e-8;
    let mut worst: f64 = 0.0;
    for k in 0..r.values().len() {
        let (e1, e2) = (d1.values()[k], d2.values()[k]);
        let gap = rho1.values()[k] - rho2.values()[k];
        if !valid[k] || e1.abs() < tiny || e2.abs() < tiny || gap.abs() < tiny {
            continue;
        }
        let a = r1y.values()[k] / -gap;
        let b = r2x.values()[k] / gap;
        let rhs = (a + d1y.values()[k] / e1) * rx.values()[k] + (b + d2x.values()[k] / e2) * ry.values()[k];
        worst = worst.max((rxy.values()[k] - rhs).abs());
    }
    worst
}

/// Lie-quadric coordinates of the sphere with center `xi` and signed radius `r`.
pub fn hexaspherical(xi: [f64; 3], r: f64) -> [f64; 6] {
    let q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    [xi[0], xi[1], xi[2], 0.5 * (1.0 - q + r * r), 0.5 * (1.0 + q - r * r), r]
}

/// `(z¹)²+(z²)²+(z³)²+(z⁴)²-(z⁵)²-(z⁶)²` relative to `Σ z_i²`.
pub fn lie_quadric(z: &[f64; 6]) -> f64 {
    let form = z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3] - z[4] * z[4] - z[5] * z[5];
    let scale: f64 = z.iter().map(|v| v * v).sum();
    if scale == 0.0 {
        0.0
    } else {
        form.abs() / scale
    }
}

/// Hexaspherical image of the congruence spheres.
pub fn hexa_from_congruence(c: &SphereCongruence) -> HexaField {
    let n = c.radius.values().len();
    let mut z: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
    for k in 0..n {
        let xi = std::array::from_fn(|i| c.centers[i].values()[k]);
        let h = hexaspherical(xi, c.radius.values()[k]);
        for i in 0..6 {
            z[i][k] = h[i];
        }
    }
    let g = *c.radius.grid();
    HexaField { z: z.map(|v| ScalarField2D::raw(g, v)) }
}

/// Surface in `S^{3,1}` written directly in the pairs, with `k = V³²/V³¹`.
pub fn s31_surface(
    pair1: &SolutionPair,
    pair2: &SolutionPair,
    pair3: &SolutionPair,
    phi: &PhiField,
    consts: &RibaucourConstants,
) -> Result<HexaField> {
    let g = *phi.field().grid();
    let pot = potentials([pair1, pair2, pair3], consts)?;
    let a = crate::euclid3::a_field(pair1, pair2, consts.a0)?;
    let b = crate::euclid3::b_field(pair1);
    let n = g.len();
    let mut z: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
    for k in 0..n {
        let kk = pot.v32.values()[k] / pot.v31.values()[k];
        let (k1, s1) = (pair1.kappa.values()[k], pair1.s.values()[k]);
        let (k2, s2) = (pair2.kappa.values()[k], pair2.s.values()[k]);
        let (av, bv) = (a.values()[k], b.values()[k]);
        let sq2 = k2 * k2 + s2 * s2;
        let cross = k1 * k2 + s1 * s2 - av;
        z[0][k] = k2 - k1 * kk;
        z[1][k] = s2 - s1 * kk;
        z[2][k] = (bv - 1.0) * kk - av;
        z[3][k] = 0.5 * (1.0 - sq2) + cross * kk;
        z[4][k] = 0.5 * (1.0 + sq2) - cross * kk;
        z[5][k] = bv * kk - av;
    }
    Ok(HexaField { z: z.map(|v| ScalarField2D::raw(g, v)) })
}

/// Per-node distance between two homogeneous fields after scaling both so the
/// component largest in `a` equals 1.
pub fn projective_match(a: &HexaField, b: &HexaField) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..a.len() {
        let (za, zb) = (a.at(k), b.at(k));
        let i = (0..6).max_by(|&i, &j| za[i].abs().partial_cmp(&za[j].abs()).unwrap()).unwrap();
        if za[i] == 0.0 || zb[i] == 0.0 {
            worst = worst.max(if za == zb { 0.0 } else { f64::INFINITY });
            continue;
        }
        for c in 0..6 {
            worst = worst.max((za[c] / za[i] - zb[c] / zb[i]).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceReport {
    /// Largest `‖Z_xy - a Z_x - b Z_y‖ / (‖Z_xy‖ + ‖Z_x‖ + ‖Z_y‖)` with the
    /// per-node least-squares `(a, b)`.
    pub residual: f64,
    pub masked: usize,
}

/// Fits one Laplace equation to all six components at every node away from
/// the edge; nodes where `Z_x`, `Z_y` are dependent are masked.
pub fn check_laplace(z: &HexaField) -> LaplaceReport {
    let g = *z.z[0].grid();
    let zx: Vec<_> = z.z.iter().map(|f| f.diff(Axis::X)).collect();
    let zy: Vec<_> = z.z.iter().map(|f| f.diff(Axis::Y)).collect();
    let zxy: Vec<_> = zx.iter().map(|f| f.diff(Axis::Y)).collect();
    let mut worst: f64 = 0.0;
    let mut masked = 0;
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        if !g.is_inner(i, j, 1) {
            continue;
        }
        let m = DMatrix::from_fn(6, 2, |r, c| if c == 0 { zx[r].values()[k] } else { zy[r].values()[k] });
        let rhs = DVector::from_fn(6, |r, _| zxy[r].values()[k]);
        let scale = rhs.norm() + m.column(0).norm() + m.column(1).norm();
        if scale == 0.0 {
            continue;
        }
        if sigma_ratio(&m).is_none_or(|r| r < 1e-8) {
            masked += 1;
            continue;
        }
        let coef = m.clone().svd(true, true).solve(&rhs, 1e-14).expect("svd solve");
        worst = worst.max((rhs - m * coef).norm() / scale);
    }
    LaplaceReport { residual: worst, masked }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use crate::linsys::solve_pair;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn hexaspherical_examples() {
        assert_eq!(hexaspherical([0.0; 3], 1.0), [0.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(hexaspherical([1.0, 0.0, 0.0], 0.0), [1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(lie_quadric(&hexaspherical([0.3, -1.2, 2.0], 0.7)) < 1e-15);
    }

    fn triple(n: usize) -> (PhiField, [SolutionPair; 3]) {
        let g = Grid2D::spanning(n, n, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let phi = PhiField::new(ScalarField2D::constant(g, FRAC_PI_4)).unwrap();
        let lp = |a: f64, b: f64, k0: f64| {
            let xa: Vec<f64> = g.x_coords().iter().map(|x| a * x + 0.2 * x * x).collect();
            let ya: Vec<f64> = g.y_coords().iter().map(|y| b * y).collect();
            solve_pair(&phi, &xa, &ya, k0).unwrap()
        };
        let pairs = [lp(1.0, 1.0, 0.1), lp(0.5, -0.8, 0.3), lp(0.7, 0.4, 1.0)];
        (phi, pairs)
    }

    #[test]
    fn s31_matches_congruence() {
        let (phi, [p1, p2, p3]) = triple(17);
        let c = RibaucourConstants::default();
        let cong = ribaucour_from_three(&p1, &p2, &p3, &phi, &c, &SurfaceOptions::default()).unwrap();
        let h = hexa_from_congruence(&cong);
        let s = s31_surface(&p1, &p2, &p3, &phi, &c).unwrap();
        assert!(h.quadric_residual() < 1e-13);
        assert!(s.quadric_residual() < 1e-13);
        assert!(projective_match(&s, &h) < 1e-10);
        for k in 0..h.len() {
            let q = cong.radius.values()[k] * cong.q.values()[k] - cong.p.values()[k];
            assert!(q.abs() < 1e-12);
        }
    }

    #[test]
    fn pair3_equal_pair1_gives_v31_b_minus_half() {
        let (phi, [p1, p2, _]) = triple(17);
        let cong =
            ribaucour_from_three(&p1, &p2, &p1, &phi, &RibaucourConstants::default(), &SurfaceOptions::default())
                .unwrap();
        let want = cong.curv.b.map(|b| b - 0.5);
        assert!(cong.v31.max_abs_diff(&want) < 1e-3);
    }

    #[test]
    fn zero_v31_is_rejected() {
        let (phi, [p1, p2, _]) = triple(9);
        let g = *phi.field().grid();
        let zero = SolutionPair::new(ScalarField2D::zeros(g), ScalarField2D::zeros(g), &phi).unwrap();
        let err = s31_surface(&p1, &p2, &zero, &phi, &RibaucourConstants::default()).unwrap_err();
        assert!(matches!(err, Error::ZeroDenominator { .. }));
    }

    #[test]
    fn constant_laplace_and_dr() {
        let g = Grid2D::spanning(9, 9, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let z = HexaField { z: std::array::from_fn(|i| ScalarField2D::constant(g, i as f64)) };
        assert!(check_laplace(&z).residual < 1e-14);
        let r = ScalarField2D::constant(g, 0.2);
        let r1 = ScalarField2D::constant(g, 1.0);
        let r2 = ScalarField2D::constant(g, 2.0);
        assert!(check_dr(&r, &r1, &r2, &vec![true; g.len()]) < 1e-14);
    }
}
