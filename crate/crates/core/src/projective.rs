//! Moutard solutions, Lelieuvre surfaces, W-congruences and their Plücker image.

use crate::error::{Error, Result};
use crate::grid::{goursat_solve, integrate_closed_form, Axis, ScalarField2D};

/// `ξ_xy = Q ξ` with `ξ` given on both axes.
pub fn moutard_solve(q: &ScalarField2D, on_x_axis: &[f64], on_y_axis: &[f64]) -> Result<ScalarField2D> {
    let z = ScalarField2D::zeros(*q.grid());
    goursat_solve(&z, &z, q, on_x_axis, on_y_axis)
}

/// `max |ξ_xy - Q ξ|`.
pub fn moutard_residual(q: &ScalarField2D, xi: &ScalarField2D) -> f64 {
    let xy = xi.diff(Axis::X).diff(Axis::Y);
    xy.max_abs_diff(&(q * xi))
}

/// Four solutions of one Moutard equation.
#[derive(Debug, Clone)]
pub struct MoutardSet {
    pub q: ScalarField2D,
    pub xi: [ScalarField2D; 4],
    pub residuals: [f64; 4],
}

impl MoutardSet {
    pub fn new(q: ScalarField2D, xi: [ScalarField2D; 4]) -> Result<Self> {
        if xi.iter().any(|x| !x.grid().same_as(q.grid())) {
            return Err(Error::GridMismatch);
        }
        let residuals = std::array::from_fn(|i| moutard_residual(&q, &xi[i]));
        Ok(Self { q, xi, residuals })
    }

    /// Solves for all four members from axis data `(on_x_axis, on_y_axis)`.
    pub fn solve(q: ScalarField2D, data: [(Vec<f64>, Vec<f64>); 4]) -> Result<Self> {
        let mut xi = Vec::with_capacity(4);
        for (xa, ya) in &data {
            xi.push(moutard_solve(&q, xa, ya)?);
        }
        let xi: [ScalarField2D; 4] = xi.try_into().expect("four solutions");
        Self::new(q, xi)
    }
}

/// Potential of `(ξⁱ_x ξʲ - ξʲ_x ξⁱ) dx + (ξʲ_y ξⁱ - ξⁱ_y ξʲ) dy`, zero at the grid origin.
pub fn skew_potential(xi_i: &ScalarField2D, xi_j: &ScalarField2D) -> Result<ScalarField2D> {
    let (ix, iy) = (xi_i.diff(Axis::X), xi_i.diff(Axis::Y));
    let (jx, jy) = (xi_j.diff(Axis::X), xi_j.diff(Axis::Y));
    let a = &(&ix * xi_j) - &(&jx * xi_i);
    let b = &(&jy * xi_i) - &(&iy * xi_j);
    Ok(integrate_closed_form(&a, &b, 0.0)?.potential)
}

/// All `S^{ij}`, indices 0-based, with `S^{ji} = -S^{ij}`.
#[derive(Debug, Clone)]
pub struct SkewPotentials {
    upper: Vec<ScalarField2D>,
}

impl SkewPotentials {
    pub fn new(set: &MoutardSet) -> Result<Self> {
        let mut upper = Vec::with_capacity(6);
        for i in 0..4 {
            for j in i + 1..4 {
                upper.push(skew_potential(&set.xi[i], &set.xi[j])?);
            }
        }
        Ok(Self { upper })
    }

    fn slot(i: usize, j: usize) -> usize {
        // (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
        match (i, j) {
            (0, 1) => 0,
            (0, 2) => 1,
            (0, 3) => 2,
            (1, 2) => 3,
            (1, 3) => 4,
            (2, 3) => 5,
            _ => unreachable!(),
        }
    }

    /// `S^{ij}` at node `k`.
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(i < 4 && j < 4);
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[Self::slot(i, j)].values()[k],
            std::cmp::Ordering::Greater => -self.upper[Self::slot(j, i)].values()[k],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn field(&self, i: usize, j: usize) -> ScalarField2D {
        let f = &self.upper[Self::slot(i.min(j), i.max(j))];
        if i < j {
            f.clone()
        } else {
            -f
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn at3(f: &[ScalarField2D; 3], k: usize) -> [f64; 3] {
    [f[0].values()[k], f[1].values()[k], f[2].values()[k]]
}

#[derive(Debug, Clone)]
pub struct Lelieuvre {
    pub r: [ScalarField2D; 3],
    /// `max |r_x - ξ_x × ξ|`
    pub residual_x: f64,
    /// `max |r_y - ξ × ξ_y|`
    pub residual_y: f64,
}

/// `r = (S²³, S³¹, S¹²)` from the first three solutions.
pub fn lelieuvre(set: &MoutardSet, s: &SkewPotentials) -> Lelieuvre {
    let r = [s.field(1, 2), s.field(2, 0), s.field(0, 1)];
    let xi = [set.xi[0].clone(), set.xi[1].clone(), set.xi[2].clone()];
    let xix: [ScalarField2D; 3] = std::array::from_fn(|c| xi[c].diff(Axis::X));
    let xiy: [ScalarField2D; 3] = std::array::from_fn(|c| xi[c].diff(Axis::Y));
    let rx: [ScalarField2D; 3] = std::array::from_fn(|c| r[c].diff(Axis::X));
    let ry: [ScalarField2D; 3] = std::array::from_fn(|c| r[c].diff(Axis::Y));
    let (mut ex, mut ey): (f64, f64) = (0.0, 0.0);
    for k in 0..set.q.values().len() {
        let v = at3(&xi, k);
        let cx = cross(at3(&xix, k), v);
        let cy = cross(v, at3(&xiy, k));
        let (a, b) = (at3(&rx, k), at3(&ry, k));
        for c in 0..3 {
            ex = ex.max((a[c] - cx[c]).abs());
            ey = ey.max((b[c] - cy[c]).abs());
        }
    }
    Lelieuvre { r, residual_x: ex, residual_y: ey }
}

/// `max |(r_xx, ξ)|` and `max |(r_yy, ξ)|` relative to `|r_xx| |ξ|`, `|r_yy| |ξ|`.
pub fn asymptotic_residual(set: &MoutardSet, r: &[ScalarField2D; 3]) -> (f64, f64) {
    let rxx: [ScalarField2D; 3] = std::array::from_fn(|c| r[c].diff(Axis::X).diff(Axis::X));
    let ryy: [ScalarField2D; 3] = std::array::from_fn(|c| r[c].diff(Axis::Y).diff(Axis::Y));
    let xi = [set.xi[0].clone(), set.xi[1].clone(), set.xi[2].clone()];
    let g = *set.q.grid();
    let (mut a, mut b): (f64, f64) = (0.0, 0.0);
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        if !g.is_inner(i, j, 1) {
            continue;
        }
        let v = at3(&xi, k);
        let (p, q) = (at3(&rxx, k), at3(&ryy, k));
        let rel = |w: [f64; 3]| {
            let s = norm(w) * norm(v);
            if s > 0.0 {
                dot(w, v).abs() / s
            } else {
                0.0
            }
        };
        a = a.max(rel(p));
        b = b.max(rel(q));
    }
    (a, b)
}

/// The two focal surfaces of the congruence, in homogeneous coordinates
/// `r = (S²³, S³¹, S¹², 1)` and
/// `r̃ = (S²³ξ⁴ + S⁴²ξ³ - S⁴³ξ², S³¹ξ⁴ + S⁴³ξ¹ - S⁴¹ξ³, S¹²ξ⁴ + S⁴¹ξ² - S⁴²ξ¹, ξ⁴)`.
#[derive(Debug, Clone)]
pub struct WCongruence {
    pub r: [ScalarField2D; 4],
    pub r_tilde: [ScalarField2D; 4],
}

impl WCongruence {
    /// Affine point of `r̃`.
    pub fn r_tilde_affine(&self) -> [ScalarField2D; 3] {
        std::array::from_fn(|c| self.r_tilde[c].zip_map(&self.r_tilde[3], |a, w| a / w))
    }

    pub fn r_affine(&self) -> [ScalarField2D; 3] {
        [self.r[0].clone(), self.r[1].clone(), self.r[2].clone()]
    }
}

fn check_xi4(set: &MoutardSet) -> Result<()> {
    let x4 = &set.xi[3];
    let floor = 1e-12 * (1.0 + x4.max_abs());
    if let Some(k) = x4.values().iter().position(|v| v.abs() <= floor) {
        let (x, y) = x4.grid().coords(k);
        return Err(Error::ZeroXi4 { x, y });
    }
    Ok(())
}

pub fn w_congruence(set: &MoutardSet, s: &SkewPotentials) -> Result<WCongruence> {
    check_xi4(set)?;
    let g = *set.q.grid();
    let n = g.len();
    let mut rt: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    for k in 0..n {
        let xi: [f64; 4] = std::array::from_fn(|i| set.xi[i].values()[k]);
        let sij = |i: usize, j: usize| s.at(i, j, k);
        rt[0][k] = sij(1, 2) * xi[3] + sij(3, 1) * xi[2] - sij(3, 2) * xi[1];
        rt[1][k] = sij(2, 0) * xi[3] + sij(3, 2) * xi[0] - sij(3, 0) * xi[2];
        rt[2][k] = sij(0, 1) * xi[3] + sij(3, 0) * xi[1] - sij(3, 1) * xi[0];
        rt[3][k] = xi[3];
    }
    Ok(WCongruence {
        r: [s.field(1, 2), s.field(2, 0), s.field(0, 1), ScalarField2D::constant(g, 1.0)],
        r_tilde: rt.map(|v| ScalarField2D::raw(g, v)),
    })
}

/// Largest `|(r̃ - r, N)| / |r̃ - r|` where `N` is the unit normal of the
/// surface `surf`; zero when the line lies in its tangent plane.
pub fn tangency_residual(w: &WCongruence, surf: &[ScalarField2D; 3]) -> f64 {
    let (r, rt) = (w.r_affine(), w.r_tilde_affine());
    let sx: [ScalarField2D; 3] = std::array::from_fn(|c| surf[c].diff(Axis::X));
    let sy: [ScalarField2D; 3] = std::array::from_fn(|c| surf[c].diff(Axis::Y));
    let mut worst: f64 = 0.0;
    for k in 0..r[0].values().len() {
        let d = {
            let (a, b) = (at3(&r, k), at3(&rt, k));
            [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
        };
        let nrm = cross(at3(&sx, k), at3(&sy, k));
        let (ld, ln) = (norm(d), norm(nrm));
        if ld == 0.0 || ln == 0.0 {
            continue;
        }
        worst = worst.max(dot(d, nrm).abs() / (ld * ln));
    }
    worst
}

/// `(p¹², p¹³, p¹⁴, p²³, p⁴², p³⁴)` of the line through `a` and `b`.
pub fn pluecker(a: [f64; 4], b: [f64; 4]) -> Result<[f64; 6]> {
    let p = |i: usize, j: usize| a[i] * b[j] - a[j] * b[i];
    let out = [p(0, 1), p(0, 2), p(0, 3), p(1, 2), p(3, 1), p(2, 3)];
    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt() * b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if out.iter().all(|v| v.abs() <= 1e-14 * scale) {
        return Err(Error::DegenerateLine);
    }
    Ok(out)
}

/// `p¹²p³⁴ + p¹³p⁴² + p¹⁴p²³` relative to `Σ p²`.
pub fn pluecker_quadric(p: &[f64; 6]) -> f64 {
    let form = p[0] * p[5] + p[1] * p[4] + p[2] * p[3];
    let scale: f64 = p.iter().map(|v| v * v).sum();
    if scale == 0.0 {
        0.0
    } else {
        form.abs() / scale
    }
}

/// Half sums and differences taking the Plücker quadric to signature `(+++---)`.
pub fn z_map(p: &[f64; 6]) -> [f64; 6] {
    let [p12, p13, p14, p23, p42, p34] = *p;
    [
        0.5 * (p12 + p34),
        0.5 * (p13 + p42),
        0.5 * (p14 + p23),
        0.5 * (p12 - p34),
        0.5 * (p13 - p42),
        0.5 * (p14 - p23),
    ]
}

/// `(z¹)²+(z²)²+(z³)²-(z⁴)²-(z⁵)²-(z⁶)²` relative to `Σ z²`.
pub fn s22_quadric(z: &[f64; 6]) -> f64 {
    let form = z[0] * z[0] + z[1] * z[1] + z[2] * z[2] - z[3] * z[3] - z[4] * z[4] - z[5] * z[5];
    let scale: f64 = z.iter().map(|v| v * v).sum();
    if scale == 0.0 {
        0.0
    } else {
        form.abs() / scale
    }
}

#[derive(Debug, Clone)]
pub struct S22Surface {
    pub p: [ScalarField2D; 6],
    pub z: [ScalarField2D; 6],
    /// Largest projective gap between the explicit list and `pluecker(r, r̃)`.
    pub match_residual: f64,
    pub pluecker_residual: f64,
    pub quadric_residual: f64,
    /// Nodes where `r̃ = r` (always the base node, where every `S^{ij}` vanishes).
    pub degenerate: usize,
}

/// Plücker coordinates of the congruence lines written in `S^{ij}` and `ξ`.
pub fn s22_surface(set: &MoutardSet, s: &SkewPotentials) -> Result<S22Surface> {
    let w = w_congruence(set, s)?;
    let g = *set.q.grid();
    let n = g.len();
    let mut p: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
    let mut z: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
    let (mut mism, mut plq, mut zq): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut degenerate = 0;
    for k in 0..n {
        let x: [f64; 4] = std::array::from_fn(|i| set.xi[i].values()[k]);
        let sij = |i: usize, j: usize| s.at(i, j, k);
        let (s23, s31, s12) = (sij(1, 2), sij(2, 0), sij(0, 1));
        let (s41, s42, s43) = (sij(3, 0), sij(3, 1), sij(3, 2));
        let list = [
            s23 * (s43 * x[0] - s41 * x[2]) - s31 * (s42 * x[2] - s43 * x[1]),
            s23 * (s41 * x[1] - s42 * x[0]) - s12 * (s42 * x[2] - s43 * x[1]),
            s43 * x[1] - s42 * x[2],
            s31 * (s41 * x[1] - s42 * x[0]) - s12 * (s43 * x[0] - s41 * x[2]),
            s43 * x[0] - s41 * x[2],
            s42 * x[0] - s41 * x[1],
        ];
        let a = std::array::from_fn(|c| w.r[c].values()[k]);
        let b = std::array::from_fn(|c| w.r_tilde[c].values()[k]);
        match pluecker(a, b) {
            Ok(direct) => mism = mism.max(projective_gap(&list, &direct)),
            Err(_) => degenerate += 1,
        }
        plq = plq.max(pluecker_quadric(&list));
        let zz = z_map(&list);
        zq = zq.max(s22_quadric(&zz));
        for c in 0..6 {
            p[c][k] = list[c];
            z[c][k] = zz[c];
        }
    }
    Ok(S22Surface {
        p: p.map(|v| ScalarField2D::raw(g, v)),
        z: z.map(|v| ScalarField2D::raw(g, v)),
        match_residual: mism,
        pluecker_residual: plq,
        quadric_residual: zq,
        degenerate,
    })
}

/// Gap between two homogeneous 6-vectors after scaling by the component
/// largest in `a`.
pub fn projective_gap(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    let i = (0..6).max_by(|&i, &j| a[i].abs().partial_cmp(&a[j].abs()).unwrap()).unwrap();
    if a[i] == 0.0 {
        return if b.iter().all(|v| *v == 0.0) { 0.0 } else { f64::INFINITY };
    }
    if b[i] == 0.0 {
        return f64::INFINITY;
    }
    (0..6).map(|c| (a[c] / a[i] - b[c] / b[i]).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn poly_set(n: usize) -> MoutardSet {
        let g = Grid2D::spanning(n, n, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let one = vec![1.0; n];
        let xs = g.x_coords();
        let ys = g.y_coords();
        MoutardSet::solve(
            ScalarField2D::zeros(g),
            [
                (one.clone(), one.clone()),
                (xs.clone(), vec![0.0; n]),
                (vec![0.0; n], ys.clone()),
                (xs.iter().map(|x| x + 1.0).collect(), ys.iter().map(|y| y + 1.0).collect()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn moutard_examples() {
        let set = poly_set(9);
        let g = *set.q.grid();
        assert!(set.xi[0].values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        for k in 0..g.len() {
            let (x, y) = g.coords(k);
            assert!((set.xi[1].values()[k] - x).abs() < 1e-14);
            assert!((set.xi[3].values()[k] - (1.0 + x + y)).abs() < 1e-14);
        }
        assert!(set.residuals.iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn hand_potentials_and_lelieuvre() {
        let set = poly_set(17);
        let g = *set.q.grid();
        let s = SkewPotentials::new(&set).unwrap();
        for k in 0..g.len() {
            let (x, y) = g.coords(k);
            assert!((s.at(0, 1, k) + x).abs() < 1e-12);
            assert!((s.at(1, 2, k) - x * y).abs() < 1e-12);
            assert!((s.at(2, 0, k) + y).abs() < 1e-12);
            assert_eq!(s.at(1, 0, k), -s.at(0, 1, k));
        }
        let l = lelieuvre(&set, &s);
        assert!(l.residual_x < 1e-12 && l.residual_y < 1e-12);
        let rx = l.r[0].diff(Axis::X);
        for k in 0..g.len() {
            assert!((rx.values()[k] - g.coords(k).1).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_xi_gives_zero_surface() {
        let g = Grid2D::spanning(5, 5, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let c = |v: f64| ScalarField2D::constant(g, v);
        let set = MoutardSet::new(c(0.0), [c(1.0), c(2.0), c(-1.0), c(3.0)]).unwrap();
        let s = SkewPotentials::new(&set).unwrap();
        let l = lelieuvre(&set, &s);
        assert!(l.r.iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn pluecker_examples() {
        let p = pluecker([1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(p, [1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(pluecker_quadric(&p), 0.0);
        assert_eq!(pluecker([1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0]), Err(Error::DegenerateLine));
        let z = z_map(&p);
        assert_eq!(z, [0.5, 0.5, 0.5, 0.5, -0.5, 0.5]);
        assert_eq!(s22_quadric(&z), 0.0);
    }

    #[test]
    fn explicit_list_matches_line() {
        let set = poly_set(17);
        let s = SkewPotentials::new(&set).unwrap();
        let surf = s22_surface(&set, &s).unwrap();
        assert!(surf.match_residual < 1e-12, "{}", surf.match_residual);
        assert!(surf.pluecker_residual < 1e-14);
        assert!(surf.quadric_residual < 1e-14);
        assert_eq!(surf.degenerate, 1);
        let w = w_congruence(&set, &s).unwrap();
        let l = lelieuvre(&set, &s);
        assert!(tangency_residual(&w, &l.r) < 1e-10);
    }

    #[test]
    fn zero_xi4_is_rejected() {
        let g = Grid2D::spanning(5, 5, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let c = |v: f64| ScalarField2D::constant(g, v);
        let set = MoutardSet::new(c(0.0), [c(1.0), c(2.0), c(-1.0), c(0.0)]).unwrap();
        let s = SkewPotentials::new(&set).unwrap();
        assert!(matches!(w_congruence(&set, &s), Err(Error::ZeroXi4 { .. })));
    }
}
