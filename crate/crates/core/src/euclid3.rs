//! Closed-form surfaces in E³ from two solution pairs, their principal radii
//! and the Lie-invariant functional.

use crate::error::{Error, Result};
use crate::grid::{integrate_closed_form, surface_integral, Axis, ScalarField2D};
use crate::linsys::{PhiField, SolutionPair};

pub const UMBILIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceOptions {
    /// Value of `A` at the grid origin.
    pub a0: f64,
    /// Largest fraction of nodes where `s¹_x` or `s¹_y` may vanish.
    pub max_masked_fraction: f64,
    pub umbilic_tol: f64,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self { a0: 0.0, max_masked_fraction: 1.0, umbilic_tol: UMBILIC_TOL }
    }
}

/// Radius vector and unit normal, component by component.
#[derive(Debug, Clone)]
pub struct Surface3 {
    pub r: [ScalarField2D; 3],
    pub n: [ScalarField2D; 3],
}

impl Surface3 {
    pub fn point(&self, k: usize) -> [f64; 3] {
        [self.r[0].values()[k], self.r[1].values()[k], self.r[2].values()[k]]
    }

    pub fn normal(&self, k: usize) -> [f64; 3] {
        [self.n[0].values()[k], self.n[1].values()[k], self.n[2].values()[k]]
    }

    /// `max ||n| - 1|`.
    pub fn normal_defect(&self) -> f64 {
        (0..self.r[0].values().len())
            .map(|k| {
                let n = self.normal(k);
                ((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `A`, `B`, the ratios `λ`, radii `ρ` and node masks.
///
/// At masked nodes (`valid[k] == false`) `λ` and `ρ` hold 0.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub a: ScalarField2D,
    pub b: ScalarField2D,
    pub lambda1: ScalarField2D,
    pub lambda2: ScalarField2D,
    pub rho1: ScalarField2D,
    pub rho2: ScalarField2D,
    pub valid: Vec<bool>,
    pub umbilic: Vec<bool>,
}

impl CurvatureData {
    pub fn masked_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    pub fn umbilic_count(&self) -> usize {
        self.umbilic.iter().filter(|u| **u).count()
    }

    /// Umbilic nodes over all nodes.
    pub fn umbilic_fraction(&self) -> f64 {
        self.umbilic_count() as f64 / self.umbilic.len() as f64
    }
}

fn check_same(pairs: &[&SolutionPair], phi: &PhiField) -> Result<()> {
    let g = phi.field().grid();
    if pairs.iter().any(|p| !p.s.grid().same_as(g) || !p.kappa.grid().same_as(g)) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `B = (κ¹² + s¹² + 1)/2`.
pub fn b_field(pair1: &SolutionPair) -> ScalarField2D {
    pair1.kappa.zip_map(&pair1.s, |k, s| 0.5 * (k * k + s * s + 1.0))
}

/// Potential of `κ¹ dκ² + s¹ ds²` with `A(x0, y0) = a0`.
pub fn a_field(pair1: &SolutionPair, pair2: &SolutionPair, a0: f64) -> Result<ScalarField2D> {
    let dx = &(&pair1.kappa * &pair2.kappa.diff(Axis::X)) + &(&pair1.s * &pair2.s.diff(Axis::X));
    let dy = &(&pair1.kappa * &pair2.kappa.diff(Axis::Y)) + &(&pair1.s * &pair2.s.diff(Axis::Y));
    Ok(integrate_closed_form(&dx, &dy, a0)?.potential)
}

fn assemble(pair1: &SolutionPair, pair2: &SolutionPair, a: &ScalarField2D, b: &ScalarField2D) -> Surface3 {
    let ab = a.zip_map(b, |a, b| a / b);
    let (k1, s1) = (&pair1.kappa, &pair1.s);
    Surface3 {
        r: [&pair2.kappa - &(k1 * &ab), &pair2.s - &(s1 * &ab), -&ab],
        n: [k1.zip_map(b, |k, b| k / b), s1.zip_map(b, |s, b| s / b), b.map(|b| 1.0 / b - 1.0)],
    }
}

pub fn build_surface(
    pair1: &SolutionPair,
    pair2: &SolutionPair,
    phi: &PhiField,
    opts: &SurfaceOptions,
) -> Result<(Surface3, CurvatureData)> {
    check_same(&[pair1, pair2], phi)?;
    let g = *phi.field().grid();
    let a = a_field(pair1, pair2, opts.a0)?;
    let b = b_field(pair1);
    let surface = assemble(pair1, pair2, &a, &b);

    let (s1x, s1y) = (pair1.s.diff(Axis::X), pair1.s.diff(Axis::Y));
    let (s2x, s2y) = (pair2.s.diff(Axis::X), pair2.s.diff(Axis::Y));
    let floor = 1e-10 * (1.0 + s1x.max_abs().max(s1y.max_abs()));
    let n = g.len();
    let mut valid = vec![true; n];
    let mut umbilic = vec![false; n];
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    for k in 0..n {
        let (dx, dy) = (s1x.values()[k], s1y.values()[k]);
        if dx.abs() <= floor || dy.abs() <= floor {
            valid[k] = false;
            continue;
        }
        let (la, lb) = (s2x.values()[k] / dx, s2y.values()[k] / dy);
        let (av, bv) = (a.values()[k], b.values()[k]);
        l1[k] = la;
        l2[k] = lb;
        r1[k] = la * bv - av;
        r2[k] = lb * bv - av;
        umbilic[k] = (la - lb).abs() < opts.umbilic_tol * (1.0 + la.abs() + lb.abs());
    }
    let masked = valid.iter().filter(|v| !**v).count();
    let fraction = masked as f64 / n as f64;
    if fraction > opts.max_masked_fraction {
        return Err(Error::DegeneratePair1 { fraction, allowed: opts.max_masked_fraction });
    }
    let field = |v: Vec<f64>| ScalarField2D::raw(g, v);
    let curv = CurvatureData {
        a,
        b,
        lambda1: field(l1),
        lambda2: field(l2),
        rho1: field(r1),
        rho2: field(r2),
        valid,
        umbilic,
    };
    Ok((surface, curv))
}

/// Another member of the Combescure family: same `pair1`, hence the same normal.
pub fn combescure(pair1: &SolutionPair, alt_pair2: &SolutionPair, phi: &PhiField, a0: f64) -> Result<Surface3> {
    check_same(&[pair1, alt_pair2], phi)?;
    let a = a_field(pair1, alt_pair2, a0)?;
    Ok(assemble(pair1, alt_pair2, &a, &b_field(pair1)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeingartenReport {
    /// `max |r_x - ρ¹ n_x|` over valid nodes.
    pub residual_x: f64,
    /// `max |r_y - ρ² n_y|` over valid nodes.
    pub residual_y: f64,
    pub masked: usize,
}

pub fn check_weingarten(surface: &Surface3, curv: &CurvatureData) -> WeingartenReport {
    let mut rx: f64 = 0.0;
    let mut ry: f64 = 0.0;
    for c in 0..3 {
        let (drx, dry) = (surface.r[c].diff(Axis::X), surface.r[c].diff(Axis::Y));
        let (dnx, dny) = (surface.n[c].diff(Axis::X), surface.n[c].diff(Axis::Y));
        for k in 0..curv.valid.len() {
            if !curv.valid[k] {
                continue;
            }
            rx = rx.max((drx.values()[k] - curv.rho1.values()[k] * dnx.values()[k]).abs());
            ry = ry.max((dry.values()[k] - curv.rho2.values()[k] * dny.values()[k]).abs());
        }
    }
    WeingartenReport { residual_x: rx, residual_y: ry, masked: curv.masked_count() }
}

/// `max |(r_x, n_y)|`: the mixed coefficient of the second fundamental form.
pub fn mixed_second_form(surface: &Surface3) -> f64 {
    let rx: Vec<_> = surface.r.iter().map(|f| f.diff(Axis::X)).collect();
    let ny: Vec<_> = surface.n.iter().map(|f| f.diff(Axis::Y)).collect();
    (0..rx[0].values().len())
        .map(|k| (0..3).map(|c| rx[c].values()[k] * ny[c].values()[k]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Largest gap between `(dn, dn)` from differences and
/// `(s¹_x/B)² dx²/cos²φ + (s¹_y/B)² dy²/sin²φ`, relative to the largest
/// closed-form coefficient.
pub fn third_form_residual(surface: &Surface3, pair1: &SolutionPair, phi: &PhiField) -> f64 {
    let b = b_field(pair1);
    let nx: Vec<_> = surface.n.iter().map(|f| f.diff(Axis::X)).collect();
    let ny: Vec<_> = surface.n.iter().map(|f| f.diff(Axis::Y)).collect();
    let (s1x, s1y) = (pair1.s.diff(Axis::X), pair1.s.diff(Axis::Y));
    let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
    for k in 0..b.values().len() {
        let f = phi.field().values()[k];
        let bv = b.values()[k];
        let e: f64 = (0..3).map(|c| nx[c].values()[k].powi(2)).sum();
        let gg: f64 = (0..3).map(|c| ny[c].values()[k].powi(2)).sum();
        let m: f64 = (0..3).map(|c| nx[c].values()[k] * ny[c].values()[k]).sum();
        let e_cf = (s1x.values()[k] / bv).powi(2) / f.cos().powi(2);
        let g_cf = (s1y.values()[k] / bv).powi(2) / f.sin().powi(2);
        worst = worst.max((e - e_cf).abs()).max((gg - g_cf).abs()).max(m.abs());
        scale = scale.max(e_cf).max(g_cf);
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

fn refuse_singular(curv: &CurvatureData) -> Result<()> {
    let umb = curv.umbilic_count();
    if umb > 0 {
        return Err(Error::UmbilicPresent { count: umb });
    }
    let masked = curv.masked_count();
    if masked > 0 {
        return Err(Error::DegeneratePair1 { fraction: masked as f64 / curv.valid.len() as f64, allowed: 0.0 });
    }
    Ok(())
}

/// `∫∫ ρ¹_x ρ²_y / (ρ¹ - ρ²)² dx dy`.
pub fn lie_functional_rho(curv: &CurvatureData) -> Result<f64> {
    refuse_singular(curv)?;
    let (r1x, r2y) = (curv.rho1.diff(Axis::X), curv.rho2.diff(Axis::Y));
    let d = &curv.rho1 - &curv.rho2;
    let integrand = r1x.zip_map(&r2y, |a, b| a * b).zip_map(&d, |ab, d| ab / (d * d));
    Ok(surface_integral(&integrand))
}

/// `∫∫ λ¹_x λ²_y / (λ¹ - λ²)² dx dy`, equal to the ρ form pointwise.
pub fn lie_functional_lambda(curv: &CurvatureData) -> Result<f64> {
    refuse_singular(curv)?;
    let (l1x, l2y) = (curv.lambda1.diff(Axis::X), curv.lambda2.diff(Axis::Y));
    let d = &curv.lambda1 - &curv.lambda2;
    let integrand = l1x.zip_map(&l2y, |a, b| a * b).zip_map(&d, |ab, d| ab / (d * d));
    Ok(surface_integral(&integrand))
}

/// `∫∫ φ_x φ_y dx dy`.
pub fn lie_functional_phi(phi: &ScalarField2D) -> f64 {
    surface_integral(&(&phi.diff(Axis::X) * &phi.diff(Axis::Y)))
}
