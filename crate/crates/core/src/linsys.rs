//! The characteristic system `κ_x = tanφ s_x`, `κ_y = -cotφ s_y` and its Dirac form.

use crate::error::{Error, Result};
use crate::grid::{goursat_solve, integrate_closed_form, Axis, ScalarField2D};

/// Smallest admitted `|cos φ|` and `|sin φ|`.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// Angle field kept away from multiples of π/2.
#[derive(Debug, Clone)]
pub struct PhiField {
    phi: ScalarField2D,
    margin: f64,
}

impl PhiField {
    pub fn new(phi: ScalarField2D) -> Result<Self> {
        Self::with_margin(phi, DEFAULT_MARGIN)
    }

    pub fn with_margin(phi: ScalarField2D, margin: f64) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::Config(format!("angle margin must be positive, got {margin}")));
        }
        let f = Self { phi, margin };
        f.check_margin()?;
        Ok(f)
    }

    fn check_margin(&self) -> Result<()> {
        let g = self.phi.grid();
        let mut worst: Option<(usize, f64, f64)> = None;
        for (k, &v) in self.phi.values().iter().enumerate() {
            let (c, s) = (v.cos().abs(), v.sin().abs());
            if c < self.margin || s < self.margin {
                let m = c.min(s);
                if worst.is_none_or(|w| m < w.1.min(w.2)) {
                    worst = Some((k, c, s));
                }
            }
        }
        match worst {
            None => Ok(()),
            Some((k, cos, sin)) => {
                let (x, y) = g.coords(k);
                Err(Error::DegenerateAngle { x, y, cos, sin })
            }
        }
    }

    pub fn field(&self) -> &ScalarField2D {
        &self.phi
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn tan(&self) -> ScalarField2D {
        self.phi.map(f64::tan)
    }

    pub fn cot(&self) -> ScalarField2D {
        self.phi.map(|v| 1.0 / v.tan())
    }

    pub fn phi_x(&self) -> ScalarField2D {
        self.phi.diff(Axis::X)
    }

    pub fn phi_y(&self) -> ScalarField2D {
        self.phi.diff(Axis::Y)
    }
}

/// A solution `(κ, s)` of the characteristic system with its max-norm residuals.
#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub kappa: ScalarField2D,
    pub s: ScalarField2D,
    pub residual_x: f64,
    pub residual_y: f64,
}

impl SolutionPair {
    /// Wraps given fields, recording their residuals against `phi`.
    pub fn new(kappa: ScalarField2D, s: ScalarField2D, phi: &PhiField) -> Result<Self> {
        if !kappa.grid().same_as(s.grid()) || !kappa.grid().same_as(phi.field().grid()) {
            return Err(Error::GridMismatch);
        }
        let mut pair = Self { kappa, s, residual_x: 0.0, residual_y: 0.0 };
        let (rx, ry) = residual(&pair, phi);
        pair.residual_x = rx;
        pair.residual_y = ry;
        Ok(pair)
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_x.max(self.residual_y)
    }
}

/// Dirac variables `ψ¹ = -s_y / sinφ`, `ψ² = s_x / cosφ`.
#[derive(Debug, Clone)]
pub struct DiracPair {
    pub psi1: ScalarField2D,
    pub psi2: ScalarField2D,
    /// `max |ψ¹_x - φ_y ψ²|`
    pub residual_1: f64,
    /// `max |ψ²_y + φ_x ψ¹|`
    pub residual_2: f64,
}

/// Solves the system with `s` given on both coordinate axes and `κ(x0, y0) = kappa0`.
///
/// `s` comes from the Goursat problem `s_xy = (φ_x cotφ) s_y - (φ_y tanφ) s_x`,
/// then `κ` is the potential of `tanφ s_x dx - cotφ s_y dy`.
pub fn solve_pair(phi: &PhiField, s_on_x_axis: &[f64], s_on_y_axis: &[f64], kappa0: f64) -> Result<SolutionPair> {
    let tan = phi.tan();
    let cot = phi.cot();
    let p = &(-&phi.phi_y()) * &tan;
    let q = &phi.phi_x() * &cot;
    let r = ScalarField2D::zeros(*phi.field().grid());
    let s = goursat_solve(&p, &q, &r, s_on_x_axis, s_on_y_axis)?;
    let a = &tan * &s.diff(Axis::X);
    let b = &(-&cot) * &s.diff(Axis::Y);
    let kappa = integrate_closed_form(&a, &b, kappa0)?.potential;
    SolutionPair::new(kappa, s, phi)
}

/// Max-norm residuals of both equations of the system.
pub fn residual(pair: &SolutionPair, phi: &PhiField) -> (f64, f64) {
    let tan = phi.tan();
    let cot = phi.cot();
    let kx = pair.kappa.diff(Axis::X);
    let ky = pair.kappa.diff(Axis::Y);
    let sx = pair.s.diff(Axis::X);
    let sy = pair.s.diff(Axis::Y);
    let rx = (0..kx.values().len())
        .map(|k| (kx.values()[k] - tan.values()[k] * sx.values()[k]).abs())
        .fold(0.0, f64::max);
    let ry = (0..ky.values().len())
        .map(|k| (ky.values()[k] + cot.values()[k] * sy.values()[k]).abs())
        .fold(0.0, f64::max);
    (rx, ry)
}

pub fn to_dirac(pair: &SolutionPair, phi: &PhiField) -> Result<DiracPair> {
    if !pair.s.grid().same_as(phi.field().grid()) {
        return Err(Error::GridMismatch);
    }
    let f = phi.field();
    let psi1 = pair.s.diff(Axis::Y).zip_map(f, |sy, a| -sy / a.sin());
    let psi2 = pair.s.diff(Axis::X).zip_map(f, |sx, a| sx / a.cos());
    let r1 = &psi1.diff(Axis::X) - &(&phi.phi_y() * &psi2);
    let r2 = &psi2.diff(Axis::Y) + &(&phi.phi_x() * &psi1);
    Ok(DiracPair { residual_1: r1.max_abs(), residual_2: r2.max_abs(), psi1, psi2 })
}
