use thiserror::Error;

/// Errors raised by the construction, congruence, flow and verification routines.
///
/// Variants that concern a single grid node carry its coordinates so callers
/// can report where a chart was left or a degeneracy was met.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("1-form is not closed: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotClosed { residual: f64, tolerance: f64 },

    #[error("Goursat corner data disagree: {x_axis} on the x-axis vs {y_axis} on the y-axis")]
    CornerMismatch { x_axis: f64, y_axis: f64 },

    #[error("Goursat fixed-point sweep does not contract in the cell at ({x:.6}, {y:.6})")]
    GoursatDiverged { x: f64, y: f64 },

    #[error("axis data has length {got}, expected {expected}")]
    AxisLength { expected: usize, got: usize },

    #[error("angle field too close to a multiple of pi/2 at ({x:.6}, {y:.6}): |cos|={cos:.3e}, |sin|={sin:.3e}")]
    DegenerateAngle { x: f64, y: f64, cos: f64, sin: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("V is singular at ({x:.6}, {y:.6}): det={det:.3e}, cond={cond:.3e}")]
    SingularV { x: f64, y: f64, det: f64, cond: f64 },

    #[error("point is the projection pole")]
    AtPole,

    #[error("lower block + E is singular at ({x:.6}, {y:.6})")]
    SingularBlock { x: f64, y: f64 },

    #[error("frame is not a curvature-line flat-normal-bundle frame: {reason}")]
    InconsistentFrame { reason: String },

    #[error("first pair degenerate: s1_x or s1_y vanishes on {fraction:.3} of the nodes (allowed {allowed:.3})")]
    DegeneratePair1 { fraction: f64, allowed: f64 },

    #[error("umbilic points present ({count} nodes)")]
    UmbilicPresent { count: usize },

    #[error("V31 vanishes at ({x:.6}, {y:.6})")]
    ZeroDenominator { x: f64, y: f64 },

    #[error("fourth Moutard solution vanishes at ({x:.6}, {y:.6})")]
    ZeroXi4 { x: f64, y: f64 },

    #[error("points are proportional; the line is undefined")]
    DegenerateLine,

    #[error("marching did not converge: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NonConvergent { residual: f64, tolerance: f64 },

    #[error("time step {dt:.3e} exceeds the explicit stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("tangent vector d{axis}w1 degenerates at node {node:?}")]
    DegenerateTangent { axis: usize, node: Vec<usize> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
