//! Constant angle with linear data: the box scheme is exact there, so the
//! frame in S^4 is orthonormal to round-off for any number of normals.

use std::f64::consts::FRAC_PI_4;

use flatnormal::catalog::PairSpec;
use flatnormal::construction::{build_frame, check_orthonormal};
use flatnormal::grid::{Grid2D, ScalarField2D};
use flatnormal::linsys::PhiField;
use flatnormal::verify::{flat_normal_check, weingarten_commutativity, Frame};

fn main() -> flatnormal::Result<()> {
    let g = Grid2D::spanning(33, 33, (0.0, 1.0), (0.0, 1.0))?;
    let phi = PhiField::new(ScalarField2D::constant(g, FRAC_PI_4))?;
    let specs = [PairSpec::linear(0.3, 0.3, 0.0), PairSpec::linear(0.15, -0.2, 0.06), PairSpec::linear(-0.1, 0.15, 0.2)];
    let pairs = specs.iter().map(|s| s.solve(&phi)).collect::<flatnormal::Result<Vec<_>>>()?;
    for m in 1..=pairs.len() {
        let w = build_frame(&pairs[..m])?.2;
        let frame = Frame::from_wfield(&w);
        println!(
            "S^{}: orthonormality {:.1e}, flat normal {:.1e}, off-diagonal {:.1e}",
            m + 1,
            check_orthonormal(&w),
            flat_normal_check(&frame),
            weingarten_commutativity(&frame).off_diagonal
        );
    }
    Ok(())
}
