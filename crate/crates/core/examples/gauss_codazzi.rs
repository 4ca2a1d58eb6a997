//! Gauss-Codazzi checks on a constructed frame, and on the same frame after
//! rotating two normals into each other, which breaks flatness.

use flatnormal::catalog::{PairSpec, PhiSpec};
use flatnormal::construction::build_frame;
use flatnormal::grid::Grid2D;
use flatnormal::linsys::PhiField;
use flatnormal::verify::{codazzi_residual, extract_geometry, flat_normal_check, rotate_normals, Frame};

fn main() -> flatnormal::Result<()> {
    let g = Grid2D::spanning(65, 65, (0.0, 1.0), (0.0, 1.0))?;
    let phi = PhiField::new(PhiSpec::SineXy { base: 0.7, amp: 0.3, slope: 0.1 }.sample(g))?;
    let pairs = [PairSpec::monotone(0.3, 0.25, 0.0), PairSpec::monotone(0.15, -0.2, 0.1), PairSpec::monotone(-0.1, 0.15, 0.2)]
        .iter()
        .map(|s| s.solve(&phi))
        .collect::<flatnormal::Result<Vec<_>>>()?;
    let frame = Frame::from_wfield(&build_frame(&pairs)?.2);
    let rotated = rotate_normals(&frame, 1, 2, |u| 0.5 * u[0])?;
    for (name, f) in [("constructed", &frame), ("rotated", &rotated)] {
        let c = codazzi_residual(&extract_geometry(f)?);
        println!(
            "{name:<12} flat {:.2e}  lame {:.2e}  rotation {:.2e}  gauss {:.2e}",
            flat_normal_check(f),
            c.lame,
            c.rotation,
            c.gauss
        );
    }
    Ok(())
}
