//! Spherical coordinates of flat space as a triply orthogonal system:
//! rotation coefficients, Lame coefficients, direction cosines and flat
//! coordinates, each converging at second order.

use flatnormal::catalog::{spherical_cosines, spherical_rotation, SphericalLame};
use flatnormal::grid::GridN;
use flatnormal::highdim::{build_submanifold, check_rotation, cosine_residual, direction_cosines, flat_coords, solve_lame};

fn main() -> flatnormal::Result<()> {
    println!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "n", "rot1", "rot2", "lame", "cosines", "closed", "orth");
    for n in [9, 17, 33] {
        let g = GridN::spanning(&[n, n, n], &[(1.0, 1.4), (0.8, 1.2), (0.0, 0.4)])?;
        let beta = spherical_rotation(&g);
        let rot = check_rotation(&beta);
        let frame = direction_cosines(&beta, &spherical_cosines(&g.point(0)))?;
        let lame = solve_lame(&beta, &SphericalLame::default().axis_data(&g))?;
        let flat = flat_coords(&frame, &lame, &[0.1, 0.2, 0.3])?;
        let closed = flat.closedness;
        let sub = build_submanifold(&[flat])?;
        println!(
            "{n:>4} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}",
            rot.first,
            rot.second,
            lame.residual,
            cosine_residual(&beta, &frame),
            closed,
            sub.orthonormal_residual()
        );
    }
    Ok(())
}
