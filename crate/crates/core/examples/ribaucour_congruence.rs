//! Sphere congruence enveloped by a surface in E^3, from three pairs.

use flatnormal::catalog::{PairSpec, PhiSpec};
use flatnormal::euclid3::SurfaceOptions;
use flatnormal::grid::Grid2D;
use flatnormal::linsys::PhiField;
use flatnormal::ribaucour::{
    check_dr, check_laplace, hexa_from_congruence, pq_residual, projective_match, ribaucour_from_three, s31_surface,
    RibaucourConstants,
};

fn main() -> flatnormal::Result<()> {
    let g = Grid2D::spanning(65, 65, (0.0, 1.0), (0.0, 1.0))?;
    let phi = PhiField::new(PhiSpec::SineXy { base: 0.7, amp: 0.2, slope: 0.1 }.sample(g))?;
    let p: Vec<_> = [PairSpec::monotone(1.0, 1.0, 0.2), PairSpec::monotone(0.5, -0.8, 0.3), PairSpec::monotone(0.7, 0.4, 1.0)]
        .iter()
        .map(|s| s.solve(&phi))
        .collect::<flatnormal::Result<_>>()?;
    let consts = RibaucourConstants { c31: 3.0, c32: -1.0, a0: 0.0 };
    let cong = ribaucour_from_three(&p[0], &p[1], &p[2], &phi, &consts, &SurfaceOptions::default())?;
    let (px, py) = pq_residual(&cong);
    let s31 = s31_surface(&p[0], &p[1], &p[2], &phi, &consts)?;
    let hexa = hexa_from_congruence(&cong);
    println!("P, Q residuals       {px:.2e} {py:.2e}");
    println!("radius equation      {:.2e}", check_dr(&cong.radius, &cong.curv.rho1, &cong.curv.rho2, &cong.curv.valid));
    println!("Laplace equation     {:.2e}", check_laplace(&s31).residual);
    println!("Lie quadric          {:.2e}", hexa.quadric_residual());
    println!("projective match     {:.2e}", projective_match(&s31, &hexa));
    Ok(())
}
