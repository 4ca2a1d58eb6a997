//! Frame on the sphere built from three pairs, with its orthonormality,
//! rank and curvature-line checks. Writes the stereographic image as OBJ.

use flatnormal::catalog::{PairSpec, PhiSpec};
use flatnormal::construction::{build_frame, check_orthonormal, check_rank1, fundamental_forms, stereographic};
use flatnormal::grid::{Grid2D, ScalarField2D};
use flatnormal::io::write_obj;
use flatnormal::linsys::PhiField;

fn main() -> flatnormal::Result<()> {
    let g = Grid2D::spanning(65, 65, (0.0, 1.0), (0.0, 1.0))?;
    let phi = PhiField::new(PhiSpec::SineXy { base: 0.7, amp: 0.3, slope: 0.1 }.sample(g))?;
    let pairs = [PairSpec::monotone(0.3, 0.25, 0.0), PairSpec::monotone(0.15, -0.2, 0.1)]
        .iter()
        .map(|s| s.solve(&phi))
        .collect::<flatnormal::Result<Vec<_>>>()?;
    let (u, v, w) = build_frame(&pairs)?;
    let rank = check_rank1(&w);
    let forms = fundamental_forms(&w, &u, &v, &phi)?;
    println!("|W^T W - E|      {:.2e}", check_orthonormal(&w));
    println!("rank ratios      {:.2e} {:.2e}", rank.ratio_x, rank.ratio_y);
    println!("mixed form |M|   {:.2e}", forms.max_mixed());

    let path = std::env::temp_dir().join("sphere_surface.obj");
    // the first column of W is the point on S^3
    let proj = (0..g.len())
        .map(|k| stereographic(&w.node(k).column(0).iter().copied().collect::<Vec<_>>()))
        .collect::<flatnormal::Result<Vec<_>>>()?;
    let coord = |c: usize| ScalarField2D::from_values(g, proj.iter().map(|p| p[c]).collect());
    let mesh = [coord(0)?, coord(1)?, coord(2)?];
    write_obj(&path, [&mesh[0], &mesh[1], &mesh[2]])?;
    println!("wrote {}", path.display());
    Ok(())
}
