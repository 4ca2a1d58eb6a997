//! W-congruence from four solutions of xi_xy = 0 with polynomial data,
//! where every potential has a closed form.

use flatnormal::grid::{Grid2D, ScalarField2D};
use flatnormal::projective::{lelieuvre, s22_surface, MoutardSet, SkewPotentials};

fn main() -> flatnormal::Result<()> {
    let n = 33;
    let g = Grid2D::spanning(n, n, (0.0, 1.0), (0.0, 1.0))?;
    let (xs, ys) = (g.x_coords(), g.y_coords());
    let data = [
        (vec![1.0; n], vec![1.0; n]),
        (xs.clone(), vec![0.0; n]),
        (vec![0.0; n], ys.clone()),
        (xs.iter().map(|x| 1.0 + x).collect(), ys.iter().map(|y| 1.0 + y).collect()),
    ];
    let set = MoutardSet::solve(ScalarField2D::zeros(g), data)?;
    let s = SkewPotentials::new(&set)?;
    let k = g.len() - 1;
    println!("at (1,1): S12 = {:.6}, S23 = {:.6}, S31 = {:.6}", s.at(0, 1, k), s.at(1, 2, k), s.at(2, 0, k));
    let r = lelieuvre(&set, &s).r;
    println!("focal point r(1,1) = ({:.4}, {:.4}, {:.4})", r[0].values()[k], r[1].values()[k], r[2].values()[k]);
    let s22 = s22_surface(&set, &s)?;
    println!("Pluecker quadric {:.1e}, match {:.1e}, degenerate lines {}", s22.pluecker_residual, s22.match_residual, s22.degenerate);
    Ok(())
}
