//! Solves the characteristic system for one pair on a smooth angle and
//! prints the discrete residual at a few resolutions.

use flatnormal::catalog::{PairSpec, PhiSpec};
use flatnormal::grid::Grid2D;
use flatnormal::linsys::{residual, PhiField};

fn main() -> flatnormal::Result<()> {
    let spec = PhiSpec::SineXy { base: 0.7, amp: 0.3, slope: 0.1 };
    let pair = PairSpec::monotone(0.3, 0.25, 0.0);
    println!("{:>5} {:>12} {:>12}", "n", "res_x", "res_y");
    for n in [17, 33, 65, 129] {
        let phi = PhiField::new(spec.sample(Grid2D::spanning(n, n, (0.0, 1.0), (0.0, 1.0))?))?;
        let p = pair.solve(&phi)?;
        let (rx, ry) = residual(&p, &phi);
        println!("{n:>5} {rx:>12.3e} {ry:>12.3e}");
    }
    Ok(())
}
