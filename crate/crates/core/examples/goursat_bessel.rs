//! Goursat problem for xi_xy = Q xi with Q = 1 and unit data on both axes.
//! The exact value at (1, 1) is the sum of 1/(k!)^2.

use flatnormal::grid::{Grid2D, ScalarField2D};
use flatnormal::projective::moutard_solve;

fn main() -> flatnormal::Result<()> {
    let exact: f64 = (0..20)
        .map(|k| {
            let f: f64 = (1..=k).map(|i| i as f64).product();
            1.0 / (f * f)
        })
        .sum();
    let mut prev = None;
    for n in [33, 65, 129, 257] {
        let g = Grid2D::spanning(n, n, (0.0, 1.0), (0.0, 1.0))?;
        let xi = moutard_solve(&ScalarField2D::constant(g, 1.0), &vec![1.0; n], &vec![1.0; n])?;
        let err = (xi.at(n - 1, n - 1) - exact).abs();
        match prev {
            Some(p) => println!("n={n:>4} error {err:.3e} ratio {:.2}", p / err),
            None => println!("n={n:>4} error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
