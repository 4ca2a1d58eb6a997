//! Evolves a small periodic perturbation of pi/4 and tracks the conserved
//! functional under each flow.

use std::f64::consts::{FRAC_PI_4, PI};

use flatnormal::catalog::PhiSpec;
use flatnormal::grid::Grid2D;
use flatnormal::mvn::{cfl_bound, conserved_scale, evolve, relative_drift, Boundary, Flow, FlowState};

fn main() -> flatnormal::Result<()> {
    let g = Grid2D::periodic(16, 16, 0.0, 0.0, 2.0 * PI, 2.0 * PI)?;
    let phi = PhiSpec::ProductSine { base: FRAC_PI_4, amp: 0.01, kx: 1.0, ky: 1.0 }.sample(g);
    let st = FlowState::new(phi, vec![], Boundary::Periodic)?;
    let dt = cfl_bound(&g, 0.1);
    let (c0, scale) = (st.conserved(), conserved_scale(&st.phi, Boundary::Periodic));
    for flow in [Flow::T, Flow::Tau, Flow::Mvn] {
        let end = evolve(&st, dt, 100, flow, 0.1, |step, s| {
            if step % 25 == 0 {
                println!("{flow:>4} step {step:>3} t={:.3e} drift {:.2e}", s.t, relative_drift(c0, s.conserved(), scale));
            }
            Ok(())
        })?;
        println!("{flow:>4} moved phi by {:.2e}", end.phi.max_abs_diff(&st.phi));
    }
    Ok(())
}
