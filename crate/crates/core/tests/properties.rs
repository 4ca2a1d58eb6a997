use proptest::prelude::*;

use flatnormal::catalog::PairSpec;
use flatnormal::construction::{build_frame, check_orthonormal};
use flatnormal::grid::{Grid2D, ScalarField2D};
use flatnormal::io::{frame_from_csv, frame_to_csv};
use flatnormal::linsys::{residual, PhiField};
use flatnormal::verify::Frame;

fn grid(n: usize) -> Grid2D {
    Grid2D::spanning(n, n, (0.0, 1.0), (0.0, 1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Linear data on a constant angle is reproduced exactly by the box scheme,
    // so the frame is orthonormal to round-off for any slopes.
    #[test]
    fn constant_angle_frames_are_orthonormal(
        phi0 in 0.2f64..1.3,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        k0 in -0.5f64..0.5,
    ) {
        let phi = PhiField::new(ScalarField2D::constant(grid(17), phi0)).unwrap();
        let p = PairSpec::linear(a, b, k0).solve(&phi).unwrap();
        let (rx, ry) = residual(&p, &phi);
        prop_assert!(rx.max(ry) < 1e-10);
        if let Ok((_, _, w)) = build_frame(&[p]) {
            prop_assert!(check_orthonormal(&w) < 1e-10);
        }
    }

    #[test]
    fn field_csv_round_trip(vals in prop::collection::vec(-1e3f64..1e3, 25)) {
        let f = ScalarField2D::from_values(grid(5), vals).unwrap();
        let back = ScalarField2D::from_csv(&f.to_csv()).unwrap();
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn frame_csv_round_trip(a in 0.1f64..1.0, b in -1.0f64..-0.1) {
        let phi = PhiField::new(ScalarField2D::constant(grid(9), 0.7)).unwrap();
        let pairs = [PairSpec::linear(a, b, 0.1).solve(&phi).unwrap(), PairSpec::linear(b, a, -0.2).solve(&phi).unwrap()];
        let frame = Frame::from_wfield(&build_frame(&pairs).unwrap().2);
        let text = frame_to_csv(&frame).unwrap();
        prop_assert_eq!(frame_to_csv(&frame_from_csv(&text).unwrap()).unwrap(), text);
    }
}
