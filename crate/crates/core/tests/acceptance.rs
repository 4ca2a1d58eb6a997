//! Acceptance criteria 1 to 11. Each criterion prints one PASS/FAIL line;
//! the target exits non-zero if any criterion is red. It runs without the
//! libtest harness so the lines are always printed.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;
use std::process::Command;

use flatnormal::catalog::{
    plane_wave_pair, spherical_cosines, spherical_rotation, PairSpec, PhiSpec, SphericalLame,
};
use flatnormal::construction::{
    assemble_w, build_frame, check_orthonormal, check_rank1, fundamental_forms, integrate_v, MatrixField, WField,
};
use flatnormal::euclid3::{build_surface, check_weingarten, lie_functional_phi, lie_functional_rho, SurfaceOptions};
use flatnormal::grid::{FieldN, Grid2D, GridN, ScalarField2D};
use flatnormal::highdim::{
    build_submanifold, check_rotation, Submanifold, cosine_residual, direction_cosines, flat_coords, phi_cosines, solve_lame,
    RotationCoeffs,
};
use flatnormal::linsys::{PhiField, SolutionPair};
use flatnormal::mvn::{cfl_bound, conserved_scale, evolve, relative_drift, Boundary, Flow, FlowState};
use flatnormal::projective::{
    moutard_solve, s22_surface, MoutardSet, SkewPotentials,
};
use flatnormal::ribaucour::{
    check_dr, check_laplace, hexa_from_congruence, pq_residual, projective_match, ribaucour_from_three, s31_surface,
    RibaucourConstants,
};
use flatnormal::verify::{
    codazzi_residual, extract_geometry, flat_normal_check, rotate_normals, weingarten_commutativity, Frame,
};

/// Second order: halving `h` divides the error by a factor in this band.
const ORDER2: (f64, f64) = (3.2, 4.8);
/// Fourth order in time: halving `dt` divides the defect by a factor in this band.
const ORDER4: (f64, f64) = (12.8, 19.2);
/// Thresholds the negative controls are measured against (the CLI defaults).
const FLAT_THRESHOLD: f64 = 1e-3;
const OFF_DIAGONAL_THRESHOLD: f64 = 1e-3;

fn in_band(r: f64, band: (f64, f64)) -> bool {
    r >= band.0 && r <= band.1
}

struct Tally {
    failed: Vec<usize>,
}

impl Tally {
    fn line(&mut self, id: usize, title: &str, checks: &[(String, bool)]) {
        let ok = checks.iter().all(|c| c.1);
        if !ok {
            self.failed.push(id);
        }
        let detail: Vec<String> =
            checks.iter().map(|(d, p)| format!("{d}{}", if *p { "" } else { " [x]" })).collect();
        println!("{} {id:>2} {title}: {}", if ok { "PASS" } else { "FAIL" }, detail.join("; "));
    }
}

fn c(desc: String, pass: bool) -> (String, bool) {
    (desc, pass)
}

fn square(n: usize) -> Grid2D {
    Grid2D::spanning(n, n, (0.0, 1.0), (0.0, 1.0)).unwrap()
}

fn solve_all(phi: &PhiField, specs: &[PairSpec]) -> Vec<SolutionPair> {
    specs.iter().map(|s| s.solve(phi).unwrap()).collect()
}

/// `φ ≡ π/4` with linear data: `s = a x + b y`, `κ = a x - b y + k0`.
fn linear_family(n: usize) -> (PhiField, Vec<SolutionPair>) {
    let phi = PhiField::new(ScalarField2D::constant(square(n), FRAC_PI_4)).unwrap();
    let specs = [PairSpec::linear(0.3, 0.3, 0.0), PairSpec::linear(0.15, -0.2, 0.06), PairSpec::linear(-0.1, 0.15, 0.2)];
    let pairs = solve_all(&phi, &specs);
    (phi, pairs)
}

/// Smooth non-polynomial angle with monotone data, frame on `S^{m+1}`.
fn smooth_family(n: usize) -> (PhiField, Vec<SolutionPair>) {
    let phi = PhiField::new(PhiSpec::SineXy { base: 0.7, amp: 0.3, slope: 0.1 }.sample(square(n))).unwrap();
    let specs =
        [PairSpec::monotone(0.3, 0.25, 0.0), PairSpec::monotone(0.15, -0.2, 0.1), PairSpec::monotone(-0.1, 0.15, 0.2)];
    let pairs = solve_all(&phi, &specs);
    (phi, pairs)
}

/// Angle and pairs of the Euclidean and sphere-congruence checks.
fn euclid_family(n: usize) -> (PhiField, Vec<SolutionPair>) {
    let phi = PhiField::new(PhiSpec::SineXy { base: 0.7, amp: 0.2, slope: 0.1 }.sample(square(n))).unwrap();
    let specs =
        [PairSpec::monotone(1.0, 1.0, 0.2), PairSpec::monotone(0.5, -0.8, 0.3), PairSpec::monotone(0.7, 0.4, 1.0)];
    let pairs = solve_all(&phi, &specs);
    (phi, pairs)
}

fn criterion_1(t: &mut Tally) {
    let mut checks = Vec::new();
    let (_, pairs) = linear_family(129);
    for m in 1..=3 {
        let e = check_orthonormal(&build_frame(&pairs[..m]).unwrap().2);
        checks.push(c(format!("m={m} |WtW-E|={e:.1e} <= 1e-8"), e <= 1e-8));
    }
    let e: Vec<f64> = [65, 129].iter().map(|&n| check_orthonormal(&build_frame(&smooth_family(n).1).unwrap().2)).collect();
    let r = e[0] / e[1];
    checks.push(c(format!("smooth phi ratio {r:.2} in {ORDER2:?}"), in_band(r, ORDER2)));
    t.line(1, "orthonormality of W", &checks);
}

fn criterion_2(t: &mut Tally) {
    let reps: Vec<_> = [65, 129].iter().map(|&n| check_rank1(&build_frame(&smooth_family(n).1).unwrap().2)).collect();
    let fine = reps[1].ratio_x.max(reps[1].ratio_y);
    let (rx, ry) = (reps[0].ratio_x / reps[1].ratio_x, reps[0].ratio_y / reps[1].ratio_y);
    t.line(
        2,
        "rank one of dW",
        &[
            c(format!("s2/s1={fine:.1e} <= 1e-4 on 129^2"), fine <= 1e-4),
            c(format!("ratios x {rx:.2}, y {ry:.2} in {ORDER2:?}"), in_band(rx, ORDER2) && in_band(ry, ORDER2)),
        ],
    );
}

fn criterion_3(t: &mut Tally) {
    let (phi, pairs) = linear_family(129);
    let (u, v, w) = build_frame(&pairs).unwrap();
    let f = fundamental_forms(&w, &u, &v, &phi).unwrap();
    let (mixed, gap) = (f.max_mixed(), f.max_discrepancy());
    let m: Vec<f64> = [65, 129]
        .iter()
        .map(|&n| {
            let (phi, pairs) = smooth_family(n);
            let (u, v, w) = build_frame(&pairs).unwrap();
            fundamental_forms(&w, &u, &v, &phi).unwrap().max_mixed()
        })
        .collect();
    let r = m[0] / m[1];
    t.line(
        3,
        "curvature-line diagonality",
        &[
            c(format!("|M|={mixed:.1e} <= 1e-4 on 129^2"), mixed <= 1e-4),
            c(format!("FD vs closed forms {gap:.1e} <= 1e-4"), gap <= 1e-4),
            c(format!("smooth phi ratio {r:.2} in {ORDER2:?}"), in_band(r, ORDER2)),
        ],
    );
}

fn criterion_4(t: &mut Tally) {
    let mut checks = Vec::new();
    let mut res = Vec::new();
    for n in [65, 129] {
        let (phi, p) = euclid_family(n);
        let (s, curv) = build_surface(&p[0], &p[1], &phi, &SurfaceOptions::default()).unwrap();
        if n == 129 {
            let d = s.normal_defect();
            checks.push(c(format!("||n|-1|={d:.1e} <= 1e-12"), d <= 1e-12));
        }
        let w = check_weingarten(&s, &curv);
        res.push((w.residual_x, w.residual_y));
    }
    let (rx, ry) = (res[0].0 / res[1].0, res[0].1 / res[1].1);
    checks.push(c(format!("Weingarten ratios {rx:.2}, {ry:.2} in {ORDER2:?}"), in_band(rx, ORDER2) && in_band(ry, ORDER2)));

    let g = square(33);
    let phi = PhiField::new(ScalarField2D::constant(g, FRAC_PI_4)).unwrap();
    let p = PairSpec::linear(1.0, 1.0, 0.0).solve(&phi).unwrap();
    let (s, curv) = build_surface(&p, &p, &phi, &SurfaceOptions::default()).unwrap();
    let (mut rho, mut center): (f64, f64) = (0.0, 0.0);
    for k in 0..g.len() {
        let (r, nn) = (s.point(k), s.normal(k));
        for (rr, q) in [&curv.rho1, &curv.rho2].iter().map(|f| f.values()[k]).zip([0, 1]) {
            let _ = q;
            rho = rho.max((rr - 0.5).abs());
            let ctr = [r[0] - rr * nn[0], r[1] - rr * nn[1], r[2] - rr * nn[2]];
            center = center.max(ctr[0].abs()).max(ctr[1].abs()).max((ctr[2] + 0.5).abs());
        }
    }
    checks.push(c(format!("sphere |rho-0.5|={rho:.1e}, center gap {center:.1e} <= 1e-8"), rho <= 1e-8 && center <= 1e-8));
    t.line(4, "surfaces in E3", &checks);
}

fn criterion_5(t: &mut Tally) {
    let n = 129;
    let g = Grid2D::spanning(n, n, (0.0, 2.0 * PI), (0.0, 2.0 * PI)).unwrap();
    let (base, amp) = (FRAC_PI_4, 0.3);
    let phi = PhiField::new(PhiSpec::PlaneWave { base, amp }.sample(g)).unwrap();
    let pair = |c: f64| {
        let fp = plane_wave_pair(g, base, amp, c).unwrap();
        SolutionPair::new(fp.kappa, fp.s, &phi).unwrap()
    };
    let (p1, p2) = (pair(0.0), pair(0.5));
    let (_, curv) = build_surface(&p1, &p2, &phi, &SurfaceOptions::default()).unwrap();
    let lp = lie_functional_phi(phi.field());
    let (desc, ok) = match lie_functional_rho(&curv) {
        Ok(lr) => {
            let rel = (lr - lp).abs() / lp.abs();
            (format!("|lie_rho-lie_phi|/|lie_phi|={rel:.1e} <= 1e-3 (umbilics {})", curv.umbilic_count()), rel <= 1e-3)
        }
        Err(e) => (format!("functional undefined: {e}"), false),
    };
    t.line(5, "Lie functional identity", &[c(desc, ok)]);
}

fn criterion_6(t: &mut Tally) {
    let consts = RibaucourConstants { c31: 3.0, c32: -1.0, a0: 0.0 };
    let mut pq = Vec::new();
    let mut dr = Vec::new();
    let mut lap = Vec::new();
    let mut checks = Vec::new();
    for n in [65, 129] {
        let (phi, p) = euclid_family(n);
        let cong = ribaucour_from_three(&p[0], &p[1], &p[2], &phi, &consts, &SurfaceOptions::default()).unwrap();
        let (a, b) = pq_residual(&cong);
        pq.push(a.max(b));
        dr.push(check_dr(&cong.radius, &cong.curv.rho1, &cong.curv.rho2, &cong.curv.valid));
        let s31 = s31_surface(&p[0], &p[1], &p[2], &phi, &consts).unwrap();
        lap.push(check_laplace(&s31).residual);
        if n == 129 {
            let hexa = hexa_from_congruence(&cong);
            let (qh, qs) = (hexa.quadric_residual(), s31.quadric_residual());
            checks.push(c(format!("quadrics {qh:.1e}, {qs:.1e} <= 1e-12"), qh <= 1e-12 && qs <= 1e-12));
            let pm = projective_match(&s31, &hexa);
            checks.push(c(format!("z-list vs hexaspherical {pm:.1e} <= 1e-6"), pm <= 1e-6));
        }
    }
    for (name, v) in [("PQ", &pq), ("dR", &dr), ("Laplace", &lap)] {
        let r = v[0] / v[1];
        checks.push(c(format!("{name} ratio {r:.2} in {ORDER2:?}"), in_band(r, ORDER2)));
    }
    t.line(6, "Ribaucour congruence", &checks);
}

fn poly_set(n: usize) -> MoutardSet {
    let g = square(n);
    let q = ScalarField2D::zeros(g);
    let (xs, ys) = (g.x_coords(), g.y_coords());
    let one = vec![1.0; n];
    let data = [
        (one.clone(), one.clone()),
        (xs.clone(), vec![0.0; n]),
        (vec![0.0; n], ys.clone()),
        (xs.iter().map(|x| 1.0 + x).collect(), ys.iter().map(|y| 1.0 + y).collect()),
    ];
    MoutardSet::solve(q, data).unwrap()
}

fn criterion_7(t: &mut Tally) {
    let mut checks = Vec::new();
    let set = poly_set(17);
    let s = SkewPotentials::new(&set).unwrap();
    let g = square(17);
    let mut hand: f64 = 0.0;
    for k in 0..g.len() {
        let (x, y) = g.coords(k);
        hand = hand
            .max((s.at(0, 1, k) + x).abs())
            .max((s.at(1, 2, k) - x * y).abs())
            .max((s.at(2, 0, k) + y).abs());
    }
    let lel = flatnormal::projective::lelieuvre(&set, &s);
    let rx = lel.r.map(|f| f.diff(flatnormal::Axis::X));
    for k in 0..g.len() {
        let (_, y) = g.coords(k);
        hand = hand.max((rx[0].values()[k] - y).abs()).max(rx[1].values()[k].abs()).max((rx[2].values()[k] + 1.0).abs());
    }
    checks.push(c(format!("hand values {hand:.1e} <= 1e-12"), hand <= 1e-12));

    let n = 257;
    let g = square(n);
    let xi = moutard_solve(&ScalarField2D::constant(g, 1.0), &vec![1.0; n], &vec![1.0; n]).unwrap();
    let series: f64 = (0..20)
        .map(|k| {
            let f: f64 = (1..=k).map(|i| i as f64).product();
            1.0 / (f * f)
        })
        .sum();
    let gap = (xi.at(n - 1, n - 1) - series).abs();
    checks.push(c(format!("Q=1 at (1,1) {:.7} vs series {series:.7}, gap {gap:.1e} <= 1e-6", xi.at(n - 1, n - 1)), gap <= 1e-6));

    let set = poly_set(33);
    let s22 = s22_surface(&set, &SkewPotentials::new(&set).unwrap()).unwrap();
    checks.push(c(format!("Pluecker quadric {:.1e} <= 1e-12", s22.pluecker_residual), s22.pluecker_residual <= 1e-12));
    checks.push(c(
        format!("p-list vs pluecker(r, r~) {:.1e} <= 1e-10 ({} degenerate)", s22.match_residual, s22.degenerate),
        s22.match_residual <= 1e-10,
    ));
    t.line(7, "W-congruences and Pluecker", &checks);
}

fn spherical_case(n: usize) -> ([f64; 6], Submanifold) {
    let g = GridN::spanning(&[n, n, n], &[(1.0, 1.4), (0.8, 1.2), (0.0, 0.4)]).unwrap();
    let beta = spherical_rotation(&g);
    let rot = check_rotation(&beta);
    let frame = direction_cosines(&beta, &spherical_cosines(&g.point(0))).unwrap();
    let (mut lame, mut flat, mut metric): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut flats = Vec::new();
    for (l, base) in [
        (SphericalLame::default(), [0.1, 0.2, 0.3]),
        (SphericalLame { a: 0.5, b: 0.3, c: 0.2 }, [-0.2, 0.1, 0.0]),
    ] {
        let sol = solve_lame(&beta, &l.axis_data(&g)).unwrap();
        lame = lame.max(sol.residual);
        let fc = flat_coords(&frame, &sol, &base).unwrap();
        flat = flat.max(fc.closedness);
        metric = metric.max(fc.metric_residual);
        flats.push(fc);
    }
    let res = [rot.first, rot.second, lame, cosine_residual(&beta, &frame), flat, metric];
    (res, build_submanifold(&flats).unwrap())
}

fn criterion_8(t: &mut Tally) {
    let mut checks = Vec::new();
    let g2 = square(33);
    let phi = ScalarField2D::constant(g2, FRAC_PI_4);
    let beta = RotationCoeffs::from_phi(&phi);
    let frame = direction_cosines(&beta, &phi_cosines(FRAC_PI_4)).unwrap();
    let shifted = PhiField::new(phi.map(|p| p - std::f64::consts::FRAC_PI_2)).unwrap();
    let (xs, ys) = (g2.x_coords(), g2.y_coords());
    let (mut flats, mut pairs) = (Vec::new(), Vec::new());
    let mut gap: f64 = 0.0;
    for (a1, b1, a2, b2) in [(1.0, 0.3, 0.5, -0.2), (0.2, 0.1, 1.0, 0.4)] {
        let h = [xs.iter().map(|x| a1 + b1 * x).collect(), ys.iter().map(|y| a2 + b2 * y).collect()];
        let flat = flat_coords(&frame, &solve_lame(&beta, &h).unwrap(), &[0.0, 0.0]).unwrap();
        let (s1, s2) = (flat.s[0].to_2d().unwrap(), flat.s[1].to_2d().unwrap());
        let p = flatnormal::linsys::solve_pair(&shifted, &s2.x_axis(), &s2.y_axis(), s1.values()[0]).unwrap();
        gap = gap.max(p.kappa.max_abs_diff(&s1)).max(p.s.max_abs_diff(&s2));
        pairs.push(p);
        flats.push(flat);
    }
    let sub = build_submanifold(&flats).unwrap();
    let w = build_frame(&pairs).unwrap().2;
    for k in 0..g2.len() {
        gap = gap.max((sub.w_node(k) - w.node(k)).amax());
    }
    checks.push(c(format!("n=2 vs construction {gap:.1e} <= 1e-10"), gap <= 1e-10));

    let (a, b) = (spherical_case(17).0, spherical_case(33).0);
    let names = ["rotation (first)", "rotation (second)", "Lame", "cosines", "flat coordinates", "metric"];
    for i in 0..6 {
        let r = a[i] / b[i];
        checks.push(c(format!("{} ratio {r:.2} in {ORDER2:?}", names[i]), in_band(r, ORDER2)));
    }
    t.line(8, "orthogonal coordinates, n = 3", &checks);
}

fn periodic(n: usize) -> Grid2D {
    Grid2D::periodic(n, n, 0.0, 0.0, 2.0 * PI, 2.0 * PI).unwrap()
}

fn criterion_9(t: &mut Tally) {
    let mut checks = Vec::new();
    let g = periodic(16);
    let dt = cfl_bound(&g, 0.1);
    let mut fixed: f64 = 0.0;
    for b in [Boundary::Frozen, Boundary::Periodic] {
        let st = FlowState::new(ScalarField2D::constant(g, 0.6), vec![], b).unwrap();
        for flow in [Flow::T, Flow::Tau, Flow::Mvn] {
            let end = evolve(&st, dt, 100, flow, 0.1, |_, _| Ok(())).unwrap();
            fixed = fixed.max(end.phi.max_abs_diff(&st.phi));
        }
    }
    checks.push(c(format!("constant phi moves by {fixed:.1e} <= 1e-14"), fixed <= 1e-14));

    let phi = PhiSpec::ProductSine { base: FRAC_PI_4, amp: 0.01, kx: 1.0, ky: 1.0 }.sample(g);
    let st = FlowState::new(phi, vec![], Boundary::Periodic).unwrap();
    let (c0, scale) = (st.conserved(), conserved_scale(&st.phi, Boundary::Periodic));
    let mut drift: f64 = 0.0;
    evolve(&st, dt, 100, Flow::Mvn, 0.1, |_, s| {
        drift = drift.max(relative_drift(c0, s.conserved(), scale));
        Ok(())
    })
    .unwrap();
    checks.push(c(format!("conserved drift {drift:.1e} <= 1e-6 over 100 steps"), drift <= 1e-6));

    let phi = ScalarField2D::from_fn(g, |x, y| FRAC_PI_4 + 0.3 * x.sin() * y.sin() + 0.15 * (x + 2.0 * y).cos());
    let st = FlowState::new(phi, vec![], Boundary::Periodic).unwrap();
    let run = |h: f64, k: usize| evolve(&st, h, k, Flow::Mvn, 0.1, |_, _| Ok(())).unwrap().phi;
    let (a, b, cc) = (run(dt, 1), run(dt / 2.0, 2), run(dt / 4.0, 4));
    let r = a.max_abs_diff(&b) / b.max_abs_diff(&cc);
    checks.push(c(format!("one-step defect ratio {r:.2} in {ORDER4:?}"), in_band(r, ORDER4)));

    let g = periodic(32);
    let dt = cfl_bound(&g, 0.1);
    let phi = PhiSpec::PlaneWave { base: FRAC_PI_4, amp: 0.3 }.sample(g);
    let pairs = vec![plane_wave_pair(g, FRAC_PI_4, 0.3, 0.0).unwrap(), plane_wave_pair(g, FRAC_PI_4, 0.3, 0.5).unwrap()];
    let st = FlowState::new(phi, pairs, Boundary::Periodic).unwrap();
    let r0 = st.pair_residuals();
    let mut growth: f64 = 0.0;
    for flow in [Flow::T, Flow::Tau, Flow::Mvn] {
        evolve(&st, dt, 100, flow, 0.1, |_, s| {
            for (a, b) in s.pair_residuals().iter().zip(&r0) {
                growth = growth.max(a / b);
            }
            Ok(())
        })
        .unwrap();
    }
    checks.push(c(format!("co-evolved residual growth {growth:.2} <= 10"), growth <= 10.0));
    t.line(9, "mVN flows", &checks);
}

/// The `φ ≡ π/4` linear family written in `x' = x`, `y' = x + y`, which are
/// not curvature-line coordinates.
fn sheared_frame(n: usize) -> WField {
    let g = square(n);
    let data = [(0.3, 0.3, 0.0), (0.15, -0.2, 0.06)];
    let mut entries = Vec::new();
    for &(a, b, k0) in &data {
        entries.push(ScalarField2D::from_fn(g, |xp, yp| a * xp - b * (yp - xp) + k0));
    }
    for &(a, b, _) in &data {
        entries.push(ScalarField2D::from_fn(g, |xp, yp| a * xp + b * (yp - xp)));
    }
    let u = MatrixField::new(2, data.len(), entries).unwrap();
    assemble_w(&u, &integrate_v(&u).unwrap()).unwrap()
}

fn criterion_10(t: &mut Tally) {
    let mut checks = Vec::new();
    let mut gauss = |name: &str, sizes: [usize; 2], f: &dyn Fn(usize) -> Frame| {
        let v: Vec<f64> = sizes.iter().map(|&n| codazzi_residual(&extract_geometry(&f(n)).unwrap()).gauss).collect();
        let r = v[0] / v[1];
        checks.push(c(format!("{name} Gauss ratio {r:.2} in {ORDER2:?}"), in_band(r, ORDER2)));
    };
    for m in 1..=3 {
        gauss(&format!("S^{}", m + 1), [65, 129], &|n| Frame::from_wfield(&build_frame(&smooth_family(n).1[..m]).unwrap().2));
    }
    gauss("triply orthogonal", [33, 65], &|n| Frame::from_submanifold(&spherical_case(n).1));
    gauss("E3", [65, 129], &|n| {
        let (phi, p) = euclid_family(n);
        Frame::from_surface3(&build_surface(&p[0], &p[1], &phi, &SurfaceOptions::default()).unwrap().0)
    });

    let base = Frame::from_wfield(&build_frame(&smooth_family(65).1).unwrap().2);
    let mut corrupted = base.clone();
    let mut nrm = base.normals()[1].clone();
    nrm[0] = nrm[0].zip_map(&FieldN::from_fn(base.grid(), |u| 0.05 * (3.0 * u[0]).sin() * (2.0 * u[1]).cos()), |a, b| a + b);
    corrupted.set_normal(1, nrm).unwrap();
    let v = flat_normal_check(&corrupted);
    checks.push(c(format!("corrupted frame flat residual {v:.1e} >= 10 x {FLAT_THRESHOLD:.0e}"), v >= 10.0 * FLAT_THRESHOLD));
    let rotated = rotate_normals(&base, 1, 2, |u| 0.5 * u[0]).unwrap();
    let v = flat_normal_check(&rotated);
    checks.push(c(format!("rotated normals flat residual {v:.1e} >= 10 x {FLAT_THRESHOLD:.0e}"), v >= 10.0 * FLAT_THRESHOLD));
    let sheared = Frame::from_wfield(&sheared_frame(65));
    let v = weingarten_commutativity(&sheared).off_diagonal;
    checks.push(c(
        format!("sheared chart off-diagonal {v:.1e} >= 10 x {OFF_DIAGONAL_THRESHOLD:.0e}"),
        v >= 10.0 * OFF_DIAGONAL_THRESHOLD,
    ));
    t.line(10, "verification checks", &checks);
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn criterion_11(t: &mut Tally) {
    let bin = env!("CARGO_BIN_EXE_flatnb");
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let mut checks = Vec::new();
    for (cmd, cfg) in [
        ("solve", "solve.json"),
        ("surface", "surface.json"),
        ("surface3", "surface3.json"),
        ("ribaucour", "ribaucour.json"),
        ("wcongruence", "wcongruence.json"),
        ("highdim", "highdim.json"),
        ("evolve", "evolve.json"),
        ("verify", "verify.json"),
    ] {
        let run = |tag: &str| {
            let out = tmp.path().join(format!("{cmd}-{tag}"));
            let status = Command::new(bin)
                .args([cmd, "--config"])
                .arg(configs.join(cfg))
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap()
                .status;
            let mut files: Vec<(String, Vec<u8>)> = walk(&out)
                .into_iter()
                .map(|p| (p.strip_prefix(&out).unwrap().display().to_string(), std::fs::read(&p).unwrap()))
                .collect();
            files.sort();
            (status.code(), std::fs::read(out.join("report.json")).unwrap_or_default(), files)
        };
        let (a, b) = (run("a"), run("b"));
        let same = a == b && !a.1.is_empty();
        checks.push(c(format!("{cmd} exit {:?}, {} files identical={same}", a.0, a.2.len()), same));
    }
    t.line(11, "deterministic reports", &checks);
}

fn main() {
    let mut t = Tally { failed: Vec::new() };
    criterion_1(&mut t);
    criterion_2(&mut t);
    criterion_3(&mut t);
    criterion_4(&mut t);
    criterion_5(&mut t);
    criterion_6(&mut t);
    criterion_7(&mut t);
    criterion_8(&mut t);
    criterion_9(&mut t);
    criterion_10(&mut t);
    criterion_11(&mut t);
    if !t.failed.is_empty() {
        eprintln!("criteria failing: {:?}", t.failed);
        std::process::exit(1);
    }
}
