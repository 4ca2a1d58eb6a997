use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::{Control, FrameSource, RunConfig};
use crate::catalog::{plane_wave_pair, spherical_cosines, spherical_rotation, PhiSpec};
use crate::construction::{build_frame, check_orthonormal, check_rank1, fundamental_forms, stereographic, v_symmetry_residual};
use crate::error::{Error, Result};
use crate::euclid3::{
    build_surface, check_weingarten, lie_functional_phi, lie_functional_rho, mixed_second_form, third_form_residual,
    SurfaceOptions,
};
use crate::grid::{FieldN, GridN, ScalarField2D};
use crate::highdim::{build_submanifold, check_rotation, cosine_residual, direction_cosines, flat_coords, solve_lame};
use crate::io::{frame_from_csv, frame_to_csv, write_obj, Report};
use crate::linsys::{residual, PhiField, SolutionPair};
use crate::mvn::{cfl_bound, conserved_scale, evolve, relative_drift, Boundary, FlowPair, FlowState};
use crate::projective::{asymptotic_residual, lelieuvre, s22_surface, tangency_residual, w_congruence, MoutardSet, SkewPotentials};
use crate::ribaucour::{check_dr, check_laplace, hexa_from_congruence, pq_residual, projective_match, ribaucour_from_three, s31_surface, RibaucourConstants};
use crate::verify::{
    codazzi_residual, extract_geometry, flat_normal_check, rotate_normals, weingarten_commutativity, Frame,
};

/// Command-line overrides applied on top of a [`RunConfig`].
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol_scale: Option<f64>,
    pub grid: Option<(usize, usize)>,
    pub flow: Option<String>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub checkpoint_every: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some((nx, ny)) = self.grid {
            let g = cfg.grid.as_mut().ok_or_else(|| Error::Config("--grid needs a grid section".into()))?;
            g.nx = nx;
            g.ny = ny;
        }
        if let Some(f) = &self.flow {
            f.parse::<crate::mvn::Flow>()?;
            cfg.evolve.flow = f.clone();
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::Config("--dt must be positive".into()));
            }
            cfg.evolve.dt = Some(dt);
        }
        if let Some(s) = self.steps {
            cfg.evolve.steps = s;
        }
        if let Some(c) = self.checkpoint_every {
            cfg.evolve.checkpoint_every = c;
        }
        if self.tol_scale.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::Config("--tol-scale must be positive".into()));
        }
        Ok(())
    }
}

/// What one command needs besides its config.
pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub out: PathBuf,
    pub tol_scale: f64,
}

impl Ctx<'_> {
    fn thr(&self, name: &str, default: f64) -> f64 {
        self.cfg.threshold(name, default, self.tol_scale)
    }

    fn check(&self, r: &mut Report, name: &str, value: f64, default: f64) {
        r.check(name, value, self.thr(name, default));
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        std::fs::write(self.path(name), text)?;
        Ok(())
    }

    fn phi(&self) -> Result<PhiField> {
        PhiField::new(self.cfg.phi()?)
    }

    fn pairs(&self, phi: &PhiField, need: usize) -> Result<Vec<SolutionPair>> {
        if self.cfg.pairs.len() < need {
            return Err(Error::Config(format!("this command needs at least {need} pairs")));
        }
        self.cfg.pairs.iter().map(|p| p.solve(phi)).collect()
    }
}

pub fn solve(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("solve");
    let phi = ctx.phi()?;
    let pairs = ctx.pairs(&phi, 1)?;
    ctx.cfg.phi()?.write_csv(ctx.path("phi.csv"))?;
    let mut worst: f64 = 0.0;
    for (i, p) in pairs.iter().enumerate() {
        let (rx, ry) = residual(p, &phi);
        r.metric(&format!("pair{}_residual_x", i + 1), rx);
        r.metric(&format!("pair{}_residual_y", i + 1), ry);
        worst = worst.max(rx).max(ry);
        p.kappa.write_csv(ctx.path(&format!("kappa{}.csv", i + 1)))?;
        p.s.write_csv(ctx.path(&format!("s{}.csv", i + 1)))?;
    }
    ctx.check(&mut r, "rs_residual", worst, 1e-3);
    Ok(r)
}

fn frame_mesh(frame: &Frame) -> Option<[ScalarField2D; 3]> {
    let g = frame.grid().as_grid2d()?;
    let pos = frame.position();
    let proj: Vec<Vec<f64>> = match pos.len() {
        3 => (0..g.len()).map(|k| pos.iter().map(|f| f.values()[k]).collect()).collect(),
        4 => (0..g.len())
            .map(|k| {
                let p: Vec<f64> = pos.iter().map(|f| f.values()[k]).collect();
                stereographic(&p).unwrap_or_else(|_| vec![f64::NAN; 3])
            })
            .collect(),
        _ => return None,
    };
    Some(std::array::from_fn(|c| ScalarField2D::raw(g, proj.iter().map(|p| p[c]).collect())))
}

pub fn surface(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("surface");
    let phi = ctx.phi()?;
    let pairs = ctx.pairs(&phi, 1)?;
    let (u, v, w) = build_frame(&pairs)?;
    let m = pairs.len();
    r.metric("m", m);
    let rank = check_rank1(&w);
    let forms = fundamental_forms(&w, &u, &v, &phi)?;
    let frame = Frame::from_wfield(&w);
    let wein = weingarten_commutativity(&frame);
    r.metric("rank1_skipped", rank.skipped);
    r.metric("forms_discrepancy", forms.max_discrepancy());
    r.metric("weingarten_commutator", wein.commutator);
    ctx.check(&mut r, "orthonormality", check_orthonormal(&w), 1e-3);
    ctx.check(&mut r, "rank1_x", rank.ratio_x, 1e-3);
    ctx.check(&mut r, "rank1_y", rank.ratio_y, 1e-3);
    ctx.check(&mut r, "v_symmetry", v_symmetry_residual(&u, &v), 1e-3);
    ctx.check(&mut r, "mixed_form", forms.max_mixed(), 1e-3);
    ctx.check(&mut r, "flat_normal_check", flat_normal_check(&frame), 1e-3);
    ctx.check(&mut r, "weingarten_off_diagonal", wein.off_diagonal, 1e-3);
    ctx.write("frame.csv", &frame_to_csv(&frame)?)?;
    if let Some(mesh) = frame_mesh(&frame) {
        write_obj(ctx.path("surface.obj"), [&mesh[0], &mesh[1], &mesh[2]])?;
    }
    Ok(r)
}

fn surface_options(ctx: &Ctx) -> SurfaceOptions {
    let p = ctx.cfg.surface3;
    SurfaceOptions { a0: p.a0, max_masked_fraction: p.max_masked_fraction, umbilic_tol: p.umbilic_tol }
}

pub fn surface3(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("surface3");
    let phi = ctx.phi()?;
    let pairs = ctx.pairs(&phi, 2)?;
    let (s, curv) = build_surface(&pairs[0], &pairs[1], &phi, &surface_options(ctx))?;
    let wr = check_weingarten(&s, &curv);
    r.metric("umbilic_fraction", curv.umbilic_fraction());
    r.metric("masked", curv.masked_count());
    r.metric("lie_phi", lie_functional_phi(phi.field()));
    match lie_functional_rho(&curv) {
        Ok(v) => r.metric("lie_rho", v),
        Err(e) => r.metric("lie_rho", e.to_string()),
    }
    ctx.check(&mut r, "normal_defect", s.normal_defect(), 1e-12);
    ctx.check(&mut r, "weingarten_x", wr.residual_x, 1e-2);
    ctx.check(&mut r, "weingarten_y", wr.residual_y, 1e-2);
    ctx.check(&mut r, "mixed_second_form", mixed_second_form(&s), 1e-2);
    ctx.check(&mut r, "third_form", third_form_residual(&s, &pairs[0], &phi), 1e-2);
    write_obj(ctx.path("surface.obj"), [&s.r[0], &s.r[1], &s.r[2]])?;
    ctx.write("frame.csv", &frame_to_csv(&Frame::from_surface3(&s))?)?;
    curv.rho1.write_csv(ctx.path("rho1.csv"))?;
    curv.rho2.write_csv(ctx.path("rho2.csv"))?;
    Ok(r)
}

pub fn ribaucour(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("ribaucour");
    let p = ctx.cfg.ribaucour.ok_or_else(|| Error::Config("missing ribaucour section".into()))?;
    let consts = RibaucourConstants { c31: p.c31, c32: p.c32, a0: p.a0 };
    let phi = ctx.phi()?;
    let pairs = ctx.pairs(&phi, 3)?;
    let cong = ribaucour_from_three(&pairs[0], &pairs[1], &pairs[2], &phi, &consts, &surface_options(ctx))?;
    let hexa = hexa_from_congruence(&cong);
    let s31 = s31_surface(&pairs[0], &pairs[1], &pairs[2], &phi, &consts)?;
    let (px, py) = pq_residual(&cong);
    let lap = check_laplace(&s31);
    r.metric("laplace_masked", lap.masked);
    ctx.check(&mut r, "pq_x", px, 1e-2);
    ctx.check(&mut r, "pq_y", py, 1e-2);
    ctx.check(&mut r, "dr", check_dr(&cong.radius, &cong.curv.rho1, &cong.curv.rho2, &cong.curv.valid), 1e-1);
    ctx.check(&mut r, "hexaspherical_quadric", hexa.quadric_residual(), 1e-12);
    ctx.check(&mut r, "s31_quadric", s31.quadric_residual(), 1e-12);
    ctx.check(&mut r, "projective_match", projective_match(&s31, &hexa), 1e-6);
    ctx.check(&mut r, "laplace", lap.residual, 1e-2);
    write_obj(ctx.path("surface.obj"), [&cong.surface.r[0], &cong.surface.r[1], &cong.surface.r[2]])?;
    write_obj(ctx.path("centers.obj"), [&cong.centers[0], &cong.centers[1], &cong.centers[2]])?;
    cong.radius.write_csv(ctx.path("radius.csv"))?;
    Ok(r)
}

pub fn wcongruence(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("wcongruence");
    let p = ctx.cfg.wcongruence.as_ref().ok_or_else(|| Error::Config("missing wcongruence section".into()))?;
    let g = ctx.cfg.grid()?;
    let q = p.q.sample(g);
    let data = [0, 1, 2, 3].map(|i| p.xi[i].sample(&g));
    let data = [data[0].clone()?, data[1].clone()?, data[2].clone()?, data[3].clone()?];
    let set = MoutardSet::solve(q, data)?;
    let s = SkewPotentials::new(&set)?;
    let lel = lelieuvre(&set, &s);
    let (ax, ay) = asymptotic_residual(&set, &lel.r);
    let w = w_congruence(&set, &s)?;
    let s22 = s22_surface(&set, &s)?;
    r.metric("degenerate_lines", s22.degenerate);
    for (i, v) in set.residuals.iter().enumerate() {
        r.metric(&format!("moutard{}", i + 1), *v);
    }
    ctx.check(&mut r, "moutard", set.residuals.iter().cloned().fold(0.0, f64::max), 1e-2);
    ctx.check(&mut r, "lelieuvre", lel.residual_x.max(lel.residual_y), 1e-2);
    ctx.check(&mut r, "asymptotic", ax.max(ay), 1e-2);
    ctx.check(&mut r, "tangency", tangency_residual(&w, &lel.r), 1e-2);
    ctx.check(&mut r, "pluecker_quadric", s22.pluecker_residual, 1e-12);
    ctx.check(&mut r, "s22_quadric", s22.quadric_residual, 1e-12);
    ctx.check(&mut r, "pluecker_match", s22.match_residual, 1e-10);
    write_obj(ctx.path("focal1.obj"), [&lel.r[0], &lel.r[1], &lel.r[2]])?;
    let rt = w.r_tilde_affine();
    write_obj(ctx.path("focal2.obj"), [&rt[0], &rt[1], &rt[2]])?;
    Ok(r)
}

pub fn highdim(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("highdim");
    let p = ctx.cfg.highdim.as_ref().ok_or_else(|| Error::Config("missing highdim section".into()))?;
    let g = GridN::spanning(&p.shape, &p.bounds.map(|b| (b[0], b[1])))?;
    let beta = spherical_rotation(&g);
    let rot = check_rotation(&beta);
    let frame = direction_cosines(&beta, &spherical_cosines(&g.point(0)))?;
    let mut flats = Vec::new();
    let (mut lame, mut flat, mut metric, mut lame_err): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (l, base) in p.lame.iter().zip(&p.base) {
        let sol = solve_lame(&beta, &l.axis_data(&g))?;
        for (a, h) in sol.h.iter().enumerate() {
            let exact = FieldN::from_fn(&g, |u| l.exact(u)[a]);
            lame_err = lame_err.max(h.max_abs_diff(&exact));
        }
        lame = lame.max(sol.residual);
        let fc = flat_coords(&frame, &sol, base)?;
        flat = flat.max(fc.closedness);
        metric = metric.max(fc.metric_residual);
        flats.push(fc);
    }
    let sub = build_submanifold(&flats)?;
    r.metric("lame_error", lame_err);
    r.metric("orthogonality_drift", frame.orthogonality_drift);
    r.metric("v_symmetry", sub.v_symmetry_residual());
    ctx.check(&mut r, "rotation_first", rot.first, 1e-3);
    ctx.check(&mut r, "rotation_second", rot.second, 1e-3);
    ctx.check(&mut r, "lame", lame, 1e-3);
    ctx.check(&mut r, "cosines", cosine_residual(&beta, &frame), 1e-3);
    ctx.check(&mut r, "flat_closedness", flat, 1e-3);
    ctx.check(&mut r, "metric", metric, 1e-2);
    ctx.check(&mut r, "orthonormality", sub.orthonormal_residual(), 1e-3);
    for (d, v) in sub.rank1_ratios().iter().enumerate() {
        ctx.check(&mut r, &format!("rank1_{}", d + 1), *v, 1e-3);
    }
    let fr = Frame::from_submanifold(&sub);
    let w1: Vec<String> = (0..fr.position().len()).map(|i| format!("w{}_1", i + 1)).collect();
    let mut text = String::from("r,theta,phi");
    for n in &w1 {
        text.push(',');
        text.push_str(n);
    }
    text.push('\n');
    for k in 0..g.len() {
        let u = g.point(k);
        text.push_str(&format!("{},{},{}", u[0], u[1], u[2]));
        for f in fr.position() {
            text.push_str(&format!(",{}", f.values()[k]));
        }
        text.push('\n');
    }
    ctx.write("position.csv", &text)?;
    Ok(r)
}

fn flow_pairs(ctx: &Ctx, phi: &ScalarField2D, boundary: Boundary) -> Result<Vec<FlowPair>> {
    let e = &ctx.cfg.evolve;
    let mut out = Vec::new();
    if !e.plane_wave_pairs.is_empty() {
        let Some(PhiSpec::PlaneWave { base, amp }) = ctx.cfg.phi.as_ref().and_then(|p| match p {
            super::config::PhiSource::Catalog(s) => Some(s.clone()),
            _ => None,
        }) else {
            return Err(Error::Config("plane_wave_pairs need a plane_wave angle".into()));
        };
        for c in &e.plane_wave_pairs {
            out.push(plane_wave_pair(*phi.grid(), base, amp, *c)?);
        }
    }
    if !ctx.cfg.pairs.is_empty() {
        if boundary == Boundary::Periodic {
            return Err(Error::Config("solved pairs are not periodic; use plane_wave_pairs".into()));
        }
        let pf = PhiField::new(phi.clone())?;
        for p in &ctx.cfg.pairs {
            let sp = p.solve(&pf)?;
            out.push(FlowPair::new(sp.kappa, sp.s));
        }
    }
    Ok(out)
}

fn write_checkpoint(ctx: &Ctx, n: usize, st: &FlowState, gauge: &str) -> Result<()> {
    let dir = ctx.path(&format!("checkpoint_{n:06}"));
    std::fs::create_dir_all(&dir)?;
    st.phi.write_csv(dir.join("phi.csv"))?;
    st.p.write_csv(dir.join("p.csv"))?;
    st.q.write_csv(dir.join("q.csv"))?;
    for (i, pr) in st.pairs.iter().enumerate() {
        pr.kappa.write_csv(dir.join(format!("kappa{}.csv", i + 1)))?;
        pr.s.write_csv(dir.join(format!("s{}.csv", i + 1)))?;
    }
    let manifest = json!({
        "step": n,
        "t": st.t,
        "conserved": st.conserved(),
        "residuals": st.pair_residuals(),
        "gauge": gauge,
    });
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("json") + "\n")?;
    Ok(())
}

pub fn evolve_cmd(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("evolve");
    let e = &ctx.cfg.evolve;
    let (flow, boundary) = (e.flow()?, e.boundary()?);
    let phi = ctx.cfg.phi()?;
    let pairs = flow_pairs(ctx, &phi, boundary)?;
    let st0 = FlowState::new(phi, pairs, boundary)?;
    let g = *st0.phi.grid();
    let dt = e.dt.unwrap_or_else(|| cfl_bound(&g, e.cfl));
    let gauge = match boundary {
        Boundary::Frozen => "p = 0 on y = y0, q = 0 on x = x0; two-node band frozen",
        Boundary::Periodic => "p, q with zero line means",
    };
    let c0 = st0.conserved();
    let scale = conserved_scale(&st0.phi, boundary);
    let r0 = st0.pair_residuals();
    let mut drift: f64 = 0.0;
    let mut growth: f64 = 0.0;
    let mut manifests = Vec::new();
    if e.checkpoint_every > 0 {
        write_checkpoint(ctx, 0, &st0, gauge)?;
    }
    let end = evolve(&st0, dt, e.steps, flow, e.cfl, |n, st| {
        drift = drift.max(relative_drift(c0, st.conserved(), scale));
        for (a, b) in st.pair_residuals().iter().zip(&r0) {
            growth = growth.max(a / b.max(f64::MIN_POSITIVE));
        }
        if e.checkpoint_every > 0 && (n % e.checkpoint_every == 0 || n == e.steps) {
            write_checkpoint(ctx, n, st, gauge)?;
            manifests.push(format!("checkpoint_{n:06}/manifest.json"));
        }
        Ok(())
    })?;
    r.metric("flow", flow.to_string());
    r.metric("boundary", boundary.to_string());
    r.metric("gauge", gauge);
    r.metric("dt", dt);
    r.metric("steps", e.steps);
    r.metric("t", end.t);
    r.metric("conserved_initial", c0);
    r.metric("conserved_final", end.conserved());
    r.metric("checkpoints", manifests);
    r.metric("pair_residuals_initial", r0.clone());
    r.metric("pair_residuals_final", end.pair_residuals());
    end.phi.write_csv(ctx.path("phi_final.csv"))?;
    if boundary == Boundary::Periodic {
        ctx.check(&mut r, "conserved_drift", drift, 1e-6);
    } else {
        r.metric("conserved_drift", drift);
    }
    if !r0.is_empty() {
        ctx.check(&mut r, "pair_residual_growth", growth, 10.0);
    }
    Ok(r)
}

fn source_frame(ctx: &Ctx, src: &FrameSource) -> Result<Frame> {
    Ok(match src {
        FrameSource::Construct => {
            let phi = ctx.phi()?;
            Frame::from_wfield(&build_frame(&ctx.pairs(&phi, 1)?)?.2)
        }
        FrameSource::Surface3 => {
            let phi = ctx.phi()?;
            let pairs = ctx.pairs(&phi, 2)?;
            Frame::from_surface3(&build_surface(&pairs[0], &pairs[1], &phi, &surface_options(ctx))?.0)
        }
        FrameSource::File { path } => {
            let path = ctx.cfg.resolve(path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            frame_from_csv(&text)?
        }
    })
}

fn apply_control(frame: &Frame, c: &Control) -> Result<Frame> {
    if frame.normals().len() < 3 && matches!(c, Control::Rotate { .. }) {
        return Err(Error::Config("rotating normals needs at least three of them".into()));
    }
    match *c {
        Control::Rotate { rate } => rotate_normals(frame, 1, 2, |u| rate * u[0]),
        Control::Corrupt { amp } => {
            let a = 1.min(frame.normals().len() - 1);
            let mut n = frame.normals()[a].clone();
            n[0] = n[0].zip_map(&FieldN::from_fn(frame.grid(), |u| amp * (3.0 * u[0]).sin() * (2.0 * u[1]).cos()), |a, b| a + b);
            let mut out = frame.clone();
            out.set_normal(a, n)?;
            Ok(out)
        }
    }
}

pub fn verify(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("verify");
    let p = ctx.cfg.verify.as_ref().ok_or_else(|| Error::Config("missing verify section".into()))?;
    let mut frame = source_frame(ctx, &p.source)?;
    if let Some(c) = &p.control {
        frame = apply_control(&frame, c)?;
    }
    let data = extract_geometry(&frame)?;
    let cod = codazzi_residual(&data);
    let wein = weingarten_commutativity(&frame);
    r.metric("ambient", format!("{:?}", frame.ambient()).to_lowercase());
    r.metric("normals", frame.normals().len());
    r.metric("weingarten_commutator", wein.commutator);
    ctx.check(&mut r, "orthonormality", frame.orthonormal_residual(), 1e-3);
    ctx.check(&mut r, "flat_normal_check", flat_normal_check(&frame), 1e-3);
    ctx.check(&mut r, "projection", data.projection_residual, 1e-2);
    ctx.check(&mut r, "codazzi_lame", cod.lame, 1e-2);
    ctx.check(&mut r, "codazzi_rotation", cod.rotation, 1e-2);
    ctx.check(&mut r, "gauss", cod.gauss, 1e-2);
    ctx.check(&mut r, "weingarten_off_diagonal", wein.off_diagonal, 1e-3);
    Ok(r)
}

/// Runs `command` and writes `report.json` into the output directory.
pub fn run_command(command: &str, ctx: &Ctx) -> Result<Report> {
    std::fs::create_dir_all(&ctx.out)?;
    let report = match command {
        "solve" => solve(ctx),
        "surface" => surface(ctx),
        "surface3" => surface3(ctx),
        "ribaucour" => ribaucour(ctx),
        "wcongruence" => wcongruence(ctx),
        "highdim" => highdim(ctx),
        "evolve" => evolve_cmd(ctx),
        "verify" => verify(ctx),
        other => Err(Error::Config(format!("unknown command {other}"))),
    }?;
    std::fs::write(ctx.out.join("report.json"), report.to_json())?;
    Ok(report)
}

/// Output directory: the flag, then the config, then `out`.
pub fn out_dir(cfg: &RunConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).or_else(|| cfg.out.as_ref().map(|o| cfg.resolve(o))).unwrap_or_else(|| "out".into())
}
