//! Command-line front end: config loading, command dispatch and exit codes.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::io::Report;

pub mod config;
pub mod run;

pub use config::RunConfig;
pub use run::{run_command, Ctx, Overrides};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_THRESHOLD: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the characteristic system for every configured pair.
    Solve,
    /// Assemble the frame on the sphere from the pairs.
    Surface,
    /// Surface in E³ from the first two pairs.
    Surface3,
    /// Sphere congruence from three pairs.
    Ribaucour,
    /// W-congruence from four Moutard solutions.
    Wcongruence,
    /// Triply orthogonal system and its flat-normal submanifold.
    Highdim,
    /// Time stepping of the angle and the pairs.
    Evolve,
    /// Gauss-Codazzi and flat-normal checks of a frame.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Surface => "surface",
            Command::Surface3 => "surface3",
            Command::Ribaucour => "ribaucour",
            Command::Wcongruence => "wcongruence",
            Command::Highdim => "highdim",
            Command::Evolve => "evolve",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "flatnb", version, about = "Surfaces with flat normal bundle: construction and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Multiplies every threshold.
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol_scale: Option<f64>,
    #[arg(long, global = true, num_args = 2, value_names = ["NX", "NY"])]
    pub grid: Option<Vec<usize>>,
    #[arg(long, global = true, value_parser = ["t", "tau", "mvn"])]
    pub flow: Option<String>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub checkpoint_every: Option<usize>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            tol_scale: self.tol_scale,
            grid: self.grid.as_ref().map(|g| (g[0], g[1])),
            flow: self.flow.clone(),
            dt: self.dt,
            steps: self.steps,
            checkpoint_every: self.checkpoint_every,
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Io(_) | Error::AxisLength { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config is required");
        return EXIT_CONFIG;
    };
    let ov = cli.overrides();
    let mut cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = ov.apply(&mut cfg) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let out = run::out_dir(&cfg, ov.out.as_deref());
    let ctx = Ctx { cfg: &cfg, out, tol_scale: ov.tol_scale.unwrap_or(1.0) };
    let name = cli.command.name();
    match run_command(name, &ctx) {
        Ok(report) => {
            for c in &report.checks {
                eprintln!("{:<28} {:>12.4e} <= {:<10.3e} {}", c.name, c.value, c.threshold, if c.pass { "ok" } else { "FAIL" });
            }
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_THRESHOLD
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut report = Report::new(name);
            report.metric("error", e.to_string());
            report.failed.push("error".into());
            report.pass = false;
            if std::fs::create_dir_all(&ctx.out).is_ok() {
                let _ = std::fs::write(ctx.out.join("report.json"), report.to_json());
            }
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    main_with(std::env::args_os())
}
