use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{MoutardData, PairSpec, PhiSpec, SphericalLame};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};
use crate::mvn::{Boundary, Flow};

/// Tensor grid. With `periodic`, `x` and `y` are `[start, start + period)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "unit")]
    pub x: [f64; 2],
    #[serde(default = "unit")]
    pub y: [f64; 2],
    #[serde(default)]
    pub periodic: bool,
}

fn unit() -> [f64; 2] {
    [0.0, 1.0]
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid2D> {
        if self.periodic {
            Grid2D::periodic(self.nx, self.ny, self.x[0], self.y[0], self.x[1] - self.x[0], self.y[1] - self.y[0])
        } else {
            Grid2D::spanning(self.nx, self.ny, (self.x[0], self.x[1]), (self.y[0], self.y[1]))
        }
    }
}

/// A catalog angle, or one read from an `x,y,value` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSource {
    Catalog(PhiSpec),
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Surface3Params {
    #[serde(default)]
    pub a0: f64,
    #[serde(default = "one")]
    pub max_masked_fraction: f64,
    #[serde(default = "umbilic")]
    pub umbilic_tol: f64,
}

impl Default for Surface3Params {
    fn default() -> Self {
        Self { a0: 0.0, max_masked_fraction: 1.0, umbilic_tol: crate::euclid3::UMBILIC_TOL }
    }
}

fn one() -> f64 {
    1.0
}

fn umbilic() -> f64 {
    crate::euclid3::UMBILIC_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RibaucourParams {
    pub c31: f64,
    pub c32: f64,
    #[serde(default)]
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WCongruenceParams {
    pub q: PhiSpec,
    pub xi: [MoutardData; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighdimParams {
    /// Nodes along `r`, `θ`, `ϕ`.
    pub shape: [usize; 3],
    #[serde(default = "spherical_bounds")]
    pub bounds: [[f64; 2]; 3],
    /// One Lamé family per normal.
    pub lame: Vec<SphericalLame>,
    /// Values of the flat coordinates at the grid origin, one triple per normal.
    pub base: Vec<[f64; 3]>,
}

fn spherical_bounds() -> [[f64; 2]; 3] {
    [[1.0, 1.4], [0.8, 1.2], [0.0, 0.4]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    #[serde(default = "mvn")]
    pub flow: String,
    /// Defaults to the stability bound.
    pub dt: Option<f64>,
    #[serde(default = "hundred")]
    pub steps: usize,
    #[serde(default)]
    pub checkpoint_every: usize,
    #[serde(default = "frozen")]
    pub boundary: String,
    #[serde(default = "cfl")]
    pub cfl: f64,
    /// Phase constants of exact plane-wave pairs; needs a `plane_wave` angle.
    #[serde(default)]
    pub plane_wave_pairs: Vec<f64>,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self {
            flow: mvn(),
            dt: None,
            steps: 100,
            checkpoint_every: 0,
            boundary: frozen(),
            cfl: cfl(),
            plane_wave_pairs: Vec::new(),
        }
    }
}

fn mvn() -> String {
    "mvn".into()
}

fn hundred() -> usize {
    100
}

fn frozen() -> String {
    "frozen".into()
}

fn cfl() -> f64 {
    crate::mvn::CFL_DEFAULT
}

impl EvolveParams {
    pub fn flow(&self) -> Result<Flow> {
        self.flow.parse()
    }

    pub fn boundary(&self) -> Result<Boundary> {
        self.boundary.parse()
    }
}

/// Where `verify` takes its frame from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameSource {
    /// Frame assembled from the configured pairs.
    Construct,
    /// Surface in `E³` from the first two pairs.
    Surface3,
    /// Frame CSV as written by `surface` or `surface3`.
    File { path: PathBuf },
}

/// Deliberate damage applied before checking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Control {
    /// Rotates normals 2 and 3 into each other by `rate · x`.
    Rotate { rate: f64 },
    /// Adds `amp sin 3x cos 2y` to one entry of normal 2 without renormalising.
    Corrupt { amp: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    pub source: FrameSource,
    #[serde(default)]
    pub control: Option<Control>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub phi: Option<PhiSource>,
    #[serde(default)]
    pub pairs: Vec<PairSpec>,
    /// Overrides of the built-in thresholds, by check name.
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
    #[serde(default)]
    pub surface3: Surface3Params,
    #[serde(default)]
    pub ribaucour: Option<RibaucourParams>,
    #[serde(default)]
    pub wcongruence: Option<WCongruenceParams>,
    #[serde(default)]
    pub highdim: Option<HighdimParams>,
    #[serde(default)]
    pub evolve: EvolveParams,
    #[serde(default)]
    pub verify: Option<VerifyParams>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Directory relative paths are resolved against; set by [`RunConfig::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some((name, v)) = self.thresholds.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Config(format!("threshold {name} must be positive, got {v}")));
        }
        let e = &self.evolve;
        e.flow()?;
        e.boundary()?;
        if e.dt.is_some_and(|dt| !(dt > 0.0)) || !(e.cfl > 0.0) {
            return Err(Error::Config("dt and cfl must be positive".into()));
        }
        if self.surface3.umbilic_tol <= 0.0 || !(0.0..=1.0).contains(&self.surface3.max_masked_fraction) {
            return Err(Error::Config("surface3 tolerances out of range".into()));
        }
        if let Some(h) = &self.highdim {
            if h.lame.is_empty() || h.lame.len() != h.base.len() {
                return Err(Error::Config("highdim needs one base point per Lamé family".into()));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        self.grid.as_ref().ok_or_else(|| Error::Config("missing grid".into()))?.build()
    }

    /// The angle on the configured grid (or on the grid of its CSV file).
    pub fn phi(&self) -> Result<ScalarField2D> {
        match self.phi.as_ref().ok_or_else(|| Error::Config("missing phi".into()))? {
            PhiSource::Catalog(spec) => Ok(spec.sample(self.grid()?)),
            PhiSource::Csv { csv } => {
                let path = self.resolve(csv);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                ScalarField2D::from_csv(&text)
            }
        }
    }

    pub fn threshold(&self, name: &str, default: f64, scale: f64) -> f64 {
        self.thresholds.get(name).copied().unwrap_or(default) * scale
    }
}
