//! Run configuration, read from TOML.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rte_pml::angular::ScatteringKernel;
use rte_pml::mesh::{GeometrySpec, Shape};
use rte_pml::pml::{layer_absorption, Material, Medium};
use rte_pml::solver::PreconditionerKind;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub discretization: DiscretizationConfig,
    pub pml: PmlConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub study: Option<StudyConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
}

impl From<ShapeConfig> for Shape {
    fn from(s: ShapeConfig) -> Self {
        match s {
            ShapeConfig::Disk { center, radius } => Shape::disk(center[0], center[1], radius),
            ShapeConfig::Rectangle { min, max } => Shape::rectangle(min[0], min[1], max[0], max[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryPreset {
    /// Unit disk inside the disk of radius 1.2.
    Disk,
    /// `[0, 7]²` inside `[-1, 8]²`.
    Lattice,
}

/// Either a preset or an explicit `inner` / `outer` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<GeometryPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<ShapeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<ShapeConfig>,
}

impl GeometryConfig {
    pub fn shapes(&self) -> Result<(ShapeConfig, ShapeConfig), CliError> {
        match (self.preset, self.inner, self.outer) {
            (Some(GeometryPreset::Disk), None, None) => Ok((
                ShapeConfig::Disk { center: [0.0, 0.0], radius: 1.0 },
                ShapeConfig::Disk { center: [0.0, 0.0], radius: 1.2 },
            )),
            (Some(GeometryPreset::Lattice), None, None) => Ok((
                ShapeConfig::Rectangle { min: [0.0, 0.0], max: [7.0, 7.0] },
                ShapeConfig::Rectangle { min: [-1.0, -1.0], max: [8.0, 8.0] },
            )),
            (None, Some(i), Some(o)) => Ok((i, o)),
            _ => Err(config_err("geometry: give either `preset` or both `inner` and `outer`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScatteringConfig {
    None,
    /// Constant kernel with total scattering `sigma0`.
    Isotropic { sigma0: f64 },
    HenyeyGreenstein { g: f64, sigma0: f64, terms: usize },
}

impl ScatteringConfig {
    pub fn kernel(&self) -> rte_pml::Result<ScatteringKernel> {
        match *self {
            ScatteringConfig::None => Ok(ScatteringKernel::zero()),
            ScatteringConfig::Isotropic { sigma0 } => ScatteringKernel::isotropic(sigma0 / (4.0 * PI)),
            ScatteringConfig::HenyeyGreenstein { g, sigma0, terms } => ScatteringKernel::henyey_greenstein(g, sigma0, terms),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Constant { value: f64 },
    /// `amplitude · exp(-rate |r - center|²)`.
    Gaussian { center: [f64; 2], rate: f64, amplitude: f64 },
    /// `value` on the closed box, zero elsewhere.
    Box { min: [f64; 2], max: [f64; 2], value: f64 },
}

impl SourceConfig {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match *self {
            SourceConfig::Constant { value } => value,
            SourceConfig::Gaussian { center, rate, amplitude } => {
                amplitude * (-rate * ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2))).exp()
            }
            SourceConfig::Box { min, max, value } => {
                if (min[0]..=max[0]).contains(&p[0]) && (min[1]..=max[1]).contains(&p[1]) {
                    value
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    Uniform,
    /// Unit-cell checkerboard of pure absorbers (`absorber_mu`, no scattering)
    /// in a scattering background (`mu`, `scattering`) on `[0, 7]²`.
    Lattice,
}

/// Lower-left corners of the absorbing cells of the lattice layout.
pub const LATTICE_ABSORBERS: [[usize; 2]; 11] =
    [[1, 1], [1, 3], [1, 5], [2, 2], [2, 4], [3, 1], [4, 2], [4, 4], [5, 1], [5, 3], [5, 5]];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default)]
    pub layout: Layout,
    pub mu: f64,
    pub scattering: ScatteringConfig,
    #[serde(default)]
    pub absorber_mu: Option<f64>,
    pub source: SourceConfig,
}

impl PhysicsConfig {
    pub fn medium(&self) -> rte_pml::Result<Medium<'static>> {
        let background = Material::new(self.mu, self.scattering.kernel()?);
        let source = self.source;
        let q = move |p: [f64; 2]| source.eval(p);
        Ok(match self.layout {
            Layout::Uniform => Medium::homogeneous(background, q),
            Layout::Lattice => {
                let absorber = Material::new(self.absorber_mu.unwrap_or(10.0), ScatteringKernel::zero());
                Medium {
                    materials: vec![background, absorber],
                    material_at: Box::new(|p| {
                        let cell = [p[0].floor(), p[1].floor()];
                        let hit = cell[0] >= 0.0
                            && cell[1] >= 0.0
                            && LATTICE_ABSORBERS.contains(&[cell[0] as usize, cell[1] as usize]);
                        usize::from(hit)
                    }),
                    source: Box::new(q),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    /// Odd truncation order `N`.
    pub order: usize,
    /// Size of the base mesh.
    pub h: f64,
    /// Uniform refinements applied to the base mesh.
    #[serde(default)]
    pub refinements: usize,
}

impl DiscretizationConfig {
    pub fn effective_h(&self) -> f64 {
        self.h / (1u64 << self.refinements) as f64
    }
}

/// Layer absorption, as attenuation targets `e^{-aℓ}` or explicit values of `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmlConfig {
    #[serde(default)]
    pub targets: Vec<f64>,
    #[serde(default)]
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub preconditioner: PrecondName,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 20_000, preconditioner: PrecondName::Jacobi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecondName {
    Jacobi,
    BlockSpatial,
}

impl From<PrecondName> for PreconditionerKind {
    fn from(p: PrecondName) -> Self {
        match p {
            PrecondName::Jacobi => PreconditionerKind::Jacobi,
            PrecondName::BlockSpatial => PreconditionerKind::BlockSpatial,
        }
    }
}

impl From<PreconditionerKind> for PrecondName {
    fn from(p: PreconditionerKind) -> Self {
        match p {
            PreconditionerKind::Jacobi => PrecondName::Jacobi,
            PreconditionerKind::BlockSpatial => PrecondName::BlockSpatial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FieldFormat {
    #[default]
    Csv,
    Vtk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Run log inside `dir`; one record per solve is appended.
    pub report: String,
    /// Field export file stem inside `dir`; no export when absent.
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default)]
    pub format: FieldFormat,
    /// Study table inside `dir`.
    pub table: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), report: "runs.log".into(), field: None, format: FieldFormat::Csv, table: "study.csv".into() }
    }
}

/// A sweep over `orders × h × targets` against a self-reference solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub orders: Vec<usize>,
    pub h: Vec<f64>,
    pub targets: Vec<f64>,
    pub reference: ReferenceConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub order: usize,
    pub h: f64,
    pub target: f64,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_order(key: &str, n: usize) -> Result<(), CliError> {
    if n == 0 || n % 2 == 0 {
        return Err(config_err(format!("{key}: order must be odd and positive, got {n}")));
    }
    Ok(())
}

fn check_target(key: &str, t: f64) -> Result<(), CliError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(config_err(format!("{key}: attenuation target must lie in (0, 1], got {t}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks every invariant before anything is allocated.
    pub fn validate(&self) -> Result<(), CliError> {
        check_order("discretization.order", self.discretization.order)?;
        if !(self.discretization.h > 0.0 && self.discretization.h.is_finite()) {
            return Err(config_err(format!("discretization.h must be positive, got {}", self.discretization.h)));
        }
        if !(self.solver.tol > 0.0) {
            return Err(config_err(format!("solver.tol must be positive, got {}", self.solver.tol)));
        }
        if self.solver.max_iter == 0 {
            return Err(config_err("solver.max_iter must be positive"));
        }
        if self.pml.targets.is_empty() == self.pml.a.is_empty() {
            return Err(config_err("pml: give exactly one of `targets` or `a`"));
        }
        for &t in &self.pml.targets {
            check_target("pml.targets", t)?;
        }
        if let Some(a) = self.pml.a.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(config_err(format!("pml.a must be finite and >= 0, got {a}")));
        }
        self.geometry()?;
        let medium = self.physics.medium().map_err(|e| config_err(format!("physics: {e}")))?;
        if let Some(m) = medium.materials.iter().find(|m| m.kernel.total() > m.mu * (1.0 + 1e-12)) {
            return Err(config_err(format!(
                "physics: total scattering {} exceeds the absorption coefficient {}",
                m.kernel.total(),
                m.mu
            )));
        }
        if let Some(s) = &self.study {
            if s.orders.is_empty() || s.h.is_empty() || s.targets.is_empty() {
                return Err(config_err("study: orders, h and targets must be non-empty"));
            }
            for &n in s.orders.iter().chain([&s.reference.order]) {
                check_order("study.orders", n)?;
            }
            for &t in s.targets.iter().chain([&s.reference.target]) {
                check_target("study.targets", t)?;
            }
            if s.orders.iter().any(|&n| n > s.reference.order) {
                return Err(config_err("study: reference order must be at least every swept order"));
            }
            for &h in &s.h {
                nested_level(self.discretization.h, h).ok_or_else(|| {
                    config_err(format!("study.h = {h} is not discretization.h / 2^k (grids must be nested)"))
                })?;
            }
            let r = nested_level(self.discretization.h, s.reference.h)
                .ok_or_else(|| config_err("study.reference.h is not nested with discretization.h"))?;
            if s.h.iter().any(|&h| nested_level(self.discretization.h, h).unwrap() > r) {
                return Err(config_err("study: the reference grid must be the finest"));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<GeometrySpec, CliError> {
        let (inner, outer) = self.geometry.shapes()?;
        GeometrySpec::new(inner.into(), outer.into()).map_err(|e| config_err(format!("geometry: {e}")))
    }

    /// Layer absorptions `a` in sweep order.
    pub fn absorptions(&self) -> Result<Vec<f64>, CliError> {
        if !self.pml.a.is_empty() {
            return Ok(self.pml.a.clone());
        }
        let ell = self.geometry()?.layer_thickness();
        Ok(self.pml.targets.iter().map(|&t| layer_absorption(t, ell)).collect::<rte_pml::Result<_>>()?)
    }

    /// Flattened `key=value` view of the resolved configuration.
    pub fn echo(&self) -> Vec<(String, String)> {
        let value: toml::Table = toml::from_str(&self.to_toml()).expect("round trip");
        let mut out = Vec::new();
        flatten("", &toml::Value::Table(value), &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut Vec<(String, String)>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        toml::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// `k` with `h = base / 2^k`, if any.
pub fn nested_level(base: f64, h: f64) -> Option<usize> {
    (0..16).find(|&k| (base / (1u64 << k) as f64 - h).abs() <= 1e-9 * h)
}
