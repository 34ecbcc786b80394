//! Run configuration: built-in defaults, then a TOML file, then flags.

use std::path::{Path, PathBuf};

use clap::Args;
use fcfv::benchmarks::{CaseOptions, RigidityExponent, ShellMeshSize, CASE_NAMES};
use fcfv::mesh::ElementKind;
use fcfv::solver::{Method, Preconditioner, SolverConfig};
use fcfv::voigt::Model;
use serde::de::{value::StrDeserializer, DeserializeOwned, IntoDeserializer};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Stabilisation factors swept by `tau-sweep` unless configured.
pub const DEFAULT_TAU_GRID: [f64; 7] = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0];

/// Worker threads, overridden by `--threads`.
pub const THREADS_ENV: &str = "FCFV_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: String,
    /// Meshes read from files instead of the case's generated family.
    pub mesh_files: Vec<PathBuf>,
    /// Element kind; the case default when unset.
    pub kind: Option<ElementKind>,
    pub levels: Vec<u32>,
    pub distortion_seed: Option<u64>,
    /// Explicit shell mesh; replaces the level list.
    pub shell: Option<ShellMeshSize>,
    pub material: CaseOptions,
    pub tau: f64,
    /// Characteristic length in the stabilisation; the case default when unset.
    pub length_scale: Option<f64>,
    pub tau_grid: Vec<f64>,
    pub solver: SolverConfig,
    pub output: PathBuf,
    pub vtk: bool,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: "poly2d".into(),
            mesh_files: Vec::new(),
            kind: None,
            levels: vec![3],
            distortion_seed: None,
            shell: None,
            material: CaseOptions::default(),
            tau: fcfv::pipeline::DEFAULT_TAU,
            length_scale: None,
            tau_grid: DEFAULT_TAU_GRID.to_vec(),
            solver: SolverConfig::default(),
            output: PathBuf::from("fcfv-out"),
            vtk: false,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !CASE_NAMES.contains(&self.case.as_str()) {
            return Err(CliError::UnknownCase(self.case.clone()));
        }
        if self.mesh_files.is_empty() && self.shell.is_none() && self.levels.is_empty() {
            return Err(CliError::Usage("the level list is empty".into()));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(CliError::Usage(format!("tau must be positive, got {}", self.tau)));
        }
        if let Some(l) = self.length_scale {
            if !(l.is_finite() && l > 0.0) {
                return Err(CliError::Usage(format!("length scale must be positive, got {l}")));
            }
        }
        if self.tau_grid.is_empty() || self.tau_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(CliError::Usage("tau grid must be non-empty and positive".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        self.solver.validate().map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Parses a kebab-case name into a serde enum.
fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    let d: StrDeserializer<'_, serde::de::value::Error> = s.into_deserializer();
    T::deserialize(d).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<ElementKind, String> {
    ElementKind::from_name(s).ok_or_else(|| format!("unknown element kind `{s}` (tri, quad, tet, hex)"))
}

fn parse_shell(s: &str) -> Result<ShellMeshSize, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || format!("expected N_THETA,N_Z,N_T[,STRETCH], got `{s}`");
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let n = |i: usize| parts[i].trim().parse::<usize>().map_err(|_| bad());
    let stretch = match parts.get(3) {
        Some(p) => p.trim().parse().map_err(|_| bad())?,
        None => fcfv::benchmarks::DEFAULT_SHELL_STRETCH,
    };
    Ok(ShellMeshSize { n_theta: n(0)?, n_z: n(1)?, n_t: n(2)?, stretch })
}

/// Flags shared by the solving subcommands. Each one, when given, replaces
/// the value from the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Benchmark case.
    #[arg(long)]
    pub case: Option<String>,
    /// Mesh file to solve on instead of the generated family (repeatable).
    #[arg(long = "mesh-file", value_name = "FILE")]
    pub mesh_files: Vec<PathBuf>,
    /// Element kind: tri, quad, tet or hex.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<ElementKind>,
    /// Refinement levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    /// Perturb interior nodes with this seed.
    #[arg(long, value_name = "SEED")]
    pub distort: Option<u64>,
    /// Shell mesh as N_THETA,N_Z,N_T[,STRETCH].
    #[arg(long, value_parser = parse_shell)]
    pub shell: Option<ShellMeshSize>,
    #[arg(long)]
    pub poisson_ratio: Option<f64>,
    #[arg(long)]
    pub young_modulus: Option<f64>,
    /// plane-stress, plane-strain or three-d.
    #[arg(long, value_parser = kebab::<Model>)]
    pub model: Option<Model>,
    /// Cook's membrane with the nearly incompressible material.
    #[arg(long)]
    pub nearly_incompressible: bool,
    /// Shell internal pressure.
    #[arg(long)]
    pub pressure: Option<f64>,
    /// Shell flexural rigidity exponent: cubic or square.
    #[arg(long, value_parser = kebab::<RigidityExponent>)]
    pub rigidity: Option<RigidityExponent>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub length_scale: Option<f64>,
    /// Stabilisation factors for the sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub tau_grid: Option<Vec<f64>>,
    /// auto, direct or cg.
    #[arg(long, value_parser = kebab::<Method>)]
    pub solver: Option<Method>,
    #[arg(long)]
    pub cg_tolerance: Option<f64>,
    #[arg(long)]
    pub cg_max_iterations: Option<usize>,
    /// none or jacobi.
    #[arg(long, value_parser = kebab::<Preconditioner>)]
    pub preconditioner: Option<Preconditioner>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write a VTK file per run.
    #[arg(long)]
    pub vtk: bool,
    /// Worker threads (default from FCFV_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Overrides {
    /// Defaults, then the configuration file, then these flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.case {
            c.case = v.clone();
        }
        if !self.mesh_files.is_empty() {
            c.mesh_files = self.mesh_files.clone();
        }
        if self.kind.is_some() {
            c.kind = self.kind;
        }
        if let Some(v) = &self.levels {
            c.levels = v.clone();
        }
        if self.distort.is_some() {
            c.distortion_seed = self.distort;
        }
        if self.shell.is_some() {
            c.shell = self.shell;
        }
        let m = &mut c.material;
        if self.poisson_ratio.is_some() {
            m.poisson_ratio = self.poisson_ratio;
        }
        if self.young_modulus.is_some() {
            m.young_modulus = self.young_modulus;
        }
        if self.model.is_some() {
            m.model = self.model;
        }
        m.nearly_incompressible |= self.nearly_incompressible;
        if self.pressure.is_some() {
            m.pressure = self.pressure;
        }
        if self.rigidity.is_some() {
            m.rigidity_exponent = self.rigidity;
        }
        if let Some(v) = self.tau {
            c.tau = v;
        }
        if self.length_scale.is_some() {
            c.length_scale = self.length_scale;
        }
        if let Some(v) = &self.tau_grid {
            c.tau_grid = v.clone();
        }
        if let Some(v) = self.solver {
            c.solver.method = v;
        }
        if let Some(v) = self.cg_tolerance {
            c.solver.cg_tolerance = v;
        }
        if let Some(v) = self.cg_max_iterations {
            c.solver.cg_max_iterations = v;
        }
        if let Some(v) = self.preconditioner {
            c.solver.preconditioner = v;
        }
        if let Some(v) = &self.output {
            c.output = v.clone();
        }
        c.vtk |= self.vtk;
        c.threads = self.threads.or(threads_from_env()?).or(c.threads);
        c.validate()?;
        Ok(c)
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        _ => Ok(None),
    }
}
