//! Runs configured meshes and writes their CSV tables, VTK files and
//! metadata.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fcfv::benchmarks::{case_by_name, Benchmark, MeshRequest};
use fcfv::mesh::io::{format_mesh, read_mesh};
use fcfv::mesh::Mesh;
use fcfv::pipeline::{run_benchmark, RunOptions, RunResult, Timings};
use fcfv::postproc::{convergence_rate, export_vtk};
use fcfv::solver::SolveReport;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const RESULTS_CSV: &str = "results.csv";
pub const RATES_CSV: &str = "rates.csv";
pub const TAU_SWEEP_CSV: &str = "tau_sweep.csv";
pub const METADATA_JSON: &str = "metadata.json";

/// Where a run's mesh comes from.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshSource {
    Generated(MeshRequest),
    File(PathBuf),
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshJob {
    pub id: String,
    pub source: MeshSource,
}

/// The meshes a configuration asks for, in order.
pub fn mesh_jobs(config: &RunConfig, case: &dyn Benchmark) -> Vec<MeshJob> {
    if !config.mesh_files.is_empty() {
        return config
            .mesh_files
            .iter()
            .map(|p| MeshJob {
                id: p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()),
                source: MeshSource::File(p.clone()),
            })
            .collect();
    }
    if let Some(s) = config.shell {
        let request = MeshRequest { shell: Some(s), kind: config.kind, ..MeshRequest::level(0) };
        let id = format!("{}-{}x{}x{}-s{}", case.name(), s.n_theta, s.n_z, s.n_t, s.stretch);
        return vec![MeshJob { id, source: MeshSource::Generated(request) }];
    }
    let kind = config.kind.unwrap_or_else(|| case.default_kind());
    config
        .levels
        .iter()
        .map(|&level| {
            let request = MeshRequest { level, kind: config.kind, distortion_seed: config.distortion_seed, shell: None };
            let mut id = format!("{}-{}-r{level}", case.name(), kind.name());
            if let Some(seed) = config.distortion_seed {
                let _ = write!(id, "-d{seed}");
            }
            MeshJob { id, source: MeshSource::Generated(request) }
        })
        .collect()
}

pub fn build_case(config: &RunConfig) -> Result<Box<dyn Benchmark>, CliError> {
    case_by_name(&config.case, &config.material).map_err(|e| CliError::Run(e.into()))
}

fn load_mesh(case: &dyn Benchmark, job: &MeshJob) -> Result<Mesh, CliError> {
    match &job.source {
        MeshSource::Generated(request) => case.mesh(request).map_err(|e| CliError::Run(e.into())),
        MeshSource::File(path) => read_mesh(path).map_err(|e| CliError::Mesh(path.clone(), e)),
    }
}

/// SHA-256 of the mesh in the exchange format.
pub fn mesh_hash(mesh: &Mesh) -> String {
    Sha256::digest(format_mesh(mesh).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Errors {
    pub h: f64,
    pub n_dof: usize,
    #[serde(rename = "E_u")]
    pub e_u: Option<f64>,
    #[serde(rename = "E_sigma")]
    pub e_sigma: Option<f64>,
    #[serde(rename = "E_r")]
    pub e_r: Option<f64>,
}

/// Everything kept from one solve.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub mesh_id: String,
    pub source: MeshSource,
    pub mesh_sha256: String,
    pub n_elements: usize,
    pub n_faces: usize,
    pub tau: f64,
    pub length_scale: f64,
    pub errors: Errors,
    pub scalars: Vec<(String, f64)>,
    pub solver: SolveReport,
    pub timings: Timings,
    pub vtk: Option<PathBuf>,
}

impl RunRecord {
    fn new(job: &MeshJob, mesh_sha256: String, r: &RunResult) -> Self {
        let e = &r.errors;
        Self {
            mesh_id: job.id.clone(),
            source: job.source.clone(),
            mesh_sha256,
            n_elements: r.mesh.num_elements(),
            n_faces: r.mesh.num_faces(),
            tau: r.tau,
            length_scale: r.length_scale,
            errors: Errors {
                h: e.h,
                n_dof: e.n_dof,
                e_u: e.e_u.map(|x| x.value),
                e_sigma: e.e_sigma.map(|x| x.value),
                e_r: e.e_r,
            },
            scalars: r.scalars.clone(),
            solver: r.solve.clone(),
            timings: r.timings,
            vtk: None,
        }
    }
}

/// Solves one mesh at one stabilisation factor; the VTK file, if asked for,
/// goes to a subdirectory owned by this run alone.
pub fn run_job(config: &RunConfig, case: &dyn Benchmark, job: &MeshJob, tau: f64, vtk: Option<(&Path, String)>) -> Result<RunRecord, CliError> {
    let mesh = load_mesh(case, job)?;
    let hash = mesh_hash(&mesh);
    let options = RunOptions { tau, length_scale: config.length_scale, solver: config.solver };
    let result = run_benchmark(case, mesh, &options).map_err(|e| CliError::Case(job.id.clone(), e))?;
    let mut record = RunRecord::new(job, hash, &result);
    if let Some((root, name)) = vtk {
        let dir = root.join("runs").join(&job.id);
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(dir.clone(), e))?;
        let path = dir.join(name);
        export_vtk(&result.mesh, &result.elements, &path).map_err(|e| CliError::Run(e.into()))?;
        record.vtk = Some(path);
    }
    Ok(record)
}

/// Runs every mesh at the configured stabilisation, concurrently.
pub fn run_all(config: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    let case = build_case(config)?;
    let jobs = mesh_jobs(config, case.as_ref());
    jobs.par_iter()
        .map(|job| {
            let vtk = config.vtk.then(|| (config.output.as_path(), "solution.vtk".to_string()));
            run_job(config, case.as_ref(), job, config.tau, vtk)
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Scalar names in order of first appearance.
fn scalar_names(records: &[RunRecord]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in records {
        for (n, _) in &r.scalars {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
    }
    names
}

/// `mesh_id,h,n_dof,E_u,E_sigma`, then `E_r` when any run has it, then the
/// case's derived scalars. Absent values are empty cells.
pub fn results_csv(records: &[RunRecord]) -> String {
    let with_r = records.iter().any(|r| r.errors.e_r.is_some());
    let names = scalar_names(records);
    let mut s = String::from("mesh_id,h,n_dof,E_u,E_sigma");
    if with_r {
        s.push_str(",E_r");
    }
    for n in &names {
        let _ = write!(s, ",{n}");
    }
    s.push('\n');
    for r in records {
        let e = &r.errors;
        let _ = write!(s, "{},{},{},{},{}", r.mesh_id, e.h, e.n_dof, cell(e.e_u), cell(e.e_sigma));
        if with_r {
            let _ = write!(s, ",{}", cell(e.e_r));
        }
        for n in &names {
            let v = r.scalars.iter().find(|(m, _)| m == n).map(|(_, v)| *v);
            let _ = write!(s, ",{}", cell(v));
        }
        s.push('\n');
    }
    s
}

/// Least-squares slopes over the last three meshes for each error present
/// on every mesh.
pub fn fitted_rates(records: &[RunRecord]) -> Result<Vec<(&'static str, f64)>, CliError> {
    let h: Vec<f64> = records.iter().map(|r| r.errors.h).collect();
    let mut rates = Vec::new();
    let columns: [(&str, fn(&Errors) -> Option<f64>); 3] =
        [("E_u", |e| e.e_u), ("E_sigma", |e| e.e_sigma), ("E_r", |e| e.e_r)];
    for (name, get) in columns {
        let values: Option<Vec<f64>> = records.iter().map(|r| get(&r.errors)).collect();
        if let Some(v) = values {
            let rate = convergence_rate(&h, &v).map_err(|e| CliError::Run(e.into()))?;
            rates.push((name, rate));
        }
    }
    Ok(rates)
}

pub fn rates_csv(rates: &[(&str, f64)]) -> String {
    let mut s = String::from("quantity,rate\n");
    for (n, r) in rates {
        let _ = writeln!(s, "{n},{r}");
    }
    s
}

/// One row of the stabilisation sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub record: RunRecord,
    pub combined: f64,
    pub best: bool,
}

/// Runs every mesh at every stabilisation factor of the grid and marks, per
/// mesh, the factor minimising `E_u + E_sigma`.
pub fn tau_sweep(config: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let case = build_case(config)?;
    let jobs = mesh_jobs(config, case.as_ref());
    let pairs: Vec<(&MeshJob, f64)> = jobs.iter().flat_map(|j| config.tau_grid.iter().map(move |&t| (j, t))).collect();
    let records: Vec<RunRecord> = pairs
        .par_iter()
        .map(|&(job, tau)| {
            let vtk = config.vtk.then(|| (config.output.as_path(), format!("tau-{tau}.vtk")));
            run_job(config, case.as_ref(), job, tau, vtk)
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let (Some(u), Some(s)) = (r.errors.e_u, r.errors.e_sigma) else {
            return Err(CliError::Usage(format!("case `{}` has no exact solution to sweep against", config.case)));
        };
        rows.push(SweepRow { record: r, combined: u + s, best: false });
    }
    for chunk in rows.chunks_mut(config.tau_grid.len()) {
        let best = (0..chunk.len()).min_by(|&a, &b| chunk[a].combined.total_cmp(&chunk[b].combined)).expect("non-empty grid");
        chunk[best].best = true;
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("mesh_id,tau,h,n_dof,E_u,E_sigma,combined,best\n");
    for row in rows {
        let r = &row.record;
        let e = &r.errors;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.mesh_id,
            r.tau,
            e.h,
            e.n_dof,
            cell(e.e_u),
            cell(e.e_sigma),
            row.combined,
            u8::from(row.best)
        );
    }
    s
}

#[derive(Debug, Serialize)]
struct CaseMeta {
    name: String,
    parameters: Vec<(String, f64)>,
    material: fcfv::voigt::Material,
    default_length_scale: f64,
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    threads: usize,
    config: &'a RunConfig,
    case: CaseMeta,
    runs: &'a [RunRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<Vec<(&'static str, f64)>>,
}

/// `metadata.json`: resolved configuration, case parameters and, per run,
/// the mesh hash, stabilisation, solver report and errors.
pub fn metadata_json(
    command: &str,
    config: &RunConfig,
    records: &[RunRecord],
    rates: Option<Vec<(&'static str, f64)>>,
) -> Result<String, CliError> {
    let case = build_case(config)?;
    let meta = Metadata {
        tool: "fcfv",
        version: env!("CARGO_PKG_VERSION"),
        command,
        threads: rayon::current_num_threads(),
        config,
        case: CaseMeta {
            name: case.name().to_string(),
            parameters: case.parameters().into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
            material: case.material(),
            default_length_scale: case.length_scale(),
        },
        runs: records,
        rates,
    };
    serde_json::to_string_pretty(&meta).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io(path.clone(), e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, h: f64, e_u: f64, e_r: Option<f64>, scalars: Vec<(String, f64)>) -> RunRecord {
        RunRecord {
            mesh_id: id.into(),
            source: MeshSource::File(PathBuf::from(id)),
            mesh_sha256: String::new(),
            n_elements: 1,
            n_faces: 4,
            tau: 3.0,
            length_scale: 1.0,
            errors: Errors { h, n_dof: 8, e_u: Some(e_u), e_sigma: None, e_r },
            scalars,
            solver: SolveReport {
                method: fcfv::solver::Method::Direct,
                n_dof: 8,
                nnz: 64,
                iterations: 0,
                relative_residual: 0.0,
                factor_seconds: 0.0,
                solve_seconds: 0.0,
            },
            timings: Timings::default(),
            vtk: None,
        }
    }

    #[test]
    fn csv_header_is_fixed_and_missing_values_are_empty() {
        let rows = [record("a", 0.5, 0.25, None, vec![]), record("b", 0.25, 0.125, Some(0.1), vec![("tip".into(), 2.0)])];
        let csv = results_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "mesh_id,h,n_dof,E_u,E_sigma,E_r,tip");
        assert_eq!(lines[1], "a,0.5,8,0.25,,,");
        assert_eq!(lines[2], "b,0.25,8,0.125,,0.1,2");
    }

    #[test]
    fn csv_omits_radial_error_column_when_absent() {
        let csv = results_csv(&[record("a", 0.5, 0.25, None, vec![])]);
        assert!(csv.starts_with("mesh_id,h,n_dof,E_u,E_sigma\n"));
    }

    #[test]
    fn rates_cover_errors_present_on_every_mesh() {
        let rows: Vec<RunRecord> =
            (0..4).map(|i| record("m", 0.5f64.powi(i), 0.1 * 0.5f64.powi(i), (i > 0).then_some(1.0), vec![])).collect();
        let rates = fitted_rates(&rows).unwrap();
        assert_eq!(rates.len(), 1);
        assert_eq!(rates[0].0, "E_u");
        assert!((rates[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hash_is_hex_sha256_of_exchange_format() {
        let mesh = fcfv::mesh::generate_structured_2d(0, fcfv::mesh::ElementKind::Quadrilateral, fcfv::mesh::Rect::unit()).unwrap();
        let h = mesh_hash(&mesh);
        assert_eq!(h.len(), 64);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
        assert_eq!(h, mesh_hash(&mesh.clone()));
    }
}
