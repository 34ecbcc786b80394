//! `fcfv`: runs benchmark cases, convergence studies and stabilisation
//! sweeps, and checks mesh files.

mod config;
mod runner;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fcfv::benchmarks::CASE_NAMES;
use fcfv::mesh::io::{format_mesh, parse_mesh, read_mesh, write_mesh};
use fcfv::mesh::{classify_faces, FaceSets, FaceTag, MeshError};
use thiserror::Error;

use config::{Overrides, RunConfig};
use runner::{RunRecord, METADATA_JSON, RATES_CSV, RESULTS_CSV, TAU_SWEEP_CSV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown case `{name}`; available cases: {}", CASE_NAMES.join(", "), name = .0)]
    UnknownCase(String),
    #[error("{path}: {err}", path = .0.display(), err = .1)]
    Io(PathBuf, std::io::Error),
    #[error("{path}: {err}", path = .0.display(), err = .1)]
    Mesh(PathBuf, MeshError),
    #[error("{0}: {1}")]
    Case(String, fcfv::Error),
    #[error(transparent)]
    Run(#[from] fcfv::Error),
    #[error("{0}")]
    Check(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::UnknownCase(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(version, about = "Face-centred finite volume solver for linear elasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a case on each configured mesh and report errors.
    Run(Overrides),
    /// Solve on at least three meshes and fit convergence rates.
    Converge(Overrides),
    /// Solve each mesh for every stabilisation factor of the grid.
    TauSweep(Overrides),
    /// Read a mesh file, check it and print a summary.
    ImportCheck {
        /// Mesh file in the exchange format.
        path: PathBuf,
        /// Replace the file's boundary tags with this case's rules.
        #[arg(long)]
        case: Option<String>,
        /// Write the checked (and retagged) mesh here.
        #[arg(long, value_name = "FILE")]
        write: Option<PathBuf>,
    },
}

fn setup(overrides: &Overrides) -> Result<RunConfig, CliError> {
    let config = overrides.resolve()?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(config)
}

fn print_records(records: &[RunRecord]) {
    for r in records {
        let e = &r.errors;
        let mut line = format!("{:<24} h {:<10.4e} dofs {:<9}", r.mesh_id, e.h, e.n_dof);
        for (name, v) in [("E_u", e.e_u), ("E_sigma", e.e_sigma), ("E_r", e.e_r)] {
            if let Some(v) = v {
                line.push_str(&format!(" {name} {v:.4e}"));
            }
        }
        for (name, v) in &r.scalars {
            line.push_str(&format!(" {name} {v:.6}"));
        }
        println!("{line}");
    }
}

fn run(overrides: &Overrides) -> Result<(), CliError> {
    let config = setup(overrides)?;
    let records = runner::run_all(&config)?;
    print_records(&records);
    runner::write_file(&config.output, RESULTS_CSV, &runner::results_csv(&records))?;
    runner::write_file(&config.output, METADATA_JSON, &runner::metadata_json("run", &config, &records, None)?)?;
    Ok(())
}

fn converge(overrides: &Overrides) -> Result<(), CliError> {
    let config = setup(overrides)?;
    let case = runner::build_case(&config)?;
    let n = runner::mesh_jobs(&config, case.as_ref()).len();
    if n < 3 {
        return Err(CliError::Usage(format!("a convergence study needs at least 3 meshes, got {n}")));
    }
    let records = runner::run_all(&config)?;
    print_records(&records);
    let rates = runner::fitted_rates(&records)?;
    for (name, r) in &rates {
        println!("rate {name} {r:.3}");
    }
    runner::write_file(&config.output, RESULTS_CSV, &runner::results_csv(&records))?;
    runner::write_file(&config.output, RATES_CSV, &runner::rates_csv(&rates))?;
    runner::write_file(&config.output, METADATA_JSON, &runner::metadata_json("converge", &config, &records, Some(rates))?)?;
    Ok(())
}

fn tau_sweep(overrides: &Overrides) -> Result<(), CliError> {
    let config = setup(overrides)?;
    let rows = runner::tau_sweep(&config)?;
    for row in &rows {
        let r = &row.record;
        println!("{:<24} tau {:<8} E_u+E_sigma {:.4e}{}", r.mesh_id, r.tau, row.combined, if row.best { "  <- best" } else { "" });
    }
    let records: Vec<RunRecord> = rows.iter().map(|r| r.record.clone()).collect();
    runner::write_file(&config.output, TAU_SWEEP_CSV, &runner::sweep_csv(&rows))?;
    runner::write_file(&config.output, METADATA_JSON, &runner::metadata_json("tau-sweep", &config, &records, None)?)?;
    Ok(())
}

fn import_check(path: &PathBuf, case: Option<&str>, write: Option<&PathBuf>) -> Result<(), CliError> {
    let mut mesh = read_mesh(path).map_err(|e| CliError::Mesh(path.clone(), e))?;
    if let Some(name) = case {
        let config = RunConfig { case: name.to_string(), ..Default::default() };
        config.validate()?;
        let case = runner::build_case(&config)?;
        classify_faces(&mut mesh, &case.boundary_spec()).map_err(|e| CliError::Mesh(path.clone(), e))?;
    }
    FaceSets::from_mesh(&mesh).map_err(|e| CliError::Mesh(path.clone(), e))?;
    let text = format_mesh(&mesh);
    let back = parse_mesh(&text).map_err(|e| CliError::Check(format!("re-reading the written mesh failed: {e}")))?;
    if back != mesh {
        return Err(CliError::Check("round trip through the exchange format changed the mesh".into()));
    }

    let mut kinds = BTreeMap::new();
    for el in mesh.elements() {
        *kinds.entry(el.kind.name()).or_insert(0usize) += 1;
    }
    let mut tags = BTreeMap::new();
    for f in mesh.boundary_faces() {
        if let FaceTag::Boundary(kind, region) = mesh.face(f).tag {
            *tags.entry((kind.name(), region.0)).or_insert(0usize) += 1;
        }
    }
    let kinds: Vec<String> = kinds.iter().map(|(k, n)| format!("{n} {k}")).collect();
    let tags: Vec<String> = tags.iter().map(|((k, r), n)| format!("{n} {k} (region {r})")).collect();
    println!("mesh {}", path.display());
    println!("dimension {}", mesh.nsd());
    println!("nodes {}", mesh.nodes().len());
    println!("elements {} ({})", mesh.num_elements(), kinds.join(", "));
    println!("interior faces {}", mesh.num_interior_faces());
    println!("boundary faces {} ({})", mesh.num_faces() - mesh.num_interior_faces(), tags.join(", "));
    println!("measure {}", mesh.volumes().iter().sum::<f64>());
    println!("max element diameter {}", mesh.max_element_diameter());
    println!("sha256 {}", runner::mesh_hash(&mesh));
    println!("round trip exact");
    if let Some(out) = write {
        write_mesh(&mesh, out).map_err(|e| CliError::Mesh(out.clone(), e))?;
        println!("written {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(o) => run(o),
        Command::Converge(o) => converge(o),
        Command::TauSweep(o) => tau_sweep(o),
        Command::ImportCheck { path, case, write } => import_check(path, case.as_deref(), write.as_ref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
