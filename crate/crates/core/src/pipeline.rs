//! One complete run: classify, assemble, solve, recover and measure.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::assembly::{FaceField, Scheme, Stabilization};
use crate::benchmarks::Benchmark;
use crate::mesh::{classify_faces, Mesh};
use crate::postproc::{l2_error, recover_all, ElementResult, ErrorReport};
use crate::solver::{solve, SolveReport, SolverConfig};
use crate::Error;

/// Default stabilisation factor.
pub const DEFAULT_TAU: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub tau: f64,
    /// Characteristic length; the case default when `None`.
    pub length_scale: Option<f64>,
    pub solver: SolverConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU, length_scale: None, solver: SolverConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub assemble: f64,
    pub solve: f64,
    pub recover: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub mesh: Mesh,
    pub field: FaceField,
    pub elements: Vec<ElementResult>,
    pub errors: ErrorReport,
    pub solve: SolveReport,
    pub scalars: Vec<(String, f64)>,
    pub tau: f64,
    pub length_scale: f64,
    pub timings: Timings,
}

impl RunResult {
    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Solves `case` on `mesh`, whose boundary faces are (re)tagged by the
/// case's boundary rules.
pub fn run_benchmark(case: &dyn Benchmark, mut mesh: Mesh, options: &RunOptions) -> Result<RunResult, Error> {
    let length_scale = options.length_scale.unwrap_or_else(|| case.length_scale());
    let sets = classify_faces(&mut mesh, &case.boundary_spec())?;
    let material = case.material();
    let stabilization = Stabilization::new(options.tau, length_scale)?;

    let t = Instant::now();
    let scheme = Scheme::new(&mesh, &sets, material, stabilization)?;
    let system = scheme.assemble(case)?;
    let assemble = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (solution, report) = solve(&system, &options.solver)?;
    let solve_time = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let field = scheme.face_field(&solution, case)?;
    let elements = recover_all(&scheme, &field, case)?;
    let recover = t.elapsed().as_secs_f64();

    let errors = error_report(case, &mesh, &elements, system.num_dofs())?;
    let scalars = case.derived_scalars(&mesh, &field, &elements);
    drop(scheme);
    Ok(RunResult {
        mesh,
        field,
        elements,
        errors,
        solve: report,
        scalars,
        tau: options.tau,
        length_scale,
        timings: Timings { assemble, solve: solve_time, recover },
    })
}

/// Relative L2 errors of displacement and Voigt stress against the exact
/// fields, where the case has them.
pub fn error_report(case: &dyn Benchmark, mesh: &Mesh, elements: &[ElementResult], n_dof: usize) -> Result<ErrorReport, Error> {
    let nsd = mesh.nsd();
    let h = mesh.max_element_diameter();
    let probe = mesh.centroid(0);
    let mut report = ErrorReport { h, n_dof, e_u: None, e_sigma: None, e_r: case.radial_error(mesh, elements) };
    if case.exact_displacement(&probe).is_some() {
        let u: Vec<DVector<f64>> = elements.iter().map(|r| r.u.clone()).collect();
        report.e_u = Some(l2_error(mesh, &u, |x| match case.exact_displacement(x) {
            Some(v) => v[..nsd].to_vec(),
            None => vec![f64::NAN; nsd],
        })?);
    }
    if case.exact_stress(&probe).is_some() {
        let msd = material_msd(nsd);
        let s: Vec<DVector<f64>> = elements.iter().map(|r| r.stress.clone()).collect();
        report.e_sigma = Some(l2_error(mesh, &s, |x| case.exact_stress(x).unwrap_or_else(|| vec![f64::NAN; msd]))?);
    }
    Ok(report)
}

fn material_msd(nsd: usize) -> usize {
    nsd * (nsd + 1) / 2
}
