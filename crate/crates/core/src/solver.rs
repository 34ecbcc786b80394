//! Linear solvers for the symmetric face system.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Side;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::GlobalSystem;
use crate::sparse::CsrMatrix;

/// Systems up to this many unknowns use the direct solver by default.
pub const DIRECT_LIMIT: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Direct below [`DIRECT_LIMIT`] unknowns, CG above.
    Auto,
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { method: Method::Auto, cg_tolerance: 1e-9, cg_max_iterations: 100_000, preconditioner: Preconditioner::Jacobi }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.cg_tolerance > 0.0 && self.cg_tolerance < 1.0) {
            return Err(SolverError::InvalidConfig(format!("cg tolerance {} not in (0, 1)", self.cg_tolerance)));
        }
        if self.cg_max_iterations == 0 {
            return Err(SolverError::InvalidConfig("cg max iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub n_dof: usize,
    pub nnz: usize,
    /// CG iterations; 0 for the direct solver.
    pub iterations: usize,
    /// `||K u - f|| / ||f||` of the returned solution.
    pub relative_residual: f64,
    pub factor_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("CG did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64, best: Vec<f64> },
    #[error("sparse Cholesky factorisation failed ({0}); the matrix may be indefinite, try the CG solver")]
    Factorization(String),
    #[error("dimension mismatch: matrix {matrix}, right-hand side {rhs}")]
    Dimension { matrix: usize, rhs: usize },
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| q - p).collect();
    let nb = norm(b);
    if nb > 0.0 {
        norm(&r) / nb
    } else {
        norm(&r)
    }
}

/// Solves the assembled face system.
pub fn solve(system: &GlobalSystem, config: &SolverConfig) -> Result<(Vec<f64>, SolveReport), SolverError> {
    solve_matrix(&system.matrix, &system.rhs, config)
}

pub fn solve_matrix(a: &CsrMatrix, b: &[f64], config: &SolverConfig) -> Result<(Vec<f64>, SolveReport), SolverError> {
    config.validate()?;
    if a.dim() != b.len() {
        return Err(SolverError::Dimension { matrix: a.dim(), rhs: b.len() });
    }
    let method = match config.method {
        Method::Auto if a.dim() <= DIRECT_LIMIT => Method::Direct,
        Method::Auto => Method::Cg,
        m => m,
    };
    let mut report = SolveReport {
        method,
        n_dof: a.dim(),
        nnz: a.nnz(),
        iterations: 0,
        relative_residual: 0.0,
        factor_seconds: 0.0,
        solve_seconds: 0.0,
    };
    if a.dim() == 0 {
        return Ok((Vec::new(), report));
    }
    let x = match method {
        Method::Direct => {
            let (x, tf, ts) = cholesky_solve(a, b)?;
            report.factor_seconds = tf;
            report.solve_seconds = ts;
            x
        }
        _ => {
            let t = Instant::now();
            let (x, it) = conjugate_gradient(a, b, config)?;
            report.solve_seconds = t.elapsed().as_secs_f64();
            report.iterations = it;
            x
        }
    };
    report.relative_residual = relative_residual(a, &x, b);
    Ok((x, report))
}

/// Sparse `L L^T` solve. The CSR arrays of a symmetric matrix are read as
/// its compressed columns.
fn cholesky_solve(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, f64, f64), SolverError> {
    let n = a.dim();
    let t = Instant::now();
    let symbolic = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
    let mat = SparseColMatRef::<usize, f64>::new(symbolic, a.values());
    let llt = mat.sp_cholesky(Side::Lower).map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
    let tf = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let mut x = b.to_vec();
    llt.solve_in_place(faer::ColMut::from_slice_mut(&mut x));
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Factorization("non-finite solution".into()));
    }
    Ok((x, tf, t.elapsed().as_secs_f64()))
}

/// Conjugate gradients, stopping on `||r|| <= tol ||b||`.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], config: &SolverConfig) -> Result<(Vec<f64>, usize), SolverError> {
    let n = a.dim();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let inv_diag: Option<Vec<f64>> = match config.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect()),
    };
    let precondition = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(m) => z.iter_mut().zip(r.iter().zip(m)).for_each(|(zi, (ri, mi))| *zi = ri * mi),
        None => z.copy_from_slice(r),
    };
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = config.cg_tolerance * bnorm;
    let mut best = (norm(&r), x.clone());
    for it in 1..=config.cg_max_iterations {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = norm(&r);
        if rn <= target {
            return Ok((x, it));
        }
        if rn < best.0 {
            best = (rn, x.clone());
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = relative_residual(a, &best.1, b);
    Err(SolverError::NotConverged { iterations: config.cg_max_iterations, residual, best: best.1 })
}
