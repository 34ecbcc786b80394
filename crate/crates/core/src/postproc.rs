//! Element fields from the face solution, error norms and VTK export.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{AssemblyError, FaceField, Loads, Scheme};
use crate::mesh::{Mesh, Point};
use crate::voigt::{von_mises, VoigtStress};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PostprocError {
    #[error("field has {got} entries, mesh has {expected} elements")]
    FieldSize { expected: usize, got: usize },
    #[error("section line at ({0}, {1}) does not meet the mesh")]
    SectionMissed(f64, f64),
    #[error("rate fit needs at least two meshes with positive h and error, got {0}")]
    RateData(usize),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// Recovered constant fields of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementResult {
    pub u: DVector<f64>,
    pub l: DVector<f64>,
    /// Voigt stress `-D~ L`.
    pub stress: DVector<f64>,
    pub von_mises: f64,
}

/// Applies the closed-form local solution on every element and derives
/// stresses.
pub fn recover_all(scheme: &Scheme, field: &FaceField, loads: &dyn Loads) -> Result<Vec<ElementResult>, PostprocError> {
    let sols = scheme.recover_all(field, loads)?;
    let dt = scheme.d_tilde().as_matrix();
    let material = *scheme.material();
    Ok(sols
        .into_par_iter()
        .map(|s| {
            let stress = -(dt * &s.l);
            let vm = von_mises(&VoigtStress(stress.clone()), &material);
            ElementResult { u: s.u, l: s.l, stress, von_mises: vm }
        })
        .collect())
}

/// Relative L2 error; `absolute` is set when the exact field vanishes and
/// the absolute norm is reported instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Error {
    pub value: f64,
    pub absolute: bool,
}

/// Midpoint-rule L2 error of a piecewise-constant field against an exact
/// field sampled at element centroids.
pub fn l2_error<F>(mesh: &Mesh, numerical: &[DVector<f64>], exact: F) -> Result<L2Error, PostprocError>
where
    F: Fn(&Point) -> Vec<f64> + Sync,
{
    if numerical.len() != mesh.num_elements() {
        return Err(PostprocError::FieldSize { expected: mesh.num_elements(), got: numerical.len() });
    }
    let (num, den) = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let x = exact(&mesh.centroid(e));
            let v = &numerical[e];
            let mut d2 = 0.0;
            let mut x2 = 0.0;
            for (k, xk) in x.iter().enumerate() {
                d2 += (v[k] - xk).powi(2);
                x2 += xk * xk;
            }
            let w = mesh.volume(e);
            (w * d2, w * x2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if den > 0.0 {
        Ok(L2Error { value: (num / den).sqrt(), absolute: false })
    } else {
        Ok(L2Error { value: num.sqrt(), absolute: true })
    }
}

/// Relative error of the radial displacement along the axial column of
/// elements whose centroids lie closest to the line `(x1, x2) = section`.
/// Each element is weighted by its axial extent.
pub fn radial_error<F>(mesh: &Mesh, u: &[DVector<f64>], section: [f64; 2], exact_ur: F) -> Result<f64, PostprocError>
where
    F: Fn(f64) -> f64,
{
    if u.len() != mesh.num_elements() {
        return Err(PostprocError::FieldSize { expected: mesh.num_elements(), got: u.len() });
    }
    let dist = |e: usize| {
        let c = mesh.centroid(e);
        (c[0] - section[0]).hypot(c[1] - section[1])
    };
    let best = (0..mesh.num_elements()).map(dist).fold(f64::INFINITY, f64::min);
    // Elements on the column share the in-plane centroid up to round-off.
    let tol = 1e-9 * (1.0 + best);
    let mut column: Vec<usize> = (0..mesh.num_elements()).filter(|&e| dist(e) <= best + tol).collect();
    if column.is_empty() {
        return Err(PostprocError::SectionMissed(section[0], section[1]));
    }
    // Keep a single column if two are equidistant.
    let c0 = mesh.centroid(column[0]);
    column.retain(|&e| {
        let c = mesh.centroid(e);
        (c[0] - c0[0]).hypot(c[1] - c0[1]) <= tol
    });
    let (mut num, mut den) = (0.0, 0.0);
    for &e in &column {
        let c = mesh.centroid(e);
        let th = c[1].atan2(c[0]);
        let ur_h = u[e][0] * th.cos() + u[e][1] * th.sin();
        let nodes = &mesh.elements()[e].nodes;
        let (lo, hi) = nodes
            .iter()
            .map(|&n| mesh.nodes()[n][2])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), z| (a.min(z), b.max(z)));
        let w = hi - lo;
        let ur = exact_ur(c[2]);
        num += w * (ur_h - ur).powi(2);
        den += w * ur * ur;
    }
    if den > 0.0 {
        Ok((num / den).sqrt())
    } else {
        Ok(num.sqrt())
    }
}

/// Least-squares slope of `log e` against `log h` over the last three
/// points (or all points when fewer are given).
pub fn convergence_rate(h: &[f64], e: &[f64]) -> Result<f64, PostprocError> {
    let n = h.len().min(e.len());
    let start = n.saturating_sub(3);
    let pts: Vec<(f64, f64)> = (start..n).filter(|&i| h[i] > 0.0 && e[i] > 0.0).map(|i| (h[i].ln(), e[i].ln())).collect();
    if pts.len() < 2 {
        return Err(PostprocError::RateData(pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(PostprocError::RateData(1));
    }
    Ok(sxy / sxx)
}

/// Error summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub h: f64,
    pub n_dof: usize,
    pub e_u: Option<L2Error>,
    pub e_sigma: Option<L2Error>,
    pub e_r: Option<f64>,
}

/// Legacy VTK ASCII unstructured grid with displacement, stress and von
/// Mises stress as cell data.
pub fn format_vtk(mesh: &Mesh, results: &[ElementResult]) -> Result<String, PostprocError> {
    if results.len() != mesh.num_elements() {
        return Err(PostprocError::FieldSize { expected: mesh.num_elements(), got: results.len() });
    }
    let nsd = mesh.nsd();
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "# vtk DataFile Version 3.0\nfcfv solution\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(w, "POINTS {} double", mesh.nodes().len()).unwrap();
    for p in mesh.nodes() {
        writeln!(w, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    let size: usize = mesh.elements().iter().map(|e| e.nodes.len() + 1).sum();
    writeln!(w, "CELLS {} {}", mesh.num_elements(), size).unwrap();
    for el in mesh.elements() {
        let ids: Vec<String> = el.nodes.iter().map(|n| n.to_string()).collect();
        writeln!(w, "{} {}", el.nodes.len(), ids.join(" ")).unwrap();
    }
    writeln!(w, "CELL_TYPES {}", mesh.num_elements()).unwrap();
    for el in mesh.elements() {
        writeln!(w, "{}", el.kind.vtk_cell_type()).unwrap();
    }
    writeln!(w, "CELL_DATA {}", mesh.num_elements()).unwrap();
    writeln!(w, "VECTORS displacement double").unwrap();
    for r in results {
        let z = if nsd == 3 { r.u[2] } else { 0.0 };
        writeln!(w, "{} {} {}", r.u[0], r.u[1], z).unwrap();
    }
    writeln!(w, "SCALARS von_mises double 1\nLOOKUP_TABLE default").unwrap();
    for r in results {
        writeln!(w, "{}", r.von_mises).unwrap();
    }
    let msd = results.first().map_or(0, |r| r.stress.len());
    writeln!(w, "FIELD fields 1\nstress {} {} double", msd, mesh.num_elements()).unwrap();
    for r in results {
        let v: Vec<String> = r.stress.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", v.join(" ")).unwrap();
    }
    Ok(s)
}

pub fn export_vtk(mesh: &Mesh, results: &[ElementResult], path: impl AsRef<Path>) -> Result<(), PostprocError> {
    let text = format_vtk(mesh, results)?;
    std::fs::write(path.as_ref(), text).map_err(|e| PostprocError::Io(format!("{}: {e}", path.as_ref().display())))
}
