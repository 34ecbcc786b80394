//! Voigt-notation algebra for isotropic linear elasticity.
//!
//! Symmetric tensors are stored as vectors of their non-redundant components:
//! `[s11, s22, s12]` in 2D and `[s11, s22, s33, s12, s13, s23]` in 3D. Every
//! module in the crate relies on this single ordering.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoigtError {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("Poisson ratio 0.5 gives a singular constitutive matrix")]
    SingularMaterial,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("normal vector has length {0}, expected a unit vector")]
    NotUnit(f64),
    #[error("spectral decomposition failed: {0}")]
    Decomposition(String),
}

/// Constitutive model. Determines the spatial dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    PlaneStress,
    PlaneStrain,
    ThreeD,
}

impl Model {
    pub fn nsd(self) -> usize {
        match self {
            Model::PlaneStress | Model::PlaneStrain => 2,
            Model::ThreeD => 3,
        }
    }

    pub fn msd(self) -> usize {
        msd(self.nsd())
    }
}

/// Number of Voigt components for `nsd` spatial dimensions.
pub fn msd(nsd: usize) -> usize {
    nsd * (nsd + 1) / 2
}

/// Homogeneous isotropic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub model: Model,
}

impl Material {
    pub fn new(young_modulus: f64, poisson_ratio: f64, model: Model) -> Result<Self, VoigtError> {
        if !(young_modulus.is_finite() && young_modulus > 0.0) {
            return Err(VoigtError::InvalidMaterial(format!(
                "Young modulus must be positive, got {young_modulus}"
            )));
        }
        if poisson_ratio == 0.5 {
            return Err(VoigtError::SingularMaterial);
        }
        if !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
            return Err(VoigtError::InvalidMaterial(format!(
                "Poisson ratio must lie in (-1, 0.5), got {poisson_ratio}"
            )));
        }
        Ok(Self { young_modulus, poisson_ratio, model })
    }

    pub fn nsd(&self) -> usize {
        self.model.nsd()
    }

    pub fn msd(&self) -> usize {
        self.model.msd()
    }

    pub fn shear_modulus(&self) -> f64 {
        self.young_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// Plane-model selector: 1 for plane stress, 2 for plane strain.
    pub fn plane_factor(&self) -> Option<f64> {
        match self.model {
            Model::PlaneStress => Some(1.0),
            Model::PlaneStrain => Some(2.0),
            Model::ThreeD => None,
        }
    }
}

/// Symmetric positive definite `msd x msd` matrix acting on Voigt vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VoigtMatrix(DMatrix<f64>);

impl VoigtMatrix {
    /// Wraps a square matrix after checking its size is a valid Voigt size.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self, VoigtError> {
        if m.nrows() != m.ncols() || !(m.nrows() == 3 || m.nrows() == 6) {
            return Err(VoigtError::Dimension { expected: 3, got: m.nrows() });
        }
        Ok(Self(m))
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn msd(&self) -> usize {
        self.0.nrows()
    }
}

/// Stress vector in Voigt ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct VoigtStress(pub DVector<f64>);

impl VoigtStress {
    pub fn components(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Constitutive matrix `D` with `sigma_V = D eps_V`.
pub fn elasticity_matrix(material: &Material) -> Result<VoigtMatrix, VoigtError> {
    let e = material.young_modulus;
    let nu = material.poisson_ratio;
    if nu == 0.5 {
        return Err(VoigtError::SingularMaterial);
    }
    let m = match material.plane_factor() {
        Some(theta) => {
            let c = e / ((1.0 + nu) * (1.0 - theta * nu));
            let diag = 1.0 + (1.0 - theta) * nu;
            #[rustfmt::skip]
            let m = DMatrix::from_row_slice(3, 3, &[
                c * diag, c * nu, 0.0,
                c * nu, c * diag, 0.0,
                0.0, 0.0, c * (1.0 - theta * nu) / 2.0,
            ]);
            m
        }
        None => {
            let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let mut m = DMatrix::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    m[(i, j)] = if i == j { c * (1.0 - nu) } else { c * nu };
                }
                m[(i + 3, i + 3)] = c * (1.0 - 2.0 * nu) / 2.0;
            }
            m
        }
    };
    Ok(VoigtMatrix(m))
}

/// Symmetric square root `D~ = V L^(1/2) V^T` of a symmetric positive definite matrix.
pub fn sqrt_elasticity_matrix(d: &VoigtMatrix) -> Result<VoigtMatrix, VoigtError> {
    let m = d.as_matrix();
    let norm = m.norm();
    let asym = (m - m.transpose()).norm();
    if asym > 1e-14 * norm.max(f64::MIN_POSITIVE) {
        return Err(VoigtError::Decomposition(format!(
            "matrix is not symmetric (asymmetry {asym:e})"
        )));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut sqrt_vals = eig.eigenvalues.clone();
    for v in sqrt_vals.iter_mut() {
        if *v < -1e-10 * norm {
            return Err(VoigtError::Decomposition(format!("negative eigenvalue {v:e}")));
        }
        *v = v.max(1e-300).sqrt();
    }
    let q = &eig.eigenvectors;
    let r = q * DMatrix::from_diagonal(&sqrt_vals) * q.transpose();
    // Remove round-off asymmetry so downstream products stay exactly symmetric.
    let r = (&r + r.transpose()) * 0.5;
    Ok(VoigtMatrix(r))
}

fn check_unit(n: &[f64]) -> Result<(), VoigtError> {
    let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (len - 1.0).abs() > 1e-12 {
        return Err(VoigtError::NotUnit(len));
    }
    Ok(())
}

/// Face-normal matrix `N` (`msd x nsd`) with `N^T s_V = S n` for symmetric `S`.
pub fn normal_matrix(n: &[f64]) -> Result<DMatrix<f64>, VoigtError> {
    check_unit(n)?;
    Ok(normal_matrix_unchecked(n))
}

pub(crate) fn normal_matrix_unchecked(n: &[f64]) -> DMatrix<f64> {
    match n.len() {
        2 => {
            #[rustfmt::skip]
            let m = DMatrix::from_row_slice(3, 2, &[
                n[0], 0.0,
                0.0, n[1],
                n[1], n[0],
            ]);
            m
        }
        _ => {
            #[rustfmt::skip]
            let m = DMatrix::from_row_slice(6, 3, &[
                n[0], 0.0, 0.0,
                0.0, n[1], 0.0,
                0.0, 0.0, n[2],
                n[1], n[0], 0.0,
                n[2], 0.0, n[0],
                0.0, n[2], n[1],
            ]);
            m
        }
    }
}

/// Normal and tangential projectors `(P_n, P_t)`.
pub fn projection_matrices(n: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), VoigtError> {
    check_unit(n)?;
    Ok(projections_unchecked(n))
}

pub(crate) fn projections_unchecked(n: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let nv = DVector::from_column_slice(n);
    let pn = &nv * nv.transpose();
    let pt = DMatrix::identity(n.len(), n.len()) - &pn;
    (pn, pt)
}

/// Stress from the mixed variable: `sigma_V = -D~ L`.
pub fn stress_from_mixed(l: &DVector<f64>, d_tilde: &VoigtMatrix) -> Result<VoigtStress, VoigtError> {
    if l.len() != d_tilde.msd() {
        return Err(VoigtError::Dimension { expected: d_tilde.msd(), got: l.len() });
    }
    Ok(VoigtStress(-(d_tilde.as_matrix() * l)))
}

/// Voigt strain `[e11, e22, g12]` / `[e11, e22, e33, g12, g13, g23]` from a
/// displacement gradient `grad[i][j] = du_i/dx_j`.
pub fn strain_from_gradient(grad: &DMatrix<f64>) -> DVector<f64> {
    let g = |i: usize, j: usize| grad[(i, j)];
    match grad.nrows() {
        2 => DVector::from_vec(vec![g(0, 0), g(1, 1), g(0, 1) + g(1, 0)]),
        _ => DVector::from_vec(vec![
            g(0, 0),
            g(1, 1),
            g(2, 2),
            g(0, 1) + g(1, 0),
            g(0, 2) + g(2, 0),
            g(1, 2) + g(2, 1),
        ]),
    }
}

/// Von Mises equivalent stress.
///
/// 2D stresses are embedded in 3D through the plane model: `s33 = 0` for
/// plane stress and `s33 = nu (s11 + s22)` for plane strain. The paper this
/// solver reproduces plots Von Mises stress without defining it; this is the
/// usual second-invariant definition.
pub fn von_mises(s: &VoigtStress, material: &Material) -> f64 {
    let c = s.components();
    let (s11, s22, s33, s12, s13, s23) = match c.len() {
        3 => {
            let s33 = match material.model {
                Model::PlaneStrain => material.poisson_ratio * (c[0] + c[1]),
                _ => 0.0,
            };
            (c[0], c[1], s33, c[2], 0.0, 0.0)
        }
        _ => (c[0], c[1], c[2], c[3], c[4], c[5]),
    };
    let j2 = ((s11 - s22).powi(2) + (s22 - s33).powi(2) + (s33 - s11).powi(2)) / 6.0
        + s12 * s12
        + s13 * s13
        + s23 * s23;
    (3.0 * j2).max(0.0).sqrt()
}
