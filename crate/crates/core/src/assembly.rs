//! Element-wise closed-form local solves and assembly of the global system
//! for the face unknowns.
//!
//! The global equations are assembled in symmetric form. Rows belonging to
//! interior faces carry the sign that makes the elemental matrices positive
//! semi-definite, and on symmetry faces (`xi = 0`) the coupling acts on the
//! tangential part of the face unknown only, the normal part being fixed to
//! zero by its own row. Both changes leave the solution untouched.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{FaceSets, FaceTag, Mesh, Point, Region};
use crate::sparse::CsrMatrix;
use crate::voigt::{
    elasticity_matrix, normal_matrix_unchecked, projections_unchecked, sqrt_elasticity_matrix, Material, VoigtError,
    VoigtMatrix,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("{0} must be positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("material is {material}D but mesh is {mesh}D")]
    DimensionMismatch { material: usize, mesh: usize },
    #[error("element {0} has no faces")]
    EmptyElement(usize),
    #[error("non-finite {what} at {location}")]
    NonFinite { what: &'static str, location: String },
    #[error("face {face} has tag {tag:?} but appears among the unknown faces")]
    InconsistentTag { face: usize, tag: FaceTag },
    #[error("face field has {got} values, expected {expected}")]
    FieldSize { expected: usize, got: usize },
    #[error(transparent)]
    Voigt(#[from] VoigtError),
}

/// Body force and boundary data of a problem. Values beyond `nsd` are ignored.
pub trait Loads: Sync {
    fn body_force(&self, x: &Point) -> [f64; 3];
    fn dirichlet(&self, region: Region, x: &Point) -> [f64; 3];
    /// Traction `g` on a Neumann face with outward unit normal `normal`.
    fn traction(&self, region: Region, x: &Point, normal: &Point) -> [f64; 3];
}

/// Isotropic stabilisation `tau_j = tau (E / l) I` on every face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stabilization {
    pub tau: f64,
    pub length_scale: f64,
}

impl Stabilization {
    pub fn new(tau: f64, length_scale: f64) -> Result<Self, AssemblyError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(AssemblyError::NonPositive("tau", tau));
        }
        if !(length_scale > 0.0) || !length_scale.is_finite() {
            return Err(AssemblyError::NonPositive("length scale", length_scale));
        }
        Ok(Self { tau, length_scale })
    }

    /// Scalar multiplying the identity in `tau_j`.
    pub fn coefficient(&self, material: &Material) -> f64 {
        self.tau * material.young_modulus / self.length_scale
    }
}

/// `tau_j` as a matrix.
pub fn stabilization_tensor(material: &Material, tau: f64, length_scale: f64) -> Result<DMatrix<f64>, AssemblyError> {
    let s = Stabilization::new(tau, length_scale)?;
    Ok(DMatrix::identity(material.nsd(), material.nsd()) * s.coefficient(material))
}

/// Element quantities independent of the face unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPrecomp {
    /// `alpha = sum_A |Gamma| tau`.
    pub alpha: DMatrix<f64>,
    /// `beta = |Omega| f + sum_D |Gamma| tau u_D`.
    pub beta: DVector<f64>,
    /// `z = sum_D |Gamma| D~^T N u_D`.
    pub z: DVector<f64>,
}

/// Constant mixed variable and displacement of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSolution {
    pub l: DVector<f64>,
    pub u: DVector<f64>,
}

/// Elemental block matrix and vector over the element's unknown faces.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementContribution {
    /// Global block index of each local unknown face.
    pub blocks: Vec<usize>,
    pub k: DMatrix<f64>,
    pub f: DVector<f64>,
}

/// Face displacements: the unknowns on free faces and the Dirichlet data
/// elsewhere, `nsd` values per face.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    nsd: usize,
    values: Vec<f64>,
}

impl FaceField {
    pub fn new(nsd: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len() % nsd, 0);
        Self { nsd, values }
    }

    pub fn nsd(&self) -> usize {
        self.nsd
    }

    pub fn get(&self, f: usize) -> &[f64] {
        &self.values[f * self.nsd..(f + 1) * self.nsd]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_faces(&self) -> usize {
        self.values.len() / self.nsd
    }
}

/// Assembled system `K u = f` for the face unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub nsd: usize,
    /// Face index of each block of unknowns.
    pub free_faces: Vec<usize>,
}

impl GlobalSystem {
    pub fn num_dofs(&self) -> usize {
        self.rhs.len()
    }
}

/// Per-face role in the global equations.
enum Role {
    Interior,
    /// Generalised Neumann face with its `xi`.
    Boundary(f64),
}

/// Discretisation of one problem on one mesh.
pub struct Scheme<'a> {
    mesh: &'a Mesh,
    sets: &'a FaceSets,
    material: Material,
    stabilization: Stabilization,
    d_tilde: VoigtMatrix,
    tau: f64,
}

fn finite(v: &[f64], what: &'static str, location: impl FnOnce() -> String) -> Result<(), AssemblyError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(AssemblyError::NonFinite { what, location: location() })
    }
}

impl<'a> Scheme<'a> {
    pub fn new(
        mesh: &'a Mesh,
        sets: &'a FaceSets,
        material: Material,
        stabilization: Stabilization,
    ) -> Result<Self, AssemblyError> {
        if material.nsd() != mesh.nsd() {
            return Err(AssemblyError::DimensionMismatch { material: material.nsd(), mesh: mesh.nsd() });
        }
        let d_tilde = sqrt_elasticity_matrix(&elasticity_matrix(&material)?)?;
        let tau = stabilization.coefficient(&material);
        Ok(Self { mesh, sets, material, stabilization, d_tilde, tau })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn sets(&self) -> &FaceSets {
        self.sets
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn stabilization(&self) -> Stabilization {
        self.stabilization
    }

    pub fn d_tilde(&self) -> &VoigtMatrix {
        &self.d_tilde
    }

    /// Scalar `tau E / l`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn nsd(&self) -> usize {
        self.mesh.nsd()
    }

    fn normal(&self, e: usize, k: usize) -> (usize, f64, Vec<f64>) {
        let r = self.mesh.element_faces(e)[k];
        let n = self.mesh.outward_normal(r);
        (r.face, self.mesh.face(r.face).area, n[..self.nsd()].to_vec())
    }

    /// `D~^T N_j` for the outward normal `n`.
    fn flux_matrix(&self, n: &[f64]) -> DMatrix<f64> {
        self.d_tilde.as_matrix().transpose() * normal_matrix_unchecked(n)
    }

    fn dirichlet_value(&self, f: usize, loads: &dyn Loads) -> Result<DVector<f64>, AssemblyError> {
        let face = self.mesh.face(f);
        let region = face.tag.region().expect("Dirichlet faces carry a region");
        let v = loads.dirichlet(region, &face.barycenter);
        let v = &v[..self.nsd()];
        finite(v, "Dirichlet data", || format!("face {f}"))?;
        Ok(DVector::from_column_slice(v))
    }

    pub fn local_precompute(&self, e: usize, loads: &dyn Loads) -> Result<LocalPrecomp, AssemblyError> {
        let nsd = self.nsd();
        let msd = self.material.msd();
        let faces = self.mesh.element_faces(e);
        if faces.is_empty() {
            return Err(AssemblyError::EmptyElement(e));
        }
        let perimeter: f64 = faces.iter().map(|r| self.mesh.face(r.face).area).sum();
        let alpha = DMatrix::identity(nsd, nsd) * (self.tau * perimeter);
        let x = self.mesh.centroid(e);
        let fb = loads.body_force(&x);
        finite(&fb[..nsd], "body force", || format!("element {e}"))?;
        let mut beta = DVector::from_column_slice(&fb[..nsd]) * self.mesh.volume(e);
        let mut z = DVector::zeros(msd);
        for &k in self.sets.dirichlet(e) {
            let (f, area, n) = self.normal(e, k);
            let ud = self.dirichlet_value(f, loads)?;
            beta += &ud * (area * self.tau);
            z += self.flux_matrix(&n) * &ud * area;
        }
        Ok(LocalPrecomp { alpha, beta, z })
    }

    /// Closed-form `(L_e, u_e)` given the face displacements.
    pub fn recover_local_solution(
        &self,
        e: usize,
        pre: &LocalPrecomp,
        field: &FaceField,
    ) -> Result<ElementSolution, AssemblyError> {
        if field.num_faces() != self.mesh.num_faces() || field.nsd() != self.nsd() {
            return Err(AssemblyError::FieldSize {
                expected: self.mesh.num_faces() * self.nsd(),
                got: field.values().len(),
            });
        }
        let vol = self.mesh.volume(e);
        let mut l = -&pre.z;
        let mut rhs = pre.beta.clone();
        for &k in self.sets.non_dirichlet(e) {
            let (f, area, n) = self.normal(e, k);
            let uh = DVector::from_column_slice(field.get(f));
            l -= self.flux_matrix(&n) * &uh * area;
            rhs += uh * (area * self.tau);
        }
        l /= vol;
        let alpha_inv = pre.alpha.clone().try_inverse().expect("alpha is a positive multiple of the identity");
        Ok(ElementSolution { l, u: alpha_inv * rhs })
    }

    fn role(&self, f: usize) -> Result<Role, AssemblyError> {
        let tag = self.mesh.face(f).tag;
        match tag {
            FaceTag::Interior => Ok(Role::Interior),
            t => t.xi().map(Role::Boundary).ok_or(AssemblyError::InconsistentTag { face: f, tag }),
        }
    }

    pub fn elemental_contribution(
        &self,
        e: usize,
        pre: &LocalPrecomp,
        loads: &dyn Loads,
    ) -> Result<ElementContribution, AssemblyError> {
        let nsd = self.nsd();
        let free = self.sets.non_dirichlet(e);
        let nb = free.len();
        let vol = self.mesh.volume(e);
        let a = pre.alpha[(0, 0)];
        let tau = self.tau;

        struct Local {
            area: f64,
            g: DMatrix<f64>,
            /// Row/column projector, `None` for the identity.
            q: Option<DMatrix<f64>>,
            b: DMatrix<f64>,
            load: DVector<f64>,
        }
        let mut blocks = Vec::with_capacity(nb);
        let mut loc = Vec::with_capacity(nb);
        for &k in free {
            let (f, area, n) = self.normal(e, k);
            blocks.push(self.sets.block(f).expect("non-Dirichlet faces carry unknowns"));
            let g = self.flux_matrix(&n);
            let mut load = DVector::zeros(nsd);
            let (q, b) = match self.role(f)? {
                Role::Interior => (None, DMatrix::identity(nsd, nsd) * tau),
                Role::Boundary(xi) => {
                    let (pn, pt) = projections_unchecked(&n);
                    let q = &pt + &pn * xi;
                    let b = &pn * (1.0 - xi) + &q * tau * &q;
                    if xi != 0.0 {
                        let face = self.mesh.face(f);
                        let mut nn = [0.0; 3];
                        nn[..nsd].copy_from_slice(&n);
                        let t = loads.traction(face.tag.region().unwrap(), &face.barycenter, &nn);
                        finite(&t[..nsd], "traction", || format!("face {f}"))?;
                        load = DVector::from_column_slice(&t[..nsd]) * xi;
                    }
                    (if xi == 1.0 { None } else { Some(q) }, b)
                }
            };
            loc.push(Local { area, g, q, b, load });
        }

        let mut kmat = DMatrix::zeros(nb * nsd, nb * nsd);
        let mut fvec = DVector::zeros(nb * nsd);
        let inv_vol = 1.0 / vol;
        let tt = tau * tau / a;
        for i in 0..nb {
            let li = &loc[i];
            for j in i..nb {
                let lj = &loc[j];
                let mut m = li.g.transpose() * &lj.g * (-inv_vol);
                for d in 0..nsd {
                    m[(d, d)] += tt;
                }
                if let Some(q) = &li.q {
                    m = q * m;
                }
                if let Some(q) = &lj.q {
                    m *= q;
                }
                let mut blk = m * (-li.area * lj.area);
                if i == j {
                    blk += &li.b * li.area;
                }
                for r in 0..nsd {
                    for c in 0..nsd {
                        kmat[(i * nsd + r, j * nsd + c)] = blk[(r, c)];
                        kmat[(j * nsd + c, i * nsd + r)] = blk[(r, c)];
                    }
                }
            }
            let mut v = &pre.beta * (tau / a) - li.g.transpose() * &pre.z * inv_vol;
            if let Some(q) = &li.q {
                v = q * v;
            }
            v += &li.load;
            fvec.rows_mut(i * nsd, nsd).copy_from(&(v * li.area));
        }
        Ok(ElementContribution { blocks, k: kmat, f: fvec })
    }

    /// Block sparsity: for every block row, the sorted block columns coupled
    /// through a shared element.
    fn block_pattern(&self) -> Vec<Vec<usize>> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); self.sets.num_blocks()];
        for e in 0..self.mesh.num_elements() {
            let blocks: Vec<usize> = self
                .sets
                .non_dirichlet(e)
                .iter()
                .map(|&k| self.sets.block(self.mesh.element_faces(e)[k].face).unwrap())
                .collect();
            for &bi in &blocks {
                rows[bi].extend_from_slice(&blocks);
            }
        }
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
        }
        rows
    }

    /// Assembles the global system. Elements are processed in parallel in
    /// fixed-size chunks and scattered serially in element order, so the
    /// result does not depend on the thread count.
    pub fn assemble(&self, loads: &dyn Loads) -> Result<GlobalSystem, AssemblyError> {
        let nsd = self.nsd();
        let pattern = self.block_pattern();
        let n = self.sets.num_blocks() * nsd;
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for cols in &pattern {
            for _ in 0..nsd {
                for &bc in cols {
                    col_idx.extend((0..nsd).map(|c| bc * nsd + c));
                }
                row_ptr.push(col_idx.len());
            }
        }
        let mut values = vec![0.0; col_idx.len()];
        let mut rhs = vec![0.0; n];

        const CHUNK: usize = 2048;
        let ne = self.mesh.num_elements();
        for start in (0..ne).step_by(CHUNK) {
            let end = (start + CHUNK).min(ne);
            let contribs: Vec<ElementContribution> = (start..end)
                .into_par_iter()
                .map(|e| {
                    let pre = self.local_precompute(e, loads)?;
                    self.elemental_contribution(e, &pre, loads)
                })
                .collect::<Result<_, _>>()?;
            for c in &contribs {
                for (i, &bi) in c.blocks.iter().enumerate() {
                    let cols = &pattern[bi];
                    for (j, &bj) in c.blocks.iter().enumerate() {
                        let slot = cols.binary_search(&bj).unwrap();
                        for r in 0..nsd {
                            let base = row_ptr[bi * nsd + r] + slot * nsd;
                            for cc in 0..nsd {
                                values[base + cc] += c.k[(i * nsd + r, j * nsd + cc)];
                            }
                        }
                    }
                    for r in 0..nsd {
                        rhs[bi * nsd + r] += c.f[i * nsd + r];
                    }
                }
            }
        }
        Ok(GlobalSystem {
            matrix: CsrMatrix::from_parts(n, row_ptr, col_idx, values),
            rhs,
            nsd,
            free_faces: self.sets.free_faces(),
        })
    }

    /// Face displacements from the solution vector plus Dirichlet data.
    pub fn face_field(&self, solution: &[f64], loads: &dyn Loads) -> Result<FaceField, AssemblyError> {
        let nsd = self.nsd();
        if solution.len() != self.sets.num_blocks() * nsd {
            return Err(AssemblyError::FieldSize { expected: self.sets.num_blocks() * nsd, got: solution.len() });
        }
        let mut values = vec![0.0; self.mesh.num_faces() * nsd];
        for f in 0..self.mesh.num_faces() {
            let dst = &mut values[f * nsd..(f + 1) * nsd];
            match self.sets.block(f) {
                Some(b) => dst.copy_from_slice(&solution[b * nsd..(b + 1) * nsd]),
                None => dst.copy_from_slice(self.dirichlet_value(f, loads)?.as_slice()),
            }
        }
        Ok(FaceField::new(nsd, values))
    }

    /// Element solutions for every element.
    pub fn recover_all(&self, field: &FaceField, loads: &dyn Loads) -> Result<Vec<ElementSolution>, AssemblyError> {
        (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let pre = self.local_precompute(e, loads)?;
                self.recover_local_solution(e, &pre, field)
            })
            .collect()
    }
}

/// Convenience wrapper building a [`Scheme`] and assembling.
pub fn assemble(
    mesh: &Mesh,
    sets: &FaceSets,
    material: Material,
    stabilization: Stabilization,
    loads: &dyn Loads,
) -> Result<GlobalSystem, AssemblyError> {
    Scheme::new(mesh, sets, material, stabilization)?.assemble(loads)
}
