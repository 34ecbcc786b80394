//! Benchmark problems with boundary data, body forces, mesh recipes and,
//! where available, exact solutions.

mod beam;
mod cook;
mod kirsch;
mod poly2d;
mod shell;

pub use beam::Beam;
pub use cook::{Cook, CookMaterial};
pub use kirsch::Kirsch;
pub use poly2d::Poly2d;
pub use shell::{RigidityExponent, Shell, DEFAULT_STRETCH as DEFAULT_SHELL_STRETCH};

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{FaceField, Loads};
use crate::mesh::{BoundarySpec, ElementKind, Mesh, MeshError, Point};
use crate::postproc::ElementResult;
use crate::voigt::{elasticity_matrix, strain_from_gradient, Material, Model, VoigtError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchmarkError {
    #[error("unknown case `{name}`; available: {}", available.join(", "))]
    UnknownCase { name: String, available: Vec<&'static str> },
    #[error("unsupported mesh request for {case}: {message}")]
    MeshRequest { case: &'static str, message: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Voigt(#[from] VoigtError),
}

/// Scalar arithmetic shared by `f64` and test-only automatic
/// differentiation types, so exact fields can be differentiated exactly.
pub trait Real:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Structured shell mesh dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellMeshSize {
    pub n_theta: usize,
    pub n_z: usize,
    pub n_t: usize,
    pub stretch: f64,
}

/// Which mesh of a case's family to build.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeshRequest {
    pub level: u32,
    /// Element kind; the case default when `None`.
    pub kind: Option<ElementKind>,
    /// Random interior node perturbation (2D structured meshes only).
    pub distortion_seed: Option<u64>,
    /// Overrides the level for the shell.
    pub shell: Option<ShellMeshSize>,
}

impl MeshRequest {
    pub fn level(level: u32) -> Self {
        Self { level, ..Default::default() }
    }

    pub fn with_kind(mut self, kind: ElementKind) -> Self {
        self.kind = Some(kind);
        self
    }
}

/// Named values describing a case, recorded in run metadata.
pub type Parameters = Vec<(&'static str, f64)>;

pub trait Benchmark: Loads + Send + Sync {
    fn name(&self) -> &'static str;
    fn material(&self) -> Material;
    fn boundary_spec(&self) -> BoundarySpec;
    fn default_kind(&self) -> ElementKind;
    fn mesh(&self, request: &MeshRequest) -> Result<Mesh, BenchmarkError>;

    /// Characteristic length in the stabilisation.
    fn length_scale(&self) -> f64 {
        1.0
    }

    fn parameters(&self) -> Parameters;

    fn exact_displacement(&self, _x: &Point) -> Option<[f64; 3]> {
        None
    }

    /// `grad[i][j] = du_i/dx_j` of the exact displacement.
    fn exact_gradient(&self, _x: &Point) -> Option<[[f64; 3]; 3]> {
        None
    }

    /// Voigt stress of the exact field through Hooke's law.
    fn exact_stress(&self, x: &Point) -> Option<Vec<f64>> {
        let g = self.exact_gradient(x)?;
        Some(hooke(&self.material(), &g))
    }

    /// Reference values of derived scalars, by name.
    fn reference_scalars(&self) -> Vec<(&'static str, f64)> {
        Vec::new()
    }

    /// Derived scalars of a computed solution (e.g. a tip displacement).
    fn derived_scalars(&self, _mesh: &Mesh, _field: &FaceField, _elements: &[ElementResult]) -> Vec<(String, f64)> {
        Vec::new()
    }

    /// Sectional radial displacement error, for axisymmetric cases.
    fn radial_error(&self, _mesh: &Mesh, _elements: &[ElementResult]) -> Option<f64> {
        None
    }
}

/// Voigt stress `D eps(grad)`.
pub fn hooke(material: &Material, grad: &[[f64; 3]; 3]) -> Vec<f64> {
    let nsd = material.nsd();
    let g = DMatrix::from_fn(nsd, nsd, |i, j| grad[i][j]);
    let d = elasticity_matrix(material).expect("validated material");
    let s: DVector<f64> = d.as_matrix() * strain_from_gradient(&g);
    s.iter().cloned().collect()
}

/// Traction `sigma n` from a Voigt stress.
pub fn traction_from_stress(s: &[f64], n: &Point) -> [f64; 3] {
    if s.len() == 3 {
        [s[0] * n[0] + s[2] * n[1], s[2] * n[0] + s[1] * n[1], 0.0]
    } else {
        [
            s[0] * n[0] + s[3] * n[1] + s[4] * n[2],
            s[3] * n[0] + s[1] * n[1] + s[5] * n[2],
            s[4] * n[0] + s[5] * n[1] + s[2] * n[2],
        ]
    }
}

/// Per-case overrides accepted by the registry.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CaseOptions {
    pub poisson_ratio: Option<f64>,
    pub young_modulus: Option<f64>,
    pub model: Option<Model>,
    /// Cook: nearly incompressible material.
    pub nearly_incompressible: bool,
    /// Shell: internal pressure.
    pub pressure: Option<f64>,
    pub rigidity_exponent: Option<RigidityExponent>,
}

pub const CASE_NAMES: &[&str] = &["poly2d", "kirsch", "cook", "beam", "shell"];

/// Builds a case by name.
pub fn case_by_name(name: &str, options: &CaseOptions) -> Result<Box<dyn Benchmark>, BenchmarkError> {
    let nu = options.poisson_ratio;
    let e = options.young_modulus;
    Ok(match name {
        "poly2d" => {
            let mut c = Poly2d::new(nu.unwrap_or(1.0 / 3.0), options.model.unwrap_or(Model::PlaneStrain))?;
            if let Some(e) = e {
                c = c.with_young_modulus(e)?;
            }
            Box::new(c)
        }
        "kirsch" => {
            let mut c = Kirsch::new(options.model.unwrap_or(Model::PlaneStress))?;
            if nu.is_some() || e.is_some() {
                c = c.with_material(e.unwrap_or(c.material().young_modulus), nu.unwrap_or(c.material().poisson_ratio))?;
            }
            Box::new(c)
        }
        "cook" => {
            let which = if options.nearly_incompressible { CookMaterial::NearlyIncompressible } else { CookMaterial::Compressible };
            let mut c = Cook::new(which);
            if let Some(m) = options.model {
                c = c.with_model(m)?;
            }
            Box::new(c)
        }
        "beam" => Box::new(Beam::new()),
        "shell" => {
            let mut c = Shell::new();
            if let Some(p) = options.pressure {
                c = c.with_pressure(p)?;
            }
            if let Some(x) = options.rigidity_exponent {
                c = c.with_rigidity_exponent(x);
            }
            Box::new(c)
        }
        _ => return Err(BenchmarkError::UnknownCase { name: name.to_string(), available: CASE_NAMES.to_vec() }),
    })
}

#[cfg(test)]
pub(crate) mod dual {
    //! Forward-mode dual numbers: an independent differentiation route for
    //! checking hand-derived gradients.
    use super::Real;
    use std::ops::{Add, Div, Mul, Neg, Sub};

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Dual(pub f64, pub f64);

    impl Add for Dual {
        type Output = Dual;
        fn add(self, o: Dual) -> Dual {
            Dual(self.0 + o.0, self.1 + o.1)
        }
    }
    impl Sub for Dual {
        type Output = Dual;
        fn sub(self, o: Dual) -> Dual {
            Dual(self.0 - o.0, self.1 - o.1)
        }
    }
    impl Mul for Dual {
        type Output = Dual;
        fn mul(self, o: Dual) -> Dual {
            Dual(self.0 * o.0, self.1 * o.0 + self.0 * o.1)
        }
    }
    impl Div for Dual {
        type Output = Dual;
        fn div(self, o: Dual) -> Dual {
            Dual(self.0 / o.0, (self.1 * o.0 - self.0 * o.1) / (o.0 * o.0))
        }
    }
    impl Neg for Dual {
        type Output = Dual;
        fn neg(self) -> Dual {
            Dual(-self.0, -self.1)
        }
    }
    impl Real for Dual {
        fn cst(v: f64) -> Self {
            Dual(v, 0.0)
        }
        fn sin(self) -> Self {
            Dual(self.0.sin(), self.1 * self.0.cos())
        }
        fn cos(self) -> Self {
            Dual(self.0.cos(), -self.1 * self.0.sin())
        }
        fn sinh(self) -> Self {
            Dual(self.0.sinh(), self.1 * self.0.cosh())
        }
        fn cosh(self) -> Self {
            Dual(self.0.cosh(), self.1 * self.0.sinh())
        }
        fn sqrt(self) -> Self {
            let s = self.0.sqrt();
            Dual(s, self.1 / (2.0 * s))
        }
    }

    /// Gradient `g[i][j] = du_i/dx_j` of `u` by seeding each coordinate.
    pub fn gradient(u: impl Fn([Dual; 3]) -> [Dual; 3], x: &[f64; 3]) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut p = [Dual(x[0], 0.0), Dual(x[1], 0.0), Dual(x[2], 0.0)];
            p[j].1 = 1.0;
            let v = u(p);
            for i in 0..3 {
                g[i][j] = v[i].1;
            }
        }
        g
    }
}

#[cfg(test)]
pub(crate) mod checks {
    //! Consistency checks shared by the case tests.
    use super::*;
    use crate::mesh::{classify_faces, FaceTag};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Central-difference divergence of the exact stress.
    pub fn fd_body_force(b: &dyn Benchmark, x: &Point, h: f64) -> [f64; 3] {
        let nsd = b.material().nsd();
        let mut div = [0.0; 3];
        for j in 0..nsd {
            let mut xp = *x;
            let mut xm = *x;
            xp[j] += h;
            xm[j] -= h;
            let sp = b.exact_stress(&xp).unwrap();
            let sm = b.exact_stress(&xm).unwrap();
            // Row i of sigma, column j.
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let tp = traction_from_stress(&sp, &e);
            let tm = traction_from_stress(&sm, &e);
            for i in 0..nsd {
                div[i] += (tp[i] - tm[i]) / (2.0 * h);
            }
        }
        [-div[0], -div[1], -div[2]]
    }

    /// Momentum balance at random points of `bbox` accepted by `inside`.
    pub fn momentum_balance(b: &dyn Benchmark, bbox: ([f64; 3], [f64; 3]), inside: impl Fn(&Point) -> bool, h: f64, tol: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let nsd = b.material().nsd();
        let mut count = 0;
        while count < 100 {
            let mut x = [0.0; 3];
            for d in 0..nsd {
                x[d] = rng.gen_range(bbox.0[d]..bbox.1[d]);
            }
            if !inside(&x) {
                continue;
            }
            count += 1;
            let f = b.body_force(&x);
            let fd = fd_body_force(b, &x, h);
            let scale = b.exact_stress(&x).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            for d in 0..nsd {
                assert!(
                    (f[d] - fd[d]).abs() <= tol * (f[d].abs().max(fd[d].abs()) + scale),
                    "{} at {x:?}: {f:?} vs {fd:?}",
                    b.name()
                );
            }
        }
    }

    /// Dirichlet data equal the exact displacement and tractions equal the
    /// exact stress times the normal at tagged barycenters.
    pub fn boundary_data_consistent(b: &dyn Benchmark, mesh: &mut Mesh, skip_region: Option<u32>) {
        let sets = classify_faces(mesh, &b.boundary_spec()).unwrap();
        let _ = sets;
        let nsd = mesh.nsd();
        for f in mesh.boundary_faces().collect::<Vec<_>>() {
            let face = mesh.face(f);
            let x = face.barycenter;
            match face.tag {
                FaceTag::Boundary(crate::mesh::BoundaryKind::Dirichlet, r) => {
                    let u = b.dirichlet(r, &x);
                    let ex = b.exact_displacement(&x).unwrap();
                    for d in 0..nsd {
                        assert!((u[d] - ex[d]).abs() <= 1e-12 * (1.0 + ex[d].abs()));
                    }
                }
                FaceTag::Boundary(crate::mesh::BoundaryKind::Neumann, r) if Some(r.0) != skip_region => {
                    let g = b.traction(r, &x, &face.normal);
                    let t = traction_from_stress(&b.exact_stress(&x).unwrap(), &face.normal);
                    let scale = b.exact_stress(&x).unwrap().iter().fold(1e-300f64, |m, v| m.max(v.abs()));
                    for d in 0..nsd {
                        assert!((g[d] - t[d]).abs() <= 1e-8 * scale, "face {f}: {g:?} vs {t:?}");
                    }
                }
                _ => {}
            }
        }
    }

    /// Hand-derived gradient against the dual-number gradient.
    pub fn gradient_matches(b: &dyn Benchmark, u: impl Fn([dual::Dual; 3]) -> [dual::Dual; 3], points: &[Point], tol: f64) {
        for x in points {
            let g = b.exact_gradient(x).unwrap();
            let ad = dual::gradient(&u, x);
            let scale = ad.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..3 {
                for j in 0..3 {
                    assert!((g[i][j] - ad[i][j]).abs() <= tol * scale, "{} at {x:?} [{i}][{j}]: {} vs {}", b.name(), g[i][j], ad[i][j]);
                }
            }
        }
    }
}
