//! Divergence-free polynomial displacement on the unit square, clamped on
//! three sides with the exact traction on `x2 = 0`.

use super::{hooke, traction_from_stress, Benchmark, BenchmarkError, MeshRequest, Parameters, Real};
use crate::assembly::Loads;
use crate::mesh::{distort_mesh, generate_structured_2d, BoundarySpec, ElementKind, Mesh, Point, Rect, Region};
use crate::voigt::{Material, Model};

#[derive(Debug, Clone, Copy)]
pub struct Poly2d {
    material: Material,
}

const TOL: f64 = 1e-12;

/// `p(s) = s^2 (s-1)^2`.
fn p<T: Real>(s: T) -> T {
    let a = s * (s - T::cst(1.0));
    a * a
}

/// `q(s) = s (s-1) (2s-1)`, so that `p' = 2q`.
fn q<T: Real>(s: T) -> T {
    s * (s - T::cst(1.0)) * (T::cst(2.0) * s - T::cst(1.0))
}

fn dq(s: f64) -> f64 {
    6.0 * s * s - 6.0 * s + 1.0
}

fn d2q(s: f64) -> f64 {
    12.0 * s - 6.0
}

/// Exact displacement, generic so it can be differentiated automatically.
pub(crate) fn displacement<T: Real>(x: [T; 3]) -> [T; 3] {
    [-(p(x[0]) * q(x[1])), p(x[1]) * q(x[0]), T::cst(0.0)]
}

impl Poly2d {
    pub fn new(poisson_ratio: f64, model: Model) -> Result<Self, BenchmarkError> {
        if model == Model::ThreeD {
            return Err(BenchmarkError::Parameter("poly2d is two-dimensional".into()));
        }
        Ok(Self { material: Material::new(1.0, poisson_ratio, model)? })
    }

    pub fn with_young_modulus(self, young: f64) -> Result<Self, BenchmarkError> {
        let m = self.material;
        Ok(Self { material: Material::new(young, m.poisson_ratio, m.model)? })
    }

    fn stress_at(&self, x: &Point) -> Vec<f64> {
        hooke(&self.material, &self.exact_gradient(x).expect("exact field"))
    }
}

impl Loads for Poly2d {
    /// `-div sigma`; the field is divergence free so only the shear modulus
    /// enters.
    fn body_force(&self, x: &Point) -> [f64; 3] {
        let mu = self.material.shear_modulus();
        let (a, b) = (x[0], x[1]);
        let div1 = mu * (-2.0 * dq(a) * q(b) - p(a) * d2q(b));
        let div2 = mu * (2.0 * q(a) * dq(b) + p(b) * d2q(a));
        [-div1, -div2, 0.0]
    }

    fn dirichlet(&self, _region: Region, x: &Point) -> [f64; 3] {
        displacement(*x)
    }

    fn traction(&self, _region: Region, x: &Point, normal: &Point) -> [f64; 3] {
        traction_from_stress(&self.stress_at(x), normal)
    }
}

impl Benchmark for Poly2d {
    fn name(&self) -> &'static str {
        "poly2d"
    }

    fn material(&self) -> Material {
        self.material
    }

    fn boundary_spec(&self) -> BoundarySpec {
        BoundarySpec::new().neumann(1, |_, f| f.barycenter[1].abs() < TOL).dirichlet(0, |_, f| f.barycenter[1].abs() >= TOL)
    }

    fn default_kind(&self) -> ElementKind {
        ElementKind::Quadrilateral
    }

    fn mesh(&self, request: &MeshRequest) -> Result<Mesh, BenchmarkError> {
        let kind = request.kind.unwrap_or(self.default_kind());
        if kind.dim() != 2 {
            return Err(BenchmarkError::MeshRequest { case: "poly2d", message: format!("{} elements in 2D", kind.name()) });
        }
        let mesh = generate_structured_2d(request.level, kind, Rect::unit())?;
        Ok(match request.distortion_seed {
            Some(seed) => distort_mesh(&mesh, seed)?,
            None => mesh,
        })
    }

    fn parameters(&self) -> Parameters {
        vec![("young_modulus", self.material.young_modulus), ("poisson_ratio", self.material.poisson_ratio)]
    }

    fn exact_displacement(&self, x: &Point) -> Option<[f64; 3]> {
        Some(displacement(*x))
    }

    fn exact_gradient(&self, x: &Point) -> Option<[[f64; 3]; 3]> {
        let (a, b) = (x[0], x[1]);
        Some([
            [-2.0 * q(a) * q(b), -p(a) * dq(b), 0.0],
            [p(b) * dq(a), 2.0 * q(a) * q(b), 0.0],
            [0.0; 3],
        ])
    }
}
