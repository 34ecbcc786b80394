//! Infinite plate with a circular hole under uniaxial tension, on the
//! quarter domain `[0, L]^2` minus the hole, meshed by the shipped
//! unstructured fixtures.

use super::{hooke, traction_from_stress, Benchmark, BenchmarkError, MeshRequest, Parameters, Real};
use crate::assembly::{FaceField, Loads};
use crate::mesh::{io::parse_mesh, BoundarySpec, ElementKind, FaceTag, Mesh, Point, Region};
use crate::postproc::ElementResult;
use crate::voigt::{Material, Model};

const FIXTURES: [&str; 3] = [
    include_str!("../../fixtures/kirsch_1.mesh"),
    include_str!("../../fixtures/kirsch_2.mesh"),
    include_str!("../../fixtures/kirsch_3.mesh"),
];

/// Points this far inside the hole (relative to its radius) are rejected;
/// chord midpoints of the faceted hole lie just inside it.
const HOLE_SLACK: f64 = 1e-2;
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Kirsch {
    material: Material,
    side: f64,
    radius: f64,
    load: f64,
}

impl Kirsch {
    pub fn new(model: Model) -> Result<Self, BenchmarkError> {
        if model == Model::ThreeD {
            return Err(BenchmarkError::Parameter("the plate with a hole is two-dimensional".into()));
        }
        Ok(Self { material: Material::new(1e5, 0.3, model)?, side: 4.0, radius: 1.0, load: 10.0 })
    }

    pub fn with_material(self, young: f64, poisson: f64) -> Result<Self, BenchmarkError> {
        Ok(Self { material: Material::new(young, poisson, self.material.model)?, ..self })
    }

    pub fn num_levels() -> u32 {
        FIXTURES.len() as u32
    }

    /// Kolosov constant of the plane model.
    pub fn kolosov(&self) -> f64 {
        let nu = self.material.poisson_ratio;
        match self.material.model {
            Model::PlaneStress => (3.0 - nu) / (1.0 + nu),
            _ => 3.0 - 4.0 * nu,
        }
    }

    fn amplitude(&self) -> f64 {
        self.load * self.radius / (8.0 * self.material.shear_modulus())
    }

    fn outside_hole(&self, x: &Point) -> bool {
        x[0].hypot(x[1]) >= self.radius * (1.0 - HOLE_SLACK)
    }

    /// Cartesian displacement, generic so it can be differentiated
    /// automatically.
    pub(crate) fn displacement<T: Real>(&self, x: [T; 3]) -> [T; 3] {
        let a = T::cst(self.radius);
        let k = T::cst(self.kolosov());
        let one = T::cst(1.0);
        let two = T::cst(2.0);
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let (c, s) = (x[0] / r, x[1] / r);
        let c3 = T::cst(4.0) * c * c * c - T::cst(3.0) * c;
        let s3 = T::cst(3.0) * s - T::cst(4.0) * s * s * s;
        let big_a = (k + one) * (r / a + two * a / r);
        let big_b = two * a / r - two * a * a * a / (r * r * r);
        let big_a2 = (k - T::cst(3.0)) * r / a - (k - one) * two * a / r;
        let amp = T::cst(self.amplitude());
        [amp * (big_a * c + big_b * c3), amp * (big_a2 * s + big_b * s3), T::cst(0.0)]
    }

    /// Hoop stress `sigma_tt` from a Voigt stress at polar angle `theta`.
    pub fn hoop_stress(stress: &[f64], theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        stress[0] * s * s + stress[1] * c * c - 2.0 * stress[2] * s * c
    }

    /// Hoop stress of the hole-adjacent element whose centroid is closest to
    /// the top of the hole.
    pub fn hoop_stress_at_hole(&self, mesh: &Mesh, elements: &[ElementResult]) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for e in 0..mesh.num_elements() {
            let touches = mesh
                .element_faces(e)
                .iter()
                .any(|r| matches!(mesh.face(r.face).tag, FaceTag::Boundary(_, Region(0))));
            if !touches {
                continue;
            }
            let c = mesh.centroid(e);
            let theta = c[1].atan2(c[0]);
            let gap = (std::f64::consts::FRAC_PI_2 - theta).abs();
            if best.is_none_or(|(g, _)| gap < g) {
                best = Some((gap, Self::hoop_stress(elements[e].stress.as_slice(), theta)));
            }
        }
        best.map(|(_, s)| s)
    }
}

impl Loads for Kirsch {
    fn body_force(&self, _x: &Point) -> [f64; 3] {
        [0.0; 3]
    }

    fn dirichlet(&self, _region: Region, _x: &Point) -> [f64; 3] {
        [0.0; 3]
    }

    /// Region 1 carries the exact far-side traction; the hole (region 0) and
    /// the symmetry planes are traction free.
    fn traction(&self, region: Region, x: &Point, normal: &Point) -> [f64; 3] {
        match region {
            Region(1) => traction_from_stress(&hooke(&self.material, &self.gradient(x)), normal),
            _ => [0.0; 3],
        }
    }
}

impl Kirsch {
    fn gradient(&self, x: &Point) -> [[f64; 3]; 3] {
        let a = self.radius;
        let k = self.kolosov();
        let r = x[0].hypot(x[1]);
        let (c, s) = (x[0] / r, x[1] / r);
        let theta = x[1].atan2(x[0]);
        let (s3, c3) = (3.0 * theta).sin_cos();
        let big_a = (k + 1.0) * (r / a + 2.0 * a / r);
        let big_b = 2.0 * a / r - 2.0 * a.powi(3) / r.powi(3);
        let big_a2 = (k - 3.0) * r / a - (k - 1.0) * 2.0 * a / r;
        let da = (k + 1.0) * (1.0 / a - 2.0 * a / (r * r));
        let db = -2.0 * a / (r * r) + 6.0 * a.powi(3) / r.powi(4);
        let da2 = (k - 3.0) / a + (k - 1.0) * 2.0 * a / (r * r);
        let amp = self.amplitude();
        let u1_r = amp * (da * c + db * c3);
        let u1_t = amp * (-big_a * s - 3.0 * big_b * s3);
        let u2_r = amp * (da2 * s + db * s3);
        let u2_t = amp * (big_a2 * c + 3.0 * big_b * c3);
        [
            [u1_r * c - u1_t * s / r, u1_r * s + u1_t * c / r, 0.0],
            [u2_r * c - u2_t * s / r, u2_r * s + u2_t * c / r, 0.0],
            [0.0; 3],
        ]
    }
}

impl Benchmark for Kirsch {
    fn name(&self) -> &'static str {
        "kirsch"
    }

    fn material(&self) -> Material {
        self.material
    }

    fn boundary_spec(&self) -> BoundarySpec {
        let l = self.side;
        let a = self.radius;
        BoundarySpec::new()
            .symmetry(2, |_, f| f.barycenter[0].abs() < TOL || f.barycenter[1].abs() < TOL)
            .neumann(1, move |_, f| (f.barycenter[0] - l).abs() < TOL || (f.barycenter[1] - l).abs() < TOL)
            .neumann(0, move |_, f| f.barycenter[0].hypot(f.barycenter[1]) < a)
    }

    fn default_kind(&self) -> ElementKind {
        ElementKind::Triangle
    }

    /// Fixture levels are 1 to 3.
    fn mesh(&self, request: &MeshRequest) -> Result<Mesh, BenchmarkError> {
        let err = |message: String| BenchmarkError::MeshRequest { case: "kirsch", message };
        if request.kind.is_some_and(|k| k != ElementKind::Triangle) {
            return Err(err("only triangular fixtures are available".into()));
        }
        if request.distortion_seed.is_some() {
            return Err(err("fixtures are unstructured; distortion is not supported".into()));
        }
        let text = (request.level as usize)
            .checked_sub(1)
            .and_then(|i| FIXTURES.get(i))
            .ok_or_else(|| err(format!("level {} not in 1..={}", request.level, FIXTURES.len())))?;
        Ok(parse_mesh(text)?)
    }

    /// Domain diameter.
    fn length_scale(&self) -> f64 {
        self.side * std::f64::consts::SQRT_2
    }

    fn parameters(&self) -> Parameters {
        vec![
            ("young_modulus", self.material.young_modulus),
            ("poisson_ratio", self.material.poisson_ratio),
            ("side", self.side),
            ("radius", self.radius),
            ("load", self.load),
            ("kolosov", self.kolosov()),
        ]
    }

    fn exact_displacement(&self, x: &Point) -> Option<[f64; 3]> {
        self.outside_hole(x).then(|| self.displacement(*x))
    }

    fn exact_gradient(&self, x: &Point) -> Option<[[f64; 3]; 3]> {
        self.outside_hole(x).then(|| self.gradient(x))
    }

    fn reference_scalars(&self) -> Vec<(&'static str, f64)> {
        vec![("hoop_stress_at_hole", 3.0 * self.load)]
    }

    fn derived_scalars(&self, mesh: &Mesh, _field: &FaceField, elements: &[ElementResult]) -> Vec<(String, f64)> {
        self.hoop_stress_at_hole(mesh, elements).map(|s| ("hoop_stress_at_hole".to_string(), s)).into_iter().collect()
    }
}
