//! Tapered panel clamped on the left and sheared on the right edge. No exact
//! solution; the vertical displacement at the midpoint of the loaded edge is
//! compared with reference values.

use super::{Benchmark, BenchmarkError, MeshRequest, Parameters};
use crate::assembly::{FaceField, Loads};
use crate::mesh::{distort_mesh, generate_mapped_2d, BoundarySpec, ElementKind, FaceTag, Mesh, Point, Region};
use crate::postproc::ElementResult;
use crate::voigt::{Material, Model};

pub const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]];
/// Midpoint of the loaded edge.
pub const TIP: [f64; 2] = [48.0, 52.0];
const SHEAR: f64 = 1.0 / 16.0;
const TOL: f64 = 1e-9;
const MAX_LEVEL: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CookMaterial {
    /// `E = 1`, `nu = 1/3`.
    Compressible,
    /// `E = 1.12499998125`, `nu = 0.499999975`.
    NearlyIncompressible,
}

#[derive(Debug, Clone, Copy)]
pub struct Cook {
    which: CookMaterial,
    material: Material,
}

impl Cook {
    pub fn new(which: CookMaterial) -> Self {
        let (e, nu) = match which {
            CookMaterial::Compressible => (1.0, 1.0 / 3.0),
            CookMaterial::NearlyIncompressible => (1.12499998125, 0.499999975),
        };
        Self { which, material: Material::new(e, nu, Model::PlaneStrain).expect("valid constants") }
    }

    pub fn with_model(self, model: Model) -> Result<Self, BenchmarkError> {
        if model == Model::ThreeD {
            return Err(BenchmarkError::Parameter("the membrane is two-dimensional".into()));
        }
        let m = self.material;
        Ok(Self { material: Material::new(m.young_modulus, m.poisson_ratio, model)?, ..self })
    }

    pub fn which(&self) -> CookMaterial {
        self.which
    }

    pub fn reference_tip(&self) -> f64 {
        match self.which {
            CookMaterial::Compressible => 21.520,
            CookMaterial::NearlyIncompressible => 16.442,
        }
    }

    /// Mean vertical face displacement over the loaded faces containing the
    /// tip point.
    pub fn tip_displacement(mesh: &Mesh, field: &FaceField) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0;
        for f in mesh.boundary_faces() {
            let face = mesh.face(f);
            if face.tag != FaceTag::Boundary(crate::mesh::BoundaryKind::Neumann, Region(1)) {
                continue;
            }
            let ys: Vec<f64> = face.nodes.iter().map(|&n| mesh.nodes()[n][1]).collect();
            let (lo, hi) = (ys.iter().cloned().fold(f64::INFINITY, f64::min), ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            if lo - TOL <= TIP[1] && TIP[1] <= hi + TOL {
                sum += field.get(f)[1];
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }
}

impl Loads for Cook {
    fn body_force(&self, _x: &Point) -> [f64; 3] {
        [0.0; 3]
    }

    fn dirichlet(&self, _region: Region, _x: &Point) -> [f64; 3] {
        [0.0; 3]
    }

    fn traction(&self, region: Region, _x: &Point, _normal: &Point) -> [f64; 3] {
        match region {
            Region(1) => [0.0, SHEAR, 0.0],
            _ => [0.0; 3],
        }
    }
}

impl Benchmark for Cook {
    fn name(&self) -> &'static str {
        "cook"
    }

    fn material(&self) -> Material {
        self.material
    }

    fn boundary_spec(&self) -> BoundarySpec {
        BoundarySpec::new()
            .dirichlet(0, |_, f| f.barycenter[0].abs() < TOL)
            .neumann(1, |_, f| (f.barycenter[0] - 48.0).abs() < TOL)
            .neumann(2, |_, _| true)
    }

    fn default_kind(&self) -> ElementKind {
        ElementKind::Quadrilateral
    }

    /// `2^level` cells along each side of the trapezoid.
    fn mesh(&self, request: &MeshRequest) -> Result<Mesh, BenchmarkError> {
        let kind = request.kind.unwrap_or(self.default_kind());
        if kind.dim() != 2 {
            return Err(BenchmarkError::MeshRequest { case: "cook", message: format!("{} elements in 2D", kind.name()) });
        }
        if request.level > MAX_LEVEL {
            return Err(BenchmarkError::MeshRequest { case: "cook", message: format!("level {} above {MAX_LEVEL}", request.level) });
        }
        let n = 1usize << request.level;
        let mesh = generate_mapped_2d(CORNERS, n, n, kind)?;
        Ok(match request.distortion_seed {
            Some(seed) => distort_mesh(&mesh, seed)?,
            None => mesh,
        })
    }

    /// Domain diameter.
    fn length_scale(&self) -> f64 {
        let [a, c] = [CORNERS[0], CORNERS[2]];
        (c[0] - a[0]).hypot(c[1] - a[1])
    }

    fn parameters(&self) -> Parameters {
        vec![
            ("young_modulus", self.material.young_modulus),
            ("poisson_ratio", self.material.poisson_ratio),
            ("shear_load", SHEAR),
            ("tip_x", TIP[0]),
            ("tip_y", TIP[1]),
        ]
    }

    fn reference_scalars(&self) -> Vec<(&'static str, f64)> {
        vec![("tip_displacement", self.reference_tip())]
    }

    fn derived_scalars(&self, mesh: &Mesh, field: &FaceField, _elements: &[ElementResult]) -> Vec<(String, f64)> {
        Self::tip_displacement(mesh, field).map(|v| ("tip_displacement".to_string(), v)).into_iter().collect()
    }
}
