//! Thin cylinder with fixed ends under uniform internal pressure, solved with
//! solid elements and compared with the thin-shell radial displacement.

use serde::{Deserialize, Serialize};

use super::{Benchmark, BenchmarkError, MeshRequest, Parameters, ShellMeshSize};
use crate::assembly::Loads;
use crate::mesh::{generate_shell_mesh, BoundarySpec, ElementKind, Mesh, Point, Region, ShellGeometry};
use crate::postproc::{radial_error, ElementResult};
use crate::voigt::{Material, Model};

/// Exponent of `nu` in the flexural rigidity `E t^3 / (12 (1 - nu^k))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RigidityExponent {
    /// `1 - nu^3`.
    Cubic,
    /// `1 - nu^2`.
    Square,
}

impl RigidityExponent {
    pub fn power(self) -> i32 {
        match self {
            Self::Cubic => 3,
            Self::Square => 2,
        }
    }
}

/// Axial grading of the default meshes: central over end cell length.
pub const DEFAULT_STRETCH: f64 = 4.0;
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Shell {
    material: Material,
    geometry: ShellGeometry,
    pressure: f64,
    exponent: RigidityExponent,
    stretch: f64,
}

impl Default for Shell {
    fn default() -> Self {
        Self::new()
    }
}

impl Shell {
    pub fn new() -> Self {
        Self {
            material: Material::new(1.0, 0.3, Model::ThreeD).expect("valid constants"),
            geometry: ShellGeometry { radius: 1.0, thickness: 0.02, length: 5.0 },
            pressure: 1e-4,
            exponent: RigidityExponent::Cubic,
            stretch: DEFAULT_STRETCH,
        }
    }

    pub fn with_pressure(self, pressure: f64) -> Result<Self, BenchmarkError> {
        if !pressure.is_finite() || pressure == 0.0 {
            return Err(BenchmarkError::Parameter(format!("pressure {pressure}")));
        }
        Ok(Self { pressure, ..self })
    }

    pub fn with_rigidity_exponent(self, exponent: RigidityExponent) -> Self {
        Self { exponent, ..self }
    }

    pub fn with_stretch(self, stretch: f64) -> Result<Self, BenchmarkError> {
        if !(stretch >= 1.0) || !stretch.is_finite() {
            return Err(BenchmarkError::Parameter(format!("stretch {stretch}")));
        }
        Ok(Self { stretch, ..self })
    }

    pub fn geometry(&self) -> ShellGeometry {
        self.geometry
    }

    /// Cells around, along and across the wall for refinement `level >= 1`.
    /// Level 1 is the `80 x 10 x 2` mesh: 80 cells along the axis, 10 per
    /// half circumference and 2 across the wall (33,480 face unknowns).
    pub fn mesh_size(&self, level: u32) -> ShellMeshSize {
        let m = 1usize << level.saturating_sub(1);
        ShellMeshSize { n_theta: 20 * m, n_z: 80 * m, n_t: 2, stretch: self.stretch }
    }

    pub fn rigidity(&self) -> f64 {
        let Material { young_modulus: e, poisson_ratio: nu, .. } = self.material;
        let t = self.geometry.thickness;
        e * t.powi(3) / (12.0 * (1.0 - nu.powi(self.exponent.power())))
    }

    pub fn beta(&self) -> f64 {
        let e = self.material.young_modulus;
        let (a, t) = (self.geometry.radius, self.geometry.thickness);
        (e * t / (4.0 * a * a * self.rigidity())).powf(0.25)
    }

    fn constants(&self) -> (f64, f64, f64) {
        let beta = self.beta();
        let alpha = beta * self.geometry.length / 2.0;
        let den = (2.0 * alpha).cos() + (2.0 * alpha).cosh();
        let c1 = 2.0 * alpha.sin() * alpha.sinh() / den;
        let c2 = 2.0 * alpha.cos() * alpha.cosh() / den;
        (beta, c1, c2)
    }

    /// Membrane displacement `P a^2 / (E t)`.
    fn scale(&self) -> f64 {
        let (a, t) = (self.geometry.radius, self.geometry.thickness);
        self.pressure * a * a / (self.material.young_modulus * t)
    }

    /// Radial displacement at axial position `z`.
    pub fn radial_displacement(&self, z: f64) -> f64 {
        let (b, c1, c2) = self.constants();
        let bz = b * z;
        -self.scale() * (1.0 - c1 * bz.sin() * bz.sinh() - c2 * bz.cos() * bz.cosh())
    }

    fn radial_slope(&self, z: f64) -> f64 {
        let (b, c1, c2) = self.constants();
        let bz = b * z;
        let (s, c, sh, ch) = (bz.sin(), bz.cos(), bz.sinh(), bz.cosh());
        self.scale() * b * (c1 * (c * sh + s * ch) + c2 * (c * sh - s * ch))
    }
}

impl Loads for Shell {
    fn body_force(&self, _x: &Point) -> [f64; 3] {
        [0.0; 3]
    }

    fn dirichlet(&self, _region: Region, _x: &Point) -> [f64; 3] {
        [0.0; 3]
    }

    /// `P n` on the inner surface, `n` the outward normal of the solid.
    fn traction(&self, region: Region, _x: &Point, normal: &Point) -> [f64; 3] {
        match region {
            Region(1) => [self.pressure * normal[0], self.pressure * normal[1], self.pressure * normal[2]],
            _ => [0.0; 3],
        }
    }
}

impl Benchmark for Shell {
    fn name(&self) -> &'static str {
        "shell"
    }

    fn material(&self) -> Material {
        self.material
    }

    fn boundary_spec(&self) -> BoundarySpec {
        let ShellGeometry { length, .. } = self.geometry;
        BoundarySpec::new()
            .dirichlet(0, move |_, f| (f.barycenter[2].abs() - length / 2.0).abs() < TOL)
            .neumann(1, |_, f| {
                let r = f.barycenter[0].hypot(f.barycenter[1]);
                (f.normal[0] * f.barycenter[0] + f.normal[1] * f.barycenter[1]) / r < -0.5
            })
            .neumann(2, |_, _| true)
    }

    fn default_kind(&self) -> ElementKind {
        ElementKind::Hexahedron
    }

    fn mesh(&self, request: &MeshRequest) -> Result<Mesh, BenchmarkError> {
        if request.kind.is_some_and(|k| k != ElementKind::Hexahedron) {
            return Err(BenchmarkError::MeshRequest { case: "shell", message: "only hexahedral meshes".into() });
        }
        if request.distortion_seed.is_some() {
            return Err(BenchmarkError::MeshRequest { case: "shell", message: "distortion is only available in 2D".into() });
        }
        let s = match request.shell {
            Some(s) => s,
            None if request.level >= 1 => self.mesh_size(request.level),
            None => return Err(BenchmarkError::MeshRequest { case: "shell", message: "levels start at 1".into() }),
        };
        Ok(generate_shell_mesh(s.n_theta, s.n_z, s.n_t, s.stretch, self.geometry)?)
    }

    /// Domain diameter.
    fn length_scale(&self) -> f64 {
        let ShellGeometry { radius, thickness, length } = self.geometry;
        length.hypot(2.0 * radius + thickness)
    }

    fn parameters(&self) -> Parameters {
        vec![
            ("young_modulus", self.material.young_modulus),
            ("poisson_ratio", self.material.poisson_ratio),
            ("radius", self.geometry.radius),
            ("thickness", self.geometry.thickness),
            ("length", self.geometry.length),
            ("pressure", self.pressure),
            ("rigidity_exponent", self.exponent.power() as f64),
            ("stretch", self.stretch),
            ("beta", self.beta()),
        ]
    }

    fn exact_displacement(&self, x: &Point) -> Option<[f64; 3]> {
        let r = x[0].hypot(x[1]);
        let ur = self.radial_displacement(x[2]);
        Some([ur * x[0] / r, ur * x[1] / r, 0.0])
    }

    fn exact_gradient(&self, x: &Point) -> Option<[[f64; 3]; 3]> {
        let (a, b) = (x[0], x[1]);
        let r = a.hypot(b);
        let r3 = r * r * r;
        let ur = self.radial_displacement(x[2]);
        let dur = self.radial_slope(x[2]);
        Some([
            [ur * b * b / r3, -ur * a * b / r3, dur * a / r],
            [-ur * a * b / r3, ur * a * a / r3, dur * b / r],
            [0.0; 3],
        ])
    }

    /// Column of elements at angle zero next to the outer surface.
    fn radial_error(&self, mesh: &Mesh, elements: &[ElementResult]) -> Option<f64> {
        let ShellGeometry { radius, thickness, .. } = self.geometry;
        let u: Vec<_> = elements.iter().map(|r| r.u.clone()).collect();
        radial_error(mesh, &u, [radius + thickness / 2.0, 0.0], |z| self.radial_displacement(z)).ok()
    }
}
