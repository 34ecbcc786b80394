//! Prismatic beam `[-1, 1]^2 x [0, L]` bent by a shear load, with the exact
//! displacement prescribed on `x3 = L` and exact tractions elsewhere.

use std::f64::consts::PI;

use super::{hooke, traction_from_stress, Benchmark, BenchmarkError, MeshRequest, Parameters, Real};
use crate::assembly::Loads;
use crate::mesh::{generate_structured_3d, Box3, BoundarySpec, ElementKind, Mesh, Point, Region};
use crate::voigt::{Material, Model};

pub const DEFAULT_SERIES_TERMS: usize = 30;
/// `sinh(n pi)` overflows beyond this.
pub const MAX_SERIES_TERMS: usize = 200;
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Beam {
    material: Material,
    length: f64,
    load: f64,
    terms: usize,
}

impl Default for Beam {
    fn default() -> Self {
        Self::new()
    }
}

impl Beam {
    pub fn new() -> Self {
        Self {
            material: Material::new(25.0, 0.3, Model::ThreeD).expect("valid constants"),
            length: 10.0,
            load: 0.1,
            terms: DEFAULT_SERIES_TERMS,
        }
    }

    pub fn with_series_terms(self, terms: usize) -> Result<Self, BenchmarkError> {
        if terms == 0 || terms > MAX_SERIES_TERMS {
            return Err(BenchmarkError::Parameter(format!("series terms {terms} not in 1..={MAX_SERIES_TERMS}")));
        }
        Ok(Self { terms, ..self })
    }

    fn series_coefficient(n: usize) -> f64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign / ((n * n * n) as f64 * (n as f64 * PI).cosh())
    }

    /// Exact displacement, generic so it can be differentiated automatically.
    pub(crate) fn displacement<T: Real>(&self, x: [T; 3]) -> [T; 3] {
        let e = self.material.young_modulus;
        let nu = self.material.poisson_ratio;
        let p = self.load;
        let (a, b, z) = (x[0], x[1], x[2]);
        let c = |v: f64| T::cst(v);
        let u1 = -(c(3.0 * p * nu / (4.0 * e)) * a * b * z);
        let u2 = c(p / (8.0 * e)) * (c(3.0 * nu) * z * (a * a - b * b) - z * z * z);
        let poly = c(nu) * (c(3.0) * a * a - b * b + c(4.0)) + c(3.0) * z * z - c(2.0) * b * b + c(6.0);
        let mut series = c(0.0);
        for n in 1..=self.terms {
            let w = c(n as f64 * PI);
            series = series + c(Self::series_coefficient(n)) * (w * a).cos() * (w * b).sinh();
        }
        let u3 = c(p / (8.0 * e)) * b * poly - c(3.0 * p * nu / (PI.powi(3) * e)) * series;
        [u1, u2, u3]
    }

    fn gradient(&self, x: &Point) -> [[f64; 3]; 3] {
        let e = self.material.young_modulus;
        let nu = self.material.poisson_ratio;
        let p = self.load;
        let (a, b, z) = (x[0], x[1], x[2]);
        let c1 = 3.0 * p * nu / (4.0 * e);
        let k = p / (8.0 * e);
        let c3 = 3.0 * p * nu / (PI.powi(3) * e);
        let poly = nu * (3.0 * a * a - b * b + 4.0) + 3.0 * z * z - 2.0 * b * b + 6.0;
        let (mut sx, mut sy) = (0.0, 0.0);
        for n in 1..=self.terms {
            let w = n as f64 * PI;
            let cn = Self::series_coefficient(n);
            sx -= cn * w * (w * a).sin() * (w * b).sinh();
            sy += cn * w * (w * a).cos() * (w * b).cosh();
        }
        [
            [-c1 * b * z, -c1 * a * z, -c1 * a * b],
            [k * 6.0 * nu * z * a, -k * 6.0 * nu * z * b, k * (3.0 * nu * (a * a - b * b) - 3.0 * z * z)],
            [
                k * b * 6.0 * nu * a - c3 * sx,
                k * (poly - 2.0 * nu * b * b - 4.0 * b * b) - c3 * sy,
                k * b * 6.0 * z,
            ],
        ]
    }
}

impl Loads for Beam {
    fn body_force(&self, _x: &Point) -> [f64; 3] {
        [0.0; 3]
    }

    fn dirichlet(&self, _region: Region, x: &Point) -> [f64; 3] {
        self.displacement(*x)
    }

    fn traction(&self, _region: Region, x: &Point, normal: &Point) -> [f64; 3] {
        traction_from_stress(&hooke(&self.material, &self.gradient(x)), normal)
    }
}

impl Benchmark for Beam {
    fn name(&self) -> &'static str {
        "beam"
    }

    fn material(&self) -> Material {
        self.material
    }

    fn boundary_spec(&self) -> BoundarySpec {
        let l = self.length;
        BoundarySpec::new().dirichlet(0, move |_, f| (f.barycenter[2] - l).abs() < TOL).neumann(1, |_, _| true)
    }

    fn default_kind(&self) -> ElementKind {
        ElementKind::Hexahedron
    }

    /// Level 1 has one cell across the section and five along the axis.
    fn mesh(&self, request: &MeshRequest) -> Result<Mesh, BenchmarkError> {
        let kind = request.kind.unwrap_or(self.default_kind());
        if kind.dim() != 3 {
            return Err(BenchmarkError::MeshRequest { case: "beam", message: format!("{} elements in 3D", kind.name()) });
        }
        if request.distortion_seed.is_some() {
            return Err(BenchmarkError::MeshRequest { case: "beam", message: "distortion is only available in 2D".into() });
        }
        Ok(generate_structured_3d(request.level, kind, Box3::new([-1.0, -1.0, 0.0], [1.0, 1.0, self.length]))?)
    }

    /// Domain diameter.
    fn length_scale(&self) -> f64 {
        (8.0 + self.length * self.length).sqrt()
    }

    fn parameters(&self) -> Parameters {
        vec![
            ("young_modulus", self.material.young_modulus),
            ("poisson_ratio", self.material.poisson_ratio),
            ("length", self.length),
            ("load", self.load),
            ("series_terms", self.terms as f64),
        ]
    }

    fn exact_displacement(&self, x: &Point) -> Option<[f64; 3]> {
        Some(self.displacement(*x))
    }

    fn exact_gradient(&self, x: &Point) -> Option<[[f64; 3]; 3]> {
        Some(self.gradient(x))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{checks, dual::Dual};
    use super::*;

    fn points() -> Vec<Point> {
        (0..30).map(|i| {
            let s = i as f64 / 29.0;
            [2.0 * s - 1.0, (7.3 * s).sin(), 10.0 * (1.0 - s * s)]
        }).collect()
    }

    #[test]
    fn gradient_matches_dual_numbers() {
        let b = Beam::new();
        checks::gradient_matches(&b, |x| b.displacement::<Dual>(x), &points(), 1e-12);
    }

    #[test]
    fn momentum_balance_without_body_force() {
        let b = Beam::new();
        checks::momentum_balance(&b, ([-1.0, -1.0, 0.0], [1.0, 1.0, 10.0]), |_| true, 1e-4, 1e-6);
    }

    #[test]
    fn traction_matches_finite_difference_hooke_on_top_face() {
        let b = Beam::new();
        let h = 1e-5;
        for i in 0..10 {
            let x = [-0.9 + 0.2 * i as f64, 1.0, 0.5 + i as f64];
            let mut g = [[0.0; 3]; 3];
            for j in 0..3 {
                let (mut xp, mut xm) = (x, x);
                xp[j] += h;
                xm[j] -= h;
                let (up, um) = (b.displacement(xp), b.displacement(xm));
                for k in 0..3 {
                    g[k][j] = (up[k] - um[k]) / (2.0 * h);
                }
            }
            let n = [0.0, 1.0, 0.0];
            let t = b.traction(Region(1), &x, &n);
            let fd = traction_from_stress(&hooke(&b.material, &g), &n);
            for k in 0..3 {
                assert!((t[k] - fd[k]).abs() < 1e-8, "{t:?} vs {fd:?}");
            }
        }
    }

    #[test]
    fn axial_component_vanishes_on_symmetry_plane() {
        let b = Beam::new();
        for p in points() {
            assert_eq!(b.displacement([0.0, p[1], p[2]])[0], 0.0);
        }
    }

    #[test]
    fn series_converged_at_thirty_terms() {
        let b30 = Beam::new();
        let b60 = Beam::new().with_series_terms(60).unwrap();
        // Terms decay like exp(-n pi (1 - |x2|)) / n^3, so the bound holds at
        // centroids away from the faces x2 = +-1.
        for (kind, level) in [(ElementKind::Hexahedron, 3), (ElementKind::Tetrahedron, 1)] {
            let m = b30.mesh(&MeshRequest::level(level).with_kind(kind)).unwrap();
            for e in 0..m.num_elements() {
                let c = m.centroid(e);
                let (u30, u60) = (b30.displacement(c)[2], b60.displacement(c)[2]);
                assert!((u30 - u60).abs() <= 1e-14 * u60.abs().max(1e-300), "{u30} vs {u60}");
            }
        }
        assert!(Beam::series_coefficient(31).abs() < 1e-40);
    }

    #[test]
    fn boundary_data_consistent() {
        let b = Beam::new();
        for kind in [ElementKind::Hexahedron, ElementKind::Tetrahedron] {
            let mut m = b.mesh(&MeshRequest::level(1).with_kind(kind)).unwrap();
            checks::boundary_data_consistent(&b, &mut m, None);
        }
    }

    #[test]
    fn invalid_series_terms_rejected() {
        assert!(Beam::new().with_series_terms(0).is_err());
        assert!(Beam::new().with_series_terms(MAX_SERIES_TERMS + 1).is_err());
    }
}
