#![allow(dead_code)]

pub mod oracle;

use fcfv::assembly::{Loads, Scheme, Stabilization};
use fcfv::benchmarks::{case_by_name, CaseOptions, MeshRequest, Shell};
use fcfv::mesh::{
    classify_faces, distort_mesh, generate_shell_mesh, generate_structured_2d, generate_structured_3d, BoundarySpec, Box3,
    Element, ElementKind, Mesh, Point, Rect, Region,
};
use fcfv::postproc::recover_all;
use fcfv::solver::{solve, Method, SolverConfig};
use fcfv::voigt::{Material, Model};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Voigt elasticity matrix written out from the Lamé constants.
pub fn hooke_matrix(m: &Material) -> DMatrix<f64> {
    let (e, nu) = (m.young_modulus, m.poisson_ratio);
    let mu = e / (2.0 * (1.0 + nu));
    match m.model {
        Model::PlaneStress => {
            let c = e / (1.0 - nu * nu);
            DMatrix::from_row_slice(3, 3, &[c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, mu])
        }
        Model::PlaneStrain => {
            let lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let a = lam + 2.0 * mu;
            DMatrix::from_row_slice(3, 3, &[a, lam, 0.0, lam, a, 0.0, 0.0, 0.0, mu])
        }
        Model::ThreeD => {
            let lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let a = lam + 2.0 * mu;
            let mut d = DMatrix::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    d[(i, j)] = if i == j { a } else { lam };
                }
                d[(3 + i, 3 + i)] = mu;
            }
            d
        }
    }
}

/// Lower Cholesky factor of the elasticity matrix: a factor `D~` with
/// `D~ D~^T = D` different from the library's.
pub fn cholesky_factor(m: &Material) -> DMatrix<f64> {
    hooke_matrix(m).cholesky().expect("elasticity matrix is SPD").l()
}

/// Voigt normal matrix: rows `[e11, e22, (e33), g12, (g13, g23)]`.
pub fn voigt_normal(n: &[f64]) -> DMatrix<f64> {
    if n.len() == 2 {
        DMatrix::from_row_slice(3, 2, &[n[0], 0.0, 0.0, n[1], n[1], n[0]])
    } else {
        DMatrix::from_row_slice(
            6,
            3,
            &[
                n[0], 0.0, 0.0, //
                0.0, n[1], 0.0, //
                0.0, 0.0, n[2], //
                n[1], n[0], 0.0, //
                n[2], 0.0, n[0], //
                0.0, n[2], n[1],
            ],
        )
    }
}

pub fn projections(n: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let v = DVector::from_column_slice(n);
    let pn = &v * v.transpose();
    let pt = DMatrix::identity(n.len(), n.len()) - &pn;
    (pn, pt)
}

pub fn random_material(rng: &mut impl Rng, nsd: usize) -> Material {
    let e = rng.gen_range(0.5..5.0);
    let nu = rng.gen_range(0.0..0.49);
    let model = match (nsd, rng.gen_bool(0.5)) {
        (3, _) => Model::ThreeD,
        (_, true) => Model::PlaneStrain,
        _ => Model::PlaneStress,
    };
    Material::new(e, nu, model).unwrap()
}

/// One element of `kind` made by jittering its reference shape and
/// applying a random scale and shift.
pub fn random_element(rng: &mut impl Rng, kind: ElementKind) -> Mesh {
    let reference: Vec<[f64; 3]> = match kind {
        ElementKind::Triangle => vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        ElementKind::Quadrilateral => vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
        ElementKind::Tetrahedron => vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        ElementKind::Hexahedron => vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ],
    };
    let nsd = kind.dim();
    let scale = rng.gen_range(0.1..10.0);
    let shift: Vec<f64> = (0..nsd).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let nodes: Vec<Point> = reference
        .iter()
        .map(|p| {
            let mut q = [0.0; 3];
            for d in 0..nsd {
                q[d] = (p[d] + rng.gen_range(-0.12..0.12)) * scale + shift[d];
            }
            q
        })
        .collect();
    let n = nodes.len();
    Mesh::new(nsd, nodes, vec![Element::new(kind, (0..n).collect())]).unwrap()
}

/// Tetrahedron with positive orientation.
pub fn oriented_tet(nodes: &[Point], mut ids: [usize; 4]) -> Element {
    let p = |i: usize| nodes[ids[i]];
    let a = [p(1)[0] - p(0)[0], p(1)[1] - p(0)[1], p(1)[2] - p(0)[2]];
    let b = [p(2)[0] - p(0)[0], p(2)[1] - p(0)[1], p(2)[2] - p(0)[2]];
    let c = [p(3)[0] - p(0)[0], p(3)[1] - p(0)[1], p(3)[2] - p(0)[2]];
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    if det < 0.0 {
        ids.swap(1, 2);
    }
    Element::new(ElementKind::Tetrahedron, ids.to_vec())
}

/// Affine data: body force constant, Dirichlet and traction affine in `x`
/// with a different offset per region.
#[derive(Debug, Clone)]
pub struct AffineLoads {
    pub force: [f64; 3],
    pub offset: [f64; 3],
    pub gradient: [[f64; 3]; 3],
    pub traction: [f64; 3],
}

impl AffineLoads {
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut r = || rng.gen_range(-1.0..1.0);
        Self {
            force: [r(), r(), r()],
            offset: [r(), r(), r()],
            gradient: [[r(), r(), r()], [r(), r(), r()], [r(), r(), r()]],
            traction: [r(), r(), r()],
        }
    }
}

impl Loads for AffineLoads {
    fn body_force(&self, _x: &Point) -> [f64; 3] {
        self.force
    }

    fn dirichlet(&self, region: Region, x: &Point) -> [f64; 3] {
        let s = 1.0 + region.0 as f64;
        let mut u = [0.0; 3];
        for i in 0..3 {
            u[i] = s * self.offset[i] + (0..3).map(|j| self.gradient[i][j] * x[j]).sum::<f64>();
        }
        u
    }

    fn traction(&self, region: Region, x: &Point, normal: &Point) -> [f64; 3] {
        let s = 1.0 + region.0 as f64;
        [
            s * self.traction[0] + normal[0] * x[1],
            s * self.traction[1] - normal[1] * x[0],
            s * self.traction[2] + normal[2],
        ]
    }
}

/// Constant Dirichlet data and no loads.
pub struct ConstantLoads(pub [f64; 3]);

impl Loads for ConstantLoads {
    fn body_force(&self, _x: &Point) -> [f64; 3] {
        [0.0; 3]
    }

    fn dirichlet(&self, _region: Region, _x: &Point) -> [f64; 3] {
        self.0
    }

    fn traction(&self, _region: Region, _x: &Point, _normal: &Point) -> [f64; 3] {
        [0.0; 3]
    }
}

pub fn relative_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub const FAMILIES: usize = 8;

/// Mesh families of the patch test: uniform and distorted triangles and
/// quadrilaterals, tetrahedra, hexahedra, a shell and the Kirsch fixture.
pub fn mesh_family(i: usize, seed: u64) -> (&'static str, Mesh) {
    let tri = || generate_structured_2d(2, ElementKind::Triangle, Rect::new([-1.0, 0.0], [2.0, 3.0])).unwrap();
    let quad = || generate_structured_2d(2, ElementKind::Quadrilateral, Rect::unit()).unwrap();
    match i {
        0 => ("tri", tri()),
        1 => ("quad", quad()),
        2 => ("distorted tri", distort_mesh(&tri(), seed).unwrap()),
        3 => ("distorted quad", distort_mesh(&quad(), seed).unwrap()),
        4 => ("tet", generate_structured_3d(1, ElementKind::Tetrahedron, Box3::unit()).unwrap()),
        5 => ("hex", generate_structured_3d(1, ElementKind::Hexahedron, Box3::new([0.0, 0.0, 0.0], [1.0, 2.0, 0.5])).unwrap()),
        6 => ("shell", generate_shell_mesh(8, 4, 1, 2.0, Shell::new().geometry()).unwrap()),
        _ => ("kirsch", case_by_name("kirsch", &CaseOptions::default()).unwrap().mesh(&MeshRequest::level(1)).unwrap()),
    }
}

pub fn material_for(nsd: usize, e: f64, nu: f64, plane_strain: bool) -> Material {
    let model = match (nsd, plane_strain) {
        (3, _) => Model::ThreeD,
        (_, true) => Model::PlaneStrain,
        _ => Model::PlaneStress,
    };
    Material::new(e, nu, model).unwrap()
}

pub struct PatchDeviation {
    pub name: &'static str,
    /// Largest deviation of a face or element displacement from the data.
    pub displacement: f64,
    /// Largest stress component.
    pub stress: f64,
}

/// Solves the problem with constant Dirichlet data `c` on the whole
/// boundary and no loads.
pub fn patch_deviation(family: usize, seed: u64, c: [f64; 3], e: f64, nu: f64, plane_strain: bool, tau: f64) -> PatchDeviation {
    let (name, mut mesh) = mesh_family(family, seed);
    let sets = classify_faces(&mut mesh, &BoundarySpec::new().dirichlet(0, |_, _| true)).unwrap();
    let material = material_for(mesh.nsd(), e, nu, plane_strain);
    let scheme = Scheme::new(&mesh, &sets, material, Stabilization::new(tau, 1.0).unwrap()).unwrap();
    let loads = ConstantLoads(c);
    let sys = scheme.assemble(&loads).unwrap();
    let (x, _) = solve(&sys, &SolverConfig { method: Method::Direct, ..Default::default() }).unwrap();
    let nsd = mesh.nsd();
    let mut displacement = x.iter().enumerate().map(|(k, v)| (v - c[k % nsd]).abs()).fold(0.0, f64::max);
    let mut stress = 0.0f64;
    let field = scheme.face_field(&x, &loads).unwrap();
    for r in recover_all(&scheme, &field, &loads).unwrap() {
        for d in 0..nsd {
            displacement = displacement.max((r.u[d] - c[d]).abs());
        }
        stress = stress.max(r.stress.amax());
    }
    PatchDeviation { name, displacement, stress }
}
