//! Independent oracles for the local solve and the assembled system.

use super::*;
use fcfv::assembly::{FaceField, Loads, Scheme, Stabilization};
use fcfv::mesh::{
    classify_faces, distort_mesh, generate_mapped_2d, generate_structured_2d, BoundaryKind, BoundarySpec, Element,
    ElementKind, FaceSets, FaceTag, Mesh, Point, Rect,
};
use fcfv::solver::{solve, Method, SolverConfig};
use fcfv::voigt::Material;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::ops::AddAssign;

/// Dense local system `A [L; u] = b` built by testing with each unit vector
/// `v` (mixed) and `w` (primal).
fn dense_local_system(
    mesh: &Mesh,
    d_tilde: &DMatrix<f64>,
    tau: f64,
    loads: &dyn Loads,
    field: &FaceField,
) -> (DMatrix<f64>, DVector<f64>) {
    let nsd = mesh.nsd();
    let msd = d_tilde.nrows();
    let vol = mesh.volume(0);
    let tau_m = DMatrix::identity(nsd, nsd) * tau;
    let mut a = DMatrix::zeros(msd + nsd, msd + nsd);
    let mut b = DVector::zeros(msd + nsd);
    let face_data: Vec<(f64, Vec<f64>, DVector<f64>)> = mesh
        .element_faces(0)
        .iter()
        .map(|r| {
            let face = mesh.face(r.face);
            let n = mesh.outward_normal(*r)[..nsd].to_vec();
            let value = if face.tag.is_dirichlet() {
                DVector::from_column_slice(&loads.dirichlet(face.tag.region().unwrap(), &face.barycenter)[..nsd])
            } else {
                DVector::from_column_slice(field.get(r.face))
            };
            (face.area, n, value)
        })
        .collect();
    for i in 0..msd {
        let v = DVector::from_fn(msd, |k, _| if k == i { 1.0 } else { 0.0 });
        // -(v, L) + (div_S^T D~ v, u) with constant v: the volume term vanishes.
        a[(i, i)] = -vol;
        for (area, n, value) in &face_data {
            let trace = voigt_normal(n).transpose() * d_tilde * &v;
            b[i] += area * trace.dot(value);
        }
    }
    let f = loads.body_force(&mesh.centroid(0));
    for k in 0..nsd {
        let w = DVector::from_fn(nsd, |j, _| if j == k { 1.0 } else { 0.0 });
        b[msd + k] += vol * f[k];
        for (area, _, value) in &face_data {
            for j in 0..nsd {
                let ej = DVector::from_fn(nsd, |q, _| if q == j { 1.0 } else { 0.0 });
                a[(msd + k, msd + j)] += area * w.dot(&(&tau_m * &ej));
            }
            b[msd + k] += area * w.dot(&(&tau_m * value));
        }
    }
    (a, b)
}

fn random_problem(seed: u64) -> (Mesh, Material, f64, f64, AffineLoads, FaceField, Vec<bool>) {
    let mut rng = rng(seed);
    let kind = [ElementKind::Triangle, ElementKind::Quadrilateral, ElementKind::Tetrahedron, ElementKind::Hexahedron]
        [rng.gen_range(0..4)];
    let mesh = random_element(&mut rng, kind);
    let material = random_material(&mut rng, kind.dim());
    let tau = rng.gen_range(0.1..10.0);
    let ell = rng.gen_range(0.5..2.0);
    let loads = AffineLoads::random(&mut rng);
    let values: Vec<f64> = (0..mesh.num_faces() * kind.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dirichlet: Vec<bool> = (0..mesh.num_faces()).map(|_| rng.gen_bool(0.4)).collect();
    (mesh, material, tau, ell, loads, FaceField::new(kind.dim(), values), dirichlet)
}

/// Largest relative discrepancies of one random single-element problem:
/// closed form against the dense solve for `L` and `u`, the residual of the
/// closed form in the dense equations, and the stress against the stress
/// obtained with a different factor of `D`.
pub struct LocalDiscrepancy {
    pub kind: ElementKind,
    pub l: f64,
    pub u: f64,
    pub residual: f64,
    pub stress: f64,
}

impl LocalDiscrepancy {
    pub fn max(&self) -> f64 {
        self.l.max(self.u).max(self.residual).max(self.stress)
    }
}

pub fn local_discrepancy(seed: u64) -> LocalDiscrepancy {
    let (mut mesh, material, tau, ell, loads, field, dirichlet) = random_problem(seed);
    let kind = mesh.elements()[0].kind;
    let spec = BoundarySpec::new().dirichlet(0, move |f, _| dirichlet[f]).neumann(1, |_, _| true);
    let sets = classify_faces(&mut mesh, &spec).unwrap();
    let stab = Stabilization::new(tau, ell).unwrap();
    let scheme = Scheme::new(&mesh, &sets, material, stab).unwrap();
    let pre = scheme.local_precompute(0, &loads).unwrap();
    let sol = scheme.recover_local_solution(0, &pre, &field).unwrap();
    let msd = material.msd();
    let nsd = mesh.nsd();
    let coef = stab.coefficient(&material);
    let rel = |a: &DVector<f64>, b: &DVector<f64>| (a - b).norm() / b.norm().max(1.0);

    let (a, b) = dense_local_system(&mesh, scheme.d_tilde().as_matrix(), coef, &loads, &field);
    let x = a.clone().lu().solve(&b).unwrap();
    let (l, u) = (x.rows(0, msd).into_owned(), x.rows(msd, nsd).into_owned());
    let mut xs = DVector::zeros(msd + nsd);
    xs.rows_mut(0, msd).copy_from(&sol.l);
    xs.rows_mut(msd, nsd).copy_from(&sol.u);
    let residual = (&a * xs - &b).norm() / b.norm().max(1.0);

    let chol = cholesky_factor(&material);
    let (a2, b2) = dense_local_system(&mesh, &chol, coef, &loads, &field);
    let x2 = a2.lu().solve(&b2).unwrap();
    let sigma_oracle = -(&chol * x2.rows(0, msd));
    let sigma = -(scheme.d_tilde().as_matrix() * &sol.l);
    LocalDiscrepancy { kind, l: rel(&sol.l, &l), u: rel(&sol.u, &u), residual, stress: rel(&sigma, &sigma_oracle) }
}

struct Full {
    k: DMatrix<f64>,
    f: DVector<f64>,
}

/// Builds the full system with the global rows in their original form and
/// eliminates the element unknowns densely.
fn brute_force(mesh: &Mesh, sets: &FaceSets, material: &Material, tau: f64, loads: &dyn Loads) -> Full {
    let nsd = mesh.nsd();
    let msd = material.msd();
    let dt = cholesky_factor(material);
    let ne = mesh.num_elements();
    let per = msd + nsd;
    let nx = ne * per;
    let ny = sets.num_blocks() * nsd;
    let mut a = DMatrix::zeros(nx, nx);
    let mut bm = DMatrix::zeros(nx, ny);
    let mut c = DMatrix::zeros(ny, nx);
    let mut e = DMatrix::zeros(ny, ny);
    let mut r1 = DVector::zeros(nx);
    let mut r2 = DVector::zeros(ny);
    let tau_m = DMatrix::identity(nsd, nsd) * tau;
    let eye = DMatrix::<f64>::identity(nsd, nsd);

    for el in 0..ne {
        let (lo, uo) = (el * per, el * per + msd);
        let vol = mesh.volume(el);
        let fb = loads.body_force(&mesh.centroid(el));
        for i in 0..msd {
            a[(lo + i, lo + i)] = -vol;
        }
        for k in 0..nsd {
            r1[uo + k] += vol * fb[k];
        }
        for r in mesh.element_faces(el) {
            let face = mesh.face(r.face);
            let area = face.area;
            let n = mesh.outward_normal(*r)[..nsd].to_vec();
            let g = dt.transpose() * voigt_normal(&n);
            // tau u_e over every face.
            a.view_mut((uo, uo), (nsd, nsd)).add_assign(&(&tau_m * area));
            match sets.block(r.face) {
                None => {
                    let ud = DVector::from_column_slice(&loads.dirichlet(face.tag.region().unwrap(), &face.barycenter)[..nsd]);
                    r1.rows_mut(lo, msd).add_assign(&(&g * &ud * area));
                    r1.rows_mut(uo, nsd).add_assign(&(&tau_m * &ud * area));
                }
                Some(blk) => {
                    let yo = blk * nsd;
                    bm.view_mut((lo, yo), (msd, nsd)).add_assign(&(-&g * area));
                    bm.view_mut((uo, yo), (nsd, nsd)).add_assign(&(-&tau_m * area));
                    // Global row of this face, contribution of this element.
                    let (q, diag, xi) = match face.tag {
                        FaceTag::Interior => (-eye.clone(), -&tau_m, 0.0),
                        tag => {
                            let xi = tag.xi().unwrap();
                            let (pn, pt) = projections(&n);
                            let q = &pt + &pn * xi;
                            let diag = &pn * (1.0 - xi) + &q * &tau_m;
                            (q, diag, xi)
                        }
                    };
                    // Interior rows: N^T D~ L + tau u - tau u_hat.
                    // Neumann rows: -Q (N^T D~ L + tau u) + [(1 - xi) Pn + Q tau] u_hat = xi g.
                    c.view_mut((yo, lo), (nsd, msd)).add_assign(&(&q * g.transpose() * (-area)));
                    c.view_mut((yo, uo), (nsd, nsd)).add_assign(&(&q * &tau_m * (-area)));
                    e.view_mut((yo, yo), (nsd, nsd)).add_assign(&(&diag * area));
                    if xi > 0.0 {
                        let mut nn = [0.0; 3];
                        nn[..nsd].copy_from_slice(&n);
                        let t = loads.traction(face.tag.region().unwrap(), &face.barycenter, &nn);
                        r2.rows_mut(yo, nsd).add_assign(&(DVector::from_column_slice(&t[..nsd]) * (xi * area)));
                    }
                }
            }
        }
    }
    let a_inv = a.try_inverse().expect("local blocks are invertible");
    Full { k: &e - &c * &a_inv * &bm, f: &r2 - &c * &a_inv * &r1 }
}

/// Row signs, column projectors and constraint term relating the assembled
/// symmetric form to the original rows: `K = S K_full C + X`, `f = S f_full`.
fn relate(mesh: &Mesh, sets: &FaceSets, full: &Full) -> (DMatrix<f64>, DVector<f64>) {
    let nsd = mesh.nsd();
    let n = sets.num_blocks() * nsd;
    let mut s = DMatrix::zeros(n, n);
    let mut col = DMatrix::zeros(n, n);
    let mut x = DMatrix::zeros(n, n);
    for f in sets.free_faces() {
        let blk = sets.block(f).unwrap() * nsd;
        let face = mesh.face(f);
        let sign = if face.tag == FaceTag::Interior { -1.0 } else { 1.0 };
        for d in 0..nsd {
            s[(blk + d, blk + d)] = sign;
        }
        if let FaceTag::Boundary(BoundaryKind::Symmetry, _) = face.tag {
            let (pn, pt) = projections(&face.normal[..nsd]);
            col.view_mut((blk, blk), (nsd, nsd)).copy_from(&pt);
            x.view_mut((blk, blk), (nsd, nsd)).copy_from(&(pn * face.area));
        } else {
            col.view_mut((blk, blk), (nsd, nsd)).copy_from(&DMatrix::identity(nsd, nsd));
        }
    }
    (&s * &full.k * &col + x, &s * &full.f)
}

fn two_hexes() -> Mesh {
    let mut nodes: Vec<Point> = Vec::new();
    for z in 0..3 {
        for (x, y) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            nodes.push([x + 0.05 * z as f64, y, 0.7 * z as f64]);
        }
    }
    let hex = |b: usize| Element::new(ElementKind::Hexahedron, (b..b + 8).collect());
    Mesh::new(3, nodes, vec![hex(0), hex(4)]).unwrap()
}

/// Unit cube split into six tetrahedra around the main diagonal.
fn six_tets() -> Mesh {
    let nodes: Vec<Point> = (0..8).map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64 * 1.2, ((i >> 2) & 1) as f64 * 0.9]).collect();
    let paths = [[1, 3], [1, 5], [2, 3], [2, 6], [4, 5], [4, 6]];
    let elements = paths.iter().map(|p| oriented_tet(&nodes, [0, p[0], p[1], 7])).collect();
    Mesh::new(3, nodes, elements).unwrap()
}

fn cases() -> Vec<(&'static str, Mesh, BoundarySpec)> {
    let mixed2 = || {
        BoundarySpec::new()
            .dirichlet(0, |_, f| f.barycenter[0] < 1e-9)
            .symmetry(2, |_, f| f.barycenter[1] < 1e-9)
            .neumann(1, |_, _| true)
    };
    let mixed3 = || {
        BoundarySpec::new()
            .dirichlet(0, |_, f| f.barycenter[2] < 1e-9)
            .symmetry(2, |_, f| f.barycenter[0] < 1e-9)
            .neumann(1, |_, _| true)
    };
    let tri = generate_structured_2d(0, ElementKind::Triangle, Rect::unit()).unwrap();
    let quad = generate_structured_2d(1, ElementKind::Quadrilateral, Rect::unit()).unwrap();
    let mapped = generate_mapped_2d([[0.0, 0.0], [2.0, 0.5], [2.0, 2.0], [0.0, 1.0]], 2, 4, ElementKind::Quadrilateral).unwrap();
    let mapped_tri = generate_mapped_2d([[0.0, 0.0], [2.0, 0.5], [2.0, 2.0], [0.0, 1.0]], 1, 2, ElementKind::Triangle).unwrap();
    vec![
        ("tri", distort_mesh(&tri, 3).unwrap(), mixed2()),
        ("quad", distort_mesh(&quad, 4).unwrap(), mixed2()),
        ("quad all dirichlet", quad, BoundarySpec::new().dirichlet(0, |_, _| true)),
        ("mapped quad", mapped, mixed2()),
        ("mapped tri", mapped_tri, BoundarySpec::new().dirichlet(0, |_, f| f.barycenter[0] < 1e-9).neumann(1, |_, _| true)),
        ("two hexes", two_hexes(), mixed3()),
        ("six tets", six_tets(), mixed3()),
    ]
}

/// Relative discrepancies of the assembled matrix, right-hand side and
/// direct solution against the Schur complement, per test mesh.
pub struct SchurDiscrepancy {
    pub name: &'static str,
    pub elements: usize,
    pub k: f64,
    pub f: f64,
    pub solution: f64,
}

pub fn schur_discrepancies(seed: u64) -> Vec<SchurDiscrepancy> {
    let mut rng = rng(seed);
    cases()
        .into_iter()
        .map(|(name, mut mesh, spec)| {
            let sets = classify_faces(&mut mesh, &spec).unwrap();
            let material = random_material(&mut rng, mesh.nsd());
            let loads = AffineLoads::random(&mut rng);
            let stab = Stabilization::new(2.7, 1.3).unwrap();
            let scheme = Scheme::new(&mesh, &sets, material, stab).unwrap();
            let sys = scheme.assemble(&loads).unwrap();
            let full = brute_force(&mesh, &sets, &material, stab.coefficient(&material), &loads);
            let (k, f) = relate(&mesh, &sets, &full);
            let fd = DVector::from_vec(sys.rhs.clone());
            let (x, _) = solve(&sys, &SolverConfig { method: Method::Direct, ..Default::default() }).unwrap();
            let y = full.k.clone().lu().solve(&full.f).unwrap();
            let x = DVector::from_vec(x);
            SchurDiscrepancy {
                name,
                elements: mesh.num_elements(),
                k: relative_diff(&sys.matrix.to_dense(), &k),
                f: (&fd - &f).norm() / f.norm().max(1.0),
                solution: (&x - &y).norm() / y.norm().max(1.0),
            }
        })
        .collect()
}
