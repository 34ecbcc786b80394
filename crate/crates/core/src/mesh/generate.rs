use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Element, ElementKind, Mesh, MeshError, Point};

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { min, max }
    }

    pub fn unit() -> Self {
        Self::new([0.0, 0.0], [1.0, 1.0])
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Box3 {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn unit() -> Self {
        Self::new([0.0; 3], [1.0; 3])
    }
}

/// Open thin-walled cylinder centred on the z axis, spanning z in [-L/2, L/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellGeometry {
    /// Midplane radius.
    pub radius: f64,
    pub thickness: f64,
    pub length: f64,
}

fn check_extent(lo: f64, hi: f64, what: &str) -> Result<(), MeshError> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(MeshError::DegenerateDomain(format!("{what}: [{lo}, {hi}]")));
    }
    Ok(())
}

/// Uniform mesh of a rectangle with `2^level` cells per side.
pub fn generate_structured_2d(level: u32, kind: ElementKind, domain: Rect) -> Result<Mesh, MeshError> {
    check_extent(domain.min[0], domain.max[0], "x extent")?;
    check_extent(domain.min[1], domain.max[1], "y extent")?;
    if level > 14 {
        return Err(MeshError::Unsupported(format!("refinement level {level}")));
    }
    let n = 1usize << level;
    let (a, b) = (domain.min, domain.max);
    let corners = [[a[0], a[1]], [b[0], a[1]], [b[0], b[1]], [a[0], b[1]]];
    generate_mapped_2d(corners, n, n, kind)
}

/// Structured mesh of the bilinear image of the unit square with the given
/// counter-clockwise corners. Triangles come from splitting each cell along
/// both diagonals.
pub fn generate_mapped_2d(corners: [[f64; 2]; 4], nx: usize, ny: usize, kind: ElementKind) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::DegenerateDomain(format!("{nx} x {ny} cells")));
    }
    let map = |s: f64, t: f64| -> Point {
        let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
        let mut p = [0.0; 3];
        for (c, wk) in corners.iter().zip(w) {
            p[0] += wk * c[0];
            p[1] += wk * c[1];
        }
        p
    };
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push(map(i as f64 / nx as f64, j as f64 / ny as f64));
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let c = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            match kind {
                ElementKind::Quadrilateral => elements.push(Element::new(kind, c.to_vec())),
                ElementKind::Triangle => {
                    let m = nodes.len();
                    nodes.push(map((i as f64 + 0.5) / nx as f64, (j as f64 + 0.5) / ny as f64));
                    for k in 0..4 {
                        elements.push(Element::new(kind, vec![c[k], c[(k + 1) % 4], m]));
                    }
                }
                _ => return Err(MeshError::Unsupported(format!("{kind:?} in a 2D mesh"))),
            }
        }
    }
    Mesh::new(2, nodes, elements)
}

/// Structured mesh of a box. Level `l` uses `2^(l-1)` cells across the
/// shortest side and proportionally more along the others, so aspect ratios
/// of one are kept for boxes whose sides are integer multiples of each other.
/// Tetrahedra come from splitting each hexahedron into 24 through its face
/// and cell centres.
pub fn generate_structured_3d(level: u32, kind: ElementKind, domain: Box3) -> Result<Mesh, MeshError> {
    for d in 0..3 {
        check_extent(domain.min[d], domain.max[d], "box extent")?;
    }
    if level == 0 || level > 10 {
        return Err(MeshError::Unsupported(format!("refinement level {level}")));
    }
    let side: Vec<f64> = (0..3).map(|d| domain.max[d] - domain.min[d]).collect();
    let shortest = side.iter().cloned().fold(f64::INFINITY, f64::min);
    let base = 1usize << (level - 1);
    let mut cells = [0usize; 3];
    for d in 0..3 {
        cells[d] = base * ((side[d] / shortest).round() as usize).max(1);
    }
    generate_box(cells, kind, domain)
}

fn generate_box(cells: [usize; 3], kind: ElementKind, domain: Box3) -> Result<Mesh, MeshError> {
    let [nx, ny, nz] = cells;
    let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let f = [i as f64 / nx as f64, j as f64 / ny as f64, k as f64 / nz as f64];
                let mut p = [0.0; 3];
                for d in 0..3 {
                    p[d] = domain.min[d] + f[d] * (domain.max[d] - domain.min[d]);
                }
                nodes.push(p);
            }
        }
    }
    let mut hexes = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                hexes.push(vec![
                    id(i, j, k),
                    id(i + 1, j, k),
                    id(i + 1, j + 1, k),
                    id(i, j + 1, k),
                    id(i, j, k + 1),
                    id(i + 1, j, k + 1),
                    id(i + 1, j + 1, k + 1),
                    id(i, j + 1, k + 1),
                ]);
            }
        }
    }
    build_from_hexes(nodes, hexes, kind)
}

fn build_from_hexes(mut nodes: Vec<Point>, hexes: Vec<Vec<usize>>, kind: ElementKind) -> Result<Mesh, MeshError> {
    match kind {
        ElementKind::Hexahedron => {
            let elements = hexes.into_iter().map(|h| Element::new(kind, h)).collect();
            Mesh::new(3, nodes, elements)
        }
        ElementKind::Tetrahedron => {
            let mut centres: HashMap<[usize; 4], usize> = HashMap::new();
            let mut elements = Vec::with_capacity(24 * hexes.len());
            for h in &hexes {
                let mut cc = [0.0; 3];
                for &n in h {
                    for d in 0..3 {
                        cc[d] += 0.125 * nodes[n][d];
                    }
                }
                let c = nodes.len();
                nodes.push(cc);
                for lf in ElementKind::Hexahedron.local_faces() {
                    let q: Vec<usize> = lf.iter().map(|&i| h[i]).collect();
                    let mut key = [q[0], q[1], q[2], q[3]];
                    key.sort_unstable();
                    let f = match centres.get(&key) {
                        Some(&f) => f,
                        None => {
                            let mut fc = [0.0; 3];
                            for &n in &q {
                                for d in 0..3 {
                                    fc[d] += 0.25 * nodes[n][d];
                                }
                            }
                            nodes.push(fc);
                            centres.insert(key, nodes.len() - 1);
                            nodes.len() - 1
                        }
                    };
                    for s in 0..4 {
                        elements.push(Element::new(kind, vec![q[s], f, q[(s + 1) % 4], c]));
                    }
                }
            }
            Mesh::new(3, nodes, elements)
        }
        _ => Err(MeshError::Unsupported(format!("{kind:?} in a 3D mesh"))),
    }
}

/// Hexahedral mesh of an open cylinder with `n_theta` cells around,
/// `n_z` along the axis and `n_t` across the wall. Axial spacing follows a
/// symmetric tanh law clustering cells towards both ends; `stretch` is the
/// ratio between the central and end cell lengths (1 gives uniform cells).
pub fn generate_shell_mesh(
    n_theta: usize,
    n_z: usize,
    n_t: usize,
    stretch: f64,
    geometry: ShellGeometry,
) -> Result<Mesh, MeshError> {
    let ShellGeometry { radius, thickness, length } = geometry;
    if n_theta < 3 || n_z == 0 || n_t == 0 {
        return Err(MeshError::DegenerateDomain(format!("{n_theta} x {n_z} x {n_t} cells")));
    }
    if !(stretch >= 1.0) || !stretch.is_finite() {
        return Err(MeshError::DegenerateDomain(format!("stretch {stretch}")));
    }
    if !(thickness > 0.0 && radius > 0.5 * thickness && length > 0.0) {
        return Err(MeshError::DegenerateDomain(format!(
            "radius {radius}, thickness {thickness}, length {length}"
        )));
    }
    // x(s) = tanh(delta s)/tanh(delta) on s in [-1, 1]; the slope ratio
    // between centre and ends is cosh^2(delta).
    let delta = stretch.sqrt().acosh();
    let z: Vec<f64> = (0..=n_z)
        .map(|m| {
            let s = 2.0 * m as f64 / n_z as f64 - 1.0;
            let x = if delta > 0.0 { (delta * s).tanh() / delta.tanh() } else { s };
            0.5 * length * x
        })
        .collect();
    let r: Vec<f64> = (0..=n_t).map(|k| radius - 0.5 * thickness + thickness * k as f64 / n_t as f64).collect();

    let id = |i: usize, k: usize, m: usize| (m * (n_t + 1) + k) * n_theta + (i % n_theta);
    let mut nodes = Vec::with_capacity(n_theta * (n_t + 1) * (n_z + 1));
    for &zm in &z {
        for &rk in &r {
            for i in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n_theta as f64;
                nodes.push([rk * th.cos(), rk * th.sin(), zm]);
            }
        }
    }
    let mut elements = Vec::with_capacity(n_theta * n_t * n_z);
    for m in 0..n_z {
        for k in 0..n_t {
            for i in 0..n_theta {
                elements.push(Element::new(
                    ElementKind::Hexahedron,
                    vec![
                        id(i, k, m),
                        id(i, k + 1, m),
                        id(i + 1, k + 1, m),
                        id(i + 1, k, m),
                        id(i, k, m + 1),
                        id(i, k + 1, m + 1),
                        id(i + 1, k + 1, m + 1),
                        id(i + 1, k, m + 1),
                    ],
                ));
            }
        }
    }
    Mesh::new(3, nodes, elements)
}

/// Randomly perturbs interior nodes by up to a third of the shortest edge.
pub fn distort_mesh(mesh: &Mesh, seed: u64) -> Result<Mesh, MeshError> {
    distort_mesh_with_amplitude(mesh, seed, 1.0 / 3.0)
}

/// Moves each interior node by an independent uniform vector in
/// `[-a, a]^nsd`, `a = fraction * h_min`. Boundary nodes stay fixed.
pub fn distort_mesh_with_amplitude(mesh: &Mesh, seed: u64, fraction: f64) -> Result<Mesh, MeshError> {
    if !(fraction >= 0.0) || !fraction.is_finite() {
        return Err(MeshError::Unsupported(format!("distortion fraction {fraction}")));
    }
    let amplitude = fraction * mesh.min_edge_length();
    let mut nodes = mesh.nodes().to_vec();
    if amplitude > 0.0 {
        let fixed = mesh.boundary_nodes();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (p, &on_boundary) in nodes.iter_mut().zip(&fixed) {
            if on_boundary {
                continue;
            }
            for c in p.iter_mut().take(mesh.nsd()) {
                *c += rng.gen_range(-amplitude..=amplitude);
            }
        }
    }
    mesh.with_nodes(nodes)
}
