//! Broken computational domain: elements, uniquely numbered faces, and the
//! per-element geometric measures used by the one-point quadrature.

mod classify;
mod generate;
mod geometry;
pub mod io;

pub use classify::{classify_faces, BoundaryRule, BoundarySpec, FaceSets};
pub use generate::{
    distort_mesh, distort_mesh_with_amplitude, generate_mapped_2d, generate_shell_mesh,
    generate_structured_2d, generate_structured_3d, Box3, Rect, ShellGeometry,
};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("element {element} is inverted or degenerate (measure {measure:e})")]
    InvertedElement { element: usize, measure: f64 },
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("element {element}: expected {expected} nodes for {kind:?}, got {got}")]
    NodeCount { element: usize, kind: ElementKind, expected: usize, got: usize },
    #[error("element {element} references node {node}, mesh has {num_nodes} nodes")]
    NodeIndex { element: usize, node: usize, num_nodes: usize },
    #[error("element {element} of kind {kind:?} does not fit a {nsd}D mesh")]
    KindDimension { element: usize, kind: ElementKind, nsd: usize },
    #[error("face shared by more than two elements (elements {0:?})")]
    NonManifold(Vec<usize>),
    #[error("untagged boundary faces: {0:?}")]
    UntaggedBoundary(Vec<usize>),
    #[error("boundary condition assigned to interior face {0}")]
    TaggedInterior(usize),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    Triangle,
    Quadrilateral,
    Tetrahedron,
    Hexahedron,
}

// Local faces with the outward orientation of a positively oriented element.
const TRI_FACES: &[&[usize]] = &[&[0, 1], &[1, 2], &[2, 0]];
const QUAD_FACES: &[&[usize]] = &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]];
const TET_FACES: &[&[usize]] = &[&[0, 2, 1], &[0, 1, 3], &[1, 2, 3], &[0, 3, 2]];
const HEX_FACES: &[&[usize]] = &[
    &[0, 3, 2, 1],
    &[4, 5, 6, 7],
    &[0, 1, 5, 4],
    &[1, 2, 6, 5],
    &[2, 3, 7, 6],
    &[3, 0, 4, 7],
];

impl ElementKind {
    pub fn dim(self) -> usize {
        match self {
            ElementKind::Triangle | ElementKind::Quadrilateral => 2,
            ElementKind::Tetrahedron | ElementKind::Hexahedron => 3,
        }
    }

    pub fn num_nodes(self) -> usize {
        match self {
            ElementKind::Triangle => 3,
            ElementKind::Quadrilateral | ElementKind::Tetrahedron => 4,
            ElementKind::Hexahedron => 8,
        }
    }

    pub fn local_faces(self) -> &'static [&'static [usize]] {
        match self {
            ElementKind::Triangle => TRI_FACES,
            ElementKind::Quadrilateral => QUAD_FACES,
            ElementKind::Tetrahedron => TET_FACES,
            ElementKind::Hexahedron => HEX_FACES,
        }
    }

    /// Legacy VTK cell type id.
    pub fn vtk_cell_type(self) -> u8 {
        match self {
            ElementKind::Triangle => 5,
            ElementKind::Quadrilateral => 9,
            ElementKind::Tetrahedron => 10,
            ElementKind::Hexahedron => 12,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Triangle => "tri",
            ElementKind::Quadrilateral => "quad",
            ElementKind::Tetrahedron => "tet",
            ElementKind::Hexahedron => "hex",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "tri" | "triangle" => Some(ElementKind::Triangle),
            "quad" | "quadrilateral" => Some(ElementKind::Quadrilateral),
            "tet" | "tetrahedron" => Some(ElementKind::Tetrahedron),
            "hex" | "hexahedron" => Some(ElementKind::Hexahedron),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    pub nodes: Vec<usize>,
}

impl Element {
    pub fn new(kind: ElementKind, nodes: Vec<usize>) -> Self {
        Self { kind, nodes }
    }
}

/// Label distinguishing boundary patches that carry different data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Region(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Dirichlet,
    /// Traction boundary (xi = 1).
    Neumann,
    /// Zero normal displacement and zero tangential traction (xi = 0).
    Symmetry,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::Dirichlet => "dirichlet",
            BoundaryKind::Neumann => "neumann",
            BoundaryKind::Symmetry => "symmetry",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "dirichlet" => Some(BoundaryKind::Dirichlet),
            "neumann" => Some(BoundaryKind::Neumann),
            "symmetry" => Some(BoundaryKind::Symmetry),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceTag {
    Interior,
    /// Boundary face not yet classified.
    Untagged,
    Boundary(BoundaryKind, Region),
}

impl FaceTag {
    pub fn is_dirichlet(self) -> bool {
        matches!(self, FaceTag::Boundary(BoundaryKind::Dirichlet, _))
    }

    /// The `xi` switch of the generalised Neumann condition.
    pub fn xi(self) -> Option<f64> {
        match self {
            FaceTag::Boundary(BoundaryKind::Neumann, _) => Some(1.0),
            FaceTag::Boundary(BoundaryKind::Symmetry, _) => Some(0.0),
            _ => None,
        }
    }

    pub fn region(self) -> Option<Region> {
        match self {
            FaceTag::Boundary(_, r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Nodes in the orientation of the owning element.
    pub nodes: Vec<usize>,
    pub owner: usize,
    pub neighbor: Option<usize>,
    pub area: f64,
    /// Unit normal pointing out of the owner.
    pub normal: Point,
    pub barycenter: Point,
    pub tag: FaceTag,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }
}

/// A face as seen from one of its elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceRef {
    pub face: usize,
    /// +1 for the owner, -1 for the neighbour.
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nsd: usize,
    nodes: Vec<Point>,
    elements: Vec<Element>,
    faces: Vec<Face>,
    elem_faces: Vec<Vec<FaceRef>>,
    volumes: Vec<f64>,
    centroids: Vec<Point>,
}

type FaceKey = [usize; 4];

fn face_key(nodes: &[usize]) -> FaceKey {
    let mut key = [usize::MAX; 4];
    key[..nodes.len()].copy_from_slice(nodes);
    key[..nodes.len()].sort_unstable();
    key
}

impl Mesh {
    /// Builds faces and geometry from raw connectivity.
    pub fn new(nsd: usize, nodes: Vec<Point>, elements: Vec<Element>) -> Result<Self, MeshError> {
        if !(nsd == 2 || nsd == 3) {
            return Err(MeshError::Unsupported(format!("{nsd} spatial dimensions")));
        }
        for (e, el) in elements.iter().enumerate() {
            if el.kind.dim() != nsd {
                return Err(MeshError::KindDimension { element: e, kind: el.kind, nsd });
            }
            if el.nodes.len() != el.kind.num_nodes() {
                return Err(MeshError::NodeCount {
                    element: e,
                    kind: el.kind,
                    expected: el.kind.num_nodes(),
                    got: el.nodes.len(),
                });
            }
            if let Some(&n) = el.nodes.iter().find(|&&n| n >= nodes.len()) {
                return Err(MeshError::NodeIndex { element: e, node: n, num_nodes: nodes.len() });
            }
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut elem_faces = Vec::with_capacity(elements.len());
        let mut lookup: HashMap<FaceKey, usize> = HashMap::new();
        for (e, el) in elements.iter().enumerate() {
            let local = el.kind.local_faces();
            let mut refs = Vec::with_capacity(local.len());
            for lf in local {
                let fnodes: Vec<usize> = lf.iter().map(|&i| el.nodes[i]).collect();
                let key = face_key(&fnodes);
                match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.neighbor.is_some() {
                            return Err(MeshError::NonManifold(vec![face.owner, face.neighbor.unwrap(), e]));
                        }
                        face.neighbor = Some(e);
                        face.tag = FaceTag::Interior;
                        refs.push(FaceRef { face: f, sign: -1.0 });
                    }
                    None => {
                        lookup.insert(key, faces.len());
                        refs.push(FaceRef { face: faces.len(), sign: 1.0 });
                        faces.push(Face {
                            nodes: fnodes,
                            owner: e,
                            neighbor: None,
                            area: 0.0,
                            normal: [0.0; 3],
                            barycenter: [0.0; 3],
                            tag: FaceTag::Untagged,
                        });
                    }
                }
            }
            elem_faces.push(refs);
        }

        let mut mesh = Mesh {
            nsd,
            nodes,
            elements,
            faces,
            elem_faces,
            volumes: Vec::new(),
            centroids: Vec::new(),
        };
        mesh.compute_geometry()?;
        Ok(mesh)
    }

    /// Recomputes element measures, centroids and face areas, normals and
    /// barycenters from the current node coordinates.
    pub fn compute_geometry(&mut self) -> Result<(), MeshError> {
        geometry::compute(self)
    }

    pub fn nsd(&self) -> usize {
        self.nsd
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn element_faces(&self, e: usize) -> &[FaceRef] {
        &self.elem_faces[e]
    }

    pub fn volume(&self, e: usize) -> f64 {
        self.volumes[e]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn centroid(&self, e: usize) -> Point {
        self.centroids[e]
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Outward unit normal of face `f` as seen from the element holding `r`.
    pub fn outward_normal(&self, r: FaceRef) -> Point {
        let n = self.faces[r.face].normal;
        [r.sign * n[0], r.sign * n[1], r.sign * n[2]]
    }

    pub fn num_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces.iter().enumerate().filter(|(_, f)| f.is_boundary()).map(|(i, _)| i)
    }

    /// Assigns a boundary tag. Interior faces cannot carry boundary conditions.
    pub fn set_tag(&mut self, f: usize, tag: FaceTag) -> Result<(), MeshError> {
        let face = &mut self.faces[f];
        if !face.is_boundary() && tag != FaceTag::Interior {
            return Err(MeshError::TaggedInterior(f));
        }
        face.tag = tag;
        Ok(())
    }

    /// Largest distance between two nodes of element `e`.
    pub fn element_diameter(&self, e: usize) -> f64 {
        let nodes = &self.elements[e].nodes;
        let mut d2 = 0.0f64;
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                d2 = d2.max(dist2(&self.nodes[a], &self.nodes[b]));
            }
        }
        d2.sqrt()
    }

    /// Characteristic size: maximum element diameter.
    pub fn max_element_diameter(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.element_diameter(e)).fold(0.0, f64::max)
    }

    /// Shortest element edge.
    pub fn min_edge_length(&self) -> f64 {
        let mut best = f64::INFINITY;
        for face in &self.faces {
            let n = &face.nodes;
            if self.nsd == 2 {
                best = best.min(dist2(&self.nodes[n[0]], &self.nodes[n[1]]));
            } else {
                for i in 0..n.len() {
                    let j = (i + 1) % n.len();
                    best = best.min(dist2(&self.nodes[n[i]], &self.nodes[n[j]]));
                }
            }
        }
        best.sqrt()
    }

    /// Nodes lying on at least one boundary face.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut on = vec![false; self.nodes.len()];
        for f in self.faces.iter().filter(|f| f.is_boundary()) {
            for &n in &f.nodes {
                on[n] = true;
            }
        }
        on
    }

    /// Replaces node coordinates keeping connectivity and tags.
    pub fn with_nodes(&self, nodes: Vec<Point>) -> Result<Mesh, MeshError> {
        if nodes.len() != self.nodes.len() {
            return Err(MeshError::Unsupported("node count changed".into()));
        }
        let mut m = self.clone();
        m.nodes = nodes;
        m.compute_geometry()?;
        Ok(m)
    }
}

/// Fills the geometric quantities of a mesh.
pub fn compute_geometry(mut mesh: Mesh) -> Result<Mesh, MeshError> {
    mesh.compute_geometry()?;
    Ok(mesh)
}

pub(crate) fn dist2(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}
