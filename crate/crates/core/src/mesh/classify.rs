use std::fmt;
use std::sync::Arc;

use super::{BoundaryKind, Face, FaceTag, Mesh, MeshError, Region};

type Predicate = Arc<dyn Fn(usize, &Face) -> bool + Send + Sync>;

/// Tags every boundary face matched by `predicate`.
#[derive(Clone)]
pub struct BoundaryRule {
    pub kind: BoundaryKind,
    pub region: Region,
    predicate: Predicate,
}

impl BoundaryRule {
    pub fn new(kind: BoundaryKind, region: Region, predicate: impl Fn(usize, &Face) -> bool + Send + Sync + 'static) -> Self {
        Self { kind, region, predicate: Arc::new(predicate) }
    }

    pub fn matches(&self, f: usize, face: &Face) -> bool {
        (self.predicate)(f, face)
    }
}

impl fmt::Debug for BoundaryRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryRule").field("kind", &self.kind).field("region", &self.region).finish()
    }
}

/// Ordered set of geometric tagging rules. A face matched by any Dirichlet
/// rule is Dirichlet; otherwise the first matching rule wins. Faces matched
/// by no rule keep the tag they already carry.
#[derive(Clone, Debug, Default)]
pub struct BoundarySpec {
    rules: Vec<BoundaryRule>,
}

impl BoundarySpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(mut self, rule: BoundaryRule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn dirichlet(self, region: u32, p: impl Fn(usize, &Face) -> bool + Send + Sync + 'static) -> Self {
        self.rule(BoundaryRule::new(BoundaryKind::Dirichlet, Region(region), p))
    }

    pub fn neumann(self, region: u32, p: impl Fn(usize, &Face) -> bool + Send + Sync + 'static) -> Self {
        self.rule(BoundaryRule::new(BoundaryKind::Neumann, Region(region), p))
    }

    pub fn symmetry(self, region: u32, p: impl Fn(usize, &Face) -> bool + Send + Sync + 'static) -> Self {
        self.rule(BoundaryRule::new(BoundaryKind::Symmetry, Region(region), p))
    }

    pub fn rules(&self) -> &[BoundaryRule] {
        &self.rules
    }

    /// Tag for a boundary face, if any rule matches.
    pub fn tag_for(&self, f: usize, face: &Face) -> Option<FaceTag> {
        let mut first = None;
        for r in &self.rules {
            if r.matches(f, face) {
                if r.kind == BoundaryKind::Dirichlet {
                    return Some(FaceTag::Boundary(r.kind, r.region));
                }
                first.get_or_insert(FaceTag::Boundary(r.kind, r.region));
            }
        }
        first
    }

    pub fn apply(&self, mesh: &mut Mesh) -> Result<(), MeshError> {
        let tags: Vec<(usize, FaceTag)> = mesh
            .boundary_faces()
            .filter_map(|f| self.tag_for(f, mesh.face(f)).map(|t| (f, t)))
            .collect();
        for (f, t) in tags {
            mesh.set_tag(f, t)?;
        }
        Ok(())
    }
}

/// Per-element partition of faces into Dirichlet and non-Dirichlet sets,
/// together with the block numbering of the hybrid unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceSets {
    /// Positions into `Mesh::element_faces(e)` of the Dirichlet faces.
    dirichlet: Vec<Vec<usize>>,
    /// Positions into `Mesh::element_faces(e)` of the remaining faces.
    free: Vec<Vec<usize>>,
    block: Vec<Option<usize>>,
    num_blocks: usize,
}

impl FaceSets {
    /// Builds the sets from the tags already stored on the mesh.
    pub fn from_mesh(mesh: &Mesh) -> Result<Self, MeshError> {
        let untagged: Vec<usize> = mesh.boundary_faces().filter(|&f| mesh.face(f).tag == FaceTag::Untagged).collect();
        if !untagged.is_empty() {
            return Err(MeshError::UntaggedBoundary(untagged));
        }
        let mut block = vec![None; mesh.num_faces()];
        let mut num_blocks = 0;
        for (f, face) in mesh.faces().iter().enumerate() {
            if !face.tag.is_dirichlet() {
                block[f] = Some(num_blocks);
                num_blocks += 1;
            }
        }
        let mut dirichlet = Vec::with_capacity(mesh.num_elements());
        let mut free = Vec::with_capacity(mesh.num_elements());
        for e in 0..mesh.num_elements() {
            let (d, b): (Vec<usize>, Vec<usize>) =
                (0..mesh.element_faces(e).len()).partition(|&k| mesh.face(mesh.element_faces(e)[k].face).tag.is_dirichlet());
            dirichlet.push(d);
            free.push(b);
        }
        Ok(Self { dirichlet, free, block, num_blocks })
    }

    pub fn dirichlet(&self, e: usize) -> &[usize] {
        &self.dirichlet[e]
    }

    pub fn non_dirichlet(&self, e: usize) -> &[usize] {
        &self.free[e]
    }

    /// Block index of the hybrid unknown on face `f`, `None` for Dirichlet faces.
    pub fn block(&self, f: usize) -> Option<usize> {
        self.block[f]
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    /// Faces carrying unknowns, in block order.
    pub fn free_faces(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_blocks];
        for (f, b) in self.block.iter().enumerate() {
            if let Some(b) = b {
                out[*b] = f;
            }
        }
        out
    }
}

/// Applies `spec` to the boundary faces and builds the face sets.
pub fn classify_faces(mesh: &mut Mesh, spec: &BoundarySpec) -> Result<FaceSets, MeshError> {
    spec.apply(mesh)?;
    FaceSets::from_mesh(mesh)
}
