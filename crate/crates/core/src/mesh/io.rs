//! Plain-text mesh exchange format.
//!
//! ```text
//! fcfv-mesh 1
//! dimension 2
//! nodes 4
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! elements 1
//! quad 0 1 2 3
//! boundary 4
//! dirichlet 0 0 1
//! neumann 1 1 2
//! neumann 1 2 3
//! symmetry 2 3 0
//! ```
//!
//! Node indices are zero based. Element kinds are `tri`, `quad`, `tet` and
//! `hex` with the usual counter-clockwise / VTK node order. Each boundary
//! line names a condition (`dirichlet`, `neumann` or `symmetry`), a region
//! number and the face nodes in any order. Blank lines and text after `#`
//! are ignored. Boundary faces may be omitted and tagged later.

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryKind, Element, ElementKind, FaceTag, Mesh, MeshError, Point, Region};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Result<Vec<&'a str>, MeshError> {
        for (i, raw) in self.inner.by_ref() {
            self.line = i + 1;
            let text = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = text.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok(tokens);
            }
        }
        Err(MeshError::Parse { line: self.line + 1, message: "unexpected end of file".into() })
    }

    fn err(&self, message: impl Into<String>) -> MeshError {
        MeshError::Parse { line: self.line, message: message.into() }
    }

    fn header(&mut self, key: &str) -> Result<usize, MeshError> {
        let t = self.next_tokens()?;
        if t.len() != 2 || t[0] != key {
            return Err(self.err(format!("expected `{key} <count>`")));
        }
        t[1].parse().map_err(|_| self.err(format!("invalid {key} count `{}`", t[1])))
    }

    fn index(&self, s: &str) -> Result<usize, MeshError> {
        s.parse().map_err(|_| self.err(format!("invalid index `{s}`")))
    }
}

/// Parses a mesh, applying the boundary tags it lists.
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let t = lines.next_tokens()?;
    if t != ["fcfv-mesh", "1"] {
        return Err(lines.err("expected header `fcfv-mesh 1`"));
    }
    let nsd = lines.header("dimension")?;
    if nsd != 2 && nsd != 3 {
        return Err(lines.err(format!("dimension must be 2 or 3, got {nsd}")));
    }

    let n_nodes = lines.header("nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let t = lines.next_tokens()?;
        if t.len() != nsd {
            return Err(lines.err(format!("expected {nsd} coordinates, got {}", t.len())));
        }
        let mut p: Point = [0.0; 3];
        for (c, s) in p.iter_mut().zip(&t) {
            *c = s.parse().map_err(|_| lines.err(format!("invalid coordinate `{s}`")))?;
            if !c.is_finite() {
                return Err(lines.err(format!("non-finite coordinate `{s}`")));
            }
        }
        nodes.push(p);
    }

    let n_elements = lines.header("elements")?;
    let mut elements = Vec::with_capacity(n_elements);
    for _ in 0..n_elements {
        let t = lines.next_tokens()?;
        let kind = ElementKind::from_name(t[0]).ok_or_else(|| lines.err(format!("unknown element kind `{}`", t[0])))?;
        if kind.dim() != nsd {
            return Err(lines.err(format!("{} element in a {nsd}D mesh", t[0])));
        }
        if t.len() != 1 + kind.num_nodes() {
            return Err(lines.err(format!("{} element needs {} nodes", t[0], kind.num_nodes())));
        }
        let ids = t[1..].iter().map(|s| lines.index(s)).collect::<Result<Vec<_>, _>>()?;
        if let Some(&n) = ids.iter().find(|&&n| n >= n_nodes) {
            return Err(lines.err(format!("node {n} out of range")));
        }
        elements.push(Element::new(kind, ids));
    }

    let mut tags = Vec::new();
    let n_boundary = match lines.next_tokens() {
        Ok(t) if t.len() == 2 && t[0] == "boundary" => {
            t[1].parse::<usize>().map_err(|_| lines.err(format!("invalid boundary count `{}`", t[1])))?
        }
        Ok(_) => return Err(lines.err("expected `boundary <count>`")),
        Err(_) => 0,
    };
    for _ in 0..n_boundary {
        let t = lines.next_tokens()?;
        let kind = BoundaryKind::from_name(t[0]).ok_or_else(|| lines.err(format!("unknown boundary kind `{}`", t[0])))?;
        if t.len() < 4 {
            return Err(lines.err("boundary line needs a region and face nodes"));
        }
        let region: u32 = t[1].parse().map_err(|_| lines.err(format!("invalid region `{}`", t[1])))?;
        let mut ids = t[2..].iter().map(|s| lines.index(s)).collect::<Result<Vec<_>, _>>()?;
        ids.sort_unstable();
        tags.push((lines.line, ids, FaceTag::Boundary(kind, Region(region))));
    }

    let mut mesh = Mesh::new(nsd, nodes, elements)?;
    let mut by_nodes = std::collections::HashMap::new();
    for f in mesh.boundary_faces().collect::<Vec<_>>() {
        let mut key = mesh.face(f).nodes.clone();
        key.sort_unstable();
        by_nodes.insert(key, f);
    }
    for (line, key, tag) in tags {
        let f = *by_nodes
            .get(&key)
            .ok_or_else(|| MeshError::Parse { line, message: format!("no boundary face with nodes {key:?}") })?;
        mesh.set_tag(f, tag)?;
    }
    Ok(mesh)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_mesh(&text)
}

/// Serialises a mesh with the tags of its boundary faces. Coordinates use the
/// shortest representation that parses back to the same value.
pub fn format_mesh(mesh: &Mesh) -> String {
    let nsd = mesh.nsd();
    let mut s = String::new();
    writeln!(s, "fcfv-mesh 1\ndimension {nsd}\nnodes {}", mesh.nodes().len()).unwrap();
    for p in mesh.nodes() {
        let coords: Vec<String> = p[..nsd].iter().map(|c| c.to_string()).collect();
        writeln!(s, "{}", coords.join(" ")).unwrap();
    }
    writeln!(s, "elements {}", mesh.num_elements()).unwrap();
    for el in mesh.elements() {
        let ids: Vec<String> = el.nodes.iter().map(|n| n.to_string()).collect();
        writeln!(s, "{} {}", el.kind.name(), ids.join(" ")).unwrap();
    }
    let tagged: Vec<usize> = mesh.boundary_faces().filter(|&f| matches!(mesh.face(f).tag, FaceTag::Boundary(..))).collect();
    writeln!(s, "boundary {}", tagged.len()).unwrap();
    for f in tagged {
        let face = mesh.face(f);
        if let FaceTag::Boundary(kind, Region(r)) = face.tag {
            let ids: Vec<String> = face.nodes.iter().map(|n| n.to_string()).collect();
            writeln!(s, "{} {r} {}", kind.name(), ids.join(" ")).unwrap();
        }
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path.as_ref(), format_mesh(mesh))
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.as_ref().display())))
}
