use super::{Mesh, MeshError, Point};

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

/// Fan triangles of a polygonal face in its stored orientation.
fn fan(nodes: &[usize]) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
    (1..nodes.len() - 1).map(move |i| (nodes[0], nodes[i], nodes[i + 1]))
}

pub(super) fn compute(mesh: &mut Mesh) -> Result<(), MeshError> {
    let nsd = mesh.nsd;
    let x = &mesh.nodes;

    for (f, face) in mesh.faces.iter_mut().enumerate() {
        let (area, normal, bary) = if nsd == 2 {
            let a = &x[face.nodes[0]];
            let b = &x[face.nodes[1]];
            let t = sub(b, a);
            let len = norm(&t);
            let n = [t[1] / len, -t[0] / len, 0.0];
            (len, n, [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.0])
        } else {
            // The vector area is independent of the triangulation, so the
            // discrete closure identity holds exactly per element.
            let mut va = [0.0; 3];
            let mut c = [0.0; 3];
            let mut wsum = 0.0;
            for (i, j, k) in fan(&face.nodes) {
                let tri = cross(&sub(&x[j], &x[i]), &sub(&x[k], &x[i]));
                let w = 0.5 * norm(&tri);
                for d in 0..3 {
                    va[d] += 0.5 * tri[d];
                    c[d] += w * (x[i][d] + x[j][d] + x[k][d]) / 3.0;
                }
                wsum += w;
            }
            let area = norm(&va);
            if wsum > 0.0 {
                for v in c.iter_mut() {
                    *v /= wsum;
                }
            }
            (area, [va[0] / area, va[1] / area, va[2] / area], c)
        };
        if !(area > 0.0) || !area.is_finite() {
            return Err(MeshError::DegenerateFace { face: f, area });
        }
        face.area = area;
        face.normal = normal;
        face.barycenter = bary;
    }

    let mut volumes = Vec::with_capacity(mesh.elements.len());
    let mut centroids = Vec::with_capacity(mesh.elements.len());
    for (e, el) in mesh.elements.iter().enumerate() {
        let inv = 1.0 / el.nodes.len() as f64;
        let mut x0 = [0.0; 3];
        for &n in &el.nodes {
            for d in 0..3 {
                x0[d] += inv * x[n][d];
            }
        }
        let mut vol = 0.0;
        let mut c = [0.0; 3];
        // Own-orientation faces: simplices spanned from the vertex average.
        // Volumes of inverted pieces come out negative.
        let mut any_negative = false;
        for r in &mesh.elem_faces[e] {
            let face = &mesh.faces[r.face];
            if nsd == 2 {
                let (a, b) = if r.sign > 0.0 {
                    (&x[face.nodes[0]], &x[face.nodes[1]])
                } else {
                    (&x[face.nodes[1]], &x[face.nodes[0]])
                };
                let pa = sub(a, &x0);
                let pb = sub(b, &x0);
                let v = 0.5 * (pa[0] * pb[1] - pa[1] * pb[0]);
                any_negative |= v <= 0.0;
                vol += v;
                for d in 0..2 {
                    c[d] += v * (x0[d] + a[d] + b[d]) / 3.0;
                }
            } else {
                for (i, j, k) in fan(&face.nodes) {
                    let (j, k) = if r.sign > 0.0 { (j, k) } else { (k, j) };
                    let v = dot(&sub(&x[i], &x0), &cross(&sub(&x[j], &x0), &sub(&x[k], &x0))) / 6.0;
                    any_negative |= v <= 0.0;
                    vol += v;
                    for d in 0..3 {
                        c[d] += v * (x0[d] + x[i][d] + x[j][d] + x[k][d]) / 4.0;
                    }
                }
            }
        }
        if !(vol > 0.0) || any_negative || !vol.is_finite() {
            return Err(MeshError::InvertedElement { element: e, measure: vol });
        }
        for v in c.iter_mut() {
            *v /= vol;
        }
        if nsd == 2 {
            c[2] = 0.0;
        }
        volumes.push(vol);
        centroids.push(c);
    }

    mesh.volumes = volumes;
    mesh.centroids = centroids;
    Ok(())
}
