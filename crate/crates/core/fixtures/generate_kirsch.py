"""Generates the unstructured quarter-plate-with-hole meshes.

The domain is [0, L]^2 minus the disc of radius a at the origin. Points are
laid on curves interpolating between the hole and the outer square, graded
so the spacing grows linearly with the distance from the hole, jittered and
triangulated by Delaunay. Each level halves the spacing.

Tags: symmetry (region 2) on x=0 and y=0, Neumann (region 1) on x=L and
y=L, Neumann (region 0) on the hole.

Usage: python3 generate_kirsch.py  (writes kirsch_1.mesh .. kirsch_3.mesh)
"""

import math
import os

import numpy as np
from scipy.spatial import Delaunay

L = 4.0
A = 1.0
GROWTH = 2.0
JITTER = 0.2
SEED = 20240517
SPACINGS = [0.05, 0.025, 0.0125]


def outer(theta):
    if theta <= math.pi / 4:
        return np.array([L, L * math.tan(theta)])
    return np.array([L / math.tan(theta), L])


def curve(theta, s):
    inner = A * np.array([math.cos(theta), math.sin(theta)])
    return inner + s * (outer(theta) - inner)


def points(h0, rng):
    mean_ray = 3.6
    layers = [0.0]
    while layers[-1] < 1.0:
        d = layers[-1] * mean_ray
        layers.append(layers[-1] + h0 * (1.0 + GROWTH * d) / mean_ray)
    # Stretch so the last layer lands on the square.
    layers = np.array(layers) / layers[-1]
    pts = []
    for k, s in enumerate(layers):
        thetas = np.linspace(0.0, math.pi / 2, 401)
        xy = np.array([curve(t, s) for t in thetas])
        length = np.sum(np.linalg.norm(np.diff(xy, axis=0), axis=1))
        spacing = h0 * (1.0 + GROWTH * s * mean_ray)
        n = max(2, int(math.ceil(length / spacing)))
        boundary_layer = k == 0 or k == len(layers) - 1
        for i in range(n + 1):
            t = 0.5 * math.pi * i / n
            p = curve(t, s)
            on_axis = i == 0 or i == n
            if not boundary_layer and not on_axis:
                p = p + rng.uniform(-JITTER, JITTER, 2) * spacing
            elif on_axis and not boundary_layer:
                # Slide along the axis only.
                j = 0 if i == 0 else 1
                p[j] += rng.uniform(-JITTER, JITTER) * spacing
            pts.append(p)
    pts.append(np.array([L, L]))
    pts = np.array(pts)
    _, keep = np.unique(np.round(pts, 12), axis=0, return_index=True)
    return pts[np.sort(keep)]


def boundary_tag(p, q):
    eps = 1e-9
    if abs(p[1]) < eps and abs(q[1]) < eps:
        return ("symmetry", 2)
    if abs(p[0]) < eps and abs(q[0]) < eps:
        return ("symmetry", 2)
    if (abs(p[0] - L) < eps and abs(q[0] - L) < eps) or (abs(p[1] - L) < eps and abs(q[1] - L) < eps):
        return ("neumann", 1)
    if abs(np.hypot(*p) - A) < eps and abs(np.hypot(*q) - A) < eps:
        return ("neumann", 0)
    return None


def build(h0, rng):
    pts = points(h0, rng)
    tri = Delaunay(pts).simplices
    kept = []
    for t in tri:
        x = pts[t]
        c = x.mean(axis=0)
        if np.hypot(*c) < A:
            continue
        area = 0.5 * ((x[1, 0] - x[0, 0]) * (x[2, 1] - x[0, 1]) - (x[2, 0] - x[0, 0]) * (x[1, 1] - x[0, 1]))
        if abs(area) < 1e-6 * h0 * h0:
            raise RuntimeError("sliver triangle")
        kept.append(t if area > 0 else t[[0, 2, 1]])
    kept = np.array(kept)
    used = np.unique(kept)
    remap = -np.ones(len(pts), dtype=int)
    remap[used] = np.arange(len(used))
    pts = pts[used]
    kept = remap[kept]
    edges = {}
    for t in kept:
        for i in range(3):
            e = tuple(sorted((t[i], t[(i + 1) % 3])))
            edges[e] = edges.get(e, 0) + 1
    tags = []
    for e, count in edges.items():
        if count == 1:
            tag = boundary_tag(pts[e[0]], pts[e[1]])
            if tag is None:
                raise RuntimeError(f"boundary edge off the domain boundary: {pts[e[0]]} {pts[e[1]]}")
            tags.append((tag, e))
    return pts, kept, sorted(tags, key=lambda x: (x[0][1], x[1]))


def write(path, h0, pts, tris, tags):
    with open(path, "w") as f:
        f.write(f"# quarter plate with hole, L={L}, a={A}, hole spacing {h0}, seed {SEED}\n")
        f.write("fcfv-mesh 1\ndimension 2\n")
        f.write(f"nodes {len(pts)}\n")
        for p in pts:
            f.write(f"{float(p[0])!r} {float(p[1])!r}\n")
        f.write(f"elements {len(tris)}\n")
        for t in tris:
            f.write(f"tri {t[0]} {t[1]} {t[2]}\n")
        f.write(f"boundary {len(tags)}\n")
        for (kind, region), e in tags:
            f.write(f"{kind} {region} {e[0]} {e[1]}\n")


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    for level, h0 in enumerate(SPACINGS, start=1):
        rng = np.random.default_rng(SEED + level)
        pts, tris, tags = build(h0, rng)
        path = os.path.join(here, f"kirsch_{level}.mesh")
        write(path, h0, pts, tris, tags)
        print(f"{path}: {len(pts)} nodes, {len(tris)} triangles, {len(tags)} boundary faces")


if __name__ == "__main__":
    main()
