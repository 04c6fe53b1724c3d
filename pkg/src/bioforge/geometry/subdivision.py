from __future__ import annotations

import numpy as np

from .mesh import GeometryError, Mesh


def _corners(faces: list) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    sizes = np.fromiter((len(f) for f in faces), dtype=np.int64, count=len(faces))
    flat = np.fromiter((i for f in faces for i in f), dtype=np.int64, count=int(sizes.sum()))
    owner = np.repeat(np.arange(len(faces)), sizes)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    local = np.arange(len(flat)) - np.repeat(starts, sizes)
    nxt = np.repeat(starts, sizes) + (local + 1) % np.repeat(sizes, sizes)
    prv = np.repeat(starts, sizes) + (local - 1) % np.repeat(sizes, sizes)
    return flat, owner, nxt, prv


def catmull_clark(mesh: Mesh, levels: int = 1) -> Mesh:
    """Catmull-Clark subdivision of a closed 2-manifold polygon mesh.

    Vertex order of each output level: original vertices, then edge points,
    then face points, so V' = V + E + F and every face becomes quads.
    """
    if not 0 <= levels <= 3:
        raise GeometryError("ValueOutOfRange", f"levels must be in [0, 3], got {levels}")
    out = mesh
    for _ in range(levels):
        out = _subdivide_once(out)
    return out


def _subdivide_once(mesh: Mesh) -> Mesh:
    V = mesh.vertices
    nv = len(V)
    faces = mesh.faces
    nf = len(faces)
    flat, owner, nxt, prv = _corners(faces)
    a = flat
    b = flat[nxt]

    # undirected edges; each must be used exactly twice with opposite directions
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    keys = lo * nv + hi
    uniq, edge_of_corner, counts = np.unique(keys, return_inverse=True, return_counts=True)
    if (counts != 2).any():
        raise GeometryError("NotManifold", "every edge must be shared by exactly two faces")
    directed = np.unique(a * nv + b)
    if len(directed) != len(a):
        raise GeometryError("NotManifold", "inconsistent face orientation")
    ne = len(uniq)
    e0 = uniq // nv
    e1 = uniq % nv

    face_count = np.bincount(owner, minlength=nf).astype(float)
    face_pts = np.zeros((nf, 3))
    np.add.at(face_pts, owner, V[flat])
    face_pts /= face_count[:, None]

    # the two faces of each edge
    order = np.argsort(edge_of_corner, kind="stable")
    edge_faces = owner[order].reshape(ne, 2)
    edge_pts = (V[e0] + V[e1] + face_pts[edge_faces[:, 0]] + face_pts[edge_faces[:, 1]]) / 4.0

    valence = np.bincount(np.concatenate([e0, e1]), minlength=nv).astype(float)
    if (valence < 3).any():
        raise GeometryError("NotManifold", "vertex with fewer than three edges")
    q = np.zeros((nv, 3))
    np.add.at(q, flat, face_pts[owner])
    q /= np.bincount(flat, minlength=nv).astype(float)[:, None]
    mids = (V[e0] + V[e1]) / 2.0
    r = np.zeros((nv, 3))
    np.add.at(r, e0, mids)
    np.add.at(r, e1, mids)
    r /= valence[:, None]
    n = valence[:, None]
    new_v = (q + 2.0 * r + (n - 3.0) * V) / n

    vertices = np.concatenate([new_v, edge_pts, face_pts])
    quads = np.stack([
        flat,
        nv + edge_of_corner,
        nv + ne + owner,
        nv + edge_of_corner[prv],
    ], axis=1)
    return Mesh(vertices, quads, mesh.label, dict(mesh.meta))
