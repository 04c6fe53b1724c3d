"""Indexed polygon meshes and their basic measurements."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GeometryError(Exception):
    """Construction failure with a stable code (e.g. ``TubuleOverlap``)."""

    def __init__(self, code: str, message: str, **context):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        ctx = {k: v for k, v in self.context.items() if isinstance(v, (str, int, float))}
        return {"code": self.code, "message": self.message, **ctx}


@dataclass
class Mesh:
    vertices: np.ndarray
    faces: list
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.meta is None:
            self.meta = {}
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        if isinstance(self.faces, np.ndarray):
            self.faces = list(map(tuple, self.faces.tolist()))
        else:
            self.faces = [tuple(map(int, f)) for f in self.faces]
        self._tris = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def triangles(self) -> np.ndarray:
        """Fan triangulation of every face, shape (T, 3)."""
        if self._tris is None:
            by_size: dict[int, list] = {}
            for f in self.faces:
                by_size.setdefault(len(f), []).append(f)
            parts = []
            for n in sorted(by_size):
                arr = np.asarray(by_size[n], dtype=np.int64)
                for k in range(1, n - 1):
                    parts.append(arr[:, [0, k, k + 1]])
            self._tris = (np.concatenate(parts) if parts
                          else np.zeros((0, 3), dtype=np.int64))
        return self._tris

    def copy(self, **changes) -> "Mesh":
        out = Mesh(self.vertices.copy(), list(self.faces), self.label, dict(self.meta))
        for key, value in changes.items():
            setattr(out, key, value)
        return out

    def translated(self, offset) -> "Mesh":
        return Mesh(self.vertices + np.asarray(offset, dtype=float), self.faces,
                    self.label, dict(self.meta))

    def flipped(self) -> "Mesh":
        return Mesh(self.vertices.copy(), [tuple(reversed(f)) for f in self.faces],
                    self.label, dict(self.meta))

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def check(self) -> None:
        """Raise ``ValueError`` when an index or degeneracy invariant fails."""
        n = len(self.vertices)
        if not np.isfinite(self.vertices).all():
            raise ValueError("non-finite vertex")
        for f in self.faces:
            if len(f) < 3 or len(set(f)) != len(f):
                raise ValueError(f"degenerate face {f}")
            if min(f) < 0 or max(f) >= n:
                raise ValueError(f"face index out of range {f}")
        if self.faces:
            v = self.vertices
            t = self.triangles()
            cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
            face_vec = np.zeros((len(self.faces), 3))
            np.add.at(face_vec, owner_order(self.faces), cross)
            if (np.linalg.norm(face_vec, axis=1) <= 0).any():
                raise ValueError("zero-area face")

    @staticmethod
    def merge(meshes: list["Mesh"], label: str = "", meta: dict | None = None) -> "Mesh":
        verts, faces, base = [], [], 0
        for m in meshes:
            verts.append(m.vertices)
            faces.extend(tuple(i + base for i in f) for f in m.faces)
            base += len(m.vertices)
        v = np.concatenate(verts) if verts else np.zeros((0, 3))
        return Mesh(v, faces, label, dict(meta or {}))


def owner_order(faces: list) -> np.ndarray:
    """Face id of every fan triangle in the order :meth:`Mesh.triangles` emits them."""
    by_size: dict[int, list] = {}
    for i, f in enumerate(faces):
        by_size.setdefault(len(f), []).append(i)
    parts = []
    for n in sorted(by_size):
        ids = np.asarray(by_size[n])
        parts.extend([ids] * (n - 2))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=int)


def triangle_areas(mesh: Mesh) -> np.ndarray:
    v = mesh.vertices
    t = mesh.triangles()
    cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    return 0.5 * np.linalg.norm(cross, axis=1)


def signed_volume(mesh: Mesh) -> float:
    """Divergence-theorem volume; negative when the winding is inverted."""
    v = mesh.vertices
    t = mesh.triangles()
    if len(t) == 0:
        return 0.0
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def centroid(mesh: Mesh) -> np.ndarray:
    """Volume centroid of a closed mesh."""
    v = mesh.vertices
    t = mesh.triangles()
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    vols = np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0
    total = vols.sum()
    if abs(total) < 1e-300:
        return v.mean(axis=0)
    return ((a + b + c) / 4.0 * vols[:, None]).sum(axis=0) / total


def vertex_components(n_vertices: int, faces: list) -> np.ndarray:
    """Component label per vertex from face adjacency (isolated vertices get their own)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    rows, cols = [], []
    for f in faces:
        for k in range(1, len(f)):
            rows.append(f[0])
            cols.append(f[k])
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_vertices, n_vertices))
    _, labels = connected_components(graph, directed=False)
    return labels


def mesh_metrics(mesh: Mesh) -> dict:
    vol = signed_volume(mesh)
    lo, hi = mesh.bbox() if mesh.n_vertices else (np.zeros(3), np.zeros(3))
    bbox_volume = float(np.prod(hi - lo))
    labels = vertex_components(mesh.n_vertices, mesh.faces) if mesh.n_vertices else []
    used = sorted({i for f in mesh.faces for i in f})
    hint = len(set(np.asarray(labels)[used])) if used else 0
    return {
        "volume": vol,
        "bbox": [lo.tolist(), hi.tolist()],
        "porosity_vs_bbox": (1.0 - vol / bbox_volume) if bbox_volume > 0 else 0.0,
        "component_hint": hint,
        "negative_volume": vol < 0,
    }


def box(lo, hi, label: str = "", meta: dict | None = None) -> Mesh:
    """Axis-aligned box with outward CCW quads."""
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    v = [
        (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
        (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
    ]
    faces = [
        (0, 3, 2, 1),  # -z
        (4, 5, 6, 7),  # +z
        (0, 1, 5, 4),  # -y
        (2, 3, 7, 6),  # +y
        (1, 2, 6, 5),  # +x
        (3, 0, 4, 7),  # -x
    ]
    return Mesh(np.array(v, dtype=float), faces, label, dict(meta or {}))


def prism(profile: np.ndarray, origin, u_axis, v_axis, direction, length: float,
          label: str = "", meta: dict | None = None) -> Mesh:
    """Extrude a convex 2D ``profile`` (in the u/v frame) along ``direction``."""
    profile = np.asarray(profile, dtype=float)
    n = len(profile)
    origin = np.asarray(origin, dtype=float)
    u_axis, v_axis, direction = (np.asarray(a, dtype=float) for a in (u_axis, v_axis, direction))
    ring = origin + profile[:, :1] * u_axis + profile[:, 1:2] * v_axis
    verts = np.concatenate([ring, ring + length * direction])
    faces = [tuple(range(n - 1, -1, -1)), tuple(range(n, 2 * n))]
    faces += [(i, (i + 1) % n, n + (i + 1) % n, n + i) for i in range(n)]
    mesh = Mesh(verts, faces, label, dict(meta or {}))
    if signed_volume(mesh) < 0:
        mesh = mesh.flipped()
    return mesh
