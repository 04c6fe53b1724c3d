"""Voronoi cells by successive half-space clipping of a convex polyhedron."""

from __future__ import annotations

import numpy as np

from .mesh import GeometryError, Mesh


class ConvexPolyhedron:
    """Closed convex polyhedron with shared vertex indices (faces CCW outward)."""

    __slots__ = ("vertices", "faces")

    def __init__(self, vertices: np.ndarray, faces: list[list[int]]):
        self.vertices = np.asarray(vertices, dtype=float)
        self.faces = faces

    @classmethod
    def box(cls, lo, hi) -> "ConvexPolyhedron":
        x0, y0, z0 = lo
        x1, y1, z1 = hi
        v = np.array([
            (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
            (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
        ], dtype=float)
        faces = [[0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4], [2, 3, 7, 6], [1, 2, 6, 5], [3, 0, 4, 7]]
        return cls(v, faces)

    def clip(self, normal: np.ndarray, offset: float, eps: float) -> "ConvexPolyhedron | None":
        """Keep the part with ``normal . x <= offset``; ``None`` when nothing remains."""
        d = self.vertices @ normal - offset
        if (d <= eps).all():
            return self
        if (d >= -eps).all():
            return None
        inside = d <= eps
        on_plane = np.abs(d) <= eps
        verts = list(self.vertices)
        new_vertex: dict[tuple[int, int], int] = {}

        def edge_point(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            idx = new_vertex.get(key)
            if idx is None:
                i, j = key
                t = d[i] / (d[i] - d[j])
                verts.append(self.vertices[i] + t * (self.vertices[j] - self.vertices[i]))
                idx = len(verts) - 1
                new_vertex[key] = idx
            return idx

        faces = []
        for face in self.faces:
            out = []
            n = len(face)
            for k in range(n):
                a, b = face[k], face[(k + 1) % n]
                if inside[a]:
                    out.append(a)
                da, db = d[a], d[b]
                if (da < -eps and db > eps) or (da > eps and db < -eps):
                    out.append(edge_point(a, b))
            if len(out) >= 3:
                faces.append(out)

        cap = sorted({i for f in faces for i in f
                      if i >= len(self.vertices) or on_plane[i]})
        if len(cap) >= 3:
            pts = np.array([verts[i] for i in cap])
            center = pts.mean(axis=0)
            u = pts[0] - center
            u /= np.linalg.norm(u)
            w = np.cross(normal, u)
            rel = pts - center
            ang = np.arctan2(rel @ w, rel @ u)
            faces.append([cap[k] for k in np.argsort(ang, kind="stable")])

        used = sorted({i for f in faces for i in f})
        remap = {old: new for new, old in enumerate(used)}
        vertices = np.array([verts[i] for i in used])
        return ConvexPolyhedron(vertices, [[remap[i] for i in f] for f in faces])

    def to_mesh(self, label: str = "", meta: dict | None = None) -> Mesh:
        return Mesh(self.vertices, self.faces, label, meta)


def voronoi_partition(seeds, lo, hi) -> list[Mesh]:
    """Clip the box ``[lo, hi]`` into one convex cell per seed."""
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 3)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if len(seeds) == 0:
        raise GeometryError("ValueOutOfRange", "at least one seed is required")
    if ((seeds < lo) | (seeds > hi)).any():
        raise GeometryError("ValueOutOfRange", "seed outside the domain")
    scale = float(np.linalg.norm(hi - lo))
    eps = 1e-10 * scale
    diff = seeds[:, None, :] - seeds[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    if len(seeds) > 1 and dist.min() <= eps:
        raise GeometryError("DuplicateSeeds", "two seeds coincide")

    cells = []
    for i, s in enumerate(seeds):
        cell = ConvexPolyhedron.box(lo, hi)
        radius = float(np.sqrt(((cell.vertices - s) ** 2).sum(axis=1)).max())
        for j in np.argsort(dist[i], kind="stable"):
            if j == i or not np.isfinite(dist[i, j]):
                continue
            if dist[i, j] * 0.5 > radius + eps:
                break
            normal = (seeds[j] - s) / dist[i, j]
            offset = float(normal @ ((s + seeds[j]) * 0.5))
            clipped = cell.clip(normal, offset, eps)
            if clipped is None:
                raise GeometryError("DegenerateCell", f"cell {i} vanished during clipping")
            if clipped is not cell:
                cell = clipped
                radius = float(np.sqrt(((cell.vertices - s) ** 2).sum(axis=1)).max())
        cells.append(cell.to_mesh(meta={"seed_index": i}))
    return cells
