"""Geometric validity checks over a compiled scene."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from ..geometry.mesh import Mesh, signed_volume

# AABB inflation used for floating-part detection (mm)
TAU = 0.05
LEAF_SIZE = 8


@dataclass
class ValidationReport:
    executed: bool
    mesh_count: int = 0
    watertight_per_mesh: list[bool] = field(default_factory=list)
    component_count: int = 0
    floating_components: list[int] = field(default_factory=list)
    self_intersection_pairs: int = 0
    bbox: list[list[float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    # subset of floating_components not declared as assemblies by a generator
    unintended_floating: list[int] = field(default_factory=list)
    error: dict | None = None

    @property
    def watertight(self) -> bool:
        return self.executed and all(self.watertight_per_mesh)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "ValidationReport":
        return cls(**doc)

    @classmethod
    def failed(cls, error: dict) -> "ValidationReport":
        return cls(executed=False, warnings=[f"{error.get('code', 'Error')}: "
                                             f"{error.get('message', '')}"], error=error)


def _directed_edges(faces: list) -> tuple[np.ndarray, np.ndarray]:
    if not faces:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    a = np.fromiter((i for f in faces for i in f), dtype=np.int64)
    b = np.fromiter((f[(k + 1) % len(f)] for f in faces for k in range(len(f))),
                    dtype=np.int64, count=len(a))
    return a, b


def is_watertight(mesh: Mesh) -> bool:
    """Every undirected edge has exactly two faces using it in opposite directions."""
    a, b = _directed_edges(mesh.faces)
    if len(a) == 0:
        return False
    n = max(mesh.n_vertices, 1)
    directed = a * n + b
    if len(np.unique(directed)) != len(directed):
        return False
    undirected, counts = np.unique(np.minimum(a, b) * n + np.maximum(a, b), return_counts=True)
    if (counts != 2).any():
        return False
    # each undirected edge appears twice and no directed edge repeats, so the
    # two uses necessarily run in opposite directions
    return True


def _merged(meshes: list[Mesh]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    verts, tris, owner, base = [], [], [], 0
    for i, m in enumerate(meshes):
        t = m.triangles()
        verts.append(m.vertices)
        tris.append(t + base)
        owner.append(np.full(len(t), i))
        base += m.n_vertices
    return np.concatenate(verts), np.concatenate(tris), np.concatenate(owner)


def connected_components(scene) -> list[np.ndarray]:
    """Vertex sets of face-connected components, ordered by lowest vertex index.

    Vertices are numbered across the merged scene (mesh order, then local
    index).  Vertices not referenced by any face are ignored.
    """
    meshes = scene.meshes if hasattr(scene, "meshes") else scene
    if not meshes:
        return []
    verts, tris, _ = _merged(meshes)
    n = len(verts)
    rows = np.concatenate([tris[:, 0], tris[:, 0]])
    cols = np.concatenate([tris[:, 1], tris[:, 2]])
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = _cc(graph, directed=False)
    used = np.zeros(n, dtype=bool)
    used[tris.ravel()] = True
    idx = np.nonzero(used)[0]
    lab = labels[idx]
    first = {}
    for v, l in zip(idx.tolist(), lab.tolist()):
        first.setdefault(l, v)
    order = sorted(first, key=first.get)
    return [idx[lab == l] for l in order]


def _boxes_overlap(lo_a, hi_a, lo_b, hi_b) -> np.ndarray:
    return ((lo_a <= hi_b) & (hi_a >= lo_b)).all(axis=-1)


def floating_flags(boxes_lo: np.ndarray, boxes_hi: np.ndarray, tau: float = TAU) -> np.ndarray:
    """True for boxes whose tau-inflated extent touches no other inflated box."""
    k = len(boxes_lo)
    if k < 2:
        return np.zeros(k, dtype=bool)
    lo = boxes_lo - tau
    hi = boxes_hi + tau
    hit = _boxes_overlap(lo[:, None, :], hi[:, None, :], lo[None, :, :], hi[None, :, :])
    np.fill_diagonal(hit, False)
    return ~hit.any(axis=1)


# ---------------------------------------------------------------------------
# bounding volume hierarchy

class BVH:
    """Median-split AABB tree over triangle boxes."""

    def __init__(self, lo: np.ndarray, hi: np.ndarray, leaf_size: int = LEAF_SIZE):
        self.order = np.arange(len(lo))
        node_lo, node_hi, left, right, start, count = [], [], [], [], [], []
        centers = (lo + hi) * 0.5
        stack = [(0, len(lo), -1, 0)]
        while stack:
            s, e, parent, side = stack.pop()
            ids = self.order[s:e]
            node = len(node_lo)
            node_lo.append(lo[ids].min(axis=0))
            node_hi.append(hi[ids].max(axis=0))
            left.append(-1)
            right.append(-1)
            start.append(s)
            count.append(e - s)
            if parent >= 0:
                (left if side == 0 else right)[parent] = node
            if e - s > leaf_size:
                c = centers[ids]
                axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
                srt = ids[np.argsort(c[:, axis], kind="stable")]
                self.order[s:e] = srt
                mid = (s + e) // 2
                stack.append((mid, e, node, 1))
                stack.append((s, mid, node, 0))
        self.lo = np.array(node_lo)
        self.hi = np.array(node_hi)
        self.left = np.array(left)
        self.right = np.array(right)
        self.start = np.array(start)
        self.count = np.array(count)

    def self_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Leaf pairs (a <= b by construction) whose boxes overlap."""
        a = np.array([0])
        b = np.array([0])
        out_a, out_b = [], []
        while len(a):
            same = a == b
            ok = same | _boxes_overlap(self.lo[a], self.hi[a], self.lo[b], self.hi[b])
            a, b, same = a[ok], b[ok], same[ok]
            leaf_a = self.left[a] < 0
            leaf_b = self.left[b] < 0
            done = leaf_a & leaf_b
            out_a.append(a[done])
            out_b.append(b[done])
            a, b, same, leaf_a, leaf_b = (x[~done] for x in (a, b, same, leaf_a, leaf_b))
            # identical internal node: children against themselves and each other
            sa = a[same]
            la, ra = self.left[sa], self.right[sa]
            # distinct nodes: split the non-leaf with more triangles
            da, db = a[~same], b[~same]
            split_a = ~leaf_a[~same] & (leaf_b[~same] | (self.count[da] >= self.count[db]))
            x, y = da[split_a], db[split_a]
            u, w = da[~split_a], db[~split_a]
            a = np.concatenate([la, ra, la, self.left[x], self.right[x], u, u])
            b = np.concatenate([la, ra, ra, y, y, self.left[w], self.right[w]])
        return np.concatenate(out_a), np.concatenate(out_b)


def _leaf_table(bvh: BVH, leaves: np.ndarray) -> np.ndarray:
    uniq, inv = np.unique(leaves, return_inverse=True)
    table = np.full((len(uniq), LEAF_SIZE), -1, dtype=np.int64)
    for row, node in enumerate(uniq):
        ids = bvh.order[bvh.start[node]:bvh.start[node] + bvh.count[node]]
        table[row, :len(ids)] = ids
    return table[inv]


def _plane_dist(T: np.ndarray, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = np.cross(U[:, 1] - U[:, 0], U[:, 2] - U[:, 0])
    norm = np.linalg.norm(n, axis=1)
    n = n / np.where(norm > 0, norm, 1.0)[:, None]
    d = np.einsum("ikj,ij->ik", T - U[:, None, 0], n)
    return d, n


def _interval(T: np.ndarray, d: np.ndarray, axis: np.ndarray, eps: float):
    """Extent along ``axis`` of triangle T cut by the plane where d == 0."""
    proj = np.einsum("ikj,ij->ik", T, axis)
    lo = np.where(np.abs(d) <= eps, proj, np.inf).min(axis=1)
    hi = np.where(np.abs(d) <= eps, proj, -np.inf).max(axis=1)
    for i, j in ((0, 1), (1, 2), (2, 0)):
        di, dj = d[:, i], d[:, j]
        crosses = ((di > eps) & (dj < -eps)) | ((di < -eps) & (dj > eps))
        t = di / np.where(crosses, di - dj, 1.0)
        x = proj[:, i] + t * (proj[:, j] - proj[:, i])
        lo = np.where(crosses, np.minimum(lo, x), lo)
        hi = np.where(crosses, np.maximum(hi, x), hi)
    return lo, hi


def triangles_cross(P: np.ndarray, Q: np.ndarray, eps: float) -> np.ndarray:
    """Transversal interior crossing of triangle pairs (P[i], Q[i]).

    Each triangle must straddle the other's plane strictly and the two cut
    intervals on the common line must overlap by more than ``eps``; coplanar
    or edge/vertex contact does not count.
    """
    out = np.zeros(len(P), dtype=bool)
    dp, n_q = _plane_dist(P, Q)
    # cheap rejection first: P must straddle the plane of Q
    idx = np.nonzero((dp.max(axis=1) > eps) & (dp.min(axis=1) < -eps))[0]
    if not len(idx):
        return out
    P, Q, dp, n_q = P[idx], Q[idx], dp[idx], n_q[idx]
    dq, n_p = _plane_dist(Q, P)
    straddle = (dq.max(axis=1) > eps) & (dq.min(axis=1) < -eps)
    axis = np.cross(n_p, n_q)
    size = np.linalg.norm(axis, axis=1)
    straddle &= size > 1e-12
    axis = axis / np.where(size > 0, size, 1.0)[:, None]
    lo_p, hi_p = _interval(P, dp, axis, eps)
    lo_q, hi_q = _interval(Q, dq, axis, eps)
    out[idx] = straddle & (np.minimum(hi_p, hi_q) - np.maximum(lo_p, lo_q) > eps)
    return out


def count_self_intersections(meshes: list[Mesh], eps_rel: float = 1e-9,
                             chunk: int = 200_000) -> int:
    """Triangle pairs whose interiors cross transversally.

    Pairs sharing a vertex are skipped; coplanar contact and touching edges
    do not count.
    """
    if not meshes:
        return 0
    verts, tris, _ = _merged(meshes)
    if len(tris) < 2:
        return 0
    corners = verts[tris]
    lo = corners.min(axis=1)
    hi = corners.max(axis=1)
    eps = eps_rel * float(np.linalg.norm(hi.max(axis=0) - lo.min(axis=0)))
    bvh = BVH(lo, hi)
    leaf_a, leaf_b = bvh.self_pairs()
    total = 0
    step = max(1, chunk // (LEAF_SIZE * LEAF_SIZE))
    for s in range(0, len(leaf_a), step):
        la, lb = leaf_a[s:s + step], leaf_b[s:s + step]
        ta = _leaf_table(bvh, la)[:, :, None]
        tb = _leaf_table(bvh, lb)[:, None, :]
        same = np.broadcast_to((la == lb)[:, None, None], (len(la), LEAF_SIZE, LEAF_SIZE))
        ta, tb = np.broadcast_arrays(ta, tb)
        ta, tb, same = ta.reshape(-1), tb.reshape(-1), same.reshape(-1)
        # within one leaf each unordered pair appears twice; across leaves once
        keep = (ta >= 0) & (tb >= 0) & np.where(same, ta < tb, ta != tb)
        ta, tb = ta[keep], tb[keep]
        keep = _boxes_overlap(lo[ta], hi[ta], lo[tb], hi[tb])
        ta, tb = ta[keep], tb[keep]
        A, B = tris[ta], tris[tb]
        shared = (A[:, :, None] == B[:, None, :]).any(axis=(1, 2))
        ta, tb = ta[~shared], tb[~shared]
        if not len(ta):
            continue
        P, Q = corners[ta], corners[tb]
        total += int(triangles_cross(P, Q, eps).sum())
    return total


def validate_scene(scene, tau: float = TAU) -> ValidationReport:
    """Read-only validity report: watertightness, components, floating parts, intersections."""
    meshes = scene.meshes
    if not meshes:
        return ValidationReport(executed=True, warnings=["EmptyScene: no mesh objects"])
    warnings = list(getattr(scene, "warnings", []))
    watertight = [is_watertight(m) for m in meshes]
    for i, m in enumerate(meshes):
        if signed_volume(m) < 0:
            warnings.append(f"NegativeVolume: mesh {i}")

    comps = connected_components(scene)
    verts, _, _ = _merged(meshes)
    mesh_of_vertex = np.repeat(np.arange(len(meshes)), [m.n_vertices for m in meshes])
    c_lo = np.array([verts[c].min(axis=0) for c in comps])
    c_hi = np.array([verts[c].max(axis=0) for c in comps])
    floating = floating_flags(c_lo, c_hi, tau)
    owner = [int(mesh_of_vertex[c[0]]) for c in comps]
    assembly = np.array([bool(meshes[o].meta.get("assembly")) for o in owner])
    unintended = floating & ~assembly

    # a whole block detached from every other block is never intended
    block_of = np.array([meshes[o].meta.get("block_index", 0) for o in owner])
    blocks = sorted(set(block_of.tolist()))
    if len(blocks) > 1:
        b_lo = np.array([c_lo[block_of == b].min(axis=0) for b in blocks])
        b_hi = np.array([c_hi[block_of == b].max(axis=0) for b in blocks])
        isolated = floating_flags(b_lo, b_hi, tau)
        for b, iso in zip(blocks, isolated):
            if iso:
                unintended |= block_of == b
                warnings.append(f"IsolatedBlock: block {b}")

    lo, hi = verts.min(axis=0), verts.max(axis=0)
    return ValidationReport(
        executed=True,
        mesh_count=len(meshes),
        watertight_per_mesh=watertight,
        component_count=len(comps),
        floating_components=np.nonzero(floating)[0].tolist(),
        self_intersection_pairs=count_self_intersections(meshes),
        bbox=[lo.tolist(), hi.tolist()],
        warnings=warnings,
        unintended_floating=np.nonzero(unintended)[0].tolist(),
    )
