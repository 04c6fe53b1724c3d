"""2D profiles with holes extruded (or lofted) into closed solids."""

from __future__ import annotations

import mapbox_earcut
import numpy as np

from .mesh import GeometryError, Mesh


def polygon_area(poly: np.ndarray) -> float:
    """Signed shoelace area (positive for counter-clockwise)."""
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def regular_polygon(center, rx: float, ry: float, sides: int, phase: float = 0.0) -> np.ndarray:
    """Counter-clockwise polygon inscribed in the ellipse with semi-axes rx, ry."""
    t = phase + 2.0 * np.pi * np.arange(sides) / sides
    return np.column_stack([center[0] + rx * np.cos(t), center[1] + ry * np.sin(t)])


def rectangle(cx: float, cy: float, w: float, h: float) -> np.ndarray:
    return np.array([
        (cx - w / 2, cy - h / 2), (cx + w / 2, cy - h / 2),
        (cx + w / 2, cy + h / 2), (cx - w / 2, cy + h / 2),
    ], dtype=float)


def _segments(poly: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return poly, np.roll(poly, -1, axis=0)


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_cross(p0, p1, q0, q1, skip_adjacent: bool = False) -> bool:
    """Any proper or touching intersection between segment sets P and Q."""
    r = (p1 - p0)[:, None, :]
    s = (q1 - q0)[None, :, :]
    qp = q0[None, :, :] - p0[:, None, :]
    denom = _cross2(r, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross2(qp, s) / denom
        u = _cross2(qp, r) / denom
    eps = 1e-12
    hit = (np.abs(denom) > 1e-18) & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
    if skip_adjacent:
        n = len(p0)
        idx = np.arange(n)
        hit[idx, idx] = False
        hit[idx, (idx + 1) % n] = False
        hit[(idx + 1) % n, idx] = False
    return bool(hit.any())


def _points_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    x, y = points[:, 0][:, None], points[:, 1][:, None]
    x0, y0 = poly[:, 0][None, :], poly[:, 1][None, :]
    x1, y1 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    cond = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return ((cond & (x < xint)).sum(axis=1) % 2) == 1


def check_profile(outer: np.ndarray, holes: list[np.ndarray]) -> None:
    """Raise for self-intersecting rings, holes leaving the outer ring or overlapping."""
    rings = [outer, *holes]
    for ring in rings:
        if len(ring) < 3 or abs(polygon_area(ring)) <= 0:
            raise GeometryError("SelfIntersectingProfile", "degenerate ring")
        if len(ring) > 3 and _segments_cross(*_segments(ring), *_segments(ring), skip_adjacent=True):
            raise GeometryError("SelfIntersectingProfile", "ring crosses itself")
    for k, hole in enumerate(holes):
        if not _points_in_polygon(hole, outer).all() or _segments_cross(
                *_segments(hole), *_segments(outer)):
            raise GeometryError("HoleOutsideOuter", f"hole {k} is not strictly inside", hole=k)
    if len(holes) > 1:
        lo = np.array([h.min(axis=0) for h in holes])
        hi = np.array([h.max(axis=0) for h in holes])
        for i in range(len(holes)):
            near = np.nonzero(((lo[i + 1:] <= hi[i]) & (hi[i + 1:] >= lo[i])).all(axis=1))[0]
            for j in near + i + 1:
                a, b = holes[i], holes[j]
                if (_segments_cross(*_segments(a), *_segments(b))
                        or _points_in_polygon(a[:1], b).any()
                        or _points_in_polygon(b[:1], a).any()):
                    raise GeometryError("HoleOverlap", f"holes {i} and {j} overlap",
                                        hole=int(i), other=int(j))


def _cap(rings: list[np.ndarray], offset: int, upward: bool) -> list[tuple]:
    verts = np.concatenate(rings)
    ends = np.cumsum([len(r) for r in rings]).astype(np.uint32)
    tri = mapbox_earcut.triangulate_float64(verts, ends).reshape(-1, 3)
    if len(tri) != len(verts) + 2 * (len(rings) - 1) - 2:
        raise GeometryError("SelfIntersectingProfile", "cap triangulation failed")
    p = verts[tri]
    area = _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    flip = (area < 0) if upward else (area > 0)
    tri[flip] = tri[flip][:, ::-1]
    return [tuple(int(i) + offset for i in t) for t in tri]


def loft_profile(outer: np.ndarray, holes: list[np.ndarray], h: float,
                 top_holes: list[np.ndarray] | None = None, z0: float = 0.0,
                 label: str = "", meta: dict | None = None, check: bool = True) -> Mesh:
    """Solid between a bottom profile at ``z0`` and a top profile at ``z0 + h``.

    ``top_holes`` must match ``holes`` ring by ring (same vertex counts); side
    walls join corresponding vertices, so holes may taper.
    """
    if h <= 0:
        raise GeometryError("ValueOutOfRange", "extrusion height must be positive")
    outer = np.asarray(outer, dtype=float)
    if polygon_area(outer) < 0:
        outer = outer[::-1]
    holes = [np.asarray(hh, dtype=float) for hh in holes]
    top = holes if top_holes is None else [np.asarray(hh, dtype=float) for hh in top_holes]
    if len(top) != len(holes) or any(len(a) != len(b) for a, b in zip(holes, top)):
        raise GeometryError("ValueOutOfRange", "top holes must match bottom holes")
    # holes run clockwise
    flip = [polygon_area(hh) > 0 for hh in holes]
    holes = [hh[::-1] if f else hh for hh, f in zip(holes, flip)]
    top = [hh[::-1] if f else hh for hh, f in zip(top, flip)]
    if check:
        check_profile(outer, holes)
        if top_holes is not None:
            check_profile(outer, top)

    bottom_rings = [outer, *holes]
    top_rings = [outer, *top]
    n = sum(len(r) for r in bottom_rings)
    b2 = np.concatenate(bottom_rings)
    t2 = np.concatenate(top_rings)
    verts = np.concatenate([
        np.column_stack([b2, np.full(n, z0)]),
        np.column_stack([t2, np.full(n, z0 + h)]),
    ])
    faces = _cap(bottom_rings, 0, upward=False) + _cap(top_rings, n, upward=True)
    start = 0
    for ring in bottom_rings:
        m = len(ring)
        idx = np.arange(start, start + m)
        nxt = np.roll(idx, -1)
        faces.extend(zip(idx.tolist(), nxt.tolist(), (nxt + n).tolist(), (idx + n).tolist()))
        start += m
    return Mesh(verts, faces, label, meta)


def extrude_profile(outer, holes, h: float, z0: float = 0.0, label: str = "",
                    meta: dict | None = None) -> Mesh:
    """Prism of ``outer`` minus ``holes`` with height ``h``."""
    return loft_profile(outer, holes, h, None, z0, label, meta)
