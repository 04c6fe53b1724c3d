"""Parametric generators for each block kind.

Every generator is a pure function of its parameter dict and an :class:`Rng`
and returns a list of meshes in local block coordinates (z starting at 0,
centred in x/y).  Meshes carry construction metadata in ``meta``.
"""

from __future__ import annotations

import math

import numpy as np

from ..rng import Rng
from .mesh import GeometryError, Mesh, box, centroid, prism, signed_volume
from .profile import loft_profile, rectangle, regular_polygon
from .subdivision import catmull_clark
from .voronoi import voronoi_partition

# smallest allowed shrink factor before a cell is dropped
MIN_CELL_SCALE = 0.2


# ---------------------------------------------------------------------------
# helical

def ply_angles(plies: int, rotation_deg: float, noise_deg: float, rng: Rng) -> list[float]:
    """In-plane fiber angle of each ply; noise drawn uniformly in [-noise, +noise]."""
    angles = []
    for i in range(plies):
        jitter = noise_deg * (2.0 * rng.uniform() - 1.0) if noise_deg > 0 else 0.0
        angles.append(i * rotation_deg + jitter)
    return angles


def _fiber_profile(p: dict, half_width: float) -> np.ndarray:
    t = p["ply_thickness"]
    if p["fiber_profile"] == 1:
        return np.array([(-half_width, -t / 2), (half_width, -t / 2),
                         (half_width, t / 2), (-half_width, t / 2)])
    n = 4 * math.ceil(p["fiber_segments"] / 4)
    phi = (np.arange(n) + 0.5) * 2.0 * np.pi / n
    stretch = 1.0 / math.cos(math.pi / n)
    u = half_width * np.cos(phi) * stretch
    v = (t / 2) * np.sin(phi) * stretch
    # the flat faces at top and bottom sit exactly on the ply boundaries
    v[v > t / 2 * (1 - 1e-9)] = t / 2
    v[v < -t / 2 * (1 - 1e-9)] = -t / 2
    return np.column_stack([u, v])


def _chord(c: float, d: np.ndarray, perp: np.ndarray, half: float) -> tuple[float, float]:
    lo, hi = -np.inf, np.inf
    for a in range(2):
        base = c * perp[a]
        if abs(d[a]) < 1e-15:
            if abs(base) > half:
                return 0.0, 0.0
            continue
        t0 = (-half - base) / d[a]
        t1 = (half - base) / d[a]
        lo = max(lo, min(t0, t1))
        hi = min(hi, max(t0, t1))
    return lo, hi


def build_helical(p: dict, rng: Rng) -> list[Mesh]:
    t = p["ply_thickness"]
    count = p["fibers_per_ply"]
    footprint = p["footprint"]
    spacing = footprint / count
    if p["fiber_profile"] == 1:
        half_width = min(p["fiber_width"] / 2, 0.45 * spacing)
    else:
        half_width = min(t / 2, 0.45 * spacing)
    profile = _fiber_profile(p, half_width)
    angles = ply_angles(p["plies"], p["rotation_deg"], p.get("noise_deg", 0.0), rng)
    meshes = []
    for i, theta in enumerate(angles):
        rad = math.radians(theta)
        d = np.array([math.cos(rad), math.sin(rad), 0.0])
        perp = np.array([-math.sin(rad), math.cos(rad), 0.0])
        zc = i * t + t / 2
        fibers = []
        for k in range(count):
            c = (k - (count - 1) / 2) * spacing
            t0, t1 = _chord(c, d, perp, footprint / 2)
            if t1 - t0 < 2 * half_width:
                continue
            origin = c * perp + t0 * d + np.array([0.0, 0.0, zc])
            fibers.append(prism(profile, origin, perp, (0.0, 0.0, 1.0), d, t1 - t0))
        ply = Mesh.merge(fibers, "helical", {"ply": i, "angle_deg": theta,
                                             "fibers": len(fibers)})
        meshes.append(ply)
    return meshes


# ---------------------------------------------------------------------------
# cellular

def lattice_dims(n: int, size) -> tuple[int, int, int]:
    """Seed lattice close to cubic cells holding at least ``n`` points."""
    sx, sy, sz = size
    best = None
    for nx in range(1, n + 1):
        for ny in range(1, n // nx + 2):
            nz = math.ceil(n / (nx * ny))
            total = nx * ny * nz
            if total - n >= max(nx * ny, 1) and nz > 1:
                continue
            cells = (sx / nx, sy / ny, sz / nz)
            aspect = max(cells) / min(cells)
            cost = (total - n) / n + 0.5 * math.log(aspect)
            key = (round(cost, 12), total, nx, ny, nz)
            if best is None or key < best:
                best = key
    return best[2], best[3], best[4]


def cell_seeds(p: dict, rng: Rng, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    n = p["region_count"]
    size = hi - lo
    nx, ny, nz = lattice_dims(n, size)
    cell = size / np.array([nx, ny, nz])
    grid = np.array([(i, j, k) for k in range(nz) for j in range(ny) for i in range(nx)],
                    dtype=float)
    centers = lo + (grid + 0.5) * cell
    keep = list(range(len(centers)))
    if len(keep) > n:
        drop = set(rng.sample(keep, len(keep) - n))
        keep = [i for i in keep if i not in drop]
    amp = 0.45 * p["randomness"] * cell
    seeds = []
    for i in keep:
        jitter = np.array([2.0 * rng.uniform() - 1.0 for _ in range(3)])
        seeds.append(centers[i] + amp * jitter)
    return np.array(seeds)


def shrink_cell(cell: Mesh, gap: float) -> tuple[Mesh | None, float]:
    """Scale a convex cell about its centroid so the nearest face moves in by gap/2."""
    if gap <= 0:
        return cell, 1.0
    c = centroid(cell)
    v = cell.vertices
    inradius = np.inf
    for f in cell.faces:
        a, b, d = v[f[0]], v[f[1]], v[f[2]]
        normal = np.cross(b - a, d - a)
        norm = np.linalg.norm(normal)
        if norm > 0:
            inradius = min(inradius, abs(np.dot(normal / norm, a - c)))
    scale = 1.0 - (gap / 2.0) / inradius
    if scale < MIN_CELL_SCALE:
        return None, scale
    return Mesh(c + scale * (v - c), cell.faces, cell.label, dict(cell.meta)), scale


def build_cellular(p: dict, rng: Rng) -> list[Mesh]:
    sandwich = p.get("sandwich_thickness", 0.0)
    levels = p.get("smooth_levels", 1)
    half = np.array([p["size_x"] / 2, p["size_y"] / 2])
    lo = np.array([-half[0], -half[1], sandwich])
    hi = np.array([half[0], half[1], sandwich + p["size_z"]])
    seeds = cell_seeds(p, rng, lo, hi)
    cells = voronoi_partition(seeds, lo, hi)
    meshes, warnings = [], []
    for i, cell in enumerate(cells):
        raw_volume = signed_volume(cell)
        shrunk, scale = shrink_cell(cell, p["wall_gap"])
        if shrunk is None:
            warnings.append(f"DegenerateCell: cell {i} dropped (scale {scale:.3f})")
            continue
        smooth = catmull_clark(shrunk, levels)
        meshes.append(Mesh(smooth.vertices, smooth.faces, "cellular",
                           {"cell": i, "assembly": True, "raw_volume": raw_volume}))
    if sandwich > 0:
        meshes.append(box((lo[0], lo[1], 0.0), (hi[0], hi[1], sandwich), "cellular",
                          {"face_sheet": 0, "assembly": True}))
        meshes.append(box((lo[0], lo[1], hi[2]), (hi[0], hi[1], hi[2] + sandwich), "cellular",
                          {"face_sheet": 1, "assembly": True}))
    if meshes:
        meshes[0].meta["warnings"] = warnings
    return meshes


# ---------------------------------------------------------------------------
# tubular

def gradient_scale(s: np.ndarray | float, factor: float):
    """Linear radius law: 1/factor at s=0 rising to factor at s=1."""
    return 1.0 / factor + (factor - 1.0 / factor) * s


def hex_sites(half_x: float, half_y: float, spacing: float) -> np.ndarray:
    """Hexagonal lattice points covering the rectangle, centred on the origin."""
    dy = spacing * math.sqrt(3.0) / 2.0
    rows = int(math.ceil(half_y / dy)) + 1
    cols = int(math.ceil(half_x / spacing)) + 1
    pts = []
    for j in range(-rows, rows + 1):
        shift = 0.5 * spacing if j % 2 else 0.0
        for i in range(-cols - 1, cols + 1):
            pts.append((i * spacing + shift, j * dy))
    pts = np.array(pts)
    # centre the odd-row shift so the pattern is symmetric
    pts[:, 0] -= 0.25 * spacing
    return pts


def tubule_layout(p: dict) -> dict:
    """Tubule centres and semi-axes; raises on overlap or misfit."""
    count = p["tubule_count"]
    r = p["tubule_radius"]
    e = p["ellipticity"]
    spacing = p["spacing"]
    cortex = p["cortical_thickness"]
    half_x = p["size_x"] / 2 - cortex
    half_y = p["size_y"] / 2 - cortex
    grad = p.get("gradient")
    if half_x <= 0 or half_y <= 0:
        raise GeometryError("TubuleOutsideCortex", "cortex leaves no room inside the slab",
                            param="cortical_thickness", fits=0)
    if count == 0:
        return {"centers": np.zeros((0, 2)), "bottom": np.zeros(0), "top": np.zeros(0),
                "inner": (half_x, half_y)}
    factor = grad[1] if grad else 1.0
    peak = max(factor, 1.0 / factor) if grad else 1.0
    if not spacing > 2.0 * r * peak:
        raise GeometryError("TubuleOverlap",
                            f"spacing {spacing} must exceed twice the largest semi-axis "
                            f"{r * peak:.4g}", param="spacing",
                            needed=2.0 * r * peak)
    sites = hex_sites(half_x, half_y, spacing)
    margin = 1e-6 * max(p["size_x"], p["size_y"])

    def scales_at(pts):
        if not grad or grad[0] == "z":
            return np.ones(len(pts))
        axis = 0 if grad[0] == "x" else 1
        extent = p["size_x"] if axis == 0 else p["size_y"]
        return gradient_scale((pts[:, axis] + extent / 2) / extent, factor)

    if grad and grad[0] == "z":
        fit_scale = np.full(len(sites), peak)
    else:
        fit_scale = scales_at(sites)
    a = r * fit_scale
    b = r * fit_scale / e
    ok = ((np.abs(sites[:, 0]) + a <= half_x - margin)
          & (np.abs(sites[:, 1]) + b <= half_y - margin))
    sites = sites[ok]
    if len(sites) < count:
        raise GeometryError("TubuleOutsideCortex",
                            f"only {len(sites)} of {count} tubules fit inside the cortex",
                            param="tubule_count", fits=int(len(sites)))
    order = np.lexsort((sites[:, 0], sites[:, 1], np.round((sites ** 2).sum(axis=1), 9)))
    centers = sites[order[:count]]
    centers = centers[np.lexsort((centers[:, 0], centers[:, 1]))]
    if grad and grad[0] == "z":
        bottom = np.full(count, r * gradient_scale(0.0, factor))
        top = np.full(count, r * gradient_scale(1.0, factor))
    else:
        bottom = top = r * scales_at(centers)
    return {"centers": centers, "bottom": bottom, "top": top, "inner": (half_x, half_y)}


def build_tubular(p: dict, rng: Rng) -> list[Mesh]:
    layout = tubule_layout(p)
    e = p["ellipticity"]
    sides = p["segments"]
    h = p["height"]
    half_x, half_y = layout["inner"]
    holes_b = [regular_polygon(c, rb, rb / e, sides) for c, rb in zip(layout["centers"],
                                                                     layout["bottom"])]
    holes_t = [regular_polygon(c, rt, rt / e, sides) for c, rt in zip(layout["centers"],
                                                                     layout["top"])]
    tapered = not np.array_equal(layout["bottom"], layout["top"])
    inner = rectangle(0.0, 0.0, 2 * half_x, 2 * half_y)
    meta = {
        "tubule_count": int(len(layout["centers"])),
        "tubule_centers": layout["centers"].tolist(),
        "radii_bottom": layout["bottom"].tolist(),
        "radii_top": layout["top"].tolist(),
    }
    matrix = loft_profile(inner, holes_b, h, holes_t if tapered else None, 0.0,
                          "tubular", meta, check=False)
    meshes = [matrix]
    if p["cortical_thickness"] > 0:
        outer = rectangle(0.0, 0.0, p["size_x"], p["size_y"])
        meshes.append(loft_profile(outer, [inner], h, None, 0.0, "tubular",
                                   {"cortex": True}, check=False))
    return meshes


# ---------------------------------------------------------------------------
# general kinds

def hole_pitch(sx: float, sy: float, n: int) -> tuple[int, int, float]:
    cols = max(1, math.ceil(math.sqrt(n * sx / sy)))
    rows = math.ceil(n / cols)
    return cols, rows, min(sx / cols, sy / rows)


def fit_slab_block(block) -> None:
    """Shrink the hole radius of a slab block until its holes fit the grid."""
    from ..dsl import schema

    p = {**schema.defaults("slab"), **block.params}
    if p["hole_count"] <= 0:
        return
    _, _, pitch = hole_pitch(p["size_x"], p["size_y"], p["hole_count"])
    if p["hole_radius"] >= 0.45 * pitch:
        spec = schema.param_spec("slab", "hole_radius")
        block.params["hole_radius"] = spec.clamp(round(0.8 * 0.45 * pitch, 6))


def build_slab(p: dict, rng: Rng) -> list[Mesh]:
    sx, sy = p["size_x"], p["size_y"]
    n = p["hole_count"]
    holes = []
    if n:
        cols, rows, pitch = hole_pitch(sx, sy, n)
        if not p["hole_radius"] < 0.45 * pitch:
            raise GeometryError("HoleOverlap", "holes do not fit the slab grid",
                                param="hole_radius", needed=0.45 * pitch)
        for k in range(n):
            i, j = k % cols, k // cols
            cx = (i - (cols - 1) / 2) * pitch
            cy = (j - (rows - 1) / 2) * pitch
            holes.append(regular_polygon((cx, cy), p["hole_radius"], p["hole_radius"],
                                         p["hole_sides"]))
    outer = rectangle(0.0, 0.0, sx, sy)
    rot = math.radians(p["rotation_deg"])
    if rot:
        rmat = np.array([[math.cos(rot), -math.sin(rot)], [math.sin(rot), math.cos(rot)]])
        outer = outer @ rmat.T
        holes = [hh @ rmat.T for hh in holes]
    return [loft_profile(outer, holes, p["height"], None, 0.0, "slab", {"holes": n})]


def build_primitive(p: dict, rng: Rng) -> list[Mesh]:
    size, height = p["size"], p["height"]
    base = p["base_thickness"]
    nx, ny = p["count_x"], p["count_y"]
    spacing = p["spacing"]
    sides = p["sides"]
    levels = p.get("smooth_levels", 0)
    if sides in (1, 2):
        raise GeometryError("ValueOutOfRange", "sides must be 0 (box) or at least 3",
                            param="sides")
    meshes = []
    if base > 0:
        ex = (nx - 1) * spacing + size * 1.5
        ey = (ny - 1) * spacing + size * 1.5
        meshes.append(box((-ex / 2, -ey / 2, 0.0), (ex / 2, ey / 2, base), "primitive",
                          {"base": True, "assembly": True}))
    k = 0
    for j in range(ny):
        for i in range(nx):
            cx = (i - (nx - 1) / 2) * spacing
            cy = (j - (ny - 1) / 2) * spacing
            angle = math.radians(k * p["rotate_step_deg"])
            if sides == 0:
                ring = rectangle(0.0, 0.0, size, size)
            else:
                ring = regular_polygon((0.0, 0.0), size / 2, size / 2, sides)
            c, s = math.cos(angle), math.sin(angle)
            ring = ring @ np.array([[c, -s], [s, c]]).T + (cx, cy)
            solid = loft_profile(ring, [], height, None, base, "primitive",
                                 {"item": k, "assembly": nx * ny > 1}, check=False)
            if levels:
                solid = catmull_clark(solid, levels)
            meshes.append(solid)
            k += 1
    return meshes


GENERATORS = {
    "helical": build_helical,
    "cellular": build_cellular,
    "tubular": build_tubular,
    "slab": build_slab,
    "primitive": build_primitive,
}


def fit_tubular_block(block, fixed_count: bool = False) -> None:
    """Adjust a tubular block in place until its layout is feasible.

    Spacing grows to clear the largest tubule; then the slab grows (when the
    tubule count was requested explicitly) or the count shrinks to what fits.
    """
    from ..dsl import schema

    params = {**schema.defaults("tubular"), **block.params}
    grad = block.modifier("gradient")
    params["gradient"] = (grad.axis, grad.value) if grad else None
    peak = max(grad.value, 1.0 / grad.value) if grad else 1.0
    params["cortical_thickness"] = min(params["cortical_thickness"],
                                       0.25 * min(params["size_x"], params["size_y"]))
    need = 2.0 * params["tubule_radius"] * peak
    if not params["spacing"] > need:
        params["spacing"] = round(need * 1.25, 6)
    for _ in range(200):
        try:
            tubule_layout(params)
            break
        except GeometryError as err:
            if err.code != "TubuleOutsideCortex":
                raise
            if fixed_count:
                params["size_x"] = round(params["size_x"] * 1.1 + params["spacing"], 6)
                params["size_y"] = round(params["size_y"] * 1.1 + params["spacing"], 6)
            else:
                params["tubule_count"] = int(err.context.get("fits", 0))
    for key in ("spacing", "size_x", "size_y", "tubule_count", "cortical_thickness"):
        spec = schema.param_spec("tubular", key)
        block.params[key] = spec.clamp(params[key])
