from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bioforge.dsl import parse
from bioforge.geometry import (GeometryError, box, catmull_clark, compile_program,
                               extrude_profile, mesh_metrics, ply_angles, signed_volume,
                               voronoi_partition)
from bioforge.geometry.profile import polygon_area, regular_polygon, rectangle
from bioforge.rng import Rng
from bioforge.validate import is_watertight


def edge_count(mesh) -> int:
    edges = set()
    for f in mesh.faces:
        for a, b in zip(f, f[1:] + f[:1]):
            edges.add((min(a, b), max(a, b)))
    return len(edges)


def counts(mesh):
    return mesh.n_vertices, edge_count(mesh), len(mesh.faces)


def compile_text(text: str):
    return compile_program(parse(text))


# -- meshes -----------------------------------------------------------------

def test_box_volume_and_metrics():
    m = box((0, 0, 0), (2, 3, 4))
    assert signed_volume(m) == pytest.approx(24.0)
    assert is_watertight(m)
    metrics = mesh_metrics(m)
    assert metrics["component_hint"] == 1 and not metrics["negative_volume"]
    assert metrics["porosity_vs_bbox"] == pytest.approx(0.0, abs=1e-12)
    assert signed_volume(m.flipped()) == pytest.approx(-24.0)


def test_mesh_check_rejects_bad_indices():
    m = box((0, 0, 0), (1, 1, 1))
    m.faces.append((0, 1, 99))
    with pytest.raises(ValueError):
        m.check()


# -- subdivision ---------------------------------------------------------------

def test_catmull_clark_cube_one_level():
    m = catmull_clark(box((0, 0, 0), (1, 1, 1)), 1)
    v, e, f = counts(m)
    assert (v, e, f) == (26, 48, 24)
    assert v - e + f == 2
    assert all(len(face) == 4 for face in m.faces)


def test_catmull_clark_count_recurrence():
    m = box((0, 0, 0), (1, 1, 1))
    v, e, f = counts(m)
    sides = sum(len(face) for face in m.faces)
    for _ in range(2):
        v, e, f, sides = v + e + f, 2 * e + sides, sides, 4 * sides
    assert counts(catmull_clark(box((0, 0, 0), (1, 1, 1)), 2)) == (v, e, f)


def test_catmull_clark_shrinks_inside_hull():
    m = catmull_clark(box((0, 0, 0), (1, 1, 1)), 2)
    assert m.vertices.min() >= 0 and m.vertices.max() <= 1
    assert 0 < signed_volume(m) < 1
    assert is_watertight(m)


def test_catmull_clark_zero_levels_identity():
    m = box((0, 0, 0), (1, 1, 1))
    assert catmull_clark(m, 0).faces == m.faces


@settings(max_examples=15)
@given(st.integers(3, 12), st.integers(1, 2))
def test_subdivided_prism_stays_closed(sides, levels):
    m = extrude_profile(regular_polygon((0, 0), 1.0, 1.0, sides), [], 1.0)
    s = catmull_clark(m, levels)
    v, e, f = counts(s)
    assert v - e + f == 2
    assert is_watertight(s)


# -- voronoi -----------------------------------------------------------------

def _inside(mesh, pts, eps=1e-9):
    inside = np.ones(len(pts), dtype=bool)
    v = mesh.vertices
    for f in mesh.faces:
        a = v[f[0]]
        n = np.zeros(3)
        for i in range(1, len(f) - 1):
            n += np.cross(v[f[i]] - a, v[f[i + 1]] - a)
        inside &= (pts - a) @ n <= eps * np.linalg.norm(n)
    return inside


def test_voronoi_matches_nearest_seed_oracle():
    rng = np.random.default_rng(7)
    lo, hi = np.zeros(3), np.array([4.0, 3.0, 2.0])
    seeds = lo + rng.random((15, 3)) * (hi - lo)
    cells = voronoi_partition(seeds, lo, hi)
    pts = lo + rng.random((4000, 3)) * (hi - lo)
    d = ((pts[:, None, :] - seeds[None]) ** 2).sum(axis=2)
    nearest = d.argmin(axis=1)
    membership = np.column_stack([_inside(c, pts) for c in cells])
    assert (membership.sum(axis=1) >= 1).all()
    unique = membership.sum(axis=1) == 1
    assert (membership[unique].argmax(axis=1) == nearest[unique]).all()
    total = sum(signed_volume(c) for c in cells)
    assert total == pytest.approx(24.0, rel=1e-9)


def test_voronoi_single_seed_is_domain():
    cells = voronoi_partition([[0.5, 0.5, 0.5]], [0, 0, 0], [1, 1, 1])
    assert len(cells) == 1 and signed_volume(cells[0]) == pytest.approx(1.0)


@pytest.mark.parametrize("seeds", [[[2.0, 0.5, 0.5]], [[0.5, 0.5, 0.5], [0.5, 0.5, 0.5]]])
def test_voronoi_rejects_bad_seeds(seeds):
    with pytest.raises(GeometryError):
        voronoi_partition(seeds, [0, 0, 0], [1, 1, 1])


@settings(max_examples=25)
@given(st.integers(0, 2**32), st.integers(2, 30))
def test_voronoi_volumes_partition_domain(seed, n):
    rng = np.random.default_rng(seed)
    seeds = rng.random((n, 3)) * [3.0, 2.0, 1.0]
    cells = voronoi_partition(seeds, [0, 0, 0], [3.0, 2.0, 1.0])
    vols = [signed_volume(c) for c in cells]
    assert min(vols) > 0
    assert sum(vols) == pytest.approx(6.0, rel=1e-9)
    assert all(is_watertight(c) for c in cells)


# -- profiles ----------------------------------------------------------------

def test_extrusion_with_holes_volume():
    outer = rectangle(0, 0, 10, 6)
    holes = [regular_polygon((-2, 0), 1, 1, 16), regular_polygon((2.5, 0), 1.5, 1, 20)]
    m = extrude_profile(outer, holes, 2.0)
    area = polygon_area(outer) - sum(abs(polygon_area(h)) for h in holes)
    assert signed_volume(m) == pytest.approx(area * 2.0, rel=1e-12)
    assert is_watertight(m)


def test_profile_overlapping_holes_rejected():
    outer = rectangle(0, 0, 10, 10)
    holes = [regular_polygon((0, 0), 2, 2, 12), regular_polygon((1, 0), 2, 2, 12)]
    with pytest.raises(GeometryError):
        extrude_profile(outer, holes, 1.0)


@settings(max_examples=30)
@given(st.integers(0, 2**32), st.integers(0, 9))
def test_random_hole_layouts_are_watertight(seed, n):
    rng = np.random.default_rng(seed)
    holes, centers = [], []
    while len(holes) < n:
        c = rng.uniform(-3.5, 3.5, 2)
        if all(np.hypot(*(c - o)) > 1.2 for o in centers):
            centers.append(c)
            holes.append(regular_polygon(c, 0.5, 0.5, int(rng.integers(3, 20))))
    m = extrude_profile(rectangle(0, 0, 9, 9), holes, 1.5)
    area = 81.0 - sum(abs(polygon_area(h)) for h in holes)
    assert is_watertight(m)
    assert signed_volume(m) == pytest.approx(1.5 * area, rel=1e-9)


# -- generators ----------------------------------------------------------------

def test_helical_angles_exact_without_noise():
    assert ply_angles(6, 15.0, 0.0, Rng(1)) == [i * 15.0 for i in range(6)]
    scene = compile_text("design h { helical { plies 5 rotation_deg 22.5 } }")
    assert [m.meta["angle_deg"] for m in scene.meshes] == [i * 22.5 for i in range(5)]
    hi = scene.bbox()[1]
    assert hi[2] == pytest.approx(5 * 0.5)


def test_helical_noise_is_bounded_and_reproducible():
    a = ply_angles(20, 10.0, 5.0, Rng(42))
    b = ply_angles(20, 10.0, 5.0, Rng(42))
    assert a == b
    assert all(abs(t - i * 10.0) <= 5.0 for i, t in enumerate(a))
    assert a != ply_angles(20, 10.0, 5.0, Rng(43))


def test_tubular_volume_matches_polygon_area():
    scene = compile_text("design t { tubular { tubule_count 4 tubule_radius 1 spacing 3 "
                         "size_x 10 size_y 10 height 4 segments 64 } }")
    hole = 0.5 * 64 * math.sin(2 * math.pi / 64)
    expected = (100.0 - 4 * hole) * 4.0
    assert expected == pytest.approx(349.82, abs=0.01)
    volume = sum(signed_volume(m) for m in scene.meshes)
    assert volume == pytest.approx(expected, rel=1e-9)
    assert 1 - volume / 400.0 == pytest.approx(4 * hole / 100.0, rel=1e-9)


def test_tubular_zero_tubules_is_solid():
    scene = compile_text("design t { tubular { tubule_count 0 height 2 } }")
    assert sum(signed_volume(m) for m in scene.meshes) == pytest.approx(200.0)


def test_tubular_gradient_ratio():
    scene = compile_text("design t { tubular { tubule_count 6 tubule_radius 0.4 spacing 2 "
                         "gradient z 2 } }")
    meta = scene.meshes[0].meta
    ratio = meta["radii_top"][0] / meta["radii_bottom"][0]
    assert ratio == pytest.approx(4.0)


def test_tubular_overlap_raises():
    with pytest.raises(GeometryError) as info:
        compile_text("design t { tubular { tubule_radius 1 spacing 1.5 } }")
    assert info.value.code == "TubuleOverlap"
    assert info.value.context["block_index"] == 0


def test_cellular_single_region_fills_domain():
    scene = compile_text("design c { cellular { region_count 1 wall_gap 0 smooth 0 } }")
    cells = [m for m in scene.meshes if "cell" in m.meta]
    assert len(cells) == 1
    assert signed_volume(cells[0]) == pytest.approx(1000.0)


def test_cellular_regular_lattice_cells_congruent():
    scene = compile_text("design c { cellular { region_count 8 randomness 0 wall_gap 0 "
                         "smooth 0 } }")
    vols = [signed_volume(m) for m in scene.meshes if "cell" in m.meta]
    assert len(vols) == 8
    assert np.allclose(vols, 125.0)


def test_cellular_raw_volumes_partition_box():
    scene = compile_text("design c { cellular { region_count 30 } }")
    raw = [m.meta["raw_volume"] for m in scene.meshes if "cell" in m.meta]
    assert sum(raw) == pytest.approx(1000.0, rel=1e-9)


def test_slab_holes_volume():
    scene = compile_text("design s { slab { hole_count 4 hole_radius 1 hole_sides 32 } }")
    hole = 0.5 * 32 * math.sin(2 * math.pi / 32)
    assert signed_volume(scene.meshes[0]) == pytest.approx((100 - 4 * hole) * 2.0)


def test_slab_hole_overlap_raises():
    with pytest.raises(GeometryError) as info:
        compile_text("design s { slab { hole_count 30 hole_radius 2 } }")
    assert info.value.code == "HoleOverlap"


def test_primitive_grid():
    scene = compile_text("design p { primitive { count_x 3 count_y 2 } }")
    assert len(scene.meshes) == 6
    assert all(signed_volume(m) == pytest.approx(8.0) for m in scene.meshes)


@pytest.mark.parametrize("text", [
    "design a { helical { noise 5 } }",
    "design a { cellular { region_count 12 } }",
    "design a { tubular { gradient x 1.5 } }",
])
def test_compilation_deterministic(text):
    a, b = compile_text(text), compile_text(text)
    assert len(a.meshes) == len(b.meshes)
    for ma, mb in zip(a.meshes, b.meshes):
        assert np.array_equal(ma.vertices, mb.vertices) and ma.faces == mb.faces


def test_seed_changes_stochastic_geometry():
    a = compile_text("design a { seed 1 cellular { region_count 12 } }")
    b = compile_text("design a { seed 2 cellular { region_count 12 } }")
    assert not np.array_equal(a.meshes[0].vertices, b.meshes[0].vertices)
