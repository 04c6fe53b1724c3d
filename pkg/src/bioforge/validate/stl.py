"""Binary STL export and import."""

from __future__ import annotations

from pathlib import Path

import numpy as np

STL_DTYPE = np.dtype([
    ("normal", "<f4", (3,)),
    ("v", "<f4", (3, 3)),
    ("attr", "<u2"),
])
HEADER = b"bioforge binary STL".ljust(80, b" ")


def scene_triangles(scene) -> np.ndarray:
    parts = [m.vertices[m.triangles()] for m in scene.meshes]
    return np.concatenate(parts) if parts else np.zeros((0, 3, 3))


def stl_bytes(scene) -> bytes:
    tri = scene_triangles(scene)
    rec = np.zeros(len(tri), dtype=STL_DTYPE)
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    length = np.linalg.norm(n, axis=1)
    rec["normal"] = n / np.where(length > 0, length, 1.0)[:, None]
    rec["v"] = tri
    return HEADER + np.uint32(len(tri)).astype("<u4").tobytes() + rec.tobytes()


def export_stl(scene, path) -> int:
    """Write a little-endian binary STL and return the number of bytes written."""
    data = stl_bytes(scene)
    Path(path).write_bytes(data)
    return len(data)


def read_stl(path) -> tuple[np.ndarray, np.ndarray]:
    """Return (normals (T, 3), triangles (T, 3, 3)) from a binary STL file."""
    data = Path(path).read_bytes()
    if len(data) < 84:
        raise ValueError("truncated STL header")
    count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
    if len(data) != 84 + 50 * count:
        raise ValueError(f"STL size {len(data)} does not match {count} triangles")
    rec = np.frombuffer(data, dtype=STL_DTYPE, count=count, offset=84)
    return rec["normal"].astype(float), rec["v"].astype(float)
