"""Orthographic z-buffer renderer with flat Lambert shading."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..geometry.mesh import GeometryError

WIDTH, HEIGHT = 1280, 720
BACKGROUND = (30, 30, 30)
VIEWS = ("iso", "front", "top")

# direction towards the camera, screen-up hint, light direction
_VIEW_FRAMES = {
    "iso": ((1.0, -1.0, 1.0), (0.0, 0.0, 1.0), (0.4, -0.8, 1.0)),
    "front": ((0.0, -1.0, 0.0), (0.0, 0.0, 1.0), (0.3, -1.0, 0.6)),
    "top": ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (0.3, -0.5, 1.0)),
}


@dataclass(frozen=True)
class Camera:
    view: str = "iso"
    width: int = WIDTH
    height: int = HEIGHT
    margin: float = 0.1

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if self.view not in _VIEW_FRAMES:
            raise ValueError(f"unknown view {self.view!r}; expected one of {VIEWS}")
        toward, up_hint, light = (np.asarray(v, dtype=float) for v in _VIEW_FRAMES[self.view])
        toward /= np.linalg.norm(toward)
        right = np.cross(up_hint, toward)
        right /= np.linalg.norm(right)
        up = np.cross(toward, right)
        return right, up, toward, light / np.linalg.norm(light)


@dataclass
class RenderImage:
    width: int
    height: int
    pixels: bytes
    view: str

    def to_ppm(self) -> bytes:
        return f"P6\n{self.width} {self.height}\n255\n".encode() + self.pixels

    def save(self, path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_ppm())
        return path

    def array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width, 3)


def read_ppm(path) -> RenderImage:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = map(int, parts[1].split())
    return RenderImage(w, h, parts[3], "")


def mesh_gray(index: int) -> float:
    """Deterministic per-mesh base gray level in [0.45, 0.95)."""
    return 0.45 + 0.5 * ((index * 0.6180339887498949) % 1.0)


def render_scene(scene, camera: Camera | str = "iso", chunk: int = 2_000_000) -> RenderImage:
    if isinstance(camera, str):
        camera = Camera(camera)
    meshes = scene.meshes
    if not meshes:
        raise GeometryError("EmptyScene", "nothing to render")
    right, up, toward, light = camera.basis()
    W, H = camera.width, camera.height

    verts = np.concatenate([m.vertices for m in meshes])
    tris, gray, base = [], [], 0
    for i, m in enumerate(meshes):
        t = m.triangles()
        tris.append(t + base)
        gray.append(np.full(len(t), mesh_gray(i)))
        base += m.n_vertices
    tris = np.concatenate(tris)
    gray = np.concatenate(gray)

    lo, hi = verts.min(axis=0), verts.max(axis=0)
    corners = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])
                        for z in (lo[2], hi[2])])
    cu, cv = corners @ right, corners @ up
    span_u = max(cu.max() - cu.min(), 1e-9)
    span_v = max(cv.max() - cv.min(), 1e-9)
    scale = min(W / (span_u * (1 + 2 * camera.margin)), H / (span_v * (1 + 2 * camera.margin)))
    mid_u, mid_v = (cu.max() + cu.min()) / 2, (cv.max() + cv.min()) / 2

    sx = (verts @ right - mid_u) * scale + W / 2
    sy = H / 2 - (verts @ up - mid_v) * scale
    depth = verts @ toward

    a, b, c = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
    normal = np.cross(b - a, c - a)
    nlen = np.linalg.norm(normal, axis=1)
    normal /= np.where(nlen > 0, nlen, 1.0)[:, None]
    shade = gray * (0.25 + 0.75 * np.abs(normal @ light))
    color = np.clip(np.round(255.0 * shade), 0, 255).astype(np.uint8)

    X, Y, Z = sx[tris], sy[tris], depth[tris]
    x0 = np.clip(np.ceil(X.min(axis=1) - 0.5), 0, W).astype(np.int64)
    x1 = np.clip(np.floor(X.max(axis=1) - 0.5), -1, W - 1).astype(np.int64)
    y0 = np.clip(np.ceil(Y.min(axis=1) - 0.5), 0, H).astype(np.int64)
    y1 = np.clip(np.floor(Y.max(axis=1) - 0.5), -1, H - 1).astype(np.int64)
    bw = np.maximum(x1 - x0 + 1, 0)
    bh = np.maximum(y1 - y0 + 1, 0)
    area = (X[:, 1] - X[:, 0]) * (Y[:, 2] - Y[:, 0]) - (X[:, 2] - X[:, 0]) * (Y[:, 1] - Y[:, 0])
    live = np.nonzero((bw > 0) & (bh > 0) & (np.abs(area) > 1e-12))[0]

    zbuf = np.full(W * H, -np.inf)
    cbuf = np.zeros(W * H, dtype=np.uint8)
    # process triangles in batches bounded by their row counts
    rows = bh[live]
    bounds = np.searchsorted(np.cumsum(rows), np.arange(chunk // 64, rows.sum() + chunk // 64,
                                                        chunk // 64))
    start = 0
    for stop in np.unique(np.append(bounds, len(live))):
        stop = max(stop, start + 1)
        ids = live[start:stop]
        start = stop
        if len(ids):
            _raster_batch(ids, X, Y, Z, area, y0, bh, W, color, zbuf, cbuf)

    img = np.empty((W * H, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    hit = np.isfinite(zbuf)
    img[hit] = cbuf[hit][:, None]
    return RenderImage(W, H, img.tobytes(), camera.view)


def _raster_batch(ids, X, Y, Z, area, y0, bh, W, color, zbuf, cbuf) -> None:
    """Scanline-rasterize triangles ``ids`` into the shared buffers."""
    n = bh[ids]
    tri = np.repeat(ids, n)
    py = y0[tri] + np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
    cy = py + 0.5
    Xt, Yt = X[tri], Y[tri]
    xl = np.full(len(tri), np.inf)
    xr = np.full(len(tri), -np.inf)
    for i, j in ((0, 1), (1, 2), (2, 0)):
        ya, yb = Yt[:, i], Yt[:, j]
        spans = (np.minimum(ya, yb) <= cy) & (cy <= np.maximum(ya, yb)) & (ya != yb)
        t = (cy - ya) / np.where(ya != yb, yb - ya, 1.0)
        x = Xt[:, i] + t * (Xt[:, j] - Xt[:, i])
        xl = np.where(spans, np.minimum(xl, x), xl)
        xr = np.where(spans, np.maximum(xr, x), xr)
    px0 = np.clip(np.ceil(xl - 0.5), 0, W).astype(np.int64)
    px1 = np.clip(np.floor(xr - 0.5), -1, W - 1).astype(np.int64)
    count = np.maximum(px1 - px0 + 1, 0)
    tri = np.repeat(tri, count)
    py = np.repeat(py, count)
    px = np.repeat(px0, count) + np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    if not len(tri):
        return
    cx, cy = px + 0.5, py + 0.5
    Xt, Yt = X[tri], Y[tri]
    w1 = (Xt[:, 2] - cx) * (Yt[:, 0] - cy) - (Xt[:, 0] - cx) * (Yt[:, 2] - cy)
    w2 = (Xt[:, 0] - cx) * (Yt[:, 1] - cy) - (Xt[:, 1] - cx) * (Yt[:, 0] - cy)
    a = area[tri]
    w1, w2 = w1 / a, w2 / a
    zt = Z[tri]
    z = (1.0 - w1 - w2) * zt[:, 0] + w1 * zt[:, 1] + w2 * zt[:, 2]
    pix = py * W + px
    # nearest fragment per pixel; ties keep the lowest triangle index
    order = np.lexsort((-tri, z, pix))
    pix, z, tri = pix[order], z[order], tri[order]
    last = np.append(pix[1:] != pix[:-1], True)
    pix, z, tri = pix[last], z[last], tri[last]
    closer = z > zbuf[pix]
    zbuf[pix[closer]] = z[closer]
    cbuf[pix[closer]] = color[tri[closer]]
