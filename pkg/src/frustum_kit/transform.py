"""Operations that turn one frustum pair into another.

Each operation updates the projection matrix and its inverse side by side so
no general 4x4 inversion is needed after the fact.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .build import SidePlanes, ThroughPoint, build_frustum_detailed
from .errors import (
    CameraInPositiveHalfspaceError,
    DegenerateClipError,
    DegenerateRectError,
    FrustumError,
    ObserverOnPlaneError,
    ZeroNormalError,
)
from .extract import NDC_CORNERS, AffineFrustum
from .linalg import (
    as_vec,
    homogenize,
    invert_mat4,
    is_at_infinity,
    normalize,
    normalize_plane,
    plane_through_points,
)
from .projection import perspective
from .validate import ValidationReport

logger = logging.getLogger(__name__)

CLIP_TOL = 1e-12


# -- crop ------------------------------------------------------------------------


@dataclass(frozen=True)
class CropSpec:
    """Sub-rectangle of the near window, measured from its upper-left corner."""

    x_offset: float
    y_offset: float
    block_width: float
    block_height: float
    width: float
    height: float

    def __post_init__(self):
        if min(self.width, self.height, self.block_width, self.block_height) <= 0:
            raise ValueError("crop sizes must be positive")
        if not (0 <= self.x_offset <= self.width - self.block_width):
            raise ValueError("crop block exceeds the window horizontally")
        if not (0 <= self.y_offset <= self.height - self.block_height):
            raise ValueError("crop block exceeds the window vertically")

    def _params(self):
        x = self.x_offset / self.block_width
        y = self.y_offset / self.block_height
        w = self.width / self.block_width
        h = self.height / self.block_height
        return x, y, w, h, 1.0 / w, 1.0 / h


def crop_matrices(c: CropSpec) -> tuple[np.ndarray, np.ndarray]:
    """Clip-space crop matrix and its closed-form inverse."""
    x, y, w, h, rw, rh = c._params()
    crop_mat = np.array(
        [
            [w, 0, 0, 0],
            [0, h, 0, 0],
            [0, 0, 1, 0],
            [w - 1 - 2 * x, h - 1 - 2 * y, 0, 1],
        ]
    )
    inv_crop = np.array(
        [
            [rw, 0, 0, 0],
            [0, rh, 0, 0],
            [0, 0, 1, 0],
            [-1 + rw + 2 * x * rw, -1 + rh + 2 * y * rh, 0, 1],
        ]
    )
    return crop_mat, inv_crop


def crop_dense(f: AffineFrustum, c: CropSpec) -> AffineFrustum:
    crop_mat, inv_crop = crop_matrices(c)
    return AffineFrustum(f.proj @ crop_mat, inv_crop @ f.inv_proj)


def crop(f: AffineFrustum, c: CropSpec) -> AffineFrustum:
    """Sub-frustum over a block of the near window, touching only the affected columns/rows."""
    x, y, w, h, rw, rh = c._params()
    p = f.proj
    proj = p.copy()
    proj[:, 0] = w * p[:, 0] + (w - 1 - 2 * x) * p[:, 3]
    proj[:, 1] = h * p[:, 1] + (h - 1 - 2 * y) * p[:, 3]
    q = f.inv_proj
    inv = q.copy()
    inv[0] = rw * q[0]
    inv[1] = rh * q[1]
    inv[3] = (-1 + rw + 2 * x * rw) * q[0] + (-1 + rh + 2 * y * rh) * q[1] + q[3]
    return AffineFrustum(proj, inv)


# -- planar reflection -------------------------------------------------------------


def reflection_matrix(c) -> np.ndarray:
    """Mirror across the plane ``c``, whose normal must have unit length."""
    c = as_vec(c)
    length = np.linalg.norm(c[:3])
    if length == 0.0:
        raise ZeroNormalError("mirror plane normal is zero")
    if abs(length - 1.0) > 1e-9:
        raise ValueError("mirror plane must be normalized")
    r = np.identity(4)
    r[:3, :3] -= 2.0 * np.outer(c[:3], c[:3])
    r[3, :3] = -2.0 * c[3] * c[:3]
    return r


def reflect_point(point, c) -> np.ndarray:
    return (homogenize(point) @ reflection_matrix(c))[:3]


def reflect(f: AffineFrustum, c) -> AffineFrustum:
    """Mirror image of a frustum; applying it twice gives the original pair back."""
    r = reflection_matrix(c)
    return AffineFrustum(r @ f.proj, f.inv_proj @ r)


def _camera_side(proj_inv: np.ndarray, c: np.ndarray) -> float:
    cam = proj_inv[2]
    if not is_at_infinity(cam):
        return float(np.dot(c[:3], cam[:3] / cam[3]) + c[3])
    near_w = (NDC_CORNERS[:4] @ proj_inv)[:, 3]
    view = np.sign(near_w.sum()) * cam[:3]
    return -float(np.dot(c[:3], normalize(view)))


def _sign(v: float) -> float:
    return 1.0 if v >= 0 else -1.0


def _clip_point(proj: np.ndarray, inv: np.ndarray, c: np.ndarray, q_select: str) -> np.ndarray:
    if q_select == "sign":
        return np.array([_sign(c[0]), _sign(c[1]), 1.0, 1.0]) @ inv
    if q_select != "auto":
        raise ValueError("q_select must be 'auto' or 'sign'")
    m3 = proj[:, 3]
    best, best_k = None, 0.0
    for ndc in NDC_CORNERS[4:]:
        q = ndc @ inv
        den = float(np.dot(c, q))
        if is_at_infinity(q) or abs(den) < CLIP_TOL:
            continue
        if den / q[3] <= 0:  # corner on the camera side of the mirror
            continue
        k = float(np.dot(m3, q)) / den
        if abs(k) > abs(best_k):
            best, best_k = q, k
    if best is None:
        raise DegenerateClipError("no far corner lies beyond the mirror plane")
    return best


def reflect_and_clip(f: AffineFrustum, c, q_select: str = "auto") -> AffineFrustum:
    """Mirror a frustum across ``c`` and move its near plane onto the mirror.

    The far plane is pivoted to pass through one far corner ``Q`` of the
    mirrored frustum.  ``q_select="auto"`` takes the corner that keeps every
    far corner beyond the mirror; ``"sign"`` picks it from the signs of the
    mirror normal's x and y components.
    """
    c = normalize_plane(c)
    r = reflection_matrix(c)
    proj = r @ f.proj
    inv = f.inv_proj @ r
    if _camera_side(inv, c) >= 0:
        raise CameraInPositiveHalfspaceError("mirrored camera must lie on the negative side of the mirror")

    q = _clip_point(proj, inv, c, q_select)
    den = float(np.dot(c, q))
    if abs(den) < CLIP_TOL:
        raise DegenerateClipError("clip point lies on the mirror's parallel through the camera")
    k = float(np.dot(proj[:, 3], q)) / den
    near = k * c
    # column-vector solve of proj @ x = near, using the stored inverse
    x = inv @ near
    if abs(x[2]) < CLIP_TOL:
        raise DegenerateClipError("depth column update is singular")

    new_proj = proj.copy()
    new_proj[:, 2] = near
    new_inv = inv.copy()
    new_inv[0] = inv[0] - x[0] / x[2] * inv[2]
    new_inv[1] = inv[1] - x[1] / x[2] * inv[2]
    new_inv[2] = inv[2] / x[2]
    new_inv[3] = inv[3] - x[3] / x[2] * inv[2]
    return AffineFrustum(new_proj, new_inv)


# -- reflection from a rectangle ---------------------------------------------------


@dataclass(frozen=True)
class ReflectiveRect:
    p1: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    observer: np.ndarray
    far_dist: float

    def __post_init__(self):
        for name in ("p1", "a1", "a2", "observer"):
            object.__setattr__(self, name, as_vec(getattr(self, name), 3))

    @property
    def corners(self) -> np.ndarray:
        p2 = self.p1 + self.a1
        return np.array([self.p1, p2, p2 + self.a2, self.p1 + self.a2])

    @property
    def plane(self) -> np.ndarray:
        n = np.cross(self.a1, self.a2)
        if np.linalg.norm(n) <= 1e-12 * np.linalg.norm(self.a1) * np.linalg.norm(self.a2):
            raise DegenerateRectError("rectangle sides are parallel")
        n = normalize(n)
        return np.append(n, -np.dot(n, self.p1))


def reflect_rect(r: ReflectiveRect, depth_range: str = "zero_one") -> AffineFrustum:
    """Frustum seen from the mirror image of the observer through a rectangular mirror.

    The view axis is the mirror normal, so the rectangle is the near window
    and its corners land exactly on the NDC corners of the near plane.
    """
    plane = r.plane
    u1, u2 = normalize(r.a1), normalize(r.a2)
    if abs(np.dot(u1, u2)) > 1e-9:
        raise DegenerateRectError("rectangle sides must be perpendicular")
    dist = float(np.dot(plane[:3], r.observer) + plane[3])
    if abs(dist) <= 1e-12 * (1.0 + np.linalg.norm(r.observer)):
        raise ObserverOnPlaneError("observer lies in the mirror plane")
    eye = reflect_point(r.observer, plane)

    k = plane[:3] * np.sign(np.dot(plane[:3], eye - r.p1))
    j = u1
    i = np.cross(j, k)
    basis = np.column_stack([i, j, k])

    local = (r.corners - eye) @ basis
    near = -local[0, 2]
    if not r.far_dist > near:
        raise DegenerateRectError(f"far distance {r.far_dist} must exceed near distance {near}")
    lo, hi = local.min(axis=0), local.max(axis=0)
    m = perspective(lo[0], hi[0], lo[1], hi[1], near, r.far_dist, depth_range)

    shift, shift_inv = np.identity(4), np.identity(4)
    shift[3, :3] = -eye
    shift_inv[3, :3] = eye
    rot = np.identity(4)
    rot[:3, :3] = basis.T  # rows are the new axes
    proj = shift @ rot.T @ m
    inv = invert_mat4(m) @ rot @ shift_inv
    return AffineFrustum(proj, inv)


# -- lens refraction ---------------------------------------------------------------


@dataclass(frozen=True)
class LensSpec:
    center: np.ndarray
    radius: float
    power: float
    plane: np.ndarray

    def __post_init__(self):
        center = as_vec(self.center, 3)
        plane = normalize_plane(self.plane)
        if not self.radius > 0 or not self.power > 0:
            raise ValueError("lens radius and power must be positive")
        if abs(np.dot(plane[:3], center) + plane[3]) > 1e-9:
            raise ValueError("lens center is off the refraction plane")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "plane", plane)

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal in-plane axes."""
        n = self.plane[:3]
        helper = np.eye(3)[np.argmin(np.abs(n))]
        u = normalize(np.cross(helper, n))
        return u, np.cross(n, u)


def lens_distort(points, spec: LensSpec) -> np.ndarray:
    """Radial power-law warp around the lens center; radius ``spec.radius`` is fixed."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    off = pts @ spec.plane[:3] + spec.plane[3]
    if pts.size and np.abs(off).max() > 1e-7:
        raise ValueError("points must lie on the refraction plane")
    v = pts - spec.center
    dist = np.linalg.norm(v, axis=1)
    out = pts.copy()
    moving = dist > 0
    scale = spec.radius * (dist[moving] / spec.radius) ** spec.power / dist[moving]
    out[moving] = spec.center + v[moving] * scale[:, None]
    out[~moving] = spec.center
    return out


def uniform_lattice(corner, u, v, rows: int, cols: int) -> np.ndarray:
    """``(rows+1, cols+1, 3)`` grid spanning ``corner + s*u + t*v`` for s, t in [0, 1]."""
    if rows < 0 or cols < 0:
        raise ValueError("grid size must be non-negative")
    s = np.linspace(0.0, 1.0, cols + 1)
    t = np.linspace(0.0, 1.0, rows + 1)
    corner, u, v = as_vec(corner, 3), as_vec(u, 3), as_vec(v, 3)
    return corner + t[:, None, None] * v + s[None, :, None] * u


def lens_lattice(spec: LensSpec, rows: int, cols: int, half_size: float | None = None) -> np.ndarray:
    """Square lattice centered on the lens, half-width ``radius`` by default."""
    h = spec.radius if half_size is None else half_size
    u, v = spec.basis()
    return uniform_lattice(spec.center - h * u - h * v, 2 * h * u, 2 * h * v, rows, cols)


def quad_area(points, normal) -> float:
    """Signed area of a planar polygon about ``normal`` (shoelace in 3D)."""
    pts = np.asarray(points, dtype=np.float64)
    total = np.zeros(3)
    for a, b in zip(pts, np.roll(pts, -1, axis=0)):
        total += np.cross(a, b)
    return 0.5 * float(np.dot(total, normalize(normal)))


@dataclass(frozen=True)
class LensTile:
    row: int
    col: int
    corners: np.ndarray  # distorted C1..C4
    frustum: AffineFrustum | None
    report: ValidationReport | None
    error: str | None = None


def lens_tile_frustums(lattice, spec: LensSpec, origin, far_scale: float = 10.0) -> list[LensTile]:
    """One frustum per grid tile after distorting the tile corners.

    Side planes pass through ``origin`` and consecutive distorted corners, the
    near plane is the refraction plane, and the far plane passes through the
    point ``far_scale`` times as far from the origin as the tile center.
    Failures are recorded per tile.
    """
    lattice = np.asarray(lattice, dtype=np.float64)
    rows, cols = lattice.shape[0] - 1, lattice.shape[1] - 1
    warped = lens_distort(lattice.reshape(-1, 3), spec).reshape(lattice.shape)
    origin = as_vec(origin, 3)
    near = spec.plane
    side = float(np.dot(near[:3], origin) + near[3])
    if abs(side) <= 1e-12:
        raise ValueError("origin lies on the refraction plane")
    if side > 0:
        near = -near

    tiles = []
    for i in range(rows):
        for j in range(cols):
            quad = np.array([warped[i + 1, j + 1], warped[i + 1, j], warped[i, j], warped[i, j + 1]])
            try:
                sides = SidePlanes(
                    left=plane_through_points(origin, quad[1], quad[2]),
                    right=plane_through_points(origin, quad[3], quad[0]),
                    top=plane_through_points(origin, quad[0], quad[1]),
                    bottom=plane_through_points(origin, quad[2], quad[3]),
                )
                q = origin + far_scale * (quad.mean(axis=0) - origin)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    built = build_frustum_detailed(sides, near, ThroughPoint(q))
                tiles.append(LensTile(i, j, quad, built.frustum, built.report))
            except FrustumError as exc:
                logger.info("tile (%d, %d) failed: %s", i, j, exc)
                tiles.append(LensTile(i, j, quad, None, None, str(exc)))
    return tiles
