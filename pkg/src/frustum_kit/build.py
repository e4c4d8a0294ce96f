"""Assemble projection matrices from bounding planes.

Four side planes fix three columns of the projection matrix up to the
per-plane scale factors solved for here.  The depth column is the near plane
times a scalar chosen by a far-plane strategy.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    DegenerateFarPointError,
    DegenerateInitError,
    DegenerateNormalError,
    FrustumError,
    FrustumWarning,
    NoConvergenceError,
    NotConcurrentError,
    SingularMatrixError,
    SingularProjectionError,
    SingularSystemError,
)
from .extract import AffineFrustum
from .linalg import (
    as_vec,
    dehomogenize,
    homogenize,
    intersect_planes,
    invert_mat4,
    is_at_infinity,
    normalize_plane,
    solve3,
)
from .validate import ValidationReport, validate

logger = logging.getLogger(__name__)

CONCURRENCY_RTOL = 1e-6
FAR_POINT_TOL = 1e-12
CORNER_OFF_PLANE_TOL = 1e-10
PARALLEL_RTOL = 1e-12


@dataclass(frozen=True)
class SidePlanes:
    left: np.ndarray
    right: np.ndarray
    top: np.ndarray
    bottom: np.ndarray

    def __post_init__(self):
        for name in ("left", "right", "top", "bottom"):
            object.__setattr__(self, name, as_vec(getattr(self, name)))

    def as_matrix(self) -> np.ndarray:
        return np.array([self.left, self.right, self.top, self.bottom])


@dataclass(frozen=True)
class ThroughPoint:
    """Far plane passes through ``point`` (3D or homogeneous)."""

    point: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.point, dtype=np.float64)
        object.__setattr__(self, "point", homogenize(p) if p.shape == (3,) else as_vec(p))


@dataclass(frozen=True)
class MaximizeVolume:
    max_iter: int = 128


@dataclass(frozen=True)
class ExplicitKn:
    kn: float


FarStrategy = Union[ThroughPoint, MaximizeVolume, ExplicitKn]


@dataclass(frozen=True)
class SideCoefficients:
    kl: float
    kr: float
    kt: float
    kb: float


@dataclass(frozen=True)
class KnSearch:
    kn: float
    seed: float
    iterations: int


@dataclass(frozen=True)
class BuildResult:
    frustum: AffineFrustum
    coefficients: SideCoefficients
    kn: float
    camera: np.ndarray
    search: KnSearch | None = None
    report: ValidationReport | None = None


def camera_position(s: SidePlanes) -> np.ndarray:
    """Common point of the four side planes, possibly at infinity."""
    rows = np.array([normalize_plane(p) for p in s.as_matrix()])
    _, sv, vt = np.linalg.svd(rows)
    if sv[-1] > CONCURRENCY_RTOL * sv[0]:
        raise NotConcurrentError(
            f"side planes do not meet in one point (singular values {sv.tolist()})"
        )
    cam = vt[-1]
    # pick a canonical sign: positive w, or positive largest component at infinity
    if is_at_infinity(cam):
        cam = cam * np.sign(cam[np.argmax(np.abs(cam))])
    elif cam[3] < 0:
        cam = -cam
    return cam


def solve_side_coefficients(s: SidePlanes) -> SideCoefficients:
    """Scale factors with ``kl = 1`` such that ``L - kr R = kb B - kt T``."""
    L, R, T, B = s.left, s.right, s.top, s.bottom
    a = np.column_stack([R[:3], B[:3], -T[:3]])
    try:
        kr, kb, kt = solve3(a, L[:3])
    except SingularMatrixError:
        # parallel side pairs (camera at infinity): the w components carry the missing rank
        kr, kb, kt = _solve_full(np.column_stack([R, B, -T]), L)
    return SideCoefficients(1.0, float(kr), float(kt), float(kb))


def _solve_full(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise SingularSystemError("side planes leave the coefficients undetermined")
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.linalg.norm(a @ x - b) > 1e-8 * max(np.linalg.norm(b), 1.0):
        raise SingularSystemError("side planes admit no consistent coefficients")
    return x


def kn_through_point(m3, n, q) -> float:
    m3, n = as_vec(m3), as_vec(n)
    q = np.asarray(q, dtype=np.float64)
    q = homogenize(q) if q.shape == (3,) else as_vec(q)
    den = float(np.dot(n, q))
    if abs(den) < FAR_POINT_TOL * max(np.linalg.norm(n) * np.linalg.norm(q), 1e-300):
        raise DegenerateFarPointError("point lies on the plane through the camera parallel to near")
    return float(np.dot(m3, q)) / den


def kn_perpendicular(m3, n) -> float:
    m3, n = as_vec(m3), as_vec(n)
    nn = float(np.dot(n[:3], n[:3]))
    if nn == 0.0:
        raise ValueError("near plane normal is zero")
    return float(np.dot(m3[:3], n[:3])) / nn


def _edge_directions(corners: np.ndarray, camera: np.ndarray, m3: np.ndarray) -> np.ndarray:
    if not is_at_infinity(camera):
        return corners - dehomogenize(camera)
    w_sign = 1.0 if np.sum(corners @ m3[:3] + m3[3]) >= 0 else -1.0
    return np.tile(w_sign * camera[:3], (4, 1))


def _far_is_acceptable(far: np.ndarray, corners_h: np.ndarray, edges: np.ndarray) -> bool:
    scale = np.linalg.norm(far)
    if scale == 0.0:
        return False
    unit = far / scale
    at_corners = corners_h @ unit
    # every near corner strictly on one side of the far plane
    if np.any(at_corners[0] * at_corners[1:] <= 0):
        return False
    if np.any(np.abs(at_corners) <= CORNER_OFF_PLANE_TOL):
        return False
    # walking each side edge away from the camera must reach the far plane
    along = edges @ unit[:3]
    tol = PARALLEL_RTOL * np.linalg.norm(edges, axis=1)
    reaches = (along * at_corners < 0) | (np.abs(along) <= tol)
    return bool(np.all(reaches))


def kn_maximize_volume(m3, n, near_corners, camera, max_iter: int = 128) -> KnSearch:
    """Grow the depth coefficient from the perpendicular seed until the far plane is usable.

    ``n`` must face the camera with the opposite sign to the one ``m3`` gives
    the near corners (``build_frustum`` arranges this).  The far plane is
    accepted once the near corners lie strictly on one side of it and every
    side edge meets it beyond the near plane (or at infinity).
    """
    m3, n = as_vec(m3), as_vec(n)
    camera = as_vec(camera)
    corners = np.array([c[:3] / c[3] if len(c) == 4 else c for c in np.asarray(near_corners, float)])
    corners_h = np.column_stack([corners, np.ones(4)])
    clip_w = corners_h @ m3
    if np.any(clip_w * clip_w[0] <= 0):
        raise FrustumError("near quad straddles the plane through the camera")
    edges = _edge_directions(corners, camera, m3)

    seed = kn_perpendicular(m3, n)
    base = (np.linalg.norm(n) + np.linalg.norm(m3)) * 0.1
    delta = min(base, seed * 0.1)
    if delta <= 1e-12 * base:
        # a non-positive seed would never move forward
        delta = base
    # below this the depth column vanishes and the matrix is singular
    tiny = 1e-12 * np.linalg.norm(m3) / np.linalg.norm(n)
    kn = seed
    for it in range(max_iter + 1):
        if abs(kn) > tiny and _far_is_acceptable(kn * n - m3, corners_h, edges):
            logger.debug("volume search stopped after %d steps at kn=%g", it, kn)
            return KnSearch(kn, seed, it)
        kn += delta
        delta *= 2.0
    raise NoConvergenceError(f"far plane search did not settle in {max_iter} steps")


def _near_corners(s: SidePlanes, near: np.ndarray) -> np.ndarray:
    pairs = ((s.right, s.top), (s.left, s.top), (s.left, s.bottom), (s.right, s.bottom))
    try:
        return np.array([intersect_planes(near, a, b) for a, b in pairs])
    except SingularMatrixError as exc:
        raise SingularProjectionError("near plane does not cut every side edge") from exc


def build_frustum_detailed(s: SidePlanes, near, far: FarStrategy) -> BuildResult:
    near = as_vec(near)
    k = solve_side_coefficients(s)
    m0 = 0.5 * (k.kr * s.right + k.kl * s.left)
    m1 = 0.5 * (k.kt * s.top + k.kb * s.bottom)
    m3 = 0.5 * (k.kl * s.left - k.kr * s.right)
    cam = camera_position(s)
    search = None

    if isinstance(far, ExplicitKn):
        kn = float(far.kn)
    elif isinstance(far, ThroughPoint):
        kn = kn_through_point(m3, near, far.point)
    elif isinstance(far, MaximizeVolume):
        corners = _near_corners(s, near)
        # orient N so that walking away from the camera increases its sign-adjusted distance
        w_sign = np.sign(np.sum(corners @ m3[:3] + m3[3]))
        edge = _edge_directions(corners, cam, m3)[0]
        flip = 1.0 if np.sign(np.dot(near[:3], edge)) == w_sign else -1.0
        found = kn_maximize_volume(m3, flip * near, corners, cam, far.max_iter)
        kn = flip * found.kn
        search = found
    else:
        raise TypeError(f"unknown far strategy {far!r}")

    proj = np.column_stack([m0, m1, kn * near, m3])
    try:
        inv = invert_mat4(proj)
    except SingularMatrixError as exc:
        raise SingularProjectionError("assembled projection matrix is singular") from exc
    frustum = AffineFrustum(proj, inv)
    report = validate(frustum)
    if isinstance(far, ThroughPoint) and not report.valid:
        warnings.warn(
            "far plane through the given point degenerates the frustum: " + "; ".join(report.details),
            FrustumWarning,
            stacklevel=3,
        )
    return BuildResult(frustum, k, kn, cam, search, report)


def build_frustum(s: SidePlanes, near, far: FarStrategy) -> AffineFrustum:
    return build_frustum_detailed(s, near, far).frustum


# -- origin fitting -------------------------------------------------------------


@dataclass(frozen=True)
class OriginProblem:
    """Four target side planes and the near-plane anchor points they pass through."""

    targets: np.ndarray
    anchors: np.ndarray
    step0: float = 1.0
    max_iter: int = 500
    grad_tol: float = 1e-8

    def __post_init__(self):
        targets = np.asarray(self.targets, dtype=np.float64).reshape(4, 4)
        anchors = np.asarray(self.anchors, dtype=np.float64).reshape(4, 3)
        if np.any(np.linalg.norm(targets[:, :3], axis=1) == 0):
            raise ValueError("target plane with zero normal")
        for i in range(4):
            for j in range(i + 1, 4):
                if np.array_equal(anchors[i], anchors[j]):
                    raise ValueError("anchor points must be distinct")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "anchors", anchors)


@dataclass(frozen=True)
class OriginResult:
    origin: np.ndarray
    value: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def origin_objective(origin, targets, anchors) -> tuple[float, np.ndarray]:
    """Sum of squared cosines between fitted and target side normals, with gradient."""
    o = as_vec(origin, 3)
    targets = np.asarray(targets, dtype=np.float64)
    anchors = np.asarray(anchors, dtype=np.float64)
    units = targets[:, :3] / np.linalg.norm(targets[:, :3], axis=1)[:, None]
    value = 0.0
    grad = np.zeros(3)
    for i in range(4):
        a = anchors[i] - o
        b = anchors[(i + 1) % 4] - o
        n = np.cross(a, b)
        nn = float(np.dot(n, n))
        if nn <= (1e-12 * np.linalg.norm(a) * np.linalg.norm(b)) ** 2:
            raise DegenerateNormalError(f"origin is collinear with anchors {i} and {(i + 1) % 4}")
        t = units[i]
        nt = float(np.dot(n, t))
        value += nt * nt / nn
        # n is affine in the origin with d n / d o_k = e_k x g, hence J^T v = g x v
        g = anchors[i] - anchors[(i + 1) % 4]
        grad += (2.0 * nt / nn**2) * (nn * np.cross(g, t) - nt * np.cross(g, n))
    return value, grad


def approximate_origin(p: OriginProblem, initial=None) -> OriginResult:
    """Gradient ascent with backtracking on :func:`origin_objective`.

    Starts at the intersection of the first three targets unless ``initial``
    is given.
    """
    if initial is None:
        try:
            o = intersect_planes(*p.targets[:3])
        except SingularMatrixError as exc:
            raise DegenerateInitError("first three target planes do not meet in one point") from exc
    else:
        o = as_vec(initial, 3).copy()

    value, grad = origin_objective(o, p.targets, p.anchors)
    history = [value]
    converged = False
    it = 0
    while it < p.max_iter:
        if np.linalg.norm(grad) < p.grad_tol:
            converged = True
            break
        step = p.step0
        for _ in range(41):
            cand = o + step * grad
            try:
                cand_value, cand_grad = origin_objective(cand, p.targets, p.anchors)
            except DegenerateNormalError:
                cand_value = -np.inf
            if cand_value > value:
                break
            step *= 0.5
        else:
            logger.debug("line search stalled at iteration %d", it)
            break
        o, value, grad = cand, cand_value, cand_grad
        history.append(value)
        it += 1
    else:
        converged = bool(np.linalg.norm(grad) < p.grad_tol)
    return OriginResult(o, value, it, converged, history)
