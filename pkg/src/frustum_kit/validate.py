"""Frustum validity checks and the signed-distance clip mapping."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularDenominatorError
from .extract import (
    PLANE_NAMES,
    AffineFrustum,
    extract_planes,
    key_points,
    outward_planes,
)
from .linalg import as_vec, is_at_infinity, normalize, normalize_plane

CONVEX_RTOL = 1e-10
SIDE_RTOL = 1e-12
DENOM_TOL = 1e-12


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    near_convex: bool
    separates: bool
    details: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "near_convex": self.near_convex,
            "separates": self.separates,
            "details": list(self.details),
        }


def quad_is_convex(points, normal) -> tuple[bool, str]:
    """Convexity of a planar quad listed in boundary order.

    Every turn must have the same orientation about ``normal`` and be clearly
    nonzero; a straight or reversed turn fails.
    """
    pts = np.asarray(points, dtype=np.float64)
    edges = np.roll(pts, -1, axis=0) - pts
    scale = np.max(np.linalg.norm(edges, axis=1))
    if scale == 0.0:
        return False, "near quad collapsed to a point"
    n = normalize(normal)
    turns = np.array([np.dot(np.cross(edges[i], edges[(i + 1) % 4]), n) for i in range(4)])
    tol = CONVEX_RTOL * scale * scale
    if np.all(turns > tol) or np.all(turns < -tol):
        return True, ""
    return False, f"near quad turn signs {np.sign(turns).astype(int).tolist()}"


def _side(plane, point, w_sign: float) -> float:
    """Signed side of a homogeneous point, with points at infinity taken as limits."""
    if is_at_infinity(point):
        return w_sign * float(np.dot(plane[:3], normalize(point[:3])))
    return float(np.dot(plane[:3], point[:3] / point[3]) + plane[3])


def check_points(near_corners, far_corners, camera, near_plane) -> ValidationReport:
    """Validity test on raw homogeneous key points.

    The near quad must be convex and the near plane must put the camera and
    the four far corners on strictly opposite sides.  A camera with ``w = 0``
    is an oriented direction: its xyz part points along the view, the way
    the depth row of an inverse projection does.
    """
    near_corners = np.asarray(near_corners, dtype=np.float64)
    far_corners = np.asarray(far_corners, dtype=np.float64)
    camera = as_vec(camera)
    plane = normalize_plane(near_plane)
    details = []

    near_w = near_corners[:, 3]
    finite_near = not any(is_at_infinity(c) for c in near_corners)
    w_sign = 1.0 if near_w.sum() >= 0 else -1.0
    if not finite_near:
        details.append("near quad has a corner at infinity")
        convex = False
    elif np.any(np.sign(near_w) != w_sign):
        details.append("near quad wraps through infinity")
        convex = False
    else:
        convex, why = quad_is_convex(near_corners[:, :3] / near_w[:, None], plane[:3])
        if why:
            details.append(why)

    if is_at_infinity(camera):
        # camera at infinity: it sits behind the near plane along the view direction
        cam_side = -w_sign * float(np.dot(plane[:3], normalize(camera[:3])))
        details.append("camera at infinity; separation tested along the view direction")
    else:
        cam_side = _side(plane, camera, w_sign)
    far_sides = np.array([_side(plane, c, w_sign) for c in far_corners])

    finite_pts = [c[:3] / c[3] for c in near_corners if not is_at_infinity(c)]
    scale = 1.0 + (np.abs(finite_pts).max() if finite_pts else 0.0)
    tol = SIDE_RTOL * scale
    separates = abs(cam_side) > tol and bool(np.all(far_sides * np.sign(cam_side) < -tol))
    if not separates:
        details.append(
            f"near plane does not separate camera ({cam_side:.3g}) from far corners "
            f"({', '.join(f'{s:.3g}' for s in far_sides)})"
        )
    return ValidationReport(convex and separates, convex, separates, details)


def validate(f: AffineFrustum) -> ValidationReport:
    kp = key_points(f)
    return check_points(kp.near_corners, kp.far_corners, kp.cam, extract_planes(f).near)


@dataclass(frozen=True)
class NonAffineFrustum:
    """Six planes with outward normals, stored with unit-length normals."""

    left: np.ndarray
    right: np.ndarray
    top: np.ndarray
    bottom: np.ndarray
    near: np.ndarray
    far: np.ndarray

    def __post_init__(self):
        for name in PLANE_NAMES:
            object.__setattr__(self, name, normalize_plane(getattr(self, name)))

    @classmethod
    def from_affine(cls, f: AffineFrustum) -> "NonAffineFrustum":
        planes = outward_planes(f)
        return cls(**planes.as_dict())

    def distances(self, x) -> dict[str, float]:
        p = np.append(as_vec(x, 3), 1.0)
        return {name: float(np.dot(getattr(self, name), p)) for name in PLANE_NAMES}

    def contains(self, x) -> bool:
        return all(d < 0 for d in self.distances(x).values())


def nonaffine_map(nf: NonAffineFrustum, x) -> np.ndarray:
    """Map a point to [0, 1]^3 by ratios of distances to opposite planes."""
    d = nf.distances(x)
    out = []
    for axis, lo, hi in (("x", "left", "right"), ("y", "top", "bottom"), ("z", "near", "far")):
        den = d[lo] + d[hi]
        if abs(den) <= DENOM_TOL:
            raise SingularDenominatorError(axis, den)
        out.append(d[lo] / den)
    return np.array(out)


def clip_to_ndc(c) -> np.ndarray:
    """Remap [0, 1]^3 output to x, y in [-1, 1] (y up) and z in [0, 1]."""
    c = as_vec(c, 3)
    return np.array([2 * c[0] - 1, 1 - 2 * c[1], c[2]])

