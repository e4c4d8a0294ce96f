"""Planes, dividing planes and key points of an affine frustum.

An affine frustum is stored as a projection matrix together with its inverse.
Clip coordinates satisfy -w <= x, y <= w and 0 <= z <= w.  Bounding planes are
read from the columns of the projection matrix, key points from the rows of
the inverse.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import FrustumError
from .linalg import as_mat, dehomogenize, invert_mat4, is_at_infinity, normalize_plane

PAIR_TOL = 1e-6

# NDC positions of the eight corners: near quad then far quad
NDC_CORNERS = np.array(
    [
        [1, 1, 0, 1],
        [-1, 1, 0, 1],
        [-1, -1, 0, 1],
        [1, -1, 0, 1],
        [1, 1, 1, 1],
        [-1, 1, 1, 1],
        [-1, -1, 1, 1],
        [1, -1, 1, 1],
    ],
    dtype=np.float64,
)

# Wireframe edges as pairs of corner indices
CORNER_EDGES = (
    (0, 1), (1, 2), (2, 3), (3, 0),
    (4, 5), (5, 6), (6, 7), (7, 4),
    (0, 4), (1, 5), (2, 6), (3, 7),
)

PLANE_NAMES = ("left", "right", "top", "bottom", "near", "far")

# Planes each corner lies on, as used by incidence checks
CORNER_PLANES = (
    ("right", "top", "near"),
    ("left", "top", "near"),
    ("left", "bottom", "near"),
    ("right", "bottom", "near"),
    ("right", "top", "far"),
    ("left", "top", "far"),
    ("left", "bottom", "far"),
    ("right", "bottom", "far"),
)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def pair_residual(proj, inv_proj) -> float:
    return float(np.linalg.norm(proj @ inv_proj - np.identity(4), np.inf))


@dataclass(frozen=True)
class AffineFrustum:
    """Projection matrix and inverse kept as a consistent pair."""

    proj: np.ndarray
    inv_proj: np.ndarray

    def __post_init__(self):
        proj = _frozen(as_mat(self.proj))
        inv = _frozen(as_mat(self.inv_proj))
        err = pair_residual(proj, inv)
        if not err < PAIR_TOL:
            raise FrustumError(f"matrix and inverse disagree (residual {err:.3g})")
        object.__setattr__(self, "proj", proj)
        object.__setattr__(self, "inv_proj", inv)

    @classmethod
    def from_proj(cls, proj) -> "AffineFrustum":
        proj = as_mat(proj)
        return cls(proj, invert_mat4(proj))

    def scaled(self, s: float) -> "AffineFrustum":
        return AffineFrustum(self.proj * s, self.inv_proj / s)

    def with_view(self, view) -> "AffineFrustum":
        """Prepend a world-to-view matrix: world points map through ``view`` first."""
        view = as_mat(view)
        return AffineFrustum(view @ self.proj, self.inv_proj @ invert_mat4(view))

    @property
    def pair_error(self) -> float:
        return pair_residual(self.proj, self.inv_proj)


class Orientation(enum.Enum):
    AS_EXTRACTED = "as_extracted"
    OUTWARD = "outward"


@dataclass(frozen=True)
class PlaneSet:
    left: np.ndarray
    right: np.ndarray
    top: np.ndarray
    bottom: np.ndarray
    near: np.ndarray
    far: np.ndarray
    orientation: Orientation = Orientation.AS_EXTRACTED

    def as_dict(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PLANE_NAMES}

    def normalized(self) -> "PlaneSet":
        return replace(self, **{k: normalize_plane(v) for k, v in self.as_dict().items()})


@dataclass(frozen=True)
class DividingPlanes:
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray


@dataclass(frozen=True)
class KeyPoints:
    corners: np.ndarray  # (8, 4): C1..C8
    center: np.ndarray
    cam: np.ndarray
    vanish_y: np.ndarray
    vanish_x: np.ndarray

    @property
    def near_corners(self) -> np.ndarray:
        return self.corners[:4]

    @property
    def far_corners(self) -> np.ndarray:
        return self.corners[4:]

    @property
    def camera_is_finite(self) -> bool:
        return not is_at_infinity(self.cam)


def extract_planes(f: AffineFrustum) -> PlaneSet:
    m0, m1, m2, m3 = (f.proj[:, j].copy() for j in range(4))
    return PlaneSet(
        left=m0 + m3,
        right=m0 - m3,
        top=m1 - m3,
        bottom=m1 + m3,
        near=m2,
        far=m2 - m3,
    )


def dividing_planes(f: AffineFrustum) -> DividingPlanes:
    m = f.proj
    return DividingPlanes(dx=m[:, 0].copy(), dy=m[:, 1].copy(), dz=m[:, 2] - 0.5 * m[:, 3])


def key_points(f: AffineFrustum) -> KeyPoints:
    r0, r1, r2, r3 = f.inv_proj
    return KeyPoints(
        corners=NDC_CORNERS @ f.inv_proj,
        center=0.5 * r2 + r3,
        cam=r2.copy(),
        vanish_y=r1.copy(),
        vanish_x=r0.copy(),
    )


def affinity_residual(planes: PlaneSet, kl=1.0, kr=1.0, kt=1.0, kb=1.0, kn=1.0, kf=1.0):
    """Residuals of the two linear relations tying six planes to one matrix.

    Both vanish for planes extracted from a projection matrix with all
    coefficients equal to one.
    """
    p = planes
    depth = kn * p.near - 0.5 * kl * p.left + 0.5 * kr * p.right - kf * p.far
    sides = kl * p.left - kr * p.right - kb * p.bottom + kt * p.top
    return depth, sides


def corner_points(f: AffineFrustum) -> np.ndarray:
    """The eight corners as finite 3D points, (8, 3)."""
    return np.array([dehomogenize(c) for c in key_points(f).corners])


def reorient_outward(planes: PlaneSet, corners) -> PlaneSet:
    """Flip planes so the centroid of ``corners`` lies on their negative side."""
    centroid = np.append(np.mean(np.asarray(corners, dtype=np.float64)[:, :3], axis=0), 1.0)
    flipped = {}
    for name, plane in planes.as_dict().items():
        flipped[name] = -plane if np.dot(plane, centroid) > 0 else plane.copy()
    return PlaneSet(**flipped, orientation=Orientation.OUTWARD)


def outward_planes(f: AffineFrustum) -> PlaneSet:
    return reorient_outward(extract_planes(f), corner_points(f))


def view_direction(f: AffineFrustum) -> np.ndarray:
    """Direction in which the depth coordinate grows, oriented by the near quad.

    For a finite camera this points from the camera into the frustum; for an
    orthographic frustum it is the common direction of the side edges.
    """
    kp = key_points(f)
    near_w = kp.near_corners[:, 3]
    sign = 1.0 if near_w.sum() >= 0 else -1.0
    if kp.camera_is_finite:
        cam = dehomogenize(kp.cam)
        mid = np.mean([dehomogenize(c) for c in kp.near_corners], axis=0)
        return mid - cam
    return sign * kp.cam[:3]
