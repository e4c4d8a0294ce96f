"""Linear algebra for homogeneous 3D geometry.

Points are row vectors and transform as ``p @ M``.  Matrices are stored
row-major as plain ``(4, 4)`` float64 arrays; planes are 4-vectors
``(a, b, c, d)`` evaluated against homogeneous points by a dot product.
"""
from __future__ import annotations

import numpy as np

from .errors import PointAtInfinityError, SingularMatrixError, ZeroNormalError

SINGULAR_RTOL = 1e-12


def as_vec(v, size: int = 4) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (size,):
        raise ValueError(f"expected a {size}-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite components")
    return a


def as_mat(m, size: int = 4) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.shape == (size * size,):
        a = a.reshape(size, size)
    if a.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def row(m: np.ndarray, i: int) -> np.ndarray:
    return np.array(m[i, :])


def col(m: np.ndarray, j: int) -> np.ndarray:
    return np.array(m[:, j])


def mul_mat4(a, b) -> np.ndarray:
    return as_mat(a) @ as_mat(b)


def transform(v, m) -> np.ndarray:
    """Row-vector product ``v @ m``."""
    return as_vec(v) @ as_mat(m)


def _is_singular(m: np.ndarray) -> bool:
    n = m.shape[0]
    scale = np.abs(m).max()
    if scale == 0.0:
        return True
    return abs(np.linalg.det(m)) < SINGULAR_RTOL * scale**n


def invert_mat4(m) -> np.ndarray:
    m = as_mat(m)
    if _is_singular(m):
        raise SingularMatrixError("matrix is singular to working precision")
    return np.linalg.inv(m)


def solve3(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` for a 3x3 system."""
    a = as_mat(a, 3)
    b = as_vec(b, 3)
    if _is_singular(a):
        raise SingularMatrixError("3x3 system is singular")
    return np.linalg.solve(a, b)


def signed_distance(plane, point) -> float:
    return float(np.dot(as_vec(plane), as_vec(point)))


def dot(u, v) -> float:
    return float(np.dot(u, v))


def cross(u, v) -> np.ndarray:
    return np.cross(as_vec(u, 3), as_vec(v, 3))


def norm(v) -> float:
    return float(np.linalg.norm(v))


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ZeroNormalError("cannot normalize a zero vector")
    return v / n


def normalize_plane(p) -> np.ndarray:
    """Scale a plane so its normal ``(a, b, c)`` has unit length."""
    p = as_vec(p)
    n = np.linalg.norm(p[:3])
    if n == 0.0:
        raise ZeroNormalError("plane normal is zero")
    return p / n


def homogenize(v) -> np.ndarray:
    return np.append(as_vec(v, 3), 1.0)


def is_at_infinity(p, rtol: float = 1e-12) -> bool:
    p = np.asarray(p, dtype=np.float64)
    return abs(p[3]) <= rtol * np.abs(p[:3]).max(initial=0.0)


def dehomogenize(p, rtol: float = 1e-12) -> np.ndarray:
    p = as_vec(p)
    if is_at_infinity(p, rtol):
        raise PointAtInfinityError(f"point {p.tolist()} is at infinity")
    return p[:3] / p[3]


def plane_through_points(a, b, c) -> np.ndarray:
    a, b, c = (as_vec(x, 3) for x in (a, b, c))
    n = np.cross(b - a, c - a)
    if not np.any(n):
        raise ZeroNormalError("points are collinear")
    return np.append(n, -np.dot(n, a))


def intersect_planes(p, q, r) -> np.ndarray:
    """Finite point shared by three planes."""
    planes = np.array([as_vec(p), as_vec(q), as_vec(r)])
    return solve3(planes[:, :3], -planes[:, 3])
