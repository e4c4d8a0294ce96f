"""Standard camera matrices in the row-vector convention.

The camera sits at the origin of view space and looks down ``-z``.
"""
from __future__ import annotations

import numpy as np

from .linalg import as_vec, normalize

DEPTH_RANGES = ("zero_one", "minus_one_one")


def perspective(left, right, bottom, top, near, far, depth_range: str = "zero_one") -> np.ndarray:
    """Off-axis perspective matrix for a near window ``[left, right] x [bottom, top]``.

    ``depth_range="minus_one_one"`` gives the classic OpenGL matrix (transposed
    for row vectors); ``"zero_one"`` maps the near plane to z = 0 and the far
    plane to z = 1, which is the convention used everywhere else here.
    """
    if not (right != left and top != bottom and far != near):
        raise ValueError("degenerate perspective window")
    if near <= 0 or far <= near:
        raise ValueError("need 0 < near < far")
    m = np.zeros((4, 4))
    m[0, 0] = 2 * near / (right - left)
    m[1, 1] = 2 * near / (top - bottom)
    m[2, 0] = (right + left) / (right - left)
    m[2, 1] = (top + bottom) / (top - bottom)
    m[2, 3] = -1.0
    if depth_range == "minus_one_one":
        m[2, 2] = -(far + near) / (far - near)
        m[3, 2] = -2 * far * near / (far - near)
    elif depth_range == "zero_one":
        m[2, 2] = -far / (far - near)
        m[3, 2] = -far * near / (far - near)
    else:
        raise ValueError(f"depth_range must be one of {DEPTH_RANGES}")
    return m


def orthographic(left, right, bottom, top, near, far) -> np.ndarray:
    """Orthographic matrix with z in [0, 1]."""
    if not (right != left and top != bottom and far != near):
        raise ValueError("degenerate orthographic box")
    m = np.zeros((4, 4))
    m[0, 0] = 2 / (right - left)
    m[1, 1] = 2 / (top - bottom)
    m[2, 2] = -1 / (far - near)
    m[3, 0] = -(right + left) / (right - left)
    m[3, 1] = -(top + bottom) / (top - bottom)
    m[3, 2] = -near / (far - near)
    m[3, 3] = 1.0
    return m


def look_at(eye, target, up=(0.0, 1.0, 0.0)) -> np.ndarray:
    """World-to-view matrix placing the camera at ``eye`` facing ``target``."""
    eye = as_vec(eye, 3)
    back = normalize(eye - as_vec(target, 3))
    right = normalize(np.cross(as_vec(up, 3), back))
    upv = np.cross(back, right)
    m = np.identity(4)
    m[:3, 0] = right
    m[:3, 1] = upv
    m[:3, 2] = back
    m[3, :3] = -eye @ m[:3, :3]
    return m


def translation(offset) -> np.ndarray:
    m = np.identity(4)
    m[3, :3] = as_vec(offset, 3)
    return m
