"""Wireframe OBJ and grid SVG writers."""
from __future__ import annotations

import numpy as np

from .extract import CORNER_EDGES, AffineFrustum, key_points
from .linalg import is_at_infinity

GRID_COLORS = ("#1f77b4", "#d62728")


def frusta_obj(frusta) -> tuple[str, list[str]]:
    """OBJ text with 8 vertices and 12 line records per frustum.

    ``frusta`` is a sequence of ``(name, AffineFrustum)``.  Frusta with a
    corner at infinity are left out and reported in the returned list.
    """
    lines: list[str] = []
    skipped: list[str] = []
    base = 0
    for name, f in frusta:
        corners = key_points(f).corners
        if any(is_at_infinity(c) for c in corners):
            skipped.append(f"{name}: corner at infinity, not exported")
            continue
        for c in corners:
            x, y, z = c[:3] / c[3]
            lines.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
        for a, b in CORNER_EDGES:
            lines.append(f"l {base + a + 1} {base + b + 1}")
        base += 8
    return "".join(line + "\n" for line in lines), skipped


def _polylines(lattice: np.ndarray) -> list[np.ndarray]:
    rows, cols = lattice.shape[0] - 1, lattice.shape[1] - 1
    if rows <= 0 or cols <= 0:
        return []
    return [lattice[i] for i in range(rows + 1)] + [lattice[:, j] for j in range(cols + 1)]


def grid_svg(original, distorted, origin, u, v) -> str:
    """SVG 1.1 drawing of two grids projected onto the plane axes ``u``, ``v``.

    The original grid is drawn in blue, the distorted one in red; SVG's y axis
    points down, so ``v`` is flipped.
    """
    paths = []
    all_pts = []
    for lattice, color in zip((original, distorted), GRID_COLORS):
        lattice = np.asarray(lattice, dtype=np.float64)
        for line in _polylines(lattice):
            rel = line - origin
            pts = np.column_stack([rel @ u, -(rel @ v)])
            all_pts.append(pts)
            d = " ".join(
                f"{'M' if k == 0 else 'L'} {x:.6f} {y:.6f}" for k, (x, y) in enumerate(pts)
            )
            paths.append((d, color))

    if all_pts:
        pts = np.vstack(all_pts)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        size = np.maximum(hi - lo, 1e-9)
        lo = lo - 0.05 * size
        size = size * 1.1
    else:
        lo, size = np.zeros(2), np.ones(2)
    stroke = 0.002 * float(max(size))
    body = "\n".join(
        f'  <path d="{d}" fill="none" stroke="{color}" stroke-width="{stroke:.6f}"/>'
        for d, color in paths
    )
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{lo[0]:.6f} {lo[1]:.6f} {size[0]:.6f} {size[1]:.6f}">\n'
    )
    return head + (body + "\n" if body else "") + "</svg>\n"


def frustum_corners_finite(f: AffineFrustum) -> bool:
    return not any(is_at_infinity(c) for c in key_points(f).corners)
