"""Quick numerical self-checks used by ``frustum-kit self-check``."""
from __future__ import annotations

import numpy as np

from .build import MaximizeVolume, SidePlanes, ThroughPoint, build_frustum
from .export import frusta_obj
from .extract import CORNER_PLANES, AffineFrustum, extract_planes, key_points
from .linalg import dehomogenize, normalize_plane
from .projection import look_at, perspective
from .transform import CropSpec, crop, crop_dense, reflect, reflect_and_clip
from .validate import NonAffineFrustum, nonaffine_map, validate


def _ratio_error(a: np.ndarray, b: np.ndarray) -> float:
    s = np.vdot(a, b) / np.vdot(b, b)
    return float(np.abs(a - s * b).max() / np.abs(a).max())


def run_checks():
    f = AffineFrustum.from_proj(perspective(-1.0, 1.5, -0.7, 1.0, 1.0, 10.0)).with_view(
        look_at([1.0, 2.0, 3.0], [0.0, 0.5, -1.0])
    )
    planes = extract_planes(f).normalized().as_dict()
    kp = key_points(f)

    worst = max(
        abs(np.dot(planes[name], c / c[3])) for c, names in zip(kp.corners, CORNER_PLANES) for name in names
    )
    yield "corner incidence", worst < 1e-9, f"{worst:.2e}"

    p = extract_planes(f)
    sides = SidePlanes(p.left, p.right, p.top, p.bottom)
    rebuilt = build_frustum(sides, p.near, ThroughPoint(kp.corners[6]))
    err = _ratio_error(rebuilt.proj, f.proj)
    yield "build round trip", err < 1e-7, f"{err:.2e}"

    wide = build_frustum(sides, p.near, MaximizeVolume())
    yield "volume search result valid", validate(wide).valid, ""

    spec = CropSpec(10.0, 20.0, 30.0, 40.0, 100.0, 80.0)
    err = float(np.abs(crop(f, spec).proj - crop_dense(f, spec).proj).max())
    yield "crop sparse vs dense", err < 1e-10, f"{err:.2e}"

    mirror = normalize_plane([0.1, 0.2, 1.0, 0.5])
    twice = reflect(reflect(f, mirror), mirror)
    err = float(np.abs(twice.proj - f.proj).max())
    yield "reflect involution", err < 1e-12, f"{err:.2e}"

    cam = dehomogenize(kp.cam)
    ahead = dehomogenize(kp.center) - cam
    point = cam + 2.0 * ahead
    clip_plane = normalize_plane(np.append(-ahead, np.dot(ahead, point)))
    clipped = reflect_and_clip(f, clip_plane)
    err = clipped.pair_error
    yield "reflect and clip pair", err < 1e-8 and validate(clipped).valid, f"{err:.2e}"

    nf = NonAffineFrustum.from_affine(f)
    mapped = np.array([nonaffine_map(nf, c[:3] / c[3]) for c in kp.corners])
    err = float(np.abs(mapped - np.round(mapped)).max())
    yield "signed-distance corner map", err < 1e-9, f"{err:.2e}"

    text, _ = frusta_obj([("f", f)])
    kinds = [line.split()[0] for line in text.splitlines()]
    yield "obj export", kinds.count("v") == 8 and kinds.count("l") == 12, ""
