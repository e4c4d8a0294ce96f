import warnings

import numpy as np
import pytest

from corpus import CORPUS, random_perspective
from frustum_kit.build import (
    ExplicitKn,
    MaximizeVolume,
    OriginProblem,
    SidePlanes,
    ThroughPoint,
    approximate_origin,
    build_frustum,
    build_frustum_detailed,
    camera_position,
    kn_perpendicular,
    kn_through_point,
    origin_objective,
    solve_side_coefficients,
)
from frustum_kit.errors import (
    DegenerateFarPointError,
    DegenerateInitError,
    DegenerateNormalError,
    FrustumWarning,
    NoConvergenceError,
    NotConcurrentError,
    SingularProjectionError,
    SingularSystemError,
)
from frustum_kit.extract import AffineFrustum, extract_planes, key_points
from frustum_kit.linalg import normalize, normalize_plane
from frustum_kit.projection import perspective
from frustum_kit.validate import validate
from test_acceptance import consistent_origin_problem, ratio_deviation

BOX = SidePlanes([1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 0, -1], [0, 1, 0, 1])


def gl_frustum():
    return AffineFrustum.from_proj(perspective(-1, 1, -1, 1, 1, 10, "minus_one_one"))


def sides_of(f):
    p = extract_planes(f)
    return SidePlanes(p.left, p.right, p.top, p.bottom), p


def test_camera_position_examples():
    sides, _ = sides_of(gl_frustum())
    cam = camera_position(sides)
    assert np.abs(cam / cam[3] - [0, 0, 0, 1]).max() < 1e-12

    cam = camera_position(BOX)
    assert abs(cam[3]) < 1e-15
    assert np.allclose(cam / cam[2], [0, 0, 1, 0])

    bent = SidePlanes(sides.left + [0, 0, 0, 0.1], sides.right, sides.top, sides.bottom)
    with pytest.raises(NotConcurrentError):
        camera_position(bent)


def test_camera_position_on_corpus():
    for _, f in CORPUS:
        sides, _ = sides_of(f)
        cam = camera_position(sides)
        for plane in sides.as_matrix():
            assert abs(np.dot(normalize_plane(plane), cam / np.linalg.norm(cam))) < 1e-7


def test_side_coefficients_examples():
    k = solve_side_coefficients(BOX)
    assert np.allclose([k.kl, k.kr, k.kt, k.kb], 1.0, atol=1e-12)

    scaled = SidePlanes(2 * BOX.left, 3 * BOX.right, 5 * BOX.top, 7 * BOX.bottom)
    k = solve_side_coefficients(scaled)
    assert np.allclose([k.kl, k.kr, k.kt, k.kb], [1, 2 / 3, 2 / 5, 2 / 7], atol=1e-12)

    flat = SidePlanes([1, 0, 0, 1], [1, 0, 0, -1], [1, 0, 0, -2], [1, 0, 0, 2])
    with pytest.raises(SingularSystemError):
        solve_side_coefficients(flat)


def test_side_coefficients_satisfy_constraint():
    rng = np.random.default_rng(12)
    for _, f in CORPUS:
        sides, _ = sides_of(f)
        s = SidePlanes(*(p * rng.uniform(0.3, 4.0) for p in sides.as_matrix()))
        k = solve_side_coefficients(s)
        lhs = k.kl * s.left - k.kr * s.right
        rhs = k.kb * s.bottom - k.kt * s.top
        assert np.abs(lhs - rhs).max() < 1e-8 * np.abs(lhs).max()


def test_coefficient_covariance():
    f = gl_frustum()
    sides, p = sides_of(f)
    base = solve_side_coefficients(sides)
    scaled = SidePlanes(sides.left, sides.right * 4.0, sides.top, sides.bottom * 0.5)
    k = solve_side_coefficients(scaled)
    assert np.isclose(k.kr, base.kr / 4.0) and np.isclose(k.kb, base.kb / 0.5)
    q = ThroughPoint(key_points(f).corners[6])
    assert ratio_deviation(build_frustum(scaled, p.near, q).proj, build_frustum(sides, p.near, q).proj) < 1e-12


def test_kn_through_point_examples():
    assert np.isclose(kn_through_point([0, 0, 0, 1], [0, 0, 1, 0], [0, 0, 10, 1]), 0.1)
    with pytest.raises(DegenerateFarPointError):
        kn_through_point([0, 0, 0, 1], [0, 0, 1, 0], [1, 2, 0, 1])
    rng = np.random.default_rng(13)
    for _ in range(50):
        m3, n, q = rng.normal(size=(3, 4))
        kn = kn_through_point(m3, n, q)
        far = kn * n - m3
        assert abs(np.dot(far, q)) < 1e-9 * np.linalg.norm(far) * np.linalg.norm(q)


def test_kn_perpendicular_examples():
    assert np.isclose(kn_perpendicular([0, 0, 2, 5], [0, 0, 1, 0]), 2.0)
    assert np.isclose(kn_perpendicular([0, 0, -2, 5], [0, 0, 1, 0]), -2.0)
    assert kn_perpendicular([1, 0, 0, 5], [0, 0, 1, 3]) == 0.0
    rng = np.random.default_rng(14)
    for _ in range(50):
        m3, n = rng.normal(size=(2, 4))
        far = kn_perpendicular(m3, n) * n - m3
        assert abs(np.dot(far[:3], n[:3])) < 1e-9


def test_maximize_volume_symmetric_exits_at_seed():
    sides, p = sides_of(gl_frustum())
    res = build_frustum_detailed(sides, p.near, MaximizeVolume())
    assert res.search.iterations == 0
    assert res.search.kn == res.search.seed
    assert res.report.valid


def test_maximize_volume_skewed_near():
    sides, _ = sides_of(gl_frustum())
    tilt = normalize([0.5, 0.2, 1.0])
    near = np.append(tilt, -np.dot(tilt, [0, 0, -2]))
    res = build_frustum_detailed(sides, near, MaximizeVolume())
    assert res.search.iterations > 0
    assert res.search.kn > res.search.seed
    assert res.report.valid


def test_maximize_volume_iteration_cap():
    sides, _ = sides_of(gl_frustum())
    tilt = normalize([0.5, 0.2, 1.0])
    near = np.append(tilt, -np.dot(tilt, [0, 0, -2]))
    with pytest.raises(NoConvergenceError):
        build_frustum_detailed(sides, near, MaximizeVolume(max_iter=0))


def test_maximize_volume_orthographic():
    res = build_frustum_detailed(BOX, [0, 0, 1, 0], MaximizeVolume())
    assert res.report.valid
    assert abs(res.camera[3]) < 1e-15


def test_build_round_trip_gl():
    f = gl_frustum()
    sides, p = sides_of(f)
    rebuilt = build_frustum(sides, p.near, ThroughPoint(key_points(f).corners[6]))
    assert ratio_deviation(rebuilt.proj, f.proj) < 1e-7
    assert rebuilt.pair_error < 1e-8


def test_build_orthographic_box():
    res = build_frustum_detailed(BOX, [0, 0, 1, 0], ThroughPoint([0, 0, 5]))
    m3 = res.frustum.proj[:, 3]
    assert np.allclose(m3 / m3[3], [0, 0, 0, 1], atol=1e-15)
    assert not key_points(res.frustum).camera_is_finite
    assert res.report.valid


def test_build_inconsistent_sides():
    sides, p = sides_of(gl_frustum())
    bent = SidePlanes(sides.left + [0, 0, 0, 0.1], sides.right, sides.top, sides.bottom)
    with pytest.raises(NotConcurrentError):
        build_frustum(bent, p.near, ExplicitKn(1.0))


def test_build_singular_projection():
    sides, p = sides_of(gl_frustum())
    with pytest.raises(SingularProjectionError):
        build_frustum(sides, p.near, ExplicitKn(0.0))


def test_through_point_warns_on_degenerate_result():
    sides, _ = sides_of(gl_frustum())
    tilt = normalize([0.2, 0.0, 1.0])
    near = np.append(tilt, -np.dot(tilt, [0.0, 0.0, -1.0]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert validate(build_frustum(sides, near, ThroughPoint([0, 0, -3.0]))).valid
    with pytest.warns(FrustumWarning):
        f = build_frustum(sides, near, ThroughPoint([0, 0, -30.0]))
    assert not validate(f).separates


def test_origin_gradient_matches_finite_differences():
    rng = np.random.default_rng(15)
    problem, truth = consistent_origin_problem(random_perspective(rng))
    for _ in range(10):
        o = truth + rng.normal(size=3)
        _, g = origin_objective(o, problem.targets, problem.anchors)
        h = 1e-6
        fd = [
            (origin_objective(o + h * e, problem.targets, problem.anchors)[0]
             - origin_objective(o - h * e, problem.targets, problem.anchors)[0]) / (2 * h)
            for e in np.identity(3)
        ]
        assert np.linalg.norm(fd - g) < 1e-4 * np.linalg.norm(g)


def test_origin_stationary_start():
    problem, truth = consistent_origin_problem(gl_frustum())
    res = approximate_origin(problem)
    assert res.iterations == 0 and res.converged
    assert np.abs(res.origin - truth).max() < 1e-12
    assert abs(res.value - 4.0) < 1e-12


def test_origin_ascent_from_displaced_start():
    rng = np.random.default_rng(16)
    f = random_perspective(rng)
    problem, truth = consistent_origin_problem(f)
    start = truth + [0.1, -0.05, 0.08]
    res = approximate_origin(OriginProblem(problem.targets, problem.anchors, max_iter=5000), initial=start)
    assert np.all(np.diff(res.history) >= 0)
    assert res.value >= origin_objective(start, problem.targets, problem.anchors)[0]
    assert np.linalg.norm(res.origin - truth) < 1e-4


def test_origin_inconsistent_targets_still_ascend():
    rng = np.random.default_rng(17)
    problem, _ = consistent_origin_problem(random_perspective(rng))
    targets = problem.targets + 0.05 * rng.normal(size=(4, 4))
    res = approximate_origin(OriginProblem(targets, problem.anchors, max_iter=200))
    assert np.all(np.diff(res.history) >= 0)
    assert res.value <= 4.0 + 1e-12


def test_origin_errors():
    anchors = np.array([[1, 1, -1], [-1, 1, -1], [-1, -1, -1], [1, -1, -1]], dtype=float)
    parallel = np.array([[1, 0, 0, 0], [1, 0, 0, 1], [1, 0, 0, 2], [0, 1, 0, 0]], dtype=float)
    with pytest.raises(DegenerateInitError):
        approximate_origin(OriginProblem(parallel, anchors))
    problem, _ = consistent_origin_problem(gl_frustum())
    with pytest.raises(DegenerateNormalError):
        origin_objective(0.5 * (anchors[0] + anchors[1]), problem.targets, anchors)
    with pytest.raises(ValueError):
        OriginProblem(problem.targets, [anchors[0], anchors[0], anchors[2], anchors[3]])
    with pytest.raises(ValueError):
        OriginProblem([[0, 0, 0, 1]] * 4, anchors)
