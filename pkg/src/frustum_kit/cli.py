"""``frustum-kit`` command line front end.

Every command reads a JSON scene, runs one library operation and writes a JSON
result (stdout unless ``--out`` is given).  Exit codes: 0 success, 2 bad input
or usage, 3 geometric/numerical failure, 4 file system error.
"""
from __future__ import annotations

import argparse
import logging
import re
import sys

import numpy as np

from . import build, extract, transform, validate
from .errors import FrustumError
from .export import frusta_obj, grid_svg
from .linalg import is_at_infinity, normalize_plane
from .scene import Result, Scene, SceneError, load_scene

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_PARSE, EXIT_MATH, EXIT_IO = 0, 2, 3, 4


def _grid(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError(f"grid must look like ROWSxCOLS, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _point_entry(p: np.ndarray) -> dict:
    entry = {"homogeneous": p}
    entry["point"] = None if is_at_infinity(p) else p[:3] / p[3]
    return entry


def _add_frustum(res: Result, name: str, op: str, f: extract.AffineFrustum):
    res.add(name, op, "frustum", proj=f.proj, inv_proj=f.inv_proj)
    res.validation[name] = validate.validate(f).as_dict()


def _frustum(scene: Scene, name: str) -> extract.AffineFrustum:
    return extract.AffineFrustum.from_proj(scene.matrix(name))


def _lens_spec(scene: Scene, args) -> transform.LensSpec:
    s = scene.spec(args.lens, "lens")
    return transform.LensSpec(
        center=scene.point3(s["center"]),
        radius=args.radius if args.radius is not None else s["radius"],
        power=args.power if args.power is not None else s["power"],
        plane=scene.plane(s["plane"]),
    )


def _lattice(scene: Scene, args, spec: transform.LensSpec) -> np.ndarray:
    rows, cols = args.grid
    if args.grid_spec:
        g = scene.spec(args.grid_spec, "grid")
        return transform.uniform_lattice(
            scene.point3(g["corner"]), scene.point3(g["u"]), scene.point3(g["v"]), rows, cols
        )
    return transform.lens_lattice(spec, rows, cols)


# -- commands ------------------------------------------------------------------------


def cmd_extract(scene: Scene, args, res: Result):
    f = _frustum(scene, args.frustum)
    for name, plane in extract.extract_planes(f).as_dict().items():
        res.add(f"plane.{name}", "extract_planes", "plane", value=plane)
    div = extract.dividing_planes(f)
    for name in ("dx", "dy", "dz"):
        res.add(f"dividing.{name}", "dividing_planes", "plane", value=getattr(div, name))
    kp = extract.key_points(f)
    for i, c in enumerate(kp.corners):
        res.add(f"corner.C{i + 1}", "key_points", "point", **_point_entry(c))
    for name in ("center", "cam", "vanish_x", "vanish_y"):
        res.add(f"key.{name}", "key_points", "point", **_point_entry(getattr(kp, name)))
    res.validation[args.frustum] = validate.validate(f).as_dict()


def cmd_build(scene: Scene, args, res: Result):
    s = scene.spec(args.sides, "sides")
    sides = build.SidePlanes(*(scene.plane(s[k]) for k in ("left", "right", "top", "bottom")))
    if args.far_strategy == "point":
        if not args.q_point:
            raise SceneError("--far-strategy point needs --q-point")
        strategy = build.ThroughPoint(scene.point(args.q_point))
    elif args.far_strategy == "kn":
        if args.kn is None:
            raise SceneError("--far-strategy kn needs --kn")
        strategy = build.ExplicitKn(args.kn)
    else:
        strategy = build.MaximizeVolume(args.max_iter if args.max_iter is not None else 128)
    out = build.build_frustum_detailed(sides, scene.plane(s["near"]), strategy)
    _add_frustum(res, "frustum", "build_frustum", out.frustum)
    k = out.coefficients
    res.diagnostics.update(
        coefficients={"kl": k.kl, "kr": k.kr, "kt": k.kt, "kb": k.kb},
        kn=out.kn,
        camera=out.camera,
    )
    if out.search is not None:
        res.diagnostics.update(kn_seed=out.search.seed, iterations=out.search.iterations)


def cmd_crop(scene: Scene, args, res: Result):
    s = scene.spec(args.crop, "crop")
    spec = transform.CropSpec(**{k: v for k, v in s.items() if k != "type"})
    f = transform.crop(_frustum(scene, args.frustum), spec)
    _add_frustum(res, "frustum", "crop", f)


def cmd_reflect_plane(scene: Scene, args, res: Result):
    f = _frustum(scene, args.frustum)
    plane = normalize_plane(scene.plane(args.plane))
    if args.no_clip:
        out = transform.reflect(f, plane)
        _add_frustum(res, "frustum", "reflect", out)
    else:
        out = transform.reflect_and_clip(f, plane, args.q_select)
        _add_frustum(res, "frustum", "reflect_and_clip", out)
    res.diagnostics["pair_error"] = out.pair_error


def cmd_reflect_rect(scene: Scene, args, res: Result):
    s = scene.spec(args.rect, "rect")
    rect = transform.ReflectiveRect(
        scene.point3(s["p1"]), scene.point3(s["a1"]), scene.point3(s["a2"]),
        scene.point3(s["observer"]), s["far_dist"],
    )
    _add_frustum(res, "frustum", "reflect_rect", transform.reflect_rect(rect, args.depth_range))


def cmd_lens(scene: Scene, args, res: Result):
    spec = _lens_spec(scene, args)
    lattice = _lattice(scene, args, spec)
    warped = transform.lens_distort(lattice.reshape(-1, 3), spec)
    res.add("grid.original", "lens_distort", "points", value=lattice.reshape(-1, 3))
    res.add("grid.distorted", "lens_distort", "points", value=warped)
    if args.origin:
        tiles = transform.lens_tile_frustums(lattice, spec, scene.point3(args.origin), args.far_scale)
        errors = {}
        for t in tiles:
            name = f"tile.{t.row}.{t.col}"
            if t.frustum is None:
                errors[name] = t.error
            else:
                _add_frustum(res, name, "lens_tile_frustums", t.frustum)
        res.diagnostics["tile_errors"] = errors


def cmd_origin(scene: Scene, args, res: Result):
    s = scene.spec(args.problem, "origin")
    problem = build.OriginProblem(
        targets=[scene.plane(t) for t in s["targets"]],
        anchors=[scene.point3(a) for a in s["anchors"]],
        step0=args.step0 if args.step0 is not None else s.get("step0", 1.0),
        max_iter=args.max_iter if args.max_iter is not None else s.get("max_iter", 500),
        grad_tol=args.grad_tol if args.grad_tol is not None else s.get("grad_tol", 1e-8),
    )
    out = build.approximate_origin(problem)
    res.add("origin", "approximate_origin", "point", point=out.origin)
    res.diagnostics.update(
        objective=out.value, iterations=out.iterations, converged=out.converged, history=out.history
    )


def cmd_validate(scene: Scene, args, res: Result):
    for name in args.frustum:
        res.validation[name] = validate.validate(_frustum(scene, name)).as_dict()


def cmd_nonaffine_map(scene: Scene, args, res: Result):
    f = _frustum(scene, args.frustum)
    nf = validate.NonAffineFrustum.from_affine(f)
    res.validation[args.frustum] = validate.validate(f).as_dict()
    for name in args.point:
        c = validate.nonaffine_map(nf, scene.point3(name))
        value = validate.clip_to_ndc(c) if args.ndc else c
        res.add(f"clip.{name}", "nonaffine_map", "point", point=value)


def cmd_export_obj(scene: Scene, args, res: Result):
    frusta = [(name, _frustum(scene, name)) for name in args.frustum]
    text, skipped = frusta_obj(frusta)
    for msg in skipped:
        print(f"frustum-kit: {msg}", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_export_svg_grid(scene: Scene, args, res: Result):
    spec = _lens_spec(scene, args)
    lattice = _lattice(scene, args, spec)
    warped = transform.lens_distort(lattice.reshape(-1, 3), spec).reshape(lattice.shape)
    u, v = spec.basis()
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(grid_svg(lattice, warped, spec.center, u, v))


def cmd_self_check(scene, args, res: Result):
    from .selfcheck import run_checks

    failures = 0
    for name, ok, detail in run_checks():
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")
        failures += not ok
    res.diagnostics["failures"] = failures
    if failures:
        raise FrustumError(f"{failures} self-check(s) failed")


COMMANDS = {
    "extract": cmd_extract,
    "build": cmd_build,
    "crop": cmd_crop,
    "reflect-plane": cmd_reflect_plane,
    "reflect-rect": cmd_reflect_rect,
    "lens": cmd_lens,
    "origin": cmd_origin,
    "validate": cmd_validate,
    "nonaffine-map": cmd_nonaffine_map,
    "export-obj": cmd_export_obj,
    "export-svg-grid": cmd_export_svg_grid,
    "self-check": cmd_self_check,
}
FILE_OUTPUT = {"export-obj", "export-svg-grid"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frustum-kit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text, scene=True, out_required=False):
        p = sub.add_parser(name, help=help_text)
        if scene:
            p.add_argument("--scene", required=True, help="scene JSON file")
        p.add_argument("--out", required=out_required, help="output file")
        return p

    p = command("extract", "planes, dividing planes and key points")
    p.add_argument("--frustum", required=True)

    p = command("build", "projection matrix from side and near planes")
    p.add_argument("--sides", required=True, help="name of a 'sides' spec")
    p.add_argument("--far-strategy", choices=("point", "maxvol", "kn"), default="maxvol")
    p.add_argument("--q-point", help="point the far plane passes through")
    p.add_argument("--kn", type=float)
    p.add_argument("--max-iter", type=int)

    p = command("crop", "sub-frustum over a block of the near window")
    p.add_argument("--frustum", required=True)
    p.add_argument("--crop", required=True)

    p = command("reflect-plane", "mirror a frustum across a plane and clip at it")
    p.add_argument("--frustum", required=True)
    p.add_argument("--plane", required=True)
    p.add_argument("--no-clip", action="store_true")
    p.add_argument("--q-select", choices=("auto", "sign"), default="auto")

    p = command("reflect-rect", "frustum seen through a rectangular mirror")
    p.add_argument("--rect", required=True)
    p.add_argument("--depth-range", choices=("zero_one", "minus_one_one"), default="zero_one")

    for name, help_text in (
        ("lens", "distort a grid and build per-tile frusta"),
        ("export-svg-grid", "draw original and distorted grids as SVG"),
    ):
        p = command(name, help_text, out_required=name == "export-svg-grid")
        p.add_argument("--lens", required=True)
        p.add_argument("--grid", type=_grid, required=True, help="ROWSxCOLS")
        p.add_argument("--grid-spec", help="name of a 'grid' spec; default is a square of the lens radius")
        p.add_argument("--power", type=float)
        p.add_argument("--radius", type=float)
        if name == "lens":
            p.add_argument("--origin", help="point the tile frusta share as camera")
            p.add_argument("--far-scale", type=float, default=10.0)

    p = command("origin", "fit a camera position to four target side planes")
    p.add_argument("--problem", required=True)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--grad-tol", type=float)
    p.add_argument("--step0", type=float)

    p = command("validate", "validity report")
    p.add_argument("--frustum", action="append", required=True)

    p = command("nonaffine-map", "signed-distance clip coordinates of points")
    p.add_argument("--frustum", required=True)
    p.add_argument("--point", action="append", required=True)
    p.add_argument("--ndc", action="store_true", help="report x, y in [-1, 1]")

    p = command("export-obj", "wireframe OBJ of frusta", out_required=True)
    p.add_argument("--frustum", action="append", required=True)

    command("self-check", "run built-in numerical checks", scene=False)
    return parser


def _echo(args) -> dict:
    skip = {"command", "verbose", "out"}
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None:
            continue
        echo[key] = list(value) if isinstance(value, tuple) else value
    return echo


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    res = Result(args.command, _echo(args))
    try:
        scene = load_scene(args.scene) if getattr(args, "scene", None) else None
        COMMANDS[args.command](scene, args, res)
        if args.command not in FILE_OUTPUT:
            text = res.to_json()
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
            elif args.command != "self-check":
                sys.stdout.write(text)
    except SceneError as exc:
        print(f"frustum-kit: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FrustumError, ValueError) as exc:
        print(f"frustum-kit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH
    except OSError as exc:
        print(f"frustum-kit: file error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
