"""Scene files (JSON input) and result files (JSON output) for the command line."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCENE_VERSION = 1
SCENE_KEYS = ("version", "matrices", "planes", "points", "specs")

# required and optional fields per spec record type
SPEC_FIELDS = {
    "crop": ({"x_offset", "y_offset", "block_width", "block_height", "width", "height"}, set()),
    "lens": ({"center", "radius", "power", "plane"}, set()),
    "rect": ({"p1", "a1", "a2", "observer", "far_dist"}, set()),
    "sides": ({"left", "right", "top", "bottom", "near"}, set()),
    "origin": ({"targets", "anchors"}, {"step0", "max_iter", "grad_tol"}),
    "grid": ({"corner", "u", "v"}, set()),
}


class SceneError(ValueError):
    """Malformed scene file or unresolved name."""


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _numbers(value, sizes: tuple[int, ...], where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) not in sizes:
        want = " or ".join(str(s) for s in sizes)
        raise SceneError(f"{where}: expected a list of {want} numbers")
    for i, x in enumerate(value):
        if not _is_number(x):
            raise SceneError(f"{where}[{i}]: not a finite number: {x!r}")
    return np.array(value, dtype=np.float64)


@dataclass
class Scene:
    version: int
    matrices: dict[str, np.ndarray] = field(default_factory=dict)
    planes: dict[str, np.ndarray] = field(default_factory=dict)
    points: dict[str, np.ndarray] = field(default_factory=dict)
    specs: dict[str, dict] = field(default_factory=dict)

    def _get(self, table: dict, kind: str, name: str):
        try:
            return table[name]
        except KeyError:
            known = ", ".join(sorted(table)) or "none"
            raise SceneError(f"unknown {kind} {name!r} (known: {known})") from None

    def matrix(self, name: str) -> np.ndarray:
        return self._get(self.matrices, "matrix", name).reshape(4, 4)

    def plane(self, ref) -> np.ndarray:
        if isinstance(ref, str):
            return self._get(self.planes, "plane", ref)
        return _numbers(ref, (4,), "inline plane")

    def point(self, ref) -> np.ndarray:
        if isinstance(ref, str):
            return self._get(self.points, "point", ref)
        return _numbers(ref, (3, 4), "inline point")

    def point3(self, ref) -> np.ndarray:
        p = self.point(ref)
        if p.shape == (4,):
            if p[3] == 0:
                raise SceneError(f"point {ref!r} is at infinity")
            p = p[:3] / p[3]
        return p

    def spec(self, name: str, kind: str) -> dict:
        s = self._get(self.specs, "spec", name)
        if s["type"] != kind:
            raise SceneError(f"spec {name!r} has type {s['type']!r}, expected {kind!r}")
        return s


def parse_scene(data) -> Scene:
    if not isinstance(data, dict):
        raise SceneError("scene must be a JSON object")
    unknown = set(data) - set(SCENE_KEYS)
    if unknown:
        raise SceneError(f"unknown top-level field(s): {', '.join(sorted(unknown))}")
    if "version" not in data:
        raise SceneError("missing required field 'version'")
    if data["version"] != SCENE_VERSION or isinstance(data["version"], bool):
        raise SceneError(f"version: unsupported value {data['version']!r} (expected {SCENE_VERSION})")
    scene = Scene(version=SCENE_VERSION)
    for key, sizes, table in (
        ("matrices", (16,), scene.matrices),
        ("planes", (4,), scene.planes),
        ("points", (3, 4), scene.points),
    ):
        section = data.get(key, {})
        if not isinstance(section, dict):
            raise SceneError(f"{key}: expected an object")
        for name, value in section.items():
            table[name] = _numbers(value, sizes, f"{key}.{name}")
    specs = data.get("specs", {})
    if not isinstance(specs, dict):
        raise SceneError("specs: expected an object")
    for name, record in specs.items():
        scene.specs[name] = _check_spec(record, f"specs.{name}")
    return scene


def _check_spec(record, where: str) -> dict:
    if not isinstance(record, dict) or "type" not in record:
        raise SceneError(f"{where}: expected an object with a 'type' field")
    kind = record["type"]
    if kind not in SPEC_FIELDS:
        raise SceneError(f"{where}.type: unknown spec type {kind!r}")
    required, optional = SPEC_FIELDS[kind]
    present = set(record) - {"type"}
    if present - required - optional:
        raise SceneError(f"{where}: unknown field(s) {', '.join(sorted(present - required - optional))}")
    if required - present:
        raise SceneError(f"{where}: missing field(s) {', '.join(sorted(required - present))}")
    for key, value in record.items():
        if isinstance(value, (int, float)) and not isinstance(value, bool) and not math.isfinite(value):
            raise SceneError(f"{where}.{key}: not finite")
    return dict(record)


def load_scene(path: str) -> Scene:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return parse_scene(data)
    except SceneError as exc:
        raise SceneError(f"{path}: {exc}") from None


def _plain(value):
    if isinstance(value, np.ndarray):
        return [float(x) for x in value.ravel()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class Result:
    """Accumulates tagged outputs and serializes them deterministically."""

    def __init__(self, command: str, args: dict):
        self.command = {"name": command, "args": args}
        self.outputs: dict[str, dict] = {}
        self.diagnostics: dict[str, object] = {}
        self.validation: dict[str, dict] = {}

    def add(self, name: str, op: str, kind: str, **values):
        if name in self.outputs:
            raise KeyError(f"duplicate output {name!r}")
        self.outputs[name] = {"op": op, "kind": kind, **values}

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "outputs": self.outputs,
            "diagnostics": self.diagnostics,
            "validation": self.validation,
        }
        return json.dumps(_plain(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"
