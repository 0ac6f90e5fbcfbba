"""JSON scenario files: generators, subspaces, a sampling set and tasks.

Shift-invariant scenarios (``"mode": "sis"``, the default)::

    {
      "version": "fsis-scenario/1",
      "dimension": 1,
      "grid": 512,
      "tolerances": {"close_eps": 1e-4},
      "generators": [
        {"name": "phi0", "pieces": [{"support": ["0", "1"], "expr": "1"}]}
      ],
      "subspaces": {"V": ["phi0"]},
      "sampling_set": ["phi0"],
      "tasks": [{"task": "dimension", "subspace": "V"}]
    }

Finite-dimensional scenarios (``"mode": "finite"``) declare
``"ambient_dim": N`` and give generators as ``{"name": ..., "vector": [...]}``
where entries are numbers or ``[re, im]`` pairs; only the ``analyze-union``
task applies to them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .config import DEFAULT_GRID, DEFAULT_TOLERANCES, Tolerances
from .dsl import DSLError, SampledFibers, parse_generator

__all__ = ["ScenarioError", "Scenario", "load_scenario", "parse_scenario",
           "bundled_scenarios", "resolve_scenario_path", "TASK_KINDS", "VERSION"]

VERSION = "fsis-scenario/1"
TASK_KINDS = ("analyze-union", "analyze-sis", "angle", "dimension", "spectrum-curve")
_SIS_ONLY = {"analyze-sis", "angle", "dimension", "spectrum-curve"}


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass
class Scenario:
    name: str
    mode: str
    n: int
    M: int
    tolerances: Tolerances
    generators: dict
    subspaces: dict[str, list[str]]
    sampling_set: list[str] | None
    tasks: list[dict]
    input_sha256: str = ""
    ambient_dim: int | None = None
    base_dir: Path | None = field(default=None, repr=False)

    def subspace(self, name: str) -> list:
        return [self.generators[g] for g in self.subspaces[name]]

    def sampling(self) -> list:
        return [self.generators[g] for g in (self.sampling_set or [])]


def _require(obj: dict, key: str, path: str, kind):
    if key not in obj:
        raise ScenarioError(path, f"missing field '{key}'")
    val = obj[key]
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ScenarioError(f"{path}.{key}" if path else key,
                            f"expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}")
    return val


def _vector(raw, path: str, N: int) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != N:
        raise ScenarioError(path, f"vector must be a list of {N} entries")
    out = np.zeros(N, dtype=complex)
    for i, x in enumerate(raw):
        if isinstance(x, (int, float)) and not isinstance(x, bool):
            out[i] = x
        elif (isinstance(x, list) and len(x) == 2
              and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
            out[i] = complex(x[0], x[1])
        else:
            raise ScenarioError(f"{path}[{i}]", "entry must be a number or [re, im]")
    return out


def _names(raw, path: str, known) -> list[str]:
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise ScenarioError(path, "expected a list of names")
    for i, x in enumerate(raw):
        if x not in known:
            raise ScenarioError(f"{path}[{i}]", f"unknown name {x!r}")
    return list(raw)


def _validate_task(i: int, task, sc: Scenario) -> dict:
    path = f"tasks[{i}]"
    if not isinstance(task, dict):
        raise ScenarioError(path, "task must be an object")
    kind = _require(task, "task", path, str)
    if kind not in TASK_KINDS:
        raise ScenarioError(f"{path}.task", f"unknown task {kind!r}; expected one of {TASK_KINDS}")
    if sc.mode == "finite" and kind in _SIS_ONLY:
        raise ScenarioError(f"{path}.task", f"task {kind!r} needs a shift-invariant scenario")

    def subspace_ref(key):
        val = _require(task, key, path, str)
        if val not in sc.subspaces:
            raise ScenarioError(f"{path}.{key}", f"unknown subspace {val!r}")

    if kind == "analyze-union":
        if "subspaces" in task:
            names = _names(task["subspaces"], f"{path}.subspaces", sc.subspaces)
            if not names:
                raise ScenarioError(f"{path}.subspaces", "a union needs at least one subspace")
        elif not sc.subspaces:
            raise ScenarioError(path, "scenario declares no subspaces")
    elif kind in ("analyze-sis", "dimension", "spectrum-curve"):
        subspace_ref("subspace")
    elif kind == "angle":
        subspace_ref("U")
        subspace_ref("V")
        if "ominus" in task:
            om = task["ominus"]
            if not isinstance(om, dict) or set(om) != {"U", "V"}:
                raise ScenarioError(f"{path}.ominus", "expected an object with keys 'U' and 'V'")
            _names(om["U"], f"{path}.ominus.U", sc.generators)
            _names(om["V"], f"{path}.ominus.V", sc.generators)
    if kind in ("analyze-union", "analyze-sis", "spectrum-curve") and sc.sampling_set is None:
        raise ScenarioError(path, f"task {kind!r} needs a 'sampling_set'")
    return dict(task)


def parse_scenario(data: dict, name: str = "scenario", base_dir: str | Path | None = None,
                   input_sha256: str = "") -> Scenario:
    """Validate a decoded scenario document. All names are resolved up front."""
    if not isinstance(data, dict):
        raise ScenarioError("", "scenario must be a JSON object")
    version = data.get("version", VERSION)
    if version != VERSION:
        raise ScenarioError("version", f"unsupported version {version!r}; expected {VERSION!r}")
    mode = data.get("mode", "sis")
    if mode not in ("sis", "finite"):
        raise ScenarioError("mode", f"expected 'sis' or 'finite', got {mode!r}")
    n = data.get("dimension", 1)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ScenarioError("dimension", "expected a positive integer")
    M = data.get("grid", DEFAULT_GRID.get(n, 16))
    if not isinstance(M, int) or isinstance(M, bool) or M < 1:
        raise ScenarioError("grid", "expected a positive integer")
    tol_raw = data.get("tolerances", {})
    if not isinstance(tol_raw, dict):
        raise ScenarioError("tolerances", "expected an object")
    unknown = set(tol_raw) - set(DEFAULT_TOLERANCES.as_dict())
    if unknown:
        raise ScenarioError("tolerances", f"unknown keys {sorted(unknown)}")
    try:
        tol = DEFAULT_TOLERANCES.updated(**tol_raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError("tolerances", str(exc)) from None

    gens_raw = _require(data, "generators", "", list)
    ambient = None
    generators: dict = {}
    if mode == "finite":
        ambient = _require(data, "ambient_dim", "", int)
        if ambient < 1:
            raise ScenarioError("ambient_dim", "expected a positive integer")
    for i, rec in enumerate(gens_raw):
        path = f"generators[{i}]"
        if not isinstance(rec, dict):
            raise ScenarioError(path, "generator must be an object")
        gname = rec.get("name")
        if not isinstance(gname, str):
            raise ScenarioError(f"{path}.name", "missing or non-string name")
        if gname in generators:
            raise ScenarioError(f"{path}.name", f"duplicate generator name {gname!r}")
        if mode == "finite":
            generators[gname] = _vector(rec.get("vector"), f"{path}.vector", ambient)
            continue
        try:
            g = parse_generator(rec, base_dir)
        except (DSLError, OSError) as exc:
            raise ScenarioError(path, str(exc)) from None
        if g.n != n:
            raise ScenarioError(path, f"generator is {g.n}-dimensional, scenario has dimension {n}")
        if isinstance(g.body, SampledFibers) and g.body.M != M:
            raise ScenarioError(path, f"sampled on M={g.body.M}, scenario grid is {M}")
        generators[gname] = g

    subs_raw = data.get("subspaces", {})
    if not isinstance(subs_raw, dict):
        raise ScenarioError("subspaces", "expected an object mapping names to generator lists")
    subspaces = {k: _names(v, f"subspaces.{k}", generators) for k, v in subs_raw.items()}
    sampling = None
    if "sampling_set" in data:
        sampling = _names(data["sampling_set"], "sampling_set", generators)
    tasks_raw = data.get("tasks", [])
    if not isinstance(tasks_raw, list):
        raise ScenarioError("tasks", "expected a list")
    sc = Scenario(name, mode, n, M, tol, generators, subspaces, sampling, [],
                  input_sha256, ambient, Path(base_dir) if base_dir else None)
    sc.tasks = [_validate_task(i, t, sc) for i, t in enumerate(tasks_raw)]
    return sc


def bundled_scenarios() -> list[str]:
    root = resources.files("fsis") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenario_path(spec: str | Path) -> Path:
    """A filesystem path, or the name of a bundled scenario (with or without ``.json``)."""
    p = Path(spec)
    if p.exists():
        return p
    name = p.name if p.name.endswith(".json") else p.name + ".json"
    if str(p.parent) in ("", ".") and name in bundled_scenarios():
        return Path(str(resources.files("fsis") / "scenarios" / name))
    raise FileNotFoundError(f"no scenario file or bundled scenario named {str(spec)!r}")


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file (or bundled scenario name)."""
    p = resolve_scenario_path(path)
    raw = p.read_bytes()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError("", f"invalid JSON: {exc}") from None
    return parse_scenario(data, p.stem, p.parent, hashlib.sha256(raw).hexdigest())
