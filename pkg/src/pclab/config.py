"""Run configuration: a JSON document describing a map, a family and run settings."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attractor import CERT_SLACK, ORBIT_TOL, default_schedule
from .errors import ConfigurationError, PCLabError
from .families import FamilySpec, contracted_rotation
from .geometry import Polytope
from .ifs import AffineContraction
from .pwc import DEFAULT_ETA, HyperplanePC, IntervalPC, PiecewiseContraction

DEFAULTS = {
    "family": "rotation",
    "lambda": 0.5,
    "b": 0.8,
    "space": None,
    "branches": None,
    "breakpoints": None,
    "sides": None,
    "normals": None,
    "offsets": None,
    "weight": None,
    "include_boundary": True,
    "x0": None,
    "parameters": {"lo": None, "hi": None, "sampler": "uniform", "count": 100},
    "tolerances": {"eta": DEFAULT_ETA, "slack": CERT_SLACK, "orbit": ORBIT_TOL, "connection": 1e-9},
    "schedule": default_schedule(),
    "cap": 1000000,
    "seed": 0,
    "workers": 1,
    "probe": {"mu_star": None, "delta": 0.01, "eps": [0.1, 0.05, 0.01], "samples": 1000,
              "depths": [1, 4, 8], "n_max": 20, "deltas": [0.1, 0.01, 0.001], "depth": 8},
    "hoffman": {"A": None},
    "steps": 20,
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigurationError(f"{where}: unknown field")
        if isinstance(base[key], dict) and value is not None:
            if not isinstance(value, dict):
                raise ConfigurationError(f"{where}: expected an object")
            out[key] = _merge(base[key], value, where + ".")
        else:
            out[key] = value
    return out


def _array(raw: dict, key: str, ndim: int | None = None) -> np.ndarray:
    value = raw.get(key)
    if value is None:
        raise ConfigurationError(f"{key}: required for family {raw['family']!r}")
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: expected numbers") from None
    if ndim is not None and arr.ndim != ndim:
        raise ConfigurationError(f"{key}: expected a {ndim}-dimensional array")
    return arr


@dataclass
class RunConfig:
    raw: dict

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("config: expected a JSON object")
        cfg = cls(_merge(DEFAULTS, data))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls.from_dict({})
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def family_kind(self) -> str:
        return self.raw["family"]

    @property
    def tol(self) -> dict:
        return self.raw["tolerances"]

    def validate(self):
        kind = self.raw["family"]
        if kind not in ("interval", "hyperplane", "rotation"):
            raise ConfigurationError(f"family: expected interval, hyperplane or rotation, got {kind!r}")
        for key in ("eta", "slack", "orbit", "connection"):
            v = self.tol[key]
            if not isinstance(v, (int, float)) or v < 0:
                raise ConfigurationError(f"tolerances.{key}: expected a nonnegative number")
        sched = self.raw["schedule"]
        if not isinstance(sched, list) or not sched or any(not isinstance(n, int) or n < 1 for n in sched):
            raise ConfigurationError("schedule: expected a nonempty list of positive integers")
        for key in ("seed", "workers", "cap", "steps"):
            if not isinstance(self.raw[key], int) or self.raw[key] < 0:
                raise ConfigurationError(f"{key}: expected a nonnegative integer")
        try:
            self.family()
            if self._has_partition():
                self.pc()
        except ConfigurationError as exc:
            raise ConfigurationError(f"{self._field_hint()}: {exc}") from None
        except PCLabError as exc:
            raise ConfigurationError(f"{self._field_hint()}: {exc}") from None

    def _field_hint(self) -> str:
        return {"interval": "branches/breakpoints", "hyperplane": "space/branches/normals/offsets",
                "rotation": "lambda/b"}[self.family_kind]

    def _has_partition(self) -> bool:
        kind = self.family_kind
        if kind == "rotation":
            return self.raw["b"] is not None
        if kind == "interval":
            return self.raw["breakpoints"] is not None
        return self.raw["offsets"] is not None

    def _space(self) -> Polytope:
        sp = self.raw["space"]
        if sp is None:
            raise ConfigurationError("space: required for family 'hyperplane'")
        if "box" in sp:
            lo, hi = sp["box"]
            return Polytope.box(lo, hi)
        if "A" in sp and "b" in sp:
            return Polytope(np.asarray(sp["A"], dtype=float), np.asarray(sp["b"], dtype=float))
        raise ConfigurationError("space: expected {'box': [lo, hi]} or {'A': ..., 'b': ...}")

    def _interval_branches(self):
        br = self.raw["branches"]
        if not isinstance(br, list) or not br:
            raise ConfigurationError("branches: expected a nonempty list")
        try:
            return [float(b["slope"]) for b in br], [float(b["offset"]) for b in br]
        except (KeyError, TypeError):
            raise ConfigurationError("branches[*]: each entry needs 'slope' and 'offset'") from None

    def _hyperplane_branches(self, dim: int) -> dict:
        br = self.raw["branches"]
        if not isinstance(br, list) or not br:
            raise ConfigurationError("branches: expected a nonempty list")
        weight = self.raw["weight"]
        out = {}
        for k, b in enumerate(br):
            try:
                label = tuple(int(s) for s in b["label"])
                out[label] = AffineContraction(np.asarray(b["Lambda"], dtype=float).reshape(dim, dim),
                                               np.asarray(b["b"], dtype=float), weight=weight)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigurationError(f"branches[{k}]: {exc}") from None
        return out

    def family(self) -> FamilySpec:
        kind, eta = self.family_kind, float(self.tol["eta"])
        par = self.raw["parameters"]
        if kind == "rotation":
            lo = None if par["lo"] is None else float(np.ravel(par["lo"])[0])
            hi = None if par["hi"] is None else float(np.ravel(par["hi"])[0])
            return FamilySpec.rotation(float(self.raw["lambda"]), lo, hi, eta)
        if kind == "interval":
            s, c = self._interval_branches()
            return FamilySpec.interval(s, c, par["lo"], par["hi"], eta)
        X = self._space()
        normals = _array(self.raw, "normals", 2)
        if par["lo"] is None or par["hi"] is None:
            raise ConfigurationError("parameters.lo/hi: required for family 'hyperplane'")
        return FamilySpec.hyperplane(X, normals, self._hyperplane_branches(X.dim), par["lo"], par["hi"],
                                     eta, bool(self.raw["include_boundary"]))

    def pc(self) -> PiecewiseContraction:
        """The single map described by the config (fixed breakpoints or offsets)."""
        kind, eta = self.family_kind, float(self.tol["eta"])
        if kind == "rotation":
            return contracted_rotation(float(self.raw["lambda"]), float(self.raw["b"]), eta)
        if kind == "interval":
            s, c = self._interval_branches()
            bps = self.raw["breakpoints"]
            if bps is None:
                raise ConfigurationError("breakpoints: required for a single interval map")
            return IntervalPC(s, c, bps, eta, self.raw["sides"],
                              include_boundary=bool(self.raw["include_boundary"]))
        X = self._space()
        return HyperplanePC(X, _array(self.raw, "normals", 2), _array(self.raw, "offsets", 1),
                            self._hyperplane_branches(X.dim), eta,
                            bool(self.raw["include_boundary"]), self.raw["weight"])

    def x0(self, f: PiecewiseContraction):
        return None if self.raw["x0"] is None else np.atleast_1d(np.asarray(self.raw["x0"], dtype=float))
