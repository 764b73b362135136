"""Strict JSON experiment configuration.

Unknown keys are rejected.  Error messages carry the line of the offending
key in the source text when it can be located.
"""

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import domain_from_dict
from .jet_recovery.recover import RecoverySettings
from .potential import potential_from_dict

SECTIONS = {
    "simulate": {"x": None, "y": None, "s_end": 3.0, "n_samples": 201},
    "measure": {"launches": None, "n_random": 16},
    "su": {"n_cases": 96},
    "sample_r": {"ts": [0.01, 0.02, 0.04, 0.08], "stage": "data"},
    "gradient": {"n_points": 0, "span": 0.5},
    "reconstruct": {"grid_n": 50, "validity_radius": None},
    "lemmas": {"checks": [[1, 0], [1, 1], [2, 1], [2, 2]], "h": None},
    "noise": {"sigma": 0.0},
}

TOP = {"domain", "potential", "sigma", "ode_tol", "quad_tol", "jet_order", "seed", "point", "out_dir", "recovery"} | set(SECTIONS)


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return None if m is None else text.count("\n", 0, m.start()) + 1


def _fail(text, key, msg):
    line = _line_of(text, key)
    where = f"line {line}: " if line else ""
    raise ConfigError(f"{where}{msg}")


@dataclass
class ExperimentConfig:
    domain_spec: dict
    potential_spec: dict
    sigma: float = 0.1
    ode_tol: float = 1e-12
    quad_tol: float = 1e-10
    jet_order: int = 2
    seed: int = 0
    point: list = None
    out_dir: str = "out"
    recovery: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)

    @property
    def domain(self):
        return domain_from_dict(self.domain_spec)

    @property
    def potential(self):
        return potential_from_dict(self.potential_spec)

    @property
    def settings(self):
        return RecoverySettings.from_dict(self.recovery)

    def boundary_point(self, domain=None):
        """Configured point, or the lowest point of the boundary."""
        D = domain or self.domain
        if self.point is not None:
            return D.nearest_boundary_point(np.asarray(self.point, dtype=float))
        return D.gamma(-0.5 * math.pi)

    def section(self, name):
        return self.sections[name]


def _number(text, key, v, lo=-math.inf, hi=math.inf, lo_open=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(text, key, f"{key!r} must be a number, got {v!r}")
    if not (lo < v if lo_open else lo <= v) or not v <= hi:
        _fail(text, key, f"{key!r}={v!r} outside the allowed range")
    return float(v)


def config_from_dict(d, text=None):
    if not isinstance(d, dict):
        raise ConfigError("line 1: top level must be a JSON object")
    for key in d:
        if key not in TOP:
            _fail(text, key, f"unknown key {key!r}")
    for key in ("domain", "potential"):
        if key not in d:
            raise ConfigError(f"line 1: missing required key {key!r}")
    try:
        domain_from_dict(d["domain"])
    except (KeyError, TypeError, ValueError) as e:
        _fail(text, "domain", f"bad domain: {e}")
    try:
        potential_from_dict(d["potential"])
    except (KeyError, TypeError, ValueError) as e:
        _fail(text, "potential", f"bad potential: {e}")
    kw = {"domain_spec": d["domain"], "potential_spec": d["potential"]}
    if "sigma" in d:
        kw["sigma"] = _number(text, "sigma", d["sigma"], 0.0, lo_open=True)
    if "ode_tol" in d:
        kw["ode_tol"] = _number(text, "ode_tol", d["ode_tol"], 1e-13, 1e-6)
    if "quad_tol" in d:
        kw["quad_tol"] = _number(text, "quad_tol", d["quad_tol"], 0.0, 1e-3, lo_open=True)
    if "jet_order" in d:
        if d["jet_order"] not in (1, 2, 3) or isinstance(d["jet_order"], bool):
            _fail(text, "jet_order", f"jet_order must be 1, 2 or 3, got {d['jet_order']!r}")
        kw["jet_order"] = int(d["jet_order"])
    if "seed" in d:
        if not isinstance(d["seed"], int) or isinstance(d["seed"], bool) or d["seed"] < 0:
            _fail(text, "seed", "seed must be a non-negative integer")
        kw["seed"] = d["seed"]
    if "point" in d:
        p = d["point"]
        if not (isinstance(p, list) and len(p) == 2 and all(isinstance(v, (int, float)) for v in p)):
            _fail(text, "point", "point must be a list of two numbers")
        kw["point"] = [float(v) for v in p]
    if "out_dir" in d:
        kw["out_dir"] = str(d["out_dir"])
    if "recovery" in d:
        try:
            RecoverySettings.from_dict(d["recovery"])
        except (KeyError, TypeError, ValueError) as e:
            _fail(text, "recovery", f"bad recovery settings: {e}")
        kw["recovery"] = dict(d["recovery"])
    sections = {}
    for name, defaults in SECTIONS.items():
        given = d.get(name, {})
        if not isinstance(given, dict):
            _fail(text, name, f"{name!r} must be an object")
        for key in given:
            if key not in defaults:
                _fail(text, key, f"unknown key {key!r} in {name!r}")
        sections[name] = {**defaults, **given}
    kw["sections"] = sections
    return ExperimentConfig(**kw)


def load_config(path):
    with open(path) as f:
        text = f.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}: invalid JSON ({e.msg})") from None
    return config_from_dict(d, text)


