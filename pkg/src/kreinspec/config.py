"""Run configuration: one JSON document, validated into dataclasses.

Schema (all keys optional unless marked; defaults shown):

    {
      "potential": {...},            # required for solve/scan/bounds
      "method": "both",              # shooting | birman_schwinger | both
      "eps_floor": null,             # explicit floor for Im lambda
      "region": null,                # {re_min, re_max, im_min, im_max}
      "tolerances": {
        "match_rtol": 1e-11,         # ODE relative tolerance
        "match_atol": 1e-13,         # ODE absolute tolerance
        "newton": 1e-12,             # zero polish step tolerance
        "quadrature": 1e-10,         # adaptive integration budget
        "cross": 1e-6                # cross-route agreement, times (1+|lam|)
      },
      "grid": {"panel_order": 10, "density_factor": 2.0},
      "search": {
        "samples_per_edge": 17,
        "max_evaluations": 500000,
        "max_dilations": 3
      },
      "scan": null,                  # {re_min, re_max, im_min, im_max,
                                     #  density_re, density_im}
      "kernel": null,                # {lam: [re, im], x_min, x_max,
                                     #  y_min, y_max, density}
      "output": {"path": null, "format": "json"}
    }

The potential sub-document follows the shapes accepted by
``potentials.potential_from_config``: a ``kind`` tag (step_sum,
piecewise_polynomial, truncated_analytic) with piece or term arrays and
an optional ``scale`` multiplier.

Command-line overrides use dotted paths into this document, e.g.
``--set tolerances.newton=1e-10`` or ``--set method=shooting``; values
are parsed as JSON with a plain-string fallback.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any

_METHODS = ("shooting", "birman_schwinger", "both")
_FORMATS = ("json", "csv")


class ConfigError(ValueError):
    """Invalid configuration document or override."""


@dataclass(frozen=True)
class Tolerances:
    match_rtol: float = 1e-11
    match_atol: float = 1e-13
    newton: float = 1e-12
    quadrature: float = 1e-10
    cross: float = 1e-6


@dataclass(frozen=True)
class GridParams:
    panel_order: int = 10
    density_factor: float = 2.0


@dataclass(frozen=True)
class SearchParams:
    samples_per_edge: int = 17
    max_evaluations: int = 500000
    max_dilations: int = 3


@dataclass(frozen=True)
class ScanParams:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    density_re: int = 40
    density_im: int = 40


@dataclass(frozen=True)
class KernelParams:
    lam: complex
    x_min: float = -3.0
    x_max: float = 3.0
    y_min: float = -3.0
    y_max: float = 3.0
    density: int = 41


@dataclass(frozen=True)
class OutputParams:
    path: str | None = None
    format: str = "json"


@dataclass(frozen=True)
class RunConfig:
    potential: dict | None = None
    method: str = "both"
    eps_floor: float | None = None
    region: dict | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    grid: GridParams = field(default_factory=GridParams)
    search: SearchParams = field(default_factory=SearchParams)
    scan: ScanParams | None = None
    kernel: KernelParams | None = None
    output: OutputParams = field(default_factory=OutputParams)


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _build(cls, raw: dict, where: str):
    """Dataclass from a dict, rejecting unknown keys."""
    _expect(isinstance(raw, dict), f"{where} must be an object")
    fields = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(raw) - fields
    _expect(not unknown, f"unknown keys in {where}: {sorted(unknown)}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad {where}: {exc}") from None


def config_from_dict(doc: dict) -> RunConfig:
    _expect(isinstance(doc, dict), "config root must be an object")
    known = {"potential", "method", "eps_floor", "region", "tolerances",
             "grid", "search", "scan", "kernel", "output"}
    unknown = set(doc) - known
    _expect(not unknown, f"unknown top-level keys: {sorted(unknown)}")

    method = doc.get("method", "both")
    _expect(method in _METHODS, f"method must be one of {_METHODS}")

    tol = _build(Tolerances, doc.get("tolerances", {}), "tolerances")
    for name in ("match_rtol", "match_atol", "newton", "quadrature", "cross"):
        _expect(getattr(tol, name) > 0, f"tolerances.{name} must be positive")

    grid = _build(GridParams, doc.get("grid", {}), "grid")
    _expect(1 <= grid.panel_order <= 64, "grid.panel_order must lie in [1, 64]")
    _expect(grid.density_factor > 0, "grid.density_factor must be positive")

    search = _build(SearchParams, doc.get("search", {}), "search")
    _expect(search.samples_per_edge >= 5, "search.samples_per_edge must be >= 5")
    _expect(search.max_evaluations > 0, "search.max_evaluations must be positive")
    _expect(search.max_dilations >= 0, "search.max_dilations must be >= 0")

    eps_floor = doc.get("eps_floor")
    if eps_floor is not None:
        eps_floor = float(eps_floor)
        _expect(eps_floor > 0, "eps_floor must be positive")

    region = doc.get("region")
    if region is not None:
        _expect(isinstance(region, dict)
                and set(region) == {"re_min", "re_max", "im_min", "im_max"},
                "region needs exactly re_min/re_max/im_min/im_max")
        region = {k: float(v) for k, v in region.items()}
        _expect(region["re_min"] < region["re_max"]
                and 0 < region["im_min"] < region["im_max"],
                "region must be a nondegenerate rectangle in the upper half plane")

    scan = doc.get("scan")
    if scan is not None:
        scan = _build(ScanParams, scan, "scan")
        _expect(scan.density_re >= 2 and scan.density_im >= 2,
                "scan densities must be >= 2")
        _expect(scan.re_min < scan.re_max and scan.im_min < scan.im_max,
                "scan rectangle is degenerate")
        _expect(scan.im_min > 0,
                "scan rectangle must lie in the open upper half plane")

    kernel = doc.get("kernel")
    if kernel is not None:
        _expect(isinstance(kernel, dict), "kernel must be an object")
        k = dict(kernel)
        lam_raw = k.pop("lam", None)
        _expect(isinstance(lam_raw, (list, tuple)) and len(lam_raw) == 2,
                "kernel.lam must be [re, im]")
        lam = complex(float(lam_raw[0]), float(lam_raw[1]))
        _expect(lam.imag != 0, "kernel.lam must be non-real")
        kernel = _build(KernelParams, {"lam": lam, **k}, "kernel")
        _expect(kernel.density >= 2, "kernel.density must be >= 2")

    output = _build(OutputParams, doc.get("output", {}), "output")
    _expect(output.format in _FORMATS, f"output.format must be one of {_FORMATS}")

    potential = doc.get("potential")
    if potential is not None:
        _expect(isinstance(potential, dict), "potential must be an object")
        potential = copy.deepcopy(potential)

    return RunConfig(potential=potential, method=method, eps_floor=eps_floor,
                     region=region, tolerances=tol, grid=grid, search=search,
                     scan=scan, kernel=kernel, output=output)


def config_to_dict(cfg: RunConfig) -> dict:
    """Inverse of config_from_dict; round-trips field by field."""
    doc: dict[str, Any] = {
        "potential": copy.deepcopy(cfg.potential),
        "method": cfg.method,
        "eps_floor": cfg.eps_floor,
        "region": dict(cfg.region) if cfg.region is not None else None,
        "tolerances": {
            "match_rtol": cfg.tolerances.match_rtol,
            "match_atol": cfg.tolerances.match_atol,
            "newton": cfg.tolerances.newton,
            "quadrature": cfg.tolerances.quadrature,
            "cross": cfg.tolerances.cross,
        },
        "grid": {"panel_order": cfg.grid.panel_order,
                 "density_factor": cfg.grid.density_factor},
        "search": {"samples_per_edge": cfg.search.samples_per_edge,
                   "max_evaluations": cfg.search.max_evaluations,
                   "max_dilations": cfg.search.max_dilations},
        "scan": None,
        "kernel": None,
        "output": {"path": cfg.output.path, "format": cfg.output.format},
    }
    if cfg.scan is not None:
        doc["scan"] = {"re_min": cfg.scan.re_min, "re_max": cfg.scan.re_max,
                       "im_min": cfg.scan.im_min, "im_max": cfg.scan.im_max,
                       "density_re": cfg.scan.density_re,
                       "density_im": cfg.scan.density_im}
    if cfg.kernel is not None:
        doc["kernel"] = {"lam": [cfg.kernel.lam.real, cfg.kernel.lam.imag],
                         "x_min": cfg.kernel.x_min, "x_max": cfg.kernel.x_max,
                         "y_min": cfg.kernel.y_min, "y_max": cfg.kernel.y_max,
                         "density": cfg.kernel.density}
    return doc


def load_config(path: str) -> dict:
    """Raw config document from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def apply_override(doc: dict, assignment: str) -> None:
    """Apply one KEY=VALUE override with a dotted path, in place.

    The value is parsed as JSON when possible (numbers, booleans, null,
    arrays, objects); anything unparsable is taken as a plain string.
    Intermediate objects are created as needed.
    """
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise ConfigError(f"override must look like KEY=VALUE, got {assignment!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = doc
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = {}
            node[part] = nxt
        if not isinstance(nxt, dict):
            raise ConfigError(f"override path {key!r} descends into a non-object")
        node = nxt
    node[parts[-1]] = value
