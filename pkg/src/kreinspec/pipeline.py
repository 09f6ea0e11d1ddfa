"""End-to-end solve orchestration and report serialization.

The solve pipeline runs potential -> bound-derived region -> one zero
search per requested route -> cross-validation -> eigenfunction and
bound verdicts.  The two routes never share numerics: the shooting
route evaluates the half-line matching determinant by adaptive ODE
integration, the integral route a Fredholm determinant on Nystrom
grids.  Their zero sets are paired afterwards and must agree to the
cross tolerance; anything unmatched fails the run rather than being
silently dropped.

Exit codes: 0 success, 2 configuration error, 3 incomplete or
inconsistent search, 4 bound violation.
"""

from __future__ import annotations

import math
import time
from cmath import phase
from dataclasses import dataclass

from .birman_schwinger import DetEvaluator, det_evaluator
from .bounds import (ABS_COEFF, IM_COEFF, BoundReport, bound_report,
                     eigenvalue_region)
from .config import ConfigError, RunConfig, config_to_dict
from .potentials import Norms, Potential, potential_from_config
from .resolvent import kernel_K, spectral
from .shooting import eigenfunction_samples, match_function, matching_det
from .zeros import SearchRegion, ZeroSearchResult, locate_zeros, newton_polish

_ROUTES = ("shooting", "birman_schwinger")


class _LadderDet:
    """Determinant evaluators dispatched by |lambda| annulus.

    The Nystrom grid density must resolve oscillation at the largest
    |lambda| it will see; paying that density for every contour point
    of a large region is wasteful because subdivision spends most
    evaluations near the (small) eigenvalues.  A geometric ladder of
    evaluators, each used only up to its design |lambda|, keeps the
    dispatch a pure function of lambda, so values remain cacheable and
    every closed contour sees one analytic determinant except for
    sub-discretization jumps across annulus boundaries.
    """

    def __init__(self, q: Potential, region: SearchRegion, *,
                 density_factor: float, panel_order: int):
        top = 1.05 * max(abs(c) for c in region.corners())
        levels = []
        lam = max(top, 4.0)
        while True:
            levels.append(lam)
            if lam <= 4.0:
                break
            lam = max(lam / 4.0, 4.0)
        self.levels = tuple(sorted(levels))
        self.q = q
        self.density_factor = density_factor
        self.panel_order = panel_order
        self._built: dict[float, DetEvaluator] = {}

    def _evaluator(self, level: float) -> DetEvaluator:
        ev = self._built.get(level)
        if ev is None:
            ev = det_evaluator(self.q, lam_max_abs=level,
                               density_factor=self.density_factor,
                               panel_order=self.panel_order)
            self._built[level] = ev
        return ev

    def __call__(self, lam: complex) -> complex:
        a = abs(lam)
        for level in self.levels:
            if a <= level:
                return self._evaluator(level)(lam)
        return self._evaluator(self.levels[-1])(lam)


def _shooting_function(q: Potential, region: SearchRegion, cfg: RunConfig):
    """Analytic matching determinant, log-shifted to O(1) at the region
    center so contour magnitudes stay representable."""
    probe = matching_det(q, region.center, rtol=cfg.tolerances.match_rtol,
                         atol=cfg.tolerances.match_atol)
    shift = probe.log_scale + math.log(max(abs(probe.d_scaled), 1e-300))
    return match_function(q, rtol=cfg.tolerances.match_rtol,
                          atol=cfg.tolerances.match_atol, log_shift=shift)


@dataclass(frozen=True)
class CrossPair:
    shooting: complex
    birman_schwinger: complex
    multiplicity: int
    distance: float
    tol: float


@dataclass(frozen=True)
class RunReport:
    config: dict
    norms: Norms
    region: SearchRegion | None
    region_note: str
    searches: dict[str, ZeroSearchResult]
    pairs: tuple[CrossPair, ...]
    unmatched: tuple[tuple[str, complex], ...]
    eigenvalues: tuple[complex, ...]
    mirrored: tuple[complex, ...]
    reports: tuple[BoundReport, ...]
    complete: bool
    verdict: bool
    notes: tuple[str, ...]
    wall_seconds: float

    @property
    def exit_code(self) -> int:
        if not self.verdict:
            return 4
        if not self.complete or self.unmatched:
            return 3
        return 0


def _pair_routes(sh: ZeroSearchResult, bs: ZeroSearchResult,
                 cross_tol: float) -> tuple[list[CrossPair],
                                            list[tuple[str, complex]]]:
    """Greedy nearest-neighbor matching, one-to-one, multiplicity-aware."""
    cands = []
    for i, cs in enumerate(sh.certificates):
        for j, cb in enumerate(bs.certificates):
            cands.append((abs(cs.lam - cb.lam), i, j))
    cands.sort()
    used_s: set[int] = set()
    used_b: set[int] = set()
    pairs: list[CrossPair] = []
    for dist, i, j in cands:
        if i in used_s or j in used_b:
            continue
        cs, cb = sh.certificates[i], bs.certificates[j]
        tol = cross_tol * (1.0 + abs(cs.lam))
        if dist > tol or cs.multiplicity != cb.multiplicity:
            continue
        used_s.add(i)
        used_b.add(j)
        pairs.append(CrossPair(shooting=cs.lam, birman_schwinger=cb.lam,
                               multiplicity=cs.multiplicity,
                               distance=dist, tol=tol))
    unmatched = [("shooting", c.lam) for i, c in enumerate(sh.certificates)
                 if i not in used_s]
    unmatched += [("birman_schwinger", c.lam) for j, c in enumerate(bs.certificates)
                  if j not in used_b]
    pairs.sort(key=lambda p: (p.shooting.real, p.shooting.imag))
    unmatched.sort(key=lambda t: (t[0], t[1].real, t[1].imag))
    return pairs, unmatched


def _refined_report(q: Potential, lam: complex, method: str,
                    cfg: RunConfig) -> tuple[complex, BoundReport] | None:
    """Re-polish and re-judge one eigenvalue at tightened discretization.

    Called only when a bound check fails at standard settings; a
    genuine violation must survive this before the run may claim the
    estimates themselves are at fault.
    """
    rt = cfg.tolerances.match_rtol * 1e-3
    at = max(cfg.tolerances.match_atol * 1e-3, 1e-16)
    probe = matching_det(q, lam, rtol=rt, atol=at)
    shift = probe.log_scale + math.log(max(abs(probe.d_scaled), 1e-300))
    F = match_function(q, rtol=rt, atol=at, log_shift=shift)
    out = newton_polish(F, lam, floor=0.25 * lam.imag,
                        tol=cfg.tolerances.newton * 1e-2)
    if out is None:
        return None
    lam2 = out[0]
    pair = eigenfunction_samples(q, lam2, panel_order=cfg.grid.panel_order,
                                 max_spacing=0.5 * min(0.05, 0.25 / math.sqrt(abs(lam2))),
                                 rtol=rt, atol=at)
    return lam2, bound_report(lam2, q, method=method, pair=pair)


def solve(cfg: RunConfig) -> RunReport:
    t0 = time.perf_counter()
    if cfg.potential is None:
        raise ConfigError("solve requires a potential")
    try:
        q = potential_from_config(cfg.potential)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    norms = q.l1_norms()
    notes: list[str] = []

    if cfg.region is not None:
        region: SearchRegion | None = SearchRegion(**cfg.region)
    else:
        region = eigenvalue_region(q, eps_floor=cfg.eps_floor)

    if region is None:
        note = ("no non-real eigenvalues possible"
                if norms.negative == 0.0
                else "search region degenerate below the floor; nothing to search")
        return RunReport(config=config_to_dict(cfg), norms=norms, region=None,
                         region_note=note, searches={}, pairs=(), unmatched=(),
                         eigenvalues=(), mirrored=(), reports=(),
                         complete=True, verdict=True, notes=tuple(notes),
                         wall_seconds=time.perf_counter() - t0)

    routes = _ROUTES if cfg.method == "both" else (cfg.method,)
    searches: dict[str, ZeroSearchResult] = {}
    for route in routes:
        if route == "shooting":
            F = _shooting_function(q, region, cfg)
        else:
            F = _LadderDet(q, region, density_factor=cfg.grid.density_factor,
                           panel_order=cfg.grid.panel_order)
        searches[route] = locate_zeros(
            F, region,
            newton_tol=cfg.tolerances.newton,
            max_evals=cfg.search.max_evaluations,
            max_dilations=cfg.search.max_dilations,
            samples_per_edge=cfg.search.samples_per_edge)

    complete = all(s.complete for s in searches.values())
    pairs: tuple[CrossPair, ...] = ()
    unmatched: tuple[tuple[str, complex], ...] = ()
    if cfg.method == "both":
        p, u = _pair_routes(searches["shooting"], searches["birman_schwinger"],
                            cfg.tolerances.cross)
        pairs, unmatched = tuple(p), tuple(u)
        confirmed = [(pp.shooting, pp.multiplicity) for pp in pairs]
    else:
        confirmed = [(c.lam, c.multiplicity)
                     for c in searches[cfg.method].certificates]
    confirmed.sort(key=lambda t: (t[0].real, t[0].imag))

    with_function = cfg.method in ("shooting", "both")
    eigenvalues: list[complex] = []
    reports: list[BoundReport] = []
    for lam, mult in confirmed:
        if mult != 1:
            notes.append(f"multiplicity {mult} cluster at {lam}: bounds checked, "
                         "eigenfunction diagnostics skipped")
        rep: BoundReport
        if with_function and mult == 1:
            pair_data = eigenfunction_samples(q, lam,
                                              panel_order=cfg.grid.panel_order,
                                              rtol=cfg.tolerances.match_rtol,
                                              atol=cfg.tolerances.match_atol)
            if pair_data.spurious:
                notes.append(f"zero at {lam} rejected: matching residual "
                             f"{pair_data.matching_residual:.3e} marks it spurious")
                complete = False
                continue
            rep = bound_report(lam, q, method=cfg.method, pair=pair_data)
        else:
            rep = bound_report(lam, q, method=cfg.method, pair=None)
        if not rep.verdict:
            notes.append(f"verdict failed at {lam}; re-running refined")
            refined = _refined_report(q, lam, cfg.method, cfg) \
                if (with_function and mult == 1) else None
            if refined is not None:
                lam2, rep2 = refined
                notes.append(f"refined eigenvalue {lam2}: verdict "
                             f"{'pass' if rep2.verdict else 'fail'}")
                lam, rep = lam2, rep2
        eigenvalues.append(lam)
        reports.append(rep)

    verdict = all(r.verdict for r in reports)
    mirrored = tuple(complex(l.real, -l.imag) for l in eigenvalues)
    return RunReport(config=config_to_dict(cfg), norms=norms, region=region,
                     region_note="", searches=searches, pairs=pairs,
                     unmatched=unmatched, eigenvalues=tuple(eigenvalues),
                     mirrored=mirrored, reports=tuple(reports),
                     complete=complete, verdict=verdict, notes=tuple(notes),
                     wall_seconds=time.perf_counter() - t0)


# -- grids for the scan and kernel subcommands ----------------------------

SCAN_COLUMNS = ("re", "im", "abs_D", "arg_D", "abs_det", "arg_det")
KERNEL_COLUMNS = ("x", "y", "re_K", "im_K", "abs_K")


def _linspace(lo: float, hi: float, n: int) -> list[float]:
    if n == 1:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + k * step for k in range(n)]


def scan_rows(cfg: RunConfig) -> list[tuple[float, ...]]:
    """Both characteristic functions on a rectangular lambda grid.

    Rows run re-fastest from the lower-left corner; columns follow
    SCAN_COLUMNS.  D is reported at true scale through its logarithm,
    so deep-well magnitudes that overflow a double appear as inf.
    """
    if cfg.potential is None or cfg.scan is None:
        raise ConfigError("scan requires potential and scan sections")
    try:
        q = potential_from_config(cfg.potential)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    sc = cfg.scan
    det = det_evaluator(q, lam_max_abs=1.05 * math.hypot(
        max(abs(sc.re_min), abs(sc.re_max)), abs(sc.im_max)),
        density_factor=cfg.grid.density_factor,
        panel_order=cfg.grid.panel_order)
    rows = []
    for im in _linspace(sc.im_min, sc.im_max, sc.density_im):
        for re in _linspace(sc.re_min, sc.re_max, sc.density_re):
            lam = complex(re, im)
            mv = matching_det(q, lam, rtol=cfg.tolerances.match_rtol,
                              atol=cfg.tolerances.match_atol)
            log_abs = mv.log_abs
            try:
                abs_d = math.exp(log_abs)
            except OverflowError:
                abs_d = math.inf
            dv = det(lam)
            rows.append((re, im, abs_d, phase(mv.d_scaled),
                         abs(dv), phase(dv)))
    return rows


def kernel_rows(cfg: RunConfig) -> list[tuple[float, ...]]:
    """Free resolvent kernel on an (x, y) grid at the configured lambda."""
    if cfg.kernel is None:
        raise ConfigError("kernel requires a kernel section")
    kp = cfg.kernel
    sp = spectral(kp.lam)
    rows = []
    for y in _linspace(kp.y_min, kp.y_max, kp.density):
        for x in _linspace(kp.x_min, kp.x_max, kp.density):
            val = kernel_K(sp, x, y).total
            rows.append((x, y, val.real, val.imag, abs(val)))
    return rows


# -- serialization ---------------------------------------------------------

def _c(z: complex) -> list[float]:
    return [z.real, z.imag]


def _region_dict(r: SearchRegion | None) -> dict | None:
    if r is None:
        return None
    return {"re_min": r.re_min, "re_max": r.re_max,
            "im_min": r.im_min, "im_max": r.im_max}


def report_to_dict(rep: RunReport) -> dict:
    """Plain-data form of a RunReport, deterministic field order.

    Only the timing block varies between identical runs.
    """
    norms = rep.norms
    searches = {}
    for route in sorted(rep.searches):
        s = rep.searches[route]
        searches[route] = {
            "region": _region_dict(s.region),
            "total_winding": s.total_winding,
            "complete": s.complete,
            "evaluations": s.evaluations,
            "notes": list(s.notes),
            "certificates": [
                {"lam": _c(c.lam), "multiplicity": c.multiplicity,
                 "newton_converged": c.newton_converged,
                 "residual": c.residual, "iterations": c.iterations,
                 "box": _region_dict(c.box)}
                for c in s.certificates],
        }
    bound_reports = []
    for br in rep.reports:
        lemma = None
        if br.lemma is not None:
            lm = br.lemma
            lemma = {
                "identity_residual": lm.identity_residual,
                "identity_scale": lm.identity_scale,
                "left_limit_u": lm.left_limit_u,
                "left_limit_v": lm.left_limit_v,
                "left_sample_at": lm.left_sample_at,
                "norm_f": lm.norm_f,
                "norm_f_prime": lm.norm_f_prime,
                "sup_f": lm.sup_f,
                "weighted_l1": lm.weighted_l1,
                "slack_derivative_norm": lm.slack_derivative_norm,
                "slack_sup_norm": lm.slack_sup_norm,
                "slack_weighted_l1": lm.slack_weighted_l1,
                "energy_residual": lm.energy_residual,
                "energy_scale": lm.energy_scale,
                "ok": lm.ok,
            }
        bound_reports.append({
            "lam": _c(br.lam),
            "method": br.method,
            "checks": [{"name": c.name, "bound": c.bound,
                        "observed": c.observed, "margin": c.margin,
                        "ok": c.ok} for c in br.checks],
            "lemma": lemma,
            "verdict": br.verdict,
        })
    return {
        "schema": "kreinspec-report-v1",
        "config": rep.config,
        "norms": {"total": norms.total, "positive": norms.positive,
                  "negative": norms.negative},
        "bound_values": {
            "abs_vs_total_norm": norms.total ** 2,
            "im_vs_negative_norm": IM_COEFF * norms.negative ** 2,
            "abs_vs_negative_norm": ABS_COEFF * norms.negative ** 2,
        },
        "region": _region_dict(rep.region),
        "region_note": rep.region_note,
        "searches": searches,
        "cross_validation": {
            "pairs": [{"shooting": _c(p.shooting),
                       "birman_schwinger": _c(p.birman_schwinger),
                       "multiplicity": p.multiplicity,
                       "distance": p.distance, "tol": p.tol}
                      for p in rep.pairs],
            "unmatched": [{"method": m, "lam": _c(l)} for m, l in rep.unmatched],
        },
        "eigenvalues": [_c(l) for l in rep.eigenvalues],
        "mirrored_conjugates": [_c(l) for l in rep.mirrored],
        "bound_reports": bound_reports,
        "complete": rep.complete,
        "verdict": rep.verdict,
        "exit_code": rep.exit_code,
        "notes": list(rep.notes),
        "timing": {"wall_seconds": rep.wall_seconds},
    }


def format_float(x: float) -> str:
    """Fixed 17-significant-digit decimal form used in all outputs."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def dumps_17g(obj, indent: int = 0) -> str:
    """JSON text with every float at 17 significant digits.

    The stdlib encoder prints shortest-roundtrip floats; the output
    contract asks for a fixed digit count instead, so this walks the
    plain-data tree itself.  Dict insertion order is preserved, which
    report_to_dict keeps deterministic.
    """
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        s = format_float(obj)
        if s in ("inf", "-inf", "nan"):
            return f'"{s}"'
        return s
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dumps_17g(v, indent + 1) for v in obj]
        if all("\n" not in it and len(it) < 20 for it in items) \
                and sum(len(it) for it in items) < 70:
            return "[" + ", ".join(items) + "]"
        body = ",\n".join(inner + it for it in items)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        import json
        parts = []
        for k, v in obj.items():
            parts.append(inner + json.dumps(str(k)) + ": "
                         + dumps_17g(v, indent + 1))
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def rows_to_csv(columns: tuple[str, ...], rows: list[tuple[float, ...]]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_float(float(v)) for v in row))
    return "\n".join(lines) + "\n"
