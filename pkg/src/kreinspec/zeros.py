"""Argument-principle zero search over rectangles in the upper half plane.

Counts zeros of an analytic callable F by the winding of its phase
along rectangle boundaries, subdivides until each box holds a single
zero, and polishes with a damped Newton iteration.  The search is
generic: nothing here knows about potentials or determinants, which is
what lets the test suite drive it with random polynomials whose roots
are known exactly.

Reliability rules, in order:

* a phase step larger than pi/2 between neighboring samples is never
  trusted; the interval is bisected until every step is small,
* a sample sitting in a local dip of log|F| (noticeably below both
  neighbors) marks a possible hidden zero pair; the adjacent intervals
  are bisected until the dip flattens or resolves into phase steps,
* the bottom edge can additionally be sampled on a fixed lattice whose
  spacing matches the region floor.  Zeros of a conjugation-symmetric
  function come in mirror pairs about the real axis; a zero just above
  a low bottom edge teams up with its mirror just below into a phase
  dipole whose net swing between coarse samples is tiny even though
  the true path picks up a full turn.  The dip such a pair leaves in
  |F| has lateral width of the order of the zero's height, which for
  in-scope zeros is at least the floor height, so floor-spaced samples
  cannot miss it.  Lattice points are anchored to the top-level region
  and therefore shared by every subdivision box on the floor,
* a contour passing too close to a zero (detected through the smallest
  |F| seen relative to the contour median) makes the enclosing count
  unreliable: the top-level region is dilated a little and re-walked,
  while child boxes shift their split line instead,
* child counts must add up to the parent count, otherwise the split
  line is moved and the split redone,
* every F evaluation is cached and budgeted; on budget exhaustion the
  search returns what it has with complete=False rather than guessing.

All decisions are deterministic: no randomness, fixed child ordering,
certificates sorted by (Re, Im) at the end.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

TWO_PI = 2.0 * math.pi
_SPLIT_FRACTIONS = (0.5, 0.45, 0.55, 0.4, 0.6)


@dataclass(frozen=True)
class SearchRegion:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("degenerate search region")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max),
                       0.5 * (self.im_min + self.im_max))

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def corners(self) -> tuple[complex, complex, complex, complex]:
        """Counterclockwise from the lower-left corner."""
        return (complex(self.re_min, self.im_min),
                complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max),
                complex(self.re_min, self.im_max))

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return (self.re_min - slack <= z.real <= self.re_max + slack
                and self.im_min - slack <= z.imag <= self.im_max + slack)

    def dilated(self, factor: float) -> "SearchRegion":
        """Grow by the factor about the center; the lower edge never
        drops below a quarter of its original height above zero, so a
        region in the open upper half plane stays there."""
        dw = 0.5 * self.width * factor
        dh = 0.5 * self.height * factor
        return SearchRegion(self.re_min - dw, self.re_max + dw,
                            max(self.im_min - dh, 0.25 * self.im_min),
                            self.im_max + dh)


@dataclass(frozen=True)
class WindingOutcome:
    count: int
    residual: float        # |raw/2pi - count|, should be tiny
    min_abs: float
    min_abs_at: complex
    median_abs: float
    reliable: bool
    near_zero: bool


@dataclass(frozen=True)
class ZeroCertificate:
    lam: complex
    multiplicity: int
    box: SearchRegion
    newton_converged: bool
    residual: float        # |F| at the reported point
    iterations: int


@dataclass(frozen=True)
class ZeroSearchResult:
    certificates: tuple[ZeroCertificate, ...]
    region: SearchRegion
    total_winding: int
    complete: bool
    evaluations: int
    notes: tuple[str, ...]

    @property
    def zeros(self) -> tuple[complex, ...]:
        return tuple(c.lam for c in self.certificates)


class BudgetExceeded(RuntimeError):
    pass


class _Evaluator:
    """Caching, counting, budgeted wrapper around F."""

    def __init__(self, F: Callable[[complex], complex], max_evals: int):
        self.F = F
        self.max_evals = max_evals
        self.cache: dict[tuple[float, float], complex] = {}
        self.count = 0

    def __call__(self, z: complex) -> complex:
        key = (z.real, z.imag)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if self.count >= self.max_evals:
            raise BudgetExceeded
        self.count += 1
        val = complex(self.F(z))
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise ArithmeticError(f"F returned a non-finite value at {z}")
        self.cache[key] = val
        return val


def _wrap(d: float) -> float:
    """Reduce a phase difference to (-pi, pi]."""
    d = math.fmod(d + math.pi, TWO_PI)
    if d <= 0.0:
        d += TWO_PI
    return d - math.pi


def winding_number(F, region: SearchRegion, *,
                   samples_per_edge: int = 17,
                   near_zero_ratio: float = 1e-3,
                   max_rounds: int = 30,
                   max_evals: int = 100000,
                   bottom_spacing: float | None = None) -> WindingOutcome:
    """Winding of F along the region boundary, with adaptive refinement.

    ``bottom_spacing`` densifies the bottom edge to that sample spacing
    (see the module docstring for why the bottom edge is special).
    Standalone variant; the zero search uses the same core through its
    shared cache.
    """
    ev = F if isinstance(F, _Evaluator) else _Evaluator(F, max_evals)
    lattice = None
    if bottom_spacing is not None:
        lattice = (region.re_min, bottom_spacing)
    return _winding(ev, region, samples_per_edge, near_zero_ratio, max_rounds,
                    lattice)


_MAX_BOTTOM_POINTS = 8192
_DIP_THRESHOLD = 0.2  # log units; genuine dips near zeros are far deeper


def _bottom_points(region: SearchRegion, lattice: tuple[float, float],
                   fallback: int) -> list[float]:
    """Anchored lattice abscissae strictly inside the bottom edge."""
    anchor, spacing = lattice
    lo, hi = region.re_min, region.re_max
    if spacing <= 0 or (hi - lo) / spacing > _MAX_BOTTOM_POINTS:
        spacing = (hi - lo) / _MAX_BOTTOM_POINTS
    k0 = math.ceil((lo - anchor) / spacing)
    xs = []
    k = k0
    while True:
        x = anchor + k * spacing
        if x >= hi:
            break
        if x > lo:
            xs.append(x)
        k += 1
    if len(xs) < fallback - 2:
        xs = [lo + (hi - lo) * j / (fallback - 1) for j in range(1, fallback - 1)]
    return xs


def _winding(ev: _Evaluator, region: SearchRegion, samples_per_edge: int,
             near_zero_ratio: float, max_rounds: int,
             lattice: tuple[float, float] | None = None) -> WindingOutcome:
    corners = list(region.corners())
    pts: list[complex] = []
    for i, (a, b) in enumerate(zip(corners, corners[1:] + corners[:1])):
        pts.append(a)
        if i == 0 and lattice is not None:
            pts.extend(complex(x, region.im_min)
                       for x in _bottom_points(region, lattice, samples_per_edge))
        else:
            for k in range(1, samples_per_edge - 1):
                t = k / (samples_per_edge - 1)
                pts.append(a + t * (b - a))
    pts.append(pts[0])

    vals = [ev(z) for z in pts]
    zero_hit = any(v == 0 for v in vals)

    rounds = 0
    while not zero_hit and rounds < max_rounds:
        logs = [math.log(abs(v)) if v != 0 else -math.inf for v in vals]
        split = [False] * (len(pts) - 1)
        for i in range(len(pts) - 1):
            v0, v1 = vals[i], vals[i + 1]
            if v0 == 0 or v1 == 0:
                zero_hit = True
                continue
            d = _wrap(cmath.phase(v1) - cmath.phase(v0))
            sep = abs(pts[i + 1] - pts[i])
            if abs(d) > 0.5 * math.pi and sep > 1e-14 * (1.0 + abs(pts[i])):
                split[i] = True
        # local log-magnitude dips flag a zero (or mirror pair) hiding
        # between coarse samples even when every phase step looks tame
        for j in range(1, len(pts) - 1):
            if logs[j] < logs[j - 1] - _DIP_THRESHOLD \
                    and logs[j] < logs[j + 1] - _DIP_THRESHOLD:
                if abs(pts[j] - pts[j - 1]) > 1e-14 * (1.0 + abs(pts[j])):
                    split[j - 1] = True
                if abs(pts[j + 1] - pts[j]) > 1e-14 * (1.0 + abs(pts[j])):
                    split[j] = True
        if zero_hit or not any(split):
            break
        new_pts: list[complex] = []
        new_vals: list[complex] = []
        for i in range(len(pts) - 1):
            new_pts.append(pts[i])
            new_vals.append(vals[i])
            if split[i]:
                zm = 0.5 * (pts[i] + pts[i + 1])
                vm = ev(zm)
                new_pts.append(zm)
                new_vals.append(vm)
                if vm == 0:
                    zero_hit = True
        new_pts.append(pts[-1])
        new_vals.append(vals[-1])
        pts, vals = new_pts, new_vals
        rounds += 1
        abs_now = sorted(abs(v) for v in vals[:-1])
        if abs_now[0] < near_zero_ratio * abs_now[len(abs_now) // 2]:
            break  # close enough to a zero that the caller must adjust

    abs_vals = sorted(abs(v) for v in vals[:-1])
    min_abs = abs_vals[0]
    median_abs = abs_vals[len(abs_vals) // 2]
    min_at = min(zip(pts[:-1], vals[:-1]), key=lambda t: abs(t[1]))[0]
    near = zero_hit or min_abs < near_zero_ratio * median_abs

    total = 0.0
    max_step = 0.0
    for v0, v1 in zip(vals[:-1], vals[1:]):
        if v0 == 0 or v1 == 0:
            continue
        d = _wrap(cmath.phase(v1) - cmath.phase(v0))
        total += d
        max_step = max(max_step, abs(d))
    raw = total / TWO_PI
    count = round(raw)
    residual = abs(raw - count)
    reliable = (not zero_hit) and residual < 0.25 and max_step <= 0.5 * math.pi + 1e-9
    return WindingOutcome(count=count, residual=residual, min_abs=min_abs,
                          min_abs_at=min_at, median_abs=median_abs,
                          reliable=reliable, near_zero=near)


def _newton(ev: _Evaluator, z0: complex, multiplicity: int,
            floor: float, tol: float,
            itmax: int = 60) -> tuple[complex, int, float] | None:
    """Damped (multiplicity-aware) Newton with central differences.

    Returns (zero, iterations, |F(zero)|) or None.  Iterates may roam a
    little outside the box but never below the floor imaginary part.
    """
    z = z0
    m = max(1, multiplicity)
    for it in range(itmax):
        f0 = ev(z)
        if f0 == 0:
            return z, it, 0.0
        h = 1e-6 * (1.0 + abs(z))
        d = (ev(z + h) - ev(z - h)) / (2.0 * h)
        if d == 0:
            return None
        step = m * f0 / d
        tries = 0
        while (z - step).imag <= floor and tries < 60:
            step *= 0.5
            tries += 1
        z = z - step
        if abs(step) <= tol * (1.0 + abs(z)):
            return z, it + 1, abs(ev(z))
    return None


def newton_polish(F, z0: complex, *, floor: float = 1e-12,
                  tol: float = 1e-12, max_evals: int = 2000) -> tuple[complex, float] | None:
    """Refine a single zero estimate; returns (zero, |F(zero)|) or None.

    Same damped central-difference iteration the search uses, exposed
    for re-polishing at tightened tolerances.  Iterates stay above the
    imaginary-part floor.
    """
    ev = _Evaluator(F, max_evals)
    got = _newton(ev, z0, 1, floor, tol)
    if got is None:
        return None
    z, _, res = got
    return z, res


def _split(region: SearchRegion, fraction: float) -> list[SearchRegion]:
    """Four children; the split point sits at `fraction` along each side.
    Children are listed in a fixed deterministic order."""
    rm = region.re_min + fraction * region.width
    im = region.im_min + fraction * region.height
    return [SearchRegion(region.re_min, rm, region.im_min, im),
            SearchRegion(rm, region.re_max, region.im_min, im),
            SearchRegion(region.re_min, rm, im, region.im_max),
            SearchRegion(rm, region.re_max, im, region.im_max)]


def locate_zeros(F, region: SearchRegion, *,
                 newton_tol: float = 1e-12,
                 min_box: float | None = None,
                 max_evals: int = 500000,
                 max_dilations: int = 3,
                 near_zero_ratio: float = 1e-3,
                 samples_per_edge: int = 17) -> ZeroSearchResult:
    """All zeros of F inside the region, counted with multiplicity.

    The top-level region may be dilated (up to max_dilations times, 10%
    each) when a zero sits too close to its boundary; the result
    records the region actually searched.  Child boxes never dilate:
    they move their split line instead, so the running total stays
    consistent with the top-level count.
    """
    ev = _Evaluator(F, max_evals)
    notes: list[str] = []
    top = region
    outcome = None
    try:
        for attempt in range(max_dilations + 1):
            outcome = _winding(ev, top, samples_per_edge, near_zero_ratio, 30)
            if outcome.reliable and not outcome.near_zero:
                break
            if attempt == max_dilations:
                notes.append("top-level contour stayed unreliable after dilation")
                break
            top = top.dilated(0.1)
            notes.append(f"dilated search region to {top}")
    except BudgetExceeded:
        return ZeroSearchResult(certificates=(), region=top, total_winding=0,
                                complete=False, evaluations=ev.count,
                                notes=tuple(notes + ["evaluation budget exhausted"
                                                     " during top-level winding"]))

    total = outcome.count
    if total < 0:
        raise ValueError("negative winding: F is not analytic inside the region")
    if total == 0:
        return ZeroSearchResult(certificates=(), region=top, total_winding=0,
                                complete=outcome.reliable, evaluations=ev.count,
                                notes=tuple(notes))

    scale = 1.0 + abs(top.center)
    if min_box is None:
        min_box = 1e-10 * scale
    floor = min(1e-12, 0.5 * top.im_min)

    complete = outcome.reliable
    certs: list[ZeroCertificate] = []

    def emit_cluster(box: SearchRegion, count: int) -> None:
        center = box.center
        try:
            res = abs(ev(center))
        except BudgetExceeded:
            res = math.nan
        certs.append(ZeroCertificate(lam=center, multiplicity=count, box=box,
                                     newton_converged=False, residual=res,
                                     iterations=0))

    def recurse(box: SearchRegion, count: int, depth: int) -> None:
        nonlocal complete
        if count <= 0:
            return
        # try Newton once the box is reasonably small or holds one zero
        if count == 1 or box.diameter <= 1e-3 * scale:
            got = _newton(ev, box.center, count, floor, newton_tol)
            if got is not None:
                z, its, res = got
                slack = 1e-9 * scale
                if box.contains(z, slack=slack) and top.contains(z, slack=slack):
                    certs.append(ZeroCertificate(lam=z, multiplicity=count,
                                                 box=box, newton_converged=True,
                                                 residual=res, iterations=its))
                    return
        if box.diameter <= min_box or depth > 60:
            emit_cluster(box, count)
            return
        for fraction in _SPLIT_FRACTIONS:
            children = _split(box, fraction)
            outcomes = []
            ok = True
            for ch in children:
                o = _winding(ev, ch, samples_per_edge, near_zero_ratio, 30)
                if not o.reliable or o.near_zero:
                    ok = False
                    break
                outcomes.append(o)
            if ok and sum(o.count for o in outcomes) == count:
                for ch, o in zip(children, outcomes):
                    recurse(ch, o.count, depth + 1)
                return
        notes.append(f"no clean split of box around {box.center}; "
                     "reporting its content as one cluster")
        complete = False
        emit_cluster(box, count)

    try:
        recurse(top, total, 0)
    except BudgetExceeded:
        notes.append("evaluation budget exhausted during subdivision")
        complete = False

    found = sum(c.multiplicity for c in certs)
    if found != total:
        notes.append(f"found multiplicity {found} of {total} counted zeros")
        complete = False
    certs.sort(key=lambda c: (c.lam.real, c.lam.imag))
    return ZeroSearchResult(certificates=tuple(certs), region=top,
                            total_winding=total, complete=complete,
                            evaluations=ev.count, notes=tuple(notes))
