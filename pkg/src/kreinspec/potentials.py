"""Real integrable potentials with exact L1 bookkeeping.

Three families are supported, all compactly supported and all closed
under scalar multiples and (within a family) finite sums:

* step sums           q = sum of h_i on [a_i, b_i)
* piecewise polynomials  q = p_i(x - a_i) on [a_i, b_i)
* truncated analytic  q = sum of named smooth profiles, cut to |x| <= R
                      with a certified closed-form tail bound

Point values at jumps follow the right-limit convention.  The split
norms satisfy ||q||_1 = ||q+||_1 + ||q-||_1 by construction: we compute
||q||_1 and the signed integral and derive the split, so the identity
holds to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .quadrature import integrate

_DISJOINT_TOL = 1e-12


class Norms(NamedTuple):
    total: float
    positive: float
    negative: float


@dataclass(frozen=True)
class StepPiece:
    a: float
    b: float
    height: float


@dataclass(frozen=True)
class PolyPiece:
    """p(x) = sum_k coeffs[k] * (x - a)^k on [a, b)."""

    a: float
    b: float
    coeffs: tuple[float, ...]


@dataclass(frozen=True)
class AnalyticTerm:
    """One named smooth profile: amplitude * shape((x - center) / width)."""

    formula: str
    amplitude: float
    width: float
    center: float = 0.0


# shape(t), and the one-sided tail integral of |shape| from s >= 0 to infinity
_FORMULAS: dict[str, tuple[Callable[[np.ndarray], np.ndarray], Callable[[float], float]]] = {
    "gaussian": (
        lambda t: np.exp(-t * t),
        lambda s: 0.5 * math.sqrt(math.pi) * math.erfc(s),
    ),
    "sech2": (
        lambda t: 1.0 / np.cosh(t) ** 2,
        lambda s: 1.0 - math.tanh(s),
    ),
    "exp_decay": (
        lambda t: np.exp(-np.abs(t)),
        lambda s: math.exp(-s),
    ),
}


def _check_disjoint(pieces) -> None:
    prev_b = None
    for p in pieces:
        if not p.b > p.a:
            raise ValueError(f"piece [{p.a}, {p.b}) is empty or reversed")
        if prev_b is not None and p.a < prev_b - _DISJOINT_TOL:
            raise ValueError("pieces overlap; intervals must be pairwise disjoint")
        prev_b = p.b


def _poly_abs_integral(piece: PolyPiece) -> tuple[float, float]:
    """(integral of p, integral of |p|) over the piece, exact.

    Sign changes are located as the real roots of p inside the piece;
    between consecutive roots the antiderivative integrates p exactly
    and the local sign comes from a midpoint sample.
    """
    c = np.asarray(piece.coeffs, dtype=float)
    width = piece.b - piece.a
    anti = np.concatenate(([0.0], c / np.arange(1, len(c) + 1)))

    def prim(t: float) -> float:
        return float(np.polyval(anti[::-1], t))

    signed = prim(width) - prim(0.0)
    if len(c) <= 1:
        return signed, abs(signed)
    roots = np.roots(c[::-1]) if np.any(c[1:] != 0) else np.array([])
    cuts = sorted(
        float(r.real)
        for r in np.atleast_1d(roots)
        if abs(r.imag) < 1e-10 and 0.0 < r.real < width
    )
    pts = [0.0] + cuts + [width]
    # p keeps one sign between consecutive cuts, so |integral| per slice
    # sums to the integral of |p|
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 0:
            continue
        total += abs(prim(hi) - prim(lo))
    return signed, total


@dataclass(frozen=True)
class Potential:
    """A real potential q in L1(R), compactly supported.

    kind is one of "step_sum", "piecewise_polynomial",
    "truncated_analytic".  For the analytic kind, ``radius`` is the
    truncation half-width and ``tail_tol`` bounds the discarded mass
    (certified at construction from the closed-form tail of each term).
    """

    kind: str
    pieces: tuple = ()
    radius: float = 0.0
    tail_tol: float = 1e-12
    norm_tol: float = 1e-10

    def __post_init__(self):
        if self.kind in ("step_sum", "piecewise_polynomial"):
            ordered = tuple(sorted(self.pieces, key=lambda p: p.a))
            object.__setattr__(self, "pieces", ordered)
            _check_disjoint(ordered)
        elif self.kind == "truncated_analytic":
            if self.radius <= 0 and self.pieces:
                raise ValueError("truncated_analytic needs a positive radius")
            for t in self.pieces:
                if t.formula not in _FORMULAS:
                    raise ValueError(f"unknown formula {t.formula!r}")
                if t.width <= 0:
                    raise ValueError("formula width must be positive")
            tail = self.certified_tail()
            if tail > self.tail_tol:
                raise ValueError(
                    f"truncation tail {tail:.3e} exceeds tolerance {self.tail_tol:.3e};"
                    " enlarge the radius"
                )
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    # -- evaluation ----------------------------------------------------

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.zeros(xs.shape, dtype=float)
        if self.kind == "step_sum":
            for p in self.pieces:
                out[(xs >= p.a) & (xs < p.b)] = p.height
        elif self.kind == "piecewise_polynomial":
            for p in self.pieces:
                m = (xs >= p.a) & (xs < p.b)
                if np.any(m):
                    out[m] = np.polyval(np.asarray(p.coeffs)[::-1], xs[m] - p.a)
        else:
            m = (xs >= -self.radius) & (xs < self.radius)
            if np.any(m):
                acc = np.zeros(np.count_nonzero(m), dtype=float)
                for t in self.pieces:
                    shape = _FORMULAS[t.formula][0]
                    acc += t.amplitude * shape((xs[m] - t.center) / t.width)
                out[m] = acc
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out

    # -- geometry ------------------------------------------------------

    def support_radius(self) -> float:
        if self.kind == "truncated_analytic":
            return self.radius if self.pieces else 0.0
        if not self.pieces:
            return 0.0
        return max(max(abs(p.a), abs(p.b)) for p in self.pieces)

    def breakpoints(self) -> tuple[float, ...]:
        """Points where q or one of its derivatives may jump."""
        if self.kind == "truncated_analytic":
            return (-self.radius, self.radius) if self.pieces else ()
        pts: set[float] = set()
        for p in self.pieces:
            pts.add(p.a)
            pts.add(p.b)
        return tuple(sorted(pts))

    def is_zero(self) -> bool:
        return not self.pieces

    def certified_tail(self) -> float:
        """Closed-form bound on the mass of the untruncated profiles
        outside [-R, R]; zero for the compact families."""
        if self.kind != "truncated_analytic":
            return 0.0
        tail = 0.0
        for t in self.pieces:
            _, one_sided = _FORMULAS[t.formula]
            right = (self.radius - t.center) / t.width
            left = (self.radius + t.center) / t.width
            if right <= 0 or left <= 0:
                raise ValueError("truncation radius must exceed every term center")
            tail += abs(t.amplitude) * t.width * (one_sided(right) + one_sided(left))
        return tail

    # -- norms ---------------------------------------------------------

    @cached_property
    def _norms(self) -> Norms:
        if not self.pieces:
            return Norms(0.0, 0.0, 0.0)
        if self.kind == "step_sum":
            signed = sum(p.height * (p.b - p.a) for p in self.pieces)
            total = sum(abs(p.height) * (p.b - p.a) for p in self.pieces)
        elif self.kind == "piecewise_polynomial":
            signed = total = 0.0
            for p in self.pieces:
                s, t = _poly_abs_integral(p)
                signed += s
                total += t
        else:
            r = self.radius
            signed, e1 = integrate(self, -r, r, self.norm_tol)
            total, e2 = integrate(lambda x: np.abs(self(x)), -r, r, self.norm_tol)
            if e1 > self.norm_tol or e2 > self.norm_tol:
                raise ArithmeticError(
                    "potential norm quadrature did not converge within budget"
                )
        pos = 0.5 * (total + signed)
        neg = 0.5 * (total - signed)
        return Norms(total=total, positive=max(pos, 0.0), negative=max(neg, 0.0))

    def l1_norms(self) -> Norms:
        return self._norms

    # -- algebra ---------------------------------------------------------

    def scaled(self, c: float) -> "Potential":
        if self.kind == "step_sum":
            return Potential("step_sum",
                             tuple(StepPiece(p.a, p.b, c * p.height) for p in self.pieces))
        if self.kind == "piecewise_polynomial":
            return Potential("piecewise_polynomial",
                             tuple(PolyPiece(p.a, p.b, tuple(c * x for x in p.coeffs))
                                   for p in self.pieces))
        return Potential("truncated_analytic",
                         tuple(AnalyticTerm(t.formula, c * t.amplitude, t.width, t.center)
                               for t in self.pieces),
                         radius=self.radius,
                         tail_tol=max(self.tail_tol * abs(c), 1e-300) if c else 1e-300)

    def __add__(self, other: "Potential") -> "Potential":
        if not isinstance(other, Potential):
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.kind != other.kind:
            raise ValueError(
                "sums are supported within one potential family; "
                f"got {self.kind} + {other.kind}"
            )
        if self.kind == "truncated_analytic":
            return Potential("truncated_analytic",
                             self.pieces + other.pieces,
                             radius=max(self.radius, other.radius),
                             tail_tol=self.tail_tol + other.tail_tol)
        if self.kind == "step_sum":
            return _merge_steps(self, other)
        return _merge_polys(self, other)

    def __rmul__(self, c: float) -> "Potential":
        return self.scaled(float(c))

    # -- shooting support ------------------------------------------------

    def segment_profile(self, a: float, b: float):
        """Scalar evaluator for a breakpoint-free segment (a, b).

        Returns ("const", h) when q is constant there, else
        ("func", f) with f a plain-float callable.  The shooting
        integrator stays inside one segment per call, so the piece
        lookup is hoisted out of the stepping loop.
        """
        mid = 0.5 * (a + b)
        if self.kind == "step_sum":
            for p in self.pieces:
                if p.a <= mid < p.b:
                    return ("const", p.height)
            return ("const", 0.0)
        if self.kind == "piecewise_polynomial":
            for p in self.pieces:
                if p.a <= mid < p.b:
                    if len(p.coeffs) == 1:
                        return ("const", p.coeffs[0])
                    rev = tuple(reversed(p.coeffs))
                    pa = p.a

                    def f(x, rev=rev, pa=pa):
                        t = x - pa
                        acc = 0.0
                        for ck in rev:
                            acc = acc * t + ck
                        return acc

                    return ("func", f)
            return ("const", 0.0)
        if not self.pieces or mid < -self.radius or mid >= self.radius:
            return ("const", 0.0)
        terms = [(t.amplitude, t.width, t.center, t.formula) for t in self.pieces]

        def g(x, terms=terms):
            acc = 0.0
            for amp, w, c0, name in terms:
                t = (x - c0) / w
                if name == "gaussian":
                    acc += amp * math.exp(-t * t)
                elif name == "sech2":
                    acc += amp / math.cosh(t) ** 2
                else:
                    acc += amp * math.exp(-abs(t))
            return acc

        return ("func", g)


def _merge_steps(p1: Potential, p2: Potential) -> Potential:
    edges = sorted({p.a for p in p1.pieces + p2.pieces}
                   | {p.b for p in p1.pieces + p2.pieces})
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        h = p1(0.5 * (lo + hi)) + p2(0.5 * (lo + hi))
        if h != 0.0:
            pieces.append(StepPiece(lo, hi, float(h)))
    return Potential("step_sum", tuple(pieces))


def _shift_poly(coeffs: tuple[float, ...], delta: float) -> tuple[float, ...]:
    """Re-expand sum c_k t^k around t = t' + delta."""
    out = np.zeros(len(coeffs))
    for k, ck in enumerate(coeffs):
        # (t' + delta)^k
        for j in range(k + 1):
            out[j] += ck * math.comb(k, j) * delta ** (k - j)
    return tuple(out)


def _merge_polys(p1: Potential, p2: Potential) -> Potential:
    edges = sorted({p.a for p in p1.pieces + p2.pieces}
                   | {p.b for p in p1.pieces + p2.pieces})
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        acc = None
        for src in (p1, p2):
            for p in src.pieces:
                if p.a <= mid < p.b:
                    shifted = _shift_poly(p.coeffs, lo - p.a)
                    if acc is None:
                        acc = np.zeros(max(len(shifted), 1))
                    if len(shifted) > len(acc):
                        acc = np.concatenate([acc, np.zeros(len(shifted) - len(acc))])
                    acc[: len(shifted)] += shifted
        if acc is not None and np.any(acc != 0.0):
            pieces.append(PolyPiece(lo, hi, tuple(acc)))
    return Potential("piecewise_polynomial", tuple(pieces))


# -- stock potentials ----------------------------------------------------

def zero_potential() -> Potential:
    return Potential("step_sum", ())


def square_well(depth: float, half_width: float = 1.0, center: float = 0.0) -> Potential:
    """q = -depth on [center - half_width, center + half_width)."""
    return Potential("step_sum",
                     (StepPiece(center - half_width, center + half_width, -float(depth)),))


def sgn_step(height: float = 1.0, half_width: float = 1.0) -> Potential:
    """q = +height on [0, w), -height on [-w, 0)."""
    return Potential("step_sum",
                     (StepPiece(-half_width, 0.0, -float(height)),
                      StepPiece(0.0, half_width, float(height))))


def two_bump(depth1: float = 1.0, depth2: float = 1.0,
             gap: float = 1.0, width: float = 1.0) -> Potential:
    """Two square wells separated by a gap centered at the origin."""
    g = 0.5 * gap
    return Potential("step_sum",
                     (StepPiece(-g - width, -g, -float(depth1)),
                      StepPiece(g, g + width, -float(depth2))))


def gaussian_well(depth: float = 1.0, width: float = 1.0, radius: float = 8.0,
                  center: float = 0.0, tail_tol: float = 1e-9) -> Potential:
    """q = -depth exp(-((x - center)/width)^2), truncated to |x| <= radius."""
    return Potential("truncated_analytic",
                     (AnalyticTerm("gaussian", -float(depth), float(width), float(center)),),
                     radius=float(radius), tail_tol=tail_tol)


# -- config (de)serialization --------------------------------------------

def potential_from_config(spec: dict) -> Potential:
    try:
        kind = spec["kind"]
    except (KeyError, TypeError):
        raise ValueError("potential config needs a 'kind' field") from None
    scale = float(spec.get("scale", 1.0))
    if kind == "step_sum":
        pieces = tuple(StepPiece(float(a), float(b), float(h))
                       for a, b, h in spec.get("pieces", []))
        q = Potential("step_sum", pieces)
    elif kind == "piecewise_polynomial":
        pieces = tuple(PolyPiece(float(a), float(b), tuple(float(c) for c in cs))
                       for a, b, cs in spec.get("pieces", []))
        q = Potential("piecewise_polynomial", pieces)
    elif kind == "truncated_analytic":
        terms = tuple(AnalyticTerm(str(t["formula"]), float(t["amplitude"]),
                                   float(t["width"]), float(t.get("center", 0.0)))
                      for t in spec.get("terms", []))
        q = Potential("truncated_analytic", terms,
                      radius=float(spec.get("radius", 8.0)),
                      tail_tol=float(spec.get("tail_tol", 1e-9)))
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    return q.scaled(scale) if scale != 1.0 else q


def potential_to_config(q: Potential) -> dict:
    if q.kind == "step_sum":
        return {"kind": "step_sum",
                "pieces": [[p.a, p.b, p.height] for p in q.pieces]}
    if q.kind == "piecewise_polynomial":
        return {"kind": "piecewise_polynomial",
                "pieces": [[p.a, p.b, list(p.coeffs)] for p in q.pieces]}
    return {"kind": "truncated_analytic",
            "terms": [{"formula": t.formula, "amplitude": t.amplitude,
                       "width": t.width, "center": t.center} for t in q.pieces],
            "radius": q.radius, "tail_tol": q.tail_tol}
