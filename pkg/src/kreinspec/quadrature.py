"""Gauss-Legendre panel quadrature on composite grids.

Everything downstream (kernel integrals, Nystrom grids, eigenfunction
norms) runs on the same machinery: a reference Gauss-Legendre rule on
[-1, 1], composite grids that never place a panel across a declared
breakpoint, and an adaptive integrator that bisects panels until an
embedded error estimate is met.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 64


@dataclass(frozen=True)
class PanelRule:
    """A Gauss-Legendre rule on the reference panel [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


def _legendre_and_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate P_n and P_n' by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    if n == 0:
        return p_prev, np.zeros_like(x)
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    # derivative from the standard identity, safe because GL nodes stay
    # strictly inside (-1, 1)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> PanelRule:
    """Gauss-Legendre nodes and weights on [-1, 1].

    Nodes are the roots of the degree-n Legendre polynomial, found by
    Newton iteration from the Chebyshev-like initial guess and polished
    to 1e-15.  Weights are 2 / ((1 - x^2) P_n'(x)^2).
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"panel order must be in [1, {MAX_ORDER}], got {order}")
    n = order
    k = np.arange(n)
    x = np.cos(np.pi * (k + 0.75) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # enforce the exact symmetry of the rule
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    idx = np.argsort(x)
    x = x[idx]
    w = w[idx]
    x.setflags(write=False)
    w.setflags(write=False)
    return PanelRule(order=n, nodes=x, weights=w)


def _lagrange_eval(ref_nodes: np.ndarray, k: int, t: np.ndarray) -> np.ndarray:
    """k-th Lagrange basis polynomial for the reference nodes, at t."""
    num = np.ones_like(t)
    den = 1.0
    xk = ref_nodes[k]
    for j, xj in enumerate(ref_nodes):
        if j == k:
            continue
        num = num * (t - xj)
        den *= xk - xj
    return num / den


@lru_cache(maxsize=None)
def partial_weights(order: int) -> np.ndarray:
    """Partial-panel weights W[j, k] = integral of ell_k over [-1, t_j].

    Row j integrates the degree-(n-1) interpolant of panel samples from
    the panel's left edge up to node t_j; full-panel weights are the
    usual GL weights.  Each entry is itself a GL integral of a
    polynomial of degree n-1, hence exact.
    """
    rule = gauss_legendre(order)
    n = order
    sub = gauss_legendre(max(1, (n + 2) // 2 + 1))
    w = np.empty((n, n))
    for j, tj in enumerate(rule.nodes):
        mid = 0.5 * (tj + (-1.0))
        half = 0.5 * (tj - (-1.0))
        pts = mid + half * sub.nodes
        for k in range(n):
            w[j, k] = half * np.dot(sub.weights, _lagrange_eval(rule.nodes, k, pts))
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class CompositeGrid:
    """Flattened Gauss-Legendre nodes over a partition of [a, b].

    ``breaks`` holds the panel boundaries (including a and b); nodes of
    panel p occupy the slice [p * order, (p + 1) * order).  Declared
    discontinuities must appear in ``breaks`` so that every panel sees a
    smooth integrand.
    """

    a: float
    b: float
    breaks: np.ndarray
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def panel_count(self) -> int:
        return len(self.breaks) - 1

    @property
    def size(self) -> int:
        return len(self.nodes)

    def has_breakpoint(self, x: float, tol: float = 1e-12) -> bool:
        return bool(np.min(np.abs(self.breaks - x)) <= tol)

    def panel_bounds(self, p: int) -> tuple[float, float]:
        return float(self.breaks[p]), float(self.breaks[p + 1])


def composite_grid(
    a: float,
    b: float,
    *,
    order: int = 10,
    max_spacing: float = 0.1,
    breakpoints: tuple[float, ...] | list[float] = (),
) -> CompositeGrid:
    """Build a composite grid with node spacing <= max_spacing.

    Breakpoints strictly inside (a, b) become panel boundaries; each
    smooth segment is split uniformly until the largest gap between
    consecutive nodes (panel edges included) is below max_spacing.
    """
    if not b > a:
        raise ValueError("grid requires b > a")
    if max_spacing <= 0:
        raise ValueError("max_spacing must be positive")
    rule = gauss_legendre(order)
    ref = np.concatenate(([-1.0], rule.nodes, [1.0]))
    ref_gap = float(np.max(np.diff(ref)))  # node spacing per unit panel half-width
    inner = sorted({float(x) for x in breakpoints if a < x < b})
    edges = [a] + inner + [b]
    breaks: list[float] = [a]
    for lo, hi in zip(edges[:-1], edges[1:]):
        seg = hi - lo
        # width w gives max node gap w * ref_gap / 2
        n_panels = max(1, int(np.ceil(seg * ref_gap / (2.0 * max_spacing))))
        step = seg / n_panels
        breaks.extend(lo + step * (i + 1) for i in range(n_panels))
    brk = np.asarray(breaks)
    mids = 0.5 * (brk[:-1] + brk[1:])
    halves = 0.5 * (brk[1:] - brk[:-1])
    nodes = (mids[:, None] + halves[:, None] * rule.nodes[None, :]).ravel()
    weights = (halves[:, None] * rule.weights[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    brk.setflags(write=False)
    return CompositeGrid(a=float(a), b=float(b), breaks=brk, order=order,
                         nodes=nodes, weights=weights)


def grid_quadrature(grid: CompositeGrid, values: np.ndarray) -> complex | float:
    """Integrate samples taken at the grid nodes."""
    return np.dot(grid.weights, values)


def cumulative_from_left(grid: CompositeGrid, values: np.ndarray) -> np.ndarray:
    """Integrals from grid.a up to each node, exact for the panel interpolants.

    Returns c with c[j] = integral over [a, x_j] of the per-panel
    polynomial interpolant of ``values``.  Within each panel the partial
    piece uses the partial-weight matrix; panels already passed
    contribute their full GL integral.
    """
    n = grid.order
    pw = partial_weights(n)
    vals = np.asarray(values)
    out = np.empty(grid.size, dtype=vals.dtype if vals.dtype.kind == "c" else float)
    acc = 0.0
    for p in range(grid.panel_count):
        lo, hi = grid.panel_bounds(p)
        half = 0.5 * (hi - lo)
        sl = slice(p * n, (p + 1) * n)
        seg = vals[sl]
        out[sl] = acc + half * (pw @ seg)
        acc = acc + half * np.dot(gauss_legendre(n).weights, seg)
    return out


def cumulative_from_right(grid: CompositeGrid, values: np.ndarray) -> np.ndarray:
    """Integrals from each node up to grid.b (complement of the left sums)."""
    total = grid_quadrature(grid, values)
    return total - cumulative_from_left(grid, values)


def integrate(
    f,
    a: float,
    b: float,
    tol: float = 1e-10,
    *,
    breakpoints: tuple[float, ...] | list[float] = (),
    order: int = 10,
    max_panels: int = 20000,
) -> tuple[float, float]:
    """Adaptive panel integration of a vectorized integrand.

    Each panel is accepted when the discrepancy between its one-shot GL
    value and the two-half refinement is below the local share of tol;
    otherwise the halves are pushed back on the stack.  Returns
    (value, error_estimate).  The caller decides whether an estimate
    above tol is fatal; the budget cap keeps runaway integrands from
    looping forever.
    """
    if b <= a:
        if b == a:
            return 0.0, 0.0
        raise ValueError("integrate requires b >= a")
    rule = gauss_legendre(order)

    def panel_value(lo: float, hi: float) -> float:
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        return half * np.dot(rule.weights, f(mid + half * rule.nodes))

    inner = sorted({float(x) for x in breakpoints if a < x < b})
    edges = [a] + inner + [b]
    stack = [(lo, hi, panel_value(lo, hi)) for lo, hi in zip(edges[:-1], edges[1:])]
    total_len = b - a
    value = 0.0
    err = 0.0
    panels = 0
    while stack:
        lo, hi, coarse = stack.pop()
        mid = 0.5 * (lo + hi)
        left = panel_value(lo, mid)
        right = panel_value(mid, hi)
        fine = left + right
        disc = abs(fine - coarse)
        panels += 1
        local_tol = tol * (hi - lo) / total_len
        if disc <= local_tol or panels >= max_panels or (hi - lo) < 1e-14 * total_len:
            value += fine
            err += disc
        else:
            stack.append((lo, mid, left))
            stack.append((mid, hi, right))
    return value, err
