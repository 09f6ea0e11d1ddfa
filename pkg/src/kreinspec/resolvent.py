"""Free resolvent of B0 = sgn(x) (-d^2/dx^2) for non-real spectral points.

For lambda in the open upper half-plane the resolvent (B0 - lambda)^{-1}
is an integral operator with a bounded, explicitly known kernel.  The
kernel splits into a rank-style part C and a convolution-style part D;
every exponent appearing below has non-positive real part, which is
what makes the pointwise bound |K| <= |lambda|^{-1/2} work and keeps
the evaluation overflow-free for |x|, |y| up to 1e4.

All branches are expressed through the principal square root taken with
Re sqrt(lambda) > 0 and Im sqrt(lambda) > 0, and through the constant
alpha = (1 - i)/2 (so |alpha|^2 = 1/2, alpha + conj(alpha) = 1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .quadrature import (
    CompositeGrid,
    cumulative_from_left,
    gauss_legendre,
    grid_quadrature,
    partial_weights,
)

ALPHA = 0.5 * (1.0 - 1.0j)
ALPHA_BAR = 0.5 * (1.0 + 1.0j)


def principal_sqrt(lam: complex) -> complex:
    """Square root of lambda with both real and imaginary parts positive.

    Defined for Im lambda > 0 only; computed in half-angle form
    sqrt|lambda| * exp(i arg(lambda)/2) with arg in (0, pi), so the
    result never leaves the open first quadrant.
    """
    lam = complex(lam)
    if not lam.imag > 0:
        raise ValueError(f"spectral parameter must satisfy Im lambda > 0, got {lam}")
    r = math.sqrt(abs(lam))
    half = 0.5 * math.atan2(lam.imag, lam.real)
    return complex(r * math.cos(half), r * math.sin(half))


@dataclass(frozen=True)
class SpectralParameter:
    """lambda together with its principal square root, validated once."""

    lam: complex
    sqrt_lam: complex

    @classmethod
    def of(cls, lam: complex) -> "SpectralParameter":
        return cls(lam=complex(lam), sqrt_lam=principal_sqrt(lam))


def spectral(lam: complex) -> SpectralParameter:
    return SpectralParameter.of(lam)


@dataclass(frozen=True)
class KernelValue:
    c_part: complex
    d_part: complex

    @property
    def total(self) -> complex:
        return self.c_part + self.d_part


def kernel_K(sp: SpectralParameter, x: float, y: float) -> KernelValue:
    """Resolvent kernel at a single point, split into its C and D parts.

    Quadrant table (prefactor 1/(2 alpha sqrt(lambda)) applied to both):

        C:  x>=0,y>=0:  alpha e^{i s (x+y)}      D:  conj(alpha) e^{i s |x-y|}
            x>=0,y<0:  -e^{s (i x + y)}              0
            x<0, y>=0:  e^{s (x + i y)}              0
            x<0, y<0:  -conj(alpha) e^{s (x+y)}     -alpha e^{-s |x-y|}
    """
    s = sp.sqrt_lam
    pref = 1.0 / (2.0 * ALPHA * s)
    if x >= 0 and y >= 0:
        c = ALPHA * cmath.exp(1j * s * (x + y))
        d = ALPHA_BAR * cmath.exp(1j * s * abs(x - y))
    elif x >= 0 and y < 0:
        c = -cmath.exp(s * (1j * x + y))
        d = 0.0j
    elif x < 0 and y >= 0:
        c = cmath.exp(s * (x + 1j * y))
        d = 0.0j
    else:
        c = -ALPHA_BAR * cmath.exp(s * (x + y))
        d = -ALPHA * cmath.exp(-s * abs(x - y))
    return KernelValue(c_part=pref * c, d_part=pref * d)


def kernel_matrix(sp: SpectralParameter, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """K_lambda(x_j, y_k) as a dense complex matrix (vectorized kernel_K)."""
    s = sp.sqrt_lam
    pref = 1.0 / (2.0 * ALPHA * s)
    X = np.asarray(x, dtype=float)[:, None]
    Y = np.asarray(y, dtype=float)[None, :]
    xp = X >= 0
    yp = Y >= 0
    out = np.empty(np.broadcast_shapes(X.shape, Y.shape), dtype=complex)
    pp = xp & yp
    pm = xp & ~yp
    mp_ = ~xp & yp
    mm = ~xp & ~yp
    XY = np.broadcast_to(X + Y, out.shape)
    AD = np.abs(np.broadcast_to(X - Y, out.shape))
    IX = np.broadcast_to(1j * X + Y, out.shape)
    YI = np.broadcast_to(X + 1j * Y, out.shape)
    out[pp] = ALPHA * np.exp(1j * s * XY[pp]) + ALPHA_BAR * np.exp(1j * s * AD[pp])
    out[pm] = -np.exp(s * IX[pm])
    out[mp_] = np.exp(s * YI[mp_])
    out[mm] = -ALPHA_BAR * np.exp(s * XY[mm]) - ALPHA * np.exp(-s * AD[mm])
    return pref * out


def _split_eval(x, pos, neg):
    """Evaluate pos on x >= 0 and neg on x < 0 without touching the
    other branch (avoids spurious overflow in dead branches)."""
    xs = np.asarray(x, dtype=float)
    out = np.empty(xs.shape, dtype=complex)
    m = xs >= 0
    if np.any(m):
        out[m] = pos(xs[m])
    if np.any(~m):
        out[~m] = neg(xs[~m])
    if np.ndim(x) == 0:
        return complex(out)
    return out


def solution_u(sp: SpectralParameter, x):
    """(u(x), u'(x)): the solution of sgn(x)(-f'') = lambda f recessive at +inf.

    u = e^{i s x} for x >= 0 and conj(alpha) e^{s x} + alpha e^{-s x}
    for x < 0; continuous with continuous derivative at 0.
    """
    s = sp.sqrt_lam
    val = _split_eval(
        x,
        lambda t: np.exp(1j * s * t),
        lambda t: ALPHA_BAR * np.exp(s * t) + ALPHA * np.exp(-s * t),
    )
    der = _split_eval(
        x,
        lambda t: 1j * s * np.exp(1j * s * t),
        lambda t: s * (ALPHA_BAR * np.exp(s * t) - ALPHA * np.exp(-s * t)),
    )
    return val, der


def solution_v(sp: SpectralParameter, x):
    """(v(x), v'(x)): the companion solution recessive at -inf.

    v = alpha e^{i s x} + conj(alpha) e^{-i s x} for x >= 0 and e^{s x}
    for x < 0.
    """
    s = sp.sqrt_lam
    val = _split_eval(
        x,
        lambda t: ALPHA * np.exp(1j * s * t) + ALPHA_BAR * np.exp(-1j * s * t),
        lambda t: np.exp(s * t),
    )
    der = _split_eval(
        x,
        lambda t: 1j * s * (ALPHA * np.exp(1j * s * t) - ALPHA_BAR * np.exp(-1j * s * t)),
        lambda t: s * np.exp(s * t),
    )
    return val, der


def wronskian(sp: SpectralParameter, x: float = 0.0) -> complex:
    """u v' - u' v, constant in x with value 2 alpha sqrt(lambda)."""
    u, du = solution_u(sp, x)
    v, dv = solution_v(sp, x)
    return u * dv - du * v


def kernel_bound(sp: SpectralParameter) -> float:
    """The pointwise bound |K_lambda| <= |lambda|^{-1/2}."""
    return 1.0 / math.sqrt(abs(sp.lam))


def _sign_nodes(x: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def apply_resolvent(sp: SpectralParameter, grid: CompositeGrid,
                    g: np.ndarray) -> np.ndarray:
    """(B0 - lambda)^{-1} g at the grid nodes, for g supported on the grid.

    Uses the split form

        (T g)(x) = [ u(x) int_a^x  v s g  +  v(x) int_x^b  u s g ] / W

    with W = 2 alpha sqrt(lambda) and s = sgn; both partial integrals
    come from the cumulative panel quadrature in one O(N) pass.  The
    grid must carry a breakpoint at 0, where u, v and sgn lose
    smoothness.
    """
    if not grid.has_breakpoint(0.0):
        raise ValueError("resolvent grid must have a breakpoint at x = 0")
    g = np.asarray(g, dtype=complex)
    if g.shape != grid.nodes.shape:
        raise ValueError("g must be sampled at the grid nodes")
    s = sp.sqrt_lam
    w = 2.0 * ALPHA * s
    u, _ = solution_u(sp, grid.nodes)
    v, _ = solution_v(sp, grid.nodes)
    sgn = _sign_nodes(grid.nodes)
    left = cumulative_from_left(grid, v * sgn * g)
    total = grid_quadrature(grid, u * sgn * g)
    right = total - cumulative_from_left(grid, u * sgn * g)
    return (u * left + v * right) / w


def _partial_weights_at(order: int, t: float) -> np.ndarray:
    """Weights w_k(t) with sum_k w_k(t) f_k = integral over [-1, t] of the
    interpolant of panel samples f; exact for the degree-(n-1) interpolant."""
    rule = gauss_legendre(order)
    sub = gauss_legendre(max(1, (order + 2) // 2 + 1))
    mid = 0.5 * (t - 1.0)
    half = 0.5 * (t + 1.0)
    pts = mid + half * sub.nodes
    # Lagrange basis values at pts, all k at once
    n = order
    vals = np.ones((n, len(pts)))
    for k in range(n):
        xk = rule.nodes[k]
        den = 1.0
        for j in range(n):
            if j == k:
                continue
            vals[k] *= pts - rule.nodes[j]
            den *= xk - rule.nodes[j]
        vals[k] /= den
    return half * (vals @ sub.weights)


def resolvent_function(sp: SpectralParameter, grid: CompositeGrid, g: np.ndarray):
    """Callable x -> (T_lambda g)(x) for arbitrary x in [grid.a, grid.b].

    Same split form as apply_resolvent, with the partial panel handled
    by interpolatory weights at the requested point.  Intended for
    diagnostics (finite-difference residual checks at off-node points).
    """
    if not grid.has_breakpoint(0.0):
        raise ValueError("resolvent grid must have a breakpoint at x = 0")
    g = np.asarray(g, dtype=complex)
    s = sp.sqrt_lam
    w = 2.0 * ALPHA * s
    u, _ = solution_u(sp, grid.nodes)
    v, _ = solution_v(sp, grid.nodes)
    sgn = _sign_nodes(grid.nodes)
    av = v * sgn * g
    au = u * sgn * g
    n = grid.order
    rule_w = gauss_legendre(n).weights
    panel_int_v = np.array([
        0.5 * (grid.breaks[p + 1] - grid.breaks[p]) * np.dot(rule_w, av[p * n:(p + 1) * n])
        for p in range(grid.panel_count)
    ])
    panel_int_u = np.array([
        0.5 * (grid.breaks[p + 1] - grid.breaks[p]) * np.dot(rule_w, au[p * n:(p + 1) * n])
        for p in range(grid.panel_count)
    ])
    cum_v = np.concatenate(([0.0], np.cumsum(panel_int_v)))
    cum_u = np.concatenate(([0.0], np.cumsum(panel_int_u)))
    total_u = cum_u[-1]

    def T(x: float) -> complex:
        if not grid.a <= x <= grid.b:
            raise ValueError("point outside the grid")
        p = int(np.searchsorted(grid.breaks, x, side="right") - 1)
        p = min(max(p, 0), grid.panel_count - 1)
        lo, hi = grid.panel_bounds(p)
        t = 2.0 * (x - lo) / (hi - lo) - 1.0
        pw = _partial_weights_at(n, t) * 0.5 * (hi - lo)
        sl = slice(p * n, (p + 1) * n)
        left = cum_v[p] + np.dot(pw, av[sl])
        right = total_u - (cum_u[p] + np.dot(pw, au[sl]))
        uu, _ = solution_u(sp, x)
        vv, _ = solution_v(sp, x)
        return (uu * left + vv * right) / w

    return T
