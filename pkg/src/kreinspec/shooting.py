"""Two-sided shooting route to the non-real eigenvalues.

On each half line the eigenvalue equation decouples into a scalar ODE:

    x > 0:  f'' = (q(x) - lambda) f     decaying branch  e^{i sqrt(lambda) x}
    x < 0:  f'' = (q(x) + lambda) f     decaying branch  e^{sqrt(lambda) x}

with the principal square root (positive real and imaginary parts for
lambda in the open upper half plane), so both reference branches decay.
Integrating the right branch from the edge of the support down to 0 and
the left branch up to 0 gives the matching determinant

    D(lambda) = f_plus(0) f_minus'(0) - f_minus(0) f_plus'(0),

whose zeros in the upper half plane are exactly the non-real
eigenvalues.  For q = 0 the determinant is (1 - i) sqrt(lambda).

This route never touches the integral kernel, so it is an independent
check on the Birman-Schwinger determinant: the pipeline requires both
to agree before an eigenvalue is reported.

States carry an accumulated log of renormalization factors.  The raw
pair (f, f'/omega) is rescaled back toward unit size whenever its
magnitude leaves [1e-3, 1e3] (so it never comes near the 1e10 hard
bound); the factors are real and positive, so the phase of the
matching determinant is untouched and the true value is recovered as
d_scaled * exp(log_scale), which is what analytic continuation in
lambda requires (the rescale events themselves move with lambda).
Keeping the working scale near 1 also keeps the absolute term of the
step error control from silently loosening the relative accuracy on
strongly growing solutions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .potentials import Potential
from .quadrature import CompositeGrid, composite_grid, grid_quadrature
from .resolvent import principal_sqrt

RENORM_THRESHOLD = 1e10
DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-13

# Dormand-Prince 5(4) coefficients
_C2, _C3, _C4, _C5, _C6 = 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
# fifth-minus-fourth order error weights
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)


@dataclass(frozen=True)
class ShootingState:
    """Scaled solution data at a point: true f = f * exp(log_scale)."""

    x: float
    f: complex
    f_prime: complex
    log_scale: float


@dataclass(frozen=True)
class SideTrace:
    """States recorded at requested points along one half line.

    Arrays are ordered by ascending x regardless of the integration
    direction.  true f(x_i) = f[i] * exp(log_scale[i]).
    """

    xs: np.ndarray
    f: np.ndarray
    f_prime: np.ndarray
    log_scale: np.ndarray


@dataclass(frozen=True)
class MatchValue:
    """Matching determinant in scaled form.

    true D = d_scaled * exp(log_scale); log_scale is real, so the phase
    of d_scaled is already the phase of D.
    """

    lam: complex
    d_scaled: complex
    log_scale: float
    right_state: ShootingState
    left_state: ShootingState

    @property
    def value(self) -> complex:
        return self.d_scaled * math.exp(self.log_scale)

    @property
    def log_abs(self) -> float:
        if self.d_scaled == 0:
            return -math.inf
        return math.log(abs(self.d_scaled)) + self.log_scale


class _Stepper:
    """Adaptive DP45 on the first-order system (f, f')' = (f', c(x) f).

    One instance per half-line sweep; keeps the running step size and
    the renormalization log.  The coefficient callable changes between
    segments (it is frozen per call to ``run``), so FSAL reuse is reset
    at segment boundaries only.
    """

    __slots__ = ("rtol", "atol", "h", "log_scale", "steps", "rejected")

    def __init__(self, rtol: float, atol: float):
        self.rtol = rtol
        self.atol = atol
        self.h = 0.0
        self.log_scale = 0.0
        self.steps = 0
        self.rejected = 0

    def run(self, c_const, c_func, x0: float, x1: float,
            f: complex, fp: complex) -> tuple[complex, complex]:
        """Advance from x0 to x1 (either direction); returns (f, f')."""
        if x1 == x0:
            return f, fp
        rtol, atol = self.rtol, self.atol
        direction = 1.0 if x1 > x0 else -1.0
        span = abs(x1 - x0)
        if c_func is None:
            c_here = c_const
        else:
            c_here = c_func(x0)
        # frequency scale: f' runs a factor omega hotter than f, so the
        # pair is measured as one object with f' weighted by 1/omega
        omega = math.sqrt(abs(c_here)) + 1.0
        h = self.h
        if h == 0.0 or h * direction <= 0.0:
            h = direction * min(span, 0.1 / omega)
        if abs(h) > span:
            h = direction * span
        x = x0
        sigma = max(abs(f), abs(fp) / omega)
        if sigma > 1e3 or (0.0 < sigma < 1e-3):
            f /= sigma
            fp /= sigma
            self.log_scale += math.log(sigma)
        k1f = fp
        k1p = c_here * f
        while True:
            remaining = x1 - x
            if direction * remaining <= 1e-15 * (abs(x) + abs(x1)) + 1e-300:
                break
            if abs(h) > abs(remaining):
                h = remaining
            # stage evaluations; c is constant per segment or sampled
            if c_func is None:
                c2 = c3 = c4 = c5 = c6 = c7 = c_const
            else:
                c2 = c_func(x + _C2 * h)
                c3 = c_func(x + _C3 * h)
                c4 = c_func(x + _C4 * h)
                c5 = c_func(x + _C5 * h)
                c6 = c_func(x + h)
                c7 = c6
            yf = f + h * (_A21 * k1f)
            yp = fp + h * (_A21 * k1p)
            k2f = yp
            k2p = c2 * yf
            yf = f + h * (_A31 * k1f + _A32 * k2f)
            yp = fp + h * (_A31 * k1p + _A32 * k2p)
            k3f = yp
            k3p = c3 * yf
            yf = f + h * (_A41 * k1f + _A42 * k2f + _A43 * k3f)
            yp = fp + h * (_A41 * k1p + _A42 * k2p + _A43 * k3p)
            k4f = yp
            k4p = c4 * yf
            yf = f + h * (_A51 * k1f + _A52 * k2f + _A53 * k3f + _A54 * k4f)
            yp = fp + h * (_A51 * k1p + _A52 * k2p + _A53 * k3p + _A54 * k4p)
            k5f = yp
            k5p = c5 * yf
            yf = f + h * (_A61 * k1f + _A62 * k2f + _A63 * k3f + _A64 * k4f
                          + _A65 * k5f)
            yp = fp + h * (_A61 * k1p + _A62 * k2p + _A63 * k3p + _A64 * k4p
                           + _A65 * k5p)
            k6f = yp
            k6p = c6 * yf
            new_f = f + h * (_B1 * k1f + _B3 * k3f + _B4 * k4f + _B5 * k5f
                             + _B6 * k6f)
            new_p = fp + h * (_B1 * k1p + _B3 * k3p + _B4 * k4p + _B5 * k5p
                              + _B6 * k6p)
            k7f = new_p
            k7p = c7 * new_f
            err_f = h * (_E1 * k1f + _E3 * k3f + _E4 * k4f + _E5 * k5f
                         + _E6 * k6f + _E7 * k7f)
            err_p = h * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p
                         + _E6 * k6p + _E7 * k7p)
            sigma_new = max(abs(new_f), abs(new_p) / omega)
            tol = atol + rtol * max(sigma, sigma_new)
            err = max(abs(err_f), abs(err_p) / omega) / tol
            if err <= 1.0:
                x += h
                f, fp = new_f, new_p
                k1f, k1p = k7f, k7p
                sigma = sigma_new
                self.steps += 1
                # keep the pair near unit scale so the absolute floor in
                # the error test never masks relative accuracy; factors
                # are real, so the phase survives and exp(log_scale)
                # restores the true magnitude
                if sigma > 1e3 or (0.0 < sigma < 1e-3):
                    f /= sigma
                    fp /= sigma
                    k1f /= sigma
                    k1p /= sigma
                    self.log_scale += math.log(sigma)
                    sigma = 1.0
            else:
                self.rejected += 1
            factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= factor
        self.h = h
        return f, fp


def _segment_edges(q: Potential, lo: float, hi: float) -> list[float]:
    """Sorted q-breakpoints restricted to (lo, hi), with lo/hi appended."""
    inner = [b for b in q.breakpoints() if lo + 1e-14 < b < hi - 1e-14]
    return [lo] + sorted(inner) + [hi]


def _integrate_half_line(q: Potential, lam: complex, side: int, L: float,
                         rtol: float, atol: float,
                         record_at: np.ndarray | None) -> tuple[ShootingState, SideTrace | None]:
    """Sweep one half line toward the origin.

    side=+1: start at x=L with the decaying branch e^{i s x}, integrate
    down to 0 with coefficient q - lambda.  side=-1: start at x=-L with
    e^{s x}, integrate up to 0 with coefficient q + lambda.
    """
    s = principal_sqrt(lam)
    if side > 0:
        x_start, x_end = L, 0.0
        f = cmath.exp(1j * s * L)
        fp = 1j * s * f
        shift = -lam
    else:
        x_start, x_end = -L, 0.0
        f = cmath.exp(-s * L)
        fp = s * f
        shift = lam

    rec_x: list[float] = []
    rec_f: list[complex] = []
    rec_fp: list[complex] = []
    rec_ls: list[float] = []

    def record(x: float, f: complex, fp: complex, ls: float) -> None:
        rec_x.append(x)
        rec_f.append(f)
        rec_fp.append(fp)
        rec_ls.append(ls)

    want = None
    if record_at is not None:
        lo, hi = (0.0, L) if side > 0 else (-L, 0.0)
        inside = record_at[(record_at >= lo - 1e-12) & (record_at <= hi + 1e-12)]
        want = np.sort(np.clip(inside, lo, hi))
        if side > 0:
            want = want[::-1]          # integration runs from L to 0

    stepper = _Stepper(rtol, atol)
    if L == 0.0:
        if want is not None:
            for xw in want:
                record(float(xw), f, fp, 0.0)
        state = ShootingState(x=0.0, f=f, f_prime=fp, log_scale=0.0)
        return state, _make_trace(rec_x, rec_f, rec_fp, rec_ls, want is not None)

    edges = _segment_edges(q, *( (0.0, L) if side > 0 else (-L, 0.0) ))
    segments = list(zip(edges[:-1], edges[1:]))
    if side > 0:
        segments = segments[::-1]       # walk from the far edge inward

    pos = 0                             # cursor into want
    if want is not None and pos < len(want) and _close(want[pos], x_start):
        record(x_start, f, fp, stepper.log_scale)
        pos += 1
    for a, b in segments:
        seg_from, seg_to = (b, a) if side > 0 else (a, b)
        kind, payload = q.segment_profile(a, b)
        if kind == "const":
            c_const: complex | None = complex(payload) + shift
            c_func = None
        else:
            c_const = None
            qf = payload
            c_func = lambda x, qf=qf, shift=shift: qf(x) + shift
        x_here = seg_from
        if want is not None:
            while pos < len(want):
                xw = float(want[pos])
                inside = (seg_to < xw < x_here) if side > 0 else (x_here < xw < seg_to)
                if not inside:
                    break
                f, fp = stepper.run(c_const, c_func, x_here, xw, f, fp)
                record(xw, f, fp, stepper.log_scale)
                x_here = xw
                pos += 1
        f, fp = stepper.run(c_const, c_func, x_here, seg_to, f, fp)
        if want is not None and pos < len(want) and _close(want[pos], seg_to):
            record(seg_to, f, fp, stepper.log_scale)
            pos += 1
    state = ShootingState(x=0.0, f=f, f_prime=fp, log_scale=stepper.log_scale)
    return state, _make_trace(rec_x, rec_f, rec_fp, rec_ls, want is not None)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * (1.0 + abs(a) + abs(b))


def _make_trace(xs, f, fp, ls, wanted: bool) -> SideTrace | None:
    if not wanted:
        return None
    order = np.argsort(np.asarray(xs))
    return SideTrace(xs=np.asarray(xs, dtype=float)[order],
                     f=np.asarray(f, dtype=complex)[order],
                     f_prime=np.asarray(fp, dtype=complex)[order],
                     log_scale=np.asarray(ls, dtype=float)[order])


def integrate_from_right(q: Potential, lam: complex, *,
                         truncation_radius: float | None = None,
                         rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                         record_at: np.ndarray | None = None):
    """Decaying solution on x >= 0 carried down to the origin.

    Returns (state_at_zero, trace); trace is None unless record_at was
    given.  The truncation radius defaults to the support radius: the
    starting values are exact there, so no padding is required.
    """
    L = q.support_radius() if truncation_radius is None else float(truncation_radius)
    if L < q.support_radius() - 1e-12:
        raise ValueError("truncation radius must cover the support of q")
    _require_upper(lam)
    return _integrate_half_line(q, lam, +1, L, rtol, atol, record_at)


def integrate_from_left(q: Potential, lam: complex, *,
                        truncation_radius: float | None = None,
                        rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                        record_at: np.ndarray | None = None):
    """Decaying solution on x <= 0 carried up to the origin."""
    L = q.support_radius() if truncation_radius is None else float(truncation_radius)
    if L < q.support_radius() - 1e-12:
        raise ValueError("truncation radius must cover the support of q")
    _require_upper(lam)
    return _integrate_half_line(q, lam, -1, L, rtol, atol, record_at)


def _require_upper(lam: complex) -> None:
    if not (lam.imag > 0):
        raise ValueError("shooting works in the open upper half plane;"
                         " mirror conjugate eigenvalues afterwards")


def matching_det(q: Potential, lam: complex, *,
                 truncation_radius: float | None = None,
                 rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL) -> MatchValue:
    """D(lambda) = f_plus(0) f_minus'(0) - f_minus(0) f_plus'(0).

    Scaled form: true D = d_scaled * exp(log_scale).  For q = 0 this
    reduces to (1 - i) sqrt(lambda) exactly.
    """
    right, _ = integrate_from_right(q, lam, truncation_radius=truncation_radius,
                                    rtol=rtol, atol=atol)
    left, _ = integrate_from_left(q, lam, truncation_radius=truncation_radius,
                                  rtol=rtol, atol=atol)
    d = right.f * left.f_prime - left.f * right.f_prime
    return MatchValue(lam=lam, d_scaled=d,
                      log_scale=right.log_scale + left.log_scale,
                      right_state=right, left_state=left)


def match_function(q: Potential, *, rtol: float = DEFAULT_RTOL,
                   atol: float = DEFAULT_ATOL, log_shift: float = 0.0):
    """lambda -> D(lambda) * exp(-log_shift) as a plain analytic callable.

    Renormalization factors are folded back in, so the returned values
    continue analytically across rescale events; the optional shift
    guards against overflow for strongly growing interior solutions.
    """

    def F(lam: complex) -> complex:
        mv = matching_det(q, lam, rtol=rtol, atol=atol)
        return mv.d_scaled * math.exp(mv.log_scale - log_shift)

    return F


@dataclass(frozen=True)
class Eigenpair:
    """Normalized eigenfunction samples for a confirmed eigenvalue.

    values/derivatives live on grid.nodes and are scaled so the full
    line L2 norm (interior quadrature plus the two analytic tails) is 1.
    Outside [-L, L] the function is exactly tail_amp_right * e^{i s x}
    on the right and tail_amp_left * e^{s x} on the left.
    """

    lam: complex
    sqrt_lam: complex
    grid: CompositeGrid
    values: np.ndarray
    derivatives: np.ndarray
    tail_amp_right: complex
    tail_amp_left: complex
    matching_residual: float
    spurious: bool

    @property
    def truncation_radius(self) -> float:
        return self.grid.b

    def tail_value(self, x: float) -> complex:
        """Closed-form value outside the sampled interval."""
        if x >= self.grid.b:
            return self.tail_amp_right * cmath.exp(1j * self.sqrt_lam * x)
        if x <= self.grid.a:
            return self.tail_amp_left * cmath.exp(self.sqrt_lam * x)
        raise ValueError("point lies inside the sampled interval")


def eigenfunction_samples(q: Potential, lam: complex, *,
                          panel_order: int = 10,
                          max_spacing: float | None = None,
                          rtol: float = DEFAULT_RTOL,
                          atol: float = DEFAULT_ATOL,
                          mismatch_tol: float = 1e-6) -> Eigenpair:
    """Glued, normalized eigenfunction for a (candidate) eigenvalue.

    The two half-line solutions are joined at 0 by matching values
    (falling back to derivatives when the value at 0 is negligibly
    small); the leftover mismatch, relative to the size of the cross
    terms, is reported and flags spurious determinant zeros.
    """
    _require_upper(lam)
    L = q.support_radius()
    if L <= 0:
        raise ValueError("zero potential has no eigenfunctions to sample")
    s = principal_sqrt(lam)
    if max_spacing is None:
        max_spacing = min(0.05, 0.25 / math.sqrt(abs(lam))) if abs(lam) > 0 else 0.05
    grid = composite_grid(-L, L, order=panel_order, max_spacing=max_spacing,
                          breakpoints=tuple(q.breakpoints()) + (0.0,))
    right_state, right_tr = integrate_from_right(q, lam, rtol=rtol, atol=atol,
                                                 record_at=grid.nodes)
    left_state, left_tr = integrate_from_left(q, lam, rtol=rtol, atol=atol,
                                              record_at=grid.nodes)
    fr0, fr0p, lr = right_state.f, right_state.f_prime, right_state.log_scale
    fl0, fl0p, ll = left_state.f, left_state.f_prime, left_state.log_scale

    d = fr0 * fl0p - fl0 * fr0p
    cross = max(abs(fr0 * fl0p), abs(fl0 * fr0p))
    deriv_cross = max(abs(fr0p), abs(fl0p))
    residual = abs(d) / cross if cross > 0 else math.inf
    # glue by values unless f(0) is essentially a node of the eigenfunction
    if abs(fr0) > 1e-10 * max(abs(fr0), abs(fr0p) / (abs(s) + 1.0)) and abs(fr0) > 0:
        mu = fl0 / fr0
    else:
        mu = fl0p / fr0p
        residual = abs(d) / (abs(fl0p * fr0) + abs(fl0 * fr0p)) if cross > 0 else math.inf
    spurious = not (residual < mismatch_tol)

    # express everything in units where true f = g * exp(ll)
    mask_left = grid.nodes < 0.0
    n_nodes = grid.size
    g = np.empty(n_nodes, dtype=complex)
    gp = np.empty(n_nodes, dtype=complex)
    lt, rt = left_tr, right_tr
    g_left = lt.f * np.exp(lt.log_scale - ll)
    gp_left = lt.f_prime * np.exp(lt.log_scale - ll)
    g_right = mu * rt.f * np.exp(rt.log_scale - lr)
    gp_right = mu * rt.f_prime * np.exp(rt.log_scale - lr)
    # traces are ascending in x; grid nodes are too, with 0 a panel edge
    g[mask_left] = g_left[lt.xs < 0.0]
    gp[mask_left] = gp_left[lt.xs < 0.0]
    g[~mask_left] = g_right[rt.xs >= 0.0]
    gp[~mask_left] = gp_right[rt.xs >= 0.0]

    amp_left = cmath.exp(-ll + 0j)              # true e^{s x} branch amplitude
    amp_right = mu * cmath.exp(-lr + 0j)        # true e^{i s x} branch amplitude
    interior = grid_quadrature(grid, np.abs(g) ** 2)
    tail_left = abs(amp_left) ** 2 * math.exp(-2.0 * s.real * L) / (2.0 * s.real)
    tail_right = abs(amp_right) ** 2 * math.exp(-2.0 * s.imag * L) / (2.0 * s.imag)
    norm = math.sqrt(interior + tail_left + tail_right)
    if not (norm > 0 and math.isfinite(norm)):
        raise ArithmeticError("eigenfunction normalization failed")

    return Eigenpair(lam=lam, sqrt_lam=s, grid=grid,
                     values=g / norm, derivatives=gp / norm,
                     tail_amp_right=amp_right / norm,
                     tail_amp_left=amp_left / norm,
                     matching_residual=float(residual),
                     spurious=bool(spurious))
