"""Eigenvalue bounds with margins, the derived search region, and the
eigenfunction inequality diagnostics.

Every non-real eigenvalue of the sign-indefinite operator must satisfy
three explicit a-priori bounds expressed through the L1 norms of the
potential and of its negative part:

    |lam|    <= ||q||_1^2
    |Im lam| <= 24*sqrt(3) * ||q_-||_1^2
    |lam|    <= (24*sqrt(3) + 18) * ||q_-||_1^2

The same estimates carve out the rectangle in the open upper half plane
that the eigensearch walks; a nonnegative potential yields an empty
rectangle, which is how "no non-real eigenvalues" is decided without
ever evaluating a determinant.

For a confirmed eigenpair the module also evaluates the tail integrals

    U(x) = int_x^inf sgn(t) |f(t)|^2 dt
    V(x) = int_x^inf |f'(t)|^2 + q(t) |f(t)|^2 dt

through backward cumulative quadrature plus closed-form tail pieces,
and checks the pointwise identity lam*U = f'*conj(f) + V, the vanishing
of U and V far to the left, three norm inequalities, and the full-line
energy identity.  Violated margins are solver defects by default; the
caller is expected to re-run at a finer discretization before drawing
any other conclusion.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .potentials import Potential
from .quadrature import cumulative_from_right, grid_quadrature
from .shooting import Eigenpair
from .zeros import SearchRegion

IM_COEFF = 24.0 * math.sqrt(3.0)
ABS_COEFF = IM_COEFF + 18.0

# default relative slacks: arithmetic noise vs genuine violations
BOUND_SLACK = 1e-9
IDENTITY_TOL = 1e-4
LIMIT_TOL = 1e-6
INEQUALITY_SLACK = 1e-6


@dataclass(frozen=True)
class BoundCheck:
    """One bound with its observed value and signed margin."""

    name: str
    bound: float
    observed: float
    margin: float
    ok: bool


def evaluate_bounds(lam: complex, q: Potential, *,
                    slack: float = BOUND_SLACK) -> tuple[BoundCheck, ...]:
    """The three a-priori bounds for one eigenvalue, margins signed.

    A margin below -slack*(1+bound) marks the check failed; that either
    exposes a solver defect or, if it survives refinement, something
    genuinely wrong with the estimates themselves.
    """
    norms = q.l1_norms()
    abs_lam = abs(lam)
    im_lam = abs(lam.imag)
    rows = [
        ("abs_vs_total_norm", norms.total ** 2, abs_lam),
        ("im_vs_negative_norm", IM_COEFF * norms.negative ** 2, im_lam),
        ("abs_vs_negative_norm", ABS_COEFF * norms.negative ** 2, abs_lam),
    ]
    out = []
    for name, bound, observed in rows:
        margin = bound - observed
        out.append(BoundCheck(name=name, bound=bound, observed=observed,
                              margin=margin,
                              ok=margin >= -slack * (1.0 + bound)))
    return tuple(out)


def eigenvalue_region(q: Potential, *,
                      eps_floor: float | None = None) -> SearchRegion | None:
    """Search rectangle implied by the bounds, or None when empty.

    None means no non-real eigenvalue is possible above the floor: the
    negative part vanishes (imaginary parts are then pinned to zero) or
    the rectangle degenerates below the floor height.
    """
    norms = q.l1_norms()
    if norms.negative == 0.0:
        return None
    b_abs = min(norms.total ** 2, ABS_COEFF * norms.negative ** 2)
    b_im = min(b_abs, IM_COEFF * norms.negative ** 2)
    floor = eps_floor if eps_floor is not None else 1e-3 * max(1.0, b_im)
    if not 0.0 < floor < b_im:
        return None
    return SearchRegion(-b_abs, b_abs, floor, b_im)


@dataclass(frozen=True)
class LemmaReport:
    """Diagnostics for one confirmed eigenpair.

    Residuals are absolute; the matching `*_scale` fields hold the size
    against which each residual is judged.  Slack fields are the
    distances by which the three norm inequalities hold (nonnegative
    means satisfied).
    """

    lam: complex
    identity_residual: float
    identity_scale: float
    left_limit_u: float
    left_limit_v: float
    left_sample_at: float
    norm_f: float
    norm_f_prime: float
    sup_f: float
    weighted_l1: float          # integral of |q| |f|^2
    slack_derivative_norm: float
    slack_sup_norm: float
    slack_weighted_l1: float
    energy_residual: float      # |lam*U(-inf) - V(-inf)|
    energy_scale: float
    identity_ok: bool
    limits_ok: bool
    derivative_norm_ok: bool
    sup_norm_ok: bool
    weighted_l1_ok: bool
    energy_ok: bool

    @property
    def ok(self) -> bool:
        return (self.identity_ok and self.limits_ok
                and self.derivative_norm_ok and self.sup_norm_ok
                and self.weighted_l1_ok and self.energy_ok)


def lemma_diagnostics(pair: Eigenpair, q: Potential, *,
                      identity_tol: float = IDENTITY_TOL,
                      limit_tol: float = LIMIT_TOL,
                      slack_tol: float = INEQUALITY_SLACK) -> LemmaReport:
    """Evaluate the eigenfunction identities and inequalities.

    The sampled interval carries panel quadrature; outside it the two
    exponential tails are integrated in closed form, so U and V are
    available at every grid node and at any point left of the interval.
    """
    grid = pair.grid
    lam = pair.lam
    s = pair.sqrt_lam
    x = grid.nodes
    f = pair.values
    fp = pair.derivatives
    abs2_f = (f * f.conj()).real
    abs2_fp = (fp * fp.conj()).real
    q_at = q(x)
    sgn = np.sign(x)
    if np.any(sgn == 0.0):
        raise ValueError("grid must not place a node at the sign change")

    L = grid.b
    beta = 2.0 * s.imag          # right tail |f|^2 decay rate
    gamma = 2.0 * s.real         # left tail decay rate
    amp_r = abs(pair.tail_amp_right) ** 2
    amp_l = abs(pair.tail_amp_left) ** 2
    s2 = abs(s) ** 2
    tail_r_f2 = amp_r * math.exp(-beta * L) / beta
    tail_l_f2 = amp_l * math.exp(-gamma * L) / gamma
    tail_r_fp2 = s2 * tail_r_f2
    tail_l_fp2 = s2 * tail_l_f2

    # U, V at the grid nodes: node-to-right-edge quadrature + right tail
    u_nodes = cumulative_from_right(grid, sgn * abs2_f) + tail_r_f2
    v_nodes = cumulative_from_right(grid, abs2_fp + q_at * abs2_f) + tail_r_fp2

    norm_f2 = float(grid_quadrature(grid, abs2_f).real) + tail_r_f2 + tail_l_f2
    norm_fp2 = float(grid_quadrature(grid, abs2_fp).real) + tail_r_fp2 + tail_l_fp2
    norm_f = math.sqrt(norm_f2)
    norm_fp = math.sqrt(norm_fp2)
    sup_f = max(float(np.max(np.abs(f))),
                abs(pair.tail_value(L)), abs(pair.tail_value(-L)))
    weighted_l1 = float(grid_quadrature(grid, np.abs(q_at) * abs2_f).real)

    residuals = np.abs(lam * u_nodes - (fp * f.conj() + v_nodes))
    identity_scale = abs(lam) * norm_f2 + norm_fp * sup_f
    identity_residual = float(np.max(residuals))

    # full-line values (the x -> -inf limits)
    u_full = float(grid_quadrature(grid, sgn * abs2_f).real) + tail_r_f2 - tail_l_f2
    v_full = float(grid_quadrature(grid, abs2_fp + q_at * abs2_f).real) \
        + tail_r_fp2 + tail_l_fp2
    energy_residual = abs(lam * u_full - v_full)
    energy_scale = abs(lam) * norm_f2 + norm_fp2 + weighted_l1

    # far-left sample: closed forms once x <= -L
    decay = min(beta, gamma)
    pad = max(2.0, 21.0 / decay)
    x_left = -L - pad
    u_left = u_full + amp_l * math.exp(gamma * x_left) / gamma
    v_left = v_full + s2 * amp_l * math.exp(gamma * x_left) / gamma

    norms = q.l1_norms()
    bound_fp = 2.0 * norms.negative * norm_f
    bound_sup = 2.0 * math.sqrt(norms.negative) * norm_f
    bound_w = 8.0 * norms.negative ** 2 * norm_f2
    slack_fp = bound_fp - norm_fp
    slack_sup = bound_sup - sup_f
    slack_w = bound_w - weighted_l1

    return LemmaReport(
        lam=lam,
        identity_residual=identity_residual,
        identity_scale=identity_scale,
        left_limit_u=abs(u_left),
        left_limit_v=abs(v_left),
        left_sample_at=x_left,
        norm_f=norm_f,
        norm_f_prime=norm_fp,
        sup_f=sup_f,
        weighted_l1=weighted_l1,
        slack_derivative_norm=slack_fp,
        slack_sup_norm=slack_sup,
        slack_weighted_l1=slack_w,
        energy_residual=energy_residual,
        energy_scale=energy_scale,
        identity_ok=identity_residual <= identity_tol * identity_scale,
        limits_ok=abs(u_left) <= limit_tol and abs(v_left) <= limit_tol,
        derivative_norm_ok=slack_fp >= -slack_tol * max(1.0, bound_fp),
        sup_norm_ok=slack_sup >= -slack_tol * max(1.0, bound_sup),
        weighted_l1_ok=slack_w >= -slack_tol * max(1.0, bound_w),
        energy_ok=energy_residual <= limit_tol * energy_scale,
    )


@dataclass(frozen=True)
class BoundReport:
    """Bounds plus eigenfunction diagnostics for one eigenvalue."""

    lam: complex
    method: str
    checks: tuple[BoundCheck, ...]
    lemma: LemmaReport | None

    @property
    def verdict(self) -> bool:
        lemma_ok = self.lemma.ok if self.lemma is not None else True
        return all(c.ok for c in self.checks) and lemma_ok


def bound_report(lam: complex, q: Potential, *, method: str,
                 pair: Eigenpair | None = None) -> BoundReport:
    """Assemble the per-eigenvalue verdict.

    Eigenfunction diagnostics require sampled data and therefore run
    only when a shooting eigenpair is supplied.
    """
    checks = evaluate_bounds(lam, q)
    lemma = lemma_diagnostics(pair, q) if pair is not None else None
    return BoundReport(lam=lam, method=method, checks=checks, lemma=lemma)
