"""Birman-Schwinger discretization of the eigenvalue condition.

An eigenvalue lambda of A = sgn(x)(-d^2/dx^2 + q) forces phi = q f to
satisfy phi = -q T_lambda(sgn phi), i.e. (I + q T_lambda sgn) phi = 0.
The Nystrom discretization of that operator on a composite grid turns
the condition into det(I + M(lambda)) = 0 with

    M_jk = q(x_j) K_lambda(x_j, x_k) sgn(x_k) w_k.

Because |K| <= |lambda|^{-1/2}, the matrix is entrywise small whenever
|lambda| is large against ||q||_1^2, which reproduces the contraction
argument excluding eigenvalues outside |lambda| <= ||q||_1^2.

Zeros of the determinant are *candidates*: the shooting module is the
confirming oracle, and unconfirmed determinant zeros are treated as
discretization artifacts by the pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potentials import Potential
from .quadrature import CompositeGrid, composite_grid, gauss_legendre, partial_weights
from .resolvent import ALPHA, SpectralParameter, kernel_matrix, solution_u, solution_v, spectral


@dataclass(frozen=True)
class NystromSystem:
    grid: CompositeGrid
    q_values: np.ndarray
    sign_values: np.ndarray

    @property
    def matrix_dim(self) -> int:
        return self.grid.size


@dataclass(frozen=True)
class CharacteristicValue:
    lam: SpectralParameter
    det_value: complex
    log_abs_det: float
    smallest_singular_value: float


def nystrom_spacing(lam_max_abs: float) -> float:
    """Default node spacing: resolve the kernel oscillation at the
    largest |lambda| the search will visit."""
    if lam_max_abs <= 0:
        return 0.1
    return min(0.1, 0.25 / math.sqrt(lam_max_abs))


def build_system(
    q: Potential,
    *,
    lam_max_abs: float = 1.0,
    panel_order: int = 10,
    density_factor: float = 1.0,
    grid: CompositeGrid | None = None,
) -> NystromSystem:
    """Nystrom grid over the support of q, breakpoints at 0 and at the
    jumps of q, spacing tied to the largest |lambda| of interest."""
    if grid is None:
        L = q.support_radius()
        if L <= 0:
            raise ValueError("potential with empty support has no Nystrom system;"
                             " det(I + M) = 1 identically")
        spacing = nystrom_spacing(lam_max_abs) / max(density_factor, 1e-6)
        grid = composite_grid(-L, L, order=panel_order, max_spacing=spacing,
                              breakpoints=tuple(q.breakpoints()) + (0.0,))
    if not grid.has_breakpoint(0.0):
        raise ValueError("Nystrom grid must carry a breakpoint at x = 0")
    if grid.b < q.support_radius() - 1e-12 or grid.a > -q.support_radius() + 1e-12:
        raise ValueError("Nystrom grid does not cover the support of q")
    qv = q(grid.nodes)
    if not np.all(np.isfinite(qv)):
        raise ValueError("potential samples are not finite on the grid")
    sv = np.where(grid.nodes >= 0, 1.0, -1.0)
    return NystromSystem(grid=grid, q_values=qv, sign_values=sv)


def assemble(sp: SpectralParameter, q: Potential, grid: CompositeGrid) -> np.ndarray:
    """The Nystrom matrix M(lambda); rows scale with q(x_j), columns
    with sgn(x_k) w_k."""
    sys = build_system(q, grid=grid)
    return assemble_system(sp, sys)


def assemble_system(sp: SpectralParameter, sys: NystromSystem) -> np.ndarray:
    """M_jk = q(x_j) K(x_j, x_k) sgn(x_k) w_k, with the row's own panel
    integrated in split form.

    The kernel is smooth in y except for the |x - y| kink at y = x_j,
    which falls inside exactly one panel of row j.  Plain GL weights
    across that kink cap the whole scheme near first order, so for the
    own-panel columns the row is assembled from the factorized kernel
    K(x, y) = u(x) v(y) sgn(y) / W (y < x) and its mirror, integrating
    each smooth side against the panel interpolant via partial Lagrange
    weights.  Off-panel entries coincide with the plain Nystrom rule
    because the same factorization reproduces K there exactly.
    """
    grid = sys.grid
    n = grid.order
    K = kernel_matrix(sp, grid.nodes, grid.nodes)
    M = (sys.q_values[:, None] * K) * (sys.sign_values * grid.weights)[None, :]
    # rebuild the diagonal panel blocks in split form
    u, _ = solution_u(sp, grid.nodes)
    v, _ = solution_v(sp, grid.nodes)
    w_inv = 1.0 / (2.0 * ALPHA * sp.sqrt_lam)
    pw = partial_weights(n)
    full_w = gauss_legendre(n).weights
    for p in range(grid.panel_count):
        lo, hi = grid.panel_bounds(p)
        half = 0.5 * (hi - lo)
        sl = slice(p * n, (p + 1) * n)
        left = half * pw                      # int_{panel lo}^{x_j} of basis k
        right = half * full_w[None, :] - left  # int_{x_j}^{panel hi}
        # kernel carries sgn at the integration variable, so the sign in the
        # matrix rule squares away: entries reduce to q * u * v * w / W
        block = w_inv * (np.outer(u[sl], v[sl]) * left + np.outer(v[sl], u[sl]) * right)
        M[sl, sl] = sys.q_values[sl, None] * block
    return M


def char_det(sp: SpectralParameter, sys: NystromSystem,
             *, with_sigma: bool = True) -> CharacteristicValue:
    """det(I + M(lambda)) with running log-magnitude scaling, plus the
    smallest singular value of I + M as a conditioning witness.

    The LU-based slogdet keeps the phase and the log magnitude separate,
    so the determinant of a few-thousand-node system cannot overflow
    before the final exponentiation.  An exactly singular factorization
    reports det = 0: that lambda sits on a candidate.
    """
    A = np.eye(sys.matrix_dim, dtype=complex) + assemble_system(sp, sys)
    phase, logabs = np.linalg.slogdet(A)
    if phase == 0:
        det = 0.0j
        logabs = -math.inf
    else:
        det = phase * np.exp(logabs)
    sigma = float(np.linalg.svd(A, compute_uv=False)[-1]) if with_sigma else math.nan
    return CharacteristicValue(lam=sp, det_value=complex(det),
                               log_abs_det=float(logabs),
                               smallest_singular_value=sigma)


def det_function(sys: NystromSystem, *, log_shift: float = 0.0):
    """lambda -> det(I + M(lambda)) * exp(-log_shift), as a plain callable.

    The constant rescale keeps contour work well inside floating-point
    range without touching the zero set; the search layer picks the
    shift from a probe at the region center.
    """

    def F(lam: complex) -> complex:
        sp = spectral(lam)
        A = np.eye(sys.matrix_dim, dtype=complex) + assemble_system(sp, sys)
        phase, logabs = np.linalg.slogdet(A)
        if phase == 0:
            return 0.0j
        return phase * np.exp(logabs - log_shift)

    return F


@dataclass(frozen=True)
class DetEvaluator:
    """Determinant of I + M(lambda) as an analytic callable.

    Holds Nystrom systems at two densities (fine = doubled coarse) and
    returns the order-3 Richardson combination (8 det_fine - det_coarse)/7.
    The node representation of the kinked kernel leaves an O(h^3) error
    in the determinant even with exact matrix rows, because the traces
    of M^m for m >= 2 see the |x - y| crease inside every panel square;
    a single extrapolation across a density doubling removes it for a
    ~12% cost increase and reaches ~1e-10 relative self-convergence
    even for the deepest wells in the test suite.

    ``log_shift`` rescales by exp(-log_shift) to keep contour work away
    from overflow; the zero set is untouched.
    """

    coarse: NystromSystem | None
    fine: NystromSystem
    log_shift: float = 0.0

    def __call__(self, lam: complex) -> complex:
        sp = spectral(lam)
        fine = self._single(sp, self.fine)
        if self.coarse is None:
            return fine
        return (8.0 * fine - self._single(sp, self.coarse)) / 7.0

    def _single(self, sp: SpectralParameter, sys: NystromSystem) -> complex:
        A = np.eye(sys.matrix_dim, dtype=complex) + assemble_system(sp, sys)
        phase, logabs = np.linalg.slogdet(A)
        if phase == 0:
            return 0.0j
        return complex(phase * np.exp(logabs - self.log_shift))

    def with_shift(self, log_shift: float) -> "DetEvaluator":
        return DetEvaluator(coarse=self.coarse, fine=self.fine, log_shift=log_shift)

    def conditioning(self, lam: complex) -> CharacteristicValue:
        """Fine-grid determinant plus smallest singular value of I + M."""
        return char_det(spectral(lam), self.fine)


def det_evaluator(
    q: Potential,
    *,
    lam_max_abs: float = 1.0,
    density_factor: float = 2.0,
    panel_order: int = 10,
    extrapolate: bool = True,
    log_shift: float = 0.0,
) -> DetEvaluator:
    """Build the standard determinant evaluator for a potential.

    ``density_factor`` sets the coarse grid; the fine grid doubles it.
    ``extrapolate=False`` keeps only the fine grid (cheaper, order 3);
    integer-valued contour work tolerates that, root polishing should
    not.
    """
    fine = build_system(q, lam_max_abs=lam_max_abs, panel_order=panel_order,
                        density_factor=2.0 * density_factor)
    coarse = None
    if extrapolate:
        coarse = build_system(q, lam_max_abs=lam_max_abs, panel_order=panel_order,
                              density_factor=density_factor)
    return DetEvaluator(coarse=coarse, fine=fine, log_shift=log_shift)


def candidate_scan(q: Potential, region, grid_density: int,
                   *, sys: NystromSystem | None = None) -> list[tuple[complex, float]]:
    """|det(I + M)| on a regular lambda-grid over the region.

    Returns (lambda, |det|) pairs row-major from the lower-left corner;
    used for contour plots and for seeding/cross-checking the zero
    search.  ``region`` is anything with re_min/re_max/im_min/im_max.
    """
    if sys is None:
        lam_max = max(abs(region.re_min), abs(region.re_max),
                      region.im_max) * math.sqrt(2.0)
        sys = build_system(q, lam_max_abs=max(lam_max, 1e-6))
    res = np.linspace(region.re_min, region.re_max, grid_density)
    ims = np.linspace(region.im_min, region.im_max, grid_density)
    out = []
    for im in ims:
        for re in res:
            lam = complex(re, im)
            cv = char_det(spectral(lam), sys, with_sigma=False)
            out.append((lam, abs(cv.det_value)))
    return out
