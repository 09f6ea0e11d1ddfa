"""Spectral toolkit for the indefinite operator sgn(x) (-f'' + q f).

The operator is self-adjoint in the Krein space that L^2(R) becomes
under the sgn(x) inner product; its non-real spectrum is a finite,
conjugation-symmetric set of eigenvalues.  This package locates those
eigenvalues by two independent routes (a Birman-Schwinger determinant
and two-sided shooting) and checks every hit against explicit bounds.
"""

__version__ = "0.1.0"

from .birman_schwinger import (DetEvaluator, NystromSystem, assemble_system,
                               build_system, char_det, det_evaluator,
                               nystrom_spacing)
from .bounds import (ABS_COEFF, IM_COEFF, BoundCheck, BoundReport,
                     LemmaReport, bound_report, eigenvalue_region,
                     evaluate_bounds, lemma_diagnostics)
from .config import ConfigError, RunConfig, config_from_dict, config_to_dict
from .pipeline import RunReport, report_to_dict, solve
from .potentials import (Potential, gaussian_well, potential_from_config,
                         potential_to_config, sgn_step, square_well, two_bump,
                         zero_potential)
from .quadrature import CompositeGrid, composite_grid, gauss_legendre, integrate
from .resolvent import (SpectralParameter, apply_resolvent, kernel_K,
                        principal_sqrt, solution_u, solution_v, spectral,
                        wronskian)
from .shooting import (Eigenpair, MatchValue, eigenfunction_samples,
                       integrate_from_left, integrate_from_right,
                       match_function, matching_det)
from .zeros import (SearchRegion, ZeroCertificate, ZeroSearchResult,
                    locate_zeros, newton_polish, winding_number)

__all__ = [
    "ABS_COEFF", "IM_COEFF", "BoundCheck", "BoundReport", "CompositeGrid",
    "ConfigError", "DetEvaluator", "Eigenpair", "LemmaReport", "MatchValue",
    "NystromSystem", "Potential", "RunConfig", "RunReport", "SearchRegion",
    "SpectralParameter", "ZeroCertificate", "ZeroSearchResult",
    "apply_resolvent", "assemble_system", "bound_report", "build_system",
    "char_det", "composite_grid", "config_from_dict", "config_to_dict",
    "det_evaluator", "eigenfunction_samples", "eigenvalue_region",
    "evaluate_bounds", "gauss_legendre", "gaussian_well", "integrate",
    "integrate_from_left", "integrate_from_right", "kernel_K",
    "lemma_diagnostics", "locate_zeros", "match_function", "matching_det",
    "newton_polish", "nystrom_spacing", "potential_from_config",
    "potential_to_config", "principal_sqrt", "report_to_dict", "sgn_step",
    "solution_u", "solution_v", "solve", "spectral", "square_well",
    "two_bump", "winding_number", "wronskian", "zero_potential",
]
