"""Exact arithmetic and solvers for F_q-linear differential equations
with Carlitz derivatives at a regular singularity.

The ambient field is a computable fragment F_{q^f}((x^{1/e})) of the
completed algebraic closure of F_q((x)).  Solutions are represented by
their coefficients against the orthonormal Carlitz polynomial basis,
solved by explicit recursions, evaluated ultrametrically, verified by
residuals, and classified by coefficient decay.
"""

from .analysis import (EulerEq, HypergeomEq, ModelEq, RegularityReport,
                       ResidualReport, SingularityEvidence, SystemEq,
                       classify, gamma_estimate, residual_check,
                       strong_singularity_test)
from .carlitz import CarlitzContext
from .field import (AlgebraError, FieldDesc, FieldElem, IncompatibleFields,
                    NonSquareInField, OutOfDomain, PrecisionRequired,
                    PrecisionUnderflow, Series, SeriesMatrix,
                    SingularToPrecision, UnsupportedCase,
                    ZeroDivisionToPrecision, artin_schreier, mat_solve, sqrt)
from .operators import (ArithmeticTail, CarlitzCoeffs, ExponentialTail,
                        FiniteTail, MatrixCarlitzCoeffs, apply_p, carlitz_d,
                        carlitz_delta, carlitz_eval, carlitz_tau, linear_d,
                        linear_delta, lps_eval)
from .solvers import (EulerGeneral, EulerPair, HypergeomRun, ModelSolution,
                      RegularSystem, SpectralConditionError, WSolution,
                      euler_companion, euler_general, euler_m2,
                      hypergeom_coeffs, hypergeom_v, model_matrix,
                      model_scalar, regular_system_w)
from .textio import (FormatError, carlitz_list_to_text, carlitz_to_text,
                     field_to_text, manifest_to_text, matrices_to_text,
                     matrix_to_text, parse_any, parse_carlitz,
                     parse_carlitz_list, parse_field, parse_manifest,
                     parse_matrices, parse_matrix, parse_series,
                     parse_series_list, series_list_to_text, series_to_text)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
