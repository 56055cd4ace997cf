"""Pseudo-differential operators on SU(2) through matrix-valued global symbols."""
from .su2rep import HalfInt, Quaternion, BandLimitError, wigner, cg
from .harmonic import (FourierCoefficients, GroupFunction, build_grid, forward, inverse,
                       parseval_gap, sobolev_norm)
from .symbolspace import (LeftInvariantSymbol, XDependentSymbol, DifferentialOperator,
                          quantize, symbol_of, kernel_of, symbol_from_kernel, conjugate)
from .diffops import D, make_difference, taylor_frame, admissibility_report
from .symcalc import (compose_exact, compose_asymptotic, compose_differential, invert_symbol,
                      ellipticity_check, hypoellipticity_check, parametrix, fit_symbol_class,
                      offdiag_decay_check)
from .opcatalog import builtin, gh_classify, null_distribution, pell_ells

__version__ = "0.1.0"
