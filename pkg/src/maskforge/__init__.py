"""maskforge: exact-arithmetic analysis of multivariate subdivision masks.

Decompose trigonometric-polynomial masks against difference factors relative
to a general integer dilation matrix, detect sum-rule orders, and certify
convergence and C1 smoothness of the associated subdivision schemes.
All verdict-bearing computations are exact (rational / cyclotomic); floating
point appears only in certified interval enclosures and heuristic spectra.
"""

from .cyclotomic import (CyclotomicNumber, cyclotomic_polynomial,
                         magnitude_interval, root_of_unity)
from .decompose import (IteratedDecomposition, MaskDecomposition,
                        decompose_mask, decompose_to_class,
                        iterated_decomposition, kronecker_power,
                        refine_decomposition)
from .errors import MaskforgeError
from .intervals import RatInterval
from .lattice import (DilationContext, determinant, digit_fourier_is_unitary,
                      digit_fourier_matrix, digit_set, is_isotropic,
                      power_inf_norm)
from .subdivision import (MatrixMask, Sequence, apply, check_c1,
                          check_convergence, coset_coefficient_sums,
                          difference_scheme, gradient, operator_norm,
                          power_symbol, refine, second_difference_scheme)
from .sumrules import (DerivativeTable, derivative_table, digit_interpolant,
                       mask_from_derivative_table, sum_rule_order,
                       unit_derivative_poly)
from .trigpoly import TrigPoly

__version__ = "0.1.0"

__all__ = [
    "CyclotomicNumber", "cyclotomic_polynomial", "magnitude_interval",
    "root_of_unity", "IteratedDecomposition", "MaskDecomposition",
    "decompose_mask", "decompose_to_class", "iterated_decomposition",
    "kronecker_power", "refine_decomposition", "MaskforgeError", "RatInterval",
    "DilationContext", "determinant", "digit_fourier_is_unitary",
    "digit_fourier_matrix", "digit_set", "is_isotropic", "power_inf_norm",
    "MatrixMask", "Sequence", "apply", "check_c1", "check_convergence",
    "coset_coefficient_sums", "difference_scheme", "gradient", "operator_norm",
    "power_symbol", "refine", "second_difference_scheme", "DerivativeTable",
    "derivative_table", "digit_interpolant", "mask_from_derivative_table",
    "sum_rule_order", "unit_derivative_poly", "TrigPoly",
]
