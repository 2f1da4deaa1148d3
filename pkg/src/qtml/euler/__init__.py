"""Euler products of the main terms: sym^2 L-values, the Z-products and identity checks."""
from .identities import (A_factor_product, Z1_series_vs_product, Z2_factorization_check, Z3_product,
                         complic_local_check, local_inversion_check)
from .local import EulerContext, LocalFactorTriple, local_E, local_triple, local_Z_factor, sym2_local
from .products import (CutoffError, Z_product, Z_star, Z_star_derivative, ZN_accelerated, needed_cutoff,
                       partial_products, zeta_ratio)
from .symsquare import sym_square_derivative, sym_square_L, sym_square_value

__all__ = [
    "A_factor_product", "Z1_series_vs_product", "Z2_factorization_check", "Z3_product",
    "complic_local_check", "local_inversion_check", "EulerContext", "LocalFactorTriple", "local_E",
    "local_triple", "local_Z_factor", "sym2_local", "CutoffError", "Z_product", "Z_star",
    "Z_star_derivative", "ZN_accelerated", "needed_cutoff", "partial_products", "zeta_ratio",
    "sym_square_derivative", "sym_square_L", "sym_square_value",
]
