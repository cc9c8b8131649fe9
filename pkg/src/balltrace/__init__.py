"""balltrace: desk-scale spectral experiments for Toeplitz and Hankel
operators on Hardy and weighted Bergman spaces of the unit ball.

The library builds exact finite truncations of Toeplitz operators in the
graded monomial basis, diagonalizes them shell by shell, and compares
logarithmic trace asymptotics against exact boundary integrals of
polynomial symbols.
"""

from .core import GradedBasis, MultiIndex, monomial_norm_sq, pochhammer, shell_dim
from .dixmier import (
    DixmierFit,
    dixmier_estimate,
    dixmier_of_operator,
    model_eigenvalues,
)
from .integrate import (
    IntegralValue,
    ball_monomial,
    sphere_integral,
    sphere_monomial,
    wedge_integral,
)
from .operator import (
    BlockOperator,
    antisymmetrize,
    commutator,
    compose,
    hankel_gram,
    toeplitz,
)
from .spectral import ShellSpectrum, hermitian_eigen, partial_trace, schatten_partial
from .symbol import (
    PolySymbol,
    boundary_cr,
    boundary_cr_bar,
    boundary_poisson,
    hankel_density,
    parse_symbol,
    poisson,
    reduce_on_sphere,
)

__all__ = [
    "BlockOperator",
    "DixmierFit",
    "GradedBasis",
    "IntegralValue",
    "MultiIndex",
    "PolySymbol",
    "ShellSpectrum",
    "antisymmetrize",
    "ball_monomial",
    "boundary_cr",
    "boundary_cr_bar",
    "boundary_poisson",
    "commutator",
    "compose",
    "dixmier_estimate",
    "dixmier_of_operator",
    "hankel_density",
    "hankel_gram",
    "hermitian_eigen",
    "model_eigenvalues",
    "monomial_norm_sq",
    "parse_symbol",
    "partial_trace",
    "pochhammer",
    "poisson",
    "reduce_on_sphere",
    "schatten_partial",
    "shell_dim",
    "sphere_integral",
    "sphere_monomial",
    "toeplitz",
    "wedge_integral",
]

__version__ = "0.1.0"
