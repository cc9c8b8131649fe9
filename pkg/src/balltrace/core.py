"""Multi-index combinatorics and graded monomial bases.

Everything downstream (symbols, operators, spectra) indexes monomials
z^a by exponent vectors a in N^d and groups them into degree shells
{a : |a| = m}.  This module owns that bookkeeping plus the Pochhammer
and factorial arithmetic used to form matrix entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

MAX_DIM = 8  # targets d <= 3; hard cap keeps enumeration sane


class MultiIndex(tuple):
    """Exponent vector in N^d, e.g. MultiIndex((2, 0, 1)) for z1^2 z3."""

    def __new__(cls, exponents):
        t = tuple(int(e) for e in exponents)
        if not 1 <= len(t) <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {len(t)}")
        if any(e < 0 for e in t):
            raise ValueError(f"negative exponent in {t}")
        return super().__new__(cls, t)

    @property
    def dim(self) -> int:
        return len(self)

    @property
    def degree(self) -> int:
        return sum(self)

    def add(self, other) -> "MultiIndex":
        return MultiIndex(x + y for x, y in zip(self, other))

    def sub(self, other):
        """Componentwise difference, or None if any component would go negative."""
        diff = tuple(x - y for x, y in zip(self, other))
        if any(e < 0 for e in diff):
            return None
        return MultiIndex(diff)

    def factorial(self) -> int:
        """a! = prod_j a_j! (exact integer)."""
        out = 1
        for e in self:
            out *= math.factorial(e)
        return out

    def __repr__(self):
        return f"MultiIndex({tuple(self)})"


def shell_dim(d: int, m: int) -> int:
    """Number of monomials of total degree m in d variables, binom(d+m-1, d-1)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    return math.comb(d + m - 1, d - 1)


def shell_members(d: int, m: int) -> list[MultiIndex]:
    """All multi-indices of degree m in d variables, ascending lexicographic."""
    if d == 1:
        return [MultiIndex((m,))]
    out = []
    for first in range(m + 1):
        for rest in shell_members(d - 1, m - first):
            out.append(MultiIndex((first,) + tuple(rest)))
    out.sort()
    return out


def pochhammer(x, k: int):
    """Ascending factorial x(x+1)...(x+k-1); the empty product (k=0) is 1.

    The result type follows the input: int and Fraction stay exact,
    float inputs give float output.
    """
    if k < 0:
        raise ValueError(f"pochhammer order must be >= 0, got {k}")
    out = x * 0 + 1  # 1 in the arithmetic of x
    for i in range(k):
        out = out * (x + i)
    return out


def log_pochhammer(x: float, k: int) -> float:
    """log of pochhammer(x, k) for x > 0, stable for large k."""
    if x <= 0:
        raise ValueError("log_pochhammer needs x > 0")
    return math.lgamma(x + k) - math.lgamma(x)


def monomial_norm_sq(a, nu: float) -> float:
    """Squared norm a!/(nu)_{|a|} of z^a in the weighted space of order nu.

    The weight is the probability measure on the ball with parameter nu;
    nu = d is the Hardy endpoint (surface measure on the sphere).
    Requires nu >= d.
    """
    a = MultiIndex(a)
    d = a.dim
    if nu < d:
        raise ValueError(f"need nu >= d (got nu={nu}, d={d})")
    m = a.degree
    if float(nu).is_integer():
        return float(Fraction(a.factorial(), pochhammer(int(nu), m)))
    if m <= 150:
        # both factors stay below float overflow for degrees this small
        return a.factorial() / pochhammer(float(nu), m)
    lg = sum(math.lgamma(e + 1) for e in a) - log_pochhammer(float(nu), m)
    return math.exp(lg)


@dataclass(frozen=True)
class GradedBasis:
    """Graded lexicographic enumeration of {a : |a| <= max_degree} in d variables.

    Ordering is degree-major with ascending lex inside each shell, so the
    slice for shell m is contiguous.
    """

    d: int
    max_degree: int
    ordering: tuple = field(init=False, repr=False)
    _shell_starts: tuple = field(init=False, repr=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.d <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}")
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        ordering = []
        starts = [0]
        for m in range(self.max_degree + 1):
            ordering.extend(shell_members(self.d, m))
            starts.append(len(ordering))
        object.__setattr__(self, "ordering", tuple(ordering))
        object.__setattr__(self, "_shell_starts", tuple(starts))
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(ordering)})

    @property
    def size(self) -> int:
        return len(self.ordering)

    def shell(self, m: int) -> tuple:
        """Multi-indices of shell m, in basis order."""
        if not 0 <= m <= self.max_degree:
            raise ValueError(f"shell {m} outside 0..{self.max_degree}")
        return self.ordering[self._shell_starts[m]:self._shell_starts[m + 1]]

    def shell_offset(self, m: int) -> int:
        return self._shell_starts[m]

    def index_of(self, a) -> int:
        """Global position of a in the ordering."""
        return self._index[MultiIndex(a)]

    def position_in_shell(self, a) -> int:
        a = MultiIndex(a)
        return self._index[a] - self._shell_starts[a.degree]
