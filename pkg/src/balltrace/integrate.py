"""Exact integration of polynomial symbols over the sphere and the ball.

All measures are probability measures: the normalized surface measure on
the unit sphere S of C^d, and the weighted measures of order nu > d on
the ball (order d+1 recovers normalized Lebesgue measure).  Monomial
integrals reduce to factorial ratios, so results are exact rationals
whenever the symbol coefficients are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import MultiIndex, pochhammer
from .symbol import ExactComplex, PolySymbol, d_anti, d_holo

CLOSED_FORM = "closed_form"
MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class IntegralValue:
    """An integral with an optional exact rational value alongside the float."""

    approx: complex
    exact: Optional[ExactComplex] = None
    provenance: str = CLOSED_FORM

    def __post_init__(self):
        if self.provenance not in (CLOSED_FORM, MONTE_CARLO):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.exact is not None:
            ref = complex(self.exact)
            if abs(self.approx - ref) > 1e-15 * max(1.0, abs(ref)):
                raise ValueError("approx value inconsistent with exact value")

    @property
    def as_fraction(self) -> Optional[Fraction]:
        """Exact value as a Fraction when it is real rational, else None."""
        if self.exact is not None and self.exact.im == 0:
            return self.exact.re
        return None

    @classmethod
    def from_exact(cls, value) -> "IntegralValue":
        value = value if isinstance(value, ExactComplex) else ExactComplex(value)
        return cls(approx=complex(value), exact=value, provenance=CLOSED_FORM)


def sphere_monomial(a, b, d: int) -> IntegralValue:
    """Normalized integral of z^a conj(z)^b over the unit sphere of C^d.

    Vanishes unless a = b; on the diagonal it equals (d-1)! a! / (d-1+|a|)!.
    """
    a, b = MultiIndex(a), MultiIndex(b)
    if a.dim != d or b.dim != d:
        raise ValueError("multi-index dimension mismatch")
    if a != b:
        return IntegralValue.from_exact(0)
    value = Fraction(
        math.factorial(d - 1) * a.factorial(), math.factorial(d - 1 + a.degree)
    )
    return IntegralValue.from_exact(value)


def ball_monomial(a, b, nu: float, d: int) -> IntegralValue:
    """Integral of z^a conj(z)^b against the weighted probability measure.

    Requires nu > d (weighted Bergman range).  Vanishes unless a = b; on
    the diagonal it equals a!/(nu)_{|a|}.  Float nu is treated as the
    dyadic rational it represents, so the value is always exact.
    """
    if nu <= d:
        raise ValueError(f"ball integrals need nu > d (got nu={nu}, d={d})")
    a, b = MultiIndex(a), MultiIndex(b)
    if a.dim != d or b.dim != d:
        raise ValueError("multi-index dimension mismatch")
    if a != b:
        return IntegralValue.from_exact(0)
    value = Fraction(a.factorial()) / pochhammer(Fraction(nu), a.degree)
    return IntegralValue.from_exact(value)


def _integrate_terms(f: PolySymbol, weight) -> IntegralValue:
    """Sum coefficient * weight(a) over diagonal terms a = b of f."""
    exact_total = ExactComplex(0)
    all_exact = True
    re_parts, im_parts = [], []
    for (a, b), c in f.items():
        if a != b:
            continue
        w = weight(MultiIndex(a))
        if isinstance(c, ExactComplex) and all_exact:
            exact_total = exact_total + c * w
        else:
            all_exact = False
        cv = complex(c) * float(w)
        re_parts.append(cv.real)
        im_parts.append(cv.imag)
    if all_exact:
        return IntegralValue.from_exact(exact_total)
    approx = complex(math.fsum(re_parts), math.fsum(im_parts))
    return IntegralValue(approx=approx, provenance=CLOSED_FORM)


def sphere_integral(f: PolySymbol) -> IntegralValue:
    """Normalized sphere integral of a polynomial symbol, by linearity."""
    d = f.d

    def weight(a: MultiIndex) -> Fraction:
        return Fraction(
            math.factorial(d - 1) * a.factorial(), math.factorial(d - 1 + a.degree)
        )

    return _integrate_terms(f, weight)


def ball_integral(f: PolySymbol, nu: float) -> IntegralValue:
    """Integral of a polynomial symbol against the weighted measure of order nu."""
    if nu <= f.d:
        raise ValueError(f"ball integrals need nu > d (got nu={nu}, d={f.d})")
    nu_frac = Fraction(nu)

    def weight(a: MultiIndex) -> Fraction:
        return Fraction(a.factorial()) / pochhammer(nu_frac, a.degree)

    return _integrate_terms(f, weight)


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _symbolic_det(rows: list[list[PolySymbol]], d: int) -> PolySymbol:
    import itertools

    n = len(rows)
    out = PolySymbol.zero(d)
    for perm in itertools.permutations(range(n)):
        term = PolySymbol.const(d, _perm_sign(perm))
        for i in range(n):
            entry = rows[i][perm[i]]
            if entry.is_zero():
                term = PolySymbol.zero(d)
                break
            term = term * entry
        out = out + term
    return out


@dataclass(frozen=True)
class WedgeIntegral:
    """Result of integrating df_1 ^ ... ^ df_{2d} over the ball.

    det_integral is the integral of the coefficient determinant against
    normalized Lebesgue measure on the ball.  The remaining fields supply
    the fixed conversion constants: ball_volume = pi^d/d! rescales to raw
    Lebesgue measure, and form_factor converts the holomorphic coframe
    volume dz_1..dz_d dzbar_1..dzbar_d into the real volume form.  No
    normalization convention is asserted; consumers fit one empirically.
    """

    d: int
    det_integral: IntegralValue
    ball_volume: float
    form_factor: complex
    wedge_value: complex
    exact_pi_coeff: Optional[ExactComplex] = None  # wedge_value == coeff * pi^d

    @property
    def lebesgue_value(self) -> complex:
        return self.det_integral.approx * self.ball_volume


def wedge_integral(fs: list[PolySymbol]) -> WedgeIntegral:
    """Integrate the 2d-form df_1 ^ df_2 ^ ... ^ df_{2d} over the unit ball.

    Expands each df in the coframe (dz_1..dz_d, dzbar_1..dzbar_d), takes
    the symbolic determinant of coefficients, and integrates it against
    normalized Lebesgue measure (the weighted measure of order d+1).
    """
    if not fs:
        raise ValueError("wedge_integral needs 2d symbols")
    d = fs[0].d
    if len(fs) != 2 * d:
        raise ValueError(f"wedge_integral needs exactly {2 * d} symbols for d={d}")
    for f in fs:
        if f.d != d:
            raise ValueError("all symbols must share the dimension")
    rows = []
    for f in fs:
        row = [d_holo(j, f) for j in range(1, d + 1)]
        row += [d_anti(j, f) for j in range(1, d + 1)]
        rows.append(row)
    det = _symbolic_det(rows, d)
    det_integral = ball_integral(det, d + 1)
    ball_volume = math.pi**d / math.factorial(d)
    # dz_1..dz_d dzbar_1..dzbar_d = (-1)^{d(d-1)/2} (-2i)^d  dx_1 dy_1 .. dx_d dy_d
    riffle = -1 if (d * (d - 1) // 2) % 2 else 1
    ff_exact = ExactComplex(riffle) * (ExactComplex(0, -2) ** d)
    form_factor = complex(ff_exact)
    wedge_value = form_factor * det_integral.approx * ball_volume
    exact_pi = None
    if det_integral.exact is not None:
        exact_pi = ff_exact * det_integral.exact * Fraction(1, math.factorial(d))
    return WedgeIntegral(
        d=d,
        det_integral=det_integral,
        ball_volume=ball_volume,
        form_factor=form_factor,
        wedge_value=wedge_value,
        exact_pi_coeff=exact_pi,
    )


def mc_sphere_integral(f: PolySymbol, samples: int, seed: int) -> IntegralValue:
    """Monte Carlo estimate of the normalized sphere integral (cross-check only)."""
    rng = np.random.default_rng(seed)
    d = f.d
    z = rng.standard_normal((samples, d)) + 1j * rng.standard_normal((samples, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    total = 0j
    for (a, b), c in f.items():
        mono = np.ones(samples, dtype=complex)
        for j in range(d):
            if a[j]:
                mono *= z[:, j] ** a[j]
            if b[j]:
                mono *= np.conj(z[:, j]) ** b[j]
        total += complex(c) * complex(mono.mean())
    return IntegralValue(approx=total, provenance=MONTE_CARLO)
