"""Shared oracles and generators for the test suite."""

import numpy as np

from balltrace.core import shell_members
from balltrace.integrate import ball_monomial, sphere_monomial
from balltrace.operator import BlockOperator
from balltrace.symbol import PolySymbol


def random_symbol(rng, d, max_terms=4, max_exp=2, complex_coeffs=True):
    """Random polynomial symbol with small exact integer coefficients."""
    n_terms = int(rng.integers(1, max_terms + 1))
    terms = {}
    for _ in range(n_terms):
        a = tuple(int(e) for e in rng.integers(0, max_exp + 1, size=d))
        b = tuple(int(e) for e in rng.integers(0, max_exp + 1, size=d))
        re = int(rng.integers(-4, 5))
        im = int(rng.integers(-4, 5)) if complex_coeffs else 0
        from balltrace.symbol import ExactComplex

        c = ExactComplex(re, im)
        terms[(a, b)] = terms[(a, b)] + c if (a, b) in terms else c
    return PolySymbol(d, terms)


def random_holomorphic(rng, d, max_terms=3, max_exp=2):
    f = random_symbol(rng, d, max_terms, max_exp)
    terms = {((a), (0,) * d): c for (a, b), c in f.terms.items()}
    return PolySymbol(d, terms)


def sphere_points(rng, d, n):
    """Uniform samples on the unit sphere of C^d."""
    x = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x


def ball_points(rng, d, nu, n):
    """Samples from the weighted probability measure of order nu > d on the ball."""
    assert nu > d
    u = sphere_points(rng, d, n)
    t = rng.beta(d, nu - d, size=n)
    return np.sqrt(t)[:, None] * u


def oracle_toeplitz(f, nu, N):
    """Independent Toeplitz build through explicit Gram-matrix inner products.

    Multiplies f against each basis monomial as a symbol, projects by pairing
    every product term with the monomial basis through the exact measure
    integrals, and normalizes by monomial norms.  Shares no code with the
    production entry formula.
    """
    d = f.d

    def diag_integral(p):
        if nu == d:
            return sphere_monomial(p, p, d).approx.real
        return ball_monomial(p, p, nu, d).approx.real

    norms = {}

    def norm_of(g):
        if g not in norms:
            norms[g] = np.sqrt(diag_integral(g))
        return norms[g]

    row_pos = {}

    def positions(mt):
        if mt not in row_pos:
            row_pos[mt] = {tuple(a): i for i, a in enumerate(shell_members(d, mt))}
        return row_pos[mt]

    blocks = {}
    for m in range(N + 1):
        src = shell_members(d, m)
        for col, gamma in enumerate(src):
            prod = f * PolySymbol.monomial(d, tuple(gamma), (0,) * d)
            for (p, q), c in prod.items():
                delta = tuple(x - y for x, y in zip(p, q))
                if any(e < 0 for e in delta):
                    continue
                mt = sum(delta)
                if mt > N:
                    continue
                key = (m, mt - m)
                if key not in blocks:
                    blocks[key] = np.zeros((len(positions(mt)), len(src)),
                                           dtype=np.complex128)
                row = positions(mt)[delta]
                value = complex(c) * diag_integral(p) / (norm_of(tuple(gamma)) * norm_of(delta))
                blocks[key][row, col] += value
    return BlockOperator(d, float(nu), N, blocks, N - f.zbar_degree)
