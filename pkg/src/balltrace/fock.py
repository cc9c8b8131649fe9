"""Ladder operators on the Gaussian (Fock) space and the intertwining check.

The graded monomial basis of entire functions with the Gaussian weight
exp(-pi |w|^2) has squared norms ||w^b||^2 = b!/pi^|b| (Gaussian moment
integrals), so the normalized basis E_b carries creation and annihilation
matrices with entries sqrt(pi(b_j+1)) and -sqrt(pi b_j).  Monomial
Toeplitz matrices on the weighted ball spaces factor through this basis
as a creation chain times a diagonal function of the shell number, and
verify_intertwiner measures the deviation of that factorization at finite
truncation.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .core import GradedBasis, MultiIndex, pochhammer, shell_dim, shell_members
from .operator import BlockOperator, compose, identity, toeplitz
from .symbol import PolySymbol


def fock_norm_sq(beta) -> float:
    """Squared Gaussian norm of the monomial w^beta: beta!/pi^|beta|."""
    beta = MultiIndex(beta)
    return beta.factorial() / math.pi**beta.degree


class FockBasis:
    """Graded monomial basis of the Gaussian space, with its normalization."""

    def __init__(self, d: int, max_degree: int):
        self.d = d
        self.max_degree = max_degree
        self.basis = GradedBasis(d, max_degree)

    def norm_sq(self, beta) -> float:
        return fock_norm_sq(beta)


def rho_delta(d: int, max_degree: int) -> BlockOperator:
    """Diagonal harmonic-oscillator operator: -pi(m + d/2) on shell m."""
    blocks = {
        (m, 0): -math.pi * (m + d / 2.0) * np.eye(shell_dim(d, m))
        for m in range(max_degree + 1)
    }
    return BlockOperator(d, None, max_degree, blocks, max_degree)


@lru_cache(maxsize=None)
def ladder(d: int, j: int, kind: str, max_degree: int) -> BlockOperator:
    """Creation or annihilation matrix for coordinate j on the Fock basis.

    kind "create" realizes multiplication by pi*w_j (shift +1) with
    coefficient sqrt(pi(beta_j+1)); kind "annihilate" realizes -d/dw_j
    (shift -1) with coefficient -sqrt(pi beta_j).
    """
    if not 1 <= j <= d:
        raise ValueError(f"coordinate {j} outside 1..{d}")
    if kind not in ("create", "annihilate"):
        raise ValueError(f"kind must be 'create' or 'annihilate', got {kind!r}")
    i = j - 1
    blocks = {}
    for m in range(max_degree + 1):
        src = shell_members(d, m)
        if kind == "create":
            if m + 1 > max_degree:
                continue
            tgt_pos = {tuple(a): p for p, a in enumerate(shell_members(d, m + 1))}
            mat = np.zeros((shell_dim(d, m + 1), len(src)), dtype=np.complex128)
            for col, beta in enumerate(src):
                up = tuple(e + 1 if t == i else e for t, e in enumerate(beta))
                mat[tgt_pos[up], col] = math.sqrt(math.pi * (beta[i] + 1))
            blocks[(m, 1)] = mat
        else:
            if m == 0:
                continue
            tgt_pos = {tuple(a): p for p, a in enumerate(shell_members(d, m - 1))}
            mat = np.zeros((shell_dim(d, m - 1), len(src)), dtype=np.complex128)
            for col, beta in enumerate(src):
                if beta[i] == 0:
                    continue
                down = tuple(e - 1 if t == i else e for t, e in enumerate(beta))
                mat[tgt_pos[down], col] = -math.sqrt(math.pi * beta[i])
            blocks[(m, -1)] = mat
    return BlockOperator(d, None, max_degree, blocks, max_degree)


@lru_cache(maxsize=None)
def _creation_chain(d: int, alpha: tuple, max_degree: int) -> BlockOperator:
    """Composed creation chain prod_j (pi w_j .)^(alpha_j)."""
    chain = identity(d, None, max_degree)
    for j, e in enumerate(alpha, start=1):
        up = ladder(d, j, "create", max_degree)
        for _ in range(e):
            chain = compose(up, chain)
    return chain


def verify_intertwiner(alpha, nu: float, max_degree: int) -> float:
    """Deviation between the monomial Toeplitz matrix and its Fock factorization.

    The left side is the truncated Toeplitz matrix of z^alpha on the
    weighted space of order nu, read on the Fock basis through the graded
    relabeling.  The right side applies the creation chain for alpha after
    the diagonal (pi^|alpha| (nu + m)_(|alpha|))^(-1/2), where nu + m is
    recovered from the oscillator diagonal.  Returns the largest entry
    deviation on the common exactness window.
    """
    alpha = MultiIndex(alpha)
    d = alpha.dim
    k = alpha.degree
    if max_degree < k:
        raise ValueError("truncation degree smaller than |alpha|")
    f = PolySymbol.monomial(d, tuple(alpha), (0,) * d)
    lhs = toeplitz(f, nu, max_degree)

    chain = _creation_chain(d, tuple(alpha), max_degree)
    osc = rho_delta(d, max_degree)
    window = min(lhs.exact_degree, chain.exact_degree)
    deviation = 0.0
    for m in range(0, window - k + 1):
        # oscillator eigenvalue -pi(m + d/2) recovers nu + m
        shifted = nu - d / 2.0 - osc.block(m, 0)[0, 0].real / math.pi
        weight = (math.pi**k * pochhammer(shifted, k)) ** (-0.5)
        rhs_block = chain.block(m, k) * weight
        diff = np.abs(lhs.block(m, k) - rhs_block)
        if diff.size:
            deviation = max(deviation, float(diff.max()))
    return deviation
