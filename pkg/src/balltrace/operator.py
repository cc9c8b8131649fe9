"""Exact finite truncations of Toeplitz operators in the graded basis.

Operators are stored as degree-graded blocks: key (m, s) holds the dense
matrix mapping shell m into shell m+s.  Polynomial symbols make every
Toeplitz operator block-banded in the degree, so products of truncations
stay block-banded and shift-0 operators block-diagonalize.

Every operator carries an exactness budget `exact_degree`: all stored
entries whose source and target degrees are <= exact_degree agree with
the corresponding entries of the untruncated operator.  Products of
truncations are not compressions of products near the top degree, so
composition shrinks the budget by the largest upward shift of the
first-acting factor; downstream consumers must read inside the budget.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import pochhammer, shell_dim, shell_members
from .symbol import PolySymbol

HANKEL_ROUTE_TOL = 1e-12


@lru_cache(maxsize=None)
def _shell(d: int, m: int) -> tuple:
    return tuple(tuple(a) for a in shell_members(d, m))


@lru_cache(maxsize=None)
def _shell_pos(d: int, m: int) -> dict:
    return {a: i for i, a in enumerate(_shell(d, m))}


class BlockOperator:
    """Degree-block-banded truncated operator on the graded monomial basis.

    Immutable after assembly; nu is None for operators that do not live on
    a weighted space (the Fock-side ladder matrices reuse this container).
    """

    __slots__ = ("d", "nu", "N", "blocks", "exact_degree")

    def __init__(self, d: int, nu: Optional[float], N: int, blocks: dict,
                 exact_degree: int):
        if N < 0:
            raise ValueError("truncation degree must be >= 0")
        self.d = d
        self.nu = nu
        self.N = N
        self.exact_degree = min(exact_degree, N)
        clean = {}
        for (m, s), mat in blocks.items():
            if not (0 <= m <= N and 0 <= m + s <= N):
                raise ValueError(f"block ({m},{s}) outside the truncation window")
            mat = np.asarray(mat, dtype=np.complex128)
            want = (shell_dim(d, m + s), shell_dim(d, m))
            if mat.shape != want:
                raise ValueError(
                    f"block ({m},{s}) has shape {mat.shape}, expected {want}"
                )
            if mat.size and np.abs(mat).max() != 0.0:
                clean[(m, s)] = mat
        self.blocks = clean

    # -- structure ---------------------------------------------------------

    def shifts(self) -> set:
        return {s for (_, s) in self.blocks}

    @property
    def max_up_shift(self) -> int:
        return max((s for (_, s) in self.blocks), default=0)

    def block(self, m: int, s: int) -> np.ndarray:
        """Stored block, or a zero matrix of the right shape."""
        got = self.blocks.get((m, s))
        if got is not None:
            return got
        return np.zeros((shell_dim(self.d, m + s), shell_dim(self.d, m)),
                        dtype=np.complex128)

    def same_space(self, other: "BlockOperator") -> bool:
        return (self.d, self.nu, self.N) == (other.d, other.nu, other.N)

    def _require_same_space(self, other: "BlockOperator"):
        if not self.same_space(other):
            raise ValueError(
                f"mismatched spaces: (d,nu,N)={(self.d, self.nu, self.N)} vs "
                f"{(other.d, other.nu, other.N)}"
            )

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        self._require_same_space(other)
        out = {k: v.copy() for k, v in self.blocks.items()}
        for k, v in other.blocks.items():
            if k in out:
                out[k] = out[k] + v
            else:
                out[k] = v
        return BlockOperator(self.d, self.nu, self.N, out,
                             min(self.exact_degree, other.exact_degree))

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        return self + (other * (-1))

    def __mul__(self, c) -> "BlockOperator":
        c = complex(c)
        return BlockOperator(self.d, self.nu, self.N,
                             {k: v * c for k, v in self.blocks.items()},
                             self.exact_degree)

    __rmul__ = __mul__

    def adjoint(self) -> "BlockOperator":
        out = {}
        for (m, s), mat in self.blocks.items():
            out[(m + s, -s)] = mat.conj().T
        return BlockOperator(self.d, self.nu, self.N, out, self.exact_degree)

    def hermitian_part(self) -> "BlockOperator":
        return (self + self.adjoint()) * 0.5

    def antihermitian_part(self) -> "BlockOperator":
        """K with A = H + iK; K is Hermitian."""
        return (self - self.adjoint()) * (-0.5j)

    # -- diagnostics ---------------------------------------------------------

    def max_abs(self) -> float:
        return max((np.abs(v).max() for v in self.blocks.values()), default=0.0)

    def hermitian_deviation(self, window: Optional[int] = None) -> float:
        """Largest |A - A*| entry over blocks inside the window."""
        adj = self.adjoint()
        return max_block_diff(self, adj, window)

    def diagonal(self, m: int) -> np.ndarray:
        """Diagonal of the shift-0 block at shell m."""
        return np.diagonal(self.block(m, 0)).copy()

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        blocks = []
        for (m, s) in sorted(self.blocks):
            mat = self.blocks[(m, s)]
            blocks.append({
                "m": m,
                "s": s,
                "rows": mat.shape[0],
                "cols": mat.shape[1],
                "re": [float(x) for x in mat.real.ravel()],
                "im": [float(x) for x in mat.imag.ravel()],
            })
        return {
            "d": self.d,
            "nu": self.nu,
            "N": self.N,
            "exact_degree": self.exact_degree,
            "blocks": blocks,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BlockOperator":
        blocks = {}
        for item in data["blocks"]:
            rows, cols = item["rows"], item["cols"]
            mat = (np.asarray(item["re"], dtype=float)
                   + 1j * np.asarray(item["im"], dtype=float)).reshape(rows, cols)
            blocks[(item["m"], item["s"])] = mat
        return cls(data["d"], data["nu"], data["N"], blocks, data["exact_degree"])


def max_block_diff(A: BlockOperator, B: BlockOperator,
                   window: Optional[int] = None) -> float:
    """Largest entry deviation between two operators, restricted to a window."""
    A._require_same_space(B)
    if window is None:
        window = min(A.exact_degree, B.exact_degree)
    out = 0.0
    for key in set(A.blocks) | set(B.blocks):
        m, s = key
        if m > window or m + s > window:
            continue
        diff = A.block(m, s) - B.block(m, s)
        if diff.size:
            out = max(out, float(np.abs(diff).max()))
    return out


def _poch_prod(base: tuple, exps: tuple) -> int:
    """prod_j (base_j + 1)_(exps_j), exact integer."""
    out = 1
    for g, e in zip(base, exps):
        out *= pochhammer(g + 1, e)
    return out


def toeplitz(f: PolySymbol, nu: float, N: int) -> BlockOperator:
    """Truncated Toeplitz operator with polynomial symbol f on degrees <= N.

    For a symbol monomial z^a conj(z)^b the matrix element between the
    normalized monomials indexed by gamma and delta = gamma + a - b is

        sqrt( prod_j (gamma_j+1)_(a_j) * prod_j (delta_j+1)_(b_j)
              / ((nu+|gamma|)_(|a|) * (nu+|delta|)_(|b|)) ),

    the Gram identity rearranged into overflow-free ratios.  Requires
    nu >= d (nu = d is the Hardy endpoint) and N >= deg f.  The exactness
    budget is N minus the conjugate degree of f.
    """
    d = f.d
    if nu < d:
        raise ValueError(f"need nu >= d (got nu={nu}, d={d})")
    if N < f.total_degree:
        raise ValueError(
            f"truncation degree {N} is smaller than deg f = {f.total_degree}"
        )
    nu = float(nu)
    blocks: dict = {}
    for (a, b), coeff in f.items():
        c = complex(coeff)
        ka, kb = sum(a), sum(b)
        s = ka - kb
        for m in range(max(0, -s), N - max(s, 0) + 1):
            src = _shell(d, m)
            tgt_pos = _shell_pos(d, m + s)
            key = (m, s)
            block = blocks.get(key)
            if block is None:
                block = np.zeros((shell_dim(d, m + s), shell_dim(d, m)),
                                 dtype=np.complex128)
                blocks[key] = block
            den = pochhammer(nu + m, ka) * pochhammer(nu + m + s, kb)
            for col, gamma in enumerate(src):
                delta = tuple(g + x - y for g, x, y in zip(gamma, a, b))
                if any(e < 0 for e in delta):
                    continue
                num = _poch_prod(gamma, a) * _poch_prod(delta, b)
                block[tgt_pos[delta], col] += c * math.sqrt(num / den)
    return BlockOperator(d, nu, N, blocks, N - f.zbar_degree)


def identity(d: int, nu: Optional[float], N: int) -> BlockOperator:
    blocks = {(m, 0): np.eye(shell_dim(d, m), dtype=np.complex128)
              for m in range(N + 1)}
    return BlockOperator(d, nu, N, blocks, N)


def compose(A: BlockOperator, B: BlockOperator) -> BlockOperator:
    """Operator product A B (B acts first), with the budget rule.

    exact_degree(AB) = min(exact_A, exact_B) - max upward shift of B: the
    first-acting factor's raising blocks reach intermediate shells above
    the source degree, and those must stay inside both budgets.
    """
    A._require_same_space(B)
    by_source: dict = {}
    for (m2, sA), Ab in A.blocks.items():
        by_source.setdefault(m2, []).append((sA, Ab))
    out: dict = {}
    for (m, sB), Bb in B.blocks.items():
        for sA, Ab in by_source.get(m + sB, ()):
            key = (m, sA + sB)
            prod = Ab @ Bb
            if key in out:
                out[key] += prod
            else:
                out[key] = prod
    up = max(0, B.max_up_shift)
    exact = min(A.exact_degree, B.exact_degree) - up
    return BlockOperator(A.d, A.nu, A.N, out, exact)


def commutator(A: BlockOperator, B: BlockOperator) -> BlockOperator:
    """AB - BA."""
    return compose(A, B) - compose(B, A)


def hankel_routes(f: PolySymbol, nu: float, N: int):
    """Both constructions of the Hankel square modulus, with their deviation.

    Route one is the commutator [T_conj(f), T_f]; route two is
    T_(|f|^2) - T_f T_conj(f).  For holomorphic f the two agree on the
    common exactness window; the deviation is returned for auditing.
    """
    if not f.is_holomorphic():
        raise ValueError("hankel_gram requires a holomorphic symbol")
    tf = toeplitz(f, nu, N)
    tfbar = toeplitz(f.conj(), nu, N)
    route1 = commutator(tfbar, tf)
    route2 = toeplitz(f * f.conj(), nu, N) - compose(tf, tfbar)
    window = min(route1.exact_degree, route2.exact_degree)
    deviation = max_block_diff(route1, route2, window)
    op = BlockOperator(route1.d, route1.nu, route1.N, route1.blocks, window)
    return op, deviation


def hankel_gram(f: PolySymbol, nu: float, N: int) -> BlockOperator:
    """Square modulus of the Hankel operator with symbol conj(f), truncated.

    Built as [T_conj(f), T_f] and cross-checked against the independent
    route T_(|f|^2) - T_f T_conj(f); construction fails if the routes
    disagree beyond 1e-12 on the exactness window.
    """
    op, deviation = hankel_routes(f, nu, N)
    if deviation > HANKEL_ROUTE_TOL:
        raise RuntimeError(
            f"hankel construction routes disagree by {deviation:.3e}"
        )
    return op


def antisymmetrize(ops: list[BlockOperator]) -> BlockOperator:
    """Alternating sum over permutations of the product of 2d operators."""
    import itertools

    n = len(ops)
    if n < 2 or n % 2 != 0:
        raise ValueError(f"antisymmetrization needs an even number of operators, got {n}")
    first = ops[0]
    for op in ops[1:]:
        first._require_same_space(op)
    total = None
    for perm in itertools.permutations(range(n)):
        sign = _perm_sign(perm)
        prod = ops[perm[0]]
        for idx in perm[1:]:
            prod = compose(prod, ops[idx])
        term = prod * sign
        total = term if total is None else total + term
    return total


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        j, length = start, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign
