"""Hermitian eigendecomposition per degree shell and exact partial traces.

Shift-0 operators block-diagonalize over degree shells, so spectra are
computed shell by shell and carry their shell provenance.  The residual
contract ||Av - lambda v|| / ||A|| <= 1e-9 is enforced on every accepted
decomposition.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import shell_dim
from .operator import BlockOperator

RESIDUAL_LIMIT = 1e-9
HERMITIAN_TOL = 1e-12


class ShellSpectrum:
    """Real eigenvalues of a Hermitian block operator, tagged by shell."""

    __slots__ = ("shells", "residual")

    def __init__(self, shells, residual: float = 0.0):
        # shells: iterable of (m, values); values become sorted descending
        cleaned = []
        for m, vals in shells:
            arr = np.sort(np.asarray(vals, dtype=float))[::-1]
            cleaned.append((int(m), arr))
        cleaned.sort(key=lambda t: t[0])
        self.shells = cleaned
        self.residual = float(residual)

    @property
    def count(self) -> int:
        return sum(len(v) for _, v in self.shells)

    @property
    def max_shell(self) -> int:
        return self.shells[-1][0] if self.shells else -1

    def values_sorted(self) -> np.ndarray:
        """All eigenvalues, sign retained, by decreasing absolute value."""
        if not self.shells:
            return np.zeros(0)
        allv = np.concatenate([v for _, v in self.shells])
        order = np.lexsort((allv, -np.abs(allv)))
        return allv[order]

    def last_shell_max_abs(self) -> float:
        if not self.shells:
            return 0.0
        return float(np.abs(self.shells[-1][1]).max(initial=0.0))

    def reliable_count(self) -> int:
        """Number of sorted eigenvalues provably above any truncated tail.

        Shells beyond the computed window can only contribute values below
        the final shell's largest magnitude (for operators whose per-shell
        sup decays), so the sorted prefix above that magnitude is final.
        """
        cutoff = self.last_shell_max_abs()
        v = np.abs(self.values_sorted())
        return int(np.searchsorted(-v, -cutoff, side="right"))

    def power(self, k: int) -> "ShellSpectrum":
        """Spectrum of the k-th operator power (same eigenbasis)."""
        return ShellSpectrum(
            [(m, vals**k) for m, vals in self.shells], self.residual
        )

    def scaled(self, c: float) -> "ShellSpectrum":
        return ShellSpectrum([(m, vals * c) for m, vals in self.shells], self.residual)

    def to_csv_rows(self):
        for m, vals in self.shells:
            for i, v in enumerate(vals):
                yield m, i, float(v)

    def to_json_dict(self) -> dict:
        return {
            "residual": self.residual,
            "shells": [
                {"m": m, "values": [float(v) for v in vals]}
                for m, vals in self.shells
            ],
        }


def _resolve_shells(A: BlockOperator, shells) -> list[int]:
    if shells is None:
        return list(range(A.exact_degree + 1))
    if isinstance(shells, tuple) and len(shells) == 2:
        lo, hi = shells
        return list(range(lo, hi + 1))
    return sorted(int(m) for m in shells)


def hermitian_eigen(A: BlockOperator, shells=None, threads: int = 1) -> ShellSpectrum:
    """Eigenvalues of a Hermitian shift-0 operator on the requested shells.

    Shells default to the whole exactness window and must stay inside it.
    Raises if the operator has off-diagonal degree shifts on those shells
    or fails the Hermitian tolerance there.
    """
    wanted = _resolve_shells(A, shells)
    if not wanted:
        raise ValueError("no shells requested")
    if max(wanted) > A.exact_degree:
        raise ValueError(
            f"shell {max(wanted)} outside the exactness window {A.exact_degree}"
        )
    scale = max(1.0, A.max_abs())
    shell_set = set(wanted)
    for (m, s), mat in A.blocks.items():
        if s != 0 and m in shell_set and np.abs(mat).max() > 1e-10 * scale:
            raise ValueError(f"operator has a shift-{s} block at shell {m}")

    mats = {}
    for m in wanted:
        mat = A.block(m, 0)
        herm_dev = float(np.abs(mat - mat.conj().T).max(initial=0.0))
        if herm_dev > HERMITIAN_TOL * scale:
            raise ValueError(
                f"block at shell {m} deviates from Hermitian by {herm_dev:.3e}"
            )
        mats[m] = mat

    def solve(m):
        mat = mats[m]
        vals, vecs = np.linalg.eigh(mat)
        err = np.abs(mat @ vecs - vecs * vals[None, :])
        res = float(err.max(initial=0.0))
        return m, vals, res

    if threads > 1 and len(wanted) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, wanted))
    else:
        results = [solve(m) for m in wanted]

    norm = max((float(np.abs(v).max(initial=0.0)) for _, v, _ in results), default=0.0)
    norm = max(norm, 1e-300)
    residual = max(r for _, _, r in results) / norm if results else 0.0
    if residual > RESIDUAL_LIMIT:
        raise RuntimeError(f"eigendecomposition residual {residual:.3e} too large")
    return ShellSpectrum([(m, v) for m, v, _ in results], residual)


def singular_values(A: BlockOperator, N: int) -> ShellSpectrum:
    """Singular values per source shell, from the Gram blocks of A*A."""
    limit = A.exact_degree - max(0, A.max_up_shift)
    if N > limit:
        raise ValueError(f"requested shells up to {N}, window allows {limit}")
    by_source: dict = {}
    for (m, s), mat in A.blocks.items():
        by_source.setdefault(m, []).append(mat)
    out = []
    for m in range(N + 1):
        mats = by_source.get(m)
        if mats:
            gram = sum(mat.conj().T @ mat for mat in mats)
            vals = np.sqrt(np.clip(np.linalg.eigvalsh(gram), 0.0, None))
        else:
            vals = np.zeros(shell_dim(A.d, m))
        out.append((m, vals))
    return ShellSpectrum(out)


def schatten_partial(A: BlockOperator, p: float, N: int) -> float:
    """Partial Schatten p-sum over singular values from shells <= N."""
    if p <= 0:
        raise ValueError("Schatten exponent must be > 0")
    spec = singular_values(A, N)
    total = 0.0
    for _, vals in spec.shells:
        nz = vals[vals > 0]
        total += float(np.sum(nz**p))
    return total


def partial_trace(A: BlockOperator, N: int) -> complex:
    """Sum of diagonal entries over shells <= N (inside the exactness window)."""
    if N > A.exact_degree:
        raise ValueError(
            f"trace window {N} exceeds the exactness window {A.exact_degree}"
        )
    total = 0j
    for (m, s), mat in A.blocks.items():
        if s == 0 and m <= N:
            total += complex(np.trace(mat))
    return total
