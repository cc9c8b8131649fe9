import math

import numpy as np
import pytest

from balltrace.core import shell_dim
from balltrace.dixmier import model_eigenvalues
from balltrace.fock import (
    FockBasis,
    fock_norm_sq,
    ladder,
    rho_delta,
    verify_intertwiner,
)
from balltrace.operator import commutator, compose, identity, max_block_diff


class TestFockNormalization:
    def test_constant_has_unit_norm(self):
        assert fock_norm_sq((0, 0)) == 1.0

    def test_gaussian_moment_oracle(self):
        # oracle: Monte Carlo moments of the Gaussian weight exp(-pi|w|^2),
        # which is a probability measure with per-coordinate variance 1/pi
        rng = np.random.default_rng(8)
        n = 400_000
        w = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(
            1.0 / (2.0 * math.pi)
        )
        for k in (1, 2, 3):
            mc = float(np.mean(np.abs(w) ** (2 * k)))
            want = fock_norm_sq((k,))
            assert abs(mc - want) < 0.02 * max(want, 1.0)

    def test_basis_matches_graded_ordering(self):
        fb = FockBasis(2, 5)
        assert fb.basis.size == 21
        assert fb.norm_sq((2, 1)) == pytest.approx(2.0 / math.pi**3)


class TestLadder:
    def test_create_on_vacuum(self):
        up = ladder(1, 1, "create", 6)
        assert up.block(0, 1)[0, 0] == pytest.approx(math.sqrt(math.pi), abs=1e-15)

    def test_annihilate_vacuum_is_zero(self):
        down = ladder(1, 1, "annihilate", 6)
        assert (0, -1) not in down.blocks or np.abs(down.block(0, -1)).max() == 0.0

    def test_canonical_commutation(self):
        d, N = 3, 8
        scale = math.pi
        for j in range(1, d + 1):
            for k in range(1, d + 1):
                A = ladder(d, j, "annihilate", N)
                C = ladder(d, k, "create", N)
                got = commutator(A, C)
                want = identity(d, None, N) * (-math.pi if j == k else 0.0)
                w = got.exact_degree
                assert max_block_diff(got, want, w) < 1e-12 * scale

    def test_half_anticommutator_assembles_oscillator(self):
        d, N = 2, 8
        total = None
        for j in range(1, d + 1):
            A = ladder(d, j, "annihilate", N)
            C = ladder(d, j, "create", N)
            term = (compose(A, C) + compose(C, A)) * 0.5
            total = term if total is None else total + term
        osc = rho_delta(d, N)
        assert max_block_diff(total, osc, total.exact_degree) < 1e-12

    def test_oscillator_diagonal(self):
        osc = rho_delta(2, 5)
        assert osc.block(0, 0)[0, 0] == pytest.approx(-math.pi)
        osc1 = rho_delta(1, 5)
        assert osc1.block(3, 0)[0, 0] == pytest.approx(-math.pi * 3.5)

    def test_resolvent_power_matches_model_family(self):
        c, d, M = 0.7, 2, 9
        osc = rho_delta(d, M)
        fam = model_eigenvalues(c, d, M)
        for m in range(M + 1):
            diag = (c - osc.block(m, 0)[0, 0].real) ** (-d)
            vals, mults = fam.shell_values(m)
            assert diag == pytest.approx(vals[0], rel=1e-14)
            assert int(mults[0]) == shell_dim(d, m)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            ladder(2, 3, "create", 5)
        with pytest.raises(ValueError):
            ladder(2, 1, "raise", 5)

    def test_shares_operator_json_schema(self):
        from balltrace.operator import BlockOperator

        up = ladder(2, 1, "create", 5)
        data = up.to_json_dict()
        assert data["nu"] is None
        back = BlockOperator.from_json_dict(data)
        assert max_block_diff(up, back, 5) == 0.0


class TestIntertwiner:
    def test_trivial_alpha(self):
        assert verify_intertwiner((0, 0), 2.0, 10) == 0.0

    def test_single_step_entry(self):
        # both sides send the (1,0) basis vector up with weight sqrt(2/3)
        dev = verify_intertwiner((1, 0), 2.0, 12)
        assert dev < 1e-13
        chain = ladder(2, 1, "create", 12)
        w = (math.pi * (2.0 + 1.0)) ** (-0.5)
        got = chain.block(1, 1)[2, 1] * w  # (1,0) -> (2,0) in lex order
        assert got == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-14)

    def test_mixed_alpha_small(self):
        assert verify_intertwiner((1, 1), 2.5, 20) < 1e-12

    def test_various_dimensions(self):
        assert verify_intertwiner((2,), 1.0, 15) < 1e-12
        assert verify_intertwiner((1, 0, 2), 3.0, 10) < 1e-12

    def test_degree_too_small(self):
        with pytest.raises(ValueError):
            verify_intertwiner((2, 1), 2.0, 2)
