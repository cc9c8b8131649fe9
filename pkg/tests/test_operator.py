import math

import numpy as np
import pytest

from balltrace.core import shell_dim, shell_members
from balltrace.operator import (
    BlockOperator,
    antisymmetrize,
    commutator,
    compose,
    hankel_gram,
    hankel_routes,
    identity,
    max_block_diff,
    toeplitz,
)
from balltrace.symbol import parse_symbol
from helpers import oracle_toeplitz


def sym(text, d=2):
    return parse_symbol(text, d)


class TestToeplitz:
    def test_constant_symbol_gives_identity(self):
        op = toeplitz(sym("1"), 2.0, 6)
        ident = identity(2, 2.0, 6)
        assert max_block_diff(op, ident, 6) == 0.0

    def test_shift_one_coefficient(self):
        # z1 sends the monomial with exponents (1,0) to (2,0) with weight sqrt(2/3)
        op = toeplitz(sym("z1"), 2.0, 5)
        shell1 = [tuple(a) for a in shell_members(2, 1)]
        shell2 = [tuple(a) for a in shell_members(2, 2)]
        col = shell1.index((1, 0))
        row = shell2.index((2, 0))
        assert op.block(1, 1)[row, col] == pytest.approx(math.sqrt(2 / 3), abs=1e-15)

    def test_modulus_symbol_diagonal_vs_gram_oracle(self):
        f = sym("conj(z1)*z1")
        op = toeplitz(f, 2.0, 12)
        oracle = oracle_toeplitz(f, 2.0, 12)
        assert max_block_diff(op, oracle, 12) < 1e-13
        for m in range(6):
            got = np.diagonal(op.block(m, 0))
            members = shell_members(2, m)
            want = [(a[0] + 1) / (m + 2) for a in members]
            np.testing.assert_allclose(got.real, want, atol=1e-14)

    def test_gram_oracle_random_symbols(self):
        rng = np.random.default_rng(60)
        for nu in (2.0, 3.5):
            for text in ("z1*z2", "z1 + conj(z2)", "conj(z1)*z1*z2", "z1^2 - 2i*z2"):
                f = sym(text)
                op = toeplitz(f, nu, 8)
                oracle = oracle_toeplitz(f, nu, 8)
                assert max_block_diff(op, oracle, op.exact_degree) < 1e-13

    def test_degree_selection_rule(self):
        op = toeplitz(sym("z1^2*conj(z2)"), 2.0, 8)
        assert op.shifts() == {1}
        op2 = toeplitz(sym("conj(z1)*conj(z2)"), 2.0, 8)
        assert op2.shifts() == {-2}

    def test_adjoint_relation_exact(self):
        f = sym("(1+2i)*z1^2 + z2*conj(z1)")
        op = toeplitz(f, 2.5, 10)
        opc = toeplitz(f.conj(), 2.5, 10)
        assert max_block_diff(opc, op.adjoint(), 8) < 1e-13

    def test_modulus_symbols_are_hermitian_on_window(self):
        for text in ("conj(z1)*z1", "(z1+z2)*(conj(z1)+conj(z2))",
                     "2 + conj(z1)*z1 + conj(z2)*z2"):
            f = sym(text)
            op = toeplitz(f, 2.0, 10)
            assert op.hermitian_deviation(op.exact_degree) <= 1e-13

    def test_exact_degree_budget(self):
        assert toeplitz(sym("z1"), 2.0, 10).exact_degree == 10
        assert toeplitz(sym("conj(z1)"), 2.0, 10).exact_degree == 9
        assert toeplitz(sym("conj(z1)*conj(z2)"), 2.0, 10).exact_degree == 8

    def test_rejects_small_nu(self):
        with pytest.raises(ValueError):
            toeplitz(sym("z1"), 1.5, 5)

    def test_rejects_small_degree(self):
        with pytest.raises(ValueError):
            toeplitz(sym("z1^3"), 2.0, 2)

    def test_hardy_endpoint_allowed(self):
        op = toeplitz(sym("z1"), 2.0, 6)  # nu = d = 2
        oracle = oracle_toeplitz(sym("z1"), 2, 6)
        assert max_block_diff(op, oracle, 6) < 1e-13


class TestCompose:
    def test_shift_structure(self):
        up = toeplitz(sym("z1"), 2.0, 8)
        down = toeplitz(sym("conj(z1)"), 2.0, 8)
        prod = compose(down, up)
        assert prod.shifts() == {0}

    def test_commutator_with_self_vanishes(self):
        op = toeplitz(sym("z1 + conj(z2)"), 2.0, 8)
        assert commutator(op, op).max_abs() == 0.0

    def test_closed_form_commutator_diagonal(self):
        # [T_conj(z1), T_z1] on the Hardy space of the 2-ball
        op = commutator(toeplitz(sym("conj(z1)"), 2.0, 20), toeplitz(sym("z1"), 2.0, 20))
        for m in range(op.exact_degree + 1):
            members = shell_members(2, m)
            want = [(a[1] + 1) / ((m + 1) * (m + 2)) for a in members]
            got = np.diagonal(op.block(m, 0)).real
            np.testing.assert_allclose(got, want, atol=1e-14)

    def test_commutator_against_dense_oracle(self):
        # oracle: assemble full dense matrices and subtract the products
        nu, N = 2.5, 8
        A = toeplitz(sym("conj(z1)"), nu, N)
        B = toeplitz(sym("z1"), nu, N)
        got = commutator(A, B)

        dim = sum(shell_dim(2, m) for m in range(N + 1))
        offs = np.cumsum([0] + [shell_dim(2, m) for m in range(N + 1)])

        def dense(op):
            M = np.zeros((dim, dim), dtype=complex)
            for (m, s), mat in op.blocks.items():
                M[offs[m + s]:offs[m + s + 1], offs[m]:offs[m + 1]] = mat
            return M

        want = dense(A) @ dense(B) - dense(B) @ dense(A)
        got_dense = dense(got)
        # compare inside the exactness window only
        w = offs[got.exact_degree + 1]
        np.testing.assert_allclose(got_dense[:w, :w], want[:w, :w], atol=1e-13)

    def test_exactness_budget_matches_refined_truncation(self):
        # entries inside the window agree with a larger truncation; the
        # first shell beyond it genuinely disagrees
        f, g = sym("conj(z1)"), sym("z1")
        small = commutator(toeplitz(f, 2.0, 12), toeplitz(g, 2.0, 12))
        big = commutator(toeplitz(f, 2.0, 24), toeplitz(g, 2.0, 24))
        w = small.exact_degree
        for m in range(w + 1):
            np.testing.assert_allclose(small.block(m, 0), big.block(m, 0), atol=1e-14)
        # the budget may be conservative, but truncation damage does exist
        # somewhere above it, which is why the budget is tracked at all
        damage = max(
            np.abs(small.block(m, 0) - big.block(m, 0)).max()
            for m in range(w + 1, small.N + 1)
        )
        assert damage > 1e-3

    def test_mismatched_spaces_rejected(self):
        with pytest.raises(ValueError):
            compose(toeplitz(sym("z1"), 2.0, 8), toeplitz(sym("z1"), 3.0, 8))


class TestHankelGram:
    def test_coordinate_closed_form(self):
        op = hankel_gram(sym("z1"), 2.0, 16)
        for m in range(op.exact_degree + 1):
            members = shell_members(2, m)
            want = [(a[1] + 1) / ((m + 1) * (m + 2)) for a in members]
            np.testing.assert_allclose(np.diagonal(op.block(m, 0)).real, want, atol=1e-14)

    def test_constant_vanishes(self):
        assert hankel_gram(sym("2"), 2.0, 8).max_abs() == 0.0

    def test_disk_hardy_rank_one(self):
        op = hankel_gram(parse_symbol("z1", 1), 1.0, 30)
        assert op.block(0, 0)[0, 0] == pytest.approx(1.0, abs=1e-14)
        for m in range(1, op.exact_degree + 1):
            assert np.abs(op.block(m, 0)).max() < 1e-14

    def test_routes_agree(self):
        for text in ("z1", "z1+z2", "z1^2", "z1*z2"):
            for nu in (2.0, 3.0):
                _, dev = hankel_routes(sym(text), nu, 20)
                assert dev < 1e-12

    def test_positive_semidefinite(self):
        for text in ("z1", "z1+z2", "z1^2", "z1*z2"):
            op = hankel_gram(sym(text), 2.0, 14)
            for m in range(op.exact_degree + 1):
                vals = np.linalg.eigvalsh(op.block(m, 0))
                assert vals.min(initial=0.0) >= -1e-10

    def test_unitary_invariance_of_shell_spectra(self):
        c = 1 / math.sqrt(2)
        rotated = parse_symbol(f"{c!r}*z1 + {c!r}*z2", 2)
        a = hankel_gram(rotated, 2.0, 14)
        b = hankel_gram(sym("z1"), 2.0, 14)
        for m in range(min(a.exact_degree, b.exact_degree) + 1):
            va = np.sort(np.linalg.eigvalsh(a.block(m, 0)))
            vb = np.sort(np.linalg.eigvalsh(b.block(m, 0)))
            np.testing.assert_allclose(va, vb, atol=1e-10)

    def test_scaling_exact(self):
        base = hankel_gram(sym("z1"), 2.0, 12)
        scaled = hankel_gram(sym("2*z1"), 2.0, 12)
        for key, mat in base.blocks.items():
            np.testing.assert_array_equal(scaled.block(*key), 4.0 * mat)

    def test_rejects_non_holomorphic(self):
        with pytest.raises(ValueError):
            hankel_gram(sym("conj(z1)"), 2.0, 8)


class TestAntisymmetrize:
    def test_two_operators_is_commutator(self):
        A = toeplitz(sym("z1"), 2.0, 8)
        B = toeplitz(sym("conj(z2)"), 2.0, 8)
        got = antisymmetrize([A, B])
        want = commutator(A, B)
        assert max_block_diff(got, want, got.exact_degree) == 0.0

    def test_disk_pair_diagonal(self):
        # (T_z, T_conj(z)) on the Bergman space of the disk: the alternating
        # sum is minus the positive commutator, diagonal -1/((n+1)(n+2)),
        # telescoping to a partial trace of -1
        tz = toeplitz(parse_symbol("z1", 1), 2.0, 40)
        tzbar = toeplitz(parse_symbol("conj(z1)", 1), 2.0, 40)
        got = antisymmetrize([tz, tzbar])
        for n in range(got.exact_degree + 1):
            want = -1.0 / ((n + 1) * (n + 2))
            assert got.block(n, 0)[0, 0] == pytest.approx(want, abs=1e-14)
        w = got.exact_degree
        trace = sum(got.block(n, 0)[0, 0].real for n in range(w + 1))
        assert trace == pytest.approx(-(1.0 - 1.0 / (w + 2)), abs=1e-13)

    def test_odd_arity_rejected(self):
        A = toeplitz(sym("z1"), 2.0, 6)
        with pytest.raises(ValueError):
            antisymmetrize([A])

    def test_repeated_operator_alternating_sum(self):
        # no simplification is assumed: with a repeated entry the alternating
        # sum still evaluates, and for [A, A] it vanishes
        A = toeplitz(sym("z1 + conj(z1)"), 2.0, 8)
        got = antisymmetrize([A, A])
        assert got.max_abs() == 0.0


class TestSerialization:
    def test_round_trip(self):
        op = hankel_gram(sym("z1*z2"), 2.5, 8)
        data = op.to_json_dict()
        back = BlockOperator.from_json_dict(data)
        assert back.same_space(op)
        assert back.exact_degree == op.exact_degree
        assert max_block_diff(op, back, op.N) == 0.0

    def test_schema_fields(self):
        op = toeplitz(sym("z1"), 2.0, 3)
        data = op.to_json_dict()
        assert set(data) == {"d", "nu", "N", "exact_degree", "blocks"}
        for item in data["blocks"]:
            assert set(item) == {"m", "s", "rows", "cols", "re", "im"}
            assert len(item["re"]) == item["rows"] * item["cols"]
