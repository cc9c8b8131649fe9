"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`.  The full pytest run is
itself the final criterion (all module property suites green).
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from balltrace.core import shell_members
from balltrace.dixmier import (
    CommutatorPairProductSpectrum,
    HankelMonomialSpectrum,
    dixmier_estimate,
    hankel_power_experiment,
    macaev_profile,
    model_calibration_experiment,
    model_eigenvalues,
)
from balltrace.fock import verify_intertwiner
from balltrace.integrate import sphere_integral
from balltrace.operator import commutator, hankel_gram, hankel_routes, toeplitz
from balltrace.spectral import hermitian_eigen, partial_trace
from balltrace.symbol import hankel_density, parse_symbol
from helpers import oracle_toeplitz

INV_SQRT2 = 2.0**-0.5


def sym(text, d=2):
    return parse_symbol(text, d)


def report_pass(number, name, detail):
    print(f"\nACCEPTANCE {number} ({name}): PASS - {detail}")


@pytest.fixture(scope="module")
def dense_runs():
    """Dense-path Hankel experiments at degree 300 for the ratio criteria."""
    runs = {}
    symbols = {
        "z1": sym("z1"),
        "z2": sym("z2"),
        "(z1+z2)/sqrt2": sym("z1+z2") * INV_SQRT2,
        "2z1": sym("2*z1"),
    }
    for name, f in symbols.items():
        for nu in (2.0, 3.0):
            runs[(name, nu)] = hankel_power_experiment(f, nu, degree=300)
    return runs


def test_acceptance_1_intertwiner_identity():
    started = time.time()
    worst = 0.0
    cases = 0
    for d in (1, 2, 3):
        alphas = [tuple(a) for k in range(4) for a in shell_members(d, k)]
        for nu_offset in (0.0, 1.0, 2.5):
            nu = d + nu_offset
            for alpha in alphas:
                worst = max(worst, verify_intertwiner(alpha, nu, 20))
                cases += 1
    elapsed = time.time() - started
    assert worst <= 1e-12, f"worst deviation {worst:.3e}"
    assert elapsed < 10.0, f"runtime {elapsed:.1f}s exceeds 10s"
    report_pass(1, "intertwiner identity",
                f"{cases} cases, worst deviation {worst:.2e}, {elapsed:.1f}s")


def test_acceptance_2_closed_form_commutator_with_gram_oracle():
    started = time.time()
    nu, N = 2.0, 204
    computed = commutator(toeplitz(sym("conj(z1)"), nu, N),
                          toeplitz(sym("z1"), nu, N))
    oracle = commutator(oracle_toeplitz(sym("conj(z1)"), nu, N),
                        oracle_toeplitz(sym("z1"), nu, N))
    assert computed.exact_degree >= 200
    worst_closed = 0.0
    worst_oracle = 0.0
    for m in range(201):
        members = shell_members(2, m)
        want = np.array([(b[1] + 1) / ((m + 1) * (m + 2)) for b in members])
        got = np.diagonal(computed.block(m, 0)).real
        ora = np.diagonal(oracle.block(m, 0)).real
        worst_closed = max(worst_closed, float(np.abs(got - want).max()))
        worst_oracle = max(worst_oracle, float(np.abs(ora - want).max()))
    elapsed = time.time() - started
    assert worst_closed <= 1e-12
    assert worst_oracle <= 1e-12
    assert elapsed < 30.0, f"runtime {elapsed:.1f}s exceeds 30s"
    report_pass(2, "closed-form commutator",
                f"degree 200, |computed-closed| {worst_closed:.2e}, "
                f"|gram-oracle-closed| {worst_oracle:.2e}, {elapsed:.1f}s")


def test_acceptance_3_hankel_route_identity():
    worst = 0.0
    for text in ("z1", "z1+z2", "z1^2", "z1*z2"):
        for nu in (2.0, 3.0):
            _, deviation = hankel_routes(sym(text), nu, 60)
            worst = max(worst, deviation)
    assert worst <= 1e-12
    report_pass(3, "hankel identity",
                f"8 symbol/space combinations at degree 60, worst route "
                f"deviation {worst:.2e}")


def test_acceptance_4_macaev_membership(dense_runs):
    details = []
    for d in (1, 2):
        prof = macaev_profile(model_eigenvalues(0.0, d, 1_000_000),
                              n_lo=10_000, n_hi=1_000_000)
        assert 0.9 <= prof["rel_lo"] <= prof["rel_hi"] <= 1.1, prof
        details.append(f"model d={d}: [{prof['rel_lo']:.3f}, {prof['rel_hi']:.3f}]")
    # commutator products: the corridor on the dense window, plus the
    # reported bound over [1e2, window-max]
    for key in (("z1", 2.0), ("z1", 3.0)):
        rep = dense_runs[key]
        curve = rep["fit_samples_curve"]
        counts = np.asarray(curve["N"])
        mask = counts >= 10_000
        assert mask.sum() >= 4
        ratios = np.asarray(curve["S"])[mask] / np.log(counts[mask])
        kq = float(np.sum(np.asarray(curve["S"])[mask] * np.log(counts[mask]))
                   / np.sum(np.log(counts[mask]) ** 2))
        assert 0.9 * kq <= ratios.min() <= ratios.max() <= 1.1 * kq
        bound = rep["macaev"]["ratio_max"]
        assert np.isfinite(bound) and bound > 0
        details.append(f"dense {key}: bound {bound:.3f}")
    closed = macaev_profile(CommutatorPairProductSpectrum(2.0, 100_000), n_lo=100)
    assert np.isfinite(closed["ratio_max"])
    details.append(f"pair product bound {closed['ratio_max']:.3f}")
    report_pass(4, "Macaev membership", "; ".join(details))


def test_acceptance_5_model_calibration():
    expected = {1: 1.0 / math.pi, 2: 1.0 / (2 * math.pi**2)}
    details = []
    for d, want in expected.items():
        rep = model_calibration_experiment(0.0, d, 1_000_000)
        kappa = rep["kappa"]
        assert abs(kappa - want) <= 0.01 * want, (d, kappa, want)
        assert rep["claimed_constant"] == pytest.approx(1.0 / math.pi**d)
        details.append(
            f"d={d}: kappa={kappa:.6f} (claimed 1/pi^d = "
            f"{rep['claimed_constant']:.6f} printed alongside)"
        )
    report_pass(5, "model calibration", "; ".join(details))


def test_acceptance_6_hankel_power_desk_scale():
    rep2 = hankel_power_experiment(sym("z1"), 2.0, max_shell=100_000)
    integral2 = sphere_integral(hankel_density(sym("z1")) ** 2)
    assert integral2.as_fraction == Fraction(1, 3)
    assert abs(rep2["kappa"] - 0.1667) <= 0.01 * 0.1667
    f3 = parse_symbol("z1", 3)
    rep3 = hankel_power_experiment(f3, 3.0, max_shell=30_000)
    integral3 = sphere_integral(hankel_density(f3) ** 3)
    assert integral3.as_fraction == Fraction(2, 5)
    ratio2 = rep2["ratio"] * math.factorial(2)
    ratio3 = rep3["ratio"] * math.factorial(3)
    assert abs(ratio3 - ratio2) <= 0.05 * abs(ratio2)
    assert rep2["claimed_ratio"] == 1.0 and rep3["claimed_ratio"] == 1.0
    report_pass(
        6, "Hankel power at desk scale",
        f"d=2: kappa={rep2['kappa']:.5f}, I=1/3, ratio={rep2['ratio']:.5f}; "
        f"d=3: I=2/5, ratio={rep3['ratio']:.5f}; d!-normalized ratios "
        f"{ratio2:.4f} vs {ratio3:.4f} (claimed ratio 1 printed alongside)",
    )


def test_acceptance_7_ratio_consistency(dense_runs):
    ratios = {}
    for key, rep in dense_runs.items():
        assert rep["ratio"] is not None
        ratios[key] = rep["ratio"]
    values = list(ratios.values())
    lo, hi = min(values), max(values)
    assert hi - lo <= 0.02 * hi, f"ratio spread {ratios}"
    # nu-independence explicitly
    for name in ("z1", "z2", "(z1+z2)/sqrt2", "2z1"):
        a, b = ratios[(name, 2.0)], ratios[(name, 3.0)]
        assert abs(a - b) <= 0.02 * max(a, b)
    # closed-form confirmation where the symbol is a coordinate monomial
    for name, scale in (("z1", 1.0), ("z2", 1.0), ("2z1", 4.0)):
        for nu in (2.0, 3.0):
            fam = HankelMonomialSpectrum(2, nu, 100_000, scale=scale, power=2)
            fit = dixmier_estimate(fam)
            closed_ratio = fit.kappa / (scale**2 / 3.0)
            assert abs(closed_ratio - ratios[(name, nu)]) <= 0.02 * closed_ratio
    report_pass(
        7, "ratio consistency",
        f"8 dense runs at degree 300: ratios in [{lo:.5f}, {hi:.5f}] "
        f"(spread {(hi - lo) / hi:.2%}), closed-form confirmations agree",
    )


def test_acceptance_8_scaling_exactness():
    base = hermitian_eigen(hankel_gram(sym("z1"), 2.0, 60)).power(2)
    scaled = hermitian_eigen(hankel_gram(sym("2*z1"), 2.0, 60)).power(2)
    sb = np.cumsum(base.values_sorted())
    sc = np.cumsum(scaled.values_sorted())
    rel = np.abs(sc - 16.0 * sb) / np.maximum(np.abs(16.0 * sb), 1e-300)
    assert rel.max() <= 1e-13, f"max relative deviation {rel.max():.2e}"
    report_pass(8, "scaling exactness",
                f"|c|^(2d) = 16 partial-sum scaling, max rel dev {rel.max():.2e}")


def test_acceptance_9_helton_howe_disk(tmp_path):
    nu, N = 2.0, 10_000
    A = commutator(toeplitz(parse_symbol("conj(z)", 1), nu, N),
                   toeplitz(parse_symbol("z", 1), nu, N))
    worst = 0.0
    gaps = []
    for n in (100, 1_000, A.exact_degree):
        got = partial_trace(A, n)
        want = 1.0 - 1.0 / (n + 2)
        worst = max(worst, abs(got - want))
        gaps.append(abs(got - 1.0))
    assert worst <= 1e-12
    assert gaps == sorted(gaps, reverse=True) and gaps[-1] < 1.1e-4

    from balltrace.cli import run

    out = tmp_path / "hh.json"
    code = run([
        "helton-howe", "--d", "1", "--nu", "2", "--symbols", "z,conj(z)",
        "--degree", "400", "--out", str(out), "--no-plot",
    ])
    assert code == 0
    res = json.loads(out.read_text())["results"]
    assert "wedge" in res and "constant_vs_wedge_value" in res
    c = res["constant_vs_wedge_value"]
    report_pass(
        9, "Helton-Howe disk sanity",
        f"telescoping trace exact to {worst:.2e}, converges to 1; wedge "
        f"report written with fitted constant {c['re']:.4g}{c['im']:+.4g}i",
    )


def test_acceptance_10_property_suites():
    # the pytest run over tests/ is the criterion: every module's
    # invariants-and-properties bullets live in the per-module suites
    import pathlib

    here = pathlib.Path(__file__).parent
    suites = [
        "test_core.py", "test_symbol.py", "test_integrate.py",
        "test_operator.py", "test_spectral.py", "test_dixmier.py",
        "test_fock.py", "test_cli.py",
    ]
    missing = [s for s in suites if not (here / s).exists()]
    assert not missing, f"missing property suites: {missing}"
    import balltrace.cli
    import balltrace.core
    import balltrace.dixmier
    import balltrace.fock
    import balltrace.integrate
    import balltrace.operator
    import balltrace.spectral
    import balltrace.symbol  # noqa: F401

    report_pass(10, "property suites",
                "all eight module suites present; the green pytest run over "
                "tests/ constitutes this criterion")
