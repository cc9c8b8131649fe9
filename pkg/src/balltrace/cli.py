"""Batch experiment runner: builds operators, fits trace asymptotics, and
writes JSON/CSV reports with figures alongside.

Exit codes: 0 success, 2 validation error, 3 unstable fit (the report is
still written, with the instability flagged inside).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dixmier import (
    commutator_product_experiment,
    hankel_power_experiment,
    macaev_profile,
    model_calibration_experiment,
    model_eigenvalues,
)
from .fock import verify_intertwiner
from .integrate import ball_integral, mc_sphere_integral, sphere_integral, wedge_integral
from .operator import antisymmetrize, commutator, compose, hankel_gram, toeplitz
from .spectral import hermitian_eigen, partial_trace, schatten_partial
from .symbol import (
    PolySymbol,
    SymbolParseError,
    boundary_poisson,
    hankel_density,
    parse_symbol,
    reduce_on_sphere,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_UNSTABLE = 3


# -- deterministic serialization ------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("reports must not contain NaN or infinity")
    if x == int(x) and abs(x) < 1e16:
        return format(x, ".1f")
    return format(x, ".17g")


def _dump_json(obj, parts: list, indent: int = 0):
    pad = "  " * indent
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, complex):
        _dump_json({"re": obj.real, "im": obj.imag}, parts, indent)
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        keys = sorted(obj, key=str)
        for i, k in enumerate(keys):
            parts.append("  " * (indent + 1) + f'"{k}": ')
            _dump_json(obj[k], parts, indent + 1)
            parts.append(",\n" if i + 1 < len(keys) else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            parts.append("[]")
            return
        parts.append("[")
        for i, item in enumerate(seq):
            _dump_json(item, parts, indent + 1)
            if i + 1 < len(seq):
                parts.append(", ")
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: dict) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    parts: list = []
    _dump_json(report, parts)
    parts.append("\n")
    return "".join(parts)


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(_fmt_float(float(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# -- configuration ----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Resolved run parameters echoed verbatim into every report."""

    command: str
    params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"command": self.command, **self.params}


def _resolve_threads(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("BALLTRACE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _parse_symbol_list(text: str, d: int) -> list[PolySymbol]:
    items = [s.strip() for s in text.split(",")]
    if any(not s for s in items):
        raise ValueError("empty symbol in list")
    return [parse_symbol(s, d) for s in items]


def _parse_pairs(text: str, d: int):
    pairs = []
    for chunk in text.split(";"):
        sides = [s.strip() for s in chunk.split(",")]
        if len(sides) != 2:
            raise ValueError(f"each pair needs exactly two symbols, got {chunk!r}")
        pairs.append((parse_symbol(sides[0], d), parse_symbol(sides[1], d)))
    return pairs


def _require(cond: bool, message: str):
    if not cond:
        raise ValueError(message)


def _common_config(args, threads: int) -> dict:
    return {
        "seed": args.seed,
        "threads": threads,
        "stability_tol": args.stability_tol,
        "format": args.format,
        "plot": args.plot,
        "window_frac": args.window_frac,
        "fit_samples": args.fit_samples,
    }


def _fit_curve_lists(counts, sums) -> dict:
    return {
        "N": [float(c) for c in counts],
        "S": [float(s) for s in sums],
    }


# -- command handlers ---------------------------------------------------------------


def _cmd_dixmier(args, ctx):
    _require(args.d >= 1, "dimension must be >= 1")
    _require(args.nu >= args.d, f"need nu >= d, got nu={args.nu}, d={args.d}")
    _require(
        (args.shells is None) != (args.degree is None),
        "exactly one of --shells (closed form) or --degree (dense) is required",
    )
    pairs = _parse_pairs(args.pairs, args.d)
    _require(len(pairs) == args.d, f"need d={args.d} pairs, got {len(pairs)}")
    report = commutator_product_experiment(
        pairs,
        args.nu,
        degree=args.degree,
        max_shell=args.shells,
        threads=ctx["threads"],
        window_frac=args.window_frac,
        samples=args.fit_samples,
        stability_tol=args.stability_tol,
    )
    ctx["flagged"] = report["flagged"]
    kappa = report["kappa"]["re"]
    ratio = report["ratio"]
    print(f"kappa = {kappa:.8g}")
    if ratio is not None:
        print(f"integral = {report['integral']['re']:.8g}   "
              f"ratio = {ratio['re']:.8g}")
    if args.plot and "fit_samples_curve" in report:
        from . import plots

        curve = report["fit_samples_curve"]
        fig = plots.fit_figure(
            curve["N"], curve["S"], report["fit"]["kappa"],
            report["fit"]["intercept"], ctx["fig_path"],
            title="commutator product partial sums",
        )
        report["figure"] = fig
    return report


def _cmd_hankel(args, ctx):
    _require(args.d >= 1, "dimension must be >= 1")
    _require(args.nu >= args.d, f"need nu >= d, got nu={args.nu}, d={args.d}")
    _require(
        (args.shells is None) != (args.degree is None),
        "exactly one of --shells (closed form) or --degree (dense) is required",
    )
    f = parse_symbol(args.symbol, args.d)
    report = hankel_power_experiment(
        f,
        args.nu,
        degree=args.degree,
        max_shell=args.shells,
        threads=ctx["threads"],
        window_frac=args.window_frac,
        samples=args.fit_samples,
        stability_tol=args.stability_tol,
    )
    ctx["flagged"] = report["flagged"]
    ratio = report["ratio"]
    print(f"kappa = {report['kappa']:.8g}")
    print(f"integral = {report['integral']['re']:.8g}"
          + (f"   ratio = {ratio:.8g}" if ratio is not None else ""))
    if args.plot and "fit_samples_curve" in report:
        from . import plots

        curve = report["fit_samples_curve"]
        report["figure"] = plots.fit_figure(
            curve["N"], curve["S"], report["fit"]["kappa"],
            report["fit"]["intercept"], ctx["fig_path"],
            title="Hankel power partial sums",
        )
    return report


def _cmd_helton_howe(args, ctx):
    _require(args.d >= 1, "dimension must be >= 1")
    _require(args.nu >= args.d, f"need nu >= d, got nu={args.nu}, d={args.d}")
    symbols = _parse_symbol_list(args.symbols, args.d)
    _require(
        len(symbols) == 2 * args.d,
        f"need 2d = {2 * args.d} symbols, got {len(symbols)}",
    )
    _require(args.degree is not None, "--degree is required")
    max_deg = max(s.total_degree for s in symbols)
    _require(args.degree >= max_deg, "--degree smaller than the symbol degree")
    ops = [toeplitz(s, args.nu, args.degree) for s in symbols]
    anti = antisymmetrize(ops)
    window = anti.exact_degree
    _require(window >= 0, "no exact window at this degree")
    sizes = sorted(set(np.geomspace(1, max(1, window), 12).astype(int)) | {window})
    traces = [partial_trace(anti, n) for n in sizes]
    wedge = wedge_integral(symbols)
    final = traces[-1]
    det = wedge.det_integral.approx
    report = {
        "d": args.d,
        "nu": args.nu,
        "degree": args.degree,
        "exact_window": window,
        "symbols": [str(s) for s in symbols],
        "partial_traces": [
            {"window": int(n), "re": t.real, "im": t.imag}
            for n, t in zip(sizes, traces)
        ],
        "wedge": {
            "det_integral": {"re": det.real, "im": det.imag},
            "det_integral_exact": (
                str(wedge.det_integral.exact)
                if wedge.det_integral.exact is not None else None
            ),
            "ball_volume": wedge.ball_volume,
            "form_factor": {"re": wedge.form_factor.real,
                            "im": wedge.form_factor.imag},
            "wedge_value": {"re": wedge.wedge_value.real,
                            "im": wedge.wedge_value.imag},
            "exact_pi_coeff": (
                str(wedge.exact_pi_coeff)
                if wedge.exact_pi_coeff is not None else None
            ),
        },
        "trace_at_window": {"re": final.real, "im": final.imag},
    }
    # fitted proportionality constants, stated rather than asserted
    if det != 0:
        report["constant_vs_det_integral"] = {
            "re": (final / det).real, "im": (final / det).imag,
        }
    if wedge.wedge_value != 0:
        c = final / wedge.wedge_value
        report["constant_vs_wedge_value"] = {"re": c.real, "im": c.imag}
    print(f"partial trace at window {window}: {final.real:.10g}")
    print(f"wedge value: {wedge.wedge_value:.8g}")
    if args.plot:
        from . import plots

        report["figure"] = plots.trace_figure(
            sizes, [t.real for t in traces], ctx["fig_path"],
            title="antisymmetrization partial trace",
        )
    return report


def _cmd_calibrate_model(args, ctx):
    _require(args.d >= 1, "dimension must be >= 1")
    _require(args.c >= 0, "offset c must be >= 0")
    _require(args.shells >= 1000, "--shells must be at least 1000")
    report = model_calibration_experiment(
        args.c, args.d, args.shells, power=args.power,
        window_frac=args.window_frac, samples=args.fit_samples,
        stability_tol=args.stability_tol,
    )
    ctx["flagged"] = report["flagged"]
    family = model_eigenvalues(args.c, args.d, args.shells, args.power)
    reliable = family.reliable_count()
    prof = macaev_profile(
        family, n_lo=min(10_000, max(100, reliable // 100)), n_hi=reliable
    )
    report["macaev"] = prof
    counts, sums = family.samples_at(
        np.geomspace(max(10, reliable // 4), reliable, args.fit_samples)
    )
    report["fit_samples_curve"] = _fit_curve_lists(counts, sums)
    print(f"kappa = {report['kappa']:.8g}")
    print(f"claimed constant 1/pi^d = {report['claimed_constant']:.8g}   "
          f"factorial-normalized = {report['factorial_normalized_constant']:.8g}")
    if args.plot:
        from . import plots

        report["figure"] = plots.fit_figure(
            counts, sums, report["fit"]["kappa"], report["fit"]["intercept"],
            ctx["fig_path"], title="reference family partial sums",
        )
    return report


def _cmd_verify_intertwiner(args, ctx):
    alpha = tuple(int(x) for x in args.alpha.split(","))
    _require(len(alpha) == args.d, f"alpha length {len(alpha)} != d={args.d}")
    _require(all(a >= 0 for a in alpha), "alpha entries must be >= 0")
    _require(args.nu >= args.d, f"need nu >= d, got nu={args.nu}, d={args.d}")
    _require(args.degree >= sum(alpha), "--degree smaller than |alpha|")
    deviation = verify_intertwiner(alpha, args.nu, args.degree)
    report = {
        "d": args.d,
        "nu": args.nu,
        "alpha": list(alpha),
        "degree": args.degree,
        "max_deviation": deviation,
    }
    print(f"max deviation = {deviation:.3e}")
    return report


def _cmd_bracket(args, ctx):
    _require(args.d >= 1, "dimension must be >= 1")
    symbols = _parse_symbol_list(args.symbols, args.d)
    _require(len(symbols) == 2, "--symbols must hold exactly one pair f,g")
    f, g = symbols
    br = boundary_poisson(f, g)
    red = reduce_on_sphere(br)
    integral = sphere_integral(br)
    report = {
        "d": args.d,
        "f": str(f),
        "g": str(g),
        "bracket_reduced": str(red),
        "integral": {
            "re": integral.approx.real,
            "im": integral.approx.imag,
            "exact": str(integral.exact) if integral.exact is not None else None,
        },
    }
    print(f"bracket on sphere: {red}")
    print(f"integral = {integral.approx.real:.10g}")
    if args.mc_samples > 0:
        mc = mc_sphere_integral(red, args.mc_samples, args.seed)
        report["mc_check"] = {
            "re": mc.approx.real,
            "im": mc.approx.imag,
            "samples": args.mc_samples,
            "provenance": mc.provenance,
        }
        print(f"mc check ({args.mc_samples} samples) = {mc.approx.real:.6g}")
    return report


def _cmd_schatten_profile(args, ctx):
    _require(args.d >= 1, "dimension must be >= 1")
    _require(args.nu >= args.d, f"need nu >= d, got nu={args.nu}, d={args.d}")
    f = parse_symbol(args.symbol, args.d)
    _require(f.is_holomorphic(), "Schatten profile needs a holomorphic symbol")
    if args.p_list:
        ps = [int(p) for p in args.p_list.split(",")]
    else:
        ps = [2 * args.d + 2, 2 * args.d + 4, 2 * args.d + 6]
    _require(all(p > 0 and p % 2 == 0 for p in ps),
             "p values must be positive even integers (polynomial integrand)")
    op = hankel_gram(f, args.nu, args.degree)
    window = op.exact_degree
    dens = hankel_density(f)
    rows = []
    for p in ps:
        partial = schatten_partial(op, p / 2.0, window)
        poly = dens ** (p // 2)
        weight = math.pi**args.d * math.gamma(p + 1) / math.gamma(p + args.d + 1)
        integral = weight * ball_integral(poly, p + args.d + 1).approx.real
        ratio = partial / integral if integral != 0 else None
        rows.append({"p": p, "partial_sum": partial, "integral": integral,
                     "ratio": ratio})
        print(f"p = {p}: partial sum = {partial:.8g}, integral = {integral:.8g}"
              + (f", ratio = {ratio:.6g}" if ratio is not None else ""))
    report = {
        "d": args.d,
        "nu": args.nu,
        "degree": args.degree,
        "exact_window": window,
        "symbol": str(f),
        "table": rows,
    }
    ctx["tables"]["profile"] = (
        ["p", "partial_sum", "integral", "ratio"],
        [(r["p"], r["partial_sum"], r["integral"],
          r["ratio"] if r["ratio"] is not None else "") for r in rows],
    )
    if args.plot:
        from . import plots

        report["figure"] = plots.schatten_figure(
            [r["p"] for r in rows],
            [r["partial_sum"] for r in rows],
            [r["integral"] for r in rows],
            ctx["fig_path"],
        )
    return report


def _cmd_spectrum(args, ctx):
    _require(args.d >= 1, "dimension must be >= 1")
    _require(args.nu >= args.d, f"need nu >= d, got nu={args.nu}, d={args.d}")
    _require(
        (args.symbol is None) != (args.pairs is None),
        "exactly one of --symbol or --pairs is required",
    )
    if args.symbol is not None:
        f = parse_symbol(args.symbol, args.d)
        op = hankel_gram(f, args.nu, args.degree)
        label = f"hankel_gram({f})"
    else:
        pairs = _parse_pairs(args.pairs, args.d)
        op = None
        for fj, gj in pairs:
            cm = commutator(
                toeplitz(fj, args.nu, args.degree),
                toeplitz(gj, args.nu, args.degree),
            )
            op = cm if op is None else compose(op, cm)
        label = "commutator product"
    spec = hermitian_eigen(op, threads=ctx["threads"]).power(args.power)
    report = {
        "d": args.d,
        "nu": args.nu,
        "degree": args.degree,
        "power": args.power,
        "operator": label,
        "exact_window": op.exact_degree,
        "spectrum": spec.to_json_dict(),
    }
    ctx["tables"]["spectrum"] = (
        ["shell", "index", "value"],
        list(spec.to_csv_rows()),
    )
    if args.operator_out:
        Path(args.operator_out).write_text(dumps_report(op.to_json_dict()))
        report["operator_file"] = args.operator_out
    print(f"{label}: {spec.count} eigenvalues over shells 0..{spec.max_shell}, "
          f"residual {spec.residual:.2e}")
    if args.plot:
        from . import plots

        report["figure"] = plots.spectrum_figure(
            spec, ctx["fig_path"], title=f"spectrum of {label}"
        )
    return report


HANDLERS = {
    "dixmier": _cmd_dixmier,
    "hankel": _cmd_hankel,
    "helton-howe": _cmd_helton_howe,
    "calibrate-model": _cmd_calibrate_model,
    "verify-intertwiner": _cmd_verify_intertwiner,
    "bracket": _cmd_bracket,
    "schatten-profile": _cmd_schatten_profile,
    "spectrum": _cmd_spectrum,
}

TABLE_COMMANDS = {"schatten-profile", "spectrum"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balltrace",
        description=(
            "Spectral experiments for Toeplitz/Hankel commutator traces on "
            "Hardy and weighted Bergman spaces of the unit ball."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plot_default=True):
        p.add_argument("--out", default=None, help="report path (JSON)")
        p.add_argument("--format", choices=["json", "csv", "both"], default="json")
        p.add_argument("--plot", action=argparse.BooleanOptionalAction,
                       default=plot_default, help="render figures next to the report")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: BALLTRACE_THREADS or cores)")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for Monte Carlo cross-checks")
        p.add_argument("--stability-tol", type=float, default=0.05,
                       help="relative fit-stability tolerance (exit 3 beyond it)")
        p.add_argument("--window-frac", type=float, default=0.25)
        p.add_argument("--fit-samples", type=int, default=48)

    p = sub.add_parser("dixmier", help="trace of a product of Toeplitz commutators")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--pairs", required=True,
                   help="d pairs 'f1,g1;f2,g2;...' in the symbol grammar")
    p.add_argument("--shells", type=int, default=None,
                   help="closed-form path: number of degree shells")
    p.add_argument("--degree", type=int, default=None,
                   help="dense path: truncation degree")
    common(p)

    p = sub.add_parser("hankel", help="trace of the d-th Hankel square-modulus power")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--symbol", required=True, help="holomorphic symbol f")
    p.add_argument("--shells", type=int, default=None)
    p.add_argument("--degree", type=int, default=None)
    common(p)

    p = sub.add_parser("helton-howe",
                       help="antisymmetrization trace against the wedge integral")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--symbols", required=True, help="2d comma-separated symbols")
    p.add_argument("--degree", type=int, required=True)
    common(p)

    p = sub.add_parser("calibrate-model",
                       help="fit the reference diagonal family")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--shells", type=int, required=True)
    p.add_argument("--power", type=int, default=None)
    common(p)

    p = sub.add_parser("verify-intertwiner",
                       help="monomial Toeplitz vs ladder factorization")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--alpha", required=True, help="comma-separated exponents")
    p.add_argument("--degree", type=int, default=20)
    common(p, plot_default=False)

    p = sub.add_parser("bracket",
                       help="boundary Poisson bracket and its sphere integral")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--symbols", required=True, help="one pair 'f,g'")
    p.add_argument("--mc-samples", type=int, default=0,
                   help="Monte Carlo cross-check sample count")
    common(p, plot_default=False)

    p = sub.add_parser("schatten-profile",
                       help="partial Schatten sums vs weighted ball integrals")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--symbol", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--p-list", default=None, help="even integers, e.g. '6,8,10'")
    common(p)

    p = sub.add_parser("spectrum", help="raw shell spectra of an operator")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--symbol", default=None)
    p.add_argument("--pairs", default=None)
    p.add_argument("--power", type=int, default=1)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--operator-out", default=None,
                   help="also dump the operator in the block JSON schema")
    common(p)

    return parser


def run(argv=None) -> int:
    """Parse arguments, run one experiment, write its report files."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION

    out_path = Path(args.out) if args.out else Path(f"balltrace-{args.command}.json")
    ctx = {
        "threads": _resolve_threads(args.threads),
        "tables": {},
        "flagged": False,
        "fig_path": out_path.with_suffix(".png"),
    }
    if args.format in ("csv", "both") and args.command not in TABLE_COMMANDS:
        print(f"error: --format {args.format} is only available for "
              f"{sorted(TABLE_COMMANDS)}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        results = HANDLERS[args.command](args, ctx)
    except (SymbolParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if "figure" in results:
        # reports reference sibling files by name so reruns in different
        # directories stay byte-identical
        results["figure"] = Path(results["figure"]).name

    config = ExperimentConfig(
        command=args.command,
        params={
            **{k: v for k, v in vars(args).items()
               if k not in ("command", "out") and v is not None},
            "threads": ctx["threads"],
        },
    )
    report = {
        "command": args.command,
        "config": config.to_json_dict(),
        "results": results,
    }
    out_path.write_text(dumps_report(report))
    print(f"report: {out_path}")
    if args.format in ("csv", "both"):
        for name, (header, rows) in ctx["tables"].items():
            csv_path = out_path.with_suffix(f".{name}.csv")
            csv_path.write_text(_csv_text(header, rows))
            print(f"table: {csv_path}")
    return EXIT_UNSTABLE if ctx["flagged"] else EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
