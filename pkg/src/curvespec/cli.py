"""Command-line workflows: simulate, estimate, align, evaluate, experiment.

Exit codes: 0 on success, 1 for usage, schema or input errors, 2 for
numerical failures.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .align import AlignOptions, align
from .diffeo import FlowConfig, FlowError
from .estimator import (
    InsufficientReplicatesError,
    MleFit,
    discrete_offsets,
    estimate_curve,
    fit,
    ise_budget,
    realized_ise,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    run_alignment_experiment,
    run_estimation_experiment,
    simulate_stack,
)
from .noise import NoiseSpectrum, generator_metadata
from .spectral import FourierCoeffs, GridError, make_grid, synthesize
from . import svgplot

log = logging.getLogger("curvespec")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
CURVE_SAMPLES = 512


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def _default_J(n: int) -> int:
    return min(10, (n - 1) // 2)


def truth_sidecar_path(out: Path) -> Path:
    return _sibling(Path(out), ".truth.json")


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.from_dict(io.read_json(args.config))
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "seed": args.seed})
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    stack, params = simulate_stack(cfg, rng, misaligned=cfg.misalignment is not None)
    out = Path(args.out)
    io.write_contours(out, stack)
    sidecar = {
        "version": io.SCHEMA_VERSION,
        "n": cfg.n,
        "T": cfg.T,
        "J": cfg.J,
        "seed": cfg.seed,
        "rng": generator_metadata(),
        "truth": cfg.truth.to_dict(),
        "truth_spec": cfg.to_dict()["truth"],
        "spectrum": cfg.spectrum.to_dict(),
        "noise_spec": cfg.to_dict()["noise"],
        "alignment": None if params is None else params.to_dict(),
    }
    io.write_json(truth_sidecar_path(out), sidecar)
    print(f"wrote {out} and {truth_sidecar_path(out)}")
    return EXIT_OK


def _read_truth(path) -> dict:
    d = io.read_json(path)
    if not isinstance(d, dict) or "truth" not in d:
        raise io.SchemaError(f"{path}: field 'truth' missing")
    return d


def cmd_estimate(args) -> int:
    stack = io.read_contours(args.input)
    J = _default_J(stack.grid.n) if args.J is None else args.J
    try:
        est = fit(stack, J, with_variance=False if args.means_only else True)
    except InsufficientReplicatesError as exc:
        raise UsageError(f"{exc}; pass --means-only to estimate the curve alone") from None
    out = Path(args.out)
    io.write_json(out, est.to_dict())

    theta = -np.pi + 2 * np.pi * np.arange(CURVE_SAMPLES) / CURVE_SAMPLES
    curve = estimate_curve(est, theta)
    header = ["theta", "x", "y"]
    truth = spec = None
    if args.truth:
        truth = FourierCoeffs.from_dict(_read_truth(args.truth)["truth"])
        true_curve = synthesize(truth, theta)
        header += ["x_true", "y_true"]
        rows = np.column_stack([theta, curve, true_curve])
    else:
        rows = np.column_stack([theta, curve])
    io.write_csv(_sibling(out, ".curve.csv"), header, rows.tolist())

    if est.noise_var is not None:
        var_rows = [[j, v] for j, v in enumerate(est.noise_var.tolist())]
        var_header = ["j", "sigma2_hat"]
        if args.truth:
            spec = NoiseSpectrum.from_dict(_read_truth(args.truth)["spectrum"])
            true_var = spec.truncated(est.J)
            var_rows = [r + [float(true_var[r[0]])] for r in var_rows]
            var_header.append("sigma2_true")
        io.write_csv(_sibling(out, ".variances.csv"), var_header, var_rows)

    if args.svg:
        closed = np.vstack([curve, curve[:1]])
        series = [svgplot.Series(closed[:, 0], closed[:, 1], "estimate")]
        if truth is not None:
            tc = np.vstack([true_curve, true_curve[:1]])
            series.append(svgplot.Series(tc[:, 0], tc[:, 1], "truth", dashed=True))
        svgplot.save(_sibling(out, ".svg"), series, title="Estimated curve", equal_aspect=True)
        if est.noise_var is not None:
            j = np.arange(est.J + 1)
            vs = [svgplot.Series(j, est.noise_var, "estimated", style="cross")]
            if spec is not None:
                vs.append(svgplot.Series(j, spec.truncated(est.J), "true", style="circle"))
            svgplot.save(_sibling(out, ".variances.svg"), vs, title="Noise variances",
                         xlabel="j", ylabel="sigma2_j")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_align(args) -> int:
    stack = io.read_contours(args.input)
    if stack.T < 1:
        raise UsageError("alignment needs at least two contours")
    J = _default_J(stack.grid.n) if args.J is None else args.J
    opts = AlignOptions(
        mode=args.mode,
        max_iter=args.max_iter,
        tol=args.tol,
        grid_search_shifts=args.grid_search_shifts,
        flow=FlowConfig(args.steps),
    )
    res = align(stack, J, args.m, opts)
    out = Path(args.out)
    d = res.to_dict()
    d["n"] = stack.grid.n
    d["n_contours"] = stack.T + 1
    io.write_json(out, d)
    io.write_contours(_sibling(out, ".aligned.json"), res.aligned)
    print(
        f"M = {res.objective!r} (average error {d['average_error_display']}), "
        f"status {res.status}; wrote {out}"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    est = MleFit.from_dict(io.read_json(args.fit))
    if not args.truth:
        raise UsageError("evaluate needs the truth sidecar written by 'simulate'")
    side = _read_truth(args.truth)
    truth = FourierCoeffs.from_dict(side["truth"])
    spec = NoiseSpectrum.from_dict(side["spectrum"]) if side.get("spectrum") else None
    offsets = None
    if spec is not None:
        offsets = discrete_offsets(truth, spec, make_grid(est.n), est.J)
    budget = ise_budget(est, truth, spec, offsets)
    d = budget.to_dict()
    d["realized_ise"] = realized_ise(est, truth)
    d.update({"J": est.J, "n": est.n, "T": est.T})
    if args.out:
        io.write_json(args.out, d)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(io.dumps(d))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_dict(io.read_json(args.config))
    if args.kind == "alignment":
        report = run_alignment_experiment(cfg)
    else:
        report = run_estimation_experiment(cfg)
    out = Path(args.out)
    io.write_json(out, report.to_dict())
    header, rows = report.csv_rows()
    io.write_csv(_sibling(out, ".csv"), header, rows)
    if args.svg and report.kind == "estimation" and "sigma2_hat" in report.records:
        summ = report.summary()
        j = np.arange(cfg.J + 1)
        svgplot.save(
            _sibling(out, ".svg"),
            [
                svgplot.Series(j, summ["sigma2_hat_mean"], "mean estimate", style="cross"),
                svgplot.Series(j, report.theory["sigma2"], "true", style="circle"),
            ],
            title="Noise variances", xlabel="j", ylabel="sigma2_j",
        )
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="curvespec", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate noisy contours from a JSON config")
    s.add_argument("config")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="fit the spectral mean and noise variances")
    s.add_argument("input")
    s.add_argument("--J", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--truth", help="truth sidecar, overlaid in the CSV/SVG output")
    s.add_argument("--svg", action="store_true")
    s.add_argument("--means-only", action="store_true", help="skip noise variances (allows T = 0)")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("align", help="estimate root shifts and diffeomorphisms")
    s.add_argument("input")
    s.add_argument("--J", type=int)
    s.add_argument("--m", type=int, default=0)
    s.add_argument("--mode", choices=("w0-zero", "mean-zero"), default="w0-zero")
    s.add_argument("--out", required=True)
    s.add_argument("--grid-search-shifts", action="store_true")
    s.add_argument("--max-iter", type=int, default=500)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--steps", type=int, default=100, help="RK4 steps for the flows")
    s.set_defaults(func=cmd_align)

    s = sub.add_parser("evaluate", help="integrated squared error budget against the truth")
    s.add_argument("fit")
    s.add_argument("truth", nargs="?")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    s.add_argument("config")
    s.add_argument("--kind", choices=("estimation", "alignment"), default="estimation")
    s.add_argument("--out", required=True)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, io.SchemaError, GridError, InsufficientReplicatesError) as exc:
        print(f"curvespec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"curvespec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FlowError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"curvespec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
