"""Command line interface ``fid``.

Each subcommand runs one worked example and writes machine-readable output:
raw draws as CSV (``draw_index,value``) when ``--out`` is given, and a JSON
summary on standard output (or in ``--out`` for ``coverage``). Errors go to
standard error as ``ERROR:<code>:<message>``; the exit status is 2 for bad
input and 3 for numerical failures.

A JSON config with keys ``kind, model, params, seed, sizes, out`` can stand
in for the flags: ``fid --config run.json``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import conditional, correlation, discrete, gamma_shape, harness
from .core import location_cdf_inversion_model, location_normal_model
from .errors import DomainError, FiducialError, NumericalFailure
from .numerics import RandomSource, percentile

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
CONFIG_KEYS = {"kind", "model", "params", "seed", "sizes", "out"}
SIZE_KEYS = {"reps", "draws"}


class ConfigError(DomainError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _pmf(text: str) -> dict:
    out = {}
    try:
        for item in text.split(","):
            k, p = item.split(":")
            out[int(k)] = float(p)
    except ValueError:
        raise ConfigError(f"pmf must look like '-1:0.2,0:0.5', got {text!r}") from None
    return out


def _write_csv(path, draws) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("draw_index,value\n")
        for i, v in enumerate(np.asarray(draws, dtype=float).ravel()):
            fh.write(f"{i},{float(v)!r}\n")


def _emit(summary: dict, path=None) -> None:
    text = json.dumps(summary, indent=2) + "\n"
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _quantiles(draws, levels) -> dict:
    return {f"{p:g}": float(v) for p, v in zip(levels, np.atleast_1d(percentile(draws, np.asarray(levels))))}


# --- subcommands -------------------------------------------------------------


def cmd_corr(args):
    rng = RandomSource(args.seed)
    fid = correlation.fiducial_rho(args.r, args.n, rng, args.draws)
    if args.out:
        _write_csv(args.out, fid.draws)
    _emit({"model": fid.model_id, "seed": args.seed, "r": args.r, "draws": args.draws,
           "percentiles": _quantiles(fid.draws, args.levels)})


def cmd_gamma_shape(args):
    rng = RandomSource(args.seed)
    if args.y is not None:
        fid = gamma_shape.fiducial_alpha(np.array(args.y), rng, args.draws)
    else:
        model = gamma_shape.GammaShapeModel(args.n)
        y = model.sample_y(args.alpha0, RandomSource(args.seed, 1), 1)[0]
        fid = gamma_shape.fiducial_alpha(y, rng, args.draws)
    if args.out:
        _write_csv(args.out, fid.draws)
    _emit({"model": fid.model_id, "seed": args.seed, "w": fid.observation, "draws": args.draws,
           "percentiles": _quantiles(fid.draws, args.levels)})


def cmd_digitized(args):
    law = discrete.DigitizedLaw(args.d, args.pmf)
    thetas = [args.x - k * args.d for k in reversed(law.support)]
    summary = {
        "model": f"digitized(d={args.d:g})",
        "seed": args.seed,
        "x": args.x,
        "theta": thetas,
        "cdf": [discrete.digitized_fiducial_cdf(law, args.x, t) for t in thetas],
        "mean": discrete.digitized_fiducial_mean(law, args.x),
        "mode": discrete.digitized_fiducial_mode(law, args.x),
    }
    if args.out:
        model = discrete.digitized_model(law)
        u = model.law.sample(RandomSource(args.seed), args.draws)
        _write_csv(args.out, model.solve(u, args.x))
    _emit(summary)


def cmd_truncated(args):
    model = discrete.TruncatedMeanModel(args.sigma, args.n, args.mu_max)
    summary = {"model": f"truncated-{args.model}", "seed": args.seed, "xbar": args.xbar,
               "point_mass": discrete.truncated_pointmass(model, args.xbar)}
    if args.model == "A":
        fid = discrete.truncated_fiducial_A(model, args.xbar, RandomSource(args.seed), args.draws,
                                            fallback=True)
        summary["percentiles"] = _quantiles(fid.draws, args.levels)
        if args.out:
            _write_csv(args.out, fid.draws)
    else:
        if args.out:
            raise ConfigError("candidate B is reported in closed form; drop --out")
        summary["percentiles"] = {f"{p:g}": discrete.truncated_B_upper_limit(model, args.xbar, p)
                                  for p in args.levels}
    _emit(summary)


def cmd_conditional(args):
    x = args.x
    rng = RandomSource(args.seed)
    summary = {"model": args.model, "seed": args.seed, "x": x}
    draws = None
    if args.model in ("line-difference", "line-ratio"):
        if len(x) != 2:
            raise ConfigError("line conditioning needs --x x1,x2")
        mean, var = conditional.line_fiducial_difference(*x)
        if args.model == "line-difference":
            summary.update(mean=mean, variance=var)
            draws = mean + np.sqrt(var) * rng.normal(args.draws)
        else:
            summary["normalizer"] = conditional.line_ratio_normalizer(*x)
            draws = conditional.line_ratio_sample(*x, rng, args.draws)
        summary["tv_difference_vs_ratio"] = conditional.line_tv_distance(*x)
    elif args.model == "circle":
        if len(x) != 2:
            raise ConfigError("circle conditioning needs --x x1,x2")
        law = conditional.circle_fiducial(x, args.radius)
        summary.update(radius=args.radius, mean_dir=law.mean_dir, kappa=law.kappa)
        draws = law.sample(rng, args.draws)
    else:
        basis = np.array(args.basis, dtype=float).reshape(len(x), -1) if args.basis else np.eye(len(x))
        norms = np.linalg.norm(basis, axis=0)
        law = conditional.projection_conditional_fiducial(x, basis / np.where(norms > 0, norms, 1))
        summary.update(mean=[float(v) for v in law.mean], coords_mean=[float(v) for v in law.coords_mean])
        draws = law.sample(rng, args.draws)[:, 0]
    if args.out:
        _write_csv(args.out, draws)
    _emit(summary)


def _coverage_report(args):
    rng = RandomSource(args.seed)
    levels = args.levels
    if args.model == "location-normal":
        return harness.coverage_experiment(location_normal_model(), args.theta0, levels, args.reps,
                                           args.draws, rng)
    if args.model == "correlation":
        model = correlation.CorrelationModel(args.n).fiducial_model()
        theta0 = correlation.rho_to_theta(args.theta0)
        report = harness.coverage_experiment(model, theta0, levels, args.reps, args.draws, rng)
        report.model_id = f"correlation(n={args.n},rho0={args.theta0:g})"
        return report
    if args.model == "gamma-shape":
        model = gamma_shape.GammaShapeModel(args.n).fiducial_model()
        report = harness.coverage_experiment(model, args.theta0, levels, args.reps, args.draws, rng)
        report.model_id = f"gamma-shape(n={args.n},alpha0={args.theta0:g})"
        return report
    model = discrete.TruncatedMeanModel(args.sigma, args.n, args.mu_max)
    return harness.truncated_b_coverage(model, args.theta0, levels, args.reps, rng)


def cmd_coverage(args):
    start = time.perf_counter()
    report = _coverage_report(args)
    if args.timing:
        report.elapsed_ms = round(1000 * (time.perf_counter() - start), 3)
    _emit(report.to_json_dict(), args.out)


def cmd_equivalence(args):
    rng = RandomSource(args.seed)
    if args.model == "location":
        res = harness.equivalence_experiment(location_normal_model(), location_cdf_inversion_model(),
                                             args.x, args.draws, rng)
        summary = {"model": "location-normal vs location-normal-inversion", "seed": args.seed,
                   "draws": args.draws, "distance": res.distance, "threshold": res.threshold,
                   "pass": res.passed}
    else:
        r = args.x
        levels = args.levels
        structural = correlation.structural_percentiles(r, args.n, levels, rng.derive(1), args.draws)
        inversion = correlation.cdf_inversion_percentiles(r, args.n, levels, rng.derive(2), 4 * args.draws)
        gap = float(np.max(np.abs(structural - inversion)))
        summary = {"model": f"correlation(n={args.n}) structural vs cdf-inversion", "seed": args.seed,
                   "draws": args.draws, "levels": list(levels),
                   "structural": [float(v) for v in structural],
                   "inversion": [float(v) for v in inversion],
                   "max_abs_diff": gap, "threshold": 0.01, "pass": gap <= 0.01}
    _emit(summary, args.out)


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fid", description="Fiducial inference experiments.")
    p.add_argument("--config", help="JSON experiment config instead of a subcommand")
    sub = p.add_subparsers(dest="kind", parser_class=_Parser)

    def common(sp, draws=10_000, levels="0.025,0.5,0.975"):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--draws", type=int, default=draws)
        sp.add_argument("--levels", type=_floats, default=_floats(levels))
        sp.add_argument("--out")

    sp = sub.add_parser("corr", help="fiducial of a correlation coefficient")
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--model", choices=["corr"], default="corr")
    common(sp)
    sp.set_defaults(func=cmd_corr)

    sp = sub.add_parser("gamma-shape", help="fiducial of a gamma shape from data or simulated data")
    sp.add_argument("--y", type=_floats)
    sp.add_argument("--n", type=int, default=5)
    sp.add_argument("--alpha0", type=float, default=2.0)
    sp.add_argument("--model", choices=["gamma-shape"], default="gamma-shape")
    common(sp)
    sp.set_defaults(func=cmd_gamma_shape)

    sp = sub.add_parser("digitized", help="exact fiducial CDF for digitized location data")
    sp.add_argument("--pmf", type=_pmf, default=_pmf("-1:0.2,0:0.5,1:0.3"))
    sp.add_argument("--d", type=float, default=1.0)
    sp.add_argument("--x", type=float, default=0.0)
    sp.add_argument("--model", choices=["digitized"], default="digitized")
    common(sp)
    sp.set_defaults(func=cmd_digitized)

    sp = sub.add_parser("truncated", help="candidate fiducials for a restricted normal mean")
    sp.add_argument("--model", choices=["A", "B"], default="A")
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--mu-max", type=float, default=0.0)
    sp.add_argument("--xbar", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_truncated)

    sp = sub.add_parser("conditional", help="conditional fiducials in the plane and on subspaces")
    sp.add_argument("--model", choices=["line-difference", "line-ratio", "circle", "projection"],
                    default="line-difference")
    sp.add_argument("--x", type=_floats, default=_floats("1,1"))
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--basis", type=_floats, help="row-major (k, d) matrix; columns are normalized")
    common(sp)
    sp.set_defaults(func=cmd_conditional)

    sp = sub.add_parser("coverage", help="coverage of fiducial upper limits")
    sp.add_argument("--model", choices=["location-normal", "correlation", "gamma-shape", "truncated-b"],
                    required=True)
    sp.add_argument("--theta0", "--alpha0", "--rho0", "--mu0", dest="theta0", type=float, default=0.0)
    sp.add_argument("--n", type=int, default=5)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--mu-max", type=float, default=0.0)
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--timing", action="store_true", help="fill elapsed_ms (output is then not reproducible)")
    common(sp, draws=1000, levels="0.05,0.1,0.5")
    sp.set_defaults(func=cmd_coverage)

    sp = sub.add_parser("equivalence", help="uniqueness check between two fiducial models")
    sp.add_argument("--model", choices=["location", "correlation"], default="location")
    sp.add_argument("--x", type=float, default=0.0)
    sp.add_argument("--n", type=int, default=10)
    common(sp, draws=100_000, levels="0.025,0.975")
    sp.set_defaults(func=cmd_equivalence)
    return p


def config_to_argv(config) -> list:
    """Translate a JSON experiment config into subcommand arguments."""
    if not isinstance(config, dict) or set(config) != CONFIG_KEYS:
        got = sorted(config) if isinstance(config, dict) else type(config).__name__
        raise ConfigError(f"config keys must be exactly {sorted(CONFIG_KEYS)}, got {got}")
    sizes = config["sizes"]
    params = config["params"]
    if not isinstance(sizes, dict) or not set(sizes) <= SIZE_KEYS:
        raise ConfigError(f"sizes must be an object with keys among {sorted(SIZE_KEYS)}")
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    argv = [str(config["kind"]), "--seed", str(config["seed"])]
    if config["model"] is not None:
        argv += ["--model", str(config["model"])]
    for key in ("reps", "draws"):
        if sizes.get(key) is not None:
            argv += [f"--{key}", str(sizes[key])]
    if config["out"] is not None:
        argv += ["--out", str(config["out"])]
    for key, value in params.items():
        flag = "--" + str(key).replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, (list, tuple)):
            argv += [flag, ",".join(str(v) for v in value)]
        elif isinstance(value, dict):
            argv += [flag, ",".join(f"{k}:{v}" for k, v in value.items())]
        else:
            argv += [flag, str(value)]
    return argv


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        if args.kind:
            raise ConfigError("give either --config or a subcommand, not both")
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        args = parser.parse_args(config_to_argv(config))
    if not args.kind:
        raise ConfigError("missing subcommand")
    return args


def main(argv=None) -> int:
    try:
        args = _parse(sys.argv[1:] if argv is None else argv)
        args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"ERROR:config:{exc}\n")
        return EXIT_CONFIG
    except DomainError as exc:
        sys.stderr.write(f"ERROR:{type(exc).__name__}:{exc}\n")
        return EXIT_CONFIG
    except NumericalFailure as exc:
        sys.stderr.write(f"ERROR:{type(exc).__name__}:{exc}\n")
        return EXIT_NUMERIC
    except FiducialError as exc:  # pragma: no cover - every error is one of the two families
        sys.stderr.write(f"ERROR:{type(exc).__name__}:{exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        sys.stderr.write(f"ERROR:io:{exc}\n")
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
