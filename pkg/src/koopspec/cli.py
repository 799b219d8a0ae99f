"""Command-line entry point.

Subcommands: ``simulate``, ``fit``, ``eig``, ``diagnose``, ``reference``,
``experiment``. Configs are INI-style ``key = value`` files with one section
per concern; validation is strict (unknown or duplicate keys are rejected, a
silent typo in gamma or rank would invalidate experiment claims).

Exit codes: 0 success, 1 domain error (a contract named in the message),
2 usage or config error. The environment variable ``KOOPSPEC_OUT`` supplies
the default output directory.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import os
import sys

import numpy as np

from . import diagnostics, estimators, experiments, reference
from .dynamics import (
    PotentialSpec,
    load_csv_trajectory,
    simulate_langevin,
    simulate_ou,
    trajectory_to_pairs,
    write_trajectory_csv,
)
from .exceptions import ConfigError, KoopspecError
from .kernels import kernel_from_string, kernel_to_string

OUT_ENV_VAR = "KOOPSPEC_OUT"

_EXPERIMENT_ALIASES = {
    "fig1": experiments.FIG1,
    experiments.FIG1: experiments.FIG1,
    "rates": experiments.RATES,
    "fig2": experiments.RATES,
    experiments.RATES: experiments.RATES,
    "model_selection": experiments.MODEL_SELECTION,
    "fig3": experiments.MODEL_SELECTION,
    experiments.MODEL_SELECTION: experiments.MODEL_SELECTION,
}

_TUPLE_STR_FIELDS = {"methods", "kernels"}
_TUPLE_INT_FIELDS = {"n_grid"}


def _default_out_dir(name):
    base = os.environ.get(OUT_ENV_VAR, ".")
    return os.path.join(base, name)


def _read_ini(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parser


def _convert(section, key, raw, target_type):
    try:
        if key in _TUPLE_STR_FIELDS:
            return tuple(tok.strip() for tok in raw.split(",") if tok.strip())
        if key in _TUPLE_INT_FIELDS:
            return tuple(int(tok) for tok in raw.split(",") if tok.strip())
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from exc


def load_experiment_config(path, name=None, out_dir=None, seed=None):
    """Parse and validate an experiment config file, resolving all defaults."""
    parser = _read_ini(path)
    if not parser.has_section("experiment"):
        raise ConfigError(f"{path}: missing [experiment] section")
    extra = [s for s in parser.sections() if s != "experiment"]
    if extra:
        raise ConfigError(f"{path}: unknown sections {extra}")
    fields = {f.name: f.type for f in dataclasses.fields(experiments.ExperimentConfig)}
    overrides = {}
    for key, raw in parser.items("experiment"):
        if key not in fields:
            raise ConfigError(f"{path}: unknown key experiment.{key}")
        ftype = {"seed": int, "trials": int, "n": int, "rank": int, "lag": int,
                 "reference_m": int, "substeps": int, "burn_in": int,
                 "grid_points": int, "train_n": int, "val_n": int,
                 "test_n": int, "repetitions": int,
                 "gamma": float, "dt": float, "beta": float, "theta": float,
                 "grid_min": float, "grid_max": float}.get(key, str)
        overrides[key] = _convert("experiment", key, raw, ftype)
    cfg_name = overrides.pop("name", None)
    if name is not None:
        resolved = _EXPERIMENT_ALIASES.get(name)
        if resolved is None:
            raise ConfigError(f"unknown experiment {name!r}")
        if cfg_name is not None and _EXPERIMENT_ALIASES.get(cfg_name) != resolved:
            raise ConfigError(
                f"{path}: config names {cfg_name!r} but {name!r} was requested"
            )
    else:
        if cfg_name is None:
            raise ConfigError(f"{path}: experiment.name is required")
        resolved = _EXPERIMENT_ALIASES.get(cfg_name)
        if resolved is None:
            raise ConfigError(f"{path}: unknown experiment {cfg_name!r}")
    if out_dir is not None:
        overrides["out_dir"] = out_dir
    elif "out_dir" not in overrides:
        overrides["out_dir"] = _default_out_dir(resolved)
    if seed is not None:
        overrides["seed"] = seed
    factory = {
        experiments.FIG1: experiments.fig1_config,
        experiments.RATES: experiments.rates_config,
        experiments.MODEL_SELECTION: experiments.model_selection_config,
    }[resolved]
    out = overrides.pop("out_dir")
    try:
        return factory(out, **overrides)
    except (TypeError, KoopspecError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _potential_from_args(args):
    return PotentialSpec(args.potential, theta=args.theta, beta=args.beta)


def _cmd_simulate(args):
    if args.system is None:
        raise ConfigError("simulate: --system is required (ou or langevin)")
    if args.system == "ou":
        traj = simulate_ou(args.n, args.seed, burn_in=args.burn_in)
    elif args.system == "langevin":
        traj = simulate_langevin(
            _potential_from_args(args), args.dt, args.n, args.substeps,
            args.seed, x0=args.x0, burn_in=args.burn_in,
        )
    else:
        raise ConfigError(f"unknown system {args.system!r}")
    out = args.out or os.path.join(_default_out_dir("simulate"), "trajectory.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    write_trajectory_csv(traj, out)
    print(f"wrote {traj.states.shape[0]} states to {out}")
    return 0


def _load_fit_config(path):
    parser = _read_ini(path)
    required = {"data", "regressor", "kernel", "output"}
    missing = required - set(parser.sections())
    if missing:
        raise ConfigError(f"{path}: missing sections {sorted(missing)}")
    extra = set(parser.sections()) - required
    if extra:
        raise ConfigError(f"{path}: unknown sections {sorted(extra)}")

    def get(section, key, default=None, cast=str):
        if not parser.has_option(section, key):
            if default is None:
                raise ConfigError(f"{path}: {section}.{key} is required")
            return default
        return _convert(section, key, parser.get(section, key), cast)

    allowed = {
        "data": {"trajectory", "dt", "system", "n", "seed", "burn_in", "lag"},
        "regressor": {"method", "rank", "gamma"},
        "kernel": {"spec"},
        "output": {"model"},
    }
    for section in required:
        for key, _ in parser.items(section):
            if key not in allowed[section]:
                raise ConfigError(f"{path}: unknown key {section}.{key}")

    lag = get("data", "lag", 1, int)
    if parser.has_option("data", "trajectory"):
        traj = load_csv_trajectory(
            parser.get("data", "trajectory"), get("data", "dt", 1.0, float)
        )
    elif get("data", "system", "") == "ou":
        traj = simulate_ou(get("data", "n", 1000, int) + lag,
                           get("data", "seed", 0, int),
                           burn_in=get("data", "burn_in", 0, int))
    else:
        raise ConfigError(f"{path}: data needs a trajectory path or system=ou")
    data = trajectory_to_pairs(traj, lag)
    spec = estimators.RegressorSpec(
        method=get("regressor", "method"),
        kernel=kernel_from_string(get("kernel", "spec")),
        rank=get("regressor", "rank", 1, int),
        gamma=get("regressor", "gamma", 0.0, float),
    )
    return spec, data, parser.get("output", "model")


def _cmd_fit(args):
    spec, data, model_path = _load_fit_config(args.config)
    model = estimators.fit(spec, data)
    os.makedirs(os.path.dirname(os.path.abspath(model_path)), exist_ok=True)
    estimators.save_model(model, model_path)
    print(f"fitted {spec.method} (n={model.n}) -> {model_path}")
    return 0


def _cmd_eig(args):
    model = estimators.load_model(args.model)
    decomp = estimators.eig(model)
    out = args.out or os.path.join(_default_out_dir("eig"), "eigenvalues.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("i,lambda_re,lambda_im\n")
        for i, lam in enumerate(decomp.eigenvalues):
            fh.write(f"{i + 1},{format(lam.real, '.17g')},"
                     f"{format(lam.imag, '.17g')}\n")
    print(f"wrote {len(decomp.eigenvalues)} eigenvalues to {out}")
    return 0


def _read_reference_eigenvalues(path):
    if not os.path.exists(path):
        raise ConfigError(f"reference spectrum not found: {path}")
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if "mu" not in header:
            raise ConfigError(f"{path}: expected a 'mu' column")
        col = header.index("mu")
        for line in fh:
            if line.strip():
                vals.append(float(line.split(",")[col]))
    return np.asarray(vals)


def _cmd_diagnose(args):
    model = estimators.load_model(args.model)
    decomp = estimators.eig(model)
    ref = _read_reference_eigenvalues(args.reference) if args.reference else None
    report = diagnostics.build_report(model, decomp, reference_eigenvalues=ref)
    rows = diagnostics.report_rows(
        report, 0, model.spec.method, kernel_to_string(model.spec.kernel)
    )
    out = args.out or os.path.join(_default_out_dir("diagnose"), "report.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    diagnostics.write_report_csv(out, rows)
    print(f"wrote diagnostics for {len(rows)} eigenvalues to {out}")
    return 0


def _cmd_reference(args):
    out_dir = args.out_dir or _default_out_dir("reference")
    os.makedirs(out_dir, exist_ok=True)
    if args.system == "ou":
        ref = reference.ou_spectrum(args.m, lag_time=args.lag_time)
    else:
        ref = reference.generator_spectrum(
            _potential_from_args(args), args.grid_min, args.grid_max,
            args.grid_points, args.m, lag_time=args.lag_time,
        )
    spath = os.path.join(out_dir, "spectrum.csv")
    fpath = os.path.join(out_dir, "eigenfunctions.csv")
    reference.write_reference_csv(ref, spath, fpath)
    print(f"wrote {spath} and {fpath}")
    return 0


def _cmd_experiment(args):
    config = load_experiment_config(
        args.config, name=args.name, out_dir=args.out_dir, seed=args.seed
    )
    result = experiments.run_experiment(config)
    failed = [t for t in result["trials"] if "failed" in t]
    print(f"experiment {config.name}: outputs in {config.out_dir} "
          f"({len(failed)} failed trials)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="koopspec",
        description="Kernel-based Koopman operator regression and diagnostics",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a trajectory to CSV")
    p.add_argument("--system", choices=["ou", "langevin"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--substeps", type=int, default=10)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--potential", choices=["quadratic", "triple_well"],
                   default="triple_well")
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit a model from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("eig", help="eigenvalues of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eig)

    p = sub.add_parser("diagnose", help="spectral diagnostics of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--reference", help="spectrum.csv with a mu column")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("reference", help="ground-truth spectra to CSV")
    p.add_argument("--system", choices=["ou", "generator"], required=True)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--lag-time", dest="lag_time", type=float, default=1.0)
    p.add_argument("--potential", choices=["quadratic", "triple_well"],
                   default="triple_well")
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--grid-min", dest="grid_min", type=float, default=-1.5)
    p.add_argument("--grid-max", dest="grid_max", type=float, default=1.5)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=3000)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=_cmd_reference)

    p = sub.add_parser("experiment", help="run a paper experiment")
    p.add_argument("name", choices=sorted(set(_EXPERIMENT_ALIASES)))
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KoopspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
