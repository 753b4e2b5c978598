"""Command-line front end.

Subcommands: simulate, fit, forecast, eval, rank-select, bench.
Exit codes: 0 success (fit converged), 2 fit ran to the iteration cap,
64 usage error, 65 data format error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import benchmark
from .fit import fit_panel
from .initialization import NnmConfig, nnm_estimate, ridge_constant, select_ranks
from .solver import StdgrConfig
from .storage import (
    PanelFormatError,
    atomic_write_text,
    load_model,
    model_document,
    read_panel_csv,
    save_diagnostics,
    save_model,
    write_panel_csv,
)
from .tensor import tucker_reconstruct
from .var import build_design, mse, predict_one_step, simulate

__all__ = ["main", "console_main"]

EXIT_OK = 0
EXIT_MAX_ITER = 2
EXIT_USAGE = 64
EXIT_DATA = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2), which is taken
        raise UsageError(message)


_SCENARIO_KEYS = {
    "m",
    "p",
    "ranks",
    "superdiag",
    "factor_style",
    "noise_scale",
    "seeds",
    "sample_sizes",
    "burn_in",
    "length",
}
_SOLVER_KEYS = {"beta", "alpha", "gamma", "c", "a_bar1", "a_bar2", "tol", "max_iter", "ranks"}
_NNM_KEYS = {"lambda_nn", "max_iter", "tol"}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(doc) - {"scenario", "solver", "nnm"}
    if unknown:
        raise UsageError(f"unknown config sections: {sorted(unknown)}")
    for section, allowed in (
        ("scenario", _SCENARIO_KEYS),
        ("solver", _SOLVER_KEYS),
        ("nnm", _NNM_KEYS),
    ):
        extra = set(doc.get(section, {})) - allowed
        if extra:
            raise UsageError(f"unknown keys in config section '{section}': {sorted(extra)}")
    return doc


def _parse_ranks(text: str):
    if text == "auto":
        return "auto"
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError('ranks must be "auto" or r1,r2,r3')
    try:
        return tuple(int(v) for v in parts)
    except ValueError:
        raise UsageError('ranks must be "auto" or three integers r1,r2,r3')


def _parse_triple(text: str, name: str):
    parts = text.split(",")
    try:
        values = [float(v) for v in parts]
    except ValueError:
        raise UsageError(f"{name} must be a number or a comma triple")
    if len(values) == 1:
        return values[0]
    if len(values) == 3:
        return tuple(values)
    raise UsageError(f"{name} must be a number or a comma triple")


def _solver_config(args, config: dict) -> StdgrConfig:
    settings = dict(config.get("solver", {}))
    if "ranks" in settings and isinstance(settings["ranks"], list):
        settings["ranks"] = tuple(settings["ranks"])
    for key, flag in (
        ("beta", "beta"),
        ("c", "c"),
        ("a_bar1", "abar1"),
        ("a_bar2", "abar2"),
        ("tol", "tol"),
        ("max_iter", "max_iter"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            settings[key] = value
    for key in ("alpha", "gamma"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = _parse_triple(value, key)
    ranks = getattr(args, "ranks", None)
    if ranks is not None:
        settings["ranks"] = _parse_ranks(ranks)
    try:
        return StdgrConfig(**settings)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad solver configuration: {exc}")


def _nnm_config(args, config: dict) -> NnmConfig:
    settings = dict(config.get("nnm", {}))
    value = getattr(args, "lambda_nn", None)
    if value is not None:
        settings["lambda_nn"] = value
    try:
        return NnmConfig(**settings)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad nuclear-norm configuration: {exc}")


def _scenario_spec(config: dict) -> tuple[benchmark.ScenarioSpec, int]:
    section = config.get("scenario")
    if not section:
        raise UsageError("this command needs a config file with a 'scenario' section")
    section = dict(section)
    length = section.pop("length", None)
    try:
        spec = benchmark.ScenarioSpec(
            m=section["m"],
            p=section["p"],
            ranks=tuple(section["ranks"]),
            superdiag=tuple(section["superdiag"]),
            factor_style=section.get("factor_style", "gaussian-svd"),
            noise_scale=section.get("noise_scale", 1.0),
            seeds=tuple(section.get("seeds", (0, 1, 2, 3, 4))),
            sample_sizes=tuple(section.get("sample_sizes", ())),
            burn_in=section.get("burn_in", 500),
        )
    except KeyError as exc:
        raise UsageError(f"scenario section is missing {exc}")
    except ValueError as exc:
        raise UsageError(f"bad scenario: {exc}")
    return spec, length


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    spec, length = _scenario_spec(config)
    if length is None:
        raise UsageError("scenario section must set 'length' (rows to write)")
    scenario = benchmark.make_scenario(spec, args.seed)
    covariance = spec.noise_scale**2 * np.eye(spec.m)
    panel = simulate(scenario.w, covariance, length=length, seed=args.seed, burn_in=spec.burn_in)
    write_panel_csv(args.output, panel)
    truth = {
        "format": "tuckervar-truth",
        "m": spec.m,
        "p": spec.p,
        "ranks": list(spec.ranks),
        "superdiag_used": list(scenario.superdiag_used),
        "rescale_count": scenario.rescale_count,
        "noise_scale": spec.noise_scale,
        "seed": args.seed,
        "prng": "pcg64",
        "w": [float(v) for v in scenario.w.ravel(order="F")],
    }
    atomic_write_text(args.output + ".truth.json", json.dumps(truth, indent=1) + "\n")
    print(f"wrote {length} rows to {args.output}")
    return EXIT_OK


def _read_panel(path: str) -> np.ndarray:
    try:
        _, panel = read_panel_csv(path)
    except OSError as exc:
        raise UsageError(f"cannot read panel: {exc}")
    return panel


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    cfg = _solver_config(args, config)
    nnm_cfg = _nnm_config(args, config)
    panel = _read_panel(args.input)
    if panel.shape[0] < args.p + 2:
        raise PanelFormatError(f"panel has {panel.shape[0]} rows, need at least {args.p + 2}")

    n_train = panel.shape[0]
    if args.train_fraction is not None:
        if not 0 < args.train_fraction <= 1:
            raise UsageError("train-fraction must lie in (0, 1]")
        n_train = int(args.train_fraction * panel.shape[0])
        if n_train < args.p + 2:
            raise PanelFormatError("training split too short for the lag order")
    train = panel[:n_train]

    scaler = None
    if args.standardize:
        mean = train.mean(axis=0)
        std = train.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        train = (train - mean) / std
        scaler = {"mean": [float(v) for v in mean], "std": [float(v) for v in std]}

    report = fit_panel(train, args.p, cfg, nnm_cfg, epsilon=args.epsilon)
    extra = {
        "ranks_selected": report.ranks_selected,
        "n_train": n_train,
        "converged": report.result.converged,
        "iterations": report.result.iterations,
    }
    if scaler is not None:
        extra["scaler"] = scaler
    doc = model_document(report.result.factors, report.laplacians, cfg, extra)
    save_model(args.output, doc)
    save_diagnostics(
        args.output + ".diagnostics.jsonl",
        report.result,
        meta={"ranks": list(report.ranks), "ranks_selected": report.ranks_selected},
    )
    status = "converged" if report.result.converged else "hit the iteration cap"
    print(
        f"fit {status} after {report.result.iterations} iterations;"
        f" ranks {report.ranks}; model written to {args.output}"
    )
    return EXIT_OK if report.result.converged else EXIT_MAX_ITER


def _model_tensor(doc: dict) -> np.ndarray:
    return tucker_reconstruct(doc["factors"])


def _apply_scaler(doc: dict, panel: np.ndarray) -> np.ndarray:
    scaler = doc.get("scaler")
    if not scaler:
        return panel
    mean = np.asarray(scaler["mean"])
    std = np.asarray(scaler["std"])
    return (panel - mean) / std


def cmd_forecast(args) -> int:
    try:
        doc = load_model(args.model)
    except (OSError, ValueError, KeyError) as exc:
        raise PanelFormatError(f"cannot load model: {exc}")
    panel = _read_panel(args.input)
    m, p = doc["m"], doc["p"]
    if panel.shape[1] != m:
        raise UsageError(f"panel has {panel.shape[1]} variables, model expects {m}")
    if panel.shape[0] < p:
        raise UsageError(f"panel needs at least {p} rows to seed the forecast")
    if args.horizon < 1:
        raise UsageError("horizon must be >= 1")

    w = _model_tensor(doc)
    scaled = _apply_scaler(doc, panel)
    history = [scaled[-lag] for lag in range(1, p + 1)]
    preds = []
    for _ in range(args.horizon):
        y = predict_one_step(w, np.concatenate(history))
        preds.append(y)
        history = [y] + history[: p - 1]
    preds = np.asarray(preds)
    scaler = doc.get("scaler")
    if scaler:
        preds = preds * np.asarray(scaler["std"]) + np.asarray(scaler["mean"])
    write_panel_csv(args.output, preds)
    print(f"wrote {args.horizon} forecast rows to {args.output}")
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.truth and args.pred:
        truth = _read_panel(args.truth)
        pred = _read_panel(args.pred)
        if truth.shape != pred.shape:
            raise UsageError(f"panel shapes differ: {truth.shape} vs {pred.shape}")
        value = mse(truth, pred)
        detail = {"mse": value, "n_test": int(truth.shape[0])}
    elif args.model and args.input:
        try:
            doc = load_model(args.model)
        except (OSError, ValueError, KeyError) as exc:
            raise PanelFormatError(f"cannot load model: {exc}")
        panel = _read_panel(args.input)
        if panel.shape[1] != doc["m"]:
            raise UsageError(
                f"panel has {panel.shape[1]} variables, model expects {doc['m']}"
            )
        fraction = args.train_fraction if args.train_fraction is not None else 0.6
        if not 0 < fraction < 1:
            raise UsageError("train-fraction must lie in (0, 1)")
        p = doc["p"]
        scaled = _apply_scaler(doc, panel)
        n_train = int(fraction * scaled.shape[0])
        if n_train < p:
            raise UsageError("training split shorter than the lag order")
        if n_train >= scaled.shape[0]:
            raise UsageError("no test rows left after the training split")
        w = _model_tensor(doc)
        preds = np.empty((scaled.shape[0] - n_train, scaled.shape[1]))
        for i, t in enumerate(range(n_train, scaled.shape[0])):
            preds[i] = predict_one_step(w, scaled[t - p : t][::-1].ravel())
        value = mse(scaled[n_train:], preds)
        detail = {"mse": value, "n_test": int(preds.shape[0]), "n_train": n_train}
    else:
        raise UsageError("eval needs either --truth and --pred, or --model and --input")
    text = json.dumps(detail)
    if args.output:
        atomic_write_text(args.output, text + "\n")
    print(text)
    return EXIT_OK


def cmd_rank_select(args) -> int:
    panel = _read_panel(args.input)
    if panel.shape[0] < args.p + 2:
        raise PanelFormatError(f"panel has {panel.shape[0]} rows, need at least {args.p + 2}")
    design = build_design(panel, args.p)
    nnm_cfg = _nnm_config(args, _load_config(args.config))
    result = nnm_estimate(design, nnm_cfg)
    c_bar = ridge_constant(design.m, design.p, design.n_samples)
    ranks = select_ranks(result.w, c_bar)
    detail = {"ranks": list(ranks), "c_bar": c_bar, "nnm_converged": result.converged}
    text = json.dumps(detail)
    if args.output:
        atomic_write_text(args.output, text + "\n")
    print(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _load_config(args.config)
    spec, _ = _scenario_spec(config)
    if not spec.sample_sizes:
        raise UsageError("scenario section must set 'sample_sizes'")
    cfg = _solver_config(args, config)
    nnm_cfg = _nnm_config(args, config)
    rows = benchmark.error_curve(spec, cfg, nnm_cfg, epsilon=args.epsilon)
    lines = benchmark.curve_csv_lines(rows)
    atomic_write_text(args.output, "\n".join(lines) + "\n")
    print(f"wrote {len(rows)} curve rows to {args.output}")
    return EXIT_OK


def _add_solver_flags(parser) -> None:
    parser.add_argument("--ranks", help='"auto" or r1,r2,r3')
    parser.add_argument("--beta", type=float, help="core l1 weight")
    parser.add_argument("--alpha", help="graph weight, scalar or triple a1,a2,a3")
    parser.add_argument("--gamma", help="coupling weight, scalar or triple g1,g2,g3")
    parser.add_argument("--c", type=float, help="box bound on the core entries")
    parser.add_argument("--abar1", type=float, help="step multiplier for the gradient blocks")
    parser.add_argument("--abar2", type=float, help="step multiplier for the auxiliary blocks")
    parser.add_argument("--tol", type=float, help="relative-change stopping threshold")
    parser.add_argument("--max-iter", dest="max_iter", type=int, help="iteration cap")
    parser.add_argument("--lambda-nn", dest="lambda_nn", type=float, help="nuclear-norm weight")
    parser.add_argument("--epsilon", type=float, default=0.2, help="Laplacian kernel bandwidth")


def build_parser() -> _Parser:
    parser = _Parser(prog="tuckervar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a synthetic panel")
    sim.add_argument("--config", required=True, help="JSON config with a scenario section")
    sim.add_argument("--output", required=True, help="panel CSV to write")
    sim.add_argument("--seed", type=int, default=0)
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="fit a transition tensor from a panel CSV")
    fit.add_argument("--input", required=True, help="panel CSV")
    fit.add_argument("--output", required=True, help="model file to write")
    fit.add_argument("--config", help="JSON config file")
    fit.add_argument("--p", type=int, required=True, help="lag order")
    fit.add_argument("--standardize", action="store_true")
    fit.add_argument("--train-fraction", dest="train_fraction", type=float)
    _add_solver_flags(fit)
    fit.set_defaults(func=cmd_fit)

    fc = sub.add_parser("forecast", help="multi-step forecast from a fitted model")
    fc.add_argument("--model", required=True)
    fc.add_argument("--input", required=True, help="panel CSV supplying the lags")
    fc.add_argument("--output", required=True, help="forecast CSV to write")
    fc.add_argument("--horizon", type=int, default=1)
    fc.set_defaults(func=cmd_forecast)

    ev = sub.add_parser("eval", help="mean squared error report")
    ev.add_argument("--truth", help="truth panel CSV")
    ev.add_argument("--pred", help="prediction panel CSV")
    ev.add_argument("--model", help="fitted model file")
    ev.add_argument("--input", help="panel CSV for held-out evaluation")
    ev.add_argument("--train-fraction", dest="train_fraction", type=float)
    ev.add_argument("--output", help="write the JSON report here as well")
    ev.set_defaults(func=cmd_eval)

    rs = sub.add_parser("rank-select", help="ridge-ratio rank selection")
    rs.add_argument("--input", required=True, help="panel CSV")
    rs.add_argument("--p", type=int, required=True, help="lag order")
    rs.add_argument("--config", help="JSON config file")
    rs.add_argument("--lambda-nn", dest="lambda_nn", type=float)
    rs.add_argument("--output")
    rs.set_defaults(func=cmd_rank_select)

    bench = sub.add_parser("bench", help="estimation-error curves on synthetic data")
    bench.add_argument("--config", required=True, help="JSON config with a scenario section")
    bench.add_argument("--output", required=True, help="curve CSV to write")
    _add_solver_flags(bench)
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PanelFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main() -> None:
    sys.exit(main())
