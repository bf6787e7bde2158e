"""
Command-line interface.

    bernwass generate --family ellipse --n 400 --noise 0.03 --seed 1 --out ellipse.csv
    bernwass train --data ellipse.csv --out model.json
    bernwass eval --data ellipse.csv --model model.json
    bernwass compare --data ellipse.csv --data spiral.csv --model wasserstein --model poly --model gpr
    bernwass plot --data ellipse.csv --model model.json --out ellipse.svg
    bernwass rerun model.json.manifest.json

Every command that writes files also writes ``<output>.manifest.json`` with
the fully resolved configuration; ``rerun`` replays it.

Exit codes: 0 success, 1 numerical or training failure, 2 usage or I/O error.
"""

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import (
    POLY_DEFAULT_DEGREE,
    baseline_from_dict,
    gpr_fit,
    gpr_tune,
    poly_fit,
)
from .datasets import FAMILIES, GeneratorSpec, generate, load_csv, save_csv
from .errors import (
    BernWassError,
    ConfigError,
    DegenerateInput,
    DimMismatch,
    DomainError,
    EmptyData,
    ParseError,
    TooFewPoints,
)
from .metrics import DEFAULT_GRID, METRIC_COLUMNS, METRIC_LABELS, MetricsReport, evaluate
from .model import MODEL_KIND, MixtureModel, save_model
from .plotting import plot_views
from .training import ModelConfig, TrainConfig, train

logger = logging.getLogger("bernwass")

MODEL_KINDS = ("wasserstein", "poly", "gpr")
USAGE_ERRORS = (
    ConfigError,
    ParseError,
    EmptyData,
    DimMismatch,
    DomainError,
    DegenerateInput,
    TooFewPoints,
    OSError,
)


class UsageError(ConfigError):
    pass


def _resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get("WBR_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"WBR_SEED must be an integer, got {env!r}") from None


def _read_dataset(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"dataset not found: {path}")
    return load_csv(p)


def _train_configs(args):
    model_cfg = ModelConfig(degree=args.degree_bernstein, components=args.components)
    train_cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        l2_lambda=args.l2_lambda,
        target_eps=args.eps,
        seed=args.seed,
        freeze_weights=args.freeze_weights,
    )
    return model_cfg, train_cfg


def _load_model_file(path):
    doc = json.loads(Path(path).read_text())
    kind = doc.get("kind")
    if kind == MODEL_KIND:
        return MixtureModel.from_dict(doc)
    return baseline_from_dict(doc)


def _model_label(model):
    if isinstance(model, MixtureModel):
        return "Wasserstein"
    return {"polynomial": "Polynomial", "gpr": "GPR"}[model.to_dict()["kind"]]


def _resolve_model(spec, fit_data, args):
    """Fit a model kind on ``fit_data`` or load a model JSON path."""
    if spec == "wasserstein":
        model_cfg, train_cfg = _train_configs(args)
        model, _ = train(fit_data, model_cfg, train_cfg)
        return "Wasserstein", model
    if spec == "poly":
        return "Polynomial", poly_fit(fit_data, args.degree)
    if spec == "gpr":
        if args.gp_tune:
            return "GPR", gpr_tune(fit_data)
        return "GPR", gpr_fit(fit_data, args.gp_lengthscale, args.gp_signal_var, args.gp_noise_var)
    if Path(spec).is_file():
        model = _load_model_file(spec)
        return _model_label(model), model
    raise UsageError(f"--model must be one of {', '.join(MODEL_KINDS)} or a model JSON path; got {spec!r}")


def _write_manifest(args, outputs, inputs, started):
    if not outputs:
        return
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": args.command,
        "config": config,
        "seed": args.seed,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    Path(str(outputs[0]) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# -- commands ---------------------------------------------------------------


def cmd_generate(args):
    spec = GeneratorSpec(args.family, n_points=args.n, noise_sigma=args.noise, seed=args.seed)
    ds = generate(spec)
    save_csv(ds, args.out)
    logger.info("wrote %d rows to %s", len(ds), args.out)
    return [args.out], []


def cmd_train(args):
    data = _read_dataset(args.data)
    model_cfg, train_cfg = _train_configs(args)
    log_path = args.log or str(Path(args.out).with_suffix("")) + ".loss.csv"
    model, history = train(data, model_cfg, train_cfg, log_path=log_path)
    save_model(model, args.out)
    if len(history):
        logger.info("final loss %.6g", history[-1])
    return [args.out, log_path], [args.data]


def _evaluate_one(spec, data, fit_data, args):
    name, model = _resolve_model(spec, fit_data, args)
    return evaluate(model, data, eps=args.eps, seed=args.seed, grid_size=args.grid, model_name=name)


def cmd_eval(args):
    data = _read_dataset(args.data)
    fit_data = _read_dataset(args.train_data) if args.train_data else data
    report = _evaluate_one(args.model, data, fit_data, args)
    print(report.to_json())
    outputs = []
    if args.out:
        Path(args.out).write_text(MetricsReport.csv_header() + "\n" + report.csv_row() + "\n")
        outputs.append(args.out)
    inputs = [args.data] + ([args.train_data] if args.train_data else [])
    return outputs, inputs


def format_table(reports):
    """Markdown table, one row per (dataset, model) report."""
    lines = [
        "| Dataset | Model | " + " | ".join(METRIC_LABELS) + " |",
        "|---|---|" + "---:|" * len(METRIC_LABELS),
    ]
    for r in reports:
        cells = [f"{getattr(r, c):.4f}" for c in METRIC_COLUMNS]
        lines.append(f"| {r.dataset_name} | {r.model_name} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def cmd_compare(args):
    models = args.model or list(MODEL_KINDS)
    reports = []
    for path in args.data:
        data = _read_dataset(path)
        for spec in models:
            reports.append(_evaluate_one(spec, data, data, args))
    table = format_table(reports)
    sys.stdout.write(table)
    outputs = []
    if args.out:
        Path(args.out).write_text(table)
        outputs.append(args.out)
    return outputs, list(args.data)


def cmd_plot(args):
    data = _read_dataset(args.data)
    name, model = _resolve_model(args.model, data, args)
    ts = model.to_t(data.xs)
    views = plot_views(data.ys, model, ts, title=f"{data.name}: {name}")
    out = Path(args.out)
    written = []
    for suffix, svg in views.items():
        path = out if not suffix else out.with_name(f"{out.stem}_{suffix}{out.suffix or '.svg'}")
        path.write_text(svg)
        written.append(str(path))
    return written, [args.data]


def cmd_rerun(args):
    manifest = json.loads(Path(args.manifest).read_text())
    config = manifest["config"]
    handler = COMMANDS.get(config.get("command"))
    if handler is None or handler is cmd_rerun:
        raise UsageError(f"manifest has no replayable command: {config.get('command')!r}")
    replay = argparse.Namespace(**config)
    return handler(replay)


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "plot": cmd_plot,
    "rerun": cmd_rerun,
}


# -- parser -----------------------------------------------------------------


def _add_seed(p):
    p.add_argument("--seed", type=int, default=None, help="random seed (falls back to $WBR_SEED, then 0)")


def _add_train_flags(p):
    d_model, d_train = ModelConfig(), TrainConfig()
    g = p.add_argument_group("Bernstein model / training")
    g.add_argument("--degree-bernstein", type=int, default=d_model.degree)
    g.add_argument("--components", type=int, default=d_model.components)
    g.add_argument("--eps", type=float, default=d_train.target_eps, help="target covariance inflation")
    g.add_argument("--lambda", dest="l2_lambda", type=float, default=d_train.l2_lambda)
    g.add_argument("--lr", type=float, default=d_train.learning_rate)
    g.add_argument("--batch", type=int, default=d_train.batch_size)
    g.add_argument("--epochs", type=int, default=d_train.epochs)
    g.add_argument("--freeze-weights", action="store_true")


def _add_model_flags(p, multiple=False):
    if multiple:
        p.add_argument("--model", action="append", help="model kind or JSON path (repeatable)")
    else:
        p.add_argument("--model", required=True, help=f"one of {', '.join(MODEL_KINDS)} or a model JSON path")
    g = p.add_argument_group("baselines")
    g.add_argument("--degree", type=int, default=POLY_DEFAULT_DEGREE, help="polynomial degree")
    g.add_argument("--gp-lengthscale", type=float, default=None)
    g.add_argument("--gp-signal-var", type=float, default=None)
    g.add_argument("--gp-noise-var", type=float, default=None)
    g.add_argument("--gp-tune", action="store_true", help="grid-search GP hyperparameters")
    _add_train_flags(p)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="SRI grid size")


def build_parser():
    parser = argparse.ArgumentParser(prog="bernwass", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = command("generate", cmd_generate, "write a synthetic trajectory dataset")
    p.add_argument("--family", required=True, help=f"one of {', '.join(FAMILIES)}")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--noise", type=float, default=0.03)
    _add_seed(p)
    p.add_argument("-o", "--out", required=True)

    p = command("train", cmd_train, "fit a Bernstein W2 model")
    p.add_argument("--data", required=True)
    _add_train_flags(p)
    _add_seed(p)
    p.add_argument("--log", default=None, help="loss log CSV (default: <out>.loss.csv)")
    p.add_argument("-o", "--out", required=True)

    p = command("eval", cmd_eval, "compute the five metrics for one model")
    p.add_argument("--data", required=True)
    p.add_argument("--train-data", default=None, help="fit data for model kinds (default: --data)")
    _add_model_flags(p)
    _add_seed(p)
    p.add_argument("-o", "--out", default=None, help="optional CSV report")

    p = command("compare", cmd_compare, "markdown table of metrics across datasets and models")
    p.add_argument("--data", action="append", required=True)
    _add_model_flags(p, multiple=True)
    _add_seed(p)
    p.add_argument("-o", "--out", default=None)

    p = command("plot", cmd_plot, "SVG of data, mean curves and covariance ellipses")
    p.add_argument("--data", required=True)
    _add_model_flags(p)
    _add_seed(p)
    p.add_argument("-o", "--out", required=True)

    p = command("rerun", cmd_rerun, "replay a run manifest")
    p.add_argument("manifest")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    started = time.perf_counter()
    try:
        if args.command != "rerun":
            args.seed = _resolve_seed(args.seed)
            if args.command == "generate" and args.family not in FAMILIES:
                raise UsageError(f"unknown family {args.family!r}; valid families: {', '.join(FAMILIES)}")
        outputs, inputs = args.func(args)
        if args.command != "rerun":
            _write_manifest(args, outputs, inputs, started)
    except USAGE_ERRORS as exc:
        print(f"bernwass {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (BernWassError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"bernwass {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
