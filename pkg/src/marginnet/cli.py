"""Command-line experiment runner.

Subcommands:
    train      fit a model per the config; writes metrics.csv, a model/
               directory, and runmeta.json under --out-dir
    eval       evaluate a saved model under every objective family
    gradcheck  finite-difference checks for all layer and head gradients
    warmstart  train with the hidden stack initialized from a saved model
    ensemble   average several saved models' outputs and report error

Every subcommand takes --config (flat key = value text); --seed and
--out-dir override the corresponding config keys.
"""

import argparse
import json
import os
import sys

from . import harness
from .config import ConfigError, parse_config
from .data import IdxFormatError
from .tensor import DomainError, ShapeError


def _add_common(sub):
    sub.add_argument("--config", required=True, help="path to key = value config")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    sub.add_argument("--out-dir", default=None,
                     help="override the config output directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="marginnet",
        description="train and probe networks with softmax or SVM objectives",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("train", "train a model from scratch"),
        ("eval", "cross-objective evaluation of a saved model"),
        ("gradcheck", "finite-difference gradient verification"),
        ("warmstart", "train with a saved model's hidden stack"),
        ("ensemble", "average saved models and report test error"),
    ):
        _add_common(subs.add_parser(name, help=help_text))
    return parser


def _load_config(args):
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.override("seed", args.seed)
    if args.out_dir is not None:
        cfg.override("out_dir", args.out_dir)
    return cfg


def _print_row(row):
    cells = []
    for col in harness.CSV_COLUMNS:
        v = row[col]
        cells.append(
            f"{col}={v}" if col in ("epoch", "updates")
            else f"{col}={harness.format_float(v)}"
        )
    print("  ".join(cells))


def cmd_train(args):
    cfg = _load_config(args)
    result = harness.train(cfg)
    _print_row(result.metrics[-1])
    print(f"wrote {result.csv_path} and {result.model_dir}")
    return 0


def _report_lines(tag, rep):
    return (
        f"{tag}: n={rep.n} error_pct={harness.format_float(rep.error_pct)} "
        f"avg_xent={harness.format_float(rep.avg_xent)} "
        f"hinge_sum={harness.format_float(rep.hinge_sum)} "
        f"hinge_sq_sum={harness.format_float(rep.hinge_sq_sum)} "
        f"hinge_sq_mean={harness.format_float(rep.hinge_sq_mean)}"
    )


def cmd_eval(args):
    cfg = _load_config(args)
    if not cfg.model:
        raise ConfigError("eval needs model = <saved model dir> in the config")
    model = harness.load_model(cfg.model)
    import numpy as np

    data_rng = np.random.default_rng(
        np.random.SeedSequence(cfg.seed).spawn(3)[0]
    )
    # Preprocessing comes from the saved model, so load raw splits only.
    raw_cfg = _raw_data_config(cfg)
    prepared = harness.prepare_data(raw_cfg, data_rng)
    split = prepared.train if cfg.eval_split == "train" else prepared.test
    rep = harness.cross_objective_eval(model, split)
    line = _report_lines(f"{model.network.head_spec.kind} on {cfg.eval_split}", rep)
    print(line)
    os.makedirs(cfg.out_dir, exist_ok=True)
    out_path = os.path.join(cfg.out_dir, "eval.json")
    with open(out_path, "w") as f:
        json.dump(
            {
                "model": cfg.model,
                "split": cfg.eval_split,
                "head": model.network.head_spec.kind,
                "n": rep.n,
                "error_pct": rep.error_pct,
                "avg_xent": rep.avg_xent,
                "hinge_sum": rep.hinge_sum,
                "hinge_mean": rep.hinge_mean,
                "hinge_sq_sum": rep.hinge_sq_sum,
                "hinge_sq_mean": rep.hinge_sq_mean,
            },
            f, indent=2,
        )
        f.write("\n")
    print(f"wrote {out_path}")
    return 0


def _raw_data_config(cfg):
    # Same dataset keys, but no train-time preprocessing: saved models
    # carry their own fitted transforms.
    import copy

    raw = copy.deepcopy(cfg)
    raw.values["standardize"] = False
    raw.values["pca_dims"] = 0
    raw.values["augment"] = False
    return raw


def cmd_gradcheck(args):
    cfg = _load_config(args)
    results, ok = harness.run_gradcheck(cfg)
    for r in results:
        print(r.summary())
    print(f"{sum(r.passed for r in results)}/{len(results)} gradient checks passed")
    return 0 if ok else 1


def cmd_warmstart(args):
    cfg = _load_config(args)
    if not cfg.source_model:
        raise ConfigError(
            "warmstart needs source_model = <saved model dir> in the config"
        )
    result = harness.warm_start(cfg.source_model, cfg)
    _print_row(result.metrics[-1])
    print(f"wrote {result.csv_path} and {result.model_dir}")
    return 0


def cmd_ensemble(args):
    cfg = _load_config(args)
    if not cfg.models:
        raise ConfigError(
            "ensemble needs models = <dir>, <dir>, ... in the config"
        )
    import numpy as np

    models = [harness.load_model(path) for path in cfg.models]
    data_rng = np.random.default_rng(
        np.random.SeedSequence(cfg.seed).spawn(3)[0]
    )
    prepared = harness.prepare_data(_raw_data_config(cfg), data_rng)
    split = prepared.train if cfg.eval_split == "train" else prepared.test
    pred = harness.ensemble_predict(models, split.inputs)
    err = 100.0 * float(np.mean(pred != split.labels))
    member_errs = [
        harness.cross_objective_eval(m, split).error_pct for m in models
    ]
    for path, e in zip(cfg.models, member_errs):
        print(f"member {path}: error_pct={harness.format_float(e)}")
    print(
        f"ensemble of {len(models)} on {cfg.eval_split}: "
        f"error_pct={harness.format_float(err)}"
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    out_path = os.path.join(cfg.out_dir, "ensemble.json")
    with open(out_path, "w") as f:
        json.dump(
            {
                "models": list(cfg.models),
                "split": cfg.eval_split,
                "member_error_pct": member_errs,
                "ensemble_error_pct": err,
            },
            f, indent=2,
        )
        f.write("\n")
    print(f"wrote {out_path}")
    return 0


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "warmstart": cmd_warmstart,
    "ensemble": cmd_ensemble,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DomainError, ShapeError, IdxFormatError,
            harness.TrainingDivergedError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
