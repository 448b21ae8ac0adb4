"""Command-line surface: gen-data, split, train, attack, evaluate, sweep,
report. Every config field can come from a JSON config file and be overridden
by a flag of the same name."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .attack import AttackTrainConfig, attack_report, train_external_attacker
from .data import load_csv, save_csv, split_dataset, synth_generate
from .errors import AdvRegError
from .experiment import (
    ExperimentConfig,
    _derived_seed,
    _SEED_CLASSIFIER_INIT,
    _SEED_EXTERNAL_ATTACK,
    _SEED_GAME_ATTACK_INIT,
    _SEED_SPLIT,
    _write_gencdf_csv,
    _write_histogram_csv,
    _write_json,
    load_or_generate,
    run_experiment,
    split_from_dict,
    split_to_dict,
)
from .metrics import (
    distribution_gap,
    generalization_cdf,
    model_accuracy,
    per_class_generalization_error,
)
from .models import AttackModel, ClassifierModel, build_attack_model, build_classifier
from .trainer import train_minmax, train_plain


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _build_config(args) -> ExperimentConfig:
    base = _load_json(args.config) if getattr(args, "config", None) else {}
    cfg = ExperimentConfig.from_dict(base) if base else ExperimentConfig()
    overrides = {
        "output_dir": getattr(args, "output_dir", None),
        "csv_path": getattr(args, "csv_path", None),
        "label_column": getattr(args, "label_column", None),
        "k": getattr(args, "k", None),
        "run_label": getattr(args, "run_label", None),
        "attacker_epochs": getattr(args, "attacker_epochs", None),
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    game_overrides = {
        "lam": getattr(args, "lam", None),
        "l2_factor": getattr(args, "l2", None),
        "outer_epochs": getattr(args, "epochs", None),
        "batch_size": getattr(args, "batch_size", None),
        "seed": getattr(args, "seed", None),
    }
    for name, value in game_overrides.items():
        if value is not None:
            setattr(cfg.game, name, value)
    cfg.game.__post_init__()
    return cfg


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file mirroring ExperimentConfig")
    p.add_argument("--output-dir", help="run directory for all artifacts")
    p.add_argument("--csv-path", help="dataset CSV; omit to use the synthetic generator")
    p.add_argument("--label-column")
    p.add_argument("--k", type=int, help="number of classes")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int, help="outer training epochs")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--run-label")
    p.add_argument("--attacker-epochs", type=int)


def cmd_gen_data(args) -> int:
    ds = synth_generate(args.k or 10, args.d, args.per_class, args.flip_prob, args.seed or 0)
    save_csv(ds, args.out)
    print(f"wrote {len(ds)} rows x {ds.dim} features -> {args.out}")
    return 0


def cmd_split(args) -> int:
    cfg = _build_config(args)
    dataset = load_or_generate(cfg)
    sizes = dict(cfg.split_sizes)
    for name in sizes:
        value = getattr(args, name, None)
        if value is not None:
            sizes[name] = value
    split = split_dataset(dataset, sizes, _derived_seed(cfg.game.seed, _SEED_SPLIT))
    _write_json(args.out, split_to_dict(split))
    print(f"wrote split ({ {k: len(v) for k, v in split_to_dict(split).items()} }) -> {args.out}")
    return 0


def _load_split(cfg: ExperimentConfig, path: str | None):
    dataset = load_or_generate(cfg)
    if path:
        return dataset, split_from_dict(dataset, _load_json(path))
    return dataset, split_dataset(dataset, cfg.split_sizes,
                                  _derived_seed(cfg.game.seed, _SEED_SPLIT))


def cmd_train(args) -> int:
    cfg = _build_config(args)
    os.makedirs(cfg.output_dir, exist_ok=True)
    dataset, split = _load_split(cfg, args.split)
    classifier = build_classifier(dataset.dim, cfg.k, cfg.hidden_sizes,
                                  _derived_seed(cfg.game.seed, _SEED_CLASSIFIER_INIT))
    if cfg.game.lam > 0:
        attack = build_attack_model(cfg.k, _derived_seed(cfg.game.seed, _SEED_GAME_ATTACK_INIT))
        classifier, attack, trace = train_minmax(cfg.game, split, classifier, attack)
        _write_json(os.path.join(cfg.output_dir, "game_attack_model.json"), attack.to_dict())
    else:
        classifier, trace = train_plain(cfg.game, split.train, classifier,
                                        test_set=split.eval_nonmembers)
    _write_json(os.path.join(cfg.output_dir, "classifier.json"), classifier.to_dict())
    _write_json(os.path.join(cfg.output_dir, "split.json"), split_to_dict(split))
    _write_json(os.path.join(cfg.output_dir, "config.json"), cfg.to_dict())
    trace.to_csv(os.path.join(cfg.output_dir, "trace.csv"))
    print(f"trained (lambda={cfg.game.lam}, l2={cfg.game.l2_factor}); "
          f"train acc {trace.train_accuracy[-1]:.3f}, test acc {trace.test_accuracy[-1]:.3f}")
    return 0


def cmd_attack(args) -> int:
    cfg = _build_config(args)
    run_dir = cfg.output_dir
    classifier = ClassifierModel.from_dict(_load_json(os.path.join(run_dir, "classifier.json")))
    dataset, split = _load_split(cfg, args.split or os.path.join(run_dir, "split.json"))
    attacker = train_external_attacker(
        classifier, split.adversary_members, split.adversary_nonmembers,
        AttackTrainConfig(epochs=cfg.attacker_epochs, batch_size=cfg.game.batch_size,
                          seed=_derived_seed(cfg.game.seed, _SEED_EXTERNAL_ATTACK)),
        train_provenance=split.train.provenance,
    )
    report = attack_report(attacker, classifier, split.unknown_members(), split.eval_nonmembers)
    _write_json(os.path.join(run_dir, "attack_model.json"), attacker.to_dict())
    _write_json(os.path.join(run_dir, "attack_report.json"), report)
    print(f"attack accuracy {report['attack_accuracy']:.3f} "
          f"(thresholded {report['thresholded_accuracy']:.3f})")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _build_config(args)
    run_dir = cfg.output_dir
    classifier = ClassifierModel.from_dict(_load_json(os.path.join(run_dir, "classifier.json")))
    attacker = AttackModel.from_dict(_load_json(os.path.join(run_dir, "attack_model.json")))
    dataset, split = _load_split(cfg, args.split or os.path.join(run_dir, "split.json"))

    atk_report = attack_report(attacker, classifier, split.unknown_members(), split.eval_nonmembers)
    errors = per_class_generalization_error(classifier, split.train, split.eval_nonmembers)
    cdf = generalization_cdf(errors)
    acc_gap = distribution_gap(classifier, split.train, split.eval_nonmembers, "prediction_accuracy")
    ent_gap = distribution_gap(classifier, split.train, split.eval_nonmembers, "normalized_entropy")
    report = {
        "run_label": cfg.run_label,
        "config": cfg.to_dict(),
        "train_accuracy": model_accuracy(classifier, split.train),
        "test_accuracy": model_accuracy(classifier, split.eval_nonmembers),
        "attack_accuracy": atk_report["attack_accuracy"],
        "attack_report": atk_report,
        "generalization_cdf": [[e, f] for e, f in cdf],
        "accuracy_gap": acc_gap.to_dict(),
        "entropy_gap": ent_gap.to_dict(),
    }
    _write_json(os.path.join(run_dir, "report.json"), report)
    _write_histogram_csv(os.path.join(run_dir, "hist_accuracy_members.csv"),
                         acc_gap, "members", "prediction accuracy")
    _write_histogram_csv(os.path.join(run_dir, "hist_accuracy_nonmembers.csv"),
                         acc_gap, "nonmembers", "prediction accuracy")
    _write_histogram_csv(os.path.join(run_dir, "hist_entropy_members.csv"),
                         ent_gap, "members", "normalized entropy")
    _write_histogram_csv(os.path.join(run_dir, "hist_entropy_nonmembers.csv"),
                         ent_gap, "nonmembers", "normalized entropy")
    _write_gencdf_csv(os.path.join(run_dir, "gencdf.csv"), cdf)
    print(f"train {report['train_accuracy']:.3f}, test {report['test_accuracy']:.3f}, "
          f"attack {report['attack_accuracy']:.3f}")
    return 0


def cmd_run(args) -> int:
    cfg = _build_config(args)
    report = run_experiment(cfg)
    print(f"train {report['train_accuracy']:.3f}, test {report['test_accuracy']:.3f}, "
          f"attack {report['attack_accuracy']:.3f} -> {cfg.output_dir}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    values = [float(v) for v in args.values]
    rows = []
    for v in values:
        sub = ExperimentConfig.from_dict(cfg.to_dict())
        tag = f"{args.param}_{v:g}"
        sub.output_dir = os.path.join(cfg.output_dir, tag)
        sub.run_label = f"{cfg.run_label}-{tag}"
        if args.param == "lambda":
            sub.game.lam = v
        elif args.param == "refsize":
            sub.split_sizes = dict(sub.split_sizes)
            sub.split_sizes["reference"] = int(v)
        report = run_experiment(sub)
        rows.append({
            "value": v,
            "train_accuracy": report["train_accuracy"],
            "test_accuracy": report["test_accuracy"],
            "attack_accuracy": report["attack_accuracy"],
        })
        print(f"{args.param}={v:g}: train {report['train_accuracy']:.3f}, "
              f"test {report['test_accuracy']:.3f}, attack {report['attack_accuracy']:.3f}")
    _write_json(os.path.join(cfg.output_dir, f"sweep_{args.param}.json"),
                {"param": args.param, "rows": rows})
    return 0


def cmd_report(args) -> int:
    reports = []
    for run_dir in args.run_dirs:
        report = _load_json(os.path.join(run_dir, "report.json"))
        reports.append(report)
        print(f"{run_dir}: label={report.get('run_label')} "
              f"train={report['train_accuracy']:.3f} test={report['test_accuracy']:.3f} "
              f"attack={report['attack_accuracy']:.3f}")
    if args.out:
        _write_json(args.out, {"reports": reports})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advreg",
        description="Membership-privacy-preserving training and membership inference evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic binary-feature dataset CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--d", type=int, default=60)
    p.add_argument("--per-class", type=int, default=300)
    p.add_argument("--flip-prob", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("split", help="produce a disjoint train/reference/adversary/eval split")
    _add_common(p)
    p.add_argument("--out", required=True)
    for name in ("train", "reference", "adversary_members", "adversary_nonmembers",
                 "eval_nonmembers"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train the classifier (plain, L2, or min-max)")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, help="adversarial regularization factor")
    p.add_argument("--l2", type=float, help="L2 penalty factor for the baseline")
    p.add_argument("--split", help="split JSON produced by the split subcommand")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attack", help="train the external attacker against a saved classifier")
    _add_common(p)
    p.add_argument("--split")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("evaluate", help="score a saved run and write all report files")
    _add_common(p)
    p.add_argument("--split")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline: train, attack, evaluate, report files")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--l2", type=float)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run the full pipeline across parameter values")
    _add_common(p)
    p.add_argument("--param", choices=["lambda", "refsize"], required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarize one or more run directories")
    p.add_argument("run_dirs", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdvRegError as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
