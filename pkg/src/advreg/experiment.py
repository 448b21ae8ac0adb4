"""End-to-end experiment orchestration: data, split, training, external
attack, scoring, and report files on disk."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .attack import AttackTrainConfig, attack_report, train_external_attacker
from .data import (
    DEFAULT_SPLIT_SIZES,
    DataSplit,
    LabeledDataset,
    load_csv,
    split_dataset,
    synth_generate,
)
from .errors import ConfigError
from .metrics import (
    distribution_gap,
    generalization_cdf,
    model_accuracy,
    per_class_generalization_error,
)
from .models import build_attack_model, build_classifier
from .theory import equilibrium_check, harvest_discrete_game
from .trainer import GameConfig, train_minmax, train_plain

# Stage offsets mixed into the run seed so every stage gets its own stream.
_SEED_DATASET = 10
_SEED_SPLIT = 11
_SEED_CLASSIFIER_INIT = 12
_SEED_GAME_ATTACK_INIT = 13
_SEED_EXTERNAL_ATTACK = 14


@dataclass
class ExperimentConfig:
    """One experiment: data source, split sizes, game settings, output paths."""

    output_dir: str = "runs/run"
    run_label: str = "run"
    csv_path: str | None = None
    label_column: str = "label"
    k: int = 10
    d: int = 60
    per_class: int = 300
    flip_prob: float = 0.2
    split_sizes: dict = field(default_factory=lambda: dict(DEFAULT_SPLIT_SIZES))
    hidden_sizes: list[int] = field(default_factory=lambda: [128, 64])
    attacker_epochs: int = 50
    game: GameConfig = field(default_factory=GameConfig)

    def to_dict(self) -> dict:
        d = {
            "output_dir": self.output_dir,
            "run_label": self.run_label,
            "csv_path": self.csv_path,
            "label_column": self.label_column,
            "k": self.k,
            "d": self.d,
            "per_class": self.per_class,
            "flip_prob": self.flip_prob,
            "split_sizes": dict(self.split_sizes),
            "hidden_sizes": list(self.hidden_sizes),
            "attacker_epochs": self.attacker_epochs,
            "game": self.game.to_dict(),
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        game_dict = dict(d.pop("game", {}))
        for key in ("classifier_optimizer", "attack_optimizer"):
            if key in game_dict:
                from .nn import OptimizerState

                game_dict[key] = OptimizerState(**game_dict[key])
        game = GameConfig(**game_dict)
        known = {f for f in cls.__dataclass_fields__ if f != "game"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(game=game, **d)


def _derived_seed(seed: int, stage: int) -> int:
    return int(np.random.SeedSequence([int(seed), stage]).generate_state(1)[0])


def load_or_generate(config: ExperimentConfig) -> LabeledDataset:
    if config.csv_path:
        return load_csv(config.csv_path, config.label_column, config.k)
    return synth_generate(config.k, config.d, config.per_class, config.flip_prob,
                          _derived_seed(config.game.seed, _SEED_DATASET))


def split_to_dict(split: DataSplit) -> dict:
    return {name: getattr(split, name).provenance.tolist()
            for name in ("train", "reference", "adversary_members",
                         "adversary_nonmembers", "eval_nonmembers")}


def split_from_dict(dataset: LabeledDataset, d: dict) -> DataSplit:
    split = DataSplit(**{name: dataset.subset(np.asarray(d[name], dtype=int))
                         for name in ("train", "reference", "adversary_members",
                                      "adversary_nonmembers", "eval_nonmembers")})
    split.validate()
    return split


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_histogram_csv(path, gap, which: str, statistic: str) -> None:
    counts = gap.member_histogram if which == "members" else gap.nonmember_histogram
    freq = counts / counts.sum()
    with open(path, "w") as fh:
        fh.write(f"# histogram of per-row {statistic} on {which}\n")
        fh.write("# equal-width bins on [0, 1]\n")
        fh.write("bin_lo,bin_hi,count,frequency\n")
        for i in range(len(counts)):
            fh.write(f"{gap.bin_edges[i]!r},{gap.bin_edges[i + 1]!r},{int(counts[i])},{freq[i]!r}\n")


def _write_gencdf_csv(path, cdf) -> None:
    with open(path, "w") as fh:
        fh.write("# empirical CDF of per-class generalization error (train acc - test acc)\n")
        fh.write("generalization_error,fraction_of_classes\n")
        for err, frac in cdf:
            fh.write(f"{err!r},{frac!r}\n")


def run_experiment(config: ExperimentConfig) -> dict:
    """Run the full pipeline and write all report files under output_dir.

    Returns the report dictionary that was written to report.json.
    """
    os.makedirs(config.output_dir, exist_ok=True)
    game = config.game

    dataset = load_or_generate(config)
    split = split_dataset(dataset, config.split_sizes,
                          _derived_seed(game.seed, _SEED_SPLIT))

    classifier = build_classifier(dataset.dim, config.k, config.hidden_sizes,
                                  _derived_seed(game.seed, _SEED_CLASSIFIER_INIT))
    if game.lam > 0:
        game_attack = build_attack_model(config.k,
                                         _derived_seed(game.seed, _SEED_GAME_ATTACK_INIT))
        classifier, game_attack, trace = train_minmax(game, split, classifier, game_attack)
        _write_json(os.path.join(config.output_dir, "game_attack_model.json"),
                    game_attack.to_dict())
    else:
        classifier, trace = train_plain(game, split.train, classifier,
                                        test_set=split.eval_nonmembers)

    attacker = train_external_attacker(
        classifier, split.adversary_members, split.adversary_nonmembers,
        AttackTrainConfig(epochs=config.attacker_epochs, batch_size=game.batch_size,
                          seed=_derived_seed(game.seed, _SEED_EXTERNAL_ATTACK)),
        train_provenance=split.train.provenance,
    )
    unknown_members = split.unknown_members()
    atk_report = attack_report(attacker, classifier, unknown_members, split.eval_nonmembers)

    errors = per_class_generalization_error(classifier, split.train, split.eval_nonmembers)
    cdf = generalization_cdf(errors)
    acc_gap = distribution_gap(classifier, split.train, split.eval_nonmembers,
                               "prediction_accuracy")
    ent_gap = distribution_gap(classifier, split.train, split.eval_nonmembers,
                               "normalized_entropy")
    game_dist = harvest_discrete_game(classifier, split.train, split.eval_nonmembers)
    _, eq_diag = equilibrium_check(game_dist, tolerance=0.05)

    report = {
        "run_label": config.run_label,
        "config": config.to_dict(),
        "train_accuracy": model_accuracy(classifier, split.train),
        "test_accuracy": model_accuracy(classifier, split.eval_nonmembers),
        "attack_accuracy": atk_report["attack_accuracy"],
        "attack_report": atk_report,
        "generalization_cdf": [[e, f] for e, f in cdf],
        "accuracy_gap": acc_gap.to_dict(),
        "entropy_gap": ent_gap.to_dict(),
        "equilibrium_diagnostics": eq_diag,
        "final_classifier_loss": trace.classifier_loss[-1],
    }

    out = config.output_dir
    _write_json(os.path.join(out, "report.json"), report)
    _write_json(os.path.join(out, "classifier.json"), classifier.to_dict())
    _write_json(os.path.join(out, "attack_model.json"), attacker.to_dict())
    _write_json(os.path.join(out, "split.json"), split_to_dict(split))
    trace.to_csv(os.path.join(out, "trace.csv"))
    _write_histogram_csv(os.path.join(out, "hist_accuracy_members.csv"),
                         acc_gap, "members", "prediction accuracy")
    _write_histogram_csv(os.path.join(out, "hist_accuracy_nonmembers.csv"),
                         acc_gap, "nonmembers", "prediction accuracy")
    _write_histogram_csv(os.path.join(out, "hist_entropy_members.csv"),
                         ent_gap, "members", "normalized entropy")
    _write_histogram_csv(os.path.join(out, "hist_entropy_nonmembers.csv"),
                         ent_gap, "nonmembers", "normalized entropy")
    _write_gencdf_csv(os.path.join(out, "gencdf.csv"), cdf)
    return report
