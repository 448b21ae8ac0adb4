"""External membership inference: train a fresh attacker against a frozen
target model and score its accuracy on data it never trained on."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import ConfigError, InputError, SplitError
from .models import AttackModel, ClassifierModel, attack_forward, build_attack_model
from .nn import LOG_CLAMP, OptimizerState, adam
from .trainer import _BatchSampler, attack_inner_step, stream_rng

_STREAM_EXTERNAL_ATTACK = 3


@dataclass
class AttackTrainConfig:
    """Budget for the external adversary. Defaults: 50 passes, Adam lr 0.001."""

    epochs: int = 50
    batch_size: int = 64
    optimizer: OptimizerState | None = None
    clamp_eps: float = LOG_CLAMP
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 2 or self.batch_size % 2 != 0:
            raise ConfigError("batch_size must be even and at least 2")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.optimizer is None:
            self.optimizer = adam(0.001)


def _check_knowledge_sets(
    known_members: LabeledDataset,
    known_nonmembers: LabeledDataset,
    train_provenance: np.ndarray | None,
) -> None:
    if len(known_members) == 0 or len(known_nonmembers) == 0:
        raise InputError("adversary knowledge sets must be nonempty")
    if train_provenance is None:
        return
    train_ids = set(np.asarray(train_provenance, dtype=int).tolist())
    if known_members.provenance is not None:
        if not set(known_members.provenance.tolist()) <= train_ids:
            raise SplitError("known members must be a subset of the training set")
    if known_nonmembers.provenance is not None:
        if set(known_nonmembers.provenance.tolist()) & train_ids:
            raise SplitError("known non-members overlap the training set")


def train_external_attacker(
    classifier: ClassifierModel,
    known_members: LabeledDataset,
    known_nonmembers: LabeledDataset,
    config: AttackTrainConfig | None = None,
    train_provenance: np.ndarray | None = None,
) -> AttackModel:
    """Gradient-ascent training of a fresh inference model on balanced batches.

    The target classifier is never modified. When ``train_provenance`` is
    given together with provenance-carrying knowledge sets, the member-subset
    and non-member-disjointness requirements are verified up front.
    """
    config = config or AttackTrainConfig()
    _check_knowledge_sets(known_members, known_nonmembers, train_provenance)

    rng = stream_rng(config.seed, _STREAM_EXTERNAL_ATTACK)
    attack = build_attack_model(classifier.class_count, rng)
    opt = config.optimizer.fresh()
    half = config.batch_size // 2
    m_sampler = _BatchSampler(len(known_members), half, rng)
    n_sampler = _BatchSampler(len(known_nonmembers), half, rng)
    steps_per_epoch = max(1, len(known_members) // half)

    for _ in range(config.epochs):
        for _ in range(steps_per_epoch):
            mi = m_sampler.next()
            ni = n_sampler.next()
            b = min(len(mi), len(ni))
            attack_inner_step(
                attack, classifier,
                (known_members.features[mi[:b]], known_members.labels[mi[:b]]),
                (known_nonmembers.features[ni[:b]], known_nonmembers.labels[ni[:b]]),
                opt, config.clamp_eps,
            )
    return attack


def _membership_probs(attack: AttackModel, classifier: ClassifierModel,
                      dataset: LabeledDataset) -> np.ndarray:
    preds = classifier.predict(dataset.features)
    return attack_forward(attack, preds, dataset.labels)


def attack_accuracy(
    attack: AttackModel,
    classifier: ClassifierModel,
    unknown_members: LabeledDataset,
    fresh_nonmembers: LabeledDataset,
) -> float:
    """Average probability of a correct membership call.

    Sums h over members the attacker did not train on and (1 - h) over fresh
    non-members, divided by the total row count.
    """
    if len(unknown_members) == 0 or len(fresh_nonmembers) == 0:
        raise InputError("evaluation sets must be nonempty")
    if (unknown_members.provenance is not None and fresh_nonmembers.provenance is not None
            and set(unknown_members.provenance.tolist()) & set(fresh_nonmembers.provenance.tolist())):
        raise SplitError("evaluation member and non-member sets overlap")
    h_m = _membership_probs(attack, classifier, unknown_members)
    h_n = _membership_probs(attack, classifier, fresh_nonmembers)
    total = float(np.sum(h_m) + np.sum(1.0 - h_n))
    return total / (len(unknown_members) + len(fresh_nonmembers))


def thresholded_attack_accuracy(
    attack: AttackModel,
    classifier: ClassifierModel,
    unknown_members: LabeledDataset,
    fresh_nonmembers: LabeledDataset,
    threshold: float = 0.5,
) -> float:
    """0/1 membership classification accuracy at a probability threshold."""
    h_m = _membership_probs(attack, classifier, unknown_members)
    h_n = _membership_probs(attack, classifier, fresh_nonmembers)
    correct = int(np.sum(h_m > threshold)) + int(np.sum(h_n <= threshold))
    return correct / (len(unknown_members) + len(fresh_nonmembers))


def attack_report(
    attack: AttackModel,
    classifier: ClassifierModel,
    unknown_members: LabeledDataset,
    fresh_nonmembers: LabeledDataset,
) -> dict:
    """Scoring summary emitted as the attack-report JSON."""
    h_m = _membership_probs(attack, classifier, unknown_members)
    h_n = _membership_probs(attack, classifier, fresh_nonmembers)
    return {
        "attack_accuracy": attack_accuracy(attack, classifier, unknown_members, fresh_nonmembers),
        "thresholded_accuracy": thresholded_attack_accuracy(
            attack, classifier, unknown_members, fresh_nonmembers),
        "mean_h_members": float(np.mean(h_m)),
        "mean_h_nonmembers": float(np.mean(h_n)),
        "sizes": {"unknown_members": len(unknown_members),
                  "fresh_nonmembers": len(fresh_nonmembers)},
    }
