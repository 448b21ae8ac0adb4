"""Alternating min-max training of the classifier against the inference model,
plus the plain / L2-regularized baselines."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .data import DataSplit, LabeledDataset
from .errors import ConfigError, TrainingError
from .metrics import model_accuracy
from .models import AttackModel, ClassifierModel, attack_grad_arrays
from .nn import LOG_CLAMP, OptimizerState, adam, optimizer_step
from .objectives import (
    attack_gain_grads,
    classification_loss,
    classification_loss_grads,
    defender_objective_grads,
    inference_gain,
)

# Independent RNG streams derived from the run seed. Keeping the classifier's
# data order on its own stream makes lambda = 0 min-max training bit-identical
# to plain training.
_STREAM_CLASSIFIER = 0
_STREAM_ATTACK = 1
_STREAM_REFERENCE = 2


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))


@dataclass
class GameConfig:
    """Hyper-parameters of one training run."""

    lam: float = 0.0
    outer_epochs: int = 50
    batch_size: int = 64
    attack_steps_per_epoch: int | None = None   # None: one member pass
    defense_steps_per_epoch: int | None = None  # None: one train pass
    classifier_optimizer: OptimizerState = field(default_factory=lambda: adam(0.001))
    attack_optimizer: OptimizerState = field(default_factory=lambda: adam(0.001))
    clamp_eps: float = LOG_CLAMP
    seed: int = 0
    l2_factor: float = 0.0

    def __post_init__(self):
        if self.batch_size < 2 or self.batch_size % 2 != 0:
            raise ConfigError("batch_size must be even and at least 2")
        if self.lam < 0 or self.l2_factor < 0:
            raise ConfigError("lambda and l2_factor must be nonnegative")
        if self.lam > 0 and self.l2_factor > 0:
            raise ConfigError("lambda and l2_factor cannot both be positive in one run")
        if self.outer_epochs < 1:
            raise ConfigError("outer_epochs must be at least 1")

    def to_dict(self) -> dict:
        return {
            "lam": self.lam,
            "outer_epochs": self.outer_epochs,
            "batch_size": self.batch_size,
            "attack_steps_per_epoch": self.attack_steps_per_epoch,
            "defense_steps_per_epoch": self.defense_steps_per_epoch,
            "classifier_optimizer": {"kind": self.classifier_optimizer.kind,
                                     "learning_rate": self.classifier_optimizer.learning_rate},
            "attack_optimizer": {"kind": self.attack_optimizer.kind,
                                 "learning_rate": self.attack_optimizer.learning_rate},
            "clamp_eps": self.clamp_eps,
            "seed": self.seed,
            "l2_factor": self.l2_factor,
        }


@dataclass
class TrainTrace:
    """One record per completed outer epoch."""

    classifier_loss: list[float] = field(default_factory=list)
    inference_gain: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    test_accuracy: list[float] = field(default_factory=list)

    def append(self, loss: float, gain: float, train_acc: float, test_acc: float) -> None:
        self.classifier_loss.append(loss)
        self.inference_gain.append(gain)
        self.train_accuracy.append(train_acc)
        self.test_accuracy.append(test_acc)

    def __len__(self) -> int:
        return len(self.classifier_loss)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "classifier_loss", "inference_gain",
                             "train_accuracy", "test_accuracy"])
            for i in range(len(self)):
                writer.writerow([i, repr(self.classifier_loss[i]), repr(self.inference_gain[i]),
                                 repr(self.train_accuracy[i]), repr(self.test_accuracy[i])])


class _BatchSampler:
    """Yields index batches from repeated fresh permutations.

    Batches never straddle a permutation boundary, so a pool smaller than the
    batch size is effectively sampled with replacement across batches.
    """

    def __init__(self, n: int, batch_size: int, rng: np.random.Generator):
        self.n = n
        self.batch_size = min(batch_size, n)
        self.rng = rng
        self._perm = np.empty(0, dtype=int)
        self._pos = 0

    def next(self) -> np.ndarray:
        if self._pos + self.batch_size > len(self._perm):
            self._perm = self.rng.permutation(self.n)
            self._pos = 0
        batch = self._perm[self._pos:self._pos + self.batch_size]
        self._pos += self.batch_size
        return batch


def attack_inner_step(
    attack: AttackModel,
    classifier: ClassifierModel,
    member_batch: tuple[np.ndarray, np.ndarray],
    nonmember_batch: tuple[np.ndarray, np.ndarray],
    optimizer: OptimizerState,
    clamp_eps: float = LOG_CLAMP,
) -> float:
    """One gradient-ascent step of the inference model; the classifier is frozen."""
    mx, my = member_batch
    nx, ny = nonmember_batch
    if len(my) != len(ny):
        raise ConfigError(f"attack batch must be balanced: {len(my)} members vs {len(ny)} non-members")
    m_preds = classifier.predict(mx)
    n_preds = classifier.predict(nx)
    gain, grads, _, _ = attack_gain_grads(attack, m_preds, my, n_preds, ny, clamp_eps)
    ascent = [-g for g in attack_grad_arrays(grads)]
    optimizer_step(optimizer, attack.param_arrays(), ascent)
    return gain


def defense_outer_step(
    classifier: ClassifierModel,
    attack: AttackModel,
    train_batch: tuple[np.ndarray, np.ndarray],
    reference_batch: tuple[np.ndarray, np.ndarray] | None,
    lam: float,
    optimizer: OptimizerState,
    clamp_eps: float = LOG_CLAMP,
    l2_factor: float = 0.0,
) -> float:
    """One descent step of the classifier; the inference model is frozen."""
    if lam > 0:
        value, grads = defender_objective_grads(
            classifier, attack, train_batch, reference_batch, lam, clamp_eps
        )
    else:
        value, grads = classification_loss_grads(
            classifier, train_batch[0], train_batch[1], clamp_eps, l2_factor=l2_factor
        )
    optimizer_step(optimizer, classifier.params.arrays(), grads.arrays())
    return value


def _epoch_record(
    trace: TrainTrace,
    classifier: ClassifierModel,
    train_set: LabeledDataset,
    test_set: LabeledDataset | None,
    gain: float,
    clamp_eps: float,
    epoch: int,
) -> None:
    loss = classification_loss(classifier, train_set.features, train_set.labels, clamp_eps)
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite classifier loss at epoch {epoch}", epoch)
    train_acc = model_accuracy(classifier, train_set)
    test_acc = model_accuracy(classifier, test_set) if test_set is not None else train_acc
    trace.append(loss, gain, train_acc, test_acc)


def train_minmax(
    config: GameConfig,
    split: DataSplit,
    classifier: ClassifierModel,
    attack: AttackModel,
) -> tuple[ClassifierModel, AttackModel, TrainTrace]:
    """Alternating adversarial training on (train, reference).

    Each epoch runs the attack's ascent steps over balanced member/non-member
    minibatches, then the defense's descent steps over train minibatches paired
    with reference minibatches. The inference model is warm-started across
    epochs. Fully deterministic for a fixed config seed.
    """
    split.validate()
    train, reference = split.train, split.reference
    half = config.batch_size // 2
    attack_steps = config.attack_steps_per_epoch or max(1, len(train) // half)
    defense_steps = config.defense_steps_per_epoch or max(1, len(train) // config.batch_size)

    cls_rng = stream_rng(config.seed, _STREAM_CLASSIFIER)
    atk_rng = stream_rng(config.seed, _STREAM_ATTACK)
    ref_rng = stream_rng(config.seed, _STREAM_REFERENCE)
    cls_sampler = _BatchSampler(len(train), config.batch_size, cls_rng)
    atk_member_sampler = _BatchSampler(len(train), half, atk_rng)
    atk_nonmember_sampler = _BatchSampler(len(reference), half, atk_rng)
    ref_sampler = _BatchSampler(len(reference), config.batch_size, ref_rng)

    cls_opt = config.classifier_optimizer.fresh()
    atk_opt = config.attack_optimizer.fresh()
    trace = TrainTrace()

    for epoch in range(config.outer_epochs):
        # With lam == 0 the regularizer is inert, so the inner maximization is
        # skipped; this keeps the run bit-identical to train_plain.
        gain = float("nan")
        if config.lam > 0:
            for _ in range(attack_steps):
                mi = atk_member_sampler.next()
                ni = atk_nonmember_sampler.next()
                # Balance even when the pools run dry at different sizes.
                b = min(len(mi), len(ni))
                gain = attack_inner_step(
                    attack, classifier,
                    (train.features[mi[:b]], train.labels[mi[:b]]),
                    (reference.features[ni[:b]], reference.labels[ni[:b]]),
                    atk_opt, config.clamp_eps,
                )
        for _ in range(defense_steps):
            ti = cls_sampler.next()
            train_batch = (train.features[ti], train.labels[ti])
            if config.lam > 0:
                ri = ref_sampler.next()
                ref_batch = (reference.features[ri], reference.labels[ri])
            else:
                ref_batch = None
            defense_outer_step(classifier, attack, train_batch, ref_batch,
                               config.lam, cls_opt, config.clamp_eps)
        if config.lam > 0:
            gain = inference_gain(
                attack, classifier,
                (train.features, train.labels),
                (reference.features, reference.labels),
                config.clamp_eps,
            )
        _epoch_record(trace, classifier, train, split.eval_nonmembers,
                      gain, config.clamp_eps, epoch)
    return classifier, attack, trace


def train_plain(
    config: GameConfig,
    train_set: LabeledDataset,
    classifier: ClassifierModel,
    l2_factor: float | None = None,
    test_set: LabeledDataset | None = None,
) -> tuple[ClassifierModel, TrainTrace]:
    """Minibatch descent on classification loss plus an optional L2 penalty."""
    l2 = config.l2_factor if l2_factor is None else l2_factor
    if l2 < 0:
        raise ConfigError("l2_factor must be nonnegative")
    defense_steps = config.defense_steps_per_epoch or max(1, len(train_set) // config.batch_size)
    cls_rng = stream_rng(config.seed, _STREAM_CLASSIFIER)
    sampler = _BatchSampler(len(train_set), config.batch_size, cls_rng)
    opt = config.classifier_optimizer.fresh()
    trace = TrainTrace()

    for epoch in range(config.outer_epochs):
        for _ in range(defense_steps):
            ti = sampler.next()
            batch = (train_set.features[ti], train_set.labels[ti])
            defense_outer_step(classifier, None, batch, None, 0.0, opt,
                               config.clamp_eps, l2_factor=l2)
        _epoch_record(trace, classifier, train_set, test_set,
                      float("nan"), config.clamp_eps, epoch)
    return classifier, trace
