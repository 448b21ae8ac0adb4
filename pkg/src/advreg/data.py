"""Dataset containers, CSV ingestion, synthetic generation, and splitting.

The synthetic generator is a stand-in for binary-feature purchase-style
records: each class has a random binary prototype and rows are the prototype
with independent bit flips.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FormatError, InputError

# Desk-scale defaults: big enough to overfit a small MLP, small enough for CI.
DEFAULT_SYNTH = dict(k=10, d=60, per_class=300)
DEFAULT_SPLIT_SIZES = dict(train=1000, reference=1000, adversary_members=250,
                           adversary_nonmembers=500, eval_nonmembers=500)


@dataclass
class LabeledDataset:
    """Feature matrix plus integer class labels.

    ``provenance`` carries the row indices into the original source dataset
    when this is a split subset; it lets downstream code audit disjointness.
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    provenance: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.features.ndim != 2:
            raise InputError("features must be a 2-D matrix")
        if len(self.labels) != self.features.shape[0]:
            raise InputError("label count does not match row count")
        if self.features.shape[0] < 1:
            raise InputError("dataset must contain at least one row")
        if not np.all(np.isfinite(self.features)):
            raise InputError("dataset features must be finite")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            bad = int(np.argmax((self.labels < 0) | (self.labels >= self.class_count)))
            raise FormatError(f"row {bad}: label {self.labels[bad]} out of range for k={self.class_count}")
        if self.provenance is not None:
            self.provenance = np.asarray(self.provenance, dtype=int)
            if len(self.provenance) != len(self.labels):
                raise InputError("provenance length does not match row count")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=int)
        prov = self.provenance[indices] if self.provenance is not None else indices.copy()
        return LabeledDataset(self.features[indices], self.labels[indices], self.class_count, prov)


@dataclass
class DataSplit:
    """The five sample sets the defense and the attack consume.

    train: members the classifier trains on.
    reference: defender's non-member reference pool, disjoint from train.
    adversary_members: subset of train known to the external attacker.
    adversary_nonmembers: non-members known to the external attacker.
    eval_nonmembers: fresh non-members used only for scoring.
    """

    train: LabeledDataset
    reference: LabeledDataset
    adversary_members: LabeledDataset
    adversary_nonmembers: LabeledDataset
    eval_nonmembers: LabeledDataset

    def validate(self) -> None:
        sets = {
            "train": set(self.train.provenance.tolist()),
            "reference": set(self.reference.provenance.tolist()),
            "adversary_members": set(self.adversary_members.provenance.tolist()),
            "adversary_nonmembers": set(self.adversary_nonmembers.provenance.tolist()),
            "eval_nonmembers": set(self.eval_nonmembers.provenance.tolist()),
        }
        from .errors import SplitError

        if not sets["adversary_members"] <= sets["train"]:
            raise SplitError("adversary members must be a subset of the training set")
        disjoint_pairs = [
            ("reference", "train"),
            ("adversary_nonmembers", "train"),
            ("eval_nonmembers", "train"),
            ("eval_nonmembers", "adversary_nonmembers"),
        ]
        for a, b in disjoint_pairs:
            if sets[a] & sets[b]:
                raise SplitError(f"{a} overlaps {b}")

    def unknown_members(self) -> LabeledDataset:
        """Training rows the external attacker did not see (D minus its known members)."""
        known = set(self.adversary_members.provenance.tolist())
        keep = np.array([i for i, p in enumerate(self.train.provenance) if p not in known], dtype=int)
        return self.train.subset(keep)


def one_hot(label: int, k: int) -> np.ndarray:
    if not 0 <= label < k:
        raise InputError(f"label {label} out of range for k={k}")
    v = np.zeros(k)
    v[label] = 1.0
    return v


def one_hot_matrix(labels: np.ndarray, k: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise InputError("label out of range")
    m = np.zeros((len(labels), k))
    m[np.arange(len(labels)), labels] = 1.0
    return m


def synth_generate(k: int, d: int, per_class: int, flip_prob: float,
                   seed: int) -> LabeledDataset:
    """Per-class binary prototypes with independent feature flips."""
    if not 0 <= flip_prob < 0.5:
        raise InputError("flip_prob must lie in [0, 0.5)")
    if k < 2 or d < 1 or per_class < 1:
        raise InputError("k >= 2, d >= 1, per_class >= 1 required")
    rng = np.random.default_rng(seed)
    prototypes = rng.integers(0, 2, size=(k, d)).astype(float)
    rows, labels = [], []
    for c in range(k):
        flips = rng.random((per_class, d)) < flip_prob
        rows.append(np.abs(prototypes[c] - flips.astype(float)))
        labels.append(np.full(per_class, c))
    features = np.concatenate(rows)
    labels = np.concatenate(labels)
    order = rng.permutation(len(labels))
    return LabeledDataset(features[order], labels[order], k)


def load_csv(path, label_column: str, k: int) -> LabeledDataset:
    """Read a headered CSV; every non-label column is a numeric feature."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if label_column not in header:
            raise FormatError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
        feat_idx = [i for i in range(len(header)) if i != label_idx]
        features, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
            try:
                features.append([float(row[i]) for i in feat_idx])
                label = int(row[label_idx])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if not 0 <= label < k:
                raise FormatError(f"{path}:{lineno}: label {label} out of range for k={k}")
            labels.append(label)
    if not labels:
        raise FormatError(f"{path}: no data rows")
    return LabeledDataset(np.array(features), np.array(labels), k)


def save_csv(dataset: LabeledDataset, path, label_column: str = "label") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(dataset.dim)] + [label_column])
        for x, y in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


def split_dataset(dataset: LabeledDataset, sizes: dict, seed: int) -> DataSplit:
    """Disjoint sampling of train/reference/adversary/eval sets.

    ``sizes`` keys: train, reference, adversary_members, adversary_nonmembers,
    eval_nonmembers. Adversary members are drawn from within the train set;
    everything else is pairwise disjoint.
    """
    n_train = int(sizes["train"])
    n_ref = int(sizes["reference"])
    n_adv_m = int(sizes["adversary_members"])
    n_adv_n = int(sizes["adversary_nonmembers"])
    n_eval = int(sizes["eval_nonmembers"])
    total = n_train + n_ref + n_adv_n + n_eval
    if total > len(dataset):
        raise ConfigError(f"split needs {total} rows, dataset has {len(dataset)}")
    if n_adv_m > n_train:
        raise ConfigError("adversary_members cannot exceed the train size")
    if min(n_train, n_ref, n_adv_m, n_adv_n, n_eval) < 1:
        raise ConfigError("every split size must be at least 1")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dataset))
    train_idx = order[:n_train]
    ref_idx = order[n_train:n_train + n_ref]
    adv_n_idx = order[n_train + n_ref:n_train + n_ref + n_adv_n]
    eval_idx = order[n_train + n_ref + n_adv_n:total]
    adv_m_idx = rng.choice(train_idx, size=n_adv_m, replace=False)

    split = DataSplit(
        train=dataset.subset(train_idx),
        reference=dataset.subset(ref_idx),
        adversary_members=dataset.subset(adv_m_idx),
        adversary_nonmembers=dataset.subset(adv_n_idx),
        eval_nonmembers=dataset.subset(eval_idx),
    )
    split.validate()
    return split
