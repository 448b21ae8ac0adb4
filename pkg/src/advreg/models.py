"""Classifier and membership-inference model construction and evaluation.

The inference model has three dense sub-networks: one over the prediction
vector, one over the one-hot label, and a common head over their concatenated
outputs that squashes to a membership probability with a sigmoid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import one_hot_matrix
from .errors import ConfigError, FormatError, InputError
from .nn import (
    FORMAT_VERSION,
    ForwardCache,
    MlpParams,
    MlpSpec,
    init_params,
    mlp_backward,
    mlp_forward,
    mlp_from_dict,
    mlp_to_dict,
)

# Reference architecture sizes; only the input widths scale with k.
CLASSIFIER_HIDDEN = [1024, 512, 256]
PREDICTION_BRANCH_HIDDEN = [1024, 512, 64]
LABEL_BRANCH_HIDDEN = [512, 64]
COMMON_HEAD = [256, 64, 1]


@dataclass
class ClassifierModel:
    """MLP mapping features to a probability vector over k classes."""

    spec: MlpSpec
    params: MlpParams
    class_count: int

    def predict(self, features: np.ndarray) -> np.ndarray:
        out, _ = mlp_forward(self.spec, self.params, features)
        return out

    def to_dict(self) -> dict:
        d = mlp_to_dict(self.spec, self.params)
        d["class_count"] = self.class_count
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierModel":
        spec, params = mlp_from_dict(d)
        return cls(spec, params, int(d["class_count"]))


@dataclass
class SubNet:
    spec: MlpSpec
    params: MlpParams


@dataclass
class AttackModel:
    """Three-branch membership inference network h(y, f(x)) -> (0, 1)."""

    prediction_branch: SubNet
    label_branch: SubNet
    common_branch: SubNet
    class_count: int

    def subnets(self) -> list[SubNet]:
        return [self.prediction_branch, self.label_branch, self.common_branch]

    def param_arrays(self) -> list[np.ndarray]:
        out = []
        for net in self.subnets():
            out.extend(net.params.arrays())
        return out

    def checksum(self) -> float:
        return float(sum(net.params.checksum() for net in self.subnets()))

    def to_dict(self) -> dict:
        return {
            "prediction_branch": mlp_to_dict(self.prediction_branch.spec, self.prediction_branch.params),
            "label_branch": mlp_to_dict(self.label_branch.spec, self.label_branch.params),
            "common_branch": mlp_to_dict(self.common_branch.spec, self.common_branch.params),
            "class_count": self.class_count,
            "format_version": FORMAT_VERSION,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AttackModel":
        if d.get("format_version") != FORMAT_VERSION:
            raise FormatError(f"unsupported format_version {d.get('format_version')!r}")
        nets = {}
        for name in ("prediction_branch", "label_branch", "common_branch"):
            spec, params = mlp_from_dict(d[name])
            nets[name] = SubNet(spec, params)
        return cls(nets["prediction_branch"], nets["label_branch"], nets["common_branch"],
                   int(d["class_count"]))


def build_classifier(
    input_dim: int,
    k: int,
    hidden_sizes: list[int],
    seed: int | np.random.Generator,
    init_std: float = 0.01,
) -> ClassifierModel:
    """Tanh MLP with a softmax output of width k."""
    if k < 2:
        raise ConfigError("classifier needs at least 2 classes")
    if not hidden_sizes:
        raise ConfigError("hidden_sizes must be nonempty")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    spec = MlpSpec(
        layer_sizes=[input_dim, *hidden_sizes, k],
        hidden_activation="tanh",
        output_activation="softmax",
        init_std=init_std,
    )
    return ClassifierModel(spec, init_params(spec, rng), k)


def build_attack_model(k: int, seed: int | np.random.Generator, init_std: float = 0.01) -> AttackModel:
    """ReLU three-branch inference network with a sigmoid membership output.

    Hidden widths are fixed at the reference sizes; only the two input widths
    scale with k. The common head consumes the concatenation
    (prediction-branch output, label-branch output) in that order.
    """
    if k < 2:
        raise ConfigError("attack model needs at least 2 classes")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pred_spec = MlpSpec([k, *PREDICTION_BRANCH_HIDDEN], hidden_activation="relu",
                        output_activation="relu", init_std=init_std)
    label_spec = MlpSpec([k, *LABEL_BRANCH_HIDDEN], hidden_activation="relu",
                         output_activation="relu", init_std=init_std)
    concat_width = PREDICTION_BRANCH_HIDDEN[-1] + LABEL_BRANCH_HIDDEN[-1]
    common_spec = MlpSpec([concat_width, *COMMON_HEAD], hidden_activation="relu",
                          output_activation="sigmoid", init_std=init_std)
    return AttackModel(
        prediction_branch=SubNet(pred_spec, init_params(pred_spec, rng)),
        label_branch=SubNet(label_spec, init_params(label_spec, rng)),
        common_branch=SubNet(common_spec, init_params(common_spec, rng)),
        class_count=k,
    )


@dataclass
class AttackCache:
    """Caches of all three sub-networks for one batched forward pass."""

    prediction: ForwardCache
    label: ForwardCache
    common: ForwardCache
    pred_width: int


def attack_forward_cached(
    model: AttackModel,
    predictions: np.ndarray,
    labels: np.ndarray,
) -> tuple[np.ndarray, AttackCache]:
    """Batched membership probabilities plus caches for the backward pass."""
    predictions = np.atleast_2d(np.asarray(predictions, dtype=float))
    labels = np.atleast_1d(np.asarray(labels, dtype=int))
    if predictions.shape[1] != model.class_count:
        raise InputError(
            f"prediction width {predictions.shape[1]} != class count {model.class_count}"
        )
    if len(labels) != predictions.shape[0]:
        raise InputError("label count does not match prediction rows")
    onehot = one_hot_matrix(labels, model.class_count)

    p_out, p_cache = mlp_forward(model.prediction_branch.spec, model.prediction_branch.params, predictions)
    l_out, l_cache = mlp_forward(model.label_branch.spec, model.label_branch.params, onehot)
    concat = np.concatenate([p_out, l_out], axis=1)
    c_out, c_cache = mlp_forward(model.common_branch.spec, model.common_branch.params, concat)
    probs = c_out[:, 0]
    return probs, AttackCache(p_cache, l_cache, c_cache, p_out.shape[1])


def attack_forward(model: AttackModel, predictions: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Membership probability in (0, 1) per row; scalar inputs give a 1-vector."""
    probs, _ = attack_forward_cached(model, predictions, labels)
    return probs


def attack_backward(
    model: AttackModel,
    cache: AttackCache,
    output_gradient: np.ndarray,
) -> tuple[list[MlpParams], np.ndarray]:
    """Backpropagate through all three branches.

    Returns gradients for (prediction_branch, label_branch, common_branch) and
    the gradient with respect to the raw prediction-vector input, which is the
    path the defender's update flows through.
    """
    g = np.asarray(output_gradient, dtype=float).reshape(-1, 1)
    c_grads, d_concat = mlp_backward(model.common_branch.spec, model.common_branch.params,
                                     cache.common, g)
    d_pred_out = d_concat[:, :cache.pred_width]
    d_label_out = d_concat[:, cache.pred_width:]
    p_grads, d_predictions = mlp_backward(model.prediction_branch.spec,
                                          model.prediction_branch.params,
                                          cache.prediction, d_pred_out)
    l_grads, _ = mlp_backward(model.label_branch.spec, model.label_branch.params,
                              cache.label, d_label_out)
    return [p_grads, l_grads, c_grads], d_predictions


def attack_grad_arrays(grads: list[MlpParams]) -> list[np.ndarray]:
    out = []
    for g in grads:
        out.extend(g.arrays())
    return out
