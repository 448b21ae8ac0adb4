"""Scalar training objectives and their gradients.

The defender's objective is classification loss plus lambda times the
attacker's gain; its gradient with respect to the classifier flows through the
classifier outputs into the inference model on both the member and reference
batches.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .models import (
    AttackModel,
    ClassifierModel,
    attack_backward,
    attack_forward_cached,
)
from .nn import LOG_CLAMP, MlpParams, mlp_backward, mlp_forward


def _clamped_log(p: np.ndarray, eps: float) -> np.ndarray:
    return np.log(np.maximum(p, eps))


def _clamped_log_grad(p: np.ndarray, eps: float) -> np.ndarray:
    """d/dp log(max(p, eps)): zero inside the clamp, 1/p outside."""
    return np.where(p > eps, 1.0 / np.maximum(p, eps), 0.0)


def classification_loss(
    classifier: ClassifierModel,
    features: np.ndarray,
    labels: np.ndarray,
    clamp_eps: float = LOG_CLAMP,
) -> float:
    """Mean cross-entropy of the classifier over a batch."""
    if len(features) == 0:
        raise InputError("empty batch")
    preds = classifier.predict(features)
    picked = preds[np.arange(len(labels)), np.asarray(labels, dtype=int)]
    return float(-np.mean(_clamped_log(picked, clamp_eps)))


def classification_loss_grads(
    classifier: ClassifierModel,
    features: np.ndarray,
    labels: np.ndarray,
    clamp_eps: float = LOG_CLAMP,
    l2_factor: float = 0.0,
) -> tuple[float, MlpParams]:
    """Loss value plus classifier parameter gradients.

    Optionally adds an L2 penalty (sum of squared parameters) with its
    gradient, for the weight-decay baseline.
    """
    if len(features) == 0:
        raise InputError("empty batch")
    labels = np.asarray(labels, dtype=int)
    preds, cache = mlp_forward(classifier.spec, classifier.params, features)
    n = len(labels)
    picked = preds[np.arange(n), labels]
    loss = float(-np.mean(_clamped_log(picked, clamp_eps)))

    dpreds = np.zeros_like(preds)
    dpreds[np.arange(n), labels] = -_clamped_log_grad(picked, clamp_eps) / n
    grads, _ = mlp_backward(classifier.spec, classifier.params, cache, dpreds)

    if l2_factor > 0.0:
        loss += l2_factor * l2_penalty(classifier.params)
        for gw, w in zip(grads.weights, classifier.params.weights):
            gw += 2.0 * l2_factor * w
        for gb, b in zip(grads.biases, classifier.params.biases):
            gb += 2.0 * l2_factor * b
    return loss, grads


def gain_from_probs(
    member_probs: np.ndarray,
    nonmember_probs: np.ndarray,
    clamp_eps: float = LOG_CLAMP,
) -> float:
    """Half-weighted mean log-likelihood of correct membership calls; <= 0."""
    if len(member_probs) == 0 or len(nonmember_probs) == 0:
        raise InputError("empty batch")
    return float(
        0.5 * np.mean(_clamped_log(member_probs, clamp_eps))
        + 0.5 * np.mean(_clamped_log(1.0 - nonmember_probs, clamp_eps))
    )


def inference_gain(
    attack: AttackModel,
    classifier: ClassifierModel,
    member_batch: tuple[np.ndarray, np.ndarray],
    nonmember_batch: tuple[np.ndarray, np.ndarray],
    clamp_eps: float = LOG_CLAMP,
) -> float:
    """Empirical attacker gain over a member batch and a non-member batch."""
    mx, my = member_batch
    nx, ny = nonmember_batch
    m_probs, _ = attack_forward_cached(attack, classifier.predict(mx), my)
    n_probs, _ = attack_forward_cached(attack, classifier.predict(nx), ny)
    return gain_from_probs(m_probs, n_probs, clamp_eps)


def attack_gain_grads(
    attack: AttackModel,
    member_preds: np.ndarray,
    member_labels: np.ndarray,
    nonmember_preds: np.ndarray,
    nonmember_labels: np.ndarray,
    clamp_eps: float = LOG_CLAMP,
) -> tuple[float, list[MlpParams], np.ndarray, np.ndarray]:
    """Gain plus attack-parameter gradients and prediction-input gradients.

    The prediction-input gradients are what the defender needs: they carry
    d(gain)/d(f(x)) for both batches.
    """
    m_probs, m_cache = attack_forward_cached(attack, member_preds, member_labels)
    n_probs, n_cache = attack_forward_cached(attack, nonmember_preds, nonmember_labels)
    gain = gain_from_probs(m_probs, n_probs, clamp_eps)

    d_m = 0.5 * _clamped_log_grad(m_probs, clamp_eps) / len(m_probs)
    d_n = -0.5 * _clamped_log_grad(1.0 - n_probs, clamp_eps) / len(n_probs)
    m_grads, d_mpreds = attack_backward(attack, m_cache, d_m)
    n_grads, d_npreds = attack_backward(attack, n_cache, d_n)
    total = [
        MlpParams(
            [gm + gn for gm, gn in zip(a.weights, b.weights)],
            [gm + gn for gm, gn in zip(a.biases, b.biases)],
        )
        for a, b in zip(m_grads, n_grads)
    ]
    return gain, total, d_mpreds, d_npreds


def defender_objective(
    classifier: ClassifierModel,
    attack: AttackModel,
    train_batch: tuple[np.ndarray, np.ndarray],
    reference_batch: tuple[np.ndarray, np.ndarray],
    lam: float,
    clamp_eps: float = LOG_CLAMP,
) -> float:
    """Classification loss plus lambda times the attacker's gain."""
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    loss = classification_loss(classifier, train_batch[0], train_batch[1], clamp_eps)
    if lam == 0:
        return loss
    gain = inference_gain(attack, classifier, train_batch, reference_batch, clamp_eps)
    return loss + lam * gain


def defender_objective_grads(
    classifier: ClassifierModel,
    attack: AttackModel,
    train_batch: tuple[np.ndarray, np.ndarray],
    reference_batch: tuple[np.ndarray, np.ndarray],
    lam: float,
    clamp_eps: float = LOG_CLAMP,
) -> tuple[float, MlpParams]:
    """Objective value plus full classifier gradients, including the path
    through the classifier outputs into the inference model."""
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    if lam == 0:
        return classification_loss_grads(classifier, train_batch[0], train_batch[1], clamp_eps)

    tx, ty = train_batch
    rx, ry = reference_batch
    ty = np.asarray(ty, dtype=int)
    ry = np.asarray(ry, dtype=int)
    t_preds, t_cache = mlp_forward(classifier.spec, classifier.params, tx)
    r_preds, r_cache = mlp_forward(classifier.spec, classifier.params, rx)

    n = len(ty)
    picked = t_preds[np.arange(n), ty]
    loss = float(-np.mean(_clamped_log(picked, clamp_eps)))
    d_tpreds = np.zeros_like(t_preds)
    d_tpreds[np.arange(n), ty] = -_clamped_log_grad(picked, clamp_eps) / n

    gain, _, d_tpreds_gain, d_rpreds_gain = attack_gain_grads(
        attack, t_preds, ty, r_preds, ry, clamp_eps
    )
    d_tpreds += lam * d_tpreds_gain
    d_rpreds = lam * d_rpreds_gain

    t_grads, _ = mlp_backward(classifier.spec, classifier.params, t_cache, d_tpreds)
    r_grads, _ = mlp_backward(classifier.spec, classifier.params, r_cache, d_rpreds)
    grads = MlpParams(
        [a + b for a, b in zip(t_grads.weights, r_grads.weights)],
        [a + b for a, b in zip(t_grads.biases, r_grads.biases)],
    )
    return loss + lam * gain, grads


def l2_penalty(params: MlpParams) -> float:
    """Sum of squares of all weights and biases."""
    return float(
        sum(np.sum(w * w) for w in params.weights)
        + sum(np.sum(b * b) for b in params.biases)
    )
