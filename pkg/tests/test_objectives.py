"""Objective values and gradients, checked against longhand formulas and
finite differences."""

import math

import numpy as np
import pytest

from advreg.data import synth_generate
from advreg.errors import InputError
from advreg.models import attack_grad_arrays, build_attack_model, build_classifier
from advreg.nn import cross_entropy, grad_check
from advreg.objectives import (
    attack_gain_grads,
    classification_loss,
    classification_loss_grads,
    defender_objective,
    defender_objective_grads,
    gain_from_probs,
    inference_gain,
    l2_penalty,
)


def test_gain_random_guess_is_log_half():
    h = np.full(10, 0.5)
    assert abs(gain_from_probs(h, h) - math.log(0.5)) < 1e-15


def test_gain_perfect_attacker_is_zero():
    assert gain_from_probs(np.ones(4), np.zeros(4)) == 0.0


def test_gain_longhand():
    m = np.array([0.9, 0.7])
    n = np.array([0.2, 0.4])
    expected = 0.5 * (math.log(0.9) + math.log(0.7)) / 2 \
        + 0.5 * (math.log(0.8) + math.log(0.6)) / 2
    assert math.isclose(gain_from_probs(m, n), expected, rel_tol=1e-15)


def test_gain_clamps_log_arguments():
    val = gain_from_probs(np.array([0.0]), np.array([1.0]))
    assert math.isclose(val, math.log(1e-12), rel_tol=1e-12)
    assert gain_from_probs(np.array([0.5]), np.array([0.5]),
                           clamp_eps=1e-6) == pytest.approx(math.log(0.5))


def test_gain_rejects_empty():
    with pytest.raises(InputError):
        gain_from_probs(np.array([]), np.array([0.5]))


def test_classification_loss_matches_single_cross_entropy():
    clf = build_classifier(6, 3, [8], seed=0)
    x = np.random.default_rng(1).normal(size=(5, 6))
    y = np.array([0, 2, 1, 1, 0])
    preds = clf.predict(x)
    expected = np.mean([cross_entropy(preds[i], int(y[i])) for i in range(5)])
    assert math.isclose(classification_loss(clf, x, y), expected, rel_tol=1e-14)


def test_classification_loss_grads_finite_difference():
    clf = build_classifier(5, 3, [7], seed=2, init_std=0.3)
    x = np.random.default_rng(3).normal(size=(6, 5))
    y = np.array([0, 1, 2, 0, 1, 2])
    loss, grads = classification_loss_grads(clf, x, y)
    assert math.isclose(loss, classification_loss(clf, x, y), rel_tol=1e-14)
    err = grad_check(clf.params.arrays(),
                     lambda: classification_loss(clf, x, y),
                     grads.arrays(), probe_count=50, rng=np.random.default_rng(4))
    assert err < 1e-5


def test_l2_penalty_and_gradient():
    clf = build_classifier(4, 2, [3], seed=5, init_std=0.5)
    expected = sum(float(np.sum(w * w)) for w in clf.params.weights) \
        + sum(float(np.sum(b * b)) for b in clf.params.biases)
    assert math.isclose(l2_penalty(clf.params), expected, rel_tol=1e-14)

    x = np.random.default_rng(6).normal(size=(4, 4))
    y = np.array([0, 1, 0, 1])
    factor = 0.03
    loss, grads = classification_loss_grads(clf, x, y, l2_factor=factor)
    assert math.isclose(loss, classification_loss(clf, x, y)
                        + factor * l2_penalty(clf.params), rel_tol=1e-12)
    err = grad_check(
        clf.params.arrays(),
        lambda: classification_loss(clf, x, y) + factor * l2_penalty(clf.params),
        grads.arrays(), probe_count=50, rng=np.random.default_rng(7))
    assert err < 1e-5


def test_attack_gain_grads_finite_difference():
    k = 4
    atk = build_attack_model(k, seed=8, init_std=0.1)
    rng = np.random.default_rng(9)
    m_preds = rng.dirichlet(np.ones(k), size=5)
    n_preds = rng.dirichlet(np.ones(k), size=5)
    my = rng.integers(0, k, 5)
    ny = rng.integers(0, k, 5)

    gain, grads, d_m, d_n = attack_gain_grads(atk, m_preds, my, n_preds, ny)

    from advreg.models import attack_forward

    def value():
        return gain_from_probs(attack_forward(atk, m_preds, my),
                               attack_forward(atk, n_preds, ny))

    assert math.isclose(gain, value(), rel_tol=1e-14)
    err = grad_check(atk.param_arrays(), value, attack_grad_arrays(grads),
                     probe_count=60, rng=np.random.default_rng(10))
    assert err < 1e-5

    # Prediction-input gradients (the defender's path).
    eps = 1e-6
    for r in range(2):
        for c in range(k):
            hi, lo = m_preds.copy(), m_preds.copy()
            hi[r, c] += eps
            lo[r, c] -= eps
            numeric = (gain_from_probs(attack_forward(atk, hi, my), attack_forward(atk, n_preds, ny))
                       - gain_from_probs(attack_forward(atk, lo, my), attack_forward(atk, n_preds, ny))) / (2 * eps)
            assert abs(d_m[r, c] - numeric) < 1e-6 * max(1.0, abs(numeric))


def test_defender_objective_reduces_to_loss_at_lambda_zero():
    ds = synth_generate(3, 6, 10, 0.2, seed=0)
    clf = build_classifier(6, 3, [8], seed=1)
    atk = build_attack_model(3, seed=2)
    batch = (ds.features[:8], ds.labels[:8])
    ref = (ds.features[8:16], ds.labels[8:16])
    assert defender_objective(clf, atk, batch, ref, 0.0) == \
        classification_loss(clf, batch[0], batch[1])
    v0, g0 = defender_objective_grads(clf, atk, batch, ref, 0.0)
    v1, g1 = classification_loss_grads(clf, batch[0], batch[1])
    assert v0 == v1
    assert all(np.array_equal(a, b) for a, b in zip(g0.arrays(), g1.arrays()))


def test_defender_objective_value_decomposes():
    ds = synth_generate(3, 6, 12, 0.2, seed=3)
    clf = build_classifier(6, 3, [8], seed=4)
    atk = build_attack_model(3, seed=5)
    batch = (ds.features[:8], ds.labels[:8])
    ref = (ds.features[8:16], ds.labels[8:16])
    lam = 2.5
    expected = classification_loss(clf, *batch) + lam * inference_gain(atk, clf, batch, ref)
    assert math.isclose(defender_objective(clf, atk, batch, ref, lam), expected,
                        rel_tol=1e-14)
    with pytest.raises(InputError):
        defender_objective(clf, atk, batch, ref, -1.0)


def test_defender_objective_grads_finite_difference():
    # The critical path: the gradient must flow through f(x) into h on both
    # the member batch and the reference batch.
    ds = synth_generate(3, 6, 12, 0.2, seed=6)
    clf = build_classifier(6, 3, [8], seed=7, init_std=0.3)
    atk = build_attack_model(3, seed=8, init_std=0.1)
    batch = (ds.features[:6], ds.labels[:6])
    ref = (ds.features[6:12], ds.labels[6:12])
    lam = 2.5

    value, grads = defender_objective_grads(clf, atk, batch, ref, lam)
    assert math.isclose(value, defender_objective(clf, atk, batch, ref, lam),
                        rel_tol=1e-12)
    err = grad_check(clf.params.arrays(),
                     lambda: defender_objective(clf, atk, batch, ref, lam),
                     grads.arrays(), probe_count=60, rng=np.random.default_rng(11))
    assert err < 1e-5
