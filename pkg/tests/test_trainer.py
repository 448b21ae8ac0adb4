"""Training loop: configs, determinism, alternation purity, and the
lambda = 0 reduction to plain training."""

import math

import numpy as np
import pytest

from advreg.data import split_dataset, synth_generate
from advreg.errors import ConfigError, TrainingError
from advreg.models import build_attack_model, build_classifier
from advreg.nn import sgd
from advreg.trainer import (
    GameConfig,
    TrainTrace,
    _BatchSampler,
    attack_inner_step,
    defense_outer_step,
    stream_rng,
    train_minmax,
    train_plain,
)


def small_split(seed=0):
    ds = synth_generate(k=3, d=10, per_class=60, flip_prob=0.2, seed=seed)
    return split_dataset(ds, dict(train=40, reference=40, adversary_members=10,
                                  adversary_nonmembers=30, eval_nonmembers=30), seed=seed)


def test_game_config_validation():
    with pytest.raises(ConfigError):
        GameConfig(batch_size=7)
    with pytest.raises(ConfigError):
        GameConfig(batch_size=0)
    with pytest.raises(ConfigError):
        GameConfig(lam=-1.0)
    with pytest.raises(ConfigError):
        GameConfig(lam=1.0, l2_factor=0.1)
    with pytest.raises(ConfigError):
        GameConfig(outer_epochs=0)
    GameConfig(lam=0.0, l2_factor=0.1)  # the L2 baseline is allowed


def test_stream_rngs_are_independent():
    a = stream_rng(42, 0).normal(size=5)
    b = stream_rng(42, 1).normal(size=5)
    c = stream_rng(42, 0).normal(size=5)
    assert np.array_equal(a, c)
    assert not np.array_equal(a, b)


def test_batch_sampler_covers_and_never_straddles():
    rng = np.random.default_rng(0)
    sampler = _BatchSampler(10, 4, rng)
    b1, b2 = sampler.next(), sampler.next()
    assert len(b1) == len(b2) == 4
    assert len(set(b1.tolist()) | set(b2.tolist())) == 8  # one permutation
    b3 = sampler.next()  # only 2 left: a fresh permutation starts instead
    assert len(b3) == 4
    seen = set(b1.tolist()) | set(b2.tolist()) | set(b3.tolist())
    assert seen <= set(range(10))


def test_batch_sampler_small_pool():
    sampler = _BatchSampler(3, 8, np.random.default_rng(0))
    batch = sampler.next()
    assert sorted(batch.tolist()) == [0, 1, 2]


def test_lambda_zero_reduction_is_bit_identical():
    split = small_split()
    cfg = GameConfig(lam=0.0, outer_epochs=4, batch_size=8, seed=11)

    clf_a = build_classifier(10, 3, [12], seed=5)
    clf_b = build_classifier(10, 3, [12], seed=5)
    atk = build_attack_model(3, seed=6)

    clf_a, _, trace_a = train_minmax(cfg, split, clf_a, atk)
    clf_b, trace_b = train_plain(GameConfig(lam=0.0, outer_epochs=4, batch_size=8, seed=11),
                                 split.train, clf_b, test_set=split.eval_nonmembers)

    for wa, wb in zip(clf_a.params.arrays(), clf_b.params.arrays()):
        assert np.array_equal(wa, wb)
    assert trace_a.classifier_loss == trace_b.classifier_loss
    assert trace_a.train_accuracy == trace_b.train_accuracy


def test_minmax_is_deterministic():
    split = small_split()
    clfs = []
    for _ in range(2):
        cfg = GameConfig(lam=1.0, outer_epochs=2, batch_size=8, seed=3)
        clf = build_classifier(10, 3, [12], seed=1)
        atk = build_attack_model(3, seed=2)
        clf, atk, _ = train_minmax(cfg, split, clf, atk)
        clfs.append((clf, atk))
    for wa, wb in zip(clfs[0][0].params.arrays(), clfs[1][0].params.arrays()):
        assert np.array_equal(wa, wb)
    assert clfs[0][1].checksum() == clfs[1][1].checksum()


def test_attack_step_freezes_classifier():
    split = small_split()
    clf = build_classifier(10, 3, [12], seed=1)
    atk = build_attack_model(3, seed=2)
    before = clf.params.checksum()
    atk_before = atk.checksum()
    gain = attack_inner_step(
        atk, clf,
        (split.train.features[:8], split.train.labels[:8]),
        (split.reference.features[:8], split.reference.labels[:8]),
        sgd(0.05),
    )
    assert clf.params.checksum() == before
    assert atk.checksum() != atk_before
    assert gain <= 0.0


def test_attack_step_requires_balanced_batches():
    split = small_split()
    clf = build_classifier(10, 3, [12], seed=1)
    atk = build_attack_model(3, seed=2)
    with pytest.raises(ConfigError):
        attack_inner_step(
            atk, clf,
            (split.train.features[:8], split.train.labels[:8]),
            (split.reference.features[:5], split.reference.labels[:5]),
            sgd(0.05),
        )


def test_defense_step_freezes_attack():
    split = small_split()
    clf = build_classifier(10, 3, [12], seed=1)
    atk = build_attack_model(3, seed=2)
    atk_before = atk.checksum()
    clf_before = clf.params.checksum()
    defense_outer_step(
        clf, atk,
        (split.train.features[:8], split.train.labels[:8]),
        (split.reference.features[:8], split.reference.labels[:8]),
        lam=1.0, optimizer=sgd(0.05),
    )
    assert atk.checksum() == atk_before
    assert clf.params.checksum() != clf_before


def test_inner_ascent_increases_gain():
    split = small_split()
    clf = build_classifier(10, 3, [12], seed=1)
    atk = build_attack_model(3, seed=2)
    member = (split.train.features[:16], split.train.labels[:16])
    nonmember = (split.reference.features[:16], split.reference.labels[:16])
    from advreg.objectives import inference_gain

    first = inference_gain(atk, clf, member, nonmember)
    for _ in range(30):
        attack_inner_step(atk, clf, member, nonmember, sgd(0.5))
    assert inference_gain(atk, clf, member, nonmember) > first


def test_plain_training_learns():
    split = small_split(seed=4)
    cfg = GameConfig(lam=0.0, outer_epochs=30, batch_size=8, seed=0)
    clf = build_classifier(10, 3, [16], seed=0)
    clf, trace = train_plain(cfg, split.train, clf, test_set=split.eval_nonmembers)
    assert len(trace) == 30
    assert trace.classifier_loss[-1] < trace.classifier_loss[0]
    assert trace.train_accuracy[-1] >= 0.8
    assert all(math.isnan(g) for g in trace.inference_gain)


def test_l2_baseline_shrinks_weights():
    split = small_split(seed=4)
    clfs = {}
    for l2 in (0.0, 0.01):
        cfg = GameConfig(lam=0.0, outer_epochs=20, batch_size=8, seed=0, l2_factor=l2)
        clf = build_classifier(10, 3, [16], seed=0)
        clf, _ = train_plain(cfg, split.train, clf)
        clfs[l2] = sum(float(np.sum(w * w)) for w in clf.params.weights)
    assert clfs[0.01] < clfs[0.0]


def test_minmax_records_gain():
    split = small_split()
    cfg = GameConfig(lam=1.0, outer_epochs=3, batch_size=8, seed=0)
    clf = build_classifier(10, 3, [12], seed=0)
    atk = build_attack_model(3, seed=1)
    _, _, trace = train_minmax(cfg, split, clf, atk)
    assert len(trace) == 3
    assert all(math.isfinite(g) and g <= 0.0 for g in trace.inference_gain)


def test_trace_csv_format(tmp_path):
    trace = TrainTrace()
    trace.append(1.5, -0.7, 0.4, 0.3)
    trace.append(1.2, -0.69, 0.5, 0.35)
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epoch,classifier_loss,inference_gain,train_accuracy,test_accuracy"
    assert lines[1].split(",")[0] == "0"
    assert float(lines[2].split(",")[1]) == 1.2
    assert len(lines) == 3


def test_training_error_carries_epoch():
    err = TrainingError("diverged", 7)
    assert err.epoch == 7
    assert "diverged" in str(err)
