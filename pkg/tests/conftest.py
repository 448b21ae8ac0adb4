"""Shared fixtures and a terminal summary for the acceptance criteria."""

import numpy as np
import pytest

from advreg.data import synth_generate
from advreg.models import build_attack_model, build_classifier


@pytest.fixture
def tiny_dataset():
    return synth_generate(k=3, d=8, per_class=30, flip_prob=0.2, seed=0)


@pytest.fixture
def tiny_classifier():
    return build_classifier(input_dim=8, k=3, hidden_sizes=[12, 6], seed=7)


@pytest.fixture
def tiny_attack():
    return build_attack_model(k=3, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid and rep.when == "call":
                rows.append((nodeid.split("::")[-1], outcome == "passed"))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in sorted(rows):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
