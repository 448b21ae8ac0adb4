"""Finite-alphabet oracle for the game's theory: the closed-form best
attacker, its gain, a brute-force verification, and the equilibrium test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import InputError
from .models import ClassifierModel
from .nn import LOG_CLAMP

RANDOM_GUESS_GAIN = math.log(0.5)


@dataclass
class DiscreteGame:
    """Member and non-member output distributions over a finite alphabet."""

    p_member: np.ndarray
    p_nonmember: np.ndarray

    def __post_init__(self):
        self.p_member = np.asarray(self.p_member, dtype=float)
        self.p_nonmember = np.asarray(self.p_nonmember, dtype=float)
        if self.p_member.shape != self.p_nonmember.shape or self.p_member.ndim != 1:
            raise InputError("distributions must be equal-length vectors")
        for name, p in (("p_member", self.p_member), ("p_nonmember", self.p_nonmember)):
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise InputError(f"{name} is not on the probability simplex")

    @property
    def alphabet_size(self) -> int:
        return len(self.p_member)


def optimal_attacker(game: DiscreteGame) -> np.ndarray:
    """Closed-form best response: p / (p + p') per outcome, 0.5 off-support."""
    total = game.p_member + game.p_nonmember
    return np.where(total > 0.0, game.p_member / np.where(total > 0.0, total, 1.0), 0.5)


def discrete_gain(game: DiscreteGame, attacker: np.ndarray,
                  clamp_eps: float = LOG_CLAMP) -> float:
    """Half-weighted expected log correctness of a per-outcome attacker; <= 0."""
    h = np.asarray(attacker, dtype=float)
    if h.shape != game.p_member.shape:
        raise InputError("attacker length does not match the alphabet")
    if np.any(h < 0) or np.any(h > 1):
        raise InputError("attacker values must lie in [0, 1]")
    return float(
        0.5 * np.sum(game.p_member * np.log(np.maximum(h, clamp_eps)))
        + 0.5 * np.sum(game.p_nonmember * np.log(np.maximum(1.0 - h, clamp_eps)))
    )


def brute_force_attacker(game: DiscreteGame, grid_resolution: int = 10001,
                         clamp_eps: float = LOG_CLAMP) -> tuple[np.ndarray, float]:
    """Exhaustive per-outcome grid search over attacker values on [0, 1].

    The gain is separable across outcomes, so scanning each coordinate
    independently is exact up to the grid spacing. Returns the maximizing
    attacker and its gain.
    """
    if grid_resolution < 10:
        raise InputError("grid_resolution must be at least 10")
    grid = np.linspace(0.0, 1.0, grid_resolution)
    log_h = np.log(np.maximum(grid, clamp_eps))
    log_1mh = np.log(np.maximum(1.0 - grid, clamp_eps))
    best = np.empty(game.alphabet_size)
    for o in range(game.alphabet_size):
        pm, pn = game.p_member[o], game.p_nonmember[o]
        if pm + pn == 0.0:
            best[o] = 0.5
            continue
        contrib = 0.5 * (pm * log_h + pn * log_1mh)
        best[o] = grid[int(np.argmax(contrib))]
    return best, discrete_gain(game, best, clamp_eps)


def total_variation(game: DiscreteGame) -> float:
    return float(0.5 * np.sum(np.abs(game.p_member - game.p_nonmember)))


def equilibrium_check(game: DiscreteGame, tolerance: float) -> tuple[bool, dict]:
    """True iff the two output distributions coincide within the tolerance.

    Diagnostics report the total-variation distance, the best attacker's gain,
    and how far that attacker strays from the random-guess value 0.5.
    """
    if tolerance < 0:
        raise InputError("tolerance must be nonnegative")
    h_star = optimal_attacker(game)
    tv = total_variation(game)
    support = (game.p_member + game.p_nonmember) > 0.0
    max_dev = float(np.max(np.abs(h_star[support] - 0.5))) if support.any() else 0.0
    diagnostics = {
        "tv_distance": tv,
        "optimal_gain": discrete_gain(game, h_star),
        "max_attacker_deviation": max_dev,
    }
    return tv <= tolerance, diagnostics


def harvest_discrete_game(
    classifier: ClassifierModel,
    member_set: LabeledDataset,
    nonmember_set: LabeledDataset,
    quantizer_bins: int = 20,
) -> DiscreteGame:
    """Quantize the top-class probability of each prediction into equal bins
    and return the empirical member/non-member outcome distributions."""
    if quantizer_bins < 2:
        raise InputError("need at least 2 quantizer bins")
    if len(member_set) == 0 or len(nonmember_set) == 0:
        raise InputError("empty set")
    edges = np.linspace(0.0, 1.0, quantizer_bins + 1)
    m_top = np.max(classifier.predict(member_set.features), axis=1)
    n_top = np.max(classifier.predict(nonmember_set.features), axis=1)
    m_counts, _ = np.histogram(np.clip(m_top, 0.0, 1.0), bins=edges)
    n_counts, _ = np.histogram(np.clip(n_top, 0.0, 1.0), bins=edges)
    return DiscreteGame(m_counts / m_counts.sum(), n_counts / n_counts.sum())
