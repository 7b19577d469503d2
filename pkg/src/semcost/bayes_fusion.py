"""Beta-Bernoulli posterior per obstacle.

A danger score p in [0, 1] is treated as the mean of N virtual Bernoulli
trials: the update adds pseudo-counts a = N*p and b = N*(1-p) to the
(alpha, beta) state. With positive priors the posterior mean stays strictly
inside (0, 1) no matter how extreme the scores get, which is what makes
chained prompts numerically safe.

The effective repulsive gain is always the posterior mean times the
ORIGINAL base gain, recomputed from scratch; gains are never compounded
onto previously scaled gains, so the accumulating object is (alpha, beta),
not the gain.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import FusionError


class BetaState(NamedTuple):
    alpha: float
    beta: float

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class FusionParams:
    trust_n: float = 5.0
    prior_alpha: float = 1.0
    prior_beta: float = 1.0

    def __post_init__(self):
        if not self.trust_n >= 0:
            raise ValueError("fusion.trust_n must be >= 0")
        if not self.prior_alpha > 0:
            raise ValueError("fusion.prior_alpha must be > 0")
        if not self.prior_beta > 0:
            raise ValueError("fusion.prior_beta must be > 0")


@dataclass(frozen=True)
class DangerReading:
    obstacle_id: str
    score: float
    prompt_id: str = ""

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise FusionError(f"danger score {self.score} for '{self.obstacle_id}' outside [0, 1]")


def reset(params: FusionParams) -> BetaState:
    """Fresh state at the configured prior (uniform by default)."""
    if not (params.prior_alpha > 0 and params.prior_beta > 0):
        raise FusionError("priors must be > 0")
    return BetaState(params.prior_alpha, params.prior_beta)


def update(state: BetaState, score: float, trust_n: float) -> BetaState:
    """Pure pseudo-count update; the input state is left untouched."""
    if not 0.0 <= score <= 1.0:
        raise FusionError(f"danger score {score} outside [0, 1]")
    if not trust_n >= 0:
        raise FusionError(f"trust_n {trust_n} must be >= 0")
    return BetaState(state.alpha + trust_n * score, state.beta + trust_n * (1.0 - score))


def posterior_mean(state: BetaState) -> float:
    return state.alpha / (state.alpha + state.beta)


def effective_gain(state: BetaState, base_gain: float) -> float:
    """Posterior mean times the original base gain."""
    if base_gain < 0:
        raise FusionError(f"base gain {base_gain} must be >= 0")
    return posterior_mean(state) * base_gain
