"""Series-system survival and the first-passage-time CDFs.

One generic survival routine serves three laws that differ only in the
threshold vector: system reliability (critical thresholds), the failure
time CDF, and the detection time CDF (on-condition thresholds). All
components share the same shock count, so conditioning on it makes them
independent and turns the system probability into a product inside the
shock-count sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .failure_model import (
    SystemModel,
    TruncationConfig,
    poisson_weights,
    shock_survival_prob,
    threshold_cdf_block,
)
from .numerics import ToleranceConfig

__all__ = [
    "ThresholdVector",
    "series_survival",
    "series_survival_over_times",
    "failure_time_cdf",
    "detection_time_cdf",
    "reliability_curve",
]


@dataclass(frozen=True)
class ThresholdVector:
    """Per-component degradation thresholds, one value per component."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]


def as_thresholds(model: SystemModel, thresholds) -> tuple[float, ...]:
    """Coerce and validate a threshold vector against a system model."""
    values = thresholds.values if isinstance(thresholds, ThresholdVector) else tuple(
        float(v) for v in thresholds
    )
    if len(values) != model.n:
        raise DomainError(
            f"threshold vector has length {len(values)}, system has {model.n} components"
        )
    for i, (v, c) in enumerate(zip(values, model.components)):
        if not (0.0 <= v <= c.h1):
            raise DomainError(f"thresholds[{i}] = {v} outside [0, h1 = {c.h1}]")
    return values


def series_survival(
    model: SystemModel,
    t: float,
    thresholds: Sequence[float] | ThresholdVector,
    trunc: TruncationConfig | None = None,
    tol: ToleranceConfig | None = None,
) -> float:
    """Probability that, by time t, no component has hard-failed or crossed
    its threshold."""
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    return float(series_survival_over_times(model, np.array([t]), thresholds, trunc, tol)[0])


def series_survival_over_times(
    model: SystemModel,
    times,
    thresholds: Sequence[float] | ThresholdVector,
    trunc: TruncationConfig | None = None,
    tol: ToleranceConfig | None = None,
) -> np.ndarray:
    """series_survival on an array of times, batched for speed.

    The shock-count cutoff is taken at the largest time, which only adds
    terms for the smaller ones; each component contributes one block of
    convolution CDFs over the whole (shock count, time) grid.
    """
    t = np.asarray(times, dtype=float)
    if t.size == 0:
        return np.zeros(0)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0):
        raise DomainError("times must be finite and >= 0")
    values = as_thresholds(model, thresholds)
    mu = model.lam * t
    n_terms = len(poisson_weights(float(mu.max()), trunc))
    weights = np.empty((n_terms, t.size))
    weights[0] = np.exp(-mu)
    for m in range(1, n_terms):
        weights[m] = weights[m - 1] * mu / m
    factors = weights
    for c, v in zip(model.components, values):
        block = threshold_cdf_block(c, v, t, n_terms - 1, tol)
        survive_powers = shock_survival_prob(c) ** np.arange(n_terms)
        factors = factors * survive_powers[:, None] * block
    return np.clip(factors.sum(axis=0), 0.0, 1.0)


def failure_time_cdf(
    model: SystemModel,
    t: float,
    trunc: TruncationConfig | None = None,
    tol: ToleranceConfig | None = None,
) -> float:
    """CDF of the system failure time: first hard failure or crossing of
    any critical threshold."""
    return 1.0 - series_survival(model, t, model.h1_vector, trunc, tol)


def detection_time_cdf(
    model: SystemModel,
    t: float,
    h2: Sequence[float] | ThresholdVector,
    trunc: TruncationConfig | None = None,
    tol: ToleranceConfig | None = None,
) -> float:
    """CDF of the first time an on-condition threshold is reached or a hard
    failure occurs; dominates the failure time CDF pointwise."""
    return 1.0 - series_survival(model, t, h2, trunc, tol)


def reliability_curve(
    model: SystemModel,
    t_grid: Sequence[float],
    thresholds: Sequence[float] | ThresholdVector,
    trunc: TruncationConfig | None = None,
    tol: ToleranceConfig | None = None,
) -> list[tuple[float, float]]:
    """Pointwise survival along a nondecreasing time grid."""
    previous = None
    for t in t_grid:
        if previous is not None and t < previous:
            raise DomainError("t_grid must be nondecreasing")
        previous = t
    return [(float(t), series_survival(model, t, thresholds, trunc, tol)) for t in t_grid]
