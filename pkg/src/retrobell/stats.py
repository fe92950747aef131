"""Estimators and goodness-of-fit helpers over trial records."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .ensemble import ExperimentConfig, TrialRecord, run_experiment
from .packets import ROCKET
from .spin import Direction


class NoOutcomesError(ValueError):
    """No usable trial outcomes to estimate from."""


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    stderr: float
    count: int


def correlation_estimate(records: Sequence[TrialRecord]) -> CorrelationEstimate:
    """Mean outcome product over trials where both wings resolved."""
    products = [r.o_r * r.o_e for r in records if not r.fail_r and not r.fail_e]
    n = len(products)
    if n == 0:
        raise NoOutcomesError("every trial failed on at least one wing")
    value = sum(products) / n
    stderr = math.sqrt(max(0.0, 1.0 - value * value) / n)
    return CorrelationEstimate(value, stderr, n)


@dataclass(frozen=True)
class ChshResult:
    """Four correlation estimates and their CHSH composite."""

    estimates: tuple[CorrelationEstimate, ...]
    labels: tuple[str, ...]
    s_value: float


def chsh_details(
    cfg: ExperimentConfig,
    a: Direction,
    a_prime: Direction,
    b: Direction,
    b_prime: Direction,
    *,
    dt: float = 1e-3,
    workers: int = 1,
) -> ChshResult:
    """S = E(a,b) - E(a,b') + E(a',b) + E(a',b') over four independent runs.

    Each setting pair gets its own seeded ensemble; no trials are shared.
    """
    settings = [
        ("E(a,b)", a, b, 1.0),
        ("E(a,b')", a, b_prime, -1.0),
        ("E(a',b)", a_prime, b, 1.0),
        ("E(a',b')", a_prime, b_prime, 1.0),
    ]
    estimates = []
    s_value = 0.0
    for k, (label, first, second, sign) in enumerate(settings):
        seed_k = int(
            np.random.SeedSequence([cfg.seed, 7000 + k]).generate_state(
                1, dtype=np.uint64
            )[0]
        )
        sub = replace(cfg, r=first, e=second, seed=seed_k)
        est = correlation_estimate(
            run_experiment(sub, dt=dt, workers=workers).records
        )
        estimates.append(est)
        s_value += sign * est.value
    return ChshResult(tuple(estimates), tuple(s[0] for s in settings), s_value)


def chsh(
    cfg: ExperimentConfig,
    a: Direction,
    a_prime: Direction,
    b: Direction,
    b_prime: Direction,
    **kwargs,
) -> float:
    return chsh_details(cfg, a, a_prime, b, b_prime, **kwargs).s_value


@dataclass(frozen=True, eq=False)
class PlateHistogram:
    """Histogram of one wing's plate positions with spot statistics."""

    wing: str
    bin_edges: np.ndarray
    counts: np.ndarray
    spot_centers: dict[int, float]
    separation: float

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def plate_histogram(
    records: Sequence[TrialRecord], wing: str, bins: int = 80
) -> PlateHistogram:
    """Bin a wing's recorded positions and locate the two outcome spots."""
    if wing == ROCKET:
        data = [(r.x_rf, r.o_r) for r in records if not r.fail_r]
    else:
        data = [(r.x_ef, r.o_e) for r in records if not r.fail_e]
    if not data:
        raise NoOutcomesError(f"no resolved trials on the {wing} wing")
    xs = np.array([d[0] for d in data])
    outs = np.array([d[1] for d in data])
    counts, edges = np.histogram(xs, bins=bins)
    spot_centers = {
        o: float(xs[outs == o].mean()) for o in (1, -1) if np.any(outs == o)
    }
    if len(spot_centers) == 2:
        separation = abs(spot_centers[1] - spot_centers[-1])
    else:
        separation = 0.0
    return PlateHistogram(wing, edges, counts, spot_centers, separation)


def spot_widths(records: Sequence[TrialRecord], wing: str) -> dict[int, float]:
    """Per-outcome sample standard deviation on a wing's plate."""
    if wing == ROCKET:
        data = [(r.x_rf, r.o_r) for r in records if not r.fail_r]
    else:
        data = [(r.x_ef, r.o_e) for r in records if not r.fail_e]
    if not data:
        raise NoOutcomesError(f"no resolved trials on the {wing} wing")
    xs = np.array([d[0] for d in data])
    outs = np.array([d[1] for d in data])
    return {
        o: float(xs[outs == o].std(ddof=1)) for o in (1, -1) if np.sum(outs == o) > 1
    }


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sup-norm distance between the empirical CDF and a reference CDF."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = len(xs)
    if n < 10:
        raise ValueError("at least 10 samples are required")
    f = np.asarray(cdf(xs), dtype=float)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))
