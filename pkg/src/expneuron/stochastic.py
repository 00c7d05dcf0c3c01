"""Gaussian perturbations of the full map.

The slow equation becomes ``y' = y - m (x + 1 - s) + sigma * xi`` with
``xi ~ N(0, 1)``.  Deviates come from numpy's PCG64 bit generator through
``Generator.standard_normal`` (ziggurat); see :data:`GENERATOR_VERSION`, which
is written into every run manifest.  Exactly one deviate per step is consumed
for a single target (two for ``BOTH``) whether or not it is used, so seeds stay
comparable across targets and sigma values.

Independent cells of an experiment get their generators from
``SeedSequence(master_seed, spawn_key=(sigma_index, seed_index))``.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .errors import InvalidInputError
from .map_core import MapParams
from .sim_engine import (DEFAULT_OSC_TOLERANCE, DEFAULT_SPIKE_THRESHOLD, RegimeLabel,
                         SimConfig, Trajectory, _integrate, _resolve_jobs,
                         classify_regime, detect_spikes)

__all__ = [
    "GENERATOR_ALGORITHM",
    "GENERATOR_VERSION",
    "GaussianStream",
    "gaussian_stream",
    "cell_seed",
    "NoiseTarget",
    "NoiseConfig",
    "NoiseResponse",
    "simulate_noisy",
    "noise_response",
]

GENERATOR_ALGORITHM = "PCG64+standard_normal(ziggurat)"
GENERATOR_VERSION = f"{GENERATOR_ALGORITHM}/numpy-{np.__version__}"

Seed = Union[int, np.random.SeedSequence]


class GaussianStream:
    """Reproducible standard-normal deviates with a draw counter."""

    def __init__(self, seed: Seed):
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self.draws = 0

    def draw(self, n: int) -> np.ndarray:
        out = self._gen.standard_normal(n)
        self.draws += n
        return out

    def __iter__(self):
        while True:
            yield float(self.draw(1)[0])


def gaussian_stream(seed: Seed) -> GaussianStream:
    return GaussianStream(seed)


def cell_seed(master: int, sigma_index: int, seed_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(sigma_index, seed_index))


class NoiseTarget(enum.Enum):
    SLOW_ONLY = "SlowOnly"
    FAST_ONLY = "FastOnly"
    BOTH = "Both"


@dataclass(frozen=True)
class NoiseConfig:
    sigma: float
    seed: Seed = 0
    target: NoiseTarget = NoiseTarget.SLOW_ONLY

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise InvalidInputError(f"sigma must be finite and >= 0, got {self.sigma!r}")


class _NoiseSource:
    def __init__(self, nz: NoiseConfig):
        self.stream = GaussianStream(nz.seed)
        self.sigma = float(nz.sigma)
        self.target = nz.target

    @property
    def draws(self) -> int:
        return self.stream.draws

    def chunk(self, n: int):
        empty = _kernels.EMPTY
        if self.target is NoiseTarget.SLOW_ONLY:
            return empty, self.stream.draw(n), 0.0, self.sigma
        if self.target is NoiseTarget.FAST_ONLY:
            return self.stream.draw(n), empty, self.sigma, 0.0
        d = self.stream.draw(2 * n).reshape(n, 2)
        return (np.ascontiguousarray(d[:, 0]), np.ascontiguousarray(d[:, 1]),
                self.sigma, self.sigma)


def simulate_noisy(p: MapParams, nz: NoiseConfig, cfg: SimConfig = SimConfig()) -> Trajectory:
    """Full map with additive Gaussian noise on the chosen equation(s).

    With ``sigma = 0`` the result is bitwise equal to
    :func:`~expneuron.sim_engine.simulate`; deviates are still drawn and
    counted in ``Trajectory.noise_draws``.
    """
    return _integrate(p, cfg, _NoiseSource(nz))


@dataclass(frozen=True)
class NoiseResponse:
    """Per-sigma aggregates over ``n_seeds`` independent seeds.

    ``spike_rate`` is the mean number of spikes per 1000 recorded steps,
    ``regime`` the modal label (ties go to the label listed first in
    :class:`RegimeLabel`), ``burst_fraction`` the share of seeds showing at
    least one spike made of two or more threshold crossings.
    """

    sigmas: np.ndarray
    spike_rate: np.ndarray
    regime: list[RegimeLabel]
    n_seeds: int
    spike_counts: np.ndarray
    seed_regimes: list[list[RegimeLabel]]
    burst_fraction: np.ndarray
    master_seed: int
    target: NoiseTarget


def _modal(labels: Sequence[RegimeLabel]) -> RegimeLabel:
    counts = Counter(labels)
    best = max(counts.values())
    return next(r for r in RegimeLabel if counts.get(r, 0) == best)


def noise_response(p: MapParams, sigmas: Sequence[float], n_seeds: int,
                   cfg: SimConfig = SimConfig(), master_seed: int = 0,
                   target: NoiseTarget = NoiseTarget.SLOW_ONLY,
                   spike_threshold: float = DEFAULT_SPIKE_THRESHOLD,
                   osc_tolerance: float = DEFAULT_OSC_TOLERANCE,
                   jobs: Optional[int] = 1) -> NoiseResponse:
    """Spike statistics versus noise level.

    Every ``(sigma, seed)`` cell is simulated independently with the generator
    from :func:`cell_seed`; the result does not depend on ``jobs``.
    """
    sig = np.asarray(sigmas, dtype=float)
    if sig.ndim != 1 or sig.size == 0 or np.any(sig < 0) or np.any(np.diff(sig) < 0):
        raise InvalidInputError("sigmas must be a non-empty, nonnegative, ascending sequence")
    if n_seeds < 1:
        raise InvalidInputError("n_seeds must be >= 1")

    tasks = [(i, j) for i in range(sig.size) for j in range(n_seeds)]

    def cell(task):
        i, j = task
        nz = NoiseConfig(float(sig[i]), cell_seed(master_seed, i, j), target)
        t = simulate_noisy(p, nz, cfg)
        train = detect_spikes(t, spike_threshold)
        label = classify_regime(t, spike_threshold, osc_tolerance)
        burst = bool(np.any(train.crossings >= 2))
        return len(train), len(t), label, burst

    workers = _resolve_jobs(jobs)
    if workers == 1:
        out = [cell(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(cell, tasks))

    counts = np.zeros((sig.size, n_seeds), dtype=np.int64)
    lengths = np.zeros((sig.size, n_seeds), dtype=np.int64)
    bursts = np.zeros((sig.size, n_seeds), dtype=bool)
    labels: list[list[RegimeLabel]] = [[None] * n_seeds for _ in range(sig.size)]
    for (i, j), (c, n, label, b) in zip(tasks, out):
        counts[i, j], lengths[i, j], bursts[i, j] = c, n, b
        labels[i][j] = label
    with np.errstate(invalid="ignore", divide="ignore"):
        rates = np.where(lengths > 0, 1000.0 * counts / np.maximum(lengths, 1), 0.0)
    return NoiseResponse(
        sigmas=sig,
        spike_rate=rates.mean(axis=1),
        regime=[_modal(row) for row in labels],
        n_seeds=n_seeds,
        spike_counts=counts,
        seed_regimes=labels,
        burst_fraction=bursts.mean(axis=1),
        master_seed=master_seed,
        target=target,
    )
