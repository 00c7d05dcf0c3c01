"""Trajectories of the full map, bifurcation sweeps and regime labels.

Iteration runs in compiled chunks (see :mod:`expneuron._kernels`).  Sweeps
farm cells out to a thread pool; each cell is an independent pure function of
its parameters, so the merged result does not depend on the number of workers.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import BudgetExceededError, InvalidInputError
from .map_core import MapParams, State

__all__ = [
    "DEFAULT_BUDGET",
    "DEFAULT_SPIKE_THRESHOLD",
    "DEFAULT_REFRACTORY",
    "DEFAULT_OSC_TOLERANCE",
    "SimConfig",
    "Trajectory",
    "RegimeLabel",
    "SpikeTrain",
    "SweepResult",
    "default_initial",
    "simulate",
    "detect_spikes",
    "classify_regime",
    "sweep",
    "subthreshold_band",
    "calibrate_spike_threshold",
    "stage_order",
]

DEFAULT_BUDGET = 10 ** 8

#: Upward-crossing level separating spikes from subthreshold activity.  It is
#: the rounded output of :func:`calibrate_spike_threshold`: midway between the
#: subthreshold ceiling at (2.1, 0.02, 1.1) and the spike peak at (2.1, 0.02, 1.09).
DEFAULT_SPIKE_THRESHOLD = 1.25

#: Crossings within this many steps of the previous one belong to the same
#: spike.  A spike of the full map is a short run of fast oscillations (gaps
#: up to ~15 steps) followed by a slow recovery of 100+ steps.
DEFAULT_REFRACTORY = 20

#: Peak-to-peak range of x below which a trajectory counts as silent.
DEFAULT_OSC_TOLERANCE = 1e-3

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    initial: Optional[State] = None
    n_transient: int = 10_000
    n_record: int = 10_000
    record_y: bool = False
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.n_transient < 0 or self.n_record < 1:
            raise InvalidInputError("need n_transient >= 0 and n_record >= 1")

    @property
    def total_steps(self) -> int:
        return self.n_transient + self.n_record


@dataclass(frozen=True)
class Trajectory:
    """Recorded states after the transient.

    ``xs[k]`` is the state after step ``n_transient + k + 1``.  Escaped runs are
    truncated at the last finite state and flagged.
    """

    xs: np.ndarray
    ys: Optional[np.ndarray]
    params: MapParams
    escaped: bool = False
    noise_draws: int = 0

    def __len__(self):
        return int(self.xs.size)


class RegimeLabel(enum.Enum):
    SILENCE = "Silence"
    SUBTHRESHOLD = "Subthreshold"
    BURSTING = "Bursting"
    TONIC_SPIKING = "TonicSpiking"
    ESCAPED = "Escaped"


@dataclass(frozen=True)
class SpikeTrain:
    spike_indices: np.ndarray
    threshold_used: float
    refractory_used: int
    crossings: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __len__(self):
        return int(self.spike_indices.size)

    @property
    def isi(self) -> np.ndarray:
        return np.diff(self.spike_indices)


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: np.ndarray
    x_min: np.ndarray
    x_max: np.ndarray
    regimes: list[RegimeLabel]
    escaped: np.ndarray


def default_initial(p: MapParams) -> State:
    """Fixed point ``A`` of the reduced map nudged by ``(0.01, 0)``."""
    return State(p.s - 1.0 + 0.01, (1.0 - p.a) * (p.s - 1.0) + math.exp(p.s - 1.0))


def _integrate(p: MapParams, cfg: SimConfig, noise=None) -> Trajectory:
    """Shared driver for the deterministic and noisy engines.

    ``noise``, when given, has ``chunk(n) -> (xi_x, xi_y, sig_x, sig_y)`` and a
    ``draws`` counter.
    """
    if cfg.total_steps > cfg.budget:
        raise BudgetExceededError(f"{cfg.total_steps} steps exceed the budget of {cfg.budget}")
    st = cfg.initial if cfg.initial is not None else default_initial(p)
    x, y = st.x, st.y
    a, s, m = p.a, p.s, p.m
    empty = _kernels.EMPTY
    xs = np.empty(cfg.n_record)
    ys = np.empty(cfg.n_record) if cfg.record_y else None

    def run(n, out_x, out_y, record):
        if noise is None:
            return _kernels.full_steps(a, s, m, x, y, n, empty, empty, 0.0, 0.0,
                                       out_x, out_y, record)
        xi_x, xi_y, sig_x, sig_y = noise.chunk(n)
        return _kernels.full_steps(a, s, m, x, y, n, xi_x, xi_y, sig_x, sig_y,
                                   out_x, out_y, record)

    left = cfg.n_transient
    while left > 0:
        n = min(left, _CHUNK)
        status, _, x, y = run(n, empty, empty, False)
        if status != _kernels.OK:
            return _done(p, xs[:0], None if ys is None else ys[:0], True, noise)
        left -= n

    pos = 0
    while pos < cfg.n_record:
        n = min(cfg.n_record - pos, _CHUNK)
        out_y = ys[pos:pos + n] if ys is not None else empty
        status, k, x, y = run(n, xs[pos:pos + n], out_y, True)
        if status != _kernels.OK:
            end = pos + k
            return _done(p, xs[:end], None if ys is None else ys[:end], True, noise)
        pos += n
    return _done(p, xs, ys, False, noise)


def _done(p, xs, ys, escaped, noise):
    return Trajectory(xs, ys, p, escaped, 0 if noise is None else noise.draws)


def simulate(p: MapParams, cfg: SimConfig = SimConfig()) -> Trajectory:
    """Iterate the full map; deterministic and bit-reproducible."""
    return _integrate(p, cfg)


def detect_spikes(t, threshold: float = DEFAULT_SPIKE_THRESHOLD,
                  refractory: int = DEFAULT_REFRACTORY) -> SpikeTrain:
    """Upward threshold crossings, merged into spikes.

    A crossing at ``i`` means ``xs[i-1] < threshold <= xs[i]``.  A crossing
    within ``refractory`` steps of the previous crossing extends the current
    spike instead of starting a new one, so ``spike_indices`` holds the first
    crossing of each spike and ``crossings`` how many crossings it merged.
    """
    if not math.isfinite(threshold):
        raise InvalidInputError("threshold must be finite")
    xs = np.asarray(t.xs if isinstance(t, Trajectory) else t, dtype=float)
    up = np.flatnonzero((xs[:-1] < threshold) & (xs[1:] >= threshold)) + 1
    if up.size == 0:
        return SpikeTrain(up.astype(np.int64), threshold, refractory, np.empty(0, dtype=np.int64))
    new = np.empty(up.size, dtype=bool)
    new[0] = True
    new[1:] = np.diff(up) > refractory
    starts = np.flatnonzero(new)
    counts = np.diff(np.append(starts, up.size))
    return SpikeTrain(up[starts].astype(np.int64), threshold, refractory, counts.astype(np.int64))


def classify_regime(t: Trajectory, spike_threshold: float = DEFAULT_SPIKE_THRESHOLD,
                    osc_tolerance: float = DEFAULT_OSC_TOLERANCE,
                    refractory: int = DEFAULT_REFRACTORY) -> RegimeLabel:
    """Label a trajectory.

    Escaped if flagged; Silence if the x range is below ``osc_tolerance``;
    Subthreshold if there are no spikes; TonicSpiking if the interspike
    intervals have CV < 0.5 and no quiescent stretch (including the leading and
    trailing ones) reaches 5x the median interval; Bursting otherwise.
    """
    if not (math.isfinite(spike_threshold) and osc_tolerance > 0):
        raise InvalidInputError("need a finite threshold and osc_tolerance > 0")
    if t.escaped or len(t) == 0:
        return RegimeLabel.ESCAPED
    xs = t.xs
    if xs.max() - xs.min() < osc_tolerance:
        return RegimeLabel.SILENCE
    train = detect_spikes(t, spike_threshold, refractory)
    if len(train) == 0:
        return RegimeLabel.SUBTHRESHOLD
    if len(train) < 2:
        return RegimeLabel.BURSTING
    isi = train.isi
    med = float(np.median(isi))
    cv = float(isi.std() / isi.mean())
    lead = int(train.spike_indices[0])
    trail = len(t) - int(train.spike_indices[-1])
    quiet = max(int(isi.max()), lead, trail)
    if cv < 0.5 and quiet < 5.0 * med:
        return RegimeLabel.TONIC_SPIKING
    return RegimeLabel.BURSTING


def _resolve_jobs(jobs: Optional[int]) -> int:
    if jobs is None:
        jobs = os.cpu_count() or 1
    return max(1, int(jobs))


def sweep(p_base: MapParams, axis: str, lo: float, hi: float, n: int,
          cfg: SimConfig = SimConfig(), jobs: Optional[int] = 1,
          spike_threshold: float = DEFAULT_SPIKE_THRESHOLD,
          osc_tolerance: float = DEFAULT_OSC_TOLERANCE) -> SweepResult:
    """Min/max of recorded x and regime label over ``n`` evenly spaced values.

    ``jobs=None`` uses every available core.  Escaped cells are flagged, never
    fatal, and get NaN extrema if nothing was recorded.
    """
    if axis not in ("a", "s", "m"):
        raise InvalidInputError(f"axis must be one of a, s, m; got {axis!r}")
    if not lo < hi or n < 2:
        raise InvalidInputError("need lo < hi and n >= 2")
    values = np.linspace(lo, hi, n)
    params = [p_base.replace(**{axis: float(v)}) for v in values]

    def cell(p):
        t = simulate(p, cfg)
        label = classify_regime(t, spike_threshold, osc_tolerance)
        if len(t) == 0:
            return math.nan, math.nan, label, t.escaped
        return float(t.xs.min()), float(t.xs.max()), label, t.escaped

    workers = _resolve_jobs(jobs)
    if workers == 1:
        cells = [cell(p) for p in params]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(cell, params))
    return SweepResult(
        axis=axis,
        values=values,
        x_min=np.array([c[0] for c in cells]),
        x_max=np.array([c[1] for c in cells]),
        regimes=[c[2] for c in cells],
        escaped=np.array([c[3] for c in cells], dtype=bool),
    )


def subthreshold_band(result: SweepResult) -> Optional[tuple[float, float]]:
    """Smallest and largest axis value labelled Subthreshold, if any."""
    v = [x for x, r in zip(result.values, result.regimes) if r is RegimeLabel.SUBTHRESHOLD]
    if not v:
        return None
    return float(min(v)), float(max(v))


def calibrate_spike_threshold(a: float = 2.1, m: float = 0.02, s_sub: float = 1.1,
                              s_spike: float = 1.09, cfg: SimConfig = SimConfig()) -> float:
    """Midpoint between the subthreshold ceiling and the spike peak."""
    ceiling = simulate(MapParams(a, s_sub, m), cfg).xs.max()
    peak = simulate(MapParams(a, s_spike, m), cfg).xs.max()
    return float(0.5 * (ceiling + peak))


def stage_order(labels: Sequence[RegimeLabel]) -> list[int]:
    """Map labels to stages 0 Silence, 1 Subthreshold, 2 spiking; -1 Escaped."""
    stage = {RegimeLabel.SILENCE: 0, RegimeLabel.SUBTHRESHOLD: 1,
             RegimeLabel.BURSTING: 2, RegimeLabel.TONIC_SPIKING: 2,
             RegimeLabel.ESCAPED: -1}
    return [stage[r] for r in labels]
