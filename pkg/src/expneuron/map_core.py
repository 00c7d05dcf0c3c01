"""Piecewise map with an exponential branch.

The fast variable is updated by ``f_a(x, y)``, defined on four planar domains::

    D1: x < -a                       -> -a**2 - exp(-a) + y
    D2: x >= -a,  x < y + 1          -> a*x - exp(x) + y
    D3: x >= -a,  y + 1 <= x < y + 2 -> a*(y + 1) - exp(y + 1) + y
    D4: x >= -a,  x >= y + 2         -> -1

and the slow variable by ``y - m*(x + 1 - s)``.  Three variants are exposed:
the full map, the reduced map (the D2 branch only) and the reduced map shifted
so that its fixed point sits at the origin.

All arithmetic is IEEE double precision.  Exponent arguments above
:data:`EXP_GUARD` raise :class:`~expneuron.errors.OverflowGuardError` instead of
silently producing ``inf``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainViolationError, InvalidInputError, OverflowGuardError

__all__ = [
    "EXP_GUARD",
    "SLOW_FAST_THRESHOLD",
    "DomainLabel",
    "MapParams",
    "State",
    "classify_domain",
    "eval_fa",
    "guarded_exp",
    "shift",
    "unshift",
    "step_full",
    "step_reduced",
    "step_shifted",
    "in_shifted_domain",
]

#: Largest exponent argument accepted (``exp`` overflows near 709.78).
EXP_GUARD = 700.0

#: Default upper bound on ``m`` for the slow-fast regime.
SLOW_FAST_THRESHOLD = 0.1


def guarded_exp(arg: float) -> float:
    if arg > EXP_GUARD:
        raise OverflowGuardError(arg)
    return math.exp(arg)


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise InvalidInputError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class MapParams:
    """Parameter triple ``(a, s, m)``.

    ``a`` is the slope of the exponential branch, ``s`` the target voltage and
    ``m >= 0`` the slow time-scale.  ``m = 0`` is accepted; it freezes ``y``.
    """

    a: float
    s: float
    m: float
    slow_fast_threshold: float = SLOW_FAST_THRESHOLD

    def __post_init__(self):
        _check_finite(a=self.a, s=self.s, m=self.m)
        if self.m < 0:
            raise InvalidInputError(f"m must be >= 0, got {self.m!r}")

    def is_slow_fast(self) -> bool:
        return 0.0 < self.m < self.slow_fast_threshold

    def replace(self, **changes) -> "MapParams":
        fields = {"a": self.a, "s": self.s, "m": self.m,
                  "slow_fast_threshold": self.slow_fast_threshold}
        fields.update(changes)
        return MapParams(**fields)


@dataclass(frozen=True)
class State:
    x: float
    y: float

    def __post_init__(self):
        _check_finite(x=self.x, y=self.y)

    def __iter__(self):
        yield self.x
        yield self.y


class DomainLabel(enum.Enum):
    D1 = 1
    D2 = 2
    D3 = 3
    D4 = 4


def classify_domain(p: MapParams, st: State) -> DomainLabel:
    x, y = st.x, st.y
    if x < -p.a:
        return DomainLabel.D1
    if x < y + 1.0:
        return DomainLabel.D2
    if x < y + 2.0:
        return DomainLabel.D3
    return DomainLabel.D4


def eval_fa(p: MapParams, st: State) -> float:
    a, x, y = p.a, st.x, st.y
    label = classify_domain(p, st)
    if label is DomainLabel.D1:
        return -a * a - guarded_exp(-a) + y
    if label is DomainLabel.D2:
        return a * x - guarded_exp(x) + y
    if label is DomainLabel.D3:
        return a * (y + 1.0) - guarded_exp(y + 1.0) + y
    return -1.0


def step_full(p: MapParams, st: State) -> State:
    x_new = eval_fa(p, st)
    return State(x_new, st.y - p.m * (st.x + 1.0 - p.s))


def step_reduced(p: MapParams, st: State) -> State:
    """One step of the D2 branch; raises outside ``-a <= x < y + 1``."""
    x, y = st.x, st.y
    if not (-p.a <= x < y + 1.0):
        raise DomainViolationError(
            f"state ({x!r}, {y!r}) is outside -a <= x < y + 1 for a={p.a!r}")
    return State(p.a * x - guarded_exp(x) + y, y - p.m * (x + 1.0 - p.s))


def _offsets(p: MapParams) -> tuple[float, float]:
    e = guarded_exp(p.s - 1.0)
    return p.s - 1.0, (1.0 - p.a) * (p.s - 1.0) + e


def shift(p: MapParams, st: State) -> State:
    """Shifted coordinates -> reduced-map coordinates (adds the fixed point)."""
    dx, dy = _offsets(p)
    return State(st.x + dx, st.y + dy)


def unshift(p: MapParams, st: State) -> State:
    dx, dy = _offsets(p)
    return State(st.x - dx, st.y - dy)


def in_shifted_domain(p: MapParams, st: State) -> bool:
    a, s = p.a, p.s
    lhs = s - 1.0 + st.x
    return -a <= lhs < a + (1.0 - a) * s + guarded_exp(s - 1.0) + st.y


def step_shifted(p: MapParams, st: State) -> State:
    """Reduced map in coordinates centred on its fixed point ``O(0, 0)``."""
    if not in_shifted_domain(p, st):
        raise DomainViolationError(
            f"shifted state ({st.x!r}, {st.y!r}) is outside the domain of the "
            f"reduced map for a={p.a!r}, s={p.s!r}")
    a, s, x, y = p.a, p.s, st.x, st.y
    x_new = y + a * x + guarded_exp(s - 1.0) - guarded_exp(x + s - 1.0)
    return State(x_new, y - p.m * x)
