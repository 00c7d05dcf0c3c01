"""Fixed points and linearisation of the reduced map.

For ``m = 0`` the slow variable is a constant ``Y0`` and the fixed points are
the roots of ``h(x) = (a - 1) x - exp(x) + Y0``.  For ``m > 0`` there is a
single fixed point ``A = (s - 1, (1 - a)(s - 1) + exp(s - 1))``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, ValidityError
from .map_core import MapParams, State, guarded_exp, step_reduced

__all__ = [
    "MARGINAL_BAND",
    "Stability",
    "FixedPoint",
    "FixedPointM0Report",
    "LinearData",
    "fixed_points_m0",
    "fixed_point_A",
    "linear_data",
    "classify_multiplier",
]

#: Half-width of the band around ``|multiplier| = 1`` labelled marginal.
MARGINAL_BAND = 1e-9

_ROOT_TOL = 1e-12
_BRACKET = 50.0


class Stability(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


def classify_multiplier(mu: float) -> Stability:
    r = abs(mu)
    if r < 1.0 - MARGINAL_BAND:
        return Stability.STABLE
    if r > 1.0 + MARGINAL_BAND:
        return Stability.UNSTABLE
    return Stability.MARGINAL


@dataclass(frozen=True)
class FixedPoint:
    X: float
    multiplier: float
    stability: Stability


@dataclass(frozen=True)
class FixedPointM0Report:
    count: int
    points: list[FixedPoint] = field(default_factory=list)
    x0: Optional[float] = None
    h_at_x0: Optional[float] = None


@dataclass(frozen=True)
class LinearData:
    jacobian: np.ndarray
    lambda_plus: complex
    lambda_minus: complex
    discriminant: float

    @property
    def trace(self) -> float:
        return float(np.trace(self.jacobian))

    @property
    def det(self) -> float:
        J = self.jacobian
        return float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])

    @property
    def complex_pair(self) -> bool:
        return self.discriminant < 0


def _safe_newton(h: Callable[[float], float], dh: Callable[[float], float],
                 lo: float, hi: float) -> float:
    """Newton iteration kept inside a sign-change bracket, bisecting on exit."""
    f_lo = h(lo)
    if f_lo == 0.0:
        return lo
    if h(hi) == 0.0:
        return hi
    x = 0.5 * (lo + hi)
    for _ in range(200):
        fx = h(x)
        if abs(fx) <= _ROOT_TOL:
            return x
        if (fx < 0) == (f_lo < 0):
            lo, f_lo = x, fx
        else:
            hi = x
        d = dh(x)
        x_new = x - fx / d if d != 0.0 else lo
        if not (min(lo, hi) < x_new < max(lo, hi)):
            x_new = 0.5 * (lo + hi)
        if x_new == x or hi == lo:
            return x
        x = x_new
    return x


def _expand(h, start: float, direction: float) -> float:
    """Walk away from ``start`` until ``h`` turns negative."""
    width = _BRACKET
    x = start + direction * width
    while h(x) >= 0.0:
        width *= 2.0
        x = start + direction * width
        if not math.isfinite(x):
            raise InvalidInputError("could not bracket a root of h")
    return x


def fixed_points_m0(a: float, Y0: float) -> FixedPointM0Report:
    """Fixed points of the reduced fast map with ``y`` frozen at ``Y0``.

    Roots are returned in increasing order.  Stability comes from the
    multiplier ``a - exp(X)``.

    Examples
    --------
    >>> rep = fixed_points_m0(math.e + 1, 1.0)
    >>> rep.count, round(rep.points[0].X, 12), round(rep.points[1].X, 3)
    (2, 0.0, 1.752)
    """
    if not (math.isfinite(a) and math.isfinite(Y0)):
        raise InvalidInputError("a and Y0 must be finite")

    def h(x):
        return (a - 1.0) * x - guarded_exp(x) + Y0

    def dh(x):
        return (a - 1.0) - guarded_exp(x)

    def point(X):
        mu = a - math.exp(X)
        return FixedPoint(X, mu, classify_multiplier(mu))

    if a < 1.0:
        # h is strictly decreasing: +inf at -inf, -inf at +inf.
        lo = -1.0
        while h(lo) <= 0.0:
            lo = 2.0 * lo - 1.0
        hi = 1.0
        while h(hi) >= 0.0:
            hi = 2.0 * hi + 1.0
        return FixedPointM0Report(1, [point(_safe_newton(h, dh, lo, hi))])

    if a == 1.0:
        if Y0 <= 0.0:
            return FixedPointM0Report(0, [])
        return FixedPointM0Report(1, [point(math.log(Y0))])

    x0 = math.log(a - 1.0)
    hx0 = h(x0)
    if abs(hx0) <= _ROOT_TOL:
        return FixedPointM0Report(1, [point(x0)], x0, hx0)
    if hx0 < 0.0:
        return FixedPointM0Report(0, [], x0, hx0)
    X1 = _safe_newton(h, dh, _expand(h, x0, -1.0), x0)
    X2 = _safe_newton(h, dh, x0, _expand(h, x0, +1.0))
    return FixedPointM0Report(2, [point(X1), point(X2)], x0, hx0)


def fixed_point_A(p: MapParams) -> State:
    """The unique fixed point of the reduced map for ``m > 0``.

    Requires ``-a < s - 1 < a + (1 - a) s + exp(s - 1)``.
    """
    if not p.m > 0:
        raise ValidityError(f"fixed point A requires m > 0, got {p.m!r}", "m > 0")
    a, s = p.a, p.s
    lhs = s - 1.0
    e = guarded_exp(s - 1.0)
    if not -a < lhs:
        raise ValidityError(f"-a < s - 1 fails: {-a!r} >= {lhs!r}", "-a < s - 1")
    upper = a + (1.0 - a) * s + e
    if not lhs < upper:
        raise ValidityError(f"s - 1 < a + (1 - a) s + exp(s - 1) fails: "
                            f"{lhs!r} >= {upper!r}", "s - 1 < a + (1 - a) s + exp(s - 1)")
    return State(lhs, (1.0 - a) * lhs + e)


def linear_data(p: MapParams) -> LinearData:
    """Jacobian at ``O`` for the shifted map and its two multipliers."""
    if not p.m > 0:
        raise ValidityError(f"linear data requires m > 0, got {p.m!r}", "m > 0")
    e = guarded_exp(p.s - 1.0)
    A = p.a - e
    J = np.array([[A, 1.0], [-p.m, 1.0]])
    disc = (e - p.a + 1.0) ** 2 - 4.0 * p.m
    root = cmath.sqrt(disc) if disc < 0 else complex(math.sqrt(disc))
    tr = A + 1.0
    return LinearData(J, 0.5 * (tr + root), 0.5 * (tr - root), disc)


def fixed_point_residual(p: MapParams) -> float:
    """Max-norm residual of ``A`` under one reduced-map step."""
    A = fixed_point_A(p)
    B = step_reduced(p, A)
    return max(abs(B.x - A.x), abs(B.y - A.y))
