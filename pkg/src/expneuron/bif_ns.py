"""Neimark-Sacker analysis of the shifted map.

On the surface ``a_ns = exp(s - 1) - m + 1`` the multipliers at the origin are
``exp(+-i theta0)`` with ``cos theta0 = (2 - m) / 2``.  After the real change of
basis built from the critical eigenvectors, the map in ``z = u + i v`` reads

    z -> mu0 z + g20 z**2 / 2 + g11 z zbar + g02 zbar**2 / 2 + g21 z**2 zbar / 2 + ...

The first Lyapunov coefficient ``d(0)`` is obtained from these coefficients and,
independently, from the multilinear forms ``B``, ``C`` with the complex
eigenvectors ``p``, ``q``.  The two agree in sign; they differ by the positive
factor ``m**2 (4 - m)``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .bif_pd import eval_B, eval_C
from .errors import ConsistencyError, ParameterRangeError, ResonanceError
from .map_core import MapParams, State, guarded_exp

__all__ = [
    "NSAnalysis",
    "CurveClass",
    "InvariantCurve",
    "ns_threshold",
    "ns_g_coefficients",
    "ns_lyapunov",
    "ns_analysis",
    "lyapunov_closed_form",
    "lyapunov_bc_closed_form",
    "predict_curve_radius",
    "detect_invariant_curve",
    "locate_ns_transition",
    "fit_sqrt_scaling",
    "detect_period",
]

_RESONANCE_TOL = 1e-9
_SELF_CHECK_RTOL = 1e-8
_MAX_PREDICT_OFFSET = 0.1


@dataclass(frozen=True)
class NSAnalysis:
    s: float
    m: float
    a_ns: float
    theta0: float
    h0: float
    omega0: float
    mu0: complex
    nondegenerate: bool
    g20: Optional[complex] = None
    g11: Optional[complex] = None
    g02: Optional[complex] = None
    g21: Optional[complex] = None
    c1_0: Optional[complex] = None
    d0: Optional[float] = None
    d0_alt: Optional[float] = None


def _check_m(m: float) -> None:
    if not 0.0 < m < 4.0:
        raise ParameterRangeError(f"Neimark-Sacker analysis needs m in (0, 4), got {m!r}")


def _resonant(theta0: float) -> bool:
    return any(abs(cmath.exp(1j * k * theta0) - 1.0) <= _RESONANCE_TOL for k in (1, 2, 3, 4))


def ns_threshold(s: float, m: float) -> NSAnalysis:
    """Critical slope ``a_ns`` and the angle of the critical multipliers.

    ``theta0`` is resolved with ``atan2(omega0, h0)`` so it stays in ``(0, pi)``
    for every ``m`` in ``(0, 4)``.  Strong resonances (``m`` = 2 or 3) set
    ``nondegenerate=False`` rather than raising.
    """
    _check_m(m)
    a_ns = guarded_exp(s - 1.0) - m + 1.0
    h0 = (2.0 - m) / 2.0
    omega0 = math.sqrt(4.0 * m - m * m) / 2.0
    theta0 = math.atan2(omega0, h0)
    return NSAnalysis(s=s, m=m, a_ns=a_ns, theta0=theta0, h0=h0, omega0=omega0,
                      mu0=complex(h0, omega0), nondegenerate=not _resonant(theta0))


def ns_g_coefficients(s: float, m: float) -> tuple[complex, complex, complex, complex]:
    """``(g20, g11, g02, g21)`` of the complex form at ``a = a_ns``."""
    _check_m(m)
    E = guarded_exp(s - 1.0)
    h = (2.0 - m) / 2.0
    w = math.sqrt(4.0 * m - m * m) / 2.0
    i = 1j
    g20 = E / 4.0 * (-i * h + w + i) ** 2 * i / w
    g11 = -i * E / 4.0 * ((h - 1.0) ** 2 + w ** 2) / w
    g02 = i * E / 4.0 * (i * h + w - i) ** 2 / w
    g21 = E / (8.0 * w) * (i * h + w - i) * (h + i * w - 1.0) ** 2
    return g20, g11, g02, g21


def lyapunov_closed_form(s: float, m: float) -> float:
    E = math.exp(s - 1.0)
    return -(E / 16.0) * m * (1.0 + E)


def lyapunov_bc_closed_form(s: float, m: float) -> float:
    E = math.exp(s - 1.0)
    return -(E / (16.0 * m * (4.0 - m))) * (1.0 + E)


def _c1_from_g(mu0: complex, g20, g11, g02, g21) -> complex:
    mub = mu0.conjugate()
    return (g20 * g11 * (1.0 - 2.0 * mu0) / (2.0 * (mu0 ** 2 - mu0))
            + abs(g11) ** 2 / (1.0 - mub)
            + abs(g02) ** 2 / (2.0 * (mu0 ** 2 - mub))
            + g21 / 2.0)


def _d0_multilinear(s: float, m: float, theta0: float) -> float:
    J = np.array([[1.0 - m, 1.0], [-m, 1.0]])
    I = np.eye(2)
    r = math.sqrt(4.0 * m - m * m)
    p = np.array([m + 1j * r, -2.0])
    q = np.array([0.5j / r, -0.25 * (m + 1j * r - 4.0) / (m - 4.0)])
    qb = q.conj()
    rot = cmath.exp(-1j * theta0)

    def ip(u, v):
        return np.vdot(u, v)

    w11 = np.linalg.solve(I - J, eval_B(q, qb, s))
    w20 = np.linalg.solve(cmath.exp(2j * theta0) * I - J, eval_B(q, q, s))
    quad = 2.0 * ip(p, eval_B(q, w11, s)) + ip(p, eval_B(qb, w20, s))
    cub = ip(p, eval_C(q, q, qb, s))
    return 0.5 * (rot * quad).real + 0.5 * (rot * cub).real


def ns_lyapunov(s: float, m: float) -> tuple[float, float, complex]:
    """First Lyapunov coefficient ``(d0, d0_alt, c1_0)``.

    ``d0 = Re(exp(-i theta0) c1_0)`` with ``c1_0`` built from the g-coefficients;
    ``d0_alt`` evaluates the multilinear-form expression.  ``d0`` is checked
    against ``-exp(s-1) m (1 + exp(s-1)) / 16``.

    Raises
    ------
    ResonanceError
        For ``m`` in ``{2, 3}``.
    """
    th = ns_threshold(s, m)
    if not th.nondegenerate:
        raise ResonanceError(f"m={m!r} gives a strong resonance (theta0={th.theta0!r})")
    c1 = _c1_from_g(th.mu0, *ns_g_coefficients(s, m))
    d0 = (cmath.exp(-1j * th.theta0) * c1).real
    closed = lyapunov_closed_form(s, m)
    if abs(d0 - closed) > _SELF_CHECK_RTOL * abs(d0):
        raise ConsistencyError(f"d0={d0!r} disagrees with closed form {closed!r}")
    return d0, _d0_multilinear(s, m, th.theta0), c1


def ns_analysis(s: float, m: float) -> NSAnalysis:
    """Threshold data plus coefficients; Lyapunov fields stay ``None`` at resonance."""
    th = ns_threshold(s, m)
    g20, g11, g02, g21 = ns_g_coefficients(s, m)
    d0 = d0_alt = c1 = None
    if th.nondegenerate:
        d0, d0_alt, c1 = ns_lyapunov(s, m)
    return NSAnalysis(s=s, m=m, a_ns=th.a_ns, theta0=th.theta0, h0=th.h0,
                      omega0=th.omega0, mu0=th.mu0, nondegenerate=th.nondegenerate,
                      g20=g20, g11=g11, g02=g02, g21=g21, c1_0=c1, d0=d0, d0_alt=d0_alt)


def predict_curve_radius(s: float, m: float, a: float) -> float:
    """Leading-order radius ``sqrt(-beta / d0)`` of the bifurcating curve.

    ``beta = sqrt(a + m - exp(s - 1)) - 1``.  The radius is in normal-form
    units; the change of basis rescales distances, so compare against measured
    radii only through the square-root law.
    """
    th = ns_threshold(s, m)
    if a < th.a_ns:
        raise ParameterRangeError(f"a={a!r} is below a_ns={th.a_ns!r}; no stable curve")
    if a - th.a_ns > _MAX_PREDICT_OFFSET:
        raise ParameterRangeError(f"a - a_ns = {a - th.a_ns!r} is too far for the local prediction")
    d0, _, _ = ns_lyapunov(s, m)
    b = math.sqrt(a + m - math.exp(s - 1.0)) - 1.0
    return math.sqrt(max(b, 0.0) / -d0)


# -- numerical detection --------------------------------------------------

class CurveClass(enum.Enum):
    FIXED_POINT = "FixedPointAttractor"
    CLOSED_CURVE = "ClosedCurve"
    ESCAPED = "Escaped"


@dataclass(frozen=True)
class InvariantCurve:
    xs: np.ndarray
    ys: np.ndarray
    mean_radius: float
    rotation_number: float
    classification: CurveClass

    @property
    def points(self) -> list[State]:
        """Sampled points covering one revolution around the origin."""
        if self.xs.size < 2:
            return [State(float(x), float(y)) for x, y in zip(self.xs, self.ys)]
        z = self.xs + 1j * self.ys
        turn = np.cumsum(np.abs(np.angle(z[1:] * z[:-1].conj())))
        n = int(np.searchsorted(turn, 2.0 * math.pi)) + 1
        n = min(n + 1, z.size)
        return [State(float(v.real), float(v.imag)) for v in z[:n]]


def _rotation_number(xs: np.ndarray, ys: np.ndarray) -> float:
    z = xs + 1j * ys
    if z.size < 2:
        return 0.0
    dphi = np.angle(z[1:] * z[:-1].conj())
    return float(abs(dphi.mean()) / (2.0 * math.pi))


def detect_invariant_curve(p: MapParams, n_transient: int = 100_000, n_sample: int = 10_000,
                           initial: State = State(0.01, 0.0), fp_tol: float = 1e-8,
                           escape_bound: float = 1e3) -> InvariantCurve:
    """Iterate the shifted map and classify the attractor near ``O``.

    After ``n_transient`` discarded steps, ``n_sample`` states are kept.  The
    result is ``Escaped`` if the orbit leaves the map's domain, overflows or
    exceeds ``escape_bound``; ``FixedPointAttractor`` if it ends within
    ``fp_tol`` of the origin (or its mean radius is below ``10 * fp_tol``);
    otherwise ``ClosedCurve``.  The rotation number is the mean angular
    advance per step over ``2 pi``, counted in the map's own sense of rotation.
    """
    if not p.m > 0:
        raise ParameterRangeError("curve detection requires m > 0")
    empty = _kernels.EMPTY
    status, _, x, y = _kernels.shifted_steps(p.a, p.s, p.m, initial.x, initial.y,
                                             n_transient, empty, empty, False, escape_bound)
    xs = np.empty(n_sample)
    ys = np.empty(n_sample)
    done = 0
    if status == _kernels.OK:
        status, done, x, y = _kernels.shifted_steps(p.a, p.s, p.m, x, y, n_sample,
                                                    xs, ys, True, escape_bound)
    if status != _kernels.OK:
        return InvariantCurve(xs[:done], ys[:done], math.nan, math.nan, CurveClass.ESCAPED)
    r = np.hypot(xs, ys)
    mean_r = float(r.mean())
    rot = _rotation_number(xs, ys)
    if r[-1] < fp_tol or mean_r <= 10.0 * fp_tol:
        cls = CurveClass.FIXED_POINT
    else:
        cls = CurveClass.CLOSED_CURVE
    return InvariantCurve(xs, ys, mean_r, rot, cls)


def locate_ns_transition(s: float, m: float, lo: float, hi: float, tol: float = 1e-5,
                         n_transient: int = 1_000_000, n_sample: int = 1_000) -> float:
    """Bisect on ``a`` for the FixedPointAttractor -> ClosedCurve flip.

    ``lo`` must classify as a fixed-point attractor and ``hi`` as a closed
    curve.  The transient is long because decay near ``a_ns`` is slow.
    """
    def is_curve(a):
        c = detect_invariant_curve(MapParams(a, s, m), n_transient, n_sample)
        if c.classification is CurveClass.ESCAPED:
            raise ParameterRangeError(f"orbit escaped at a={a!r}; shrink the bracket")
        return c.classification is CurveClass.CLOSED_CURVE

    if is_curve(lo) or not is_curve(hi):
        raise ParameterRangeError("bracket [lo, hi] does not straddle the transition")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_curve(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def fit_sqrt_scaling(offsets, radii) -> tuple[float, float]:
    """Least-squares fit ``radius = C sqrt(offset)``; returns ``(C, R**2)``."""
    u = np.sqrt(np.asarray(offsets, dtype=float))
    r = np.asarray(radii, dtype=float)
    C = float(u @ r / (u @ u))
    ss_res = float(((r - C * u) ** 2).sum())
    ss_tot = float(((r - r.mean()) ** 2).sum())
    return C, 1.0 - ss_res / ss_tot


def detect_period(curve: InvariantCurve, max_period: int = 64, rtol: float = 1e-9) -> Optional[int]:
    """Smallest ``q <= max_period`` with ``z[k + q] == z[k]`` along the sample, if any."""
    z = curve.xs + 1j * curve.ys
    if z.size <= max_period:
        return None
    scale = max(float(np.abs(z).max()), 1e-300)
    for q in range(1, max_period + 1):
        if np.max(np.abs(z[q:] - z[:-q])) <= rtol * scale:
            return q
    return None
