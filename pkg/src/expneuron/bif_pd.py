"""Period-doubling (flip) analysis of the shifted map.

With ``E = exp(s - 1)`` a multiplier crosses ``-1`` at
``m0 = 2 (E - a - 1)`` whenever that is positive.  On the parameter-dependent
center manifold ``y = W(m, x)`` the dynamics reduce to

    x -> sigma1(m) x + sigma2(m) x**2 + sigma3 x**3

whose flip coefficient ``c(0) = sigma2**2 + sigma3`` is computed here and
cross-checked against the eigenvector formula built from the multilinear forms
``B`` and ``C`` of the Taylor expansion at the origin.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .equilibria import linear_data
from .errors import (DegenerateThresholdError, DomainViolationError,
                     NoCycleFoundError, OverflowGuardError, ParameterRangeError,
                     ValidityError)
from .map_core import MapParams, State, guarded_exp, step_shifted

__all__ = [
    "CenterManifoldCoeffs",
    "ReducedPDMap",
    "PDAnalysis",
    "CycleStability",
    "Period2Cycle",
    "pd_threshold",
    "center_manifold",
    "reduced_map",
    "beta",
    "pd_coefficient",
    "eval_B",
    "eval_C",
    "find_period2",
]

_DEGENERATE_TOL = 1e-9
_MAX_OFFSET = 0.5
_FD_STEP = 1e-6
_N_SEEDS = 8
_AT_THRESHOLD = 1e-12


@dataclass(frozen=True)
class CenterManifoldCoeffs:
    """Coefficients of ``W(m, x)``; the pure ``(m - m0)**k`` terms vanish."""

    b1: float
    b2: float
    b3: float
    c1: float
    c2: float
    c3: float
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0

    def W(self, mu: float, x: float) -> float:
        """Evaluate the truncated manifold at ``mu = m - m0``."""
        return (self.a1 * mu + self.a2 * mu ** 2 + self.a3 * mu ** 3
                + self.b1 * x + self.b2 * x ** 2 + self.b3 * x ** 3
                + self.c1 * mu * x + self.c2 * mu * x ** 2 + self.c3 * mu ** 2 * x)


@dataclass(frozen=True)
class ReducedPDMap:
    sigma1: float
    sigma2: float
    sigma3: float

    def __call__(self, x: float) -> float:
        return x * self.sigma1 + x ** 2 * self.sigma2 + x ** 3 * self.sigma3


@dataclass(frozen=True)
class PDAnalysis:
    a: float
    s: float
    m0: float
    lambda3: float
    sign_s: int
    c0_cm: float
    c0_inv: float
    dbeta_dm_at_m0: float
    center_manifold: CenterManifoldCoeffs

    def beta(self, m: float) -> float:
        return beta(self.m0, m)


class CycleStability(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class Period2Cycle:
    """A period-2 orbit ``x1 <-> x2`` of the shifted map.

    ``stability`` refers to the multiplier of the second iterate along the
    center direction (the one continuing from ``(-1)**2 = 1``); it is what the
    reduced one-dimensional map sees.  ``saddle`` is set when the transverse
    multiplier lies outside the unit circle, as happens for ``m0 > 4``.
    ``amplitude`` is half the Euclidean distance between the points.
    ``normal_form_amplitude`` is half their x-separation (the coordinate along
    the center manifold) times ``sqrt(|c(0)|)``, the factor that turns the
    reduced map into ``-(1 + beta) xi + sign * xi**3``; it tends to
    ``sqrt(|beta|)`` at the threshold.
    """

    x1: State
    x2: State
    amplitude: float
    normal_form_amplitude: Optional[float]
    stability: CycleStability
    multipliers: tuple[complex, complex]
    saddle: bool
    residual: float


def _E(s: float) -> float:
    return guarded_exp(s - 1.0)


def pd_threshold(a: float, s: float) -> Optional[float]:
    """Flip threshold ``m0 = 2 (exp(s - 1) - a - 1)``, or ``None`` if not positive."""
    m0 = 2.0 * (_E(s) - a - 1.0)
    return m0 if m0 > 0.0 else None


def _require_m0(a: float, s: float) -> float:
    m0 = pd_threshold(a, s)
    if m0 is None:
        raise DegenerateThresholdError(
            f"no period-doubling threshold: exp(s - 1) - a - 1 <= 0 for a={a!r}, s={s!r}")
    if abs(m0 - 4.0) <= _DEGENERATE_TOL:
        raise DegenerateThresholdError("m0 = 4 makes the third multiplier equal -1")
    return m0


def center_manifold(a: float, s: float) -> CenterManifoldCoeffs:
    m0 = _require_m0(a, s)
    E = _E(s)
    d = 4.0 - m0
    return CenterManifoldCoeffs(
        b1=m0 / 2.0,
        b2=E / 2.0,
        b3=-(E / 6.0) * m0 / d,
        c1=2.0 / d,
        c2=4.0 * E / (m0 * d),
        c3=8.0 / d ** 3,
    )


def reduced_map(a: float, s: float, m: float) -> ReducedPDMap:
    m0 = _require_m0(a, s)
    if abs(m - m0) > _MAX_OFFSET:
        raise ParameterRangeError(
            f"|m - m0| = {abs(m - m0)!r} exceeds {_MAX_OFFSET} for the local reduction")
    E = _E(s)
    mu = m - m0
    d = 4.0 - m0
    sigma1 = (2.0 * d ** 2 * mu + 8.0 * mu ** 2) / d ** 3 - 1.0
    sigma2 = 4.0 * E * mu / (m0 * d)
    sigma3 = -2.0 * E / (3.0 * d)
    return ReducedPDMap(sigma1, sigma2, sigma3)


def beta(m0: float, m: float) -> float:
    """Normal-form parameter ``beta(m) = -1 - sigma1(m)``."""
    mu = m - m0
    return 2.0 * (4.0 * mu + (m0 - 4.0) ** 2) * mu / (m0 - 4.0) ** 3


def eval_B(z, u, s: float) -> np.ndarray:
    """Quadratic form of the shifted map at the origin: ``(-x x1 E, 0)``."""
    first = -z[0] * u[0] * _E(s)
    return np.array([first, 0.0 * first])


def eval_C(z, u, v, s: float) -> np.ndarray:
    """Cubic form of the shifted map at the origin: ``(-x x1 x2 E, 0)``."""
    first = -z[0] * u[0] * v[0] * _E(s)
    return np.array([first, 0.0 * first])


def _c0_eigenvector(a: float, s: float, m0: float) -> float:
    E = _E(s)
    J = np.array([[a - E, 1.0], [-m0, 1.0]])
    q = np.array([1.0, E - a - 1.0])
    k = a - E + 3.0
    p = np.array([2.0 / k, -1.0 / k])
    w = np.linalg.solve(J - np.eye(2), eval_B(q, q, s))
    return float(p @ eval_C(q, q, q, s) / 6.0 - 0.5 * (p @ eval_B(q, w, s)))


def pd_coefficient(a: float, s: float) -> PDAnalysis:
    """Flip coefficient by the center-manifold and eigenvector routes.

    Both routes evaluate the same invariant quantity here,
    ``2 exp(s - 1) / (3 (m0 - 4))``; only its sign enters the normal form.
    """
    m0 = _require_m0(a, s)
    E = _E(s)
    red = reduced_map(a, s, m0)
    c0_cm = red.sigma2 ** 2 + red.sigma3
    c0_inv = _c0_eigenvector(a, s, m0)
    return PDAnalysis(
        a=a, s=s, m0=m0,
        lambda3=a - E + 2.0,
        sign_s=1 if c0_cm > 0 else -1,
        c0_cm=c0_cm,
        c0_inv=c0_inv,
        dbeta_dm_at_m0=2.0 / (m0 - 4.0),
        center_manifold=center_manifold(a, s),
    )


# -- period-2 search -------------------------------------------------------

def _F(p: MapParams, z: np.ndarray) -> np.ndarray:
    st = step_shifted(p, State(float(z[0]), float(z[1])))
    return np.array([st.x, st.y])


def _DF(p: MapParams, z: np.ndarray) -> np.ndarray:
    return np.array([[p.a - guarded_exp(z[0] + p.s - 1.0), 1.0], [-p.m, 1.0]])


def _G(p, z):
    return _F(p, _F(p, z)) - z


def _DG(p, z):
    return _DF(p, _F(p, z)) @ _DF(p, z) - np.eye(2)


def _fd_jacobian_F2(p: MapParams, z: np.ndarray, h: float = _FD_STEP) -> np.ndarray:
    J = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        J[:, j] = (_F(p, _F(p, z + e)) - _F(p, _F(p, z - e))) / (2.0 * h)
    return J


def _newton(p: MapParams, z0: np.ndarray, tol: float = 1e-13, maxit: int = 60):
    """Newton on ``F(F(z)) - z``; steps leaving the domain are halved."""
    z = z0.copy()
    g = _G(p, z)
    for _ in range(maxit):
        if np.max(np.abs(g)) <= tol:
            return z
        step = np.linalg.solve(_DG(p, z), g)
        for _halving in range(30):
            trial = z - step
            try:
                g_trial = _G(p, trial)
                break
            except (DomainViolationError, OverflowGuardError):
                step = 0.5 * step
        else:
            return None
        z, g = trial, g_trial
        if not np.all(np.isfinite(z)):
            return None
    return z if np.max(np.abs(g)) <= 1e-10 else None


def find_period2(p: MapParams, radius: Optional[float] = None) -> Period2Cycle:
    """Newton search for a nontrivial period-2 cycle of the shifted map.

    The first seed sits at the normal-form prediction ``r / sqrt(|c(0)|)``;
    the others at 8 geometrically spaced distances in ``[0.1 r, 4 r]``, all along
    the eigenvector of the multiplier nearest ``-1`` and measured in ``x``,
    where ``r = radius`` or, by default, ``sqrt(|beta(m)|)``.  Convergence to the
    origin or to any fixed point is rejected.

    Raises
    ------
    NoCycleFoundError
        No seed converged to a genuine 2-cycle, or ``m`` is within
        ``1e-12`` (relative) of ``m0`` where the cycle collapses onto ``O``.
    """
    if not p.m > 0:
        raise ValidityError("period-2 search requires m > 0", "m > 0")
    m0 = pd_threshold(p.a, p.s)
    c0 = None
    if m0 is not None and abs(m0 - 4.0) > _DEGENERATE_TOL:
        c0 = pd_coefficient(p.a, p.s).c0_cm
    if radius is None:
        if m0 is None:
            raise DegenerateThresholdError("no m0 for these parameters; pass radius explicitly")
        radius = math.sqrt(abs(beta(m0, p.m)))
    if m0 is not None and abs(p.m - m0) <= _AT_THRESHOLD * max(1.0, m0):
        raise NoCycleFoundError(f"m={p.m!r} sits at the threshold m0={m0!r}; the cycle is degenerate")
    if radius == 0.0:
        raise NoCycleFoundError("seed radius is zero: at the bifurcation point the cycle is degenerate")

    lin = linear_data(p)
    lam = min((lin.lambda_plus, lin.lambda_minus), key=lambda l: abs(l + 1.0)).real
    # seed distances are measured along x, the center-manifold coordinate
    v = np.array([1.0, lam - (p.a - _E(p.s))])

    seeds = list(np.geomspace(0.1 * radius, 4.0 * radius, _N_SEEDS))
    if c0 is not None and c0 != 0.0:
        # the normal form puts the cycle at sqrt(|beta|) / sqrt(|c0|)
        seeds.insert(0, radius / math.sqrt(abs(c0)))
    for r in seeds:
        for sign in (1.0, -1.0):
            try:
                z = _newton(p, sign * r * v)
            except (DomainViolationError, OverflowGuardError, np.linalg.LinAlgError):
                continue
            if z is None or np.linalg.norm(z) < 1e-8:
                continue
            try:
                z2 = _F(p, z)
                if np.linalg.norm(z2 - z) < 1e-8:
                    continue
                residual = float(max(np.max(np.abs(_G(p, z))),
                                     np.max(np.abs(_F(p, z2) - z))))
                if residual > 1e-10:
                    continue
                M = _fd_jacobian_F2(p, z)
            except (DomainViolationError, OverflowGuardError):
                continue
            return _make_cycle(p, z, z2, M, residual, c0)
    raise NoCycleFoundError(f"no period-2 cycle found for {p!r}")


def _make_cycle(p, z, z2, M, residual, c0) -> Period2Cycle:
    mults = np.linalg.eigvals(M)
    k = int(np.argmin(np.abs(mults - 1.0)))
    center, other = complex(mults[k]), complex(mults[1 - k])
    stab = CycleStability.STABLE if abs(center) < 1.0 else CycleStability.UNSTABLE
    amp = float(np.linalg.norm(z - z2) / 2.0)
    # the center manifold is a graph over x, so its coordinate is x itself
    nf_amp = 0.5 * abs(z[0] - z2[0]) * math.sqrt(abs(c0)) if c0 is not None else None
    return Period2Cycle(
        x1=State(float(z[0]), float(z[1])),
        x2=State(float(z2[0]), float(z2[1])),
        amplitude=amp,
        normal_form_amplitude=nf_amp,
        stability=stab,
        multipliers=(center, other),
        saddle=abs(other) > 1.0,
        residual=residual,
    )
