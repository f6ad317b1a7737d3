"""Large-scale mean field evolving from the rectangular well (no trial soliton).

Before the critical time the x-axis splits into five regions: left plateau
(u = 0), dispersive shock wave (DSW), middle plateau (u = U0), rarefaction
wave (RW) and right plateau (u = 0). At the critical time the middle plateau
closes and a modulated linear-wave (LW) interaction region opens between the
DSW and the RW.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .elliptic import ellip_E, ellip_K
from .exceptions import DegenerateStateError, OrderingError, QuadratureError
from .whitham import Genus1State, whitham_velocities

PRE_CRITICAL = "pre-critical"
POST_CRITICAL = "post-critical"


@dataclass(frozen=True)
class WellSpec:
    U0: float
    l: float

    def __post_init__(self):
        if not self.U0 < 0:
            raise ValueError(f"well depth U0 must be negative, got {self.U0}")
        if not self.l > 0:
            raise ValueError(f"well width l must be positive, got {self.l}")


@dataclass(frozen=True)
class RegionBoundaries:
    """Region edges at time ``t``.

    Pre-critical: x_L <= x_P <= x_P_prime <= x_R with the middle plateau on
    [x_P, x_P_prime]. Post-critical: x_P_prime is the DSW/LW edge and x_P the
    LW/RW edge, so x_L <= x_P_prime <= x_P <= x_R.
    """

    x_L: float
    x_P: float
    x_P_prime: float
    x_R: float
    t: float
    regime: str

    def as_tuple(self):
        return (self.x_L, self.x_P, self.x_P_prime, self.x_R)


@dataclass(frozen=True)
class HodographPoint:
    lambda1: float
    lambda2: float
    f: float
    w1: float
    w2: float
    t: float
    x: float


def critical_time(well: WellSpec) -> float:
    """Time t* = l / (-4 U0) at which the middle plateau closes."""
    return well.l / (-4.0 * well.U0)


def rw_edge_post_critical(well: WellSpec, t):
    """Cube-root law for the LW/RW edge, valid for t >= t*."""
    return well.l - 1.5 * (math.sqrt(-4.0 * well.U0) * well.l) ** (2.0 / 3.0) * np.cbrt(t)


def rw_left_edge(well: WellSpec, t):
    """Left end of the region where the mean is non-zero: x_P in both regimes."""
    if t < critical_time(well):
        return 2.0 * well.U0 * t
    return float(rw_edge_post_critical(well, t))


def _mu(m):
    return ellip_E(m) / ellip_K(m)


def dsw_edge_parametric(well: WellSpec, m: float):
    """Point (t, x) of the DSW / interaction-region boundary at modulus ``m``.

    The curve starts at (t*, -l/2) as m -> 1 and runs to t -> infinity as m -> 0.
    """
    if not 0.0 < m < 1.0:
        raise ValueError(f"modulus m must lie in (0, 1), got {m}")
    mu = _mu(m)
    den = (2.0 - m) * mu - 2.0 * (1.0 - m)
    if den <= 0.0 or not math.isfinite(den):
        raise DegenerateStateError(f"singular parameter m={m} (denominator {den})")
    root = math.sqrt(m)
    t = (1.0 + (1.0 - m) * (1.0 - mu) / den) * well.l / (-4.0 * well.U0 * root)
    x = -(1.0 + 3.0 * m * (1.0 - m) / den) * well.l / (2.0 * root)
    return t, x


def dsw_edge_modulus(well: WellSpec, t: float) -> float:
    """Invert the parametric DSW edge: the modulus m with t(m) = t, for t > t*."""
    t_star = critical_time(well)
    if t <= t_star:
        raise ValueError("the DSW/LW edge only exists after the critical time")

    def gap(m):
        return dsw_edge_parametric(well, m)[0] - t

    hi = 1.0 - 1e-15
    if gap(hi) > 0.0:
        return hi
    # t(m) decreases monotonically from infinity (m -> 0) to t* (m -> 1)
    lo = 0.5
    while gap(lo) < 0.0:
        lo *= 0.5
        if lo < 1e-6:
            raise DegenerateStateError(f"t={t} is beyond the resolvable range of the DSW edge")
    return optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def boundaries(well: WellSpec, t: float) -> RegionBoundaries:
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    U0, l = well.U0, well.l
    x_L = 12.0 * U0 * t
    t_star = critical_time(well)
    if t < t_star:
        return RegionBoundaries(x_L, 2.0 * U0 * t, l + 6.0 * U0 * t, l, t, PRE_CRITICAL)
    x_P = float(rw_edge_post_critical(well, t))
    if t == t_star:
        x_P_prime = x_P
    else:
        x_P_prime = dsw_edge_parametric(well, dsw_edge_modulus(well, t))[1]
    return RegionBoundaries(x_L, x_P, x_P_prime, l, t, POST_CRITICAL)


def rw_profile(well: WellSpec, x, t):
    """Explicit simple-wave profile: U0 on the plateau, (x - l)/(6t) in the fan, 0 beyond l."""
    if not t > 0:
        raise ValueError("rw_profile needs t > 0")
    x = np.asarray(x, dtype=float)
    fan = np.clip((x - well.l) / (6.0 * t), well.U0, 0.0)
    return fan if fan.ndim else float(fan)


def mean_field(well: WellSpec, x, t):
    """Piecewise simple-wave approximation of the mean over the whole line.

    The DSW background is replaced by the left state 0 and the LW region by
    its asymptotic mean 0; the middle plateau and the RW are exact.
    """
    x = np.asarray(x, dtype=float)
    if t <= 0:
        out = np.where((x > 0.0) & (x < well.l), well.U0, 0.0)
        return out if out.ndim else float(out)
    out = np.where((x > rw_left_edge(well, t)) & (x < well.l), rw_profile(well, x, t), 0.0)
    return out if out.ndim else float(out)


def region_at(well: WellSpec, x: float, t: float) -> str:
    """Region label at (x, t): 'L', 'DSW', 'plateau', 'LW', 'RW' or 'R'."""
    if t <= 0:
        if x <= 0:
            return "L"
        return "plateau" if x < well.l else "R"
    b = boundaries(well, t)
    if x >= b.x_R:
        return "R"
    if x < b.x_L:
        return "L"
    if b.regime == PRE_CRITICAL:
        if x < b.x_P:
            return "DSW"
        return "plateau" if x < b.x_P_prime else "RW"
    if x < b.x_P_prime:
        return "DSW"
    return "LW" if x < b.x_P else "RW"


def edp_potential(lambda1: float, lambda2: float, well: WellSpec, epsrel: float = 1e-13) -> float:
    """Euler-Darboux-Poisson potential f(lambda1, lambda2) of the LW region.

    f = l - (l/pi) int_{lambda2}^0 sqrt(beta - U0) / sqrt(|beta| (beta - lambda2)(beta - lambda1)) d beta

    The substitution beta = lambda2 sin^2(theta) removes the square-root
    singularities at both ends of the interval.
    """
    if not lambda1 <= lambda2 <= 0.0:
        raise OrderingError("edp_potential needs lambda1 <= lambda2 <= 0")
    U0, l = well.U0, well.l
    if lambda2 == 0.0:
        return l

    def integrand(theta):
        beta = lambda2 * math.sin(theta) ** 2
        return 2.0 * math.sqrt((beta - U0) / (beta - lambda1))

    if lambda1 == lambda2:
        if lambda1 != U0:
            raise DegenerateStateError("f diverges for lambda1 == lambda2 != U0")
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(integrand, 0.0, math.pi / 2, epsabs=0.0, epsrel=epsrel, limit=400)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"edp_potential quadrature failed: {exc}") from exc
    return l - l / math.pi * val


def _partial(fun, point, index, step):
    def diff(h):
        hi, lo = list(point), list(point)
        hi[index] += h
        lo[index] -= h
        return (fun(*hi) - fun(*lo)) / (2.0 * h)

    coarse, fine = diff(step), diff(0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def interaction_point(lambda1: float, lambda2: float, well: WellSpec, step: float = None) -> HodographPoint:
    """Hodograph solution (t, x) carrying the invariants (lambda1, lambda2, 0)."""
    if not lambda1 < lambda2 < 0.0:
        raise OrderingError("interaction_point needs lambda1 < lambda2 < 0")
    if step is None:
        step = 1e-5 * abs(well.U0)

    def f(a, b):
        return edp_potential(a, b, well)

    state = Genus1State(lambda1, lambda2, 0.0)
    v1, v2, _ = whitham_velocities(state)
    if v2 == v1:
        raise DegenerateStateError("v1 == v2: hodograph time undefined")
    V = state.phase_speed
    f0 = f(lambda1, lambda2)
    # L / d_j L = (V - v_j) / 2
    w1 = f0 - 0.5 * (V - v1) * _partial(f, (lambda1, lambda2), 0, step)
    w2 = f0 - 0.5 * (V - v2) * _partial(f, (lambda1, lambda2), 1, step)
    t = (w1 - w2) / (v2 - v1)
    return HodographPoint(lambda1, lambda2, f0, w1, w2, t, w1 + v1 * t)


def interaction_time(lambda1: float, lambda2: float, well: WellSpec, step: float = None) -> float:
    return interaction_point(lambda1, lambda2, well, step).t


def lw_mean(lambda1: float, lambda2: float, lambda3: float = 0.0) -> float:
    """Small-amplitude (m -> 0) mean of the linear wave train, lambda2 - lambda1 + lambda3."""
    if lambda2 < lambda1:
        raise OrderingError("lw_mean needs lambda2 >= lambda1")
    return lambda2 - lambda1 + lambda3
