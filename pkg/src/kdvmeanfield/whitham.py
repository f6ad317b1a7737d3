"""Cnoidal waves and Whitham characteristic speeds for u_t + 6 u u_x + u_xxx = 0.

Genus-1 states are parameterised by ordered Riemann invariants
``lambda1 <= lambda2 <= lambda3``; genus-2 states by five ordered invariants.
The closed-form soliton-limit speeds ``v45_limit`` and ``v23_limit`` are the
band-collapse limits of ``genus2_velocity``.
"""

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

from .elliptic import carlson_rd, ellip_E, ellip_K, jacobi_cn, jacobi_zeta
from .exceptions import DegenerateStateError, OrderingError, QuadratureError

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class Genus1State:
    lambda1: float
    lambda2: float
    lambda3: float

    def __post_init__(self):
        if not (self.lambda1 <= self.lambda2 <= self.lambda3):
            raise OrderingError(
                f"expected lambda1 <= lambda2 <= lambda3, got "
                f"({self.lambda1}, {self.lambda2}, {self.lambda3})"
            )

    @property
    def m(self) -> float:
        width = self.lambda3 - self.lambda1
        if width == 0.0:
            return 0.0
        return (self.lambda2 - self.lambda1) / width

    @property
    def phase_speed(self) -> float:
        return 2.0 * (self.lambda1 + self.lambda2 + self.lambda3)

    def shifted(self, c: float) -> "Genus1State":
        return Genus1State(self.lambda1 + c, self.lambda2 + c, self.lambda3 + c)


@dataclass(frozen=True)
class CnoidalParams:
    state: Genus1State
    xi0: float = 0.0

    @property
    def V(self) -> float:
        return self.state.phase_speed

    @property
    def L(self) -> float:
        """Wavelength 2 K(m) / sqrt(lambda3 - lambda1)."""
        s = self.state
        if s.lambda3 == s.lambda1:
            raise DegenerateStateError("wavelength undefined when lambda3 == lambda1")
        if s.m >= 1.0:
            return math.inf
        return 2.0 * ellip_K(s.m) / math.sqrt(s.lambda3 - s.lambda1)


@dataclass(frozen=True)
class Genus2State:
    lambdas: tuple

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        if len(lam) != 5:
            raise ValueError("a genus-2 state needs exactly five Riemann invariants")
        if any(b < a for a, b in zip(lam, lam[1:])):
            raise OrderingError(f"genus-2 invariants must be non-decreasing, got {lam}")
        object.__setattr__(self, "lambdas", lam)

    @cached_property
    def total(self) -> float:
        return sum(self.lambdas)

    def weight(self, mu):
        """P(mu) = sqrt(|prod_k (mu - lambda_k)|)."""
        mu = np.asarray(mu, dtype=float)
        prod = np.ones_like(mu)
        for lam in self.lambdas:
            prod = prod * (mu - lam)
        return np.sqrt(np.abs(prod))


def cnoidal_eval(params: CnoidalParams, x, t):
    """Evaluate the periodic travelling wave at positions ``x`` and time ``t``.

    u = l1 - l2 + l3 + 2 (l2 - l1) cn^2(sqrt(l3 - l1) (x - V t) + xi0, m)
    """
    s = params.state
    width = s.lambda3 - s.lambda1
    if width <= 0.0:
        raise DegenerateStateError("cnoidal wave is degenerate when lambda3 == lambda1")
    arg = math.sqrt(width) * (np.asarray(x, dtype=float) - params.V * t) + params.xi0
    cn = jacobi_cn(arg, s.m)
    return s.lambda1 - s.lambda2 + s.lambda3 + 2.0 * (s.lambda2 - s.lambda1) * np.square(cn)


def cnoidal_mean(state: Genus1State) -> float:
    """Period average <u> = l1 + l2 - l3 + 2 (l3 - l1) E(m)/K(m)."""
    if state.lambda3 == state.lambda1:
        raise DegenerateStateError("mean undefined when lambda3 == lambda1")
    m = state.m
    if m >= 1.0:
        raise DegenerateStateError("K(m) diverges at m = 1; the mean tends to lambda1")
    return (
        state.lambda1
        + state.lambda2
        - state.lambda3
        + 2.0 * (state.lambda3 - state.lambda1) * ellip_E(m) / ellip_K(m)
    )


def whitham_velocities(state: Genus1State, tol: float = DEGENERACY_TOL):
    """Characteristic speeds (v1, v2, v3) of the genus-1 Whitham system.

    Near m = 0 and m = 1 the generic expressions are 0/0 and the closed-form
    limits are returned instead. The generic branch uses

        K - E = (m/3) R_D(0, 1-m, 1),    E - (1-m) K = (m (1-m)/3) R_D(0, 1, 1-m),

    so neither difference suffers cancellation.
    """
    l1, l2, l3 = state.lambda1, state.lambda2, state.lambda3
    m = state.m
    if m < tol:
        slow = 12.0 * l1 - 6.0 * l3
        return slow, slow, 6.0 * l3
    if 1.0 - m < tol:
        fast = 2.0 * l1 + 4.0 * l3
        return 6.0 * l1, fast, fast
    V = state.phase_speed
    K, E = ellip_K(m), ellip_E(m)
    width = l3 - l1
    v1 = V - 12.0 * width * K / carlson_rd(0.0, 1.0 - m, 1.0)
    v2 = V - 12.0 * width * K / carlson_rd(0.0, 1.0, 1.0 - m)
    v3 = V + 4.0 * (l3 - l2) * K / E
    return v1, v2, v3


def _band_integrals(state: Genus2State, k: int, band: int, epsrel: float):
    """I_band^j(lambda_k) for j = 0, 1, 2.

    mu = a + (b - a) sin^2(theta) absorbs the square-root zeros of P at both
    band edges, leaving a bounded integrand on [0, pi/2].
    """
    lam = state.lambdas
    a, b = lam[2 * band - 2], lam[2 * band - 1]
    lk = lam[k - 1]
    others = [v for i, v in enumerate(lam) if i not in (2 * band - 2, 2 * band - 1)]

    def reduced(theta, j):
        mu = a + (b - a) * math.sin(theta) ** 2
        rest = math.sqrt(abs((mu - others[0]) * (mu - others[1]) * (mu - others[2])))
        return 2.0 * (lk - mu) * mu**j / rest

    out = []
    probe = np.linspace(0.0, math.pi / 2, 33)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for j in range(3):
            # absolute floor from the integrand's size: the integral itself may be ~0
            scale = math.pi / 2 * max(abs(reduced(th, j)) for th in probe)
            try:
                val, err = integrate.quad(reduced, 0.0, math.pi / 2, args=(j,),
                                          epsabs=epsrel * scale, epsrel=epsrel, limit=400)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"band {band}, j={j}: {exc}") from exc
            out.append(val)
    return out


def genus2_velocity(state: Genus2State, k: int, epsrel: float = 1e-12) -> float:
    """Whitham speed v_k of the genus-2 (two-phase) KdV modulation system."""
    if k not in (1, 2, 3, 4, 5):
        raise ValueError("k must be in 1..5")
    lam = state.lambdas
    if any(b <= a for a, b in zip(lam, lam[1:])):
        raise OrderingError("genus2_velocity needs strictly ordered invariants")
    i1 = _band_integrals(state, k, 1, epsrel)
    i2 = _band_integrals(state, k, 2, epsrel)
    num = i2[2] * i1[0] - i2[0] * i1[2]
    den = i2[1] * i1[0] - i2[0] * i1[1]
    if den == 0.0:
        raise DegenerateStateError("vanishing denominator in genus-2 velocity")
    return -6.0 * state.total + 12.0 * lam[k - 1] + 12.0 * num / den


def v45_limit(lambda1, lambda2, lambda3, lambda45) -> float:
    """Speed of a soliton (collapsed band lambda4 = lambda5) riding a cnoidal wave."""
    if not (lambda1 <= lambda2 <= lambda3):
        raise OrderingError("v45_limit needs lambda1 <= lambda2 <= lambda3")
    if lambda45 <= lambda3:
        raise DegenerateStateError("v45_limit needs lambda45 > lambda3")
    base = 2.0 * (lambda1 + lambda2 + lambda3)
    width = lambda3 - lambda1
    if width == 0.0:
        return base + 4.0 * (lambda45 - lambda2)
    m = (lambda2 - lambda1) / width
    if m >= 1.0:
        # sin(psi) = 1 and Z(pi/2, m) = 0 for every m < 1
        return base + 4.0 * (lambda45 - lambda2)
    psi = math.asin(math.sqrt((lambda45 - lambda3) / (lambda45 - lambda2)))
    ratio = math.sqrt((lambda45 - lambda2) * width / ((lambda45 - lambda3) * (lambda45 - lambda1)))
    return base + 4.0 * (lambda45 - lambda2) / (1.0 - ratio * jacobi_zeta(psi, m))


def v23_limit(lambda1, lambda23, lambda4, lambda5) -> float:
    """Speed of a soliton formed by the collapsed band lambda2 = lambda3."""
    if not (lambda1 <= lambda23 <= lambda4 <= lambda5):
        raise OrderingError("v23_limit needs lambda1 <= lambda23 <= lambda4 <= lambda5")
    if lambda5 == lambda1 or lambda23 in (lambda1, lambda4):
        raise DegenerateStateError(
            "v23_limit is 0/0 at lambda23 = lambda1 or lambda23 = lambda4; "
            "use embed_speed_rw / embed_speed_lw there"
        )
    m23 = (lambda4 - lambda1) / (lambda5 - lambda1)
    if m23 >= 1.0:
        raise DegenerateStateError("v23_limit singular at m23 = 1")
    psi = math.asin(math.sqrt((lambda23 - lambda1) / (lambda4 - lambda1)))
    root = math.sqrt((lambda4 - lambda23) * (lambda23 - lambda1) / ((lambda5 - lambda1) * (lambda5 - lambda23)))
    return 2.0 * (lambda1 + lambda4 + lambda5) - 4.0 * (lambda5 - lambda23) * root / jacobi_zeta(psi, m23)


def embed_speed_rw(lambda1, lambda23) -> float:
    """Speed of a soliton embedded in the rarefaction wave, 2 l1 + 4 l23."""
    if lambda23 < lambda1:
        raise OrderingError("embed_speed_rw needs lambda23 >= lambda1")
    return 2.0 * lambda1 + 4.0 * lambda23


def embed_speed_lw(lambda1, lambda23, lambda5=0.0, tol: float = DEGENERACY_TOL) -> float:
    """Speed of a soliton embedded in the linear-wave region (genus-1 v2 at m_e)."""
    if not (lambda1 <= lambda23 <= lambda5):
        raise OrderingError("embed_speed_lw needs lambda1 <= lambda23 <= lambda5")
    if lambda5 == lambda1:
        return 6.0 * lambda1
    m_e = (lambda23 - lambda1) / (lambda5 - lambda1)
    if 1.0 - m_e < tol:
        raise DegenerateStateError("embed_speed_lw singular at m_e = 1")
    return whitham_velocities(Genus1State(lambda1, lambda23, lambda5), tol)[1]
