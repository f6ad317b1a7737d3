"""Solitonic modulation analytics: invariants, transmission, outcomes, trajectories.

A soliton of amplitude ``a`` on a slowly varying background ``ubar`` carries
the adiabatic invariant q = 4 ubar + 2 a and moves with C = 2 ubar + q.
Trajectories through the evolving well follow from C region by region, either
in closed form (``trajectory_left``, ``trajectory_well``) or by integrating
the characteristic ODE (``trajectory_ode``).
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .exceptions import (
    InadmissibleBackgroundError,
    InconsistentPlanError,
    NonTransmissibleError,
)
from .meanfield import (
    WellSpec,
    critical_time,
    mean_field,
    region_at,
    rw_edge_post_critical,
)
from .whitham import embed_speed_lw


class OutcomeKind(str, Enum):
    TUNNEL = "Tunnel"
    EMBED_RW = "EmbedRW"
    EMBED_LW = "EmbedLW"
    EMBED_DSW = "EmbedDSW"
    NO_INTERACTION = "NoInteraction"


EMBED_BY_REGION = {
    "DSW": OutcomeKind.EMBED_DSW,
    "LW": OutcomeKind.EMBED_LW,
    "plateau": OutcomeKind.EMBED_LW,
    "RW": OutcomeKind.EMBED_RW,
}


def q_invariant(a, ubar):
    """Solitonic Riemann invariant q = 4 ubar + 2 a."""
    if np.any(np.asarray(a) <= 0):
        raise ValueError("soliton amplitude must be positive")
    return 4.0 * ubar + 2.0 * a


def soliton_speed(a, ubar):
    """C = 6 ubar + 2 a (equivalently 2 ubar + q)."""
    return 6.0 * ubar + 2.0 * a


def p_factor(q, ubar):
    """Phase factor p(q, ubar) = (4 ubar - q)^(-1/2)."""
    arg = 4.0 * ubar - q
    if arg <= 0:
        raise InadmissibleBackgroundError(f"p(q={q}, u={ubar}) needs 4u - q > 0, got {arg}")
    return 1.0 / math.sqrt(arg)


@dataclass(frozen=True)
class SolitonState:
    ubar: float
    a: float
    x: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"soliton amplitude must be positive, got {self.a}")

    @property
    def q(self) -> float:
        return q_invariant(self.a, self.ubar)

    @property
    def ktilde(self) -> float:
        return math.sqrt(2.0 * self.a)

    @property
    def speed(self) -> float:
        return soliton_speed(self.a, self.ubar)

    @property
    def r(self) -> float:
        # |4 ubar - q| = 2a; only ratios of r across backgrounds are observable
        return self.k / self.ktilde


@dataclass(frozen=True)
class WaveTrain:
    k: float
    omega: float
    theta: float = 0.0


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    a_out: Optional[float] = None
    delta_x: Optional[float] = None


def transmit(a_in: float, u_in: float, u_out: float) -> float:
    """Amplitude after moving from background ``u_in`` to ``u_out`` at fixed q."""
    if not a_in > 0:
        raise ValueError("incoming amplitude must be positive")
    a_out = a_in + 2.0 * (u_in - u_out)
    if a_out <= 0:
        raise NonTransmissibleError(
            f"a_out = {a_out:g} <= 0: soliton of amplitude {a_in:g} cannot pass {u_in:g} -> {u_out:g}"
        )
    return a_out


def phase_shift(k_in: float, q: float, u_in: float, u_out: float, x_minus: float):
    """Wavenumber after transmission and the induced shift x_+ - x_-.

    Uses k_in p(q, u_in) = k_out p(q, u_out) in ratio form, so the arbitrary
    reference level of p cancels.
    """
    num, den = 4.0 * u_out - q, 4.0 * u_in - q
    if den == 0.0 or num / den <= 0.0:
        raise InadmissibleBackgroundError(
            f"p-ratio undefined for q={q}, u_in={u_in}, u_out={u_out}"
        )
    k_out = k_in * math.sqrt(num / den)
    x_plus = x_minus * k_in / k_out
    return k_out, x_plus - x_minus


def default_eps(well: WellSpec) -> float:
    return 0.05 * (-2.0 * well.U0)


def classify(a0: float, x0: float, well: WellSpec, eps: Optional[float] = None,
             rtol: float = 1e-9) -> OutcomeKind:
    """Tunnelling / embedding outcome from the initial amplitude and position."""
    if not a0 > 0:
        raise ValueError("initial amplitude must be positive")
    if eps is None:
        eps = default_eps(well)
    if x0 <= 0:
        return OutcomeKind.TUNNEL
    if x0 >= well.l:
        return OutcomeKind.NO_INTERACTION
    threshold = -2.0 * well.U0
    if abs(a0 - threshold) <= rtol * threshold:
        return OutcomeKind.EMBED_RW
    if a0 > threshold:
        return OutcomeKind.TUNNEL
    if a0 <= eps:
        return OutcomeKind.EMBED_DSW
    return OutcomeKind.EMBED_LW


def critical_amplitude_lw(x0: float, well: WellSpec) -> float:
    """Approximate amplitude below which a left-placed soliton meets the LW region."""
    return (well.l + 2.0 * x0) * well.U0 / well.l


@dataclass
class Segment:
    label: str
    t_start: float
    t_end: float
    x_law: Callable
    a_law: Callable


@dataclass
class TrajectoryPlan:
    segments: list
    crossing_times: dict = field(default_factory=dict)
    outcome: Optional[OutcomeKind] = None

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.zeros(t.shape, dtype=int)
        for i, seg in enumerate(self.segments[1:], start=1):
            idx = np.where(t >= seg.t_start, i, idx)
        return t, idx

    def _evaluate(self, t, attr):
        t, idx = self._locate(t)
        out = np.empty(t.shape)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                out[mask] = getattr(seg, attr)(t[mask])
        return out if out.ndim else float(out)

    def position(self, t):
        return self._evaluate(t, "x_law")

    def amplitude(self, t):
        return self._evaluate(t, "a_law")

    def segment_at(self, t: float) -> str:
        _, idx = self._locate(t)
        return self.segments[int(idx)].label

    def junction_jumps(self):
        """|x(T-) - x(T+)| at every internal junction."""
        jumps = []
        for left, right in zip(self.segments, self.segments[1:]):
            T = right.t_start
            jumps.append(abs(float(left.x_law(np.array([T]))[0]) - float(right.x_law(np.array([T]))[0])))
        return jumps


def _const(value):
    return lambda t: np.full(np.shape(t), float(value))


def trajectory_left(a_L: float, x0: float, well: WellSpec) -> TrajectoryPlan:
    """Closed-form path L / I / II / III / R for a soliton starting left of the well.

    Only valid when the soliton crosses the middle plateau before it closes;
    otherwise it meets the LW region and ``trajectory_ode`` should be used.
    """
    if not a_L > 0:
        raise ValueError("a_L must be positive")
    if not x0 < 0:
        raise ValueError("trajectory_left needs x0 < 0")
    U0, l = well.U0, well.l
    T1 = -x0 / (2.0 * a_L - 12.0 * U0)
    T2 = T1 * (6.0 * U0 - a_L) / (U0 - a_L)
    if T2 >= critical_time(well):
        raise InconsistentPlanError(
            f"soliton leaves the DSW at t={T2:g} after the plateau closes "
            f"(t*={critical_time(well):g}); use trajectory_ode"
        )
    T3 = (l + 2.0 * a_L * T2) / (2.0 * a_L - 4.0 * U0)
    T4 = T3 * ((a_L - 2.0 * U0) / a_L) ** 1.5
    q = 2.0 * a_L
    c3 = 3.0 * (a_L - 2.0 * U0) * T3 ** (2.0 / 3.0)

    def x_rw(t):
        return 3.0 * a_L * t - c3 * np.cbrt(t) + l

    def a_rw(t):
        ubar = (x_rw(t) - l) / (6.0 * t)
        return 0.5 * (q - 4.0 * ubar)

    segments = [
        Segment("L", 0.0, T1, lambda t: x0 + 2.0 * a_L * t, _const(a_L)),
        Segment("I", T1, T2, lambda t: 2.0 * a_L * t + 12.0 * U0 * T1 - 2.0 * a_L * T1, _const(a_L)),
        Segment("II", T2, T3, lambda t: 2.0 * (a_L + U0) * t - 2.0 * a_L * T2, _const(a_L - 2.0 * U0)),
        Segment("III", T3, T4, x_rw, a_rw),
        Segment("R", T4, math.inf, lambda t: 2.0 * a_L * t - 2.0 * a_L * T4 + l, _const(a_L)),
    ]
    return TrajectoryPlan(segments, {"T1": T1, "T2": T2, "T3": T3, "T4": T4}, OutcomeKind.TUNNEL)


def _rw_law(a_M: float, x0: float, well: WellSpec, t_arr: float):
    U0, l = well.U0, well.l
    q = 4.0 * U0 + 2.0 * a_M
    c = 3.0 * a_M * t_arr ** (2.0 / 3.0)

    def x_rw(t):
        return -c * np.cbrt(t) + (6.0 * U0 + 3.0 * a_M) * t + l

    def a_rw(t):
        ubar = (x_rw(t) - l) / (6.0 * t)
        return 0.5 * (q - 4.0 * ubar)

    return x_rw, a_rw


def trajectory_well(a_M: float, x0: float, well: WellSpec, eps: Optional[float] = None) -> TrajectoryPlan:
    """Path of a soliton starting inside the well, 0 < x0 < l.

    Tunnelling and RW embedding are closed form. For smaller amplitudes the
    soliton first reaches either the DSW edge or the RW edge; after entering
    the DSW or the LW region it is advected at the genus-1 speed
    v2(lambda1, q/4, 0) frozen at the entry point.
    """
    U0, l = well.U0, well.l
    if not 0 < x0 < l:
        raise ValueError("trajectory_well needs 0 < x0 < l")
    kind = classify(a_M, x0, well, eps)
    q = 4.0 * U0 + 2.0 * a_M
    speed0 = 6.0 * U0 + 2.0 * a_M
    t_arr = (l - x0) / (2.0 * a_M)
    plateau = Segment("plateau", 0.0, t_arr, lambda t: x0 + speed0 * t, _const(a_M))
    x_rw, a_rw = _rw_law(a_M, x0, well, t_arr)

    if kind == OutcomeKind.TUNNEL:
        a_R = transmit(a_M, U0, 0.0)
        T_exit = t_arr * (a_M / (a_M + 2.0 * U0)) ** 1.5
        segments = [
            plateau,
            Segment("RW", t_arr, T_exit, x_rw, a_rw),
            Segment("R", T_exit, math.inf, lambda t: l + 2.0 * a_R * (t - T_exit), _const(a_R)),
        ]
        return TrajectoryPlan(segments, {"t_arrival": t_arr, "T_exit": T_exit}, kind)
    if kind == OutcomeKind.EMBED_RW:
        segments = [plateau, Segment("RW", t_arr, math.inf, x_rw, a_rw)]
        return TrajectoryPlan(segments, {"t_arrival": t_arr}, kind)

    lam23 = 0.25 * q
    t_star = critical_time(well)
    t_dsw = x0 / (-4.0 * U0 - 2.0 * a_M)
    if t_dsw < t_arr * (1.0 - 1e-12):
        t_in, x_in, lam1 = t_dsw, 2.0 * U0 * t_dsw, U0
        entered = "DSW"
        segments = [Segment("plateau", 0.0, t_in, plateau.x_law, plateau.a_law)]
    elif abs(t_dsw - t_arr) <= 1e-12 * t_arr:
        # the soliton reaches the critical point itself
        t_in, x_in, lam1 = t_star, -0.5 * l, U0
        entered = "LW"
        segments = [Segment("plateau", 0.0, t_in, plateau.x_law, plateau.a_law)]
    else:
        # inside the fan: x - l = (3q/2) t + C t^(1/3); LW/RW edge: x - l = -B t^(1/3)
        C = float(x_rw(np.array([1.0]))[0]) - l - 1.5 * q
        B = 1.5 * (math.sqrt(-4.0 * U0) * l) ** (2.0 / 3.0)
        if C + B <= 0:
            t_in = t_star
        else:
            t_in = max(t_star, (-2.0 * (C + B) / (3.0 * q)) ** 1.5)
        x_in = float(rw_edge_post_critical(well, t_in))
        lam1 = (x_in - l) / (6.0 * t_in)
        entered = "LW"
        segments = [plateau, Segment("RW", t_arr, t_in, x_rw, a_rw)]
    v_embed = embed_speed_lw(lam1, lam23, 0.0)
    segments.append(
        Segment(entered, t_in, math.inf, lambda t: x_in + v_embed * (t - t_in), _const(0.0))
    )
    return TrajectoryPlan(segments, {"t_arrival": t_arr, "t_embed": t_in, "v_embed": v_embed}, kind)


@dataclass
class OdePath:
    t: np.ndarray
    x: np.ndarray
    a: np.ndarray
    q0: float
    event: Optional[dict] = None


def trajectory_ode(a0: float, x0: float, well: WellSpec, meanfield: Optional[Callable] = None,
                   t_end: float = 50.0, dt: float = 1e-2) -> OdePath:
    """Integrate dx/dt = 2 ubar(x, t) + q0 with classical RK4.

    The amplitude follows from the conserved invariant, a = (q0 - 4 ubar)/2.
    Integration stops at the first sample with a <= 0 and the collapse point
    is reported in ``event``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if meanfield is None:
        def meanfield(x, t):
            return mean_field(well, x, t)

    q0 = q_invariant(a0, meanfield(x0, 0.0))

    def rhs(x, t):
        return 2.0 * meanfield(x, t) + q0

    n = int(math.ceil(t_end / dt - 1e-9))
    ts, xs, amps = [0.0], [x0], [a0]
    x, t = x0, 0.0
    event = None
    for i in range(n):
        h = min(dt, t_end - t)
        k1 = rhs(x, t)
        k2 = rhs(x + 0.5 * h * k1, t + 0.5 * h)
        k3 = rhs(x + 0.5 * h * k2, t + 0.5 * h)
        k4 = rhs(x + h * k3, t + h)
        x = x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        t = (i + 1) * dt if i + 1 < n else t_end
        a = 0.5 * (q0 - 4.0 * meanfield(x, t))
        ts.append(t)
        xs.append(x)
        amps.append(a)
        if a <= 0.0:
            event = {"kind": "collapse", "t": t, "x": x, "region": region_at(well, x, t)}
            break
    return OdePath(np.array(ts), np.array(xs), np.array(amps), q0, event)


def classify_path(path: OdePath, well: WellSpec) -> OutcomeKind:
    """Outcome of an integrated path: collapse region, escape to the right, or RW capture."""
    if path.event is not None:
        return EMBED_BY_REGION.get(path.event["region"], OutcomeKind.EMBED_DSW)
    x_end, t_end = path.x[-1], path.t[-1]
    if x_end >= well.l and path.x[0] >= well.l:
        return OutcomeKind.NO_INTERACTION
    if x_end >= well.l:
        return OutcomeKind.TUNNEL
    region = region_at(well, x_end, t_end)
    return EMBED_BY_REGION.get(region, OutcomeKind.EMBED_DSW)
