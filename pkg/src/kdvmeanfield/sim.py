"""Fourier pseudospectral solver for u_t + 6 u u_x + u_xxx = 0 on a periodic domain.

The dispersive term is integrated exactly in spectral space (integrating
factor) and the nonlinear flux 3 (u^2)_x is advanced with classical RK4.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .exceptions import BlowUpError, GeometryError

BLOWUP_FACTOR = 100.0
MIN_POINTS = 256


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < MIN_POINTS or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= {MIN_POINTS}, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers of the real FFT."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)


@dataclass
class WaveField:
    grid: Grid
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != (self.grid.n,):
            raise ValueError(f"field has {self.u.shape} samples, grid expects {self.grid.n}")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("field contains non-finite values")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    dealias_fraction: float = 2.0 / 3.0
    smoothing_delta: float = 0.5
    sample_interval: float = 0.1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")
        if not self.smoothing_delta > 0:
            raise ValueError("smoothing_delta must be positive")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")


def smooth_step(x, delta):
    """Unit step smoothed over a width ``delta`` (error-function profile)."""
    return 0.5 * (1.0 + erf(np.asarray(x, dtype=float) / delta))


def soliton_profile(x, a, x0):
    # sech^2 z = 4 e^{-2|z|} / (1 + e^{-2|z|})^2 avoids cosh overflow in the tails
    z = np.abs(math.sqrt(0.5 * a) * (np.asarray(x, dtype=float) - x0))
    e = np.exp(-2.0 * z)
    return a * 4.0 * e / (1.0 + e) ** 2


def soliton_width(a: float) -> float:
    return 1.0 / math.sqrt(0.5 * a)


def build_initial(scenario, grid: Grid, smoothing_delta: float = 0.5) -> WaveField:
    """Regularised well plus trial soliton.

    ``scenario`` needs ``well`` (with ``U0`` and ``l``), ``a0`` and ``x0``;
    ``a0 = 0`` gives the bare well and ``U0 = 0`` a lone soliton.
    """
    if not smoothing_delta > 0:
        raise ValueError("smoothing_delta must be positive")
    U0, l = scenario.well.U0, scenario.well.l
    a0, x0 = scenario.a0, scenario.x0
    x = grid.x
    margin = 10.0 * max(smoothing_delta, soliton_width(a0) if a0 > 0 else 0.0)
    if U0 != 0.0 and (grid.x_min + margin > 0.0 or l + margin > grid.x_max):
        raise GeometryError(f"well [0, {l}] lies within {margin:g} of the grid ends")
    if a0 > 0 and not grid.x_min + margin <= x0 <= grid.x_max - margin:
        raise GeometryError(f"soliton at x0={x0} lies within {margin:g} of the grid ends")
    u = U0 * (smooth_step(x, smoothing_delta) - smooth_step(x - l, smoothing_delta))
    if a0 > 0:
        u = u + soliton_profile(x, a0, x0)
    return WaveField(grid, u, 0.0)


def _dealias_mask(grid: Grid, fraction: float) -> np.ndarray:
    k = np.abs(grid.k)
    if fraction >= 1.0:
        return np.ones_like(k, dtype=bool)
    # strict: with the 2/3 rule the product of two retained modes must not alias onto a retained one
    return k < fraction * k.max() * (1.0 - 1e-12)


def stable_dt(grid: Grid, u_max: float, cfl: float = 0.5, dealias_fraction: float = 2.0 / 3.0) -> float:
    """Advective step bound dt <= C dx / max(1, 6 max|u|) on the retained modes."""
    return cfl * grid.dx / (dealias_fraction * max(1.0, 6.0 * u_max))


def evolve(field: WaveField, t_end: float, config: SolverConfig, sample_times=None):
    """Advance ``field`` to ``t_end`` and return the list of snapshots.

    Snapshots are taken at multiples of ``config.sample_interval`` (and at
    any extra ``sample_times``), always including the initial and final
    states. Steps are shortened so that every snapshot lands exactly.
    """
    if not t_end >= field.t:
        raise ValueError("t_end precedes the field time")
    grid = field.grid
    k = grid.k
    mask = _dealias_mask(grid, config.dealias_fraction)
    nonlin_coef = -3j * k * mask
    u_bound = BLOWUP_FACTOR * max(float(np.max(np.abs(field.u))), 1e-300)

    t0 = field.t
    n_samples = int(math.floor((t_end - t0) / config.sample_interval + 1e-9))
    targets = {t0 + i * config.sample_interval for i in range(1, n_samples + 1)}
    targets.add(t_end)
    if sample_times is not None:
        targets.update(float(s) for s in sample_times if t0 < s <= t_end)
    targets = sorted(s for s in targets if s > t0 + 1e-12)

    def nonlinear(vhat):
        u = np.fft.irfft(vhat, n=grid.n)
        return nonlin_coef * np.fft.rfft(u * u)

    cache = {}

    def factors(h):
        key = round(h, 15)
        if key not in cache:
            cache[key] = (np.exp(0.5j * k**3 * h), np.exp(1j * k**3 * h))
        return cache[key]

    def step(vhat, h):
        e_half, e_full = factors(h)
        n1 = nonlinear(vhat)
        va = e_half * (vhat + 0.5 * h * n1)
        n2 = nonlinear(va)
        vb = e_half * vhat + 0.5 * h * n2
        n3 = nonlinear(vb)
        vc = e_full * vhat + h * e_half * n3
        n4 = nonlinear(vc)
        return e_full * vhat + h / 6.0 * (e_full * n1 + 2.0 * e_half * (n2 + n3) + n4)

    vhat = np.fft.rfft(field.u) * mask
    # the first snapshot is the projected state that is actually evolved
    snapshots = [WaveField(grid, np.fft.irfft(vhat, n=grid.n), t0)]
    t = t0
    for target in targets:
        span = target - t
        n_steps = max(1, int(math.ceil(span / config.dt - 1e-9)))
        h = span / n_steps
        for i in range(n_steps):
            vhat = step(vhat, h)
            if i % 100 == 99 and not np.all(np.isfinite(vhat)):
                raise BlowUpError(f"non-finite spectrum near t={t + (i + 1) * h:g}")
        t = target
        u = np.fft.irfft(vhat, n=grid.n)
        peak = float(np.max(np.abs(u))) if np.all(np.isfinite(u)) else math.inf
        if peak > u_bound:
            raise BlowUpError(
                f"max|u| = {peak:g} exceeds {BLOWUP_FACTOR:g} x max|u0| at t={t:g}; reduce dt"
            )
        snapshots.append(WaveField(grid, u, t))
    return snapshots


def conserved_quantities(field: WaveField):
    """(mass, momentum, energy) = (int u, int u^2, int u^3 - u_x^2 / 2)."""
    u = field.u
    dx = field.grid.dx
    ux = np.fft.irfft(1j * field.grid.k * np.fft.rfft(u), n=field.grid.n)
    mass = float(np.sum(u) * dx)
    momentum = float(np.sum(u * u) * dx)
    energy = float(np.sum(u**3 - 0.5 * ux * ux) * dx)
    return mass, momentum, energy


def wrap_signal(snapshots, points: int = 5) -> float:
    """Largest |u| within ``points`` cells of either end, relative to max|u0|."""
    ref = max(float(np.max(np.abs(snapshots[0].u))), 1e-300)
    worst = 0.0
    for snap in snapshots:
        edge = np.concatenate([snap.u[:points], snap.u[-points:]])
        worst = max(worst, float(np.max(np.abs(edge))))
    return worst / ref


def write_snapshot_csv(path, field: WaveField) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# t={float(field.t)!r}\n")
        fh.write("x,u\n")
        for xi, ui in zip(field.x, field.u):
            fh.write(f"{float(xi)!r},{float(ui)!r}\n")


def read_snapshot_csv(path) -> WaveField:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if not first.startswith("# t="):
            raise ValueError(f"{path}: missing '# t=' header")
        t = float(first[4:])
        header = fh.readline().strip()
        if header != "x,u":
            raise ValueError(f"{path}: expected columns x,u, got {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    x, u = data[:, 0], data[:, 1]
    dx = x[1] - x[0]
    grid = Grid(float(x[0]), float(x[0] + dx * len(x)), len(x))
    return WaveField(grid, u, t)
