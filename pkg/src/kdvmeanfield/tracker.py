"""Measurements on simulated fields: soliton peaks, region edges, phase shifts."""

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.signal import find_peaks

from .exceptions import AmbiguousPeakError, InsufficientTailError, NoPeakError
from .meanfield import WellSpec, critical_time
from .sim import WaveField

FLAG_OK = "ok"
FLAG_AMBIGUOUS = "ambiguous"
FLAG_NOPEAK = "nopeak"

# the soliton "width" is its 1% extent, sech^2(3) ~ 0.01, in units of 1/kappa
WIDTH_EFOLDS = 3.0


@dataclass(frozen=True)
class TrackPoint:
    t: float
    x_peak: float
    a_meas: float
    ubar_local: float
    flag: str = FLAG_OK

    @property
    def ok(self) -> bool:
        return self.flag == FLAG_OK


@dataclass(frozen=True)
class EdgeSet:
    t: float
    x_L: Optional[float]
    x_P: Optional[float]
    x_P_prime: Optional[float]
    x_R: Optional[float]

    def as_tuple(self):
        return (self.x_L, self.x_P, self.x_P_prime, self.x_R)

    @property
    def missing(self):
        names = ("x_L", "x_P", "x_P_prime", "x_R")
        return [n for n, v in zip(names, self.as_tuple()) if v is None]


def _parabolic_vertex(x, u, i):
    if i <= 0 or i >= len(u) - 1:
        return float(x[i]), float(u[i])
    um, u0, up = u[i - 1], u[i], u[i + 1]
    den = um - 2.0 * u0 + up
    if den >= 0.0:
        return float(x[i]), float(u0)
    s = 0.5 * (um - up) / den
    dx = x[1] - x[0]
    return float(x[i] + s * dx), float(u0 - 0.25 * (um - up) * s)


def _window(field: WaveField, lo: float, hi: float):
    x = field.x
    mask = (x >= lo) & (x <= hi)
    return np.flatnonzero(mask)


def detect_soliton(field: WaveField, hint, a_ref: Optional[float] = None,
                   prominence_frac: float = 0.05, ambiguity: float = 0.7) -> TrackPoint:
    """Locate the dominant soliton in the window ``hint = (x_lo, x_hi)``.

    ``a_ref`` sets the prominence threshold ``prominence_frac * a_ref``; by
    default it is the peak-to-median range of the window. A second peak with
    at least ``ambiguity`` times the leading prominence makes the detection
    ambiguous.
    """
    lo, hi = hint
    idx = _window(field, lo, hi)
    if idx.size < 5:
        raise NoPeakError(f"window [{lo:g}, {hi:g}] holds fewer than five samples")
    u = field.u[idx]
    if a_ref is None:
        a_ref = float(u.max() - np.median(u))
    threshold = prominence_frac * a_ref
    peaks, props = find_peaks(u, prominence=max(threshold, 1e-12))
    if peaks.size == 0:
        raise NoPeakError(f"no peak with prominence >= {threshold:g} in [{lo:g}, {hi:g}] at t={field.t:g}")
    order = np.argsort(props["prominences"])[::-1]
    best = peaks[order[0]]
    if peaks.size > 1 and props["prominences"][order[1]] >= ambiguity * props["prominences"][order[0]]:
        raise AmbiguousPeakError(
            f"two comparable peaks at x={field.x[idx[best]]:g} and "
            f"x={field.x[idx[peaks[order[1]]]]:g} (t={field.t:g})"
        )
    x_peak, u_peak = _parabolic_vertex(field.x, field.u, idx[best])

    # background from both flanks, beyond two soliton widths of the crest
    x = field.x
    ubar = float(np.median(u))
    for _ in range(3):
        a_est = max(u_peak - ubar, 1e-6)
        w = WIDTH_EFOLDS / math.sqrt(0.5 * a_est)
        flank = ((np.abs(x - x_peak) >= 2.0 * w) & (np.abs(x - x_peak) <= 3.0 * w))
        if not np.any(flank):
            break
        ubar = float(np.median(field.u[flank]))
    a_meas = max(u_peak - ubar, 0.0)
    return TrackPoint(float(field.t), x_peak, a_meas, ubar, FLAG_OK)


def track(snapshots, x_start: float, a_ref: float, speed: Optional[Callable] = None,
          half_window: Optional[float] = None, prominence_frac: float = 0.05,
          ambiguity: float = 0.7):
    """Chain detections through ``snapshots``.

    The next search window is centred on the previous position advanced by
    ``speed(t)`` (a predicted drift) or, without a predictor, by the last
    measured velocity. Failed detections are kept as flagged points with
    NaN position and never interpolated.
    """
    if half_window is None:
        half_window = 4.0 * WIDTH_EFOLDS / math.sqrt(0.5 * a_ref)
    points = []
    x_prev, t_prev, v_prev = float(x_start), None, 0.0
    last_good = None
    for snap in snapshots:
        t = float(snap.t)
        if t_prev is not None and t <= t_prev:
            raise ValueError(f"snapshots are not strictly time-ordered at t={t}")
        if t_prev is None:
            centre = x_prev
        elif speed is not None:
            centre = x_prev + 0.5 * (speed(t_prev) + speed(t)) * (t - t_prev)
        else:
            centre = x_prev + v_prev * (t - t_prev)
        try:
            pt = detect_soliton(snap, (centre - half_window, centre + half_window), a_ref,
                                prominence_frac, ambiguity)
        except AmbiguousPeakError:
            points.append(TrackPoint(t, math.nan, math.nan, math.nan, FLAG_AMBIGUOUS))
            x_prev, t_prev = centre, t
            continue
        except NoPeakError:
            points.append(TrackPoint(t, math.nan, math.nan, math.nan, FLAG_NOPEAK))
            x_prev, t_prev = centre, t
            continue
        if last_good is not None and speed is None:
            v_prev = (pt.x_peak - last_good.x_peak) / (t - last_good.t)
        points.append(pt)
        last_good = pt
        x_prev, t_prev = pt.x_peak, t
    return points


def crest_envelope(field: WaveField, x_right: float, prominence: float = 1e-3):
    """Crest positions left of ``x_right`` and their height above the interpolated troughs."""
    x, u = field.x, field.u
    crests, _ = find_peaks(u, prominence=prominence)
    troughs, _ = find_peaks(-u, prominence=prominence)
    crests = crests[x[crests] < x_right]
    if crests.size == 0 or troughs.size < 2:
        return np.empty(0), np.empty(0)
    floor = np.interp(x[crests], x[troughs], u[troughs])
    return x[crests], u[crests] - floor


def _fan_fit(field: WaveField, well: WellSpec, x_left: float, lo_frac=0.25, hi_frac=0.75):
    """Least-squares line through the smooth fan between two levels of U0."""
    x, u = field.x, field.u
    inside = np.flatnonzero((x > x_left) & (x < well.l))
    if inside.size == 0:
        return None
    upper, lower = lo_frac * well.U0, hi_frac * well.U0
    sel = inside[(u[inside] <= upper) & (u[inside] >= lower)]
    if sel.size < 3:
        return None
    # keep the longest contiguous run (the fan), not DSW crossings or ripples
    runs = np.split(sel, np.flatnonzero(np.diff(sel) > 1) + 1)
    run = max(runs, key=len)
    if run.size < 3:
        return None
    slope, icpt = np.polyfit(x[run], u[run], 1)
    if slope <= 0:
        return None
    return slope, icpt


def lead_crest(field: WaveField, well: WellSpec):
    """Rightmost crest left of the well edge rising at least |U0|/2 above its surroundings."""
    x = field.x
    peaks, _ = find_peaks(field.u, prominence=0.5 * abs(well.U0))
    peaks = peaks[x[peaks] < well.l]
    if peaks.size == 0:
        return None
    return _parabolic_vertex(x, field.u, peaks[-1])[0]


def smooth_region_start(field: WaveField, well: WellSpec, threshold: float):
    """Left end of the fan: start of the widest extremum-free stretch between the tallest crest and l.

    Only extrema with prominence above ``threshold`` count. Starting the
    search at the tallest crest (the soliton edge of the DSW) keeps small
    far-field ripples out of the competition.
    """
    x, u = field.x, field.u
    prom = max(threshold, 1e-12)
    crests, _ = find_peaks(u, prominence=prom)
    troughs, _ = find_peaks(-u, prominence=prom)
    inside = crests[x[crests] < well.l]
    if inside.size == 0:
        return None
    tallest = x[inside[np.argmax(u[inside])]]
    ext = np.sort(np.concatenate([crests, troughs]))
    pos = x[ext][(x[ext] >= tallest) & (x[ext] < well.l)]
    gaps = np.diff(np.append(pos, well.l))
    return float(pos[int(np.argmax(gaps))])


def measure_edges(field: WaveField, well: WellSpec, threshold: Optional[float] = None,
                  env_band=(0.2, 0.8)) -> EdgeSet:
    """Estimate the region edges from a bare-well (or far-from-soliton) field.

    x_R and x_P' extrapolate a line fitted through the fan to the levels 0
    and U0 (x_P' only before the critical time). x_L extrapolates the crest
    envelope of the DSW front, over the crests whose height lies inside
    ``env_band`` of the largest one, to zero height. x_P is the crest of the
    leading DSW soliton before the critical time and the left end of the
    smooth fan afterwards. Undetected edges are None.
    """
    U0, l = well.U0, well.l
    if threshold is None:
        threshold = 0.02 * abs(U0)
    t = field.t
    if t <= 0:
        return EdgeSet(t, 0.0, 0.0, l, l)
    pre = t < critical_time(well)

    x_P = lead_crest(field, well) if pre else smooth_region_start(field, well, threshold)

    fit = _fan_fit(field, well, x_P if x_P is not None else -math.inf)
    x_R = x_Pp = None
    if fit is not None:
        slope, icpt = fit
        x_R = -icpt / slope
        if pre:
            x_Pp = (U0 - icpt) / slope

    x_L = None
    # the right limit sits just past x_P so the lead crest itself is always included
    right = (x_P + 2.0 * field.grid.dx) if x_P is not None else l
    xc, height = crest_envelope(field, right, prominence=0.1 * threshold)
    if xc.size >= 3:
        # walk left from the tallest crest through the band; stop below its floor
        top_i = int(np.argmax(height))
        top = float(height[top_i])
        front = []
        for i in range(top_i, -1, -1):
            if height[i] < env_band[0] * top:
                break
            if height[i] <= env_band[1] * top:
                front.append(i)
        if len(front) >= 2:
            slope, icpt = np.polyfit(xc[front], height[front], 1)
            if slope > 0:
                x_L = -icpt / slope
    return EdgeSet(t, x_L, x_P, x_Pp, x_R)


def plateau_present(field: WaveField, well: WellSpec, threshold: Optional[float] = None) -> bool:
    """True while the field right of the leading DSW crest still reaches the floor U0."""
    if threshold is None:
        threshold = 0.02 * abs(well.U0)
    if field.t <= 0:
        return True
    x = field.x
    crest = lead_crest(field, well)
    lo = crest if crest is not None else -math.inf
    right = (x > lo) & (x < well.l)
    if not np.any(right):
        return False
    return bool(np.min(field.u[right]) <= well.U0 + threshold)


def plateau_disappearance_time(snapshots, well: WellSpec, threshold: Optional[float] = None) -> float:
    """Midpoint between the last snapshot with a plateau and the first without."""
    prev = None
    for snap in snapshots:
        if not plateau_present(snap, well, threshold):
            if prev is None:
                return float(snap.t)
            return 0.5 * (prev + float(snap.t))
        prev = float(snap.t)
    raise InsufficientTailError("the plateau persists through the last snapshot")


def measure_phase_shift(points, reference: Callable, t_exit: float, tail_fraction: float = 0.2) -> float:
    """Offset of the post-exit path from ``reference`` (free flight t -> x), taken at ``t_exit``.

    A line is fitted through the good samples after ``t_exit`` and compared
    with the reference at the exit time. When the outgoing speed equals the
    reference speed this is the mean offset; when the soliton leaves slightly
    slower or faster, evaluating at the exit keeps the result independent of
    how long the run continues.
    """
    times = np.array([p.t for p in points])
    if times.size == 0:
        raise InsufficientTailError("empty track")
    run = times[-1] - times[0]
    tail = [p for p in points if p.t >= t_exit and p.ok]
    if len(tail) < 2 or (tail[-1].t - tail[0].t) < tail_fraction * run:
        raise InsufficientTailError(
            f"post-exit samples span {0 if not tail else tail[-1].t - tail[0].t:g}, "
            f"need {tail_fraction * run:g}"
        )
    t = np.array([p.t for p in tail])
    off = np.array([p.x_peak - float(reference(p.t)) for p in tail])
    slope, icpt = np.polyfit(t - t_exit, off, 1)
    return float(icpt)


def fitted_speed(points, t_min: float = -math.inf, t_max: float = math.inf) -> float:
    good = [p for p in points if p.ok and t_min <= p.t <= t_max]
    if len(good) < 2:
        raise InsufficientTailError("need two good samples for a speed fit")
    t = np.array([p.t for p in good])
    x = np.array([p.x_peak for p in good])
    return float(np.polyfit(t, x, 1)[0])


TRACK_COLUMNS = ("t", "x_peak", "a_meas", "ubar_local", "flag")


def write_track_csv(path, points) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACK_COLUMNS)
        for p in points:
            writer.writerow([repr(float(v)) for v in (p.t, p.x_peak, p.a_meas, p.ubar_local)] + [p.flag])


def read_track_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACK_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {header}")
        return [TrackPoint(float(r[0]), float(r[1]), float(r[2]), float(r[3]), r[4]) for r in reader]
