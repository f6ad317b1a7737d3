import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdvmeanfield.exceptions import AmbiguousPeakError, InsufficientTailError, NoPeakError
from kdvmeanfield.meanfield import WellSpec, boundaries
from kdvmeanfield.sim import Grid, WaveField, soliton_profile
from kdvmeanfield.tracker import (
    FLAG_AMBIGUOUS,
    FLAG_OK,
    TrackPoint,
    detect_soliton,
    fitted_speed,
    measure_edges,
    measure_phase_shift,
    plateau_present,
    read_track_csv,
    track,
    write_track_csv,
)

GRID = Grid(-100.0, 100.0, 4096)
W = WellSpec(-1.0, 20.0)


def field(a, x0, background=0.0, t=0.0, grid=GRID):
    return WaveField(grid, background + soliton_profile(grid.x, a, x0), t)


def test_detect_exact_soliton():
    pt = detect_soliton(field(2.0, 3.3), (-20, 20))
    assert pt.a_meas == pytest.approx(2.0, abs=1e-3)
    assert abs(pt.x_peak - 3.3) <= GRID.dx / 2
    assert pt.ubar_local == pytest.approx(0.0, abs=1e-5)
    assert pt.flag == FLAG_OK


def test_detect_on_floor():
    u = soliton_profile(GRID.x, 10.0, 0.0) + np.where(np.abs(GRID.x) < 60, -1.0, 0.0)
    pt = detect_soliton(WaveField(GRID, u), (-20, 20))
    assert pt.a_meas == pytest.approx(10.0, abs=1e-2)
    assert pt.ubar_local == pytest.approx(-1.0, abs=1e-4)


def test_flat_field_has_no_peak():
    with pytest.raises(NoPeakError):
        detect_soliton(WaveField(GRID, np.full(GRID.n, 0.3)), (-20, 20))
    with pytest.raises(NoPeakError):
        detect_soliton(field(2.0, 0.0), (50.0, 50.01))


def test_two_equal_peaks_are_ambiguous():
    u = soliton_profile(GRID.x, 2.0, -5.0) + soliton_profile(GRID.x, 1.9, 5.0)
    with pytest.raises(AmbiguousPeakError):
        detect_soliton(WaveField(GRID, u), (-20, 20))


@settings(max_examples=40, deadline=None)
@given(s=st.floats(-30.0, 30.0))
def test_translation_equivariance(s):
    base = detect_soliton(field(2.0, 0.0), (-20, 20)).x_peak
    moved = detect_soliton(field(2.0, s), (s - 20, s + 20)).x_peak
    assert abs(moved - base - s) <= GRID.dx / 2


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-2.0, 2.0))
def test_constant_shift_invariance(c):
    a0 = detect_soliton(field(1.5, 1.0), (-20, 20)).a_meas
    a1 = detect_soliton(field(1.5, 1.0, background=c), (-20, 20)).a_meas
    assert abs(a1 - a0) <= 1e-6


def synthetic_run(a=2.0, x0=-50.0, times=np.arange(0.0, 20.01, 0.5)):
    return [field(a, x0 + 2 * a * t, t=t) for t in times]


def test_track_free_soliton():
    pts = track(synthetic_run(), -50.0, 2.0)
    assert all(p.ok for p in pts)
    t = [p.t for p in pts]
    assert all(b > a for a, b in zip(t, t[1:]))
    assert fitted_speed(pts) == pytest.approx(4.0, rel=1e-3)


def test_track_with_predictor_and_gap():
    snaps = synthetic_run()
    # replace one snapshot by two comparable peaks: flagged, never interpolated
    bad = snaps[10]
    snaps[10] = WaveField(GRID, bad.u + soliton_profile(GRID.x, 2.0, -30.0 + 5.0), bad.t)
    pts = track(snaps, -50.0, 2.0, speed=lambda t: 4.0)
    assert pts[10].flag == FLAG_AMBIGUOUS and math.isnan(pts[10].x_peak)
    assert all(p.ok for i, p in enumerate(pts) if i != 10)


def test_track_rejects_unordered():
    snaps = synthetic_run(times=[0.0, 1.0, 0.5])
    with pytest.raises(ValueError):
        track(snaps, -50.0, 2.0)


def test_track_csv_round_trip(tmp_path):
    pts = [TrackPoint(0.5, 1.25, 2.0, -0.1), TrackPoint(1.0, math.nan, math.nan, math.nan, FLAG_AMBIGUOUS)]
    path = tmp_path / "track.csv"
    write_track_csv(path, pts)
    assert path.read_text().splitlines()[0] == "t,x_peak,a_meas,ubar_local,flag"
    back = read_track_csv(path)
    assert back[0] == pts[0]
    assert back[1].flag == FLAG_AMBIGUOUS and math.isnan(back[1].x_peak)


def test_phase_shift_on_synthetic_track():
    ref = lambda t: -50.0 + 4.0 * t  # noqa: E731
    pts = [TrackPoint(t, ref(t) + (2.5 if t >= 8 else 0.0), 2.0, 0.0) for t in np.arange(0, 20, 0.5)]
    assert measure_phase_shift(pts, ref, 8.0) == pytest.approx(2.5, abs=1e-12)
    control = [TrackPoint(t, ref(t), 2.0, 0.0) for t in np.arange(0, 20, 0.5)]
    assert measure_phase_shift(control, ref, 8.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InsufficientTailError):
        measure_phase_shift(pts, ref, 18.0)
    with pytest.raises(InsufficientTailError):
        measure_phase_shift([], ref, 0.0)


def synthetic_bare(t):
    """Simple-wave mean plus an oscillatory front whose envelope grows linearly from x_L to x_P."""
    b = boundaries(W, t)
    x = GRID.x
    u = np.where((x > b.x_P) & (x < W.l), np.clip((x - W.l) / (6 * t), W.U0, 0.0), 0.0)
    front = (x > b.x_L) & (x <= b.x_P)
    env = 2.0 * (x - b.x_L) / (b.x_P - b.x_L)
    # crests land on x_P exactly
    u = u + np.where(front, env * np.cos(np.pi * (x - b.x_P) / 1.5) ** 2, 0.0)
    return WaveField(GRID, u, t)


def test_measure_edges_on_synthetic_field():
    e = measure_edges(synthetic_bare(3.0), W)
    b = boundaries(W, 3.0)
    assert e.x_R == pytest.approx(b.x_R, abs=2 * GRID.dx)
    assert e.x_P_prime == pytest.approx(b.x_P_prime, abs=2 * GRID.dx)
    assert e.x_P == pytest.approx(b.x_P, abs=GRID.dx)
    assert e.x_L == pytest.approx(b.x_L, rel=0.1)
    assert e.missing == []
    assert plateau_present(synthetic_bare(3.0), W)


def test_measure_edges_at_time_zero():
    e = measure_edges(WaveField(GRID, np.zeros(GRID.n), 0.0), W)
    assert e.as_tuple() == (0.0, 0.0, 20.0, 20.0)
