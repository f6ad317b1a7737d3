"""SVG overlay of a report: field heatmap, region boundaries and soliton trajectory.

matplotlib is an optional dependency, imported only here.
"""

import numpy as np

from .meanfield import WellSpec, boundaries, critical_time

BOUNDARY_CURVES = ("x_L", "x_P pre-critical", "x_P post-critical", "x_P_prime", "x_R")


def boundary_curves(well: WellSpec, t_end: float, n: int = 400) -> dict:
    """Region-boundary polylines (t, x) over (0, t_end], the x_P curve split at t*."""
    ts = np.linspace(t_end / n, t_end, n)
    t_star = critical_time(well)
    cols = {name: ([], []) for name in BOUNDARY_CURVES}
    for t in ts:
        b = boundaries(well, float(t))
        pre = t < t_star
        cols["x_L"][0].append(t)
        cols["x_L"][1].append(b.x_L)
        key = "x_P pre-critical" if pre else "x_P post-critical"
        cols[key][0].append(t)
        cols[key][1].append(b.x_P)
        if pre:
            cols["x_P_prime"][0].append(t)
            cols["x_P_prime"][1].append(b.x_P_prime)
        cols["x_R"][0].append(t)
        cols["x_R"][1].append(b.x_R)
    return {k: (np.array(v[0]), np.array(v[1])) for k, v in cols.items() if v[0]}


def overlay_svg(report, path: str) -> str:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cfg = report.config
    well = WellSpec(cfg["U0"], cfg["l"])
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    snaps = report.snapshots
    if snaps:
        step = max(1, len(snaps) // 300)
        sub = snaps[::step]
        x = sub[0].x
        stride = max(1, x.size // 1000)
        img = np.array([s.u[::stride] for s in sub])
        ax.pcolormesh(x[::stride], [s.t for s in sub], img, shading="auto", cmap="viridis",
                      rasterized=True)
    for name, (t, xb) in boundary_curves(well, cfg["t_end"]).items():
        ax.plot(xb, t, "k--", lw=0.9, gid=f"boundary:{name}")
    rows = report.trajectory_rows
    if rows:
        t = np.array([r["t"] for r in rows], dtype=float)
        xp = np.array([r["x_pred"] for r in rows], dtype=float)
        ax.plot(xp, t, color="tab:red", lw=1.4, gid="trajectory:predicted")
        xm = np.array([r["x_meas"] for r in rows], dtype=float)
        if np.any(np.isfinite(xm)):
            ax.plot(xm, t, ".", color="white", ms=1.5, gid="track:measured")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(report.label)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
