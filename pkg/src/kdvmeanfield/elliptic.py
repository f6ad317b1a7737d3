"""Elliptic integrals and Jacobi elliptic functions in the parameter convention.

Every function takes the parameter ``m`` (not the modulus ``k = sqrt(m)``).
Complete and incomplete integrals are evaluated through Carlson's symmetric
forms R_F and R_D; the Jacobi functions use the descending Landen (AGM)
transformation.
"""

import numpy as np

from .exceptions import EllipticDomainError

__all__ = [
    "carlson_rf",
    "carlson_rd",
    "ellip_K",
    "ellip_E",
    "ellip_F_incomplete",
    "ellip_E_incomplete",
    "jacobi_sncndn",
    "jacobi_cn",
    "jacobi_zeta",
]

_RF_TOL = 8e-4
_RD_TOL = 5e-4
_MAX_ITER = 200


def _unwrap(value):
    return float(value) if np.ndim(value) == 0 else value


def carlson_rf(x, y, z):
    """Carlson's R_F(x, y, z) for non-negative arguments (at most one zero)."""
    xt, yt, zt = (np.array(v, dtype=float) for v in np.broadcast_arrays(x, y, z))
    if np.any(xt < 0) or np.any(yt < 0) or np.any(zt < 0):
        raise EllipticDomainError("carlson_rf requires non-negative arguments")
    for _ in range(_MAX_ITER):
        sx, sy, sz = np.sqrt(xt), np.sqrt(yt), np.sqrt(zt)
        lam = sx * (sy + sz) + sy * sz
        xt = 0.25 * (xt + lam)
        yt = 0.25 * (yt + lam)
        zt = 0.25 * (zt + lam)
        ave = (xt + yt + zt) / 3.0
        dx, dy, dz = (ave - xt) / ave, (ave - yt) / ave, (ave - zt) / ave
        if np.max(np.abs([dx, dy, dz])) <= _RF_TOL:
            break
    else:
        raise EllipticDomainError("carlson_rf did not converge (two zero arguments?)")
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    out = (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / np.sqrt(ave)
    return _unwrap(out)


def carlson_rd(x, y, z):
    """Carlson's R_D(x, y, z); x, y >= 0 with at most one zero, z > 0."""
    xt, yt, zt = (np.array(v, dtype=float) for v in np.broadcast_arrays(x, y, z))
    if np.any(xt < 0) or np.any(yt < 0) or np.any(zt <= 0):
        raise EllipticDomainError("carlson_rd requires x, y >= 0 and z > 0")
    total = np.zeros_like(xt)
    fac = 1.0
    for _ in range(_MAX_ITER):
        sx, sy, sz = np.sqrt(xt), np.sqrt(yt), np.sqrt(zt)
        lam = sx * (sy + sz) + sy * sz
        total = total + fac / (sz * (zt + lam))
        fac *= 0.25
        xt = 0.25 * (xt + lam)
        yt = 0.25 * (yt + lam)
        zt = 0.25 * (zt + lam)
        ave = 0.2 * (xt + yt + 3.0 * zt)
        dx, dy, dz = (ave - xt) / ave, (ave - yt) / ave, (ave - zt) / ave
        if np.max(np.abs([dx, dy, dz])) <= _RD_TOL:
            break
    else:
        raise EllipticDomainError("carlson_rd did not converge")
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + ec + ec
    c1, c2, c3, c4 = 3.0 / 14.0, 1.0 / 6.0, 9.0 / 22.0, 3.0 / 26.0
    c5, c6 = 0.25 * c3, 1.5 * c4
    series = 1.0 + ed * (-c1 + c5 * ed - c6 * dz * ee) + dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea))
    out = 3.0 * total + fac * series / (ave * np.sqrt(ave))
    return _unwrap(out)


def _check_m(m, allow_one):
    m_arr = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(m_arr)) or np.any(m_arr < 0.0):
        raise EllipticDomainError(f"parameter m must lie in [0, 1], got {m}")
    if allow_one:
        if np.any(m_arr > 1.0):
            raise EllipticDomainError(f"parameter m must lie in [0, 1], got {m}")
    elif np.any(m_arr >= 1.0):
        raise EllipticDomainError(f"K(m) requires 0 <= m < 1, got {m}")
    return m_arr


def _check_psi(psi):
    psi_arr = np.asarray(psi, dtype=float)
    if np.any(psi_arr < 0.0) or np.any(psi_arr > np.pi / 2 + 1e-15):
        raise EllipticDomainError(f"amplitude psi must lie in [0, pi/2], got {psi}")
    return np.minimum(psi_arr, np.pi / 2)


def ellip_K(m):
    """Complete elliptic integral of the first kind, 0 <= m < 1."""
    m_arr = _check_m(m, allow_one=False)
    return _unwrap(carlson_rf(0.0, 1.0 - m_arr, 1.0))


def ellip_E(m):
    """Complete elliptic integral of the second kind, 0 <= m <= 1."""
    m_arr = _check_m(m, allow_one=True)
    one = m_arr == 1.0
    mm = np.where(one, 0.5, m_arr)
    val = carlson_rf(0.0, 1.0 - mm, 1.0) - mm / 3.0 * carlson_rd(0.0, 1.0 - mm, 1.0)
    val = np.where(one, 1.0, val)
    return _unwrap(val)


def ellip_F_incomplete(psi, m):
    """Incomplete integral of the first kind F(psi, m), psi in [0, pi/2]."""
    psi_arr = _check_psi(psi)
    m_arr = _check_m(m, allow_one=True)
    if np.any((m_arr == 1.0) & (psi_arr == np.pi / 2)):
        raise EllipticDomainError("F(pi/2, 1) diverges")
    s, c = np.sin(psi_arr), np.cos(psi_arr)
    val = s * carlson_rf(c * c, 1.0 - m_arr * s * s, 1.0)
    return _unwrap(val)


def ellip_E_incomplete(psi, m):
    """Incomplete integral of the second kind E(psi, m), psi in [0, pi/2]."""
    psi_arr = _check_psi(psi)
    m_arr = _check_m(m, allow_one=True)
    psi_arr, m_arr = np.broadcast_arrays(psi_arr, m_arr)
    # E(psi, 1) = sin(psi); R_F(0, 0, 1) would diverge at psi = pi/2
    degenerate = m_arr == 1.0
    mm = np.where(degenerate, 0.5, m_arr)
    s, c = np.sin(psi_arr), np.cos(psi_arr)
    y = 1.0 - mm * s * s
    val = s * carlson_rf(c * c, y, 1.0) - mm / 3.0 * s**3 * carlson_rd(c * c, y, 1.0)
    val = np.where(degenerate, s, val)
    return _unwrap(val)


def jacobi_sncndn(u, m):
    """Return (sn, cn, dn) at argument(s) ``u`` for a scalar parameter ``m``."""
    m = float(m)
    if not 0.0 <= m <= 1.0:
        raise EllipticDomainError(f"parameter m must lie in [0, 1], got {m}")
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise EllipticDomainError("jacobi functions require finite arguments")
    if m == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    if m == 1.0:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech
    a, b, c = 1.0, np.sqrt(1.0 - m), np.sqrt(m)
    ratios = []
    while abs(c) > 1e-17 * a and len(ratios) < 64:
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        ratios.append(c / a)
    phi = (2.0 ** len(ratios)) * a * u
    for ratio in reversed(ratios):
        phi = 0.5 * (phi + np.arcsin(ratio * np.sin(phi)))
    sn, cn = np.sin(phi), np.cos(phi)
    return sn, cn, np.sqrt(1.0 - m * sn * sn)


def jacobi_cn(u, m):
    """Jacobi cn(u | m)."""
    cn = jacobi_sncndn(u, m)[1]
    return _unwrap(cn)


def jacobi_zeta(psi, m):
    """Jacobi zeta Z(psi, m) = E(psi, m) - E(m)/K(m) F(psi, m), 0 <= m < 1."""
    _check_m(m, allow_one=False)
    ratio = ellip_E(m) / ellip_K(m)
    val = ellip_E_incomplete(psi, m) - ratio * ellip_F_incomplete(psi, m)
    return _unwrap(val)
