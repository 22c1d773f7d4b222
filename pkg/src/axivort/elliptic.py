"""Complete elliptic integrals and the reduced angular kernel.

The azimuthal reduction of the 3D Green function for an axisymmetric
azimuthal source leads to the angular integral

    F(x, y) = int_{-pi}^{pi} cos(t) / sqrt(a - b cos(t)) dt,

with a = r_x^2 + r_y^2 + (z_x - z_y)^2 + delta^2 and b = 2 r_x r_y
(delta is the vortex-blob smoothing radius).  By homogeneity
F = a^{-1/2} G(u) with u = b/a in [0, 1), so a single one-variable
function G and its derivatives carry the whole kernel.

G is evaluated two ways:
  * complete elliptic integrals K, E computed by the arithmetic-geometric
    mean iteration, plus a downward Legendre-style recurrence for the
    moment integrals int cos^m(t) (a - b cos t)^{-s} dt;
  * a power series in u for small u, where the K/E route cancels.

All routines here are plain numpy and serve as the accuracy reference;
the numba fast paths in ``_sums`` are validated against them.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ellipk_agm",
    "ellipe_agm",
    "agm_ke",
    "series_coefficients",
    "kernel_parts",
    "g_functions",
]

# u below this goes through the power series; both routes are good to
# ~1e-13 inside [0.05, 0.2], see tests.
SERIES_SWITCH = 0.12

_AGM_ITERS = 16
_SERIES_TERMS = 14


def _series_beta(n):
    """Coefficients of G(u) = 2*pi*sum_j beta_j u^{2j+1}."""
    beta = np.empty(n)
    beta[0] = 0.25
    for j in range(n - 1):
        beta[j + 1] = (
            beta[j]
            * ((4 * j + 5) * (4 * j + 3))
            / ((4 * j + 6) * (4 * j + 4))
            * (2 * j + 3)
            / (2 * j + 4)
        )
    return beta


_BETA = _series_beta(_SERIES_TERMS)


def series_coefficients():
    """Power-series coefficients beta_j of the angular kernel."""
    return _BETA.copy()


def agm_ke(m, mc=None):
    """Complete elliptic integrals (K, E) for parameter m = k^2.

    Uses the arithmetic-geometric mean: with a_0 = 1, b_0 = sqrt(1 - m),
    c_n = (a_{n-1} - b_{n-1})/2, the iteration converges quadratically and

        K = pi / (2 a_N),   E = K (1 - sum_n 2^{n-1} c_n^2).

    ``mc`` optionally supplies the complement 1 - m exactly (important
    when m is within rounding of 1).  Accepts scalars or arrays.
    """
    m = np.asarray(m, dtype=np.float64)
    if mc is None:
        mc = 1.0 - m
    mc = np.asarray(mc, dtype=np.float64)
    if np.any(mc < 0.0) or np.any(m < 0.0):
        raise ValueError("parameter m must lie in [0, 1]")
    a = np.ones_like(m)
    b = np.sqrt(mc)
    csum = 0.5 * m
    p = 1.0
    for _ in range(_AGM_ITERS):
        c = 0.5 * (a - b)
        ab = a * b
        a, b = 0.5 * (a + b), np.sqrt(ab)
        csum = csum + p * c * c
        p *= 2.0
    K = np.pi / (2.0 * a)
    E = K * (1.0 - csum)
    if K.ndim == 0:
        return float(K), float(E)
    return K, E


def ellipk_agm(m):
    """K(m) by the AGM iteration (parameter convention, m = k^2)."""
    return agm_ke(m)[0]


def ellipe_agm(m):
    """E(m) by the AGM iteration (parameter convention, m = k^2)."""
    return agm_ke(m)[1]


def _moment_chain(a, b, amb):
    """Moment integrals I_{s,m} = int cos^m (a - b cos)^{-s} dt over [-pi, pi].

    ``amb`` is a - b supplied in cancellation-free form.  Returns the
    dictionary of every moment the kernel derivatives need, valid where
    b is bounded away from zero (use the series otherwise).
    """
    apb = a + b
    m = 2.0 * b / apb
    K, E = agm_ke(m, mc=amb / apb)
    s_apb = np.sqrt(apb)
    Pm12 = 4.0 * s_apb * E
    P12 = 4.0 * K / s_apb
    a2b2 = amb * apb
    P32 = Pm12 / a2b2
    P52 = (4.0 * a * P32 - P12) / (3.0 * a2b2)
    P72 = (4.0 * a * P52 - 1.5 * P32) / (2.5 * a2b2)
    M12_1 = (a * P12 - Pm12) / b
    M32_1 = (a * P32 - P12) / b
    M32_2 = (a * M32_1 - M12_1) / b
    M52_1 = (a * P52 - P32) / b
    M52_2 = (a * M52_1 - M32_1) / b
    M52_3 = (a * M52_2 - M32_2) / b
    M72_1 = (a * P72 - P52) / b
    M72_2 = (a * M72_1 - M52_1) / b
    M72_3 = (a * M72_2 - M52_2) / b
    M72_4 = (a * M72_3 - M52_3) / b
    return {
        "F": M12_1,
        "I3c": M32_1,
        "I3cc": M32_2,
        "I5c": M52_1,
        "I5cc": M52_2,
        "I5ccc": M52_3,
        "I7cccc": M72_4,
    }


def _parts_elliptic(a, b, amb):
    ch = _moment_chain(a, b, amb)
    return {
        "F": ch["F"],
        "Fa": -0.5 * ch["I3c"],
        "Fb": 0.5 * ch["I3cc"],
        "Faa": 0.75 * ch["I5c"],
        "Fab": -0.75 * ch["I5cc"],
        "Fbb": 0.75 * ch["I5ccc"],
    }


def _parts_series(a, b):
    """Series route for the same partials; accurate for b/a <~ 0.2."""
    inv_a = 1.0 / a
    u = b * inv_a
    u2 = u * u
    s = np.sqrt(inv_a)
    S0 = np.zeros_like(a)
    S1 = np.zeros_like(a)
    S2 = np.zeros_like(a)
    S3 = np.zeros_like(a)
    S4 = np.zeros_like(a)
    S5 = np.zeros_like(a)
    ub = np.ones_like(a)          # u^{2j}
    ubm = np.zeros_like(a)        # u^{2j-1}, zero placeholder at j = 0
    for j in range(_SERIES_TERMS):
        c = _BETA[j]
        S0 = S0 + c * ub
        S1 = S1 + c * (2 * j + 1.5) * ub
        S2 = S2 + c * (2 * j + 1) * ub
        S3 = S3 + c * (2 * j + 1.5) * (2 * j + 2.5) * ub
        S4 = S4 + c * (2 * j + 1) * (2 * j + 1.5) * ub
        S5 = S5 + c * (2 * j + 1) * (2 * j) * ubm
        ubm = ub * u
        ub = ub * u2
    tp = 2.0 * np.pi * s
    return {
        "F": tp * u * S0,
        "Fa": -tp * inv_a * u * S1,
        "Fb": tp * inv_a * S2,
        "Faa": tp * inv_a * inv_a * u * S3,
        "Fab": -tp * inv_a * inv_a * S4,
        "Fbb": tp * inv_a * inv_a * S5,
    }


def kernel_parts(rx, ry, dz, delta2=0.0):
    """Partial derivatives of the angular kernel w.r.t. a and b.

    Returns dict with F, Fa, Fb, Faa, Fab, Fbb, broadword over numpy
    inputs.  Target-coordinate derivatives follow by the chain rule
    (da/dr_x = 2 r_x, db/dr_x = 2 r_y, da/dz_x = 2 dz).
    """
    rx = np.asarray(rx, dtype=np.float64)
    ry = np.asarray(ry, dtype=np.float64)
    dz = np.asarray(dz, dtype=np.float64)
    b = 2.0 * rx * ry
    amb = (rx - ry) ** 2 + dz * dz + delta2
    a = amb + b
    if np.any(a <= 0.0):
        raise ValueError("singular evaluation: coincident points on the axis")
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    b = np.atleast_1d(b)
    amb = np.atleast_1d(amb)
    if np.any(amb <= 0.0):
        raise ValueError("singular evaluation: coincident points with delta = 0")
    u = b / a
    out = {k: np.empty_like(a) for k in ("F", "Fa", "Fb", "Faa", "Fab", "Fbb")}
    ser = u < SERIES_SWITCH
    ell = ~ser
    if np.any(ser):
        p = _parts_series(a[ser], b[ser])
        for k in out:
            out[k][ser] = p[k]
    if np.any(ell):
        p = _parts_elliptic(a[ell], b[ell], amb[ell])
        for k in out:
            out[k][ell] = p[k]
    if scalar:
        return {k: float(v[0]) for k, v in out.items()}
    return out


def g_functions(om):
    """One-variable kernel functions at u = 1 - om (om given exactly).

    Returns (H, G1, G2, G3, H1, H2) where G(u) = u H(u) is the angular
    kernel at a = 1, G1..G3 are dG/du..d3G/du3 and H1, H2 the first two
    derivatives of H.  Used to build the interpolation tables of the
    fast summation paths.
    """
    om = np.asarray(om, dtype=np.float64)
    u = 1.0 - om
    ch = _moment_chain(1.0 + 0.0 * om, u, om)
    G = ch["F"]
    G1 = 0.5 * ch["I3cc"]
    G2 = 0.75 * ch["I5ccc"]
    G3 = 1.875 * ch["I7cccc"]
    H = G / u
    H1 = (G1 - H) / u
    H2 = (G2 - 2.0 * H1) / u
    return H, G1, G2, G3, H1, H2
