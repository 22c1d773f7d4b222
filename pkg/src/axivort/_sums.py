"""Numba kernels for the O(N*M) Biot-Savart style pair sums.

The one-variable reduction F = a^{-1/2} G(u), u = b/a (see ``elliptic``)
lets the inner loops run off cubic-Hermite tables of

    H  = G/u,   G1 = dG/du,   G2 = d2G/du2,   H1 = dH/du

on a uniform grid in xi = -ln(1 - u).  H and G1 suffice for stream and
velocity sums; the gradient sweep also reads G2 and H1.  Near u = 1 the
functions grow like exp(k*xi), which cubic Hermite interpolation tracks
with bounded *relative* error; near u = 0 the table rows are generated
from the power series, so the axis limits come out exact.  Table nodes
come from the AGM reference path in ``elliptic``; the build is cached
per process.

Summation order is fixed (sequential over sources per target), so
results are deterministic for a given field.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, types
from numba.extending import intrinsic
from llvmlite import ir as _lir

from . import elliptic

XI_MAX = 36.0
DXI = 1.0 / 512.0
INV_DXI = 512.0
N_ROWS = int(round(XI_MAX / DXI))
TWO_PI = 2.0 * np.pi
FOUR_PI_INV = 1.0 / (4.0 * np.pi)
_LN2 = 0.6931471805599453
_SQRT2 = 1.4142135623730951


@intrinsic
def _f64_to_i64(typingctx, val):
    sig = types.int64(types.float64)

    def codegen(context, builder, signature, args):
        return builder.bitcast(args[0], _lir.IntType(64))

    return sig, codegen


@intrinsic
def _i64_to_f64(typingctx, val):
    sig = types.float64(types.int64)

    def codegen(context, builder, signature, args):
        return builder.bitcast(args[0], _lir.DoubleType())

    return sig, codegen


@njit(cache=True, fastmath=True, inline="always")
def _negln(x):
    """-ln(x) for normal x in (0, 1]; exponent split + atanh series."""
    bits = _f64_to_i64(x)
    e = ((bits >> 52) & 0x7FF) - 1023
    m = _i64_to_f64((bits & 0x000FFFFFFFFFFFFF) | 0x3FF0000000000000)
    if m > _SQRT2:   # recenters ln(m) around 0; compiles to a select
        m *= 0.5
        e += 1
    s = (m - 1.0) / (m + 1.0)
    s2 = s * s
    p = 2.0 * s * (1.0 + s2 * (1.0 / 3.0 + s2 * (0.2 + s2 * (1.0 / 7.0 + s2 * (
        1.0 / 9.0 + s2 * (1.0 / 11.0 + s2 * (1.0 / 13.0 + s2 / 15.0)))))))
    return -(e * _LN2 + p)


# --- table construction -----------------------------------------------------

_TABLES = {}


def _node_functions(xi):
    """(H, G1, G2, G3, H1, H2) at table nodes, series below u = 0.1."""
    om = np.exp(-xi)
    u = -np.expm1(-xi)
    out = np.zeros((6, xi.size))
    lo = u < 0.1
    hi = ~lo
    if np.any(hi):
        vals = elliptic.g_functions(om[hi])
        for k in range(6):
            out[k][hi] = vals[k]
    if np.any(lo):
        beta = elliptic.series_coefficients()
        ul = u[lo]
        H = np.zeros_like(ul)
        G1 = np.zeros_like(ul)
        G2 = np.zeros_like(ul)
        G3 = np.zeros_like(ul)
        H1 = np.zeros_like(ul)
        H2 = np.zeros_like(ul)
        for j, c in enumerate(beta):
            p = ul ** (2 * j)
            H += c * p
            G1 += c * (2 * j + 1) * p
            H1 += c * 2 * j * np.where(ul > 0, p / np.where(ul > 0, ul, 1.0), 0.0)
            if j >= 1:
                pm = ul ** (2 * j - 1)
                G2 += c * (2 * j + 1) * (2 * j) * pm
                H2 += c * 2 * j * (2 * j - 1) * ul ** (2 * j - 2)
                if 2 * j - 1 >= 1:
                    G3 += c * (2 * j + 1) * (2 * j) * (2 * j - 1) * ul ** (2 * j - 2)
        for k, v in enumerate((H, G1, G2, G3, H1, H2)):
            out[k][lo] = TWO_PI * v
    return out


def _hermite_rows(f, d):
    """Per-interval coefficients (f0, d0, c2, c3) for p(t) = f0 + d0 t + ..."""
    f0, f1 = f[:-1], f[1:]
    d0, d1 = d[:-1], d[1:]
    df = (f1 - f0) * INV_DXI
    c2 = (3.0 * df - 2.0 * d0 - d1) * INV_DXI
    c3 = (d0 + d1 - 2.0 * df) * INV_DXI * INV_DXI
    return np.stack([f0, d0, c2, c3], axis=1)


def kernel_tables():
    """(TV, TG): velocity table rows [H, G1], gradient rows [H, G1, G2, H1]."""
    if "TV" not in _TABLES:
        xi = DXI * np.arange(N_ROWS + 1)
        H, G1, G2, G3, H1, H2 = _node_functions(xi)
        om = np.exp(-xi)
        rows = {
            "H": _hermite_rows(H, H1 * om),
            "G1": _hermite_rows(G1, G2 * om),
            "G2": _hermite_rows(G2, G3 * om),
            "H1": _hermite_rows(H1, H2 * om),
        }
        _TABLES["TV"] = np.ascontiguousarray(
            np.concatenate([rows["H"], rows["G1"]], axis=1))
        _TABLES["TG"] = np.ascontiguousarray(
            np.concatenate([rows["H"], rows["G1"], rows["G2"], rows["H1"]], axis=1))
    return _TABLES["TV"], _TABLES["TG"]


# --- per-pair primitives ----------------------------------------------------

@njit(cache=True, fastmath=True, inline="always")
def _hg1(T, om):
    """(H, G1) from the velocity table; row 0 covers u -> 0 exactly."""
    xi = _negln(om)
    if xi >= XI_MAX:
        xi = XI_MAX - 1e-9
    x = xi * INV_DXI
    ii = int(x)
    t = (x - ii) * DXI
    H = ((T[ii, 3] * t + T[ii, 2]) * t + T[ii, 1]) * t + T[ii, 0]
    G1 = ((T[ii, 7] * t + T[ii, 6]) * t + T[ii, 5]) * t + T[ii, 4]
    return H, G1


@njit(cache=True, fastmath=True, inline="always")
def _hg4(T, om):
    """(H, G1, G2, H1) from the gradient table."""
    xi = _negln(om)
    if xi >= XI_MAX:
        xi = XI_MAX - 1e-9
    x = xi * INV_DXI
    ii = int(x)
    t = (x - ii) * DXI
    H = ((T[ii, 3] * t + T[ii, 2]) * t + T[ii, 1]) * t + T[ii, 0]
    G1 = ((T[ii, 7] * t + T[ii, 6]) * t + T[ii, 5]) * t + T[ii, 4]
    G2 = ((T[ii, 11] * t + T[ii, 10]) * t + T[ii, 9]) * t + T[ii, 8]
    H1 = ((T[ii, 15] * t + T[ii, 14]) * t + T[ii, 13]) * t + T[ii, 12]
    return H, G1, G2, H1


# --- sweeps -----------------------------------------------------------------

@njit(cache=True, fastmath=True)
def self_velocity(r, z, w, d2, T, ur, uz):
    """Velocity at the particles themselves (symmetric N^2/2 sweep).

    w[j] = q_j r_j vol_j / (2 pi); d2 = blob delta squared (> 0).
    """
    n = r.shape[0]
    for i in range(n):
        ur[i] = 0.0
        uz[i] = 0.0
    for i in range(n):
        rx = r[i]
        zx = z[i]
        wi = w[i]
        uri = 0.0
        uzi = 0.0
        for j in range(i + 1, n):
            ry = r[j]
            dz = zx - z[j]
            dr = rx - ry
            b = 2.0 * rx * ry
            amb = dr * dr + dz * dz + d2
            a = amb + b
            inv_a = 1.0 / a
            u = b * inv_a
            om = amb * inv_a
            s = math.sqrt(inv_a)
            H, G1 = _hg1(T, om)
            s3 = s * inv_a
            Fa = -s3 * u * (0.5 * H + G1)
            Fb = s3 * G1
            S0n = 2.0 * s * inv_a * H
            dza = 2.0 * dz * Fa
            uri -= dza * w[j]
            uzi += (2.0 * rx * Fa + 2.0 * ry * Fb + S0n * ry) * w[j]
            ur[j] += dza * wi
            uz[j] += (2.0 * ry * Fa + 2.0 * rx * Fb + S0n * rx) * wi
        ur[i] += uri
        uz[i] += uzi
    for i in range(n):
        rx = r[i]
        b = 2.0 * rx * rx
        amb = d2
        a = amb + b
        inv_a = 1.0 / a
        u = b * inv_a
        om = amb * inv_a
        s = math.sqrt(inv_a)
        H, G1 = _hg1(T, om)
        s3 = s * inv_a
        Fa = -s3 * u * (0.5 * H + G1)
        Fb = s3 * G1
        S0n = 2.0 * s * inv_a * H
        uz[i] += (2.0 * rx * (Fa + Fb) + S0n * rx) * w[i]
        ur[i] *= FOUR_PI_INV
        uz[i] *= FOUR_PI_INV


@njit(cache=True, fastmath=True)
def eval_stream(tr, tz, sr, sz, w, d2, T, psi, psi_r):
    """Stream function and psi/r at arbitrary targets."""
    nt = tr.shape[0]
    ns = sr.shape[0]
    for i in range(nt):
        rx = tr[i]
        zx = tz[i]
        ps = 0.0
        pr = 0.0
        for j in range(ns):
            ry = sr[j]
            dz = zx - sz[j]
            dr = rx - ry
            b = 2.0 * rx * ry
            amb = dr * dr + dz * dz + d2
            a = amb + b
            inv_a = 1.0 / a
            u = b * inv_a
            om = amb * inv_a
            s = math.sqrt(inv_a)
            H, G1 = _hg1(T, om)
            ps += s * u * H * w[j]
            pr += s * (2.0 * ry * inv_a) * H * w[j]
        psi[i] = ps * FOUR_PI_INV
        psi_r[i] = pr * FOUR_PI_INV


@njit(cache=True, fastmath=True)
def eval_velocity(tr, tz, sr, sz, w, d2, T, ur, uz, uror):
    """(u_r, u_z, u_r/r) at arbitrary targets; u_r/r uses the stable
    near-axis form and equals d_r u_r in the limit r -> 0."""
    nt = tr.shape[0]
    ns = sr.shape[0]
    for i in range(nt):
        rx = tr[i]
        zx = tz[i]
        sur = 0.0
        suz = 0.0
        sor = 0.0
        for j in range(ns):
            ry = sr[j]
            dz = zx - sz[j]
            dr = rx - ry
            b = 2.0 * rx * ry
            amb = dr * dr + dz * dz + d2
            a = amb + b
            inv_a = 1.0 / a
            u = b * inv_a
            om = amb * inv_a
            s = math.sqrt(inv_a)
            H, G1 = _hg1(T, om)
            s3 = s * inv_a
            W = 0.5 * H + G1
            Fa = -s3 * u * W
            Fb = s3 * G1
            S0n = 2.0 * s * inv_a * H
            FaOr = -s3 * (2.0 * ry * inv_a) * W
            sur -= 2.0 * dz * Fa * w[j]
            suz += (2.0 * rx * Fa + 2.0 * ry * Fb + S0n * ry) * w[j]
            sor -= 2.0 * dz * FaOr * w[j]
        ur[i] = sur * FOUR_PI_INV
        uz[i] = suz * FOUR_PI_INV
        uror[i] = sor * FOUR_PI_INV


@njit(cache=True, fastmath=True)
def eval_gradient(tr, tz, sr, sz, w, d2, T, out):
    """Meridian velocity gradient plus d_r(u_r/r), d_z(u_r/r).

    out rows: [d_r u_r, d_z u_r, d_r u_z, d_z u_z, d_r(u_r/r), d_z(u_r/r)].
    """
    nt = tr.shape[0]
    ns = sr.shape[0]
    for i in range(nt):
        rx = tr[i]
        zx = tz[i]
        a11 = 0.0
        a12 = 0.0
        a21 = 0.0
        a22 = 0.0
        b1 = 0.0
        b2 = 0.0
        for j in range(ns):
            ry = sr[j]
            dz = zx - sz[j]
            dr = rx - ry
            b = 2.0 * rx * ry
            amb = dr * dr + dz * dz + d2
            a = amb + b
            inv_a = 1.0 / a
            u = b * inv_a
            om = amb * inv_a
            s = math.sqrt(inv_a)
            H, G1, G2, H1 = _hg4(T, om)
            s3 = s * inv_a
            s5 = s3 * inv_a
            W = 0.5 * H + G1
            Fa = -s3 * u * W
            Fb = s3 * G1
            Faa = s5 * u * (0.75 * H + 3.0 * G1 + u * G2)
            Fab = -s5 * (1.5 * G1 + u * G2)
            Fbb = s5 * G2
            ry2_ia = 2.0 * ry * inv_a
            FaOr = -s3 * ry2_ia * W
            FaaOr = s5 * ry2_ia * (0.75 * H + 3.0 * G1 + u * G2)
            durx = 2.0 * inv_a * (ry - rx * u)
            dFrx = 2.0 * ry * (-3.0 * rx * s5 * H + s3 * H1 * durx)
            dFarx = -2.0 * ry * (-5.0 * rx * s5 * inv_a * W
                                 + s5 * (0.5 * H1 + G2) * durx)
            mix = 4.0 * dz * (rx * Faa + ry * Fab)
            wj = w[j]
            a11 -= mix * wj
            a12 -= (2.0 * Fa + 4.0 * dz * dz * Faa) * wj
            a21 += (2.0 * Fa + 4.0 * rx * rx * Faa + 8.0 * rx * ry * Fab
                    + 4.0 * ry * ry * Fbb + dFrx) * wj
            a22 += (mix + 2.0 * dz * FaOr) * wj
            b1 -= 2.0 * dz * dFarx * wj
            b2 -= (2.0 * FaOr + 4.0 * dz * dz * FaaOr) * wj
        out[i, 0] = a11 * FOUR_PI_INV
        out[i, 1] = a12 * FOUR_PI_INV
        out[i, 2] = a21 * FOUR_PI_INV
        out[i, 3] = a22 * FOUR_PI_INV
        out[i, 4] = b1 * FOUR_PI_INV
        out[i, 5] = b2 * FOUR_PI_INV
