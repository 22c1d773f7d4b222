"""Angular Green-function kernel and vorticity-to-velocity recovery.

For an axisymmetric azimuthal vorticity field the stream function in the
meridian plane is

    psi(x) = 1/(4 pi) * integral F(x, y) q(y) r_y^2 dr_y dz_y,

where q = omega_theta / r and F is the theta-integral of
cos(t)/sqrt(a - b cos t) (see ``elliptic``).  The 1/(4 pi) makes
-Laplace(psi e_theta) = omega_theta e_theta; the manufactured-solution
tests pin this normalization down.  Velocity follows from

    u_r = -d_z psi,      u_z = d_r psi + psi/r,

evaluated with analytically differentiated kernels; the psi/r terms use
forms that stay finite on the axis, so u_r(0, z) = 0 holds exactly.

Particles are blob-regularized by adding delta^2 inside the kernel
square root (Rosenhead-Moore); delta = 0 is allowed only when targets
stay away from sources.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import _sums, elliptic
from .fields import MeridianPoint, VelocitySample, as_particles

__all__ = [
    "KernelConfig",
    "KernelValue",
    "angular_kernel",
    "stream_eval",
    "velocity_eval",
    "velocity_gradient_eval",
    "stream_field",
    "velocity_field",
    "gradient_field",
    "particle_weights",
]


@dataclass(frozen=True)
class KernelConfig:
    """Evaluation policy for the angular kernel.

    quad_tol: absolute tolerance of the adaptive quadrature path.
    use_elliptic: route angular_kernel through the AGM elliptic path.
    blob_delta: desingularization radius delta (0 = exact singular kernel).
    near_field_switch: separation ratio below which the quadrature path
        raises its subdivision budget.
    """

    quad_tol: float = 1e-10
    use_elliptic: bool = True
    blob_delta: float = 0.0
    near_field_switch: float = 0.05

    def __post_init__(self):
        if not (self.quad_tol > 0.0):
            raise ValueError("quad_tol must be positive")
        if self.blob_delta < 0.0:
            raise ValueError("blob_delta must be nonnegative")
        if not (self.near_field_switch > 0.0):
            raise ValueError("near_field_switch must be positive")


@dataclass(frozen=True)
class KernelValue:
    """Angular kernel value and its target-coordinate derivatives."""

    F: float
    dF_dr: float
    dF_dz: float


def _quad_moment(a, b, s_exp, m_exp, tol, limit):
    f = lambda t: math.cos(t) ** m_exp * (a - b * math.cos(t)) ** (-s_exp)
    val, err, info = quad(f, -np.pi, np.pi, epsabs=tol, epsrel=0.0,
                          limit=limit, full_output=True)[:3]
    if err > max(tol, 1e-13 * abs(val)) * 50.0:
        raise RuntimeError(
            f"quadrature failed to converge: achieved error estimate {err:.3e}"
        )
    return val


def angular_kernel(x, y, cfg):
    """F(x, y) and its derivatives w.r.t. the target coordinates.

    Elliptic path (cfg.use_elliptic) evaluates complete elliptic
    integrals by the AGM iteration; otherwise each component is an
    adaptive Gauss-Kronrod quadrature with absolute tolerance
    cfg.quad_tol.  Raises on singular evaluations (delta = 0 and
    coincident points).
    """
    rx, zx = x.r, x.z
    ry, zy = y.r, y.z
    dz = zx - zy
    d2 = cfg.blob_delta ** 2
    b = 2.0 * rx * ry
    amb = (rx - ry) ** 2 + dz * dz + d2
    if amb <= 0.0 and b <= 0.0:
        raise ValueError("singular evaluation")
    if amb <= 0.0:
        raise ValueError("singular evaluation")
    a = amb + b
    if cfg.use_elliptic:
        p = elliptic.kernel_parts(rx, ry, dz, d2)
        F = p["F"]
        dF_dr = 2.0 * rx * p["Fa"] + 2.0 * ry * p["Fb"]
        dF_dz = 2.0 * dz * p["Fa"]
        return KernelValue(F, dF_dr, dF_dz)
    # near-singular integrands get a larger subdivision budget
    limit = 200
    if amb < (cfg.near_field_switch ** 2) * a:
        limit = 800
    tol = cfg.quad_tol
    F = _quad_moment(a, b, 0.5, 1, tol, limit)
    I3c = _quad_moment(a, b, 1.5, 1, tol, limit)
    I3cc = _quad_moment(a, b, 1.5, 2, tol, limit)
    dF_dr = -rx * I3c + ry * I3cc
    dF_dz = -dz * I3c
    return KernelValue(F, dF_dr, dF_dz)


def particle_weights(field):
    """Summation weights w_j = q_j r_j vol_j / (2 pi).

    These quadrate psi = 1/(4 pi) * int F q r^2 dr dz with the particle
    meridian areas vol / (2 pi r).
    """
    p = as_particles(field)
    return p.q * p.r * p.vol / (2.0 * np.pi)


def _targets(x):
    if isinstance(x, MeridianPoint):
        return np.array([x.r]), np.array([x.z]), True
    r, z = x
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    return r, z, False


def stream_field(field, tr, tz, cfg):
    """(psi, psi/r) arrays at target points."""
    p = as_particles(field)
    w = particle_weights(p)
    TV, _ = _sums.kernel_tables()
    tr = np.ascontiguousarray(tr, dtype=np.float64)
    tz = np.ascontiguousarray(tz, dtype=np.float64)
    psi = np.empty_like(tr)
    psir = np.empty_like(tr)
    _sums.eval_stream(tr, tz, p.r, p.z, w, cfg.blob_delta ** 2, TV, psi, psir)
    return psi, psir


def velocity_field(field, tr, tz, cfg):
    """(u_r, u_z, u_r/r) arrays at target points."""
    p = as_particles(field)
    w = particle_weights(p)
    TV, _ = _sums.kernel_tables()
    tr = np.ascontiguousarray(tr, dtype=np.float64)
    tz = np.ascontiguousarray(tz, dtype=np.float64)
    ur = np.empty_like(tr)
    uz = np.empty_like(tr)
    uror = np.empty_like(tr)
    _sums.eval_velocity(tr, tz, p.r, p.z, w, cfg.blob_delta ** 2, TV, ur, uz, uror)
    return ur, uz, uror


def gradient_field(field, tr, tz, cfg):
    """Gradient entries at targets, columns
    [d_r u_r, d_z u_r, d_r u_z, d_z u_z, d_r(u_r/r), d_z(u_r/r)]."""
    p = as_particles(field)
    w = particle_weights(p)
    _, TG = _sums.kernel_tables()
    tr = np.ascontiguousarray(tr, dtype=np.float64)
    tz = np.ascontiguousarray(tz, dtype=np.float64)
    out = np.empty((tr.size, 6))
    _sums.eval_gradient(tr, tz, p.r, p.z, w, cfg.blob_delta ** 2, TG, out)
    return out


def stream_eval(field, x, cfg):
    """psi at one point; vanishes identically on the axis r = 0."""
    tr, tz, _ = _targets(x)
    psi, _ = stream_field(field, tr, tz, cfg)
    return float(psi[0])


def velocity_eval(field, x, cfg):
    """Meridian velocity at one point; u_r(0, z) = 0 exactly."""
    tr, tz, _ = _targets(x)
    ur, uz, _ = velocity_field(field, tr, tz, cfg)
    return VelocitySample(float(ur[0]), float(uz[0]))


def velocity_gradient_eval(field, x, cfg):
    """2x2 meridian gradient [[d_r u_r, d_z u_r], [d_r u_z, d_z u_z]].

    The trace identity d_r u_r + u_r/r + d_z u_z = 0 holds to rounding
    because the summed kernels cancel pairwise.
    """
    if cfg.blob_delta <= 0.0:
        raise ValueError("velocity_gradient_eval requires blob_delta > 0")
    tr, tz, _ = _targets(x)
    g = gradient_field(field, tr, tz, cfg)
    return np.array([[g[0, 0], g[0, 1]], [g[0, 2], g[0, 3]]])


def self_velocity(field, cfg):
    """(u_r, u_z) at the particles themselves (the advection sweep)."""
    if cfg.blob_delta <= 0.0:
        raise ValueError("self-velocity requires blob_delta > 0")
    p = as_particles(field)
    w = particle_weights(p)
    TV, _ = _sums.kernel_tables()
    ur = np.empty(p.n)
    uz = np.empty(p.n)
    _sums.self_velocity(p.r, p.z, w, cfg.blob_delta ** 2, TV, ur, uz)
    return ur, uz
