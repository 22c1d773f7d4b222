"""Lagrangian transport of q = omega_theta / r.

q is constant along particle trajectories and the 3D flow is volume
preserving, so a particle's q and vol never change during advection;
only positions move, under the blob-regularized velocity of the whole
particle set.  Every L^p norm of q computed with particle volumes is
therefore conserved bit for bit in remesh-free runs; that exactness is
the point of the particle discretization.

A particle stepping through the axis is reflected (r -> -r, q kept),
consistent with the even extension of q across r = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .fields import (
    GridField,
    NormSpec,
    ParticleField,
    SampledField,
    VelocityGrid,
    as_particles,
    divergence_residual,
    lp_norm,
    remesh,
)
from .kernel import KernelConfig, self_velocity, velocity_field

__all__ = ["SimConfig", "TrajectoryRecord", "advect_step", "simulate", "suggest_dt"]


@dataclass(frozen=True)
class SimConfig:
    """Time-integration parameters.

    remesh_every = 0 disables remeshing; remesh_h = None reuses the
    lattice spacing the particles came from.  snapshot_every thins the
    stored trajectory; monitors are still evaluated at every stored
    snapshot.  probe_n is the per-axis resolution of the velocity probe
    grid used for the divergence monitor (0 disables it).
    """

    dt: float
    t_end: float
    integrator: str = "rk4"
    remesh_every: int = 0
    kernel: KernelConfig = dfield(default_factory=lambda: KernelConfig(blob_delta=0.05))
    monitor_norms: tuple = (NormSpec(1.0), NormSpec(2.0))
    snapshot_every: int = 1
    remesh_h: float | None = None
    remesh_floor: float = 1e-13
    probe_n: int = 16

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ValueError("dt must be positive")
        if not (self.t_end >= self.dt or self.t_end == 0.0):
            raise ValueError("t_end must be >= dt (or exactly 0 for a no-op run)")
        if self.integrator not in ("rk4", "rk2"):
            raise ValueError("integrator must be 'rk4' or 'rk2'")
        if self.remesh_every < 0 or self.snapshot_every < 1:
            raise ValueError("bad cadence")
        if self.kernel.blob_delta <= 0.0:
            raise ValueError("advection requires kernel.blob_delta > 0")


@dataclass
class TrajectoryRecord:
    """Times, field snapshots and monitor series of one run."""

    times: np.ndarray
    snapshots: list
    monitors: dict
    config: SimConfig

    def final(self):
        return self.snapshots[-1]


def _velocity_at(r, z, p, cfg):
    """Velocity of particle set p evaluated at displaced positions (r, z)."""
    moved = ParticleField(np.abs(r), z, p.q, p.vol, lattice_h=p.lattice_h)
    return self_velocity(moved, cfg)


def advect_step(fld, cfg):
    """One Runge-Kutta step; q and vol are carried over untouched."""
    p = as_particles(fld)
    k = cfg.kernel
    dt = cfg.dt
    try:
        if cfg.integrator == "rk2":
            ur1, uz1 = _velocity_at(p.r, p.z, p, k)
            ur2, uz2 = _velocity_at(p.r + 0.5 * dt * ur1, p.z + 0.5 * dt * uz1, p, k)
            r_new = p.r + dt * ur2
            z_new = p.z + dt * uz2
        else:
            ur1, uz1 = _velocity_at(p.r, p.z, p, k)
            ur2, uz2 = _velocity_at(p.r + 0.5 * dt * ur1, p.z + 0.5 * dt * uz1, p, k)
            ur3, uz3 = _velocity_at(p.r + 0.5 * dt * ur2, p.z + 0.5 * dt * uz2, p, k)
            ur4, uz4 = _velocity_at(p.r + dt * ur3, p.z + dt * uz3, p, k)
            r_new = p.r + dt / 6.0 * (ur1 + 2.0 * ur2 + 2.0 * ur3 + ur4)
            z_new = p.z + dt / 6.0 * (uz1 + 2.0 * uz2 + 2.0 * uz3 + uz4)
    except Exception as exc:
        raise RuntimeError(f"velocity evaluation failed during step: {exc}") from exc
    bad = ~(np.isfinite(r_new) & np.isfinite(z_new))
    if np.any(bad):
        i = int(np.nonzero(bad)[0][0])
        raise RuntimeError(f"non-finite position for particle {i} after step")
    # reflect axis overshoots; q unchanged (even extension across r = 0)
    r_new = np.abs(r_new)
    return ParticleField(r_new, z_new, p.q, p.vol, lattice_h=p.lattice_h)


def suggest_dt(fld, cfg, cfl=0.5):
    """CFL-style step bound 0.5 h / max|u| for the current field."""
    p = as_particles(fld)
    h = p.lattice_h
    if h is None:
        h = float(np.sqrt(np.median(p.area())))
    ur, uz = self_velocity(p, cfg.kernel if isinstance(cfg, SimConfig) else cfg)
    umax = float(np.max(np.hypot(ur, uz)))
    if umax == 0.0:
        return math.inf
    return cfl * h / umax


def _probe_grid(p, n):
    """Cell-centered velocity probe lattice over the particle bounding box."""
    r_hi = float(p.r.max()) * 1.05 + 1e-9
    z_lo = float(p.z.min()) - 0.05 * (p.z.max() - p.z.min() + 1e-9)
    z_hi = float(p.z.max()) + 0.05 * (p.z.max() - p.z.min() + 1e-9)
    h = max(r_hi, z_hi - z_lo) / n
    nr = max(3, int(round(r_hi / h)))
    nz = max(3, int(round((z_hi - z_lo) / h)))
    r = (np.arange(nr) + 0.5) * h
    z = z_lo + (np.arange(nz) + 0.5) * h
    return h, r, z


def _monitors(p, cfg, probe):
    out = {}
    sf = SampledField(p.r, p.z, p.q, p.area())
    for spec in cfg.monitor_norms:
        out[spec.label()] = lp_norm(sf, spec)
    out["moment_q_vol"] = p.moment()
    if cfg.probe_n > 0:
        h, rg, zg = probe
        R, Z = np.meshgrid(rg, zg, indexing="ij")
        ur, uz, _ = velocity_field(p, R.ravel(), Z.ravel(), cfg.kernel)
        vel = VelocityGrid(h, rg, zg, ur.reshape(R.shape), uz.reshape(R.shape))
        out["divergence_residual"] = divergence_residual(vel)
    return out


def _remesh_grid(p, h):
    """Auto target lattice covering the particles with the deposit margin."""
    r_max = (math.ceil(float(p.r.max()) / h) + 4) * h
    z_lo = (math.floor(float(p.z.min()) / h) - 4) * h
    z_hi = (math.ceil(float(p.z.max()) / h) + 4) * h
    nr = int(round(r_max / h))
    nz = int(round((z_hi - z_lo) / h))
    return GridField(r_max, z_lo, z_hi, h, np.zeros((nr, nz)))


def simulate(initial, cfg):
    """Advance the field to t_end, recording snapshots and monitors.

    Monitors at every stored snapshot: the requested L^p norms of q
    (computed on particles, hence exactly conserved without remeshing),
    the divergence residual of the induced velocity on a probe grid,
    and the moment sum(q vol).
    """
    p = as_particles(initial)
    steps = int(round(cfg.t_end / cfg.dt)) if cfg.t_end > 0 else 0
    probe = _probe_grid(p, cfg.probe_n) if cfg.probe_n > 0 else None
    times = [0.0]
    snaps = [p]
    mon = [_monitors(p, cfg, probe)]
    for step in range(1, steps + 1):
        p = advect_step(p, cfg)
        if cfg.remesh_every > 0 and step % cfg.remesh_every == 0 and step < steps:
            h = cfg.remesh_h or p.lattice_h
            if h is None:
                raise ValueError("remeshing needs remesh_h (particles carry no lattice)")
            p = remesh(p, _remesh_grid(p, h), floor=cfg.remesh_floor)
        if step % cfg.snapshot_every == 0 or step == steps:
            times.append(step * cfg.dt)
            snaps.append(p)
            mon.append(_monitors(p, cfg, probe))
    monitors = {k: np.array([m[k] for m in mon]) for k in mon[0]}
    return TrajectoryRecord(np.array(times), snaps, monitors, cfg)
