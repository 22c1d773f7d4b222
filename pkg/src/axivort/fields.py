"""Field representations, cylindrical norms and discrete diagnostics.

The evolved state is the relative vorticity q = omega_theta / r on the
meridian half-plane r >= 0.  Two representations are supported:

  * ``ParticleField`` -- scattered particles carrying (r, z, q, vol),
    where vol is the full 3D cell volume including the 2*pi*r factor;
  * ``GridField``     -- a uniform cell-centered lattice on
    [0, r_max] x [z_min, z_max] (nodes at (i+1/2)h, so the axis r = 0
    is never a sample point and midpoint quadrature is exact in r for
    linear integrands).

Norms distinguish the cylindrical measure 2*pi*r dr dz (Cylinder /
WholeSpace regions) from the flat half-plane measure dr dz.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

__all__ = [
    "MeridianPoint",
    "VortexParticle",
    "VelocitySample",
    "CylinderRegion",
    "HalfPlaneRect",
    "WholeSpace",
    "NormSpec",
    "ParticleField",
    "GridField",
    "RelativeVorticityField",
    "SampledField",
    "VelocityGrid",
    "as_particles",
    "lp_norm",
    "divergence_residual",
    "remesh",
    "remesh_overshoot_bound",
    "write_particles_csv",
    "read_particles_csv",
    "write_grid_json",
    "read_grid_json",
]


def _finite(*vals):
    return all(math.isfinite(v) for v in vals)


@dataclass(frozen=True)
class MeridianPoint:
    """Point (r, z) in the meridian half-plane, r >= 0."""

    r: float
    z: float

    def __post_init__(self):
        if not _finite(self.r, self.z):
            raise ValueError("MeridianPoint components must be finite")
        if self.r < 0.0:
            raise ValueError("MeridianPoint requires r >= 0")


@dataclass(frozen=True)
class VortexParticle:
    """One particle: position, relative vorticity q, 3D cell volume."""

    pos: MeridianPoint
    q: float
    vol: float

    def __post_init__(self):
        if not _finite(self.q, self.vol):
            raise ValueError("VortexParticle fields must be finite")
        if self.vol <= 0.0:
            raise ValueError("VortexParticle requires vol > 0")


@dataclass(frozen=True)
class VelocitySample:
    """Meridian velocity (u_r, u_z)."""

    u_r: float
    u_z: float

    def __post_init__(self):
        if not _finite(self.u_r, self.u_z):
            raise ValueError("VelocitySample components must be finite")


@dataclass(frozen=True)
class CylinderRegion:
    """B_R x [-R, R]: 2D ball of radius R crossed with |z| <= R."""

    R: float

    def __post_init__(self):
        if not (self.R > 0.0 and math.isfinite(self.R)):
            raise ValueError("CylinderRegion requires R > 0")


@dataclass(frozen=True)
class HalfPlaneRect:
    """Meridian rectangle r in [0, R], z in [-R, R], flat measure dr dz."""

    R: float

    def __post_init__(self):
        if not (self.R > 0.0 and math.isfinite(self.R)):
            raise ValueError("HalfPlaneRect requires R > 0")


class WholeSpace:
    """All samples, cylindrical measure (truncated by the sample set)."""

    def __repr__(self):
        return "WholeSpace()"

    def __eq__(self, other):
        return isinstance(other, WholeSpace)

    def __hash__(self):
        return hash("WholeSpace")


Region = Union[CylinderRegion, HalfPlaneRect, WholeSpace]


@dataclass(frozen=True)
class NormSpec:
    """L^p norm request over a region; p = inf gives max over samples."""

    p: float
    region: Region = field(default_factory=WholeSpace)

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError("NormSpec requires p >= 1")

    def label(self):
        p = "inf" if math.isinf(self.p) else f"{self.p:g}"
        if isinstance(self.region, CylinderRegion):
            reg = f"cyl{self.region.R:g}"
        elif isinstance(self.region, HalfPlaneRect):
            reg = f"rect{self.region.R:g}"
        else:
            reg = "whole"
        return f"L{p}_{reg}"


@dataclass(frozen=True)
class ParticleField:
    """Relative vorticity on particles.  Arrays are never mutated."""

    r: np.ndarray
    z: np.ndarray
    q: np.ndarray
    vol: np.ndarray
    lattice_h: float | None = None   # spacing of the lattice it came from, if any

    def __post_init__(self):
        for name in ("r", "z", "q", "vol"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, a)
        n = self.r.shape[0]
        if any(getattr(self, k).shape != (n,) for k in ("z", "q", "vol")):
            raise ValueError("particle arrays must share one length")
        if n == 0:
            raise ValueError("empty field")
        if np.any(~np.isfinite(self.r)) or np.any(~np.isfinite(self.z)) \
                or np.any(~np.isfinite(self.q)) or np.any(~np.isfinite(self.vol)):
            raise ValueError("particle arrays must be finite")
        if np.any(self.r < 0.0):
            raise ValueError("particles require r >= 0")
        if np.any(self.vol <= 0.0):
            raise ValueError("particles require vol > 0")

    @property
    def n(self):
        return self.r.shape[0]

    def area(self):
        """Meridian quadrature weight dr dz per particle."""
        return self.vol / (2.0 * np.pi * self.r)

    def moment(self):
        """Sum q * vol (total of q over the 3D measure; 2*pi*circulation)."""
        return float(np.sum(self.q * self.vol))

    def particles(self):
        return [
            VortexParticle(MeridianPoint(float(r), float(z)), float(q), float(v))
            for r, z, q, v in zip(self.r, self.z, self.q, self.vol)
        ]


@dataclass(frozen=True)
class GridField:
    """q on a uniform cell-centered meridian lattice.

    values[i, j] sits at r = (i + 1/2) h, z = z_min + (j + 1/2) h.
    """

    r_max: float
    z_min: float
    z_max: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.h <= 0.0:
            raise ValueError("grid spacing h must be positive")
        nr = int(round(self.r_max / self.h))
        nz = int(round((self.z_max - self.z_min) / self.h))
        if nr < 1 or nz < 1:
            raise ValueError("grid must contain at least one cell per axis")
        if self.values.shape != (nr, nz):
            raise ValueError(
                f"values shape {self.values.shape} does not match lattice ({nr}, {nz})"
            )
        if np.any(~np.isfinite(self.values)):
            raise ValueError("grid values must be finite")

    @property
    def nr(self):
        return self.values.shape[0]

    @property
    def nz(self):
        return self.values.shape[1]

    def r_nodes(self):
        return (np.arange(self.nr) + 0.5) * self.h

    def z_nodes(self):
        return self.z_min + (np.arange(self.nz) + 0.5) * self.h

    def to_particles(self, floor=0.0):
        """Particles at cell centers; drops nodes with |q| <= floor * max|q|."""
        R, Z = np.meshgrid(self.r_nodes(), self.z_nodes(), indexing="ij")
        q = self.values
        keep = np.abs(q) > floor * (np.abs(q).max() if q.size else 0.0)
        if floor <= 0.0:
            keep = np.ones_like(q, dtype=bool)
        vol = 2.0 * np.pi * R * self.h * self.h
        return ParticleField(
            R[keep].ravel(), Z[keep].ravel(), q[keep].ravel(), vol[keep].ravel(),
            lattice_h=self.h,
        )

    def moment(self):
        R = self.r_nodes()[:, None]
        return float(np.sum(self.values * 2.0 * np.pi * R * self.h * self.h))


RelativeVorticityField = Union[ParticleField, GridField]


def as_particles(fld, floor=0.0):
    """Particle view of either representation."""
    if isinstance(fld, ParticleField):
        return fld
    if isinstance(fld, GridField):
        return fld.to_particles(floor=floor)
    raise TypeError(f"not a vorticity field: {type(fld)!r}")


@dataclass(frozen=True)
class SampledField:
    """Scalar or vector samples with meridian quadrature areas.

    values has shape (n,) for scalars or (n, k) for vector fields; the
    pointwise magnitude of a vector sample is its euclidean norm.
    """

    r: np.ndarray
    z: np.ndarray
    values: np.ndarray
    area: np.ndarray

    def __post_init__(self):
        for name in ("r", "z", "area"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        n = self.r.shape[0]
        if n == 0:
            raise ValueError("empty field")
        if self.values.shape[0] != n or self.z.shape[0] != n or self.area.shape[0] != n:
            raise ValueError("sample arrays must share one length")

    def magnitude(self):
        if self.values.ndim == 1:
            return np.abs(self.values)
        return np.sqrt(np.sum(self.values * self.values, axis=1))


def _as_sampled(fld):
    if isinstance(fld, SampledField):
        return fld
    p = as_particles(fld)
    return SampledField(p.r, p.z, p.q, p.area())


def _region_mask(region, r, z):
    if isinstance(region, CylinderRegion):
        return (r <= region.R) & (np.abs(z) <= region.R)
    if isinstance(region, HalfPlaneRect):
        return (r <= region.R) & (np.abs(z) <= region.R)
    return np.ones_like(r, dtype=bool)


def _check_coverage(region, r, z, area):
    if isinstance(region, WholeSpace):
        return
    pad = 0.75 * math.sqrt(float(np.max(area)))
    R = region.R
    if (r.min() - pad > 0.0 + pad) or (r.max() + pad < R) \
            or (z.min() - pad > -R) or (z.max() + pad < R):
        raise ValueError("region exceeds field support")


def lp_norm(fld, spec):
    """L^p norm of a sampled meridian field.

    Cylinder and WholeSpace regions integrate |f|^p against the
    cylindrical measure 2*pi*r dr dz by the midpoint rule on the
    sample set; HalfPlaneRect uses the flat measure dr dz.  p = inf
    returns the max over samples in the region.
    """
    s = _as_sampled(fld)
    _check_coverage(spec.region, s.r, s.z, s.area)
    mask = _region_mask(spec.region, s.r, s.z)
    mag = s.magnitude()[mask]
    if mag.size == 0:
        return 0.0
    if math.isinf(spec.p):
        return float(np.max(mag))
    if isinstance(spec.region, HalfPlaneRect):
        w = s.area[mask]
    else:
        w = 2.0 * np.pi * s.r[mask] * s.area[mask]
    return float(np.sum(mag ** spec.p * w) ** (1.0 / spec.p))


@dataclass(frozen=True)
class VelocityGrid:
    """Meridian velocity sampled on a uniform cell-centered lattice."""

    h: float
    r: np.ndarray        # (nr,) node radii, r[0] = h/2 for an axis-aligned grid
    z: np.ndarray        # (nz,)
    u_r: np.ndarray      # (nr, nz)
    u_z: np.ndarray

    def __post_init__(self):
        for name in ("r", "z", "u_r", "u_z"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.u_r.shape != (self.r.size, self.z.size) or self.u_z.shape != self.u_r.shape:
            raise ValueError("velocity arrays must be (nr, nz)")


def divergence_residual(vel):
    """Discrete L2 (cylindrical) norm of d_r(r u_r) + d_z(r u_z).

    Centered differences inside, second-order one-sided stencils at the
    outer boundaries.  At the axis the first radial node uses the even
    reflection of r*u_r (u_r odd, u_z even across r = 0), valid when the
    lattice is axis-aligned (r[0] = h/2).
    """
    h = vel.h
    nr, nz = vel.u_r.shape
    if nr < 3 or nz < 3:
        raise ValueError("grid too small for the divergence stencil (need >= 3 nodes per axis)")
    r = vel.r[:, None]
    g_r = r * vel.u_r
    g_z = r * vel.u_z
    d_r = np.empty_like(g_r)
    d_r[1:-1, :] = (g_r[2:, :] - g_r[:-2, :]) / (2.0 * h)
    if abs(vel.r[0] - 0.5 * h) <= 1e-9 * h:
        # ghost node at -h/2 carries g_r(-h/2) = g_r(h/2): even reflection
        d_r[0, :] = (g_r[1, :] - g_r[0, :]) / (2.0 * h)
    else:
        d_r[0, :] = (-3.0 * g_r[0, :] + 4.0 * g_r[1, :] - g_r[2, :]) / (2.0 * h)
    d_r[-1, :] = (3.0 * g_r[-1, :] - 4.0 * g_r[-2, :] + g_r[-3, :]) / (2.0 * h)
    d_z = np.empty_like(g_z)
    d_z[:, 1:-1] = (g_z[:, 2:] - g_z[:, :-2]) / (2.0 * h)
    d_z[:, 0] = (-3.0 * g_z[:, 0] + 4.0 * g_z[:, 1] - g_z[:, 2]) / (2.0 * h)
    d_z[:, -1] = (3.0 * g_z[:, -1] - 4.0 * g_z[:, -2] + g_z[:, -3]) / (2.0 * h)
    div = d_r + d_z
    return float(np.sqrt(np.sum(div * div * 2.0 * np.pi * r * h * h)))


# --- remeshing -------------------------------------------------------------
#
# Third-order tensor-product interpolation (the classic four-point kernel
# with vanishing second moment).  W(0) = 1, W(+-1) = 0, support |x| < 2,
# partition of unity; the negative lobes give overshoot factor <= 1 + 1/8.

REMESH_OVERSHOOT = 0.125


def remesh_overshoot_bound():
    """Max relative increase of max|q| a single remesh can introduce."""
    return REMESH_OVERSHOOT


def _w4(x):
    ax = np.abs(x)
    w = np.zeros_like(ax)
    inner = ax <= 1.0
    outer = (ax > 1.0) & (ax < 2.0)
    w[inner] = 1.0 - 2.5 * ax[inner] ** 2 + 1.5 * ax[inner] ** 3
    w[outer] = 0.5 * (2.0 - ax[outer]) ** 2 * (1.0 - ax[outer])
    return w


def remesh(fld, grid, floor=1e-13):
    """Deposit particles onto a grid, conserving sum(q * vol) to rounding.

    The deposited quantity is the particle's q*vol; node values divide by
    the node volume 2*pi*r h^2.  Deposits reaching r < 0 fold back by the
    even extension of q across the axis.  Particles whose kernel support
    leaks through the outer boundaries are reported as errors.

    Returns a ParticleField on the new lattice with nodes below
    ``floor * max|q|`` dropped.
    """
    p = as_particles(fld)
    h = grid.h
    nr, nz = grid.nr, grid.nz
    xr = p.r / h - 0.5            # fractional index along r
    xz = (p.z - grid.z_min) / h - 0.5
    bad = (p.r > grid.r_max - 2.0 * h) | (p.z < grid.z_min + 2.0 * h) \
        | (p.z > grid.z_max - 2.0 * h) | (p.r < 0.0)
    if np.any(bad):
        idx = np.nonzero(bad)[0]
        head = ", ".join(
            f"#{i}(r={p.r[i]:.4g}, z={p.z[i]:.4g})" for i in idx[:8]
        )
        more = "" if idx.size <= 8 else f" and {idx.size - 8} more"
        raise ValueError(f"particles outside grid (2h margin): {head}{more}")
    mass = p.q * p.vol
    acc = np.zeros((nr, nz))
    i0 = np.floor(xr).astype(np.int64)
    j0 = np.floor(xz).astype(np.int64)
    for di in range(-1, 3):
        wi = _w4(i0 + di - xr)
        ii = i0 + di
        # fold r < 0 deposits back across the axis: node -1-k aliases node k
        fold = ii < 0
        ii = np.where(fold, -1 - ii, ii)
        for dj in range(-1, 3):
            wj = _w4(j0 + dj - xz)
            jj = j0 + dj
            np.add.at(acc, (ii, jj), mass * wi * wj)
    r_nodes = (np.arange(nr) + 0.5) * h
    volg = 2.0 * np.pi * r_nodes[:, None] * h * h
    qg = acc / volg
    qmax = np.abs(qg).max()
    if qmax == 0.0:
        keep = np.ones_like(qg, dtype=bool)     # zero field: keep the lattice
    else:
        keep = np.abs(qg) > floor * qmax
    if not np.any(keep):
        raise ValueError("remesh produced an empty field (floor too aggressive)")
    R, Z = np.meshgrid(r_nodes, grid.z_nodes(), indexing="ij")
    return ParticleField(
        R[keep].ravel(), Z[keep].ravel(), qg[keep].ravel(), volg.repeat(nz, axis=1)[keep].ravel(),
        lattice_h=h,
    )


# --- serialization ---------------------------------------------------------

def _fmt(x):
    return f"{x:.17g}"


def write_particles_csv(fld, path):
    """Flat CSV with header r,z,q,vol; 17 significant digits."""
    p = as_particles(fld)
    buf = io.StringIO()
    buf.write("r,z,q,vol\n")
    for r, z, q, v in zip(p.r, p.z, p.q, p.vol):
        buf.write(f"{_fmt(r)},{_fmt(z)},{_fmt(q)},{_fmt(v)}\n")
    with open(path, "w") as f:
        f.write(buf.getvalue())


def read_particles_csv(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    return ParticleField(data["r"], data["z"], data["q"], data["vol"])


def write_grid_json(grid, path):
    """JSON descriptor {type, r_max, z_min, z_max, h, values row-major}."""
    vals = ",".join(_fmt(v) for v in grid.values.ravel(order="C"))
    text = (
        '{"type":"grid",'
        f'"r_max":{_fmt(grid.r_max)},'
        f'"z_min":{_fmt(grid.z_min)},'
        f'"z_max":{_fmt(grid.z_max)},'
        f'"h":{_fmt(grid.h)},'
        f'"values":[{vals}]}}'
    )
    with open(path, "w") as f:
        f.write(text)


def read_grid_json(path):
    with open(path) as f:
        d = json.load(f)
    if d.get("type") != "grid":
        raise ValueError("not a grid descriptor")
    nr = int(round(d["r_max"] / d["h"]))
    nz = int(round((d["z_max"] - d["z_min"]) / d["h"]))
    vals = np.asarray(d["values"], dtype=np.float64).reshape(nr, nz)
    return GridField(d["r_max"], d["z_min"], d["z_max"], d["h"], vals)
