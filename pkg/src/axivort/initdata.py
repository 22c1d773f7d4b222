"""Initial-data families, mollification and cut-off.

Built-in q = omega_theta/r families:

  gaussian_ring   A exp(-((r-r0)^2 + (z-z0)^2)/width^2), a smooth ring.
  double_ring     two coaxial rings (leapfrog-style configurations).
  near_sheet      A (r^2 + r0^2)^(-decay/2) phi(z): slow radial decay with
                  q in L1 and every L^p (decay > 2) while the induced
                  kinetic energy grows without bound with the measurement
                  radius (decay <= 2.5) -- data the approximation theory
                  must handle without any global energy bound.
  manufactured    omega/r for psi = r^2 exp(-r^2 - z^2), the closed-form
                  pair used by the kernel verification oracles.

Mollification convolves q in the meridian plane with the even reflection
across r = 0; the kernel mass is normalized discretely to 1, so flat-
measure L^p norms never grow (discrete Young), and the cylindrical-
measure norms are preserved for data supported away from the axis.
The cut-off multiplies by a C-infinity radial profile chi(|x|*eps) with
plateau |x| <= 1/eps and support |x| <= 2/eps in the default ``grow``
mode; ``paper_literal`` keeps chi(|x|/eps), whose support shrinks with
eps (retained for fidelity experiments only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .fields import GridField

__all__ = [
    "MollifierSpec",
    "DataFamily",
    "make_initial",
    "default_grid",
    "mollify",
    "cutoff",
    "make_approx_data",
    "FAMILIES",
]

FAMILIES = ("gaussian_ring", "double_ring", "near_sheet", "manufactured")


@dataclass(frozen=True)
class MollifierSpec:
    """Mollifier scale and profile; cut-off support mode rides along."""

    eps: float
    profile: str = "bump"              # "bump" | "quartic"
    cutoff_scale_mode: str = "grow"    # "grow" | "paper_literal"

    def __post_init__(self):
        if not (self.eps > 0.0):
            raise ValueError("eps must be positive")
        if self.profile not in ("bump", "quartic"):
            raise ValueError("profile must be 'bump' or 'quartic'")
        if self.cutoff_scale_mode not in ("grow", "paper_literal"):
            raise ValueError("cutoff_scale_mode must be 'grow' or 'paper_literal'")


@dataclass(frozen=True)
class DataFamily:
    """Named initial-data family with its parameters."""

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ValueError(f"unknown family {self.name!r}; choose from {FAMILIES}")


_DEFAULTS = {
    "gaussian_ring": dict(center_r=1.0, center_z=0.0, width=0.25, amplitude=1.0),
    "double_ring": dict(center_r=1.0, separation=1.0, width=0.25,
                        amplitude=1.0, amplitude2=1.0),
    "near_sheet": dict(amplitude=1.0, decay=2.25, r_core=0.3, z_width=0.25),
    "manufactured": dict(amplitude=1.0),
}


def _params(family):
    p = dict(_DEFAULTS[family.name])
    unknown = set(family.params) - set(p)
    if unknown:
        raise ValueError(f"unknown parameters for {family.name}: {sorted(unknown)}")
    p.update(family.params)
    return p


def family_q(family):
    """Closed-form q(r, z) for the family (vectorized callable)."""
    p = _params(family)
    name = family.name
    if name == "gaussian_ring":
        r0, z0, w, A = p["center_r"], p["center_z"], p["width"], p["amplitude"]
        if w <= 0:
            raise ValueError("width must be positive")
        return lambda r, z: A * np.exp(-((r - r0) ** 2 + (z - z0) ** 2) / w ** 2)

    if name == "double_ring":
        r0, sep, w = p["center_r"], p["separation"], p["width"]
        A1, A2 = p["amplitude"], p["amplitude2"]
        if w <= 0:
            raise ValueError("width must be positive")
        return lambda r, z: (
            A1 * np.exp(-((r - r0) ** 2 + (z - 0.5 * sep) ** 2) / w ** 2)
            + A2 * np.exp(-((r - r0) ** 2 + (z + 0.5 * sep) ** 2) / w ** 2)
        )

    if name == "near_sheet":
        A, a, r0, zw = p["amplitude"], p["decay"], p["r_core"], p["z_width"]
        if a <= 2.0:
            raise ValueError(
                "q not integrable: L1 requires radial decay exponent > 2 "
                f"(got {a})"
            )
        if not (r0 > 0 and zw > 0):
            raise ValueError("r_core and z_width must be positive")
        return lambda r, z: A * (r * r + r0 * r0) ** (-0.5 * a) * np.exp(-(z / zw) ** 2)

    # manufactured: omega/r for psi = r^2 exp(-r^2 - z^2)
    A = p["amplitude"]

    def q(r, z):
        E = np.exp(-r * r - z * z)
        omega = -(3.0 - 14.0 * r * r + 4.0 * r ** 4 + 4.0 * z * z * r * r) * E
        return A * omega / r

    return q


def default_grid(family, h):
    """A lattice extent that covers the family's effective support."""
    p = _params(family)
    name = family.name
    if name == "gaussian_ring":
        reach = 6.0 * p["width"]
        r_max = p["center_r"] + reach
        z_half = max(abs(p["center_z"]) + reach, reach)
    elif name == "double_ring":
        reach = 6.0 * p["width"]
        r_max = p["center_r"] + reach
        z_half = 0.5 * p["separation"] + reach
    elif name == "near_sheet":
        r_max = 8.0
        z_half = 5.0 * p["z_width"]
    else:
        r_max = 4.2
        z_half = 4.2
    r_max = math.ceil(r_max / h) * h
    z_half = math.ceil(z_half / h) * h
    return r_max, -z_half, z_half


def make_initial(family, grid=None, h=None):
    """Sample the family on a cell-centered lattice.

    ``grid`` is either a GridField prototype (its values are ignored) or
    a tuple (r_max, z_min, z_max, h); alternatively pass ``h`` alone and
    the extent defaults to the family's support.
    """
    if grid is None:
        if h is None:
            raise ValueError("pass a grid or a spacing h")
        r_max, z_min, z_max = default_grid(family, h)
        step = h
    elif isinstance(grid, GridField):
        r_max, z_min, z_max, step = grid.r_max, grid.z_min, grid.z_max, grid.h
    else:
        r_max, z_min, z_max, step = grid
    q = family_q(family)
    nr = int(round(r_max / step))
    nz = int(round((z_max - z_min) / step))
    r = (np.arange(nr) + 0.5) * step
    z = z_min + (np.arange(nz) + 0.5) * step
    R, Z = np.meshgrid(r, z, indexing="ij")
    return GridField(r_max, z_min, z_max, step, q(R, Z))


# --- mollifier -------------------------------------------------------------

def _profile(spec, s2):
    """Unnormalized radial profile as a function of (|x|/eps)^2, support < 1."""
    if spec.profile == "bump":
        out = np.zeros_like(s2)
        inside = s2 < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - s2[inside]))
        return out
    out = np.zeros_like(s2)
    inside = s2 < 1.0
    out[inside] = (1.0 - s2[inside]) ** 2
    return out


def mollifier_stencil(spec, h):
    """Discrete 2D mollifier on the lattice, normalized to unit mass.

    Normalization is exact to rounding by construction (divide by the
    discrete sum), which is what makes the discrete Young inequality an
    equality-capable bound.
    """
    if h > 0.5 * spec.eps:
        raise ValueError(
            f"grid too coarse for the mollifier: need h <= eps/2 (h={h}, eps={spec.eps})"
        )
    m = int(math.ceil(spec.eps / h))
    x = np.arange(-m, m + 1) * h / spec.eps
    X, Y = np.meshgrid(x, x, indexing="ij")
    w = _profile(spec, X * X + Y * Y)
    total = w.sum() * h * h
    if total <= 0.0:
        raise ValueError("degenerate mollifier stencil")
    return w / (total / (h * h))     # sum(w) == 1 after this


def mollify(fld, spec):
    """Convolve q with the mollifier, evenly reflected across r = 0."""
    if not isinstance(fld, GridField):
        raise TypeError("mollify requires a grid representation")
    w = mollifier_stencil(spec, fld.h)
    m = (w.shape[0] - 1) // 2
    q = fld.values
    nr, nz = q.shape
    # pad: even reflection in r across the axis, zeros on the far sides
    qp = np.zeros((nr + 2 * m, nz + 2 * m))
    qp[m:m + nr, m:m + nz] = q
    k = min(m, nr)
    qp[m - k:m, m:m + nz] = q[k - 1::-1, :]
    conv = fftconvolve(qp, w, mode="valid")   # w is symmetric
    return GridField(fld.r_max, fld.z_min, fld.z_max, fld.h, conv)


# --- cut-off ---------------------------------------------------------------

def _smooth_step(t):
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return a / (a + b)


def cutoff_profile(spec, rho):
    """chi at 3D radius rho: 1 on the plateau, 0 beyond twice it."""
    scale = 1.0 / spec.eps if spec.cutoff_scale_mode == "grow" else spec.eps
    s = rho / scale
    return 1.0 - _smooth_step(s - 1.0)


def cutoff(fld, spec):
    """Multiply q by the radial cut-off chi(|x|)."""
    if not isinstance(fld, GridField):
        raise TypeError("cutoff requires a grid representation")
    R, Z = np.meshgrid(fld.r_nodes(), fld.z_nodes(), indexing="ij")
    chi = cutoff_profile(spec, np.sqrt(R * R + Z * Z))
    return GridField(fld.r_max, fld.z_min, fld.z_max, fld.h, fld.values * chi)


def make_approx_data(fld, spec, order="mollify_then_cutoff"):
    """Smooth, compactly supported approximation of the data.

    Both composition orders are available because the construction is
    stated one way and used the other in the underlying theory; the
    checked inequalities hold for either.
    """
    if order == "mollify_then_cutoff":
        return cutoff(mollify(fld, spec), spec)
    if order == "cutoff_then_mollify":
        return mollify(cutoff(fld, spec), spec)
    raise ValueError("order must be 'mollify_then_cutoff' or 'cutoff_then_mollify'")
