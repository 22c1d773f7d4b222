"""Weak-solution residuals and the mollification convergence study.

Test fields are built as phi = curl(eta e_theta) from C-infinity
tensor-bump potentials eta(r, z, t), so they are divergence-free and
axisymmetric by construction and compactly supported in space and in a
time window strictly inside (0, T).  For such phi a velocity trajectory
solving the momentum equation weakly satisfies

    R(phi) = int_0^T int ( u . d_t phi + u . grad phi . u ) dx dt = 0,

with no pressure or boundary terms.  The residual of a computed
trajectory measures its distance from weak-solution-ness and must
shrink under (h, dt) refinement.

The epsilon study runs the solver on mollified/cut data for a
decreasing list of eps and checks the Cauchy property of
|| u^{eps_i} - u^{eps_{i+1}} ||_{L2(0,T; Cylinder(R))}, including on a
region containing the symmetry axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .fields import as_particles
from .initdata import MollifierSpec, make_approx_data
from .kernel import velocity_field
from .transport import simulate

__all__ = [
    "WeakTestFunction",
    "ResidualReport",
    "built_in_tests",
    "weak_residual",
    "epsilon_convergence_study",
    "gradient_test_functional",
]


def _bump(s):
    """C-infinity bump exp(-1/(1-s^2)) on |s| < 1, with B', B''."""
    s = np.asarray(s, dtype=np.float64)
    inside = np.abs(s) < 1.0
    B = np.zeros_like(s)
    B1 = np.zeros_like(s)
    B2 = np.zeros_like(s)
    si = s[inside]
    g = 1.0 - si * si
    e = np.exp(-1.0 / g)
    d1 = -2.0 * si / (g * g)                       # d/ds of (-1/g)
    d2 = -2.0 / (g * g) - 8.0 * si * si / (g ** 3)
    B[inside] = e
    B1[inside] = e * d1
    B2[inside] = e * (d1 * d1 + d2)
    return B, B1, B2


@dataclass(frozen=True)
class WeakTestFunction:
    """phi = curl(eta e_theta), eta = A P(r) Q(z) S(t) from tensor bumps.

    profile 'annulus': P is a bump on [r_center - r_width, r_center + r_width]
    with r_center > r_width (support off the axis).  profile 'axis':
    P = r^2 bump(r / r_width), supported on r < r_width and overlapping
    the symmetry axis.
    """

    profile: str
    r_center: float
    r_width: float
    z_center: float
    z_width: float
    t_center: float
    t_width: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.profile not in ("annulus", "axis"):
            raise ValueError("profile must be 'annulus' or 'axis'")
        if self.profile == "annulus" and not (self.r_center > self.r_width > 0):
            raise ValueError("annulus profile requires r_center > r_width > 0")
        if min(self.r_width, self.z_width, self.t_width) <= 0:
            raise ValueError("widths must be positive")

    # -- tensor factors -----------------------------------------------------

    def _P(self, r):
        """(P, P', P'', P/r, (P/r)')."""
        if self.profile == "annulus":
            w = self.r_width
            B, B1, B2 = _bump((r - self.r_center) / w)
            P = B
            P1 = B1 / w
            P2 = B2 / (w * w)
            Pr = np.where(r > 0, P / np.where(r > 0, r, 1.0), 0.0)
            Pr1 = np.where(r > 0, (P1 * r - P) / np.where(r > 0, r * r, 1.0), 0.0)
            return P, P1, P2, Pr, Pr1
        w = self.r_width
        B, B1, B2 = _bump(r / w)
        P = r * r * B
        P1 = 2.0 * r * B + r * r * B1 / w
        P2 = 2.0 * B + 4.0 * r * B1 / w + r * r * B2 / (w * w)
        Pr = r * B
        Pr1 = B + r * B1 / w
        return P, P1, P2, Pr, Pr1

    def _Q(self, z):
        w = self.z_width
        B, B1, B2 = _bump((z - self.z_center) / w)
        return B, B1 / w, B2 / (w * w)

    def _S(self, t):
        w = self.t_width
        B, B1, _ = _bump((t - self.t_center) / w)
        return B, B1 / w

    # -- fields ---------------------------------------------------------------

    def time_support(self):
        return self.t_center - self.t_width, self.t_center + self.t_width

    def spatial_support(self):
        if self.profile == "annulus":
            r_hi = self.r_center + self.r_width
        else:
            r_hi = self.r_width
        return r_hi, self.z_center - self.z_width, self.z_center + self.z_width

    def components(self, r, z, t):
        """(phi_r, phi_z, d_t phi_r, d_t phi_z, d_r phi_r, d_z phi_r,
        d_r phi_z, d_z phi_z) at scalar time t."""
        A = self.amplitude
        P, P1, P2, Pr, Pr1 = self._P(r)
        Q, Q1, Q2 = self._Q(z)
        S, S1 = self._S(t)
        phi_r = -A * P * Q1 * S
        phi_z = A * (P1 + Pr) * Q * S
        return (
            phi_r,
            phi_z,
            -A * P * Q1 * S1,
            A * (P1 + Pr) * Q * S1,
            -A * P1 * Q1 * S,
            -A * P * Q2 * S,
            A * (P2 + Pr1) * Q * S,
            A * (P1 + Pr) * Q1 * S,
        )


def built_in_tests(t_end):
    """Five fixed test fields with staggered supports inside (0, t_end).

    Two of them ('axis' profile) overlap the symmetry axis, probing the
    region where the velocity estimates are hardest.
    """
    T = t_end
    return [
        WeakTestFunction("annulus", 1.1, 0.7, 0.0, 0.8, 0.50 * T, 0.25 * T),
        WeakTestFunction("annulus", 1.0, 0.5, -0.5, 0.5, 0.40 * T, 0.20 * T),
        WeakTestFunction("axis", 0.0, 1.2, 0.3, 0.6, 0.65 * T, 0.25 * T),
        WeakTestFunction("annulus", 1.2, 0.6, 0.4, 0.7, 0.55 * T, 0.30 * T),
        WeakTestFunction("axis", 0.0, 0.9, -0.3, 0.5, 0.50 * T, 0.20 * T),
    ]


@dataclass(frozen=True)
class ResidualReport:
    """Per-test residuals (or difference tables) plus quadrature metadata."""

    values: dict
    meta: dict = dfield(default_factory=dict)

    def to_dict(self):
        def conv(v):
            if isinstance(v, (np.floating, np.integer)):
                return float(v)
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, dict):
                return {str(k): conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            return v
        return {"schema_version": 1, "values": conv(self.values), "meta": conv(self.meta)}


def _common_lattice(tests, hq):
    r_hi = max(t.spatial_support()[0] for t in tests)
    z_lo = min(t.spatial_support()[1] for t in tests)
    z_hi = max(t.spatial_support()[2] for t in tests)
    nr = int(math.ceil(r_hi / hq))
    nz = int(math.ceil((z_hi - z_lo) / hq))
    r = (np.arange(nr) + 0.5) * hq
    z = z_lo + (np.arange(nz) + 0.5) * hq
    R, Z = np.meshgrid(r, z, indexing="ij")
    return R.ravel(), Z.ravel()


def weak_residual(record, tests, hq=0.05):
    """R(phi) for each test field, by tensor-product quadrature.

    Space: midpoint lattice of spacing hq over the union of supports,
    cylindrical measure.  Time: trapezoid over the record's snapshot
    times (the integrand vanishes smoothly at the support ends).
    Requires at least 4 snapshots inside each test's time window.
    """
    times = record.times
    T = float(times[-1])
    for k, tf in enumerate(tests):
        t0, t1 = tf.time_support()
        if t0 < 0.0 or t1 > T:
            raise ValueError(f"test {k} time support [{t0:g}, {t1:g}] exceeds record range [0, {T:g}]")
        inside = np.sum((times > t0) & (times < t1))
        if inside < 4:
            raise ValueError(f"test {k} has only {inside} snapshots in its time support (need >= 4)")
    tr, tz = _common_lattice(tests, hq)
    w_cyl = 2.0 * np.pi * tr * hq * hq
    kcfg = record.config.kernel
    # velocity on the common lattice at every snapshot the tests can see
    lo = min(tf.time_support()[0] for tf in tests)
    hi = max(tf.time_support()[1] for tf in tests)
    active = (times >= lo - 1e-12) & (times <= hi + 1e-12)
    u_cache = {}
    for i in np.nonzero(active)[0]:
        ur, uz, _ = velocity_field(record.snapshots[i], tr, tz, kcfg)
        u_cache[i] = (ur, uz)
    residuals = []
    for tf in tests:
        vals = np.zeros_like(times)
        for i, t in enumerate(times):
            if i not in u_cache:
                continue
            ur, uz = u_cache[i]
            (phi_r, phi_z, pt_r, pt_z,
             dr_r, dz_r, dr_z, dz_z) = tf.components(tr, tz, float(t))
            integrand = (
                ur * pt_r + uz * pt_z
                + ur * ur * dr_r
                + ur * uz * (dz_r + dr_z)
                + uz * uz * dz_z
            )
            vals[i] = np.sum(integrand * w_cyl)
        residuals.append(float(np.trapezoid(vals, times)))
    return ResidualReport(
        values={"residuals": residuals},
        meta={
            "hq": hq,
            "n_snapshots": int(active.sum()),
            "n_quadrature_points": int(tr.size),
            "t_end": T,
        },
    )


def gradient_test_functional(record, xi, hq=0.05):
    """The pure-gradient analogue of R for phi = grad(xi).

    For exactly divergence-free u this vanishes; discretely it is
    controlled by the divergence residual of the velocity field.  xi is
    a WeakTestFunction whose potential is reused as the scalar field
    (profile must be 'annulus' so grad(xi) is smooth at the axis).
    """
    if xi.profile != "annulus":
        raise ValueError("gradient test needs an annulus profile")
    times = record.times
    tr, tz = _common_lattice([xi], hq)
    w_cyl = 2.0 * np.pi * tr * hq * hq
    kcfg = record.config.kernel
    A = xi.amplitude
    vals = np.zeros_like(times)
    t0, t1 = xi.time_support()
    for i, t in enumerate(times):
        if not (t0 - 1e-12 <= t <= t1 + 1e-12):
            continue
        ur, uz, _ = velocity_field(record.snapshots[i], tr, tz, kcfg)
        P, P1, P2, _, _ = xi._P(tr)
        Q, Q1, Q2 = xi._Q(tz)
        S, S1 = xi._S(float(t))
        xi_r, xi_z = A * P1 * Q * S, A * P * Q1 * S
        xi_rt, xi_zt = A * P1 * Q * S1, A * P * Q1 * S1
        xi_rr, xi_rz, xi_zz = A * P2 * Q * S, A * P1 * Q1 * S, A * P * Q2 * S
        integrand = (
            ur * xi_rt + uz * xi_zt
            + ur * ur * xi_rr + 2.0 * ur * uz * xi_rz + uz * uz * xi_zz
        )
        vals[i] = np.sum(integrand * w_cyl)
    return float(np.trapezoid(vals, times))


def epsilon_convergence_study(base_data, eps_list, cfg, radii=(0.25, 1.0),
                              probe_n=16, order="mollify_then_cutoff"):
    """Cauchy differences of velocity trajectories as eps decreases.

    For each eps the data is mollified and cut, evolved with the shared
    SimConfig, and sampled on a common probe lattice at the common
    snapshot times.  Reports successive L2(0,T; Cylinder(R)) differences
    per R and whether they decrease monotonically.
    """
    eps_list = list(eps_list)
    if len(eps_list) < 3:
        raise ValueError("need at least 3 eps values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    R_max = max(radii)
    hq = R_max / probe_n
    nr = probe_n
    nz = 2 * probe_n
    rg = (np.arange(nr) + 0.5) * hq
    zg = -R_max + (np.arange(nz) + 0.5) * hq
    RR, ZZ = np.meshgrid(rg, zg, indexing="ij")
    tr, tz = RR.ravel(), ZZ.ravel()
    w_cyl = 2.0 * np.pi * tr * hq * hq
    runs = []
    times = None
    for eps in eps_list:
        data = make_approx_data(base_data, MollifierSpec(eps=eps), order=order)
        rec = simulate(as_particles(data), cfg)
        if times is None:
            times = rec.times
        U = np.empty((len(rec.times), tr.size, 2))
        for i, snap in enumerate(rec.snapshots):
            ur, uz, _ = velocity_field(snap, tr, tz, cfg.kernel)
            U[i, :, 0] = ur
            U[i, :, 1] = uz
        runs.append(U)
    table = {}
    monotone = {}
    for R in radii:
        mask = (tr <= R) & (np.abs(tz) <= R)
        diffs = []
        for a, b in zip(runs, runs[1:]):
            d2 = np.sum((a[:, mask, :] - b[:, mask, :]) ** 2, axis=2)
            space = np.sum(d2 * w_cyl[mask], axis=1)
            diffs.append(float(math.sqrt(np.trapezoid(space, times))))
        table[R] = diffs
        monotone[R] = all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))
    return ResidualReport(
        values={"differences": table, "monotone": monotone},
        meta={
            "eps_list": eps_list,
            "radii": list(radii),
            "probe_n": probe_n,
            "order": order,
            "dt": cfg.dt,
            "t_end": cfg.t_end,
        },
    )
