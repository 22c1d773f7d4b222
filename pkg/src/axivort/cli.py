"""Command-line front end.

Subcommands: simulate, make-data, kernel-table, verify, weak-residual,
converge.  All reports are JSON with a schema_version field plus CSV
summary tables; the exit code is 0 only when every asserted invariant
of the requested operation holds.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import estimates as est
from .fields import (
    MeridianPoint,
    as_particles,
    read_grid_json,
    read_particles_csv,
    write_grid_json,
    write_particles_csv,
)
from .harness import built_in_tests, epsilon_convergence_study, weak_residual
from .initdata import DataFamily, MollifierSpec, make_approx_data, make_initial
from .kernel import KernelConfig, angular_kernel
from .transport import SimConfig, simulate


def _parse_params(text):
    out = {}
    if not text:
        return out
    for piece in text.split(","):
        k, _, v = piece.partition("=")
        if not _:
            raise SystemExit(f"bad --params entry {piece!r} (expect key=value)")
        out[k.strip()] = float(v)
    return out


def _load_field(spec):
    if "particles_csv" in spec:
        return read_particles_csv(spec["particles_csv"])
    if "grid_json" in spec:
        return read_grid_json(spec["grid_json"])
    fam = DataFamily(spec["family"], spec.get("params", {}))
    fld = make_initial(fam, h=spec["h"])
    if spec.get("eps"):
        fld = make_approx_data(
            fld,
            MollifierSpec(eps=spec["eps"],
                          cutoff_scale_mode=spec.get("cutoff_mode", "grow")),
            order=spec.get("order", "mollify_then_cutoff"),
        )
    return fld


def _write_json(path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)


def cmd_simulate(args):
    with open(args.config) as f:
        conf = json.load(f)
    fld = _load_field(conf["data"])
    kc = KernelConfig(blob_delta=conf.get("blob_delta", 0.05),
                      quad_tol=conf.get("quad_tol", 1e-10))
    cfg = SimConfig(
        dt=conf["dt"],
        t_end=conf["t_end"],
        integrator=conf.get("integrator", "rk4"),
        remesh_every=conf.get("remesh_every", 0),
        kernel=kc,
        snapshot_every=conf.get("snapshot_every", 1),
        probe_n=conf.get("probe_n", 16),
    )
    rec = simulate(as_particles(fld), cfg)
    out = Path(args.out_dir) / conf.get("name", "run")
    out.mkdir(parents=True, exist_ok=True)
    write_particles_csv(rec.snapshots[0], out / "snapshot_first.csv")
    write_particles_csv(rec.snapshots[-1], out / "snapshot_final.csv")
    if conf.get("write_snapshots", "ends") == "all":
        for i, s in enumerate(rec.snapshots):
            write_particles_csv(s, out / f"snapshot_{i:05d}.csv")
    monitors = {k: v.tolist() for k, v in rec.monitors.items()}
    _write_json(out / "manifest.json", {
        "schema_version": 1,
        "config": conf,
        "times": rec.times.tolist(),
        "monitors": monitors,
    })
    with open(out / "monitors.csv", "w", newline="") as f:
        w = csv.writer(f)
        keys = list(rec.monitors)
        w.writerow(["time"] + keys)
        for i, t in enumerate(rec.times):
            w.writerow([t] + [rec.monitors[k][i] for k in keys])
    drift = 0.0
    for k, v in rec.monitors.items():
        if k.startswith("L") and v[0] != 0.0:
            drift = max(drift, float(np.max(np.abs(v / v[0] - 1.0))))
    tol = 1e-12 if cfg.remesh_every == 0 else 1e-4
    print(f"run complete: {len(rec.times)} snapshots, norm drift {drift:.3e}")
    return 0 if drift < tol else 1


def cmd_make_data(args):
    fam = DataFamily(args.family, _parse_params(args.params))
    fld = make_initial(fam, h=args.h)
    if args.eps:
        fld = make_approx_data(
            fld, MollifierSpec(eps=args.eps, cutoff_scale_mode=args.cutoff_mode),
            order=args.order)
    out = Path(args.out)
    if out.suffix == ".json":
        write_grid_json(fld, out)
    else:
        write_particles_csv(fld, out)
    print(f"wrote {out}")
    return 0


def cmd_kernel_table(args):
    cfg = KernelConfig(quad_tol=args.tol, use_elliptic=not args.quadrature,
                       blob_delta=args.delta)
    kv = angular_kernel(MeridianPoint(args.r_x, 0.0),
                        MeridianPoint(args.r_y, -args.dz), cfg)
    print(f"{kv.F:.17g} {kv.dF_dr:.17g} {kv.dF_dz:.17g}")
    return 0


_VERIFY = {
    "velocity_lp": lambda fld, p, R, cfg, level, label: est.verify_velocity_lp_estimate(
        fld, p, R, cfg, level=level, data_label=label),
    "gradient_lp": lambda fld, p, R, cfg, level, label: est.verify_gradient_lp_estimate(
        fld, p, R, cfg, level=level, data_label=label),
    "tilde_u_halfplane": lambda fld, p, R, cfg, level, label: est.verify_tilde_u_halfplane(
        fld, p, R, cfg, level=level, data_label=label),
    "high_integrability": lambda fld, p, R, cfg, level, label: est.verify_high_integrability(
        fld, p, R, cfg, level=level, data_label=label),
    "ur_over_r": lambda fld, p, R, cfg, level, label: est.verify_ur_over_r(
        fld, p, cfg, level=level, data_label=label),
}


def cmd_verify(args):
    rng = np.random.default_rng(args.seed)
    fam = DataFamily(args.family, _parse_params(args.params))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    if args.estimate == "kernel_pointwise":
        fld = make_initial(fam, h=args.h0)
        cfg = KernelConfig(blob_delta=2.0 * args.h0)
        sup = est.support_radius(fld)
        pts = np.column_stack([rng.uniform(0.05, 1.5 * sup, 100),
                               rng.uniform(-1.5 * sup, 1.5 * sup, 100)])
        rep = est.verify_pointwise_kernel_bound(fld, pts, cfg, data_label=args.family)
        reports = [rep]
        ok = all(v <= est.KERNEL_BOUND_CEILINGS[k]
                 for k, v in rep.details["ratios"].items())
    else:
        if args.estimate not in _VERIFY:
            raise SystemExit(f"unknown estimate {args.estimate!r}")
        run = _VERIFY[args.estimate]
        for k in range(args.levels):
            h = args.h0 / 2 ** k
            fld = make_initial(fam, h=h)
            cfg = KernelConfig(blob_delta=2.0 * h)
            reports.append(run(fld, args.p, args.R, cfg, k, args.family))
        ok = est.ladder_stable(reports) if len(reports) >= 2 else True
    for rep in reports:
        _write_json(out / f"{args.estimate}_level{rep.refinement_level}.json",
                    rep.to_dict())
    with open(out / f"{args.estimate}_summary.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["estimate_id", "level", "lhs", "rhs_norm", "empirical_C"])
        for rep in reports:
            w.writerow([rep.estimate_id, rep.refinement_level, rep.lhs,
                        rep.rhs_norm, rep.empirical_C])
    for rep in reports:
        print(f"{rep.estimate_id} level {rep.refinement_level}: "
              f"C = {rep.empirical_C:.6g}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_weak_residual(args):
    fam = DataFamily(args.family, _parse_params(args.params))
    results = []
    for k in range(2 if args.refine else 1):
        h = args.h / 2 ** k
        dt = args.dt / 2 ** k
        fld = make_initial(fam, h=h)
        cfg = SimConfig(dt=dt, t_end=args.t_end, integrator="rk2",
                        kernel=KernelConfig(blob_delta=2.0 * h), probe_n=0)
        rec = simulate(as_particles(fld), cfg)
        rep = weak_residual(rec, built_in_tests(args.t_end), hq=args.hq / 2 ** k)
        results.append(rep)
        print(f"h={h:g} dt={dt:g}: residuals",
              " ".join(f"{v:.3e}" for v in rep.values["residuals"]))
    ok = True
    if args.refine:
        coarse = np.abs(np.array(results[0].values["residuals"]))
        fine = np.abs(np.array(results[1].values["residuals"]))
        ratios = fine / np.maximum(coarse, 1e-300)
        print("refinement ratios:", " ".join(f"{v:.3f}" for v in ratios))
        ok = bool(np.all(ratios <= 0.6))
    if args.out_dir:
        _write_json(Path(args.out_dir) / "weak_residual.json",
                    {"schema_version": 1,
                     "runs": [r.to_dict() for r in results]})
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_converge(args):
    fam = DataFamily(args.family, _parse_params(args.params))
    base = make_initial(fam, h=args.h)
    eps = [float(x) for x in args.eps.split(",")]
    radii = tuple(float(x) for x in args.radii.split(","))
    cfg = SimConfig(dt=args.dt, t_end=args.t_end, integrator="rk2",
                    kernel=KernelConfig(blob_delta=2.0 * args.h), probe_n=0)
    rep = epsilon_convergence_study(base, eps, cfg, radii=radii)
    for R, diffs in rep.values["differences"].items():
        mono = rep.values["monotone"][R]
        print(f"R={R}: diffs", " ".join(f"{d:.4e}" for d in diffs),
              "monotone" if mono else "NON-MONOTONE")
    if args.out_dir:
        _write_json(Path(args.out_dir) / "converge.json", rep.to_dict())
    ok = all(rep.values["monotone"].values())
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv=None):
    ap = argparse.ArgumentParser(prog="axivort",
                                 description="axisymmetric vortex laboratory")
    ap.add_argument("--threads", type=int, default=0,
                    help="numba thread cap (0 = library default)")
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--out-dir", default="runs")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("simulate", help="advance a field per a JSON config")
    s.add_argument("--config", required=True)
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("make-data", help="sample a data family to CSV/JSON")
    s.add_argument("--family", required=True)
    s.add_argument("--params", default="")
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--cutoff-mode", default="grow",
                   choices=["grow", "paper_literal"])
    s.add_argument("--order", default="mollify_then_cutoff")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_make_data)

    s = sub.add_parser("kernel-table", help="print F, dF_dr, dF_dz")
    s.add_argument("--r-x", type=float, required=True)
    s.add_argument("--r-y", type=float, required=True)
    s.add_argument("--dz", type=float, required=True)
    s.add_argument("--delta", type=float, default=0.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--quadrature", action="store_true",
                   help="use the adaptive-quadrature path")
    s.set_defaults(fn=cmd_kernel_table)

    s = sub.add_parser("verify", help="audit one velocity estimate")
    s.add_argument("--estimate", required=True)
    s.add_argument("--family", required=True)
    s.add_argument("--params", default="")
    s.add_argument("--p", type=float, default=1.5)
    s.add_argument("--R", type=float, default=1.0)
    s.add_argument("--levels", type=int, default=3)
    s.add_argument("--h0", type=float, default=0.1)
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("weak-residual", help="weak-form residuals of a run")
    s.add_argument("--family", default="gaussian_ring")
    s.add_argument("--params", default="")
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--dt", type=float, default=0.04)
    s.add_argument("--t-end", type=float, default=0.4)
    s.add_argument("--hq", type=float, default=0.08)
    s.add_argument("--refine", action="store_true")
    s.set_defaults(fn=cmd_weak_residual)

    s = sub.add_parser("converge", help="epsilon-convergence study")
    s.add_argument("--family", default="near_sheet")
    s.add_argument("--params", default="")
    s.add_argument("--eps", default="0.4,0.2,0.1")
    s.add_argument("--radii", default="0.25,1.0")
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--dt", type=float, default=0.025)
    s.add_argument("--t-end", type=float, default=0.2)
    s.set_defaults(fn=cmd_converge)

    args = ap.parse_args(argv)
    if args.threads:
        try:
            import numba

            numba.set_num_threads(args.threads)
        except Exception:
            pass
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
