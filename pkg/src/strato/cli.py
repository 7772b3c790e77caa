"""Command line front end.

Subcommands:
    sweep      run a vanishing-viscosity ladder from a JSON config
    rankine    closed-form disc-patch error ladders and fitted rates
    simulate   single run with diagnostics and field snapshots
    besov      dyadic-block norms of a stored snapshot
    conormal   advect a patch-adapted vector family and report its health
    fit        log-log slope fit of columns in a CSV report
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np


def _cmd_sweep(args: argparse.Namespace) -> int:
    from .harness import SweepConfig, emit_report, run_sweep

    config = SweepConfig.from_json(args.config)
    if args.workers is not None:
        os.environ["STRATO_WORKERS"] = str(args.workers)
    result = run_sweep(config)
    paths = emit_report(result, args.out)
    for t, entry in sorted(result.slopes.items()):
        if "discrepancy_slope" in entry:
            print(
                f"t={t}: discrepancy slope {entry['discrepancy_slope']:.4f}, "
                f"vorticity slope {entry['vorticity_slope']:.4f}"
            )
    print(f"wrote {paths['rates']}")
    return 0


def _cmd_rankine(args: argparse.Namespace) -> int:
    from .rankine import RateSeries, fit_exponent, velocity_lp_error, vorticity_lp_error

    taus = np.geomspace(args.tau_min, args.tau_max, args.points)
    rows = []
    for p in args.p:
        if args.quantity == "vorticity":
            errs = np.array([vorticity_lp_error(t, p) for t in taus])
            ref = 1.0 / (2.0 * p)
        else:
            errs = np.array([velocity_lp_error(t, p) for t in taus])
            ref = 0.5 + 1.0 / (2.0 * p)
        series = RateSeries(args.quantity, p, taus, errs, reference_exponent=ref)
        fit = fit_exponent(series)
        print(
            f"{args.quantity} p={p:g}: slope {fit.slope:.5f} (ref {ref:.5f}), "
            f"constants [{fit.c_lower:.4g}, {fit.c_upper:.4g}]"
        )
        rows.extend((args.quantity, p, t, e) for t, e in zip(taus, errs))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write("quantity,p,tau,error\n")
            for q, p, t, e in rows:
                fh.write(f"{q},{repr(float(p))},{repr(float(t))},{repr(float(e))}\n")
        print(f"wrote {args.csv}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    from . import fieldio
    from .harness import SweepConfig
    from .solver import SimParams, run
    from .initdata import make_density, rasterize_patch
    from .grid import ScalarField

    config = SweepConfig.from_json(args.config)
    mu = args.mu if args.mu is not None else config.mu_values[0]
    omega0 = rasterize_patch(config.patch, config.grid)
    if config.density is not None:
        rho0 = make_density(config.density, config.grid)
    else:
        rho0 = ScalarField(config.grid, np.zeros((config.grid.n, config.grid.n)))
    params = SimParams(mu=mu, dt=config.dt, t_final=config.t_final, kappa=config.kappa)
    result = run(omega0, rho0, params, sample_times=list(config.sample_times))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.diagnostics.to_csv(out / "diagnostics.csv")
    if args.snapshots:
        for t, fo, fr in zip(result.omega.times, result.omega.fields, result.rho.fields):
            fieldio.write_snapshot(fo, out / f"omega_t{float(t):.6g}.slf")
            fieldio.write_snapshot(fr, out / f"rho_t{float(t):.6g}.slf")
    d = result.diagnostics
    print(f"mu={mu:g}, {d.steps[-1]} steps to t={d.times[-1]:g}")
    print(f"final |w|_2={d.omega_l2[-1]:.6g} |w|_inf={d.omega_sup[-1]:.6g} circulation={d.circulation[-1]:.12g}")
    print(f"wrote {out / 'diagnostics.csv'}")
    return 0


def _cmd_besov(args: argparse.Namespace) -> int:
    from . import fieldio
    from .littlewood_paley import BesovParams, DyadicPartition, besov_norm

    f = fieldio.read_snapshot(args.snapshot)
    part = DyadicPartition(f.grid)
    params = BesovParams(s=args.s, p=args.p, r=args.r, homogeneous=args.homogeneous)
    total = besov_norm(f, params, part)
    print(f"grid n={f.grid.n} L={f.grid.half_length:g}, blocks q in "
          f"[{min(part.qs(args.homogeneous))}, {part.q_max}]")
    from .grid import lp_norm
    from .littlewood_paley import block

    for q in part.qs(args.homogeneous):
        piece = block(f, q, part, homogeneous=args.homogeneous)
        print(f"  q={q:+d}: 2^(qs)|block|_p = {2.0 ** (q * args.s) * lp_norm(piece, args.p):.6e}")
    print(f"besov norm (s={args.s:g}, p={args.p:g}, r={args.r:g}): {total:.6e}")
    return 0


def _cmd_conormal(args: argparse.Namespace) -> int:
    from .conormal import (
        advect_boundary,
        advect_family,
        conormal_norm,
        family_floor,
        holder_quotient,
        log_estimate_ratio,
    )
    from .harness import SweepConfig
    from .grid import ScalarField
    from .initdata import boundary_curve, initial_vector_family, make_density, rasterize_patch
    from .littlewood_paley import TimeSeries
    from .solver import SimParams, run

    config = SweepConfig.from_json(args.config)
    mu = args.mu if args.mu is not None else config.mu_values[0]
    t_final = args.t if args.t is not None else config.t_final
    grid = config.grid
    omega0 = rasterize_patch(config.patch, grid)
    if config.density is not None:
        rho0 = make_density(config.density, grid)
    else:
        rho0 = ScalarField(grid, np.zeros((grid.n, grid.n)))
    params = SimParams(mu=mu, dt=config.dt, t_final=t_final, kappa=config.kappa)
    checkpoints = np.linspace(0.0, t_final, args.samples)
    result = run(omega0, rho0, params, record_every_step=True, sample_times=checkpoints)

    family = initial_vector_family(config.patch, grid, epsilon=config.patch.epsilon)
    curve = boundary_curve(config.patch)
    pts, tan = curve.points, curve.tangents
    d = result.diagnostics
    series_t = result.omega.times

    # advance family and tracers leg by leg between checkpoints; the dense
    # recording guarantees an exact series entry at every checkpoint
    rows = []
    prev = 0
    for t in checkpoints:
        k = int(np.searchsorted(series_t, t - 1.0e-12))
        if k > prev:
            leg = TimeSeries(series_t[prev:k + 1], result.omega.fields[prev:k + 1])
            family = advect_family(family, leg)
            moved = advect_boundary(curve.params, pts, tan, leg)
            pts, tan = moved.points, moved.tangents
            prev = k
        omega_t = result.omega.fields[k]
        rows.append((
            float(t),
            family_floor(family),
            float(np.interp(t, d.times, d.gradv_sup_integral)),
            conormal_norm(omega_t, family),
            holder_quotient(curve.params, tan, family.epsilon),
            log_estimate_ratio(omega_t, family),
        ))

    out = Path(args.csv) if args.csv else Path(config.output_dir) / "conormal.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        fh.write("t,family_floor,gradv_sup_integral,conormal_norm,"
                 "holder_quotient,log_estimate_ratio\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")

    floor0, floor_t, vint = rows[0][1], rows[-1][1], rows[-1][2]
    print(f"family floor: {floor0:.6f} -> {floor_t:.6f} "
          f"(lower envelope {floor0 * np.exp(-vint):.6f})")
    print(f"conormal vorticity norm at t={t_final:g}: {rows[-1][3]:.6g}")
    print(f"log-estimate ratio: {rows[-1][5]:.6g}")
    print(f"wrote {out}")
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    from .rankine import RateSeries, fit_exponent

    with open(args.csv_path, newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        rows = list(reader)
    if not rows:
        print("no data rows", file=sys.stderr)
        return 1
    groups: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        key = row[args.group] if args.group else ""
        groups.setdefault(key, []).append((float(row[args.x]), float(row[args.y])))
    for key in sorted(groups):
        pts = sorted(groups[key])
        xs = np.array([a for a, _ in pts])
        ys = np.array([b for _, b in pts])
        if len(xs) < 2 or ys.min() <= 0.0:
            print(f"{args.group}={key}: not fittable")
            continue
        if len(xs) >= 6 and xs.max() / xs.min() >= 99.0:
            series = RateSeries(args.y, 2.0, xs, ys, reference_exponent=args.reference)
            fit = fit_exponent(series)
            label = f"slope {fit.slope:.5f} +- {fit.stderr:.5f}"
            if args.reference is not None:
                label += f", constants at {args.reference:g}: [{fit.c_lower:.4g}, {fit.c_upper:.4g}]"
        else:
            slope = float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
            label = f"slope {slope:.5f} (short ladder)"
        prefix = f"{args.group}={key}: " if args.group else ""
        print(prefix + label)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strato", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a vanishing-viscosity ladder")
    p.add_argument("config", help="JSON experiment config")
    p.add_argument("--out", default=None, help="output directory (default from config)")
    p.add_argument("--workers", type=int, default=None, help="process count (overrides STRATO_WORKERS)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("rankine", help="closed-form disc-patch error ladders")
    p.add_argument("--p", type=float, nargs="+", default=[2.0, 4.0], help="Lebesgue exponents")
    p.add_argument("--quantity", choices=["vorticity", "velocity"], default="vorticity")
    p.add_argument("--tau-min", type=float, default=1.0e-4)
    p.add_argument("--tau-max", type=float, default=1.0e-1)
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--csv", default=None, help="optional CSV output path")
    p.set_defaults(func=_cmd_rankine)

    p = sub.add_parser("simulate", help="single run with diagnostics")
    p.add_argument("config", help="JSON experiment config")
    p.add_argument("--mu", type=float, default=None, help="override diffusivity")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--snapshots", action="store_true", help="write field snapshots")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("besov", help="dyadic-block norms of a snapshot")
    p.add_argument("snapshot", help=".slf snapshot path")
    p.add_argument("-s", type=float, default=0.0, help="regularity index")
    p.add_argument("-p", type=float, default=np.inf, help="Lebesgue exponent")
    p.add_argument("-r", type=float, default=np.inf, help="summation exponent")
    p.add_argument("--homogeneous", action="store_true")
    p.set_defaults(func=_cmd_besov)

    p = sub.add_parser("conormal", help="advected family health report")
    p.add_argument("config", help="JSON experiment config")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--t", type=float, default=None, help="horizon (default config t_final)")
    p.add_argument("--samples", type=int, default=5, help="checkpoints in the time series")
    p.add_argument("--csv", default=None, help="series path (default <output dir>/conormal.csv)")
    p.set_defaults(func=_cmd_conormal)

    p = sub.add_parser("fit", help="log-log slope fit over CSV columns")
    p.add_argument("csv_path", help="CSV report (e.g. rates.csv)")
    p.add_argument("--x", default="mu")
    p.add_argument("--y", default="discrepancy")
    p.add_argument("--group", default="time", help="column to group by (empty for none)")
    p.add_argument("--reference", type=float, default=None, help="reference exponent for constant bracket")
    p.set_defaults(func=_cmd_fit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "group", None) == "":
        args.group = None
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
