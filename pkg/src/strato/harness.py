"""Sweep harness: vanishing-viscosity ladders and rate reports.

A sweep integrates the same initial data once per vorticity diffusivity
in a ladder, plus the zero-diffusivity reference, then measures the
discrepancy between each diffusive solution and the reference at the
requested sample times.  The discrepancy functional is

    Pi(t) = |v_mu - v|_Lp + |rho_mu - rho|_Lp

with the velocity difference reconstructed from the vorticity
difference, plus the plain vorticity Lp gap as a second observable.
Reports are written as rates.csv / slopes.json / manifest.json with
full-precision floats and rows in a canonical order, so the bytes do
not depend on how many worker processes produced them.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fieldio
from .grid import GridSpec, ScalarField, biot_savart, lp_norm
from .initdata import DensitySpec, PatchSpec, make_density, rasterize_patch
from .solver import SimParams, run

__all__ = [
    "SweepConfig",
    "RateRow",
    "SweepResult",
    "field_distance",
    "velocity_distance",
    "run_single",
    "run_sweep",
    "emit_report",
]


@dataclass(frozen=True)
class SweepConfig:
    """Declarative description of one vanishing-viscosity experiment."""

    grid: GridSpec
    patch: PatchSpec
    density: DensitySpec | None
    mu_values: tuple[float, ...]
    dt: float
    t_final: float
    sample_times: tuple[float, ...]
    error_p: float = 2.0
    kappa: float = 1.0
    output_dir: str = "results"
    save_fields: bool = False

    def __post_init__(self) -> None:
        if len(self.mu_values) == 0 or any(m <= 0.0 for m in self.mu_values):
            raise ValueError("mu ladder must be nonempty and positive")
        if len(set(self.mu_values)) != len(self.mu_values):
            raise ValueError("mu ladder has repeated entries")
        if self.error_p < 1.0:
            raise ValueError("error_p must be a Lebesgue exponent >= 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        grid = GridSpec(n=int(raw["grid"]["n"]), half_length=float(raw["grid"].get("half_length", 8.0)))
        p = dict(raw["patch"])
        patch = PatchSpec(
            kind=p.get("kind", "disc"),
            center=tuple(p.get("center", (0.0, 0.0))),
            radius=float(p.get("radius", 1.0)),
            axes=tuple(p.get("axes", (2.0, 1.0))),
            amplitude=float(p.get("amplitude", 0.1)),
            base_mode=int(p.get("base_mode", 5)),
            octaves=int(p.get("octaves", 1)),
            epsilon=float(p.get("epsilon", 0.5)),
        )
        density = None
        d = raw.get("density")
        if d:
            density = DensitySpec(
                kind=d.get("kind", "gaussian"),
                amplitude=float(d.get("amplitude", 0.1)),
                width=float(d.get("width", 1.0)),
                center=tuple(d.get("center", (0.0, 0.0))),
            )
        params = raw.get("params", {})
        sweep = raw.get("sweep", {})
        out = raw.get("output", {})
        times = sweep.get("sample_times") or [float(params["t_final"])]
        return cls(
            grid=grid,
            patch=patch,
            density=density,
            mu_values=tuple(float(m) for m in sweep["mu"]),
            dt=float(params["dt"]),
            t_final=float(params["t_final"]),
            sample_times=tuple(float(t) for t in times),
            error_p=float(sweep.get("error_p", 2.0)),
            kappa=float(params.get("kappa", 1.0)),
            output_dir=str(out.get("dir", "results")),
            save_fields=bool(out.get("save_fields", False)),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "SweepConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d: dict = {
            "grid": {"n": self.grid.n, "half_length": self.grid.half_length},
            "patch": {
                "kind": self.patch.kind,
                "center": list(self.patch.center),
                "radius": self.patch.radius,
                "axes": list(self.patch.axes),
                "amplitude": self.patch.amplitude,
                "base_mode": self.patch.base_mode,
                "octaves": self.patch.octaves,
                "epsilon": self.patch.epsilon,
            },
            "density": None,
            "params": {"dt": self.dt, "t_final": self.t_final, "kappa": self.kappa},
            "sweep": {
                "mu": list(self.mu_values),
                "sample_times": list(self.sample_times),
                "error_p": self.error_p,
            },
            "output": {"dir": self.output_dir, "save_fields": self.save_fields},
        }
        if self.density is not None:
            d["density"] = {
                "kind": self.density.kind,
                "amplitude": self.density.amplitude,
                "width": self.density.width,
                "center": list(self.density.center),
            }
        return d

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True)
class RateRow:
    mu: float
    time: float
    velocity_error: float
    density_error: float
    discrepancy: float
    vorticity_error: float


@dataclass(frozen=True, eq=False)
class SweepResult:
    config: SweepConfig
    rows: tuple[RateRow, ...]
    slopes: dict
    fields: dict = field(default_factory=dict, repr=False)


def field_distance(a: ScalarField, b: ScalarField, p: float = 2.0) -> float:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    return lp_norm(ScalarField(a.grid, a.values - b.values), p)


def velocity_distance(omega_a: ScalarField, omega_b: ScalarField, p: float = 2.0) -> float:
    """Lp size of the velocity gap induced by two vorticity fields."""
    diff = ScalarField(omega_a.grid, omega_a.values - omega_b.values)
    v = biot_savart(diff)
    return lp_norm(v.magnitude, p, grid=diff.grid)


def run_single(config: SweepConfig, mu: float):
    """Integrate one rung of the ladder; returns plain arrays (picklable)."""
    omega0 = rasterize_patch(config.patch, config.grid)
    if config.density is not None:
        rho0 = make_density(config.density, config.grid)
    else:
        rho0 = ScalarField(config.grid, np.zeros((config.grid.n, config.grid.n)))
    params = SimParams(
        mu=mu, dt=config.dt, t_final=config.t_final, kappa=config.kappa
    )
    result = run(
        omega0, rho0, params, sample_times=list(config.sample_times), track_gradients=False
    )
    omegas = [f.values for f in result.omega.fields]
    rhos = [f.values for f in result.rho.fields]
    return mu, np.asarray(result.omega.times), omegas, rhos


def _worker(args):
    return run_single(*args)


def run_sweep(config: SweepConfig) -> SweepResult:
    """Run the ladder plus the zero-diffusivity reference and tabulate rates.

    The worker count comes from STRATO_WORKERS (default 1).  Tasks are
    dispatched in ladder order and collected in that same order, so the
    emitted tables are identical however the work was scheduled.
    """
    ladder = tuple(sorted(config.mu_values))
    mus = (0.0,) + ladder
    tasks = [(config, mu) for mu in mus]
    workers = int(os.environ.get("STRATO_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_worker, tasks, chunksize=1))
    else:
        outputs = [run_single(config, mu) for mu in mus]

    by_mu = {mu: (times, om, rh) for mu, times, om, rh in outputs}
    ref_times, ref_om, ref_rh = by_mu[0.0]
    grid = config.grid
    p = config.error_p

    rows: list[RateRow] = []
    for mu in ladder:
        times, om, rh = by_mu[mu]
        for j, t in enumerate(times):
            wa = ScalarField(grid, om[j])
            wb = ScalarField(grid, ref_om[j])
            verr = velocity_distance(wa, wb, p)
            derr = field_distance(ScalarField(grid, rh[j]), ScalarField(grid, ref_rh[j]), p)
            werr = field_distance(wa, wb, p)
            rows.append(
                RateRow(
                    mu=mu,
                    time=float(t),
                    velocity_error=verr,
                    density_error=derr,
                    discrepancy=verr + derr,
                    vorticity_error=werr,
                )
            )
    rows.sort(key=lambda r: (r.time, r.mu))

    slopes: dict = {}
    for t in sorted({r.time for r in rows}):
        sub = [r for r in rows if r.time == t]
        entry = {
            "mu": [r.mu for r in sub],
            "discrepancy": [r.discrepancy for r in sub],
            "vorticity_error": [r.vorticity_error for r in sub],
        }
        if len(sub) >= 3:
            lm = np.log([r.mu for r in sub])
            entry["discrepancy_slope"] = float(np.polyfit(lm, np.log([r.discrepancy for r in sub]), 1)[0])
            entry["vorticity_slope"] = float(np.polyfit(lm, np.log([r.vorticity_error for r in sub]), 1)[0])
        slopes[f"{t:.12g}"] = entry

    fields = {}
    if config.save_fields:
        for mu in mus:
            times, om, rh = by_mu[mu]
            fields[mu] = (times, om, rh)
    return SweepResult(config=config, rows=tuple(rows), slopes=slopes, fields=fields)


def emit_report(result: SweepResult, out_dir: str | Path | None = None) -> dict[str, Path]:
    """Write rates.csv, slopes.json and manifest.json; returns the paths."""
    out = Path(out_dir if out_dir is not None else result.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    rates = out / "rates.csv"
    with open(rates, "w", newline="") as fh:
        fh.write("mu,time,velocity_error,density_error,discrepancy,vorticity_error\n")
        for r in result.rows:
            fh.write(
                ",".join(
                    repr(x)
                    for x in (
                        r.mu, r.time, r.velocity_error, r.density_error,
                        r.discrepancy, r.vorticity_error,
                    )
                )
                + "\n"
            )

    slopes = out / "slopes.json"
    with open(slopes, "w") as fh:
        json.dump(result.slopes, fh, indent=2, sort_keys=True)
        fh.write("\n")

    manifest = out / "manifest.json"
    with open(manifest, "w") as fh:
        json.dump(
            {
                "config": result.config.to_dict(),
                "config_sha256": result.config.digest(),
                "mu_ladder": sorted(result.config.mu_values),
                "rows": len(result.rows),
                "workers": int(os.environ.get("STRATO_WORKERS", "1")),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")

    paths = {"rates": rates, "slopes": slopes, "manifest": manifest}
    if result.config.save_fields and result.fields:
        for mu, (times, om, _rh) in result.fields.items():
            for j, t in enumerate(times):
                snap = out / f"omega_mu{mu:.6g}_t{float(t):.6g}.slf"
                fieldio.write_snapshot(ScalarField(result.config.grid, om[j]), snap)
    return paths
