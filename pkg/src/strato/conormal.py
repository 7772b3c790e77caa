"""Anisotropic (boundary-adapted) regularity machinery.

A vector-field family is a finite set of plane fields that jointly never
vanish; fields tangent to a patch boundary let one measure directional
smoothness of the vorticity across the patch edge without paying for the
jump.  The module advects families and boundary tracers with a supplied
velocity trajectory, forms directional derivatives in conservation form,
and evaluates the adapted Hoelder norm and the logarithmic gradient
bound it feeds.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .grid import GridSpec, ScalarField, VelocityField, lp_norm, velocity_gradient_sup
from .littlewood_paley import BesovParams, DyadicPartition, TimeSeries, besov_norm

__all__ = [
    "VectorFieldFamily",
    "FlowBoundary",
    "VelocityInterpolant",
    "family_floor",
    "directional_derivative",
    "conormal_norm",
    "advect_family",
    "transport_scalar",
    "advect_boundary",
    "holder_quotient",
    "log_estimate_ratio",
    "divergence",
]


@dataclass(frozen=True, eq=False)
class VectorFieldFamily:
    """Finite family of plane vector fields with a joint nondegeneracy floor."""

    members: tuple[VelocityField, ...]
    epsilon: float = 0.5
    level_set: ScalarField | None = None

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("family needs at least one member")
        grids = {m.grid for m in self.members}
        if len(grids) > 1:
            raise ValueError("family members must share a grid")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def grid(self) -> GridSpec:
        return self.members[0].grid


def family_floor(family: VectorFieldFamily) -> float:
    """Pointwise floor inf_x max_members |X(x)| of the family."""
    best = family.members[0].magnitude
    for m in family.members[1:]:
        best = np.maximum(best, m.magnitude)
    return float(best.min())


def divergence(x: VelocityField) -> ScalarField:
    g = x.grid
    return ScalarField.from_spectrum(g, 1j * g.k1 * x.u1.spectrum + 1j * g.k2 * x.u2.spectrum)


def _masked_product_spectrum(a: np.ndarray, b: np.ndarray, grid: GridSpec) -> np.ndarray:
    return _fft.fft2(a * b) * grid.dealias_mask


def directional_derivative(u: ScalarField, x: VelocityField) -> ScalarField:
    """Derivative of u along x in conservation form div(u x) - u div x.

    Agrees with x . grad u for smooth fields but stays meaningful when u
    has jumps and x is merely Hoelder.  Products are dealiased by the 2/3
    rule.
    """
    g = u.grid
    if x.grid != g:
        raise ValueError("field and family member live on different grids")
    p1 = _masked_product_spectrum(u.values, x.u1.values, g)
    p2 = _masked_product_spectrum(u.values, x.u2.values, g)
    div_x = divergence(x)
    p3 = _masked_product_spectrum(u.values, div_x.values, g)
    return ScalarField.from_spectrum(g, 1j * g.k1 * p1 + 1j * g.k2 * p2 - p3)


def _vector_holder(x: VelocityField, s: float, part: DyadicPartition) -> float:
    prm = BesovParams(s=s)
    return max(besov_norm(x.u1, prm, part), besov_norm(x.u2, prm, part))


def conormal_norm(
    u: ScalarField,
    family: VectorFieldFamily,
    epsilon: float | None = None,
    partition: DyadicPartition | None = None,
) -> float:
    """Boundary-adapted Hoelder norm of u relative to the family.

    Combines the sup norm of u weighted by the family's own epsilon
    regularity (including divergences) with the (epsilon - 1) Hoelder
    norms of the directional derivatives, normalized by the family floor.
    epsilon defaults to the family's own index.
    """
    part = partition if partition is not None else DyadicPartition(u.grid)
    floor = family_floor(family)
    if floor <= 0.0:
        raise ValueError("degenerate family: floor is zero")
    eps = family.epsilon if epsilon is None else epsilon
    fam_reg = 0.0
    dir_reg = 0.0
    prm_lo = BesovParams(s=eps - 1.0)
    for x in family.members:
        fam_reg = max(fam_reg, _vector_holder(x, eps, part) + besov_norm(divergence(x), BesovParams(s=eps), part))
        dir_reg = max(dir_reg, besov_norm(directional_derivative(u, x), prm_lo, part))
    return (lp_norm(u, np.inf) * fam_reg + dir_reg) / floor


class VelocityInterpolant:
    """Divergence-free velocity snapshots from a sampled vorticity trajectory.

    Linear interpolation happens on the vorticity spectrum; velocity
    components come out through the streamfunction multipliers.
    """

    def __init__(self, omega_series: TimeSeries):
        if len(omega_series) < 1:
            raise ValueError("need at least one sample")
        self.series = omega_series
        self.grid = omega_series.grid
        self.times = omega_series.times

    def omega_spectrum(self, t: float) -> np.ndarray:
        ts = self.times
        if t <= ts[0]:
            return self.series.fields[0].spectrum
        if t >= ts[-1]:
            return self.series.fields[-1].spectrum
        j = bisect_right(ts, t)
        w = (t - ts[j - 1]) / (ts[j] - ts[j - 1])
        return (1.0 - w) * self.series.fields[j - 1].spectrum + w * self.series.fields[j].spectrum

    def velocity_spectra(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        g = self.grid
        psi = self.omega_spectrum(t) * g.inv_ksq
        return 1j * g.k2 * psi, -1j * g.k1 * psi

    def velocity_values(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        s1, s2 = self.velocity_spectra(t)
        return _fft.ifft2(s1).real, _fft.ifft2(s2).real

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])


def _advect_stretch_rhs(
    comps: list[np.ndarray], v1: np.ndarray, v2: np.ndarray, dv: tuple[np.ndarray, ...], grid: GridSpec
) -> list[np.ndarray]:
    """RHS of d/dt X = -(v . grad) X + (X . grad) v for stacked components."""
    d1v1, d2v1, d1v2, d2v2 = dv
    out = []
    for i in range(0, len(comps), 2):
        x1, x2 = comps[i], comps[i + 1]
        s1 = _fft.fft2(x1)
        s2 = _fft.fft2(x2)
        d1x1 = _fft.ifft2(1j * grid.k1 * s1).real
        d2x1 = _fft.ifft2(1j * grid.k2 * s1).real
        d1x2 = _fft.ifft2(1j * grid.k1 * s2).real
        d2x2 = _fft.ifft2(1j * grid.k2 * s2).real
        r1 = -(v1 * d1x1 + v2 * d2x1) + (x1 * d1v1 + x2 * d2v1)
        r2 = -(v1 * d1x2 + v2 * d2x2) + (x1 * d1v2 + x2 * d2v2)
        out.append(_fft.ifft2(_fft.fft2(r1) * grid.dealias_mask).real)
        out.append(_fft.ifft2(_fft.fft2(r2) * grid.dealias_mask).real)
    return out


def _velocity_and_gradient(interp: VelocityInterpolant, t: float) -> tuple[np.ndarray, ...]:
    g = interp.grid
    s1, s2 = interp.velocity_spectra(t)
    v1 = _fft.ifft2(s1).real
    v2 = _fft.ifft2(s2).real
    d1v1 = _fft.ifft2(1j * g.k1 * s1).real
    d2v1 = _fft.ifft2(1j * g.k2 * s1).real
    d1v2 = _fft.ifft2(1j * g.k1 * s2).real
    d2v2 = _fft.ifft2(1j * g.k2 * s2).real
    return v1, v2, (d1v1, d2v1, d1v2, d2v2)


def _time_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    nsteps = max(1, int(np.ceil((t1 - t0) / dt - 1.0e-12)))
    return np.linspace(t0, t1, nsteps + 1)


def advect_family(
    family: VectorFieldFamily, omega_series: TimeSeries, dt: float | None = None
) -> VectorFieldFamily:
    """Push the family forward along the trajectory's full time span.

    Classic RK4 on the transport-stretch system, with the velocity read
    from the vorticity samples at every stage time.
    """
    interp = VelocityInterpolant(omega_series)
    t0, t1 = interp.span
    if t1 <= t0:
        return family
    if dt is None:
        dt = float(np.min(np.diff(interp.times)))
    g = family.grid
    if g != interp.grid:
        raise ValueError("family and trajectory grids differ")
    comps: list[np.ndarray] = []
    for m in family.members:
        comps.append(m.u1.values.copy())
        comps.append(m.u2.values.copy())
    times = _time_grid(t0, t1, dt)
    for a, b in zip(times[:-1], times[1:]):
        h = b - a
        va = _velocity_and_gradient(interp, a)
        vm = _velocity_and_gradient(interp, 0.5 * (a + b))
        vb = _velocity_and_gradient(interp, b)
        k1 = _advect_stretch_rhs(comps, va[0], va[1], va[2], g)
        k2 = _advect_stretch_rhs([c + 0.5 * h * k for c, k in zip(comps, k1)], vm[0], vm[1], vm[2], g)
        k3 = _advect_stretch_rhs([c + 0.5 * h * k for c, k in zip(comps, k2)], vm[0], vm[1], vm[2], g)
        k4 = _advect_stretch_rhs([c + h * k for c, k in zip(comps, k3)], vb[0], vb[1], vb[2], g)
        comps = [c + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4) for c, a1, a2, a3, a4 in zip(comps, k1, k2, k3, k4)]
    members = []
    for i in range(0, len(comps), 2):
        members.append(VelocityField(ScalarField(g, comps[i]), ScalarField(g, comps[i + 1])))
    return VectorFieldFamily(members=tuple(members), epsilon=family.epsilon, level_set=None)


def transport_scalar(f: ScalarField, omega_series: TimeSeries, dt: float | None = None) -> ScalarField:
    """Passive advection of a scalar along the trajectory (no stretching)."""
    interp = VelocityInterpolant(omega_series)
    t0, t1 = interp.span
    if t1 <= t0:
        return f
    if dt is None:
        dt = float(np.min(np.diff(interp.times)))
    g = f.grid

    def rhs(vals: np.ndarray, vel: tuple[np.ndarray, ...]) -> np.ndarray:
        v1, v2, _ = vel
        s = _fft.fft2(vals)
        d1 = _fft.ifft2(1j * g.k1 * s).real
        d2 = _fft.ifft2(1j * g.k2 * s).real
        return _fft.ifft2(_fft.fft2(-(v1 * d1 + v2 * d2)) * g.dealias_mask).real

    vals = f.values.copy()
    times = _time_grid(t0, t1, dt)
    for a, b in zip(times[:-1], times[1:]):
        h = b - a
        va = _velocity_and_gradient(interp, a)
        vm = _velocity_and_gradient(interp, 0.5 * (a + b))
        vb = _velocity_and_gradient(interp, b)
        k1 = rhs(vals, va)
        k2 = rhs(vals + 0.5 * h * k1, vm)
        k3 = rhs(vals + 0.5 * h * k2, vm)
        k4 = rhs(vals + h * k3, vb)
        vals = vals + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return ScalarField(g, vals)


_SPACING_COLLAPSE = 4.0


@dataclass(frozen=True, eq=False)
class FlowBoundary:
    """Boundary tracer state at one instant: positions and tangent vectors."""

    time: float
    params: np.ndarray
    points: np.ndarray
    tangents: np.ndarray

    @property
    def enclosed_area(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

    @property
    def spacing_ratio(self) -> float:
        seg = np.diff(np.vstack([self.points, self.points[:1]]), axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        return float(lengths.max() / lengths.min())


def _eval_spectra_at(spectra: list[np.ndarray], grid: GridSpec, pts: np.ndarray) -> list[np.ndarray]:
    """Evaluate several spectra at off-grid points, one shared phase basis."""
    if len(pts) <= 512:
        # the fft coefficients expand f in exp(i k . (x + L)): index 0 sits at
        # the corner x = -L, so shift before forming the exponentials
        k = (np.pi / grid.half_length) * _fft.fftfreq(grid.n, d=1.0 / grid.n)
        e1 = np.exp(1j * np.outer(pts[:, 0] + grid.half_length, k))
        e2 = np.exp(1j * np.outer(pts[:, 1] + grid.half_length, k))
        return [((e1 @ s) * e2).sum(axis=1).real / grid.n**2 for s in spectra]
    from scipy.ndimage import map_coordinates

    coords = ((pts + grid.half_length) / grid.dx).T
    return [map_coordinates(_fft.ifft2(s).real, coords, order=3, mode="grid-wrap") for s in spectra]


def advect_boundary(
    params: np.ndarray,
    points: np.ndarray,
    tangents: np.ndarray,
    omega_series: TimeSeries,
    dt: float | None = None,
) -> FlowBoundary:
    """Push boundary tracers and their tangents through the flow.

    Positions follow dx/dt = v(x); tangents follow the Jacobian system
    dT/dt = (grad v) T, both integrated with RK4 and velocity evaluated
    off-grid from the spectral representation.
    """
    interp = VelocityInterpolant(omega_series)
    t0, t1 = interp.span
    if dt is None:
        dt = float(np.min(np.diff(interp.times))) if len(interp.times) > 1 else (t1 - t0)
    g = interp.grid

    def stage(t: float, pts: np.ndarray, tan: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s1, s2 = interp.velocity_spectra(t)
        bundle = [s1, s2, 1j * g.k1 * s1, 1j * g.k2 * s1, 1j * g.k1 * s2, 1j * g.k2 * s2]
        v1, v2, d1v1, d2v1, d1v2, d2v2 = _eval_spectra_at(bundle, g, pts)
        dpts = np.stack([v1, v2], axis=1)
        dtan = np.stack(
            [tan[:, 0] * d1v1 + tan[:, 1] * d2v1, tan[:, 0] * d1v2 + tan[:, 1] * d2v2], axis=1
        )
        return dpts, dtan

    pts = np.asarray(points, dtype=np.float64).copy()
    tan = np.asarray(tangents, dtype=np.float64).copy()

    def check_spacing(arr: np.ndarray, t: float) -> None:
        seg = np.diff(np.vstack([arr, arr[:1]]), axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        ratio = lengths.max() / lengths.min()
        if ratio > _SPACING_COLLAPSE:
            raise ValueError(f"tracer spacing collapsed (ratio {ratio:.2f}) at t = {t:.6g}")

    check_spacing(pts, t0)
    if t1 > t0:
        times = _time_grid(t0, t1, dt)
        for a, b in zip(times[:-1], times[1:]):
            h = b - a
            p1, q1 = stage(a, pts, tan)
            p2, q2 = stage(a + 0.5 * h, pts + 0.5 * h * p1, tan + 0.5 * h * q1)
            p3, q3 = stage(a + 0.5 * h, pts + 0.5 * h * p2, tan + 0.5 * h * q2)
            p4, q4 = stage(b, pts + h * p3, tan + h * q3)
            pts = pts + h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4)
            tan = tan + h / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
            check_spacing(pts, b)
    return FlowBoundary(time=t1, params=np.asarray(params, dtype=np.float64), points=pts, tangents=tan)


def holder_quotient(params: np.ndarray, tangents: np.ndarray, epsilon: float, period: float = 2.0 * np.pi) -> float:
    """Largest pairwise tangent increment over the parameter gap to the epsilon."""
    sig = np.asarray(params, dtype=np.float64)
    tan = np.asarray(tangents, dtype=np.float64)
    dsig = np.abs(sig[:, None] - sig[None, :])
    dsig = np.minimum(dsig, period - dsig)
    num = np.hypot(tan[:, None, 0] - tan[None, :, 0], tan[:, None, 1] - tan[None, :, 1])
    mask = dsig > 0.0
    return float(np.max(num[mask] / dsig[mask] ** epsilon))


def log_estimate_ratio(
    omega: ScalarField, family: VectorFieldFamily, partition: DyadicPartition | None = None
) -> float:
    """Observed gradient sup over its logarithmic bound surrogate.

    Returns |grad v|_inf / (|w|_L2 + |w|_inf log(e + |w|_adapted/|w|_inf))
    with v the velocity recovered from the vorticity w.
    """
    sup = lp_norm(omega, np.inf)
    if sup == 0.0:
        raise ValueError("vorticity vanishes; ratio undefined")
    adapted = conormal_norm(omega, family, partition=partition)
    denom = lp_norm(omega, 2.0) + sup * np.log(np.e + adapted / sup)
    return velocity_gradient_sup(omega) / denom
