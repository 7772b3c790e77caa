"""Doubly periodic grid and the spectral operator toolbox.

Fields live on the square [-L, L)^2 sampled on an n x n uniform mesh with
n a power of two.  Wavenumbers are integer multiples of pi/L.  All linear
operators (derivatives, Biot-Savart, inverse Laplacian, heat propagator)
act as Fourier multipliers on the full complex spectrum; the zero mode of
any inverse-Laplacian style operator is gauged to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft as _fft

__all__ = [
    "GridSpec",
    "ScalarField",
    "VelocityField",
    "derivative",
    "laplacian",
    "biot_savart",
    "dx1_inv_laplacian",
    "lp_norm",
    "heat_propagate",
    "calderon_zygmund_ratio",
    "grad_tensor_magnitude",
    "velocity_gradient_sup",
    "sample_at",
]


def _is_pow2(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform n x n mesh on [-half_length, half_length)^2.

    Parameters
    ----------
    n : int
        Points per side, a power of two, at least 16.
    half_length : float
        Half the box side; the fundamental wavenumber is pi/half_length.
    """

    n: int
    half_length: float = 8.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or not _is_pow2(int(self.n)) or self.n < 16:
            raise ValueError(f"n must be a power of two >= 16, got {self.n!r}")
        if not (self.half_length > 0.0 and np.isfinite(self.half_length)):
            raise ValueError(f"half_length must be positive and finite, got {self.half_length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        """1-d array of the n cell-corner coordinates, identical per axis."""
        return -self.half_length + self.dx * np.arange(self.n)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays (x1 along axis 0, x2 along axis 1)."""
        x = self.nodes
        return x[:, None], x[None, :]

    @cached_property
    def k1(self) -> np.ndarray:
        k = (np.pi / self.half_length) * _fft.fftfreq(self.n, d=1.0 / self.n)
        return k[:, None]

    @cached_property
    def k2(self) -> np.ndarray:
        k = (np.pi / self.half_length) * _fft.fftfreq(self.n, d=1.0 / self.n)
        return k[None, :]

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        """1/|k|^2 with the zero mode gauged to 0."""
        out = np.empty_like(self.ksq)
        out[0, 0] = 0.0
        nz = self.ksq != 0.0
        out[nz] = 1.0 / self.ksq[nz]
        out[0, 0] = 0.0
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean keep-mask implementing the 2/3 rule on both axes."""
        m = _fft.fftfreq(self.n, d=1.0 / self.n)
        keep = np.abs(m) <= self.n // 3
        return keep[:, None] & keep[None, :]

    @property
    def nyquist(self) -> float:
        return np.pi / self.half_length * (self.n // 2)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real scalar field on a :class:`GridSpec`; values are immutable.

    The full complex spectrum (scipy.fft.fft2 convention) is computed on
    first access and cached.  Construct via ``from_values``,
    ``from_function`` or ``from_spectrum``.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"values shape {v.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, grid: GridSpec, values: np.ndarray) -> "ScalarField":
        return cls(grid, values)

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        x1, x2 = grid.mesh
        return cls(grid, np.broadcast_to(fn(x1, x2), (grid.n, grid.n)).copy())

    @classmethod
    def from_spectrum(cls, grid: GridSpec, spectrum: np.ndarray) -> "ScalarField":
        vals = _fft.ifft2(spectrum).real
        f = cls(grid, vals)
        f.__dict__["spectrum"] = np.asarray(spectrum, dtype=np.complex128)
        return f

    @cached_property
    def spectrum(self) -> np.ndarray:
        return _fft.fft2(self.values)

    @property
    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Pair of scalar components on a shared grid."""

    u1: ScalarField
    u2: ScalarField

    def __post_init__(self) -> None:
        if self.u1.grid != self.u2.grid:
            raise ValueError("velocity components must share a grid")

    @property
    def grid(self) -> GridSpec:
        return self.u1.grid

    @cached_property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u1.values, self.u2.values)


def derivative(f: ScalarField, axis: int) -> ScalarField:
    """Spectral partial derivative along coordinate axis 1 or 2."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    k = f.grid.k1 if axis == 1 else f.grid.k2
    return ScalarField.from_spectrum(f.grid, 1j * k * f.spectrum)


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField.from_spectrum(f.grid, -f.grid.ksq * f.spectrum)


def biot_savart(omega: ScalarField) -> VelocityField:
    """Divergence-free velocity with the given vorticity (zero-mean gauge).

    In spectral form v1 = i k2 w / |k|^2, v2 = -i k1 w / |k|^2, so that the
    discrete curl d1 v2 - d2 v1 returns the input exactly on nonzero modes.
    A positive point blob spins counterclockwise.
    """
    g = omega.grid
    psi_hat = omega.spectrum * g.inv_ksq
    u1 = ScalarField.from_spectrum(g, 1j * g.k2 * psi_hat)
    u2 = ScalarField.from_spectrum(g, -1j * g.k1 * psi_hat)
    return VelocityField(u1, u2)


def dx1_inv_laplacian(rho: ScalarField) -> ScalarField:
    """The zero-order singular integral u with Delta u = d1 rho.

    Fourier multiplier -i k1 / |k|^2; the zero mode is gauged to zero.
    """
    g = rho.grid
    return ScalarField.from_spectrum(g, -1j * g.k1 * g.inv_ksq * rho.spectrum)


def lp_norm(f: ScalarField | np.ndarray, p: float, grid: GridSpec | None = None) -> float:
    """Lebesgue norm by the midpoint rule; p may be any real >= 1 or inf."""
    if isinstance(f, ScalarField):
        vals, g = f.values, f.grid
    else:
        if grid is None:
            raise ValueError("grid required when passing a bare array")
        vals, g = np.asarray(f), grid
    if np.isinf(p):
        return float(np.max(np.abs(vals)))
    if not p >= 1.0:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    return float((np.sum(np.abs(vals) ** p) * g.dx**2) ** (1.0 / p))


def heat_propagate(f: ScalarField, tau: float) -> ScalarField:
    """Apply the periodic heat semigroup exp(tau * Laplacian), tau >= 0."""
    if tau < 0.0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    return ScalarField.from_spectrum(f.grid, np.exp(-tau * f.grid.ksq) * f.spectrum)


def grad_tensor_magnitude(v: VelocityField) -> ScalarField:
    """Pointwise Frobenius norm of the velocity gradient tensor."""
    parts = [derivative(v.u1, 1), derivative(v.u1, 2), derivative(v.u2, 1), derivative(v.u2, 2)]
    sq = sum(p.values**2 for p in parts)
    return ScalarField(v.grid, np.sqrt(sq))


def velocity_gradient_sup(omega: ScalarField) -> float:
    """sup-norm of the gradient tensor of the Biot-Savart velocity."""
    return lp_norm(grad_tensor_magnitude(biot_savart(omega)), np.inf)


def calderon_zygmund_ratio(omega: ScalarField, p: float) -> float:
    """Ratio |grad v|_Lp / |omega|_Lp for v recovered from the vorticity.

    Finite p strictly between 1 and infinity only; the inequality this
    monitors degenerates at the endpoints.
    """
    if np.isinf(p) or not p > 1.0:
        raise ValueError(f"p must be finite with p > 1, got {p}")
    denom = lp_norm(omega, p)
    if denom == 0.0:
        raise ValueError("vorticity is identically zero")
    num = lp_norm(grad_tensor_magnitude(biot_savart(omega)), p)
    return num / denom


def sample_at(f: ScalarField, points: np.ndarray, spectral_cutoff: int = 512) -> np.ndarray:
    """Evaluate a field at off-grid points.

    Uses direct spectral summation (exact for the trigonometric
    interpolant) for at most ``spectral_cutoff`` points, and periodic
    bicubic interpolation beyond that.  ``points`` has shape (m, 2).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != 2:
        raise ValueError(f"points must have shape (m, 2), got {pts.shape}")
    if len(pts) <= spectral_cutoff:
        return _spectral_sum(f.spectrum, f.grid, pts)
    from scipy.ndimage import map_coordinates

    g = f.grid
    coords = (pts + g.half_length) / g.dx
    return map_coordinates(f.values, coords.T, order=3, mode="grid-wrap")


def _spectral_sum(spectrum: np.ndarray, grid: GridSpec, pts: np.ndarray) -> np.ndarray:
    # the fft coefficients expand f in exp(i k . (x + L)): index 0 sits at
    # the corner x = -L, so shift before forming the exponentials
    k = (np.pi / grid.half_length) * _fft.fftfreq(grid.n, d=1.0 / grid.n)
    e1 = np.exp(1j * np.outer(pts[:, 0] + grid.half_length, k))
    e2 = np.exp(1j * np.outer(pts[:, 1] + grid.half_length, k))
    acc = e1 @ spectrum
    return (acc * e2).sum(axis=1).real / grid.n**2
