"""Periodic grid description and field containers.

All fields live on a square N x N periodic grid over [0, L)^2.  The grid
spec itself is a hashable value object; the derived wavenumber arrays are
cached per spec in a module-level table so that specs stay cheap to copy
and compare.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_THIRDS = 2.0 / 3.0


class FieldError(ValueError):
    """Raised when a field violates a construction contract."""


@dataclass(frozen=True)
class GridSpec:
    """Square periodic grid: N points per side over [0, L)."""

    n: int
    length: float = 2.0 * np.pi
    dealias_fraction: float = TWO_THIRDS

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise FieldError(f"grid size must be even and >= 8, got {self.n}")
        if not (self.length > 0):
            raise FieldError("domain length must be positive")
        if not (0 < self.dealias_fraction <= 1):
            raise FieldError("dealias fraction must lie in (0, 1]")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def cutoff(self) -> float:
        """Dealiasing cutoff in physical wavenumber units."""
        return self.dealias_fraction * (self.n / 2) * 2.0 * np.pi / self.length


class _GridArrays:
    """Wavenumber grids and masks derived from a GridSpec."""

    def __init__(self, spec: GridSpec):
        n = spec.n
        scale = 2.0 * np.pi / spec.length
        k1d = np.fft.fftfreq(n, d=1.0 / n) * scale
        kr1d = np.fft.rfftfreq(n, d=1.0 / n) * scale
        self.kx = k1d[:, None] * np.ones((1, n))
        self.ky = np.ones((n, 1)) * k1d[None, :]
        self.ksq = self.kx**2 + self.ky**2
        inv = np.zeros_like(self.ksq)
        inv[self.ksq > 0] = 1.0 / self.ksq[self.ksq > 0]
        self.ksq_inv = inv
        # half-spectrum (rfft2) versions, used by the time stepper
        self.kxh = k1d[:, None] * np.ones((1, kr1d.size))
        self.kyh = np.ones((n, 1)) * kr1d[None, :]
        self.ksqh = self.kxh**2 + self.kyh**2
        invh = np.zeros_like(self.ksqh)
        invh[self.ksqh > 0] = 1.0 / self.ksqh[self.ksqh > 0]
        self.ksq_invh = invh
        c = spec.cutoff
        self.dealias_mask = (np.maximum(np.abs(self.kx), np.abs(self.ky)) <= c)
        self.dealias_maskh = (
            np.maximum(np.abs(self.kxh), np.abs(self.kyh)) <= c
        )
        x1d = np.arange(n) * spec.h
        self.x1 = x1d[:, None] * np.ones((1, n))
        self.x2 = np.ones((n, 1)) * x1d[None, :]
        for a in vars(self).values():
            a.setflags(write=False)


_ARRAY_CACHE: dict[GridSpec, _GridArrays] = {}


def grid_arrays(spec: GridSpec) -> _GridArrays:
    got = _ARRAY_CACHE.get(spec)
    if got is None:
        got = _GridArrays(spec)
        _ARRAY_CACHE[spec] = got
    return got


@dataclass(frozen=True)
class PhysicalScalarField:
    """Point samples of a real scalar on the grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n, self.grid.n):
            raise FieldError(
                f"field shape {v.shape} does not match grid {self.grid.n}"
            )
        if not np.all(np.isfinite(v)):
            raise FieldError("field contains non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SpectralScalarField:
    """Fourier coefficients of a real scalar, unit-normalized.

    Convention: cos(k . x) has coefficients 1/2 at +-k, so coeffs equal
    fft2(values) / N^2.  ``mean_free`` marks fields whose k=0 coefficient
    is pinned to zero exactly.
    """

    grid: GridSpec
    coeffs: np.ndarray
    mean_free: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.n, self.grid.n):
            raise FieldError(
                f"coeff shape {c.shape} does not match grid {self.grid.n}"
            )
        if not np.all(np.isfinite(c)):
            raise FieldError("coefficients contain non-finite values")
        c = c.copy()
        if self.mean_free:
            c[0, 0] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class VectorField:
    """Two physical components (u1, u2) on a common grid."""

    grid: GridSpec
    u1: PhysicalScalarField
    u2: PhysicalScalarField

    def __post_init__(self):
        if self.u1.grid != self.grid or self.u2.grid != self.grid:
            raise FieldError("vector components live on a different grid")
