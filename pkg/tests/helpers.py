"""Shared field constructors for the test suite."""

import numpy as np

from ddns2d.grid import GridSpec, PhysicalScalarField, SpectralScalarField, \
    grid_arrays
from ddns2d.spectral import forward_transform


def smooth_field(grid: GridSpec, rng, kmax: int = 3,
                 decay: float = 1.0) -> PhysicalScalarField:
    """Random mean-free trigonometric polynomial with modes |k|_inf <= kmax."""
    ga = grid_arrays(grid)
    scale = 2.0 * np.pi / grid.length
    vals = np.zeros((grid.n, grid.n))
    for k1 in range(-kmax, kmax + 1):
        for k2 in range(0, kmax + 1):
            if k2 == 0 and k1 <= 0:
                continue
            a, b = rng.normal(size=2) / (1.0 + k1 * k1 + k2 * k2) ** decay
            phase = scale * (k1 * ga.x1 + k2 * ga.x2)
            vals += a * np.cos(phase) + b * np.sin(phase)
    return PhysicalScalarField(grid, vals)


def smooth_spectral(grid: GridSpec, rng, kmax: int = 3,
                    decay: float = 1.0) -> SpectralScalarField:
    f = forward_transform(smooth_field(grid, rng, kmax, decay))
    return SpectralScalarField(grid, f.coeffs, mean_free=True)
