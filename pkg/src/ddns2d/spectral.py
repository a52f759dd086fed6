"""Transforms, spectral calculus and the Biot-Savart inversion."""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .grid import (
    FieldError,
    GridSpec,
    PhysicalScalarField,
    SpectralScalarField,
    VectorField,
    grid_arrays,
)

HERMITIAN_TOL = 1e-10


def forward_transform(f: PhysicalScalarField) -> SpectralScalarField:
    """Exact DFT with unit normalization (cos(k.x) -> 1/2 at +-k)."""
    n = f.grid.n
    coeffs = sfft.fft2(f.values) / (n * n)
    return SpectralScalarField(f.grid, coeffs)


def _hermitian_defect(coeffs: np.ndarray) -> float:
    mirrored = np.conj(np.roll(coeffs[::-1, ::-1], 1, axis=(0, 1)))
    return float(np.max(np.abs(coeffs - mirrored)))


def inverse_transform(F: SpectralScalarField) -> PhysicalScalarField:
    """Inverse DFT; rejects coefficients that are not Hermitian-symmetric."""
    scale = float(np.max(np.abs(F.coeffs)))
    defect = _hermitian_defect(F.coeffs)
    if defect > HERMITIAN_TOL * max(scale, 1.0):
        raise FieldError(
            f"coefficients break Hermitian symmetry (defect {defect:.3e})"
        )
    n = F.grid.n
    values = np.real(sfft.ifft2(F.coeffs * (n * n)))
    return PhysicalScalarField(F.grid, values)


def biot_savart(omega: SpectralScalarField) -> VectorField:
    """Velocity u with curl u = omega: u_hat = i (k2, -k1) w_hat / |k|^2."""
    scale = float(np.max(np.abs(omega.coeffs)))
    if abs(omega.coeffs[0, 0]) > 1e-13 * max(scale, 1.0):
        raise FieldError("Biot-Savart needs a mean-free vorticity on the torus")
    g = grid_arrays(omega.grid)
    u1h = 1j * g.ky * omega.coeffs * g.ksq_inv
    u2h = -1j * g.kx * omega.coeffs * g.ksq_inv
    u1 = inverse_transform(SpectralScalarField(omega.grid, u1h))
    u2 = inverse_transform(SpectralScalarField(omega.grid, u2h))
    return VectorField(omega.grid, u1, u2)


def gradient(f: SpectralScalarField) -> VectorField:
    g = grid_arrays(f.grid)
    d1 = inverse_transform(SpectralScalarField(f.grid, 1j * g.kx * f.coeffs))
    d2 = inverse_transform(SpectralScalarField(f.grid, 1j * g.ky * f.coeffs))
    return VectorField(f.grid, d1, d2)


def laplacian(f: SpectralScalarField) -> SpectralScalarField:
    g = grid_arrays(f.grid)
    return SpectralScalarField(f.grid, -g.ksq * f.coeffs,
                               mean_free=f.mean_free)


def dealias(f: SpectralScalarField) -> SpectralScalarField:
    """2/3-rule truncation; idempotent."""
    g = grid_arrays(f.grid)
    return SpectralScalarField(f.grid, f.coeffs * g.dealias_mask,
                               mean_free=f.mean_free)


def inner_product(a: PhysicalScalarField, b: PhysicalScalarField) -> float:
    """Trapezoidal quadrature of a*b (pairwise summation, deterministic)."""
    if a.grid != b.grid:
        raise FieldError("inner product needs fields on the same grid")
    h = a.grid.h
    return float(np.sum(a.values * b.values)) * h * h


def vector_inner_product(a: VectorField, b: VectorField) -> float:
    return inner_product(a.u1, b.u1) + inner_product(a.u2, b.u2)


def norms(f: PhysicalScalarField) -> dict[str, float]:
    h = f.grid.h
    absv = np.abs(f.values)
    return {
        "l1": float(np.sum(absv)) * h * h,
        "l2": float(np.sqrt(np.sum(f.values * f.values) * h * h)),
        "linf": float(np.max(absv)),
    }


def l2_norm_spectral(F: SpectralScalarField) -> float:
    """Parseval route: ||f||_2 from the coefficients."""
    L = F.grid.length
    return float(np.sqrt(np.sum(np.abs(F.coeffs) ** 2)) * L)


def shift(f: SpectralScalarField, d1: float, d2: float) -> SpectralScalarField:
    """Exact translation f(x - d) of the band-limited interpolant."""
    g = grid_arrays(f.grid)
    phase = np.exp(-1j * (g.kx * d1 + g.ky * d2))
    return SpectralScalarField(f.grid, f.coeffs * phase,
                               mean_free=f.mean_free)
