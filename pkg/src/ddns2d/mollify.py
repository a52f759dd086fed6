"""Mollification, renormalization and the commutator flux machinery.

The kernel is the standard C-infinity bump j(z) ~ exp(-1/(1-|z|^2)) on
|z| < 1, sampled on a fixed reference lattice and renormalized to unit
discrete mass.  Off-grid offsets epsilon*z are realized by spectral phase
shifts, which are exact for band-limited fields, so mollification is a
Fourier multiplier and the commutator quadrature carries no interpolation
error that could contaminate the O(eps^2) rate measurements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels
from .grid import (
    FieldError,
    GridSpec,
    PhysicalScalarField,
    SpectralScalarField,
    VectorField,
    grid_arrays,
)
from .spectral import (
    biot_savart,
    forward_transform,
    gradient,
    inner_product,
    inverse_transform,
    norms,
)

_LATTICE_HALF = 8  # reference lattice: (2*8+1)^2 nodes over [-1, 1]^2


def _reference_nodes():
    q = _LATTICE_HALF
    ticks = np.arange(-q, q + 1) / q
    z1, z2 = np.meshgrid(ticks, ticks, indexing="ij")
    rsq = z1**2 + z2**2
    inside = rsq < 1.0
    profile = np.zeros_like(rsq)
    profile[inside] = np.exp(-1.0 / (1.0 - rsq[inside]))
    nodes = np.stack([z1[inside], z2[inside]], axis=1)
    weights = profile[inside] / q**2
    weights = weights / weights.sum()
    return nodes, weights


_NODES, _WEIGHTS = _reference_nodes()


class MollifierKernel:
    """j_eps quadrature bound to one grid; immutable after construction."""

    def __init__(self, grid: GridSpec, epsilon: float):
        if epsilon < 4.0 * grid.h:
            raise FieldError(
                f"kernel width {epsilon:.4g} under-resolved: "
                f"need epsilon >= 4 h = {4 * grid.h:.4g}"
            )
        self.grid = grid
        self.epsilon = float(epsilon)
        self.nodes = _NODES
        self.weights = _WEIGHTS
        self.offsets = np.ascontiguousarray(self.epsilon * _NODES)
        ga = grid_arrays(grid)
        mult = kernels.mollifier_multiplier(
            ga.kx, ga.ky, self.offsets, self.weights)
        mult.setflags(write=False)
        self.multiplier = mult

    def apply_spectral(self, F: SpectralScalarField) -> SpectralScalarField:
        return SpectralScalarField(self.grid, F.coeffs * self.multiplier,
                                   mean_free=F.mean_free)

    def __repr__(self):
        return f"MollifierKernel(eps={self.epsilon:.4g}, n={self.grid.n})"


def mollify(f: PhysicalScalarField, kernel: MollifierKernel) \
        -> PhysicalScalarField:
    """J_eps f: convex combination of exact translates; preserves the mean."""
    if f.grid != kernel.grid:
        raise FieldError("kernel was built for a different grid")
    return inverse_transform(kernel.apply_spectral(forward_transform(f)))


def mollify_vector(u: VectorField, kernel: MollifierKernel) -> VectorField:
    return VectorField(u.grid, mollify(u.u1, kernel), mollify(u.u2, kernel))


# ---------------------------------------------------------------------------
# renormalizer family
# ---------------------------------------------------------------------------

def _taper_coefficients() -> np.ndarray:
    """Degree-7 Hermite taper: identity data at s=0, flat zero at s=1."""
    rows = []
    rhs = []
    for s, derivs in ((0.0, (1.0, 1.0, 0.0, 0.0)), (1.0, (0.0,) * 4)):
        for order, value in enumerate(derivs):
            row = np.zeros(8)
            for p in range(order, 8):
                fall = 1.0
                for r in range(order):
                    fall *= p - r
                row[p] = fall * (s ** (p - order) if p > order else 1.0)
            rows.append(row)
            rhs.append(value)
    sol = np.linalg.solve(np.array(rows), np.array(rhs))
    return sol[::-1].copy()  # highest degree first, for polyval


_TAPER = _taper_coefficients()
_TAPER_D = np.polyder(np.poly1d(_TAPER)).coeffs
_TAPER_DD = np.polyder(np.poly1d(_TAPER), 2).coeffs


@dataclass(frozen=True)
class RenormalizerBeta:
    """C^3 compactly supported beta_M: identity on [-M, M], taper to 2M.

    The taper polynomial is fixed in the scaled variable s = (|y|-M)/M, so
    sup(|beta'| + |beta''| * M) is independent of M and on any fixed sample
    range [-Y, Y] the family bound is uniform once M >= Y.
    """

    m: float

    @property
    def support_radius(self) -> float:
        return 2.0 * self.m

    def beta(self, y):
        return kernels.beta_family_eval(y, self.m, _TAPER, _TAPER_D,
                                        _TAPER_DD, 0)

    def beta_prime(self, y):
        return kernels.beta_family_eval(y, self.m, _TAPER, _TAPER_D,
                                        _TAPER_DD, 1)

    def beta_double_prime(self, y):
        return kernels.beta_family_eval(y, self.m, _TAPER, _TAPER_D,
                                        _TAPER_DD, 2)

    def sup_beta(self) -> float:
        s = np.linspace(0.0, 1.0, 2001)
        return float(self.m * np.max(np.abs(np.polyval(_TAPER, s))))


def alpha_eps(omega: PhysicalScalarField, kernel: MollifierKernel,
              beta: RenormalizerBeta) -> PhysicalScalarField:
    """J_eps beta(J_eps omega); bounded by sup|beta|."""
    inner = mollify(omega, kernel)
    renorm = PhysicalScalarField(omega.grid, beta.beta(inner.values))
    return mollify(renorm, kernel)


# ---------------------------------------------------------------------------
# commutator flux machinery
# ---------------------------------------------------------------------------

def _shifted_values(coeffs_scaled: np.ndarray, kx, ky, d) -> np.ndarray:
    phase = np.exp(-1j * (kx * d[0] + ky * d[1]))
    return np.real(sfft.ifft2(coeffs_scaled * phase))


def commutator_r(u: VectorField, b: PhysicalScalarField,
                 kernel: MollifierKernel) -> tuple[PhysicalScalarField,
                                                   PhysicalScalarField]:
    """Quadrature of j(z) (u(x-eps z) - u(x)) x (b(x-eps z) - b(x)) dz."""
    grid = b.grid
    if u.grid != grid or kernel.grid != grid:
        raise FieldError("commutator arguments live on different grids")
    ga = grid_arrays(grid)
    u1h = sfft.fft2(u.u1.values)
    u2h = sfft.fft2(u.u2.values)
    bh = sfft.fft2(b.values)
    out1 = np.zeros((grid.n, grid.n))
    out2 = np.zeros((grid.n, grid.n))
    for q in range(kernel.offsets.shape[0]):
        d = kernel.offsets[q]
        u1s = _shifted_values(u1h, ga.kx, ga.ky, d)
        u2s = _shifted_values(u2h, ga.kx, ga.ky, d)
        bs = _shifted_values(bh, ga.kx, ga.ky, d)
        kernels.accumulate_increment_products(
            out1, out2, u1s, u2s, bs, u.u1.values, u.u2.values, b.values,
            kernel.weights[q])
    return (PhysicalScalarField(grid, out1), PhysicalScalarField(grid, out2))


@dataclass
class CommutatorFlux:
    """rho_eps with both sides of the flux identity exposed."""

    rho: tuple[PhysicalScalarField, PhysicalScalarField]
    flux_lhs: tuple[PhysicalScalarField, PhysicalScalarField]
    r: tuple[PhysicalScalarField, PhysicalScalarField]
    identity_defect: float


def commutator_rho(u: VectorField, b: PhysicalScalarField,
                   kernel: MollifierKernel) -> CommutatorFlux:
    """rho_eps = r_eps - (u - u_eps) x (b - b_eps), with the identity
    (u x b)_eps - u_eps x b_eps = rho_eps evaluated on both sides."""
    grid = b.grid
    r1, r2 = commutator_r(u, b, kernel)
    u_eps = mollify_vector(u, kernel)
    b_eps = mollify(b, kernel)
    du1 = u.u1.values - u_eps.u1.values
    du2 = u.u2.values - u_eps.u2.values
    db = b.values - b_eps.values
    rho1 = PhysicalScalarField(grid, r1.values - du1 * db)
    rho2 = PhysicalScalarField(grid, r2.values - du2 * db)
    lhs1 = PhysicalScalarField(grid, mollify(
        PhysicalScalarField(grid, u.u1.values * b.values), kernel).values
        - u_eps.u1.values * b_eps.values)
    lhs2 = PhysicalScalarField(grid, mollify(
        PhysicalScalarField(grid, u.u2.values * b.values), kernel).values
        - u_eps.u2.values * b_eps.values)
    defect = max(
        float(np.max(np.abs(lhs1.values - rho1.values))),
        float(np.max(np.abs(lhs2.values - rho2.values))),
    )
    return CommutatorFlux((rho1, rho2), (lhs1, lhs2), (r1, r2), defect)


def rho_gradient_pairing(omega: SpectralScalarField,
                         kernel: MollifierKernel) -> float:
    """<rho_eps(u, omega), grad omega_eps>, the defect term of the
    mollified enstrophy balance."""
    u = biot_savart(omega)
    w_phys = inverse_transform(omega)
    flux = commutator_rho(u, w_phys, kernel)
    grad_eps = gradient(kernel.apply_spectral(omega))
    return (inner_product(flux.rho[0], grad_eps.u1)
            + inner_product(flux.rho[1], grad_eps.u2))


def increment_l2(f: PhysicalScalarField, d1: float, d2: float) -> float:
    """||f(. - d) - f||_2 via an exact spectral translate."""
    ga = grid_arrays(f.grid)
    fh = sfft.fft2(f.values)
    shifted = _shifted_values(fh, ga.kx, ga.ky, (d1, d2))
    diff = PhysicalScalarField(f.grid, shifted - f.values)
    return norms(diff)["l2"]


def diperna_lions_defect(omega: SpectralScalarField, forcing,
                         gamma: float, kernel: MollifierKernel) -> dict:
    """Defect q_eps = u . grad(J omega) + gamma J omega - J g of the
    mollified stationary equation, plus the commutator [u.grad, J] omega."""
    grid = omega.grid
    u = biot_savart(omega)
    w_eps = kernel.apply_spectral(omega)
    grad_w_eps = gradient(w_eps)
    adv_eps = PhysicalScalarField(
        grid, u.u1.values * grad_w_eps.u1.values
        + u.u2.values * grad_w_eps.u2.values)
    w_eps_phys = inverse_transform(w_eps)
    g_eps = inverse_transform(kernel.apply_spectral(forcing.g_hat))
    q = PhysicalScalarField(
        grid, adv_eps.values + gamma * w_eps_phys.values - g_eps.values)
    # commutator part: u . grad (J omega) - J (u . grad omega)
    grad_w = gradient(omega)
    adv = PhysicalScalarField(
        grid, u.u1.values * grad_w.u1.values + u.u2.values * grad_w.u2.values)
    adv_moll = mollify(adv, kernel)
    comm = PhysicalScalarField(grid, adv_eps.values - adv_moll.values)
    return {
        "q": q,
        "q_l1": norms(q)["l1"],
        "commutator": comm,
        "commutator_l1": norms(comm)["l1"],
    }
