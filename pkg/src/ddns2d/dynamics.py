"""Time integration of the damped, driven vorticity equation.

d omega/dt + u . grad omega - nu Lap omega + gamma omega = g,  u = K * omega.

The stiff diagonal -(gamma + nu |k|^2) is integrated exactly by an
integrating-factor RK4; the advection term is evaluated pseudo-spectrally
with 2/3-rule dealiasing.  The stepper works on the rfft2 half-spectrum
internally and exposes full-spectrum fields at observer times.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

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
from .spectral import (
    biot_savart,
    dealias,
    forward_transform,
    gradient,
    inner_product,
    inverse_transform,
    norms,
)


class BlowUpError(RuntimeError):
    """Non-finite coefficients appeared during time stepping."""

    def __init__(self, step_index: int, time: float):
        super().__init__(
            f"solution blew up at step {step_index} (t = {time:.6g})"
        )
        self.step_index = step_index
        self.time = time


@dataclass(frozen=True)
class SolverParams:
    nu: float
    gamma: float
    dt: float
    horizon: float
    t0: float = 0.0

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("viscosity must be nonnegative")
        if not (self.gamma > 0):
            raise ValueError("damping gamma must be strictly positive")
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if self.horizon < 0 or self.t0 < 0:
            raise ValueError("horizon and t0 must be nonnegative")


@dataclass(frozen=True, eq=False)
class ForcingSpec:
    """Vorticity source g, stored in both representations, mean-free."""

    kind: str
    g: PhysicalScalarField
    g_hat: SpectralScalarField

    @staticmethod
    def _finalize(kind: str, grid: GridSpec,
                  g_hat: SpectralScalarField) -> "ForcingSpec":
        g_hat = dealias(g_hat)
        if abs(g_hat.coeffs[0, 0]) > 1e-13 * max(
            1.0, float(np.max(np.abs(g_hat.coeffs)))
        ):
            raise FieldError("forcing must be mean-free")
        g_hat = SpectralScalarField(grid, g_hat.coeffs, mean_free=True)
        return ForcingSpec(kind, inverse_transform(g_hat), g_hat)

    @classmethod
    def zero(cls, grid: GridSpec) -> "ForcingSpec":
        z = SpectralScalarField(grid, np.zeros((grid.n, grid.n)),
                                mean_free=True)
        return cls._finalize("zero", grid, z)

    @classmethod
    def single_mode(cls, grid: GridSpec, k=(1, 0),
                    amplitude: float = 1.0) -> "ForcingSpec":
        ga = grid_arrays(grid)
        phase = k[0] * ga.x1 + k[1] * ga.x2
        g = PhysicalScalarField(grid, amplitude * np.cos(phase))
        return cls._finalize("single_mode", grid, forward_transform(g))

    @classmethod
    def kolmogorov(cls, grid: GridSpec, k_f: int = 4,
                   amplitude: float = 1.0) -> "ForcingSpec":
        ga = grid_arrays(grid)
        g = PhysicalScalarField(grid, amplitude * np.cos(k_f * ga.x2))
        return cls._finalize("kolmogorov", grid, forward_transform(g))

    @classmethod
    def localized_bump(cls, grid: GridSpec, center=(None, None),
                       radius: float = 1.0,
                       amplitude: float = 1.0) -> "ForcingSpec":
        """g = curl of a compactly supported smooth velocity forcing.

        A C-infinity bump psi is built first and g = d(psi)/dx1 is taken
        spectrally, so g = perp-div of f with f = (0, psi) exactly.
        """
        ga = grid_arrays(grid)
        c1 = grid.length / 2 if center[0] is None else center[0]
        c2 = grid.length / 2 if center[1] is None else center[1]
        psi = PhysicalScalarField(
            grid, amplitude * bump_profile(grid, (c1, c2), radius))
        psi_hat = forward_transform(psi)
        g_hat = SpectralScalarField(
            grid, 1j * ga.kx * psi_hat.coeffs, mean_free=True)
        return cls._finalize("localized_bump", grid, g_hat)

    @classmethod
    def from_file(cls, grid: GridSpec, path: str) -> "ForcingSpec":
        values = np.load(path)
        g = PhysicalScalarField(grid, values)
        g_hat = forward_transform(g)
        c = g_hat.coeffs.copy()
        c[0, 0] = 0.0
        return cls._finalize("from_file", grid,
                             SpectralScalarField(grid, c, mean_free=True))

    def injection_velocity(self) -> VectorField:
        """The divergence-free velocity forcing f with perp-div f = g."""
        return biot_savart(self.g_hat)


def periodic_distance(grid: GridSpec, center) -> np.ndarray:
    ga = grid_arrays(grid)
    L = grid.length
    d1 = np.abs(ga.x1 - center[0])
    d2 = np.abs(ga.x2 - center[1])
    d1 = np.minimum(d1, L - d1)
    d2 = np.minimum(d2, L - d2)
    return np.sqrt(d1 * d1 + d2 * d2)


def bump_profile(grid: GridSpec, center, radius: float) -> np.ndarray:
    """exp(-1/(1 - s^2)) bump of the periodic distance, zero outside."""
    s = periodic_distance(grid, center) / radius
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out / np.e ** -1  # normalized to 1 at the center


@dataclass(frozen=True)
class TrajectoryState:
    time: float
    omega: SpectralScalarField
    step_count: int


def _half_from_full(coeffs: np.ndarray, n: int) -> np.ndarray:
    return np.ascontiguousarray(coeffs[:, : n // 2 + 1])


def _full_from_half(half: np.ndarray, n: int) -> np.ndarray:
    full = np.zeros((n, n), dtype=np.complex128)
    full[:, : n // 2 + 1] = half
    # mirror the missing columns from Hermitian symmetry
    cols = np.arange(n // 2 + 1, n)
    src = n - cols
    row_mirror = np.roll(half[::-1, :], 1, axis=0)  # row i -> row (-i) mod n
    full[:, cols] = np.conj(row_mirror[:, src])
    return full


class Stepper:
    """Integrating-factor RK4 stepper bound to (grid, params, forcing)."""

    def __init__(self, grid: GridSpec, params: SolverParams,
                 forcing: ForcingSpec):
        self.grid = grid
        self.params = params
        self.forcing = forcing
        ga = grid_arrays(grid)
        self._kx = ga.kxh
        self._ky = ga.kyh
        self._ksq_inv = ga.ksq_invh
        self._mask = ga.dealias_maskh
        lam = -(params.gamma + params.nu * ga.ksqh)
        self._e_half = np.exp(lam * params.dt / 2.0)
        self._e_full = self._e_half**2
        n = grid.n
        self._n = n
        self._g_half = _half_from_full(forcing.g_hat.coeffs, n) * (n * n)

    # internal arrays carry the raw rfft2 scaling (no 1/N^2)

    def _nonlinear(self, w: np.ndarray) -> np.ndarray:
        """Dealiased -(u . grad omega) + g in half-spectrum."""
        u1 = sfft.irfft2(1j * self._ky * w * self._ksq_inv, s=(self._n,) * 2)
        u2 = sfft.irfft2(-1j * self._kx * w * self._ksq_inv, s=(self._n,) * 2)
        wm = w * self._mask
        wx = sfft.irfft2(1j * self._kx * wm, s=(self._n,) * 2)
        wy = sfft.irfft2(1j * self._ky * wm, s=(self._n,) * 2)
        adv = sfft.rfft2(u1 * wx + u2 * wy)
        out = -adv * self._mask + self._g_half
        out[0, 0] = 0.0
        return out

    def step_half(self, w: np.ndarray) -> np.ndarray:
        dt = self.params.dt
        e, e2 = self._e_half, self._e_full
        n1 = self._nonlinear(w)
        n2 = self._nonlinear(e * (w + 0.5 * dt * n1))
        n3 = self._nonlinear(e * w + 0.5 * dt * n2)
        n4 = self._nonlinear(e2 * w + dt * e * n3)
        out = e2 * w + (dt / 6.0) * (e2 * n1 + 2.0 * e * (n2 + n3) + n4)
        out[0, 0] = 0.0
        return out

    def max_speed(self, w: np.ndarray) -> float:
        u1 = sfft.irfft2(1j * self._ky * w * self._ksq_inv, s=(self._n,) * 2)
        u2 = sfft.irfft2(-1j * self._kx * w * self._ksq_inv, s=(self._n,) * 2)
        return float(np.max(np.sqrt(u1 * u1 + u2 * u2)))

    def state_from_half(self, w: np.ndarray, time: float,
                        step_count: int) -> TrajectoryState:
        coeffs = _full_from_half(w, self._n) / (self._n * self._n)
        omega = SpectralScalarField(self.grid, coeffs, mean_free=True)
        return TrajectoryState(time, omega, step_count)

    def half_from_state(self, state: TrajectoryState) -> np.ndarray:
        n = self._n
        return _half_from_full(state.omega.coeffs, n) * (n * n)


def nonlinear_term(omega: SpectralScalarField) -> SpectralScalarField:
    """Dealiased pseudo-spectral u . grad omega."""
    u = biot_savart(omega)
    gw = gradient(dealias(omega))
    u1 = inverse_transform(dealias(forward_transform(u.u1)))
    u2 = inverse_transform(dealias(forward_transform(u.u2)))
    adv = PhysicalScalarField(
        omega.grid, u1.values * gw.u1.values + u2.values * gw.u2.values)
    out = dealias(forward_transform(adv))
    c = out.coeffs.copy()
    c[0, 0] = 0.0
    return SpectralScalarField(omega.grid, c, mean_free=True)


def step(state: TrajectoryState, params: SolverParams,
         forcing: ForcingSpec) -> TrajectoryState:
    """Advance one dt; raises BlowUpError on non-finite output."""
    stepper = Stepper(state.omega.grid, params, forcing)
    w = stepper.half_from_state(state)
    w = stepper.step_half(w)
    if not np.all(np.isfinite(w)):
        raise BlowUpError(state.step_count + 1, state.time + params.dt)
    return stepper.state_from_half(w, state.time + params.dt,
                                   state.step_count + 1)


def integrate(omega0: SpectralScalarField, params: SolverParams,
              forcing: ForcingSpec, observers=(),
              observer_stride: int = 1) -> TrajectoryState:
    """March from t=0 to t0 + horizon, notifying observers at the stride.

    Observers are called with immutable TrajectoryState snapshots at t=0,
    every `observer_stride` steps, and at the final time.  Deterministic
    for identical inputs.
    """
    grid = omega0.grid
    w0 = dealias(omega0)
    c = w0.coeffs.copy()
    c[0, 0] = 0.0
    w0 = SpectralScalarField(grid, c, mean_free=True)
    stepper = Stepper(grid, params, forcing)
    total = params.t0 + params.horizon
    n_steps = int(round(total / params.dt))
    w = stepper.half_from_state(TrajectoryState(0.0, w0, 0))
    state = stepper.state_from_half(w, 0.0, 0)
    for obs in observers:
        obs(state)
    cfl_checked_at = -1
    for i in range(1, n_steps + 1):
        w = stepper.step_half(w)
        if not np.all(np.isfinite(w)):
            raise BlowUpError(i, i * params.dt)
        if i % observer_stride == 0 or i == n_steps:
            state = stepper.state_from_half(w, i * params.dt, i)
            if i != cfl_checked_at:
                speed = stepper.max_speed(w)
                if speed > 0 and params.dt > 0.5 * grid.h / speed:
                    warnings.warn(
                        f"advective CFL exceeded at t={state.time:.4g}: "
                        f"dt={params.dt:.3g} > 0.5 h / max|u| = "
                        f"{0.5 * grid.h / speed:.3g}",
                        RuntimeWarning, stacklevel=2)
                cfl_checked_at = i
            if i % observer_stride == 0:
                for obs in observers:
                    obs(state)
    if n_steps % observer_stride != 0 and n_steps > 0:
        for obs in observers:
            obs(state)
    return state


# ---------------------------------------------------------------------------
# balance diagnostics on sampled scalar series
# ---------------------------------------------------------------------------

@dataclass
class BalanceSeries:
    """Uniformly sampled scalars entering a quadratic balance law.

    ``quantity`` is the squared norm whose half time derivative enters the
    balance, ``dissipation`` the nu-weighted gradient term, ``damping`` the
    gamma-weighted term, ``injection`` the forcing pairing and
    ``normalizer`` the positive scale used to normalize the residual.
    """

    times: np.ndarray
    quantity: np.ndarray
    dissipation: np.ndarray
    damping: np.ndarray
    injection: np.ndarray
    normalizer: np.ndarray
    source: np.ndarray | None = None  # optional exact right-hand side


def _balance_residual(series: BalanceSeries) -> float:
    t = np.asarray(series.times)
    if t.size < 3:
        raise ValueError("balance residual needs at least 3 samples")
    q = np.asarray(series.quantity)
    dq = (q[2:] - q[:-2]) / (t[2:] - t[:-2])
    rhs = np.zeros_like(dq) if series.source is None else series.source[1:-1]
    resid = (0.5 * dq + series.damping[1:-1] + series.dissipation[1:-1]
             - series.injection[1:-1] - rhs)
    norm = np.maximum(series.normalizer[1:-1], 1e-300)
    return float(np.max(np.abs(resid) / norm))


def energy_balance_residual(series: BalanceSeries) -> float:
    """Max normalized defect of the energy equality over the segment."""
    return _balance_residual(series)


def enstrophy_balance_residual(series: BalanceSeries) -> float:
    """Max normalized defect of the enstrophy balance over the segment."""
    return _balance_residual(series)


def decay_envelope(t, initial_norm: float, g_norm: float,
                   gamma: float) -> np.ndarray:
    """Viscosity-independent L^p bound e^{-gt}(|w0| - |g|/g) + |g|/g."""
    t = np.asarray(t, dtype=np.float64)
    return (np.exp(-gamma * t) * (initial_norm - g_norm / gamma)
            + g_norm / gamma)


@dataclass
class EnvelopeReport:
    p: float
    tolerance: float
    violations: list
    max_excess: float

    @property
    def ok(self) -> bool:
        return not self.violations


def decay_envelope_check(times, norm_samples, p, gamma: float,
                         initial_norm: float, g_norm: float) -> EnvelopeReport:
    """Check samples of ||omega(t)||_p against the damping envelope.

    The tolerance absorbs spectral discretization overshoot (Gibbs) which
    matters for p = infinity; the bound itself is viscosity independent.
    """
    tol = 1e-3 * (initial_norm + g_norm / gamma)
    bound = decay_envelope(times, initial_norm, g_norm, gamma) + tol
    samples = np.asarray(norm_samples)
    excess = samples - bound
    bad = [
        (float(t), float(s), float(b))
        for t, s, b in zip(times, samples, bound)
        if s > b
    ]
    return EnvelopeReport(p, tol, bad, float(np.max(excess)))


def steady_state_residual(omega: SpectralScalarField, params: SolverParams,
                          forcing: ForcingSpec) -> tuple[float, float]:
    """(L2 residual of the stationary equation, stationary balance defect)."""
    adv = nonlinear_term(omega)
    ga = grid_arrays(omega.grid)
    resid_hat = (params.gamma * omega.coeffs + adv.coeffs
                 + params.nu * ga.ksq * omega.coeffs - forcing.g_hat.coeffs)
    resid = inverse_transform(SpectralScalarField(omega.grid, resid_hat))
    l2 = norms(resid)["l2"]
    w_phys = inverse_transform(omega)
    grad_w = gradient(omega)
    ens = inner_product(w_phys, w_phys)
    pal = (inner_product(grad_w.u1, grad_w.u1)
           + inner_product(grad_w.u2, grad_w.u2))
    inj = inner_product(forcing.g, w_phys)
    defect = abs(params.gamma * ens + params.nu * pal - inj)
    return l2, defect
