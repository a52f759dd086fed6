"""Long-time averages and stationarity checks for the empirical measure.

A trajectory's empirical measure is represented by finite-horizon Cesaro
averages of scalar functionals (trapezoid in time); the Banach limit of
the construction is replaced by the average over [t0, t0 + T] together
with its telescoping error bar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_trapezoid = getattr(np, "trapezoid", np.trapz)

from .dynamics import ForcingSpec, SolverParams, TrajectoryState
from .grid import (
    FieldError,
    GridSpec,
    PhysicalScalarField,
    SpectralScalarField,
    grid_arrays,
)
from .mollify import MollifierKernel, RenormalizerBeta, alpha_eps, mollify
from .spectral import (
    biot_savart,
    dealias,
    forward_transform,
    gradient,
    inner_product,
    inverse_transform,
    laplacian,
    norms,
)


# ---------------------------------------------------------------------------
# outer functions psi with closed-form gradients
# ---------------------------------------------------------------------------

class LinearPsi:
    """psi(a) = c . a"""

    def __init__(self, c):
        self.c = np.asarray(c, dtype=np.float64)

    def value(self, a):
        return float(self.c @ np.asarray(a))

    def grad(self, a):
        return self.c.copy()


class HalfSumSquaresPsi:
    """psi(a) = (1/2) sum a_j^2"""

    def value(self, a):
        a = np.asarray(a)
        return 0.5 * float(a @ a)

    def grad(self, a):
        return np.asarray(a, dtype=np.float64).copy()


class CosineCharacterPsi:
    """psi(a) = cos(c . a), the real part of the character exp(i c . a)."""

    def __init__(self, c):
        self.c = np.asarray(c, dtype=np.float64)

    def value(self, a):
        return float(np.cos(self.c @ np.asarray(a)))

    def grad(self, a):
        return -np.sin(self.c @ np.asarray(a)) * self.c


@dataclass(frozen=True, eq=False)
class TestFunctionalSpec:
    """Cylindrical test functional psi(<omega, w_1>, ..., <omega, w_m>),
    optionally composed with the mollified renormalization
    alpha_eps(omega) = J_eps beta(J_eps omega)."""

    __test__ = False  # keep pytest from collecting this as a test class

    name: str
    kind: str  # "type_I" | "type_eps"
    psi: object
    w: tuple[PhysicalScalarField, ...]
    kernel: MollifierKernel | None = None
    beta: RenormalizerBeta | None = None

    def __post_init__(self):
        if self.kind not in ("type_I", "type_eps"):
            raise FieldError(f"unknown functional kind {self.kind!r}")
        if self.kind == "type_eps" and (self.kernel is None
                                        or self.beta is None):
            raise FieldError("type_eps functionals need a kernel and a beta")
        if not self.w:
            raise FieldError("at least one test field is required")


def low_harmonic_test_fields(grid: GridSpec, m: int = 3) \
        -> tuple[PhysicalScalarField, ...]:
    """Orthonormal, mean-free, band-limited test fields."""
    ga = grid_arrays(grid)
    scale = 2.0 * np.pi / grid.length
    raw = [
        np.cos(scale * ga.x1),
        np.sin(scale * ga.x2),
        np.cos(scale * (ga.x1 + ga.x2)),
        np.sin(scale * (2 * ga.x1 - ga.x2)),
        np.cos(scale * 2 * ga.x2),
    ][:m]
    fields: list[PhysicalScalarField] = []
    for v in raw:
        f = PhysicalScalarField(grid, v)
        for prev in fields:
            v = v - inner_product(f, prev) * prev.values
            f = PhysicalScalarField(grid, v)
        nrm = norms(f)["l2"]
        fields.append(PhysicalScalarField(grid, v / nrm))
    return tuple(fields)


def functional_catalog(grid: GridSpec, kernel: MollifierKernel | None = None,
                       beta: RenormalizerBeta | None = None, m: int = 3) \
        -> list[TestFunctionalSpec]:
    """One functional per psi kind; type_eps variants when a kernel is given."""
    w = low_harmonic_test_fields(grid, m)
    c = np.linspace(1.0, 0.5, m)
    specs = [
        TestFunctionalSpec("linear", "type_I", LinearPsi(c), w),
        TestFunctionalSpec("half_sum_squares", "type_I",
                           HalfSumSquaresPsi(), w),
        TestFunctionalSpec("cosine_character", "type_I",
                           CosineCharacterPsi(c), w),
    ]
    if kernel is not None and beta is not None:
        specs += [
            TestFunctionalSpec("linear_eps", "type_eps", LinearPsi(c), w,
                               kernel, beta),
            TestFunctionalSpec("half_sum_squares_eps", "type_eps",
                               HalfSumSquaresPsi(), w, kernel, beta),
        ]
    return specs


def _inner_arguments(spec: TestFunctionalSpec,
                     omega_phys: PhysicalScalarField) -> np.ndarray:
    if spec.kind == "type_I":
        probe = omega_phys
    else:
        probe = alpha_eps(omega_phys, spec.kernel, spec.beta)
    return np.array([inner_product(probe, wj) for wj in spec.w])


def eval_psi(spec: TestFunctionalSpec, omega: SpectralScalarField) -> float:
    omega_phys = inverse_transform(omega)
    return spec.psi.value(_inner_arguments(spec, omega_phys))


def eval_psi_prime(spec: TestFunctionalSpec,
                   omega: SpectralScalarField) -> PhysicalScalarField:
    """Riesz representative of the functional derivative.

    type_I: sum_j d_j psi * w_j.
    type_eps: sum_j d_j psi * J_eps(beta'(J_eps omega) J_eps w_j).
    """
    omega_phys = inverse_transform(omega)
    coeffs = spec.psi.grad(_inner_arguments(spec, omega_phys))
    grid = omega.grid
    if spec.kind == "type_I":
        acc = np.zeros((grid.n, grid.n))
        for cj, wj in zip(coeffs, spec.w):
            acc += cj * wj.values
        return PhysicalScalarField(grid, acc)
    beta_prime = spec.beta.beta_prime(
        mollify(omega_phys, spec.kernel).values)
    acc = np.zeros((grid.n, grid.n))
    for cj, wj in zip(coeffs, spec.w):
        inner = beta_prime * mollify(wj, spec.kernel).values
        acc += cj * mollify(PhysicalScalarField(grid, inner),
                            spec.kernel).values
    return PhysicalScalarField(grid, acc)


def F1(spec: TestFunctionalSpec, omega: SpectralScalarField, gamma: float,
       forcing: ForcingSpec) -> float:
    """<Psi'(omega), gamma omega - g>"""
    psi_prime = eval_psi_prime(spec, omega)
    omega_phys = inverse_transform(omega)
    target = PhysicalScalarField(
        omega.grid, gamma * omega_phys.values - forcing.g.values)
    return inner_product(psi_prime, target)


def F2(spec: TestFunctionalSpec, omega: SpectralScalarField) -> float:
    """<grad Psi'(omega), grad omega>, spectral gradients of both factors."""
    psi_prime_hat = forward_transform(eval_psi_prime(spec, omega))
    gp = gradient(psi_prime_hat)
    gw = gradient(omega)
    return (inner_product(gp.u1, gw.u1) + inner_product(gp.u2, gw.u2))


def F2_selfadjoint(spec: TestFunctionalSpec,
                   omega: SpectralScalarField) -> float:
    """Integration-by-parts form -<Lap Psi'(omega), omega>."""
    psi_prime_hat = forward_transform(eval_psi_prime(spec, omega))
    lap = inverse_transform(laplacian(psi_prime_hat))
    return -inner_product(lap, inverse_transform(omega))


def F3(spec: TestFunctionalSpec, omega: SpectralScalarField) -> float:
    """<Psi'(omega), u . grad omega> via -<u . grad Psi'(omega), omega>."""
    u = biot_savart(omega)
    psi_prime_hat = dealias(forward_transform(eval_psi_prime(spec, omega)))
    gp = gradient(psi_prime_hat)
    advected = PhysicalScalarField(
        omega.grid,
        u.u1.values * gp.u1.values + u.u2.values * gp.u2.values)
    return -inner_product(advected, inverse_transform(omega))


# ---------------------------------------------------------------------------
# time averaging
# ---------------------------------------------------------------------------

class AverageAccumulator:
    """Trapezoidal Cesaro averages of sampled scalar functionals.

    Samples before t0 are ignored (transient); boundary values at entry and
    at the latest sample are retained for the telescoping checks.
    """

    def __init__(self, t0: float = 0.0):
        self.t0 = t0
        self.times: list[float] = []
        self.series: dict[str, list[float]] = {}

    def add_sample(self, t: float, values: dict[str, float]):
        if t < self.t0 - 1e-12:
            return
        if self.times and t <= self.times[-1]:
            return
        if self.times and set(values) != set(self.series):
            raise FieldError("sample keys changed between observations")
        self.times.append(t)
        for k, v in values.items():
            self.series.setdefault(k, []).append(float(v))

    @property
    def elapsed(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return self.times[-1] - self.times[0]

    def _require(self, key: str) -> np.ndarray:
        if self.elapsed <= 0:
            raise FieldError("accumulator needs elapsed > 0 before reads")
        return np.asarray(self.series[key])

    def average(self, key: str) -> float:
        vals = self._require(key)
        t = np.asarray(self.times)
        return float(_trapezoid(vals, t) / self.elapsed)

    def boundary(self, key: str) -> tuple[float, float]:
        vals = self._require(key)
        return float(vals[0]), float(vals[-1])

    def quadrature_tolerance(self, key: str) -> float:
        """Bound on the trapezoid error of average(key).

        err <= (h^2/12) int |f''| ~ (h/12) sum |second differences|.
        """
        vals = self._require(key)
        if vals.size < 3:
            return np.inf
        h = self.elapsed / (vals.size - 1)
        total_curv = float(np.sum(np.abs(np.diff(vals, 2))))
        return (h / 12.0) * total_curv / self.elapsed


@dataclass
class StationarityResult:
    residual: float
    telescoped_bound: float
    defect: float
    tolerance: float

    @property
    def consistent(self) -> bool:
        return self.defect <= self.tolerance


def stationarity_residual(spec_name: str,
                          acc: AverageAccumulator) -> StationarityResult:
    """Average of F1 + nu F2 + F3 against the telescoped Psi difference.

    The chain rule along the flow gives d Psi/dt = -(F1 + nu F2 + F3), so
    the residual must equal (Psi(t0) - Psi(t0+T))/T up to time quadrature;
    the two sides are computed by independent code paths.
    """
    fkey = f"Ftotal::{spec_name}"
    pkey = f"psi::{spec_name}"
    residual = acc.average(fkey)
    first, last = acc.boundary(pkey)
    telescoped = (first - last) / acc.elapsed
    tol = 3.0 * acc.quadrature_tolerance(fkey) + 1e-9 * (
        1.0 + abs(first) + abs(last))
    return StationarityResult(residual, abs(last - first) / acc.elapsed,
                              abs(residual - telescoped), tol)


@dataclass
class ShellBalance:
    value: float
    occupancy: float
    empty: bool


def shell_balance(acc: AverageAccumulator, e1: float,
                  e2: float) -> ShellBalance:
    """Average of gamma||w||^2 + nu||grad w||^2 - <g, w> restricted to the
    shell E1 <= ||w||_2 <= E2, with the fraction of time spent there."""
    l2 = acc._require("omega_l2")
    integrand = acc._require("balance_integrand")
    t = np.asarray(acc.times)
    mask = (l2 >= e1) & (l2 <= e2)
    occupancy = float(_trapezoid(mask.astype(float), t) / acc.elapsed)
    if not np.any(mask):
        return ShellBalance(0.0, 0.0, True)
    value = float(_trapezoid(integrand * mask, t) / acc.elapsed)
    return ShellBalance(value, occupancy, False)


@dataclass
class MeasureReport:
    mean_enstrophy: float
    mean_palinstrophy: float
    mean_injection: float
    dissipation_rate: float
    balance_gap: float
    telescoping_slack: float
    quadrature_tolerance: float
    gineq_satisfied: bool
    gineq_margin: float
    support_radius_l1: float
    support_radius_l2: float
    support_radius_linf: float
    t0: float
    elapsed: float
    stationarity: dict[str, StationarityResult] = field(default_factory=dict)
    shells: dict[str, ShellBalance] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            k: getattr(self, k)
            for k in (
                "mean_enstrophy", "mean_palinstrophy", "mean_injection",
                "dissipation_rate", "balance_gap", "telescoping_slack",
                "quadrature_tolerance", "gineq_satisfied", "gineq_margin",
                "support_radius_l1", "support_radius_l2",
                "support_radius_linf", "t0", "elapsed",
            )
        }
        out["stationarity"] = {
            name: {
                "residual": r.residual,
                "telescoped_bound": r.telescoped_bound,
                "defect": r.defect,
                "tolerance": r.tolerance,
                "consistent": r.consistent,
            }
            for name, r in self.stationarity.items()
        }
        out["shells"] = {
            name: {"value": s.value, "occupancy": s.occupancy,
                   "empty": s.empty}
            for name, s in self.shells.items()
        }
        return out


def measure_report(acc: AverageAccumulator, params: SolverParams,
                   functional_names=(), shell_specs=None) -> MeasureReport:
    """Assemble the averaged quantities of one empirical measure.

    The dissipation inequality nu<||grad w||^2> <= <<g,w>> - gamma<||w||^2>
    is checked up to the telescoping slack (||w(t0)||^2+||w(end)||^2)/(2T)
    plus the time-quadrature tolerance.
    """
    ens = acc.average("enstrophy")
    pal = acc.average("palinstrophy")
    inj = acc.average("injection")
    first_ens, last_ens = acc.boundary("enstrophy")
    slack = (first_ens + last_ens) / (2.0 * acc.elapsed)
    qtol = (acc.quadrature_tolerance("enstrophy")
            + acc.quadrature_tolerance("palinstrophy") * params.nu
            + acc.quadrature_tolerance("injection"))
    dissipation = params.nu * pal
    gineq_margin = (inj - params.gamma * ens + slack + qtol) - dissipation
    report = MeasureReport(
        mean_enstrophy=ens,
        mean_palinstrophy=pal,
        mean_injection=inj,
        dissipation_rate=dissipation,
        balance_gap=params.gamma * ens - inj,
        telescoping_slack=slack,
        quadrature_tolerance=qtol,
        gineq_satisfied=gineq_margin >= 0.0,
        gineq_margin=gineq_margin,
        support_radius_l1=float(np.max(acc._require("omega_l1"))),
        support_radius_l2=float(np.max(acc._require("omega_l2"))),
        support_radius_linf=float(np.max(acc._require("omega_linf"))),
        t0=acc.t0,
        elapsed=acc.elapsed,
    )
    for name in functional_names:
        report.stationarity[name] = stationarity_residual(name, acc)
    for name, (e1, e2) in (shell_specs or {}).items():
        report.shells[name] = shell_balance(acc, e1, e2)
    return report


def derived_transient(initial_l2: float, g_l2: float, gamma: float,
                      slack: float = 0.01) -> float:
    """Entry time after which the damping envelope sits inside the support
    ball ||w||_2 <= (1 + slack) ||g||_2 / gamma."""
    ball = g_l2 / gamma
    if ball <= 0:
        return (1.0 / gamma) * np.log(max(initial_l2, 1.0) / 1e-12)
    if initial_l2 <= (1.0 + slack) * ball:
        return 0.0
    return float(np.log((initial_l2 - ball) / (slack * ball)) / gamma)


# ---------------------------------------------------------------------------
# trajectory observer feeding the accumulator
# ---------------------------------------------------------------------------

class StatisticsRecorder:
    """Observer computing the per-sample scalars the harness consumes."""

    def __init__(self, params: SolverParams, forcing: ForcingSpec,
                 specs: list[TestFunctionalSpec] = (),
                 accumulator: AverageAccumulator | None = None):
        self.params = params
        self.forcing = forcing
        self.specs = list(specs)
        self.acc = accumulator or AverageAccumulator(t0=params.t0)
        self._f_vel = None

    def _velocity_forcing(self):
        if self._f_vel is None:
            self._f_vel = self.forcing.injection_velocity()
        return self._f_vel

    def __call__(self, state: TrajectoryState):
        omega = state.omega
        params = self.params
        w_phys = inverse_transform(omega)
        nr = norms(w_phys)
        gw = gradient(omega)
        ens = inner_product(w_phys, w_phys)
        pal = (inner_product(gw.u1, gw.u1) + inner_product(gw.u2, gw.u2))
        inj = inner_product(self.forcing.g, w_phys)
        values = {
            "enstrophy": ens,
            "palinstrophy": pal,
            "injection": inj,
            "omega_l1": nr["l1"],
            "omega_l2": nr["l2"],
            "omega_linf": nr["linf"],
            "balance_integrand": (params.gamma * ens + params.nu * pal
                                  - inj),
        }
        for spec in self.specs:
            f_total = (F1(spec, omega, params.gamma, self.forcing)
                       + params.nu * F2(spec, omega) + F3(spec, omega))
            values[f"Ftotal::{spec.name}"] = f_total
            values[f"psi::{spec.name}"] = eval_psi(spec, omega)
        self.acc.add_sample(state.time, values)
