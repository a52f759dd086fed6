"""Experiment drivers: single runs, viscosity sweeps, travel tracking.

Configuration is a small YAML file; all physical parameters are in the
units of the L = 2 pi torus unless the config enlarges the domain.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from .dynamics import (
    BlowUpError,
    ForcingSpec,
    SolverParams,
    TrajectoryState,
    integrate,
)
from .grid import (
    FieldError,
    GridSpec,
    PhysicalScalarField,
    SpectralScalarField,
    grid_arrays,
)
from .mollify import MollifierKernel, RenormalizerBeta
from .spectral import (
    dealias,
    forward_transform,
    inner_product,
    inverse_transform,
    l2_norm_spectral,
    norms,
)
from .statistics import (
    AverageAccumulator,
    MeasureReport,
    StatisticsRecorder,
    derived_transient,
    functional_catalog,
    measure_report,
)

TIMESERIES_COLUMNS = (
    "t", "energy", "enstrophy", "palinstrophy", "injection", "linf", "l1",
    "damping", "dissipation",
)
SPECTRUM_COLUMNS = ("k", "energy", "enstrophy")
SWEEP_COLUMNS = (
    "nu", "mean_enstrophy", "mean_palinstrophy", "dissipation_rate",
    "balance_gap", "telescoping_slack", "T", "t0",
)


class ConfigError(ValueError):
    """Raised when an experiment configuration is invalid."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; holds only plain data so that
    sweep members can be shipped to worker processes."""

    raw: dict

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        cfg = cls(dict(data))
        cfg.grid()  # validate eagerly
        cfg.solver_raw()
        sweep = cfg.sweep_values()
        if sweep is not None:
            if not sweep:
                raise ConfigError("sweep list must not be empty")
            if any(v <= 0 for v in sweep):
                raise ConfigError("sweep viscosities must be positive")
            if any(b >= a for a, b in zip(sweep, sweep[1:])):
                raise ConfigError("sweep viscosities must be"
                                  " strictly decreasing")
        return cfg

    def _section(self, key: str, default=None) -> dict:
        got = self.raw.get(key, default)
        if got is None:
            raise ConfigError(f"config section {key!r} is required")
        if not isinstance(got, dict):
            raise ConfigError(f"config section {key!r} must be a mapping")
        return got

    def grid(self) -> GridSpec:
        g = self._section("grid", {"n": 128})
        try:
            return GridSpec(int(g.get("n", 128)),
                            float(g.get("length", 2.0 * np.pi)),
                            float(g.get("dealias_fraction", 2.0 / 3.0)))
        except FieldError as exc:
            raise ConfigError(str(exc)) from exc

    def solver_raw(self) -> dict:
        s = self._section("solver")
        try:
            out = {
                "nu": float(s["nu"]),
                "gamma": float(s["gamma"]),
                "dt": float(s["dt"]),
                "horizon": float(s["horizon"]),
                "t0": s.get("t0", "auto"),
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad solver section: {exc}") from exc
        if out["t0"] != "auto":
            out["t0"] = float(out["t0"])
        return out

    def solver(self, omega0_l2: float, forcing: ForcingSpec,
               nu: float | None = None) -> SolverParams:
        s = self.solver_raw()
        if nu is not None:
            s["nu"] = nu
        if s["t0"] == "auto":
            g_l2 = l2_norm_spectral(forcing.g_hat)
            s["t0"] = derived_transient(omega0_l2, g_l2, s["gamma"])
        try:
            return SolverParams(**s)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def forcing(self, grid: GridSpec) -> ForcingSpec:
        f = self._section("forcing", {"kind": "zero"})
        kind = f.get("kind", "zero")
        try:
            if kind == "zero":
                return ForcingSpec.zero(grid)
            if kind == "single_mode":
                return ForcingSpec.single_mode(
                    grid, tuple(f.get("k", (1, 0))),
                    float(f.get("amplitude", 1.0)))
            if kind == "kolmogorov":
                return ForcingSpec.kolmogorov(grid, int(f.get("k_f", 4)),
                                              float(f.get("amplitude", 1.0)))
            if kind == "localized_bump":
                return ForcingSpec.localized_bump(
                    grid, tuple(f.get("center", (None, None))),
                    float(f.get("radius", 1.0)),
                    float(f.get("amplitude", 1.0)))
            if kind == "file":
                return ForcingSpec.from_file(grid, f["path"])
        except (FieldError, KeyError, OSError) as exc:
            raise ConfigError(f"bad forcing section: {exc}") from exc
        raise ConfigError(f"unknown forcing kind {kind!r}")

    def initial_condition(self, grid: GridSpec,
                          seed: int | None = None) -> SpectralScalarField:
        ic = self._section("initial", {"kind": "random"})
        kind = ic.get("kind", "random")
        if kind == "random":
            return random_initial_condition(
                grid,
                self.seed() if seed is None else seed,
                int(ic.get("kmax", 4)),
                float(ic.get("amplitude", 1.0)))
        if kind == "localized_bump":
            return localized_initial_condition(
                grid, tuple(ic.get("center", (None, None))),
                float(ic.get("radius", 1.0)),
                float(ic.get("amplitude", 1.0)))
        raise ConfigError(f"unknown initial-condition kind {kind!r}")

    def sweep_values(self) -> list[float] | None:
        sweep = self.raw.get("sweep")
        if sweep is None:
            return None
        if not isinstance(sweep, (list, tuple)):
            raise ConfigError("sweep must be a list of viscosities")
        return [float(v) for v in sweep]

    def mollifier(self, grid: GridSpec) \
            -> tuple[MollifierKernel | None, RenormalizerBeta | None]:
        m = self.raw.get("mollifier")
        if not m:
            return None, None
        try:
            kernel = MollifierKernel(grid, float(m["epsilon"]))
        except (FieldError, KeyError) as exc:
            raise ConfigError(f"bad mollifier section: {exc}") from exc
        return kernel, RenormalizerBeta(float(m.get("beta_m", 100.0)))

    def functional_names(self) -> list[str]:
        return list(self.raw.get("functionals", []))

    def outputs(self) -> str:
        return str(self.raw.get("outputs", "out"))

    def seed(self) -> int:
        return int(self.raw.get("seed", 0))

    def observer_stride(self) -> int:
        stride = int(self.raw.get("observer_stride", 10))
        if stride < 1:
            raise ConfigError("observer_stride must be >= 1")
        return stride

    def override(self, **entries) -> "ExperimentConfig":
        data = dict(self.raw)
        data.update({k: v for k, v in entries.items() if v is not None})
        return ExperimentConfig.from_dict(data)


def random_initial_condition(grid: GridSpec, seed: int, kmax: int = 4,
                             amplitude: float = 1.0) -> SpectralScalarField:
    """Mean-free band-limited field with modes |k|_inf <= kmax, scaled to
    the requested L2 norm.  Identical seeds give identical fields."""
    rng = np.random.default_rng(seed)
    ga = grid_arrays(grid)
    scale = 2.0 * np.pi / grid.length
    vals = np.zeros((grid.n, grid.n))
    for k1 in range(-kmax, kmax + 1):
        for k2 in range(0, kmax + 1):
            if k2 == 0 and k1 <= 0:
                continue
            a, b = rng.normal(size=2) / (1.0 + k1 * k1 + k2 * k2)
            phase = scale * (k1 * ga.x1 + k2 * ga.x2)
            vals += a * np.cos(phase) + b * np.sin(phase)
    f = PhysicalScalarField(grid, vals)
    nrm = norms(f)["l2"]
    if amplitude == 0.0 or nrm == 0.0:
        vals = np.zeros_like(vals)
    else:
        vals = vals * (amplitude / nrm)
    out = forward_transform(PhysicalScalarField(grid, vals))
    return SpectralScalarField(grid, out.coeffs, mean_free=True)


def localized_bump_derivative(grid: GridSpec, center=(None, None),
                              radius: float = 1.0,
                              amplitude: float = 1.0) -> np.ndarray:
    """Analytic x1 derivative of the smooth bump, sampled pointwise.

    The samples vanish identically outside the support ball, so grid
    quadratures of localization masses are exact zeros there (a spectral
    derivative would ring into the far field instead).
    """
    ga = grid_arrays(grid)
    L = grid.length
    c1 = L / 2.0 if center[0] is None else center[0]
    c2 = L / 2.0 if center[1] is None else center[1]
    w1 = np.mod(ga.x1 - c1 + L / 2.0, L) - L / 2.0
    w2 = np.mod(ga.x2 - c2 + L / 2.0, L) - L / 2.0
    d = np.sqrt(w1 * w1 + w2 * w2)
    s = d / radius
    out = np.zeros_like(s)
    inside = (s < 1.0) & (d > 0)
    sm = s[inside]
    profile = np.e * np.exp(-1.0 / (1.0 - sm * sm))
    out[inside] = (amplitude * profile * (-2.0 * sm / (1.0 - sm * sm) ** 2)
                   * w1[inside] / (radius * d[inside]))
    return out


def localized_initial_condition(grid: GridSpec, center=(None, None),
                                radius: float = 1.0,
                                amplitude: float = 1.0) -> SpectralScalarField:
    """Mean-free vorticity supported in a ball: the x1 derivative of a
    smooth bump, so localization and zero mean hold simultaneously."""
    vals = localized_bump_derivative(grid, center, radius, amplitude)
    out = forward_transform(PhysicalScalarField(grid, vals))
    return SpectralScalarField(grid, out.coeffs, mean_free=True)


# ---------------------------------------------------------------------------
# observers and serialization
# ---------------------------------------------------------------------------

class DiagnosticRecorder:
    """Observer writing the time-series scalars and feeding the averages."""

    def __init__(self, params: SolverParams, forcing: ForcingSpec,
                 specs=()):
        self.stats = StatisticsRecorder(params, forcing, specs)
        self.rows: list[tuple] = []
        self._ksq_inv = grid_arrays(forcing.g.grid).ksq_inv
        self._L = forcing.g.grid.length

    def __call__(self, state: TrajectoryState):
        c = state.omega.coeffs
        energy = float(np.sum(np.abs(c) ** 2 * self._ksq_inv)) * self._L**2
        self.stats(state)
        s = self.stats.acc.series
        if self.stats.acc.times and \
                abs(self.stats.acc.times[-1] - state.time) < 1e-12:
            ens = s["enstrophy"][-1]
            pal = s["palinstrophy"][-1]
            inj = s["injection"][-1]
            linf = s["omega_linf"][-1]
            l1 = s["omega_l1"][-1]
        else:  # transient sample, not retained by the accumulator
            w = inverse_transform(state.omega)
            nr = norms(w)
            from .spectral import gradient
            gw = gradient(state.omega)
            ens = inner_product(w, w)
            pal = (inner_product(gw.u1, gw.u1)
                   + inner_product(gw.u2, gw.u2))
            inj = inner_product(self.stats.forcing.g, w)
            linf, l1 = nr["linf"], nr["l1"]
        params = self.stats.params
        self.rows.append((state.time, energy, ens, pal, inj, linf, l1,
                          params.gamma * ens, params.nu * pal))


def write_timeseries(path: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(TIMESERIES_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def write_report(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def radial_spectrum(omega: SpectralScalarField) -> list[tuple]:
    """Shell-summed enstrophy and energy densities of one snapshot."""
    grid = omega.grid
    ga = grid_arrays(grid)
    kmag = np.sqrt(ga.ksq).ravel()
    z = (np.abs(omega.coeffs) ** 2).ravel() * grid.length**2
    kmax = int(np.floor(np.max(kmag)))
    rows = []
    for k in range(1, kmax + 1):
        sel = (kmag >= k - 0.5) & (kmag < k + 0.5)
        if not np.any(sel):
            continue
        zk = float(np.sum(z[sel]))
        rows.append((float(k), zk / k**2, zk))
    return rows


def write_spectrum(path: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(SPECTRUM_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def write_sweep_csv(path: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


# ---------------------------------------------------------------------------
# resolution guard
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResolutionGuard:
    nu: float
    k_dissipation: float
    cutoff: float
    required_n: int

    @property
    def ok(self) -> bool:
        return self.k_dissipation <= self.cutoff


def resolution_guard(grid: GridSpec, nu: float,
                     enstrophy_flux: float) -> ResolutionGuard:
    """Estimate the dissipation wavenumber (flux/nu^3)^(1/6) from a pilot
    enstrophy flux chi = nu <||grad omega||^2> and compare to the cutoff."""
    if nu <= 0:
        return ResolutionGuard(nu, 0.0, grid.cutoff, grid.n)
    k_eta = (max(enstrophy_flux, 0.0) / nu**3) ** (1.0 / 6.0)
    needed = grid.n
    if k_eta > grid.cutoff:
        needed = 2 * math.ceil(
            k_eta * grid.length / (2.0 * np.pi * grid.dealias_fraction))
        needed += needed % 2
    return ResolutionGuard(nu, k_eta, grid.cutoff, needed)


def pilot_enstrophy_flux(config: ExperimentConfig, nu: float,
                         horizon: float | None = None) -> float:
    """Short coarse run estimating chi = nu <||grad omega||^2>."""
    grid = config.grid()
    forcing = config.forcing(grid)
    omega0 = config.initial_condition(grid)
    s = config.solver_raw()
    if horizon is None:
        horizon = min(5.0 / s["gamma"], 50.0)
    params = SolverParams(nu=nu, gamma=s["gamma"], dt=s["dt"],
                          horizon=horizon, t0=0.0)
    acc = AverageAccumulator(t0=horizon / 2.0)
    rec = StatisticsRecorder(params, forcing, (), accumulator=acc)
    stride = max(1, int(round(0.1 / s["dt"])))
    integrate(omega0, params, forcing, observers=[rec],
              observer_stride=stride)
    return nu * acc.average("palinstrophy")


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------

def run_single(config: ExperimentConfig, output_dir: str | None = None,
               nu: float | None = None, tag: str = "run",
               enforce_guard: bool = True) \
        -> tuple[MeasureReport, str]:
    """Integrate one trajectory, write its time series and report.

    Returns the measure report and the CSV path.  Deterministic for a
    fixed config and seed.
    """
    grid = config.grid()
    forcing = config.forcing(grid)
    omega0 = config.initial_condition(grid)
    params = config.solver(l2_norm_spectral(dealias(omega0)), forcing, nu)
    if not bool(config.raw.get("resolution_guard", True)):
        enforce_guard = False
    if enforce_guard and params.nu > 0:
        chi = pilot_enstrophy_flux(config, params.nu)
        guard = resolution_guard(grid, params.nu, chi)
        if not guard.ok:
            raise ConfigError(
                f"nu={params.nu:g} under-resolved at n={grid.n}: dissipation"
                f" wavenumber {guard.k_dissipation:.1f} exceeds cutoff"
                f" {guard.cutoff:.1f}; need n >= {guard.required_n}")
    kernel, beta = config.mollifier(grid)
    wanted = config.functional_names()
    specs = [s for s in functional_catalog(grid, kernel, beta)
             if s.name in wanted]
    missing = set(wanted) - {s.name for s in specs}
    if missing:
        raise ConfigError(f"unknown functionals: {sorted(missing)}")
    rec = DiagnosticRecorder(params, forcing, specs)
    final = integrate(omega0, params, forcing, observers=[rec],
                      observer_stride=config.observer_stride())
    report = measure_report(rec.stats.acc, params,
                            functional_names=[s.name for s in specs])
    outdir = output_dir or config.outputs()
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, f"{tag}_timeseries.csv")
    write_timeseries(csv_path, rec.rows)
    write_spectrum(os.path.join(outdir, f"{tag}_spectrum.csv"),
                   radial_spectrum(final.omega))
    payload = {"nu": params.nu, "gamma": params.gamma, "dt": params.dt,
               "horizon": params.horizon, "seed": config.seed(),
               "report": report.as_dict()}
    write_report(os.path.join(outdir, f"{tag}_report.json"), payload)
    return report, csv_path


@dataclass
class SweepResult:
    nus: list[float]
    reports: dict[float, MeasureReport]
    dissipation: dict[float, float]
    balance_gap: dict[float, float]
    failures: dict[float, str] = field(default_factory=dict)
    csv_path: str = ""

    @property
    def complete(self) -> bool:
        return not self.failures

    def trend(self) -> dict:
        """Monotonicity summary of the dissipation series over the ran nus."""
        ran = [nu for nu in self.nus if nu in self.dissipation]
        eps = [self.dissipation[nu] for nu in ran]
        pairs_ok = all(b <= a * 1.10 for a, b in zip(eps, eps[1:]))
        ratio = eps[-1] / eps[0] if len(eps) >= 2 and eps[0] > 0 else np.nan
        return {"pairwise_decreasing": pairs_ok,
                "final_over_initial": float(ratio)}


def _sweep_member(raw_config: dict, nu: float, output_dir: str):
    config = ExperimentConfig.from_dict(raw_config)
    report, csv_path = run_single(config, output_dir, nu=nu,
                                  tag=f"nu_{nu:.6g}")
    return nu, report, csv_path


def viscosity_sweep(config: ExperimentConfig, output_dir: str | None = None,
                    workers: int = 1) -> SweepResult:
    """Run all configured viscosities, concurrently up to `workers`.

    A diverging or rejected member is recorded in the failure manifest;
    the remaining members still produce reports and the merged CSV.
    """
    nus = config.sweep_values()
    if nus is None:
        raise ConfigError("sweep requires a sweep list in the config")
    outdir = output_dir or config.outputs()
    os.makedirs(outdir, exist_ok=True)
    result = SweepResult(nus=list(nus), reports={}, dissipation={},
                         balance_gap={})
    if workers > 1 and len(nus) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {nu: pool.submit(_sweep_member, config.raw, nu, outdir)
                       for nu in nus}
            outcomes = []
            for nu in nus:
                try:
                    outcomes.append(futures[nu].result())
                except (ConfigError, BlowUpError) as exc:
                    result.failures[nu] = f"{type(exc).__name__}: {exc}"
    else:
        outcomes = []
        for nu in nus:
            try:
                outcomes.append(_sweep_member(config.raw, nu, outdir))
            except (ConfigError, BlowUpError) as exc:
                result.failures[nu] = f"{type(exc).__name__}: {exc}"
    rows = []
    for nu, report, _path in outcomes:
        result.reports[nu] = report
        result.dissipation[nu] = report.dissipation_rate
        result.balance_gap[nu] = report.balance_gap
        rows.append((nu, report.mean_enstrophy, report.mean_palinstrophy,
                     report.dissipation_rate, report.balance_gap,
                     report.telescoping_slack, report.elapsed, report.t0))
    result.csv_path = os.path.join(outdir, "sweep.csv")
    write_sweep_csv(result.csv_path, rows)
    manifest = {
        "nus": nus,
        "failures": {f"{nu:g}": msg
                     for nu, msg in result.failures.items()},
        "trend": result.trend() if result.dissipation else {},
    }
    write_report(os.path.join(outdir, "sweep_manifest.json"), manifest)
    return result


# ---------------------------------------------------------------------------
# travel tracking on an enlarged torus
# ---------------------------------------------------------------------------

def travel_cutoff(grid: GridSpec, radius: float) -> np.ndarray:
    """Smooth radial cutoff: 0 for d <= R/2, 1 for d >= R (periodic d)."""
    from .dynamics import periodic_distance
    center = (grid.length / 2.0, grid.length / 2.0)
    d = periodic_distance(grid, center)
    s = np.clip((d - radius / 2.0) / (radius / 2.0), 0.0, 1.0)
    out = np.zeros_like(s)
    lo = s <= 0.0
    hi = s >= 1.0
    mid = ~lo & ~hi
    a = np.exp(-1.0 / s[mid])
    b = np.exp(-1.0 / (1.0 - s[mid]))
    out[mid] = a / (a + b)
    out[hi] = 1.0
    return out


@dataclass
class NoTravelResult:
    radii: list[float]
    times: np.ndarray
    y_series: dict[float, np.ndarray]
    enstrophy: np.ndarray
    max_fraction: dict[float, float]
    threshold: float

    @property
    def ok(self) -> bool:
        return self.max_fraction[max(self.radii)] <= self.threshold


def no_travel_experiment(config: ExperimentConfig,
                         output_dir: str | None = None,
                         threshold: float = 0.05) -> NoTravelResult:
    """Track the enstrophy mass Y_R(t) outside balls of radius R/2.

    Requires localized forcing and initial data on an enlarged torus
    (L >= 8 pi); reports max_t Y_R(t)/||omega(t)||^2 per R.
    """
    grid = config.grid()
    if grid.length < 8.0 * np.pi - 1e-12:
        raise ConfigError("travel tracking needs an enlarged torus"
                          f" (L >= 8 pi), got L = {grid.length:g}")
    forcing = config.forcing(grid)
    if forcing.kind not in ("zero", "localized_bump"):
        raise ConfigError("travel tracking needs localized (or zero)"
                          f" forcing, got {forcing.kind!r}")
    ic_kind = config._section("initial", {"kind": "random"}).get(
        "kind", "random")
    if ic_kind != "localized_bump":
        raise ConfigError("travel tracking needs a localized initial"
                          f" condition, got {ic_kind!r}")
    omega0 = config.initial_condition(grid)
    params = config.solver(l2_norm_spectral(omega0), forcing)
    radii = [grid.length / 8.0, grid.length / 4.0, 3.0 * grid.length / 8.0]
    cutoffs = {r: travel_cutoff(grid, r) for r in radii}
    h2 = grid.h ** 2
    times: list[float] = []
    ys: dict[float, list[float]] = {r: [] for r in radii}
    ens: list[float] = []

    def observer(state: TrajectoryState):
        w = inverse_transform(state.omega).values
        wsq = w * w
        times.append(state.time)
        ens.append(float(np.sum(wsq)) * h2)
        for r in radii:
            ys[r].append(float(np.sum(cutoffs[r] * wsq)) * h2)

    integrate(omega0, params, forcing, observers=[observer],
              observer_stride=config.observer_stride())
    ens_arr = np.asarray(ens)
    safe = np.maximum(ens_arr, 1e-300)
    result = NoTravelResult(
        radii=radii,
        times=np.asarray(times),
        y_series={r: np.asarray(ys[r]) for r in radii},
        enstrophy=ens_arr,
        max_fraction={r: float(np.max(np.asarray(ys[r]) / safe))
                      for r in radii},
        threshold=threshold,
    )
    outdir = output_dir or config.outputs()
    os.makedirs(outdir, exist_ok=True)
    cols = ["t", "enstrophy"] + [f"y_r{i+1}" for i in range(len(radii))]
    with open(os.path.join(outdir, "no_travel.csv"), "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i, t in enumerate(times):
            row = [t, ens[i]] + [ys[r][i] for r in radii]
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")
    write_report(os.path.join(outdir, "no_travel_report.json"), {
        "radii": radii,
        "max_fraction": {f"{r:g}": v
                         for r, v in result.max_fraction.items()},
        "threshold": threshold,
        "ok": result.ok,
    })
    return result
