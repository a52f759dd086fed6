"""Self-contained invariant suite behind the `check` subcommand.

Each invariant runs at small N and compares against a closed-form or
algebraic oracle.  Tolerances can be scaled through the environment
variable DDNS2D_CHECK_TOL_SCALE (useful to verify that the harness
actually fails when a tolerance is violated).
"""

from __future__ import annotations

import os

import numpy as np

from .dynamics import ForcingSpec, SolverParams, integrate
from .grid import GridSpec, PhysicalScalarField, SpectralScalarField, \
    grid_arrays
from .mollify import MollifierKernel, RenormalizerBeta, commutator_rho, \
    mollify
from .spectral import (
    biot_savart,
    forward_transform,
    inner_product,
    inverse_transform,
    norms,
)
from .statistics import StatisticsRecorder, functional_catalog, \
    measure_report


def _tol_scale() -> float:
    return float(os.environ.get("DDNS2D_CHECK_TOL_SCALE", "1.0"))


def _check_roundtrip():
    grid = GridSpec(64)
    rng = np.random.default_rng(0)
    f = PhysicalScalarField(grid, rng.normal(size=(64, 64)))
    back = inverse_transform(forward_transform(f))
    err = float(np.max(np.abs(back.values - f.values)))
    return err, 1e-12


def _check_biot_savart():
    grid = GridSpec(64)
    ga = grid_arrays(grid)
    w = forward_transform(PhysicalScalarField(grid, np.cos(ga.x1)))
    u = biot_savart(SpectralScalarField(grid, w.coeffs, mean_free=True))
    err = max(
        float(np.max(np.abs(u.u1.values))),
        float(np.max(np.abs(u.u2.values - np.sin(ga.x1)))),
    )
    return err, 1e-12


def _check_single_mode_decay():
    grid = GridSpec(32)
    ga = grid_arrays(grid)
    w0 = forward_transform(PhysicalScalarField(grid, np.cos(ga.x1)))
    w0 = SpectralScalarField(grid, w0.coeffs, mean_free=True)
    nu, gamma, t = 0.05, 0.2, 1.0
    params = SolverParams(nu=nu, gamma=gamma, dt=0.01, horizon=t)
    final = integrate(w0, params, ForcingSpec.zero(grid))
    amp = 2.0 * abs(final.omega.coeffs[1, 0])
    err = abs(amp - np.exp(-(gamma + nu) * t))
    return err, 1e-8


def _check_forced_amplitude():
    grid = GridSpec(32)
    nu, gamma, t, a = 0.05, 0.2, 2.0, 0.7
    params = SolverParams(nu=nu, gamma=gamma, dt=0.01, horizon=t)
    forcing = ForcingSpec.single_mode(grid, (1, 0), a)
    w0 = SpectralScalarField(grid, np.zeros((32, 32)), mean_free=True)
    final = integrate(w0, params, forcing)
    lam = gamma + nu
    expect = a * (1.0 - np.exp(-lam * t)) / lam
    err = abs(2.0 * abs(final.omega.coeffs[1, 0]) - expect)
    return err, 1e-8


def _check_flux_identity():
    grid = GridSpec(64)
    ga = grid_arrays(grid)
    rng = np.random.default_rng(3)
    def smooth():
        v = np.zeros((64, 64))
        for k1 in range(-3, 4):
            for k2 in range(-3, 4):
                if k1 == 0 and k2 == 0:
                    continue
                a, b = rng.normal(size=2) / (1 + k1 * k1 + k2 * k2)
                ph = k1 * ga.x1 + k2 * ga.x2
                v += a * np.cos(ph) + b * np.sin(ph)
        return PhysicalScalarField(grid, v)
    b = smooth()
    w = forward_transform(smooth())
    u = biot_savart(SpectralScalarField(grid, w.coeffs, mean_free=True))
    kernel = MollifierKernel(grid, 0.7)
    flux = commutator_rho(u, b, kernel)
    scale = max(norms(b)["linf"], 1.0)
    return flux.identity_defect / scale, 1e-9


def _check_mollifier_contraction():
    grid = GridSpec(64)
    rng = np.random.default_rng(4)
    f = PhysicalScalarField(grid, rng.normal(size=(64, 64)))
    kernel = MollifierKernel(grid, 0.5)
    jf = mollify(f, kernel)
    n0, n1 = norms(f), norms(jf)
    worst = max(n1[p] - n0[p] for p in ("l1", "l2", "linf"))
    return max(worst, 0.0), 1e-12


def _check_stationarity():
    grid = GridSpec(32)
    forcing = ForcingSpec.single_mode(grid, (1, 1), 0.5)
    params = SolverParams(nu=5e-3, gamma=0.2, dt=0.01, horizon=4.0, t0=1.0)
    ga = grid_arrays(grid)
    w0 = forward_transform(PhysicalScalarField(
        grid, np.cos(ga.x1) + 0.5 * np.sin(2 * ga.x2)))
    w0 = SpectralScalarField(grid, w0.coeffs, mean_free=True)
    specs = functional_catalog(grid)
    rec = StatisticsRecorder(params, forcing, specs)
    integrate(w0, params, forcing, observers=[rec], observer_stride=2)
    rep = measure_report(rec.acc, params,
                         functional_names=[s.name for s in specs])
    worst = max(r.defect / r.tolerance for r in rep.stationarity.values())
    return worst, 1.0


def _check_support_ball():
    grid = GridSpec(32)
    gamma = 0.5
    forcing = ForcingSpec.single_mode(grid, (1, 0), 1.0)
    params = SolverParams(nu=1e-2, gamma=gamma, dt=0.01, horizon=20.0)
    ga = grid_arrays(grid)
    w0 = forward_transform(PhysicalScalarField(grid, 3.0 * np.sin(ga.x2)))
    w0 = SpectralScalarField(grid, w0.coeffs, mean_free=True)
    final = integrate(w0, params, forcing)
    l2 = norms(inverse_transform(final.omega))["l2"]
    ball = norms(forcing.g)["l2"] / gamma
    return max(l2 - 1.01 * ball, 0.0), 1e-12


INVARIANTS = (
    ("transform_roundtrip", _check_roundtrip),
    ("biot_savart_closed_form", _check_biot_savart),
    ("single_mode_decay", _check_single_mode_decay),
    ("forced_mode_amplitude", _check_forced_amplitude),
    ("commutator_flux_identity", _check_flux_identity),
    ("mollifier_contraction", _check_mollifier_contraction),
    ("stationarity_defect", _check_stationarity),
    ("support_ball", _check_support_ball),
)


def run_checks(stream=None) -> int:
    """Run all invariants, print a table, return 0 iff all pass."""
    import sys
    out = stream or sys.stdout
    scale = _tol_scale()
    failed = []
    out.write(f"{'invariant':<28} {'value':>12} {'tolerance':>12} status\n")
    for name, fn in INVARIANTS:
        value, tol = fn()
        tol = tol * scale
        ok = value <= tol
        if not ok:
            failed.append(name)
        out.write(f"{name:<28} {value:>12.3e} {tol:>12.3e} "
                  f"{'ok' if ok else 'FAIL'}\n")
    if failed:
        out.write(f"failed invariants: {', '.join(failed)}\n")
        return 1
    return 0
