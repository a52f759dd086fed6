import warnings

import numpy as np
import pytest

from ddns2d.dynamics import (
    BlowUpError,
    ForcingSpec,
    SolverParams,
    TrajectoryState,
    _full_from_half,
    _half_from_full,
    decay_envelope,
    decay_envelope_check,
    energy_balance_residual,
    enstrophy_balance_residual,
    BalanceSeries,
    integrate,
    nonlinear_term,
    steady_state_residual,
    step,
)
from ddns2d.grid import FieldError, GridSpec, PhysicalScalarField, \
    SpectralScalarField, grid_arrays
from ddns2d.spectral import (
    biot_savart,
    forward_transform,
    gradient,
    inner_product,
    inverse_transform,
    norms,
)
from helpers import smooth_spectral


def single_mode(grid, k=(1, 0), amplitude=1.0):
    ga = grid_arrays(grid)
    f = PhysicalScalarField(
        grid, amplitude * np.cos(k[0] * ga.x1 + k[1] * ga.x2))
    F = forward_transform(f)
    return SpectralScalarField(grid, F.coeffs, mean_free=True)


class TestSolverParams:
    @pytest.mark.parametrize("bad", [
        {"nu": -1e-3}, {"gamma": 0.0}, {"dt": 0.0}, {"horizon": -1.0},
    ])
    def test_rejects_invalid(self, bad):
        good = {"nu": 1e-3, "gamma": 0.1, "dt": 0.01, "horizon": 1.0}
        good.update(bad)
        with pytest.raises(ValueError):
            SolverParams(**good)


class TestForcingSpec:
    def test_all_kinds_mean_free_and_dealiased(self):
        grid = GridSpec(64)
        for forcing in (ForcingSpec.zero(grid),
                        ForcingSpec.single_mode(grid, (2, 1), 0.5),
                        ForcingSpec.kolmogorov(grid, 4, 1.0),
                        ForcingSpec.localized_bump(grid, radius=1.0)):
            assert abs(forcing.g_hat.coeffs[0, 0]) == 0.0
            assert abs(np.mean(forcing.g.values)) < 1e-12

    def test_kolmogorov_profile(self):
        grid = GridSpec(64)
        ga = grid_arrays(grid)
        f = ForcingSpec.kolmogorov(grid, 4, 0.7)
        np.testing.assert_allclose(f.g.values, 0.7 * np.cos(4 * ga.x2),
                                   atol=1e-13)

    def test_injection_velocity_curl_matches(self):
        grid = GridSpec(64)
        f = ForcingSpec.kolmogorov(grid, 4, 1.0)
        vel = f.injection_velocity()
        curl = (gradient(forward_transform(vel.u2)).u1.values
                - gradient(forward_transform(vel.u1)).u2.values)
        np.testing.assert_allclose(curl, f.g.values, atol=1e-11)

    def test_from_file_roundtrip(self, tmp_path):
        grid = GridSpec(32)
        ga = grid_arrays(grid)
        path = tmp_path / "g.npy"
        np.save(path, np.cos(2 * ga.x1))
        f = ForcingSpec.from_file(grid, str(path))
        np.testing.assert_allclose(f.g.values, np.cos(2 * ga.x1), atol=1e-12)


class TestHalfSpectrum:
    def test_full_half_roundtrip(self, rng):
        grid = GridSpec(32)
        F = smooth_spectral(grid, rng)
        half = _half_from_full(F.coeffs, 32)
        full = _full_from_half(half, 32)
        np.testing.assert_allclose(full, F.coeffs, atol=1e-15)


class TestClosedFormSolutions:
    def test_decaying_single_mode(self):
        grid = GridSpec(64)
        nu, gamma, t = 0.01, 0.1, 1.0
        params = SolverParams(nu=nu, gamma=gamma, dt=1e-3, horizon=t)
        final = integrate(single_mode(grid), params, ForcingSpec.zero(grid))
        amp = 2.0 * abs(final.omega.coeffs[1, 0])
        assert amp == pytest.approx(np.exp(-(gamma + nu) * t), abs=1e-10)

    def test_forced_from_rest(self):
        grid = GridSpec(64)
        nu, gamma, t, a = 0.01, 0.1, 2.0, 0.8
        params = SolverParams(nu=nu, gamma=gamma, dt=1e-3, horizon=t)
        forcing = ForcingSpec.single_mode(grid, (1, 0), a)
        w0 = SpectralScalarField(grid, np.zeros((64, 64)), mean_free=True)
        final = integrate(w0, params, forcing)
        lam = gamma + nu
        expect = a * (1.0 - np.exp(-lam * t)) / lam
        assert 2.0 * abs(final.omega.coeffs[1, 0]) == pytest.approx(
            expect, abs=1e-10)

    def test_single_mode_is_exact_fixed_point(self):
        grid = GridSpec(64)
        nu, gamma = 0.01, 0.1
        a = 1.0
        forcing = ForcingSpec.single_mode(grid, (2, 1), a)
        lam = gamma + nu * 5.0
        w_star = SpectralScalarField(grid, forcing.g_hat.coeffs / lam,
                                     mean_free=True)
        params = SolverParams(nu=nu, gamma=gamma, dt=1e-3, horizon=0.5)
        final = integrate(w_star, params, forcing)
        np.testing.assert_allclose(final.omega.coeffs, w_star.coeffs,
                                   atol=1e-12)

    def test_nonlinear_term_vanishes_on_single_mode(self):
        grid = GridSpec(64)
        adv = nonlinear_term(single_mode(grid, (2, 1)))
        assert np.max(np.abs(adv.coeffs)) < 1e-15

    def test_skew_symmetry(self, rng):
        # <u . grad omega, omega> = 0 for dealiased omega
        grid = GridSpec(64)
        w = smooth_spectral(grid, rng)
        adv = nonlinear_term(w)
        pairing = inner_product(inverse_transform(adv),
                                inverse_transform(w))
        assert abs(pairing) < 1e-12 * inner_product(
            inverse_transform(w), inverse_transform(w))


class TestConvergence:
    def test_fourth_order_in_dt(self, rng):
        # coarse steps so roundoff does not mask the truncation error
        grid = GridSpec(32)
        w0 = smooth_spectral(grid, rng, kmax=2)
        forcing = ForcingSpec.single_mode(grid, (1, 1), 0.5)
        horizon = 2.0
        sols = {}
        for dt in (0.2, 0.1, 0.05, 1e-3):
            params = SolverParams(nu=0.05, gamma=0.3, dt=dt, horizon=horizon)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                sols[dt] = integrate(w0, params, forcing).omega.coeffs
        ref = sols[1e-3]
        e1 = np.max(np.abs(sols[0.2] - ref))
        e2 = np.max(np.abs(sols[0.1] - ref))
        e3 = np.max(np.abs(sols[0.05] - ref))
        assert 12.0 <= e1 / e2 <= 20.0
        assert 12.0 <= e2 / e3 <= 20.0


class TestBlowUpAndWarnings:
    def test_blow_up_raises_with_context(self):
        grid = GridSpec(32)
        w0 = single_mode(grid, (1, 0), 50.0)
        # absurd dt makes the advective stages explode
        params = SolverParams(nu=0.0, gamma=0.1, dt=5.0, horizon=100.0)
        forcing = ForcingSpec.single_mode(grid, (2, 1), 50.0)
        with pytest.raises(BlowUpError) as err:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                integrate(w0, params, forcing)
        assert err.value.step_index >= 1
        assert err.value.time > 0

    def test_cfl_warning(self):
        grid = GridSpec(32)
        w0 = single_mode(grid, (1, 0), 40.0)
        params = SolverParams(nu=0.0, gamma=0.1, dt=0.05, horizon=0.1)
        with pytest.warns(RuntimeWarning, match="CFL"):
            integrate(w0, params, ForcingSpec.zero(grid))

    def test_step_single_increment(self):
        grid = GridSpec(32)
        params = SolverParams(nu=0.01, gamma=0.1, dt=0.01, horizon=1.0)
        state = TrajectoryState(0.0, single_mode(grid), 0)
        out = step(state, params, ForcingSpec.zero(grid))
        assert out.time == pytest.approx(0.01)
        assert out.step_count == 1


@pytest.fixture(scope="module")
def turbulent_samples():
    grid = GridSpec(64)
    rng = np.random.default_rng(5)
    w0 = smooth_spectral(grid, rng, kmax=4)
    forcing = ForcingSpec.kolmogorov(grid, 2, 1.0)
    params = SolverParams(nu=5e-3, gamma=0.1, dt=2e-3, horizon=4.0)
    states = []
    integrate(w0, params, forcing, observers=[states.append],
              observer_stride=5)
    return grid, params, forcing, states


class TestBalanceLaws:
    @staticmethod
    def energy_series(params, forcing, states):
        f_vel = forcing.injection_velocity()
        t, q, dis, dam, inj, nrm = [], [], [], [], [], []
        for s in states:
            u = biot_savart(s.omega)
            w = inverse_transform(s.omega)
            en = (inner_product(u.u1, u.u1) + inner_product(u.u2, u.u2))
            t.append(s.time)
            q.append(en)
            dam.append(params.gamma * en)
            dis.append(params.nu * inner_product(w, w))
            pin = (inner_product(f_vel.u1, u.u1)
                   + inner_product(f_vel.u2, u.u2))
            inj.append(pin)
            a1 = PhysicalScalarField(u.grid, np.abs(f_vel.u1.values))
            b1 = PhysicalScalarField(u.grid, np.abs(u.u1.values))
            a2 = PhysicalScalarField(u.grid, np.abs(f_vel.u2.values))
            b2 = PhysicalScalarField(u.grid, np.abs(u.u2.values))
            nrm.append(inner_product(a1, b1) + inner_product(a2, b2)
                       + params.gamma * en)
        return BalanceSeries(*(np.asarray(v)
                               for v in (t, q, dis, dam, inj, nrm)))

    @staticmethod
    def enstrophy_series(params, forcing, states):
        t, q, dis, dam, inj, nrm = [], [], [], [], [], []
        for s in states:
            w = inverse_transform(s.omega)
            gw = gradient(s.omega)
            ens = inner_product(w, w)
            pal = (inner_product(gw.u1, gw.u1)
                   + inner_product(gw.u2, gw.u2))
            t.append(s.time)
            q.append(ens)
            dam.append(params.gamma * ens)
            dis.append(params.nu * pal)
            inj.append(inner_product(forcing.g, w))
            ga = PhysicalScalarField(w.grid, np.abs(forcing.g.values))
            wa = PhysicalScalarField(w.grid, np.abs(w.values))
            nrm.append(inner_product(ga, wa) + params.gamma * ens)
        return BalanceSeries(*(np.asarray(v)
                               for v in (t, q, dis, dam, inj, nrm)))

    def test_energy_balance_small(self, turbulent_samples):
        grid, params, forcing, states = turbulent_samples
        res = energy_balance_residual(
            self.energy_series(params, forcing, states))
        assert res < 1e-4

    def test_enstrophy_balance_small(self, turbulent_samples):
        grid, params, forcing, states = turbulent_samples
        res = enstrophy_balance_residual(
            self.enstrophy_series(params, forcing, states))
        assert res < 1e-4

    def test_residual_second_order_in_stride(self, turbulent_samples):
        grid, params, forcing, states = turbulent_samples
        r_fine = enstrophy_balance_residual(
            self.enstrophy_series(params, forcing, states))
        r_coarse = enstrophy_balance_residual(
            self.enstrophy_series(params, forcing, states[::2]))
        assert 2.5 <= r_coarse / r_fine <= 6.0


class TestDecayEnvelope:
    def test_envelope_formula(self):
        t = np.array([0.0, 1.0, np.inf])
        env = decay_envelope(t, 5.0, 1.0, 0.5)
        assert env[0] == pytest.approx(5.0)
        assert env[-1] == pytest.approx(2.0)

    def test_check_flags_violation(self):
        times = np.array([0.0, 1.0, 2.0])
        samples = np.array([5.0, 100.0, 1.0])
        rep = decay_envelope_check(times, samples, 2, 0.5, 5.0, 1.0)
        assert not rep.ok
        assert rep.violations[0][0] == 1.0

    def test_decaying_run_respects_envelope(self, rng):
        grid = GridSpec(64)
        w0 = smooth_spectral(grid, rng, kmax=3)
        gamma = 0.2
        forcing = ForcingSpec.single_mode(grid, (1, 0), 0.5)
        params = SolverParams(nu=1e-3, gamma=gamma, dt=5e-3, horizon=5.0)
        times, l2s, linfs = [], [], []

        def obs(s):
            w = inverse_transform(s.omega)
            nr = norms(w)
            times.append(s.time)
            l2s.append(nr["l2"])
            linfs.append(nr["linf"])

        integrate(w0, params, forcing, observers=[obs], observer_stride=10)
        w0_phys = inverse_transform(w0)
        g2, ginf = norms(forcing.g)["l2"], norms(forcing.g)["linf"]
        rep2 = decay_envelope_check(times, l2s, 2, gamma,
                                    norms(w0_phys)["l2"], g2)
        repinf = decay_envelope_check(times, linfs, np.inf, gamma,
                                      norms(w0_phys)["linf"], ginf)
        assert rep2.ok, rep2.violations[:3]
        assert repinf.ok, repinf.violations[:3]


class TestSteadyStateResidual:
    def test_decreases_with_run_length_at_strong_damping(self, rng):
        grid = GridSpec(32)
        w0 = smooth_spectral(grid, rng, kmax=3)
        forcing = ForcingSpec.single_mode(grid, (1, 2), 1.0)
        resids = []
        for horizon in (2.0, 6.0, 12.0):
            params = SolverParams(nu=0.05, gamma=2.0, dt=5e-3,
                                  horizon=horizon)
            final = integrate(w0, params, forcing)
            l2, _gap = steady_state_residual(final.omega, params, forcing)
            resids.append(l2)
        assert resids[1] < resids[0]
        assert resids[2] < resids[1]

    def test_exact_fixed_point_residual_zero(self):
        grid = GridSpec(32)
        nu, gamma = 0.05, 0.5
        forcing = ForcingSpec.single_mode(grid, (2, 1), 1.0)
        w_star = SpectralScalarField(
            grid, forcing.g_hat.coeffs / (gamma + nu * 5.0), mean_free=True)
        params = SolverParams(nu=nu, gamma=gamma, dt=1e-3, horizon=1.0)
        l2, gap = steady_state_residual(w_star, params, forcing)
        assert l2 < 1e-12
        assert gap < 1e-12
