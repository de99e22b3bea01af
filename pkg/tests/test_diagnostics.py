import numpy as np
import pytest

import helios.diagnostics as diag
from helios.curve import curve_from_eta
from helios.diagnostics import (
    CornerReport,
    corner_experiment,
    invariant_suite,
    reconstruct_pressure,
)
from helios.errors import ConventionError, ParameterError
from helios.evolution import EvolutionConfig, EvolutionRun, simulate
from helios.grid import PeriodicGrid
from helios.kernels import double_layer_interior


def disk(radius=1.0, n=128):
    g = PeriodicGrid(n)
    return curve_from_eta(g, np.full(n, np.log(radius)))


class TestPressureDisk:
    def test_unit_disk_log_profile(self):
        # r_min=0.2, n_r=6 puts a radial layer exactly at r=0.5
        field = reconstruct_pressure(disk(1.0), n_r=6, n_theta=32, r_min=0.2)
        layer = field.p[2]
        np.testing.assert_allclose(field.r[2], 0.5, atol=1e-14)
        np.testing.assert_allclose(layer, np.log(2.0), atol=1e-8)
        assert field.boundary_misfit < 1e-8
        assert not field.accuracy_warning

    def test_disk_radius_two(self):
        field = reconstruct_pressure(disk(2.0), n_r=5, n_theta=16, r_min=0.3)
        np.testing.assert_allclose(field.phi, np.log(2.0), atol=1e-10)
        np.testing.assert_allclose(field.p, np.log(2.0 / field.r), atol=1e-9)

    def test_rejects_bad_r_min(self):
        with pytest.raises(ParameterError):
            reconstruct_pressure(disk(1.0), n_r=4, n_theta=16, r_min=0.3)
        with pytest.raises(ParameterError):
            reconstruct_pressure(disk(1.0), n_r=4, n_theta=16, r_min=0.0)


@pytest.fixture(scope="module")
def field():
    g = PeriodicGrid(256)
    c = curve_from_eta(g, 0.1 * np.cos(g.nodes))
    return reconstruct_pressure(c, n_r=12, n_theta=48, r_min=0.1)


@pytest.fixture(scope="module")
def radial_run():
    config = EvolutionConfig(epsilon=0.0, dt=1e-4, t_end=0.05, n_points=64, save_every=100)
    return simulate(config, np.zeros(64))


@pytest.fixture(scope="module")
def wobble_run():
    g = PeriodicGrid(64)
    config = EvolutionConfig(epsilon=0.0, dt=1e-3, t_end=0.2, n_points=64, save_every=20)
    return simulate(config, 0.2 * np.sin(2 * g.nodes))


class TestPressurePerturbed:
    def test_pressure_nonnegative_before_clipping(self, field):
        assert np.min(field.pressure_raw) >= -1e-8

    def test_boundary_misfit_small(self, field):
        assert field.boundary_misfit < 1e-6
        assert not field.accuracy_warning

    def test_clipped_pressure_nonnegative(self, field):
        assert np.min(field.p) >= 0.0

    def test_harmonicity_spot_check(self):
        # 5-point polar Laplacian of phi at interior points, away from
        # boundary and origin
        g = PeriodicGrid(256)
        c = curve_from_eta(g, 0.1 * np.cos(g.nodes))
        from helios.kernels import assemble

        psi = diag._solve_density(assemble(c), c.eta)
        delta = 1e-3
        for (r0, t0) in [(0.5, 0.7), (0.65, 2.9), (0.4, 4.2)]:
            pts = np.array(
                [
                    r0 * np.exp(1j * t0),
                    (r0 + delta) * np.exp(1j * t0),
                    (r0 - delta) * np.exp(1j * t0),
                    r0 * np.exp(1j * (t0 + delta)),
                    r0 * np.exp(1j * (t0 - delta)),
                ]
            )
            v = double_layer_interior(c, psi, pts)
            lap = (v[1] - 2 * v[0] + v[2]) / delta**2 + (v[1] - v[2]) / (
                2 * delta * r0
            ) + (v[3] - 2 * v[0] + v[4]) / (r0 * delta) ** 2
            assert abs(lap) < 1e-4


class TestCalibrationGuard:
    def test_disk_identity_holds(self):
        diag._verify_disk_calibration()

    def test_sign_regression_detected(self, monkeypatch):
        orig = diag.double_layer_interior
        monkeypatch.setattr(diag, "_calibrated", False)
        monkeypatch.setattr(
            diag, "double_layer_interior", lambda *a, **k: -orig(*a, **k)
        )
        with pytest.raises(ConventionError):
            diag._verify_disk_calibration()
        monkeypatch.setattr(diag, "_calibrated", False)


class TestCornerExperiment:
    def test_obtuse_corner_moves(self):
        rep = corner_experiment("obtuse", 2.0, duration=0.5)
        assert isinstance(rep, CornerReport)
        assert rep.classification == "moved"
        assert rep.displacement > 10 * rep.mollification_amplitude

    def test_acute_corner_waits(self):
        rep = corner_experiment("acute", 1.0, duration=0.1)
        assert rep.classification == "waiting"
        assert rep.displacement < rep.mollification_amplitude

    def test_cornerless_circle_moves_trivially(self):
        rep = corner_experiment("obtuse", np.pi, duration=0.05)
        assert rep.mollification_amplitude == 0.0
        assert rep.classification == "moved"

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            corner_experiment("acute", 2.0, 0.1)
        with pytest.raises(ParameterError):
            corner_experiment("obtuse", 1.0, 0.1)
        with pytest.raises(ParameterError):
            corner_experiment("square", 1.0, 0.1)
        with pytest.raises(ParameterError):
            corner_experiment("acute", 1.0, -0.1)


class TestInvariantSuite:
    def test_radial_run_passes_everything(self, radial_run):
        report = invariant_suite(radial_run)
        assert report.all_passed
        names = {c.name for c in report.checks}
        assert "area_law" in names and "taylor_sign" in names
        assert "asymptotic_roundness" not in names  # short run

    def test_wobble_run_passes(self, wobble_run):
        report = invariant_suite(wobble_run)
        assert report.all_passed, [c for c in report.checks if not c.passed]

    def test_corrupted_snapshot_detected(self, wobble_run):
        snaps = [s.copy() for s in wobble_run.snapshots]
        snaps[-1][7] += 0.1
        bad = EvolutionRun(
            config=wobble_run.config,
            times=wobble_run.times,
            snapshots=snaps,
            trace=wobble_run.trace,
        )
        report = invariant_suite(bad)
        assert not report.all_passed
        failed = {c.name for c in report.checks if not c.passed}
        assert "lipschitz_snapshot_bound" in failed

    def test_report_is_deterministic(self, wobble_run):
        a = invariant_suite(wobble_run).to_json()
        b = invariant_suite(wobble_run).to_json()
        assert a == b
        assert '"all_passed": true' in a

    def test_asymptotics_included_for_long_runs(self):
        g = PeriodicGrid(32)
        config = EvolutionConfig(epsilon=0.0, dt="auto", t_end=20.0, n_points=32, save_every=50)
        run = simulate(config, 0.1 * np.cos(g.nodes))
        report = invariant_suite(run)
        names = {c.name for c in report.checks}
        assert "asymptotic_roundness" in names
        assert report.all_passed
