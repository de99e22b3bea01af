import numpy as np
import pytest

from helios.curve import curve_from_eta
from helios.dtn import (
    apply_dtn,
    dtn_oracle_collocation,
    graph_dtn_oracle,
    solve_theta,
    taylor_sign_residual,
)
from helios.errors import InputError, OracleInconclusiveError
from helios.grid import TWO_PI, PeriodicGrid
from helios.kernels import assemble

from oracles import kstar_matrix_real_form


def make(eta_func, n=128):
    g = PeriodicGrid(n)
    c = curve_from_eta(g, eta_func(g.nodes))
    return c, assemble(c)


class TestThetaSolve:
    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_disk_closed_form(self, k):
        # on the disk the adjoint operator has constant kernel, so
        # (I/2 + K*) acts as 1/2 on mean-zero data: theta = -2k sin(k a)
        c, ops = make(lambda a: np.zeros_like(a))
        theta = solve_theta(ops, np.cos(k * c.grid.nodes))
        np.testing.assert_allclose(theta, -2 * k * np.sin(k * c.grid.nodes), atol=1e-11)

    def test_constant_data_gives_zero(self):
        c, ops = make(lambda a: 0.2 * np.cos(a))
        theta = solve_theta(ops, np.full(c.n_points, 3.3))
        assert np.max(np.abs(theta)) == 0.0

    def test_dual_formula_solve(self):
        # same second-kind solve against the real-form matrix assembly
        g = PeriodicGrid(128)
        eta = 0.15 * np.cos(2 * g.nodes)
        c = curve_from_eta(g, eta)
        ops = assemble(c)
        theta = solve_theta(ops, eta)

        kstar_ref = kstar_matrix_real_form(g.nodes, np.exp(eta))
        n = g.n_points
        a_ref = 0.5 * np.eye(n) + kstar_ref + np.outer(np.ones(n), g.weights) / TWO_PI
        theta_ref = np.linalg.solve(a_ref, g.spectral_derivative(eta, 1))
        assert np.max(np.abs(theta - theta_ref)) < 1e-9

    def test_mean_theta_pinned(self):
        c, ops = make(lambda a: 0.3 * np.sin(a) + 0.1 * np.cos(2 * a))
        res = apply_dtn(ops, c.eta)
        assert abs(res.mean_theta) < 1e-12
        assert res.solve_residual <= 1e-10

    def test_shape_mismatch(self):
        _, ops = make(lambda a: np.zeros_like(a))
        with pytest.raises(InputError):
            solve_theta(ops, np.zeros(ops.n_points + 2))


class TestDiskDtN:
    @pytest.mark.parametrize("radius", [0.5, 1.0, 3.0])
    @pytest.mark.parametrize("k", [1, 4, 8])
    def test_spectrum(self, radius, k):
        # harmonic extension (r/R)^k cos(k t) has N.grad = k cos(k t)
        c, ops = make(lambda a: np.full_like(a, np.log(radius)), n=256)
        res = apply_dtn(ops, np.cos(k * c.grid.nodes))
        assert np.max(np.abs(res.g_of - k * np.cos(k * c.grid.nodes))) < 1e-10

    def test_constant_data(self):
        c, ops = make(lambda a: 0.1 * np.sin(2 * a))
        res = apply_dtn(ops, np.full(c.n_points, -1.0))
        assert np.max(np.abs(res.g_of)) == 0.0


class TestFluxNeutrality:
    @pytest.mark.parametrize(
        "eta_func,g_func",
        [
            (lambda a: 0.2 * np.cos(a), lambda a: 0.2 * np.cos(a)),
            (lambda a: 0.3 * np.sin(2 * a), lambda a: np.cos(3 * a)),
            (lambda a: 0.1 * np.cos(3 * a) - 0.5, lambda a: np.sin(a) + 0.2 * np.cos(2 * a)),
        ],
    )
    def test_net_flux_vanishes(self, eta_func, g_func):
        c, ops = make(eta_func)
        res = apply_dtn(ops, g_func(c.grid.nodes))
        assert abs(c.grid.trapezoid_integral(res.g_of)) < 1e-8


class TestCollocationOracle:
    def test_disk_exact_mode(self):
        c, _ = make(lambda a: np.zeros_like(a))
        out = dtn_oracle_collocation(c, np.cos(3 * c.grid.nodes), n_modes=8)
        np.testing.assert_allclose(out, 3 * np.cos(3 * c.grid.nodes), atol=1e-11)

    def test_constant_data(self):
        c, _ = make(lambda a: 0.1 * np.cos(a))
        out = dtn_oracle_collocation(c, np.zeros(c.n_points) + 2.0, n_modes=8)
        assert np.max(np.abs(out)) < 1e-12

    def test_mode_refinement_self_consistency(self):
        c, _ = make(lambda a: 0.1 * np.sin(a), n=256)
        g = np.cos(c.grid.nodes)
        a24 = dtn_oracle_collocation(c, g, n_modes=24)
        a32 = dtn_oracle_collocation(c, g, n_modes=32)
        assert np.max(np.abs(a24 - a32)) < 1e-9

    def test_cross_validates_layer_potential_path(self):
        c, ops = make(lambda a: 0.2 * np.cos(a), n=256)
        res = apply_dtn(ops, c.eta)
        ref = dtn_oracle_collocation(c, c.eta, n_modes=32)
        assert np.max(np.abs(res.g_of - ref)) < 1e-7

    def test_inconclusive_fit_aborts(self):
        # far too few modes for rough data: the oracle must refuse
        c, _ = make(lambda a: 0.3 * np.cos(2 * a), n=128)
        rng = np.random.default_rng(0)
        g = rng.standard_normal(c.n_points)
        with pytest.raises(OracleInconclusiveError):
            dtn_oracle_collocation(c, g, n_modes=4)


class TestGraphOracle:
    @pytest.mark.parametrize("k", [1, 3])
    def test_flat_interface(self, k):
        g = PeriodicGrid(128)
        eta = np.full(128, 0.4)
        data = np.cos(k * g.nodes)
        out = graph_dtn_oracle(eta, data, n_modes=8)
        np.testing.assert_allclose(out, k * np.cos(k * g.nodes), atol=1e-11)

    def test_constant_data(self):
        g = PeriodicGrid(128)
        out = graph_dtn_oracle(0.1 * np.cos(g.nodes), np.ones(128), n_modes=8)
        assert np.max(np.abs(out)) < 1e-12

    def test_equivalence_with_star_dtn(self):
        # graph and star-shaped formulations agree under y = log r
        c, ops = make(lambda a: 0.1 * np.cos(a), n=256)
        res = apply_dtn(ops, c.eta)
        ref = graph_dtn_oracle(c.eta, c.eta, n_modes=32)
        assert np.max(np.abs(res.g_of - ref)) < 1e-7


class TestTaylorSign:
    def test_circle_is_exactly_minus_one(self):
        _, ops = make(lambda a: np.zeros_like(a))
        assert taylor_sign_residual(ops) == -1.0

    def test_strictly_negative_for_moderate_wobble(self):
        # the mode-3 curve needs a deep expansion before the oracle can
        # certify itself on the refined sampling: N=512 with 112 modes
        c, ops = make(lambda a: 0.2 * np.cos(3 * a), n=512)
        val = taylor_sign_residual(ops)
        assert val <= -0.1
        ref = dtn_oracle_collocation(c, c.eta, n_modes=112)
        assert abs(val - np.max(ref - 1.0)) < 1e-7

    def test_large_slope_still_nonpositive(self):
        _, ops = make(lambda a: 0.5 * np.cos(a), n=256)
        assert taylor_sign_residual(ops) <= 1e-8


class TestSymmetryGroup:
    def test_scaling_symmetry(self):
        g = PeriodicGrid(128)
        eta = 0.2 * np.cos(g.nodes) + 0.1 * np.sin(3 * g.nodes)
        base = apply_dtn(assemble(curve_from_eta(g, eta)), eta)
        for c0 in (-1.0, 0.37, 2.0):
            shifted = apply_dtn(assemble(curve_from_eta(g, eta + c0)), eta + c0)
            assert np.max(np.abs(base.g_of - shifted.g_of)) < 1e-10

    def test_rotation_permutes_output(self):
        g = PeriodicGrid(128)
        eta = 0.2 * np.cos(g.nodes)
        base = apply_dtn(assemble(curve_from_eta(g, eta)), eta)
        s = 7
        eta_rot = np.roll(eta, s)
        rot = apply_dtn(assemble(curve_from_eta(g, eta_rot)), eta_rot)
        assert np.max(np.abs(rot.g_of - np.roll(base.g_of, s))) < 1e-10


class TestPointwiseComparison:
    def test_touching_pair_orders_the_flux(self):
        # eta2 = eta1 + bump, bump >= 0 vanishing quadratically at a0:
        # the lower interface flux dominates at the touch point
        g = PeriodicGrid(256)
        a0_idx = 64
        a0 = g.nodes[a0_idx]
        eta1 = 0.1 * np.cos(g.nodes)
        bump = 0.05 * (1.0 - np.cos(g.nodes - a0))
        eta2 = eta1 + bump
        g1 = apply_dtn(assemble(curve_from_eta(g, eta1)), eta1).g_of
        g2 = apply_dtn(assemble(curve_from_eta(g, eta2)), eta2).g_of
        assert g1[a0_idx] >= g2[a0_idx] - 1e-8


class TestResolutionBehavior:
    def test_spectral_saturation_across_grids(self):
        # analytic curve and data: the sup error against a fixed fine
        # oracle sits at roundoff already on coarse grids
        eta_func = lambda a: 0.2 * np.cos(a) + 0.1 * np.sin(2 * a)
        gf = PeriodicGrid(512)
        cf = curve_from_eta(gf, eta_func(gf.nodes))
        ref = dtn_oracle_collocation(cf, cf.eta, n_modes=64)
        for n in (32, 64, 128):
            gn = PeriodicGrid(n)
            cn = curve_from_eta(gn, eta_func(gn.nodes))
            out = apply_dtn(assemble(cn), cn.eta).g_of
            assert np.max(np.abs(out - ref[:: 512 // n])) < 1e-12

    def test_scale_target_n2048(self):
        # dense-assembly design point: largest supported grid stays fast
        # and accurate
        g = PeriodicGrid(2048)
        c = curve_from_eta(g, np.zeros(2048))
        res = apply_dtn(assemble(c), np.cos(5 * g.nodes))
        assert np.max(np.abs(res.g_of - 5 * np.cos(5 * g.nodes))) < 1e-10


class TestConcurrentUse:
    def test_parallel_evaluations_match_serial(self):
        # operator sets are immutable; concurrent applies must agree
        from concurrent.futures import ThreadPoolExecutor

        g = PeriodicGrid(128)
        c = curve_from_eta(g, 0.2 * np.cos(g.nodes))
        ops = assemble(c)
        datas = [np.cos(k * g.nodes) for k in range(1, 9)]
        serial = [apply_dtn(ops, d).g_of for d in datas]
        with ThreadPoolExecutor(max_workers=8) as pool:
            parallel = list(pool.map(lambda d: apply_dtn(ops, d).g_of, datas))
        for s, p in zip(serial, parallel):
            np.testing.assert_array_equal(s, p)


class TestOrderOneBound:
    def test_empirical_constant_finite_on_stress_family(self):
        # ||G(e^f) g||_L2 <= C(f) ||g'||_L2 with C finite for |f'| <= 1
        g = PeriodicGrid(128)
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(12):
            coeffs = rng.uniform(-1, 1, size=3)
            f = sum(
                coeffs[k - 1] / (3 * k) * np.cos(k * g.nodes + rng.uniform(0, TWO_PI))
                for k in (1, 2, 3)
            )
            data = rng.uniform(-1, 1) * np.cos(g.nodes) + rng.uniform(-1, 1) * np.sin(
                2 * g.nodes
            )
            ops = assemble(curve_from_eta(g, f))
            res = apply_dtn(ops, data)
            num = np.sqrt(g.trapezoid_integral(res.g_of**2))
            den = np.sqrt(g.trapezoid_integral(g.spectral_derivative(data, 1) ** 2))
            worst = max(worst, num / den)
        assert np.isfinite(worst)
        assert worst < 50.0
