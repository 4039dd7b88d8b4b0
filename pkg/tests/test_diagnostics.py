import math

import numpy as np
import pytest

from conftest import make_scenario
from distopt.certificates import matrix_E_extreme, matrix_F, matrix_F_extremes
from distopt.costs import CostModel, network_cost
from distopt.diagnostics import (
    AnalysisCoordinates,
    conservation_violation,
    decay_check,
    isometry_violation,
    lasalle_function,
    lyapunov_digraph,
    lyapunov_series,
    lyapunov_undirected,
    reconstruct_gradient,
    to_analysis_coords,
)
from distopt.dynamics import AlgorithmParams, equilibrium, simulate
from distopt.errors import (
    InsufficientSampling,
    InsufficientVisibility,
    NotConnected,
    ValidationError,
)
from distopt.graph import build_digraph, complement_basis, preset_graph


def coords_of(z1, z_rest, w1, w_rest):
    return AnalysisCoordinates(
        z1=np.atleast_1d(np.asarray(z1, float)),
        z_rest=np.atleast_1d(np.asarray(z_rest, float)),
        w1=np.atleast_1d(np.asarray(w1, float)),
        w_rest=np.atleast_1d(np.asarray(w_rest, float)),
    )


class TestCoordinates:
    def test_zero_at_equilibrium(self, quad_pair_nc):
        eq = equilibrium(quad_pair_nc, AlgorithmParams(1.0, 1.0))
        c = to_analysis_coords(eq[0], eq[1], eq, complement_basis(2))
        assert c.p_norm_sq <= 1e-24
        assert np.abs(c.w1).max() <= 1e-12

    def test_two_agent_worked_case(self, quad_pair_nc):
        eq = equilibrium(quad_pair_nc, AlgorithmParams(1.0, 1.0))
        x = eq[0] + np.array([[1.0], [1.0]])
        c = to_analysis_coords(x, eq[1], eq, complement_basis(2))
        assert c.z1[0] == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert abs(c.z_rest[0]) <= 1e-12

    def test_isometry_fuzz(self):
        rng = np.random.default_rng(14)
        for _ in range(1000):
            n = int(rng.integers(2, 8))
            d = int(rng.integers(1, 3))
            basis = complement_basis(n)
            x_bar = rng.normal(size=(n, d))
            v_bar = rng.normal(size=(n, d))
            x = rng.normal(size=(n, d))
            v = rng.normal(size=(n, d))
            c = to_analysis_coords(x, v, (x_bar, v_bar), basis)
            z_norm = math.sqrt(float(c.z1 @ c.z1 + c.z_rest @ c.z_rest))
            assert z_norm == pytest.approx(np.linalg.norm(x - x_bar), abs=1e-12)

    def test_w1_constant_along_zero_sum_trace(self, k2, quad_pair, quad_pair_nc):
        trace = simulate(make_scenario(quad_pair, graph=k2, t_final=3.0))
        eq = equilibrium(quad_pair_nc, AlgorithmParams(1.0, 1.0))
        basis = complement_basis(2)
        for k in range(trace.t.size):
            c = to_analysis_coords(trace.x[k], trace.v[k], eq, basis)
            assert np.abs(c.w1).max() <= 1e-9


class TestEnergyFunctions:
    def test_digraph_zero_at_origin(self):
        assert lyapunov_digraph(coords_of(0, 0, 0, 0), 1.0, 9.0) == 0.0

    def test_digraph_worked_value(self):
        # consensus-only deviation z1 = 3: (10/18) * 9 = 5
        val = lyapunov_digraph(coords_of(3.0, 0.0, 0.0, 0.0), 1.0, 9.0)
        assert val == pytest.approx(5.0, abs=1e-12)

    def test_digraph_sandwich(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            alpha, phi = rng.uniform(0.2, 5.0, size=2)
            n = int(rng.integers(2, 6))
            c = coords_of(rng.normal(), rng.normal(size=n - 1), 0.0,
                          rng.normal(size=n - 1))
            lo, hi = matrix_F_extremes(alpha, phi, n, 1)
            val = lyapunov_digraph(c, alpha, phi)
            p_sq = c.p_norm_sq
            assert lo * p_sq - 1e-10 <= val <= hi * p_sq + 1e-10

    def test_digraph_matches_quadratic_form(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            alpha, phi = rng.uniform(0.2, 5.0, size=2)
            n = int(rng.integers(2, 6))
            c = coords_of(rng.normal(), rng.normal(size=n - 1), 0.0,
                          rng.normal(size=n - 1))
            p = np.concatenate([c.z1, c.z_rest, c.w_rest])
            form = float(p @ matrix_F(alpha, phi, n, 1) @ p)
            assert lyapunov_digraph(c, alpha, phi) == pytest.approx(form, rel=1e-10)

    def test_undirected_zero_and_positive(self, k2):
        assert lyapunov_undirected(coords_of(0, 0, 0, 0), 1.0, 1.0, 1.0, k2) == 0.0
        rng = np.random.default_rng(1)
        for _ in range(200):
            c = coords_of(rng.normal(), rng.normal(), 0.0, rng.normal())
            assert lyapunov_undirected(c, 1.0, 2.0, 1.5, k2) >= 0.0

    def test_undirected_w2_only_closed_form(self, k2):
        # reduced Laplacian of K2 is [2]
        alpha, beta, phi = 1.0, 2.0, 3.0
        w2 = 1.7
        val = lyapunov_undirected(coords_of(0, 0, 0, w2), alpha, beta, phi, k2)
        expect = (1 / (2 * alpha)) * w2**2 + (phi + 1) / (4 * beta) * w2**2
        assert val == pytest.approx(expect, abs=1e-12)

    def test_undirected_bounded_by_matrix_extreme(self, k2):
        rng = np.random.default_rng(9)
        alpha, beta, phi = 1.0, 1.0, 1.0
        hi = matrix_E_extreme(alpha, beta, phi, k2)
        for _ in range(500):
            c = coords_of(rng.normal(), rng.normal(), 0.0, rng.normal())
            val = lyapunov_undirected(c, alpha, beta, phi, k2)
            assert val <= hi * c.p_norm_sq + 1e-10

    def test_undirected_needs_phi_at_least_one(self, k2):
        with pytest.raises(ValidationError):
            lyapunov_undirected(coords_of(1, 0, 0, 0), 1.0, 1.0, 0.5, k2)

    def test_lasalle_values(self, k2):
        assert lasalle_function(coords_of(0, 0, 0, 0), 1.0, 1.0, k2) == 0.0
        val = lasalle_function(coords_of(3.0, 4.0, 0.0, 0.0), 1.0, 1.0, k2)
        assert val == pytest.approx(0.5 * 25.0, abs=1e-12)

    def test_disconnected_raises(self):
        g = build_digraph(4, [(1, 2, 1.0), (2, 1, 1.0), (3, 4, 1.0), (4, 3, 1.0)])
        with pytest.raises(NotConnected):
            lasalle_function(coords_of(1.0, [0, 0, 0], 0.0, [1.0, 0, 0]), 1.0, 1.0, g)

    def test_nonnegative_zero_only_at_origin(self, k2):
        rng = np.random.default_rng(12)
        for _ in range(200):
            c = coords_of(rng.normal(), rng.normal(), 0.0, rng.normal())
            if c.p_norm_sq < 1e-12:
                continue
            assert lyapunov_digraph(c, 1.0, 2.0) > 0
            assert lyapunov_undirected(c, 1.0, 1.0, 1.0, k2) > 0
            assert lasalle_function(c, 1.0, 1.0, k2) > 0


class TestDecayCheck:
    def test_certified_digraph_run_passes(self, k2, quad_pair, quad_pair_nc):
        sc = make_scenario(quad_pair, graph=k2, beta=3.0, t_final=8.0,
                           x0=np.array([[3.0], [-2.0]]))
        trace = simulate(sc)
        report = decay_check(trace, "digraph", min(7.0 / 16.0, 90.0 / 9.0),
                             g=k2, nc=quad_pair_nc, alpha=1.0, phi=9.0)
        assert report.passed
        assert report.fraction_ok == 1.0
        assert report.worst_margin <= 0.0

    def test_equilibrium_trace_within_slack(self, k2, quad_pair, quad_pair_nc):
        eq = equilibrium(quad_pair_nc, AlgorithmParams(1.0, 3.0))
        sc = make_scenario(quad_pair, graph=k2, beta=3.0, t_final=1.0,
                           x0=eq[0], v0=eq[1])
        trace = simulate(sc)
        report = decay_check(trace, "digraph", 0.4375, g=k2, nc=quad_pair_nc,
                             alpha=1.0, phi=9.0)
        assert report.passed  # dV/dt ~ 0 and p ~ 0 sit inside the slack

    def test_sparse_trace_rejected(self, k2, quad_pair, quad_pair_nc):
        sc = make_scenario(quad_pair, graph=k2, t_final=2.0, stride=20)
        trace = simulate(sc)
        with pytest.raises(InsufficientSampling):
            decay_check(trace, "digraph", 0.4, g=k2, nc=quad_pair_nc,
                        alpha=1.0, phi=9.0)

    def test_lasalle_monotone_on_convex_run(self, k2):
        quartic = CostModel(dim=1, value=lambda x: float(x[0] ** 4),
                            gradient=lambda x: 4.0 * x**3, name="x4",
                            scalar_value=lambda x: x**4,
                            scalar_gradient=lambda x: 4 * x**3)
        shifted = CostModel(dim=1, value=lambda x: float((x[0] - 1) ** 4),
                            gradient=lambda x: 4.0 * (x - 1) ** 3, name="(x-1)^4",
                            scalar_value=lambda x: (x - 1) ** 4,
                            scalar_gradient=lambda x: 4 * (x - 1) ** 3)
        nc = network_cost([quartic, shifted])
        sc = make_scenario([quartic, shifted], graph=k2, t_final=10.0,
                           x0=np.array([[2.0], [-1.0]]))
        trace = simulate(sc)
        V, _ = lyapunov_series(trace, "lasalle", g=k2, nc=nc, alpha=1.0, beta=1.0)
        assert (np.diff(V) <= 1e-10).all()


class TestReconstruction:
    def test_two_agent_quadratic_target(self, k2, quad_pair):
        sc = make_scenario(quad_pair, graph=k2, t_final=10.0, stride=1,
                           x0=np.array([[3.0], [-4.0]]))
        trace = simulate(sc)
        rec = reconstruct_gradient(0, 1, trace, k2, v_target_0=np.zeros(1))
        window = rec.times >= 1.0
        truth = 2.0 * (rec.x_target[window, 0] + 2.0)  # analytic d/dx (x+2)^2
        err = np.abs(rec.estimates[window, 0] - truth)
        assert err.max() <= 1e-3
        assert not rec.assumed_zero_v0

    def test_visibility_precondition(self, ten_suite):
        g = preset_graph("path3")
        sc = make_scenario(ten_suite[:3], graph=g, t_final=0.5, stride=1)
        trace = simulate(sc)
        # agent 0 does not receive from agent 2, one of agent 1's sources
        with pytest.raises(InsufficientVisibility):
            reconstruct_gradient(0, 1, trace, g, v_target_0=np.zeros(1))

    def test_not_receiving_target_raises(self):
        g = build_digraph(3, [(2, 1, 1.0), (3, 2, 1.0), (1, 3, 1.0)])
        sc = make_scenario([preset for preset in
                            (CostModel(1, lambda x: float(x[0] ** 2), lambda x: 2 * x),) * 3],
                           graph=g, t_final=0.2, stride=1)
        trace = simulate(sc)
        with pytest.raises(InsufficientVisibility):
            reconstruct_gradient(0, 1, trace, g, v_target_0=np.zeros(1))

    def test_wrong_v0_biases_by_constant(self, k2, quad_pair):
        alpha = 2.0
        sc = make_scenario(quad_pair, graph=k2, alpha=alpha, t_final=4.0, stride=1,
                           x0=np.array([[3.0], [-4.0]]))
        trace = simulate(sc)
        good = reconstruct_gradient(0, 1, trace, k2, v_target_0=np.zeros(1))
        c = 0.37
        bad = reconstruct_gradient(0, 1, trace, k2, v_target_0=np.array([c]))
        bias = bad.estimates - good.estimates
        assert np.abs(bias + c / alpha).max() <= 1e-12

    def test_missing_v0_flagged(self, k2, quad_pair):
        trace = simulate(make_scenario(quad_pair, graph=k2, t_final=1.0, stride=1))
        rec = reconstruct_gradient(0, 1, trace, k2, v_target_0=None)
        assert rec.assumed_zero_v0


class TestHelpers:
    def test_conservation_violation(self, k2, quad_pair):
        trace = simulate(make_scenario(quad_pair, graph=k2, t_final=2.0))
        assert conservation_violation(trace) <= 1e-9

    def test_isometry_violation(self, k2, quad_pair, quad_pair_nc):
        trace = simulate(make_scenario(quad_pair, graph=k2, t_final=2.0))
        assert isometry_violation(trace, quad_pair_nc, 1.0, 1.0) <= 1e-10
