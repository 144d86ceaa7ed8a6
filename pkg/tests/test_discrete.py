"""Tests for the discrete-time engines."""

import math

import numpy as np
import pytest

from dqsearch import discrete, jump, linops, model
from dqsearch.discrete import (
    ChannelRun,
    ClosedFormParams,
    absorbing_walk_matrix,
    channel_step,
    classical_walk,
    iterate_channel,
    multitrace_closed_form,
    multitrace_overlap,
    multitrace_required_steps,
    singletrace_cost,
    singletrace_optimal_time,
    singletrace_overlap,
)

IDEAL = model.filter_function("ideal_step")


def projector_dilation(n, eta):
    h = model.grover_hamiltonian(n, {0})
    jop = jump.build_jump(h, model.coupling("projector", n, eta), IDEAL)
    return jump.dilate(jop.matrix)


class TestChannelStep:
    def test_ground_state_unchanged(self):
        lt = projector_dilation(2, 0.25)
        rho_g = linops.DensityMatrix.basis_state(4, 0)
        out = channel_step(rho_g, lt, 3.7)
        assert linops.trace_norm(out.matrix - rho_g.matrix) < 1e-14

    def test_small_tau_limit(self):
        lt = projector_dilation(2, 0.25)
        rho = linops.DensityMatrix.uniform_superposition(2)
        tau = 1e-6
        out = channel_step(rho, lt, tau)
        assert linops.trace_norm(out.matrix - rho.matrix) < 10 * tau

    def test_matches_closed_form_single_step(self):
        n, eta, tau = 2, 0.25, 1.0
        lt = projector_dilation(n, eta)
        rho = linops.DensityMatrix.uniform_superposition(n)
        out = channel_step(rho, lt, tau)
        expected = multitrace_closed_form(ClosedFormParams(4, eta, tau), 1)
        assert np.abs(out.matrix - expected.matrix).max() < 1e-12

    def test_output_is_state(self):
        lt = projector_dilation(3, 0.125)
        rho = linops.random_density_matrix(8, np.random.default_rng(5))
        channel_step(rho, lt, 2.0).validate()

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            channel_step(np.eye(2) / 2, np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


class TestIterateChannel:
    def test_matches_closed_form_after_many_steps(self):
        for n in (2, 3):
            n_dim = 2**n
            eta = 1.0 / n_dim
            rng = np.random.default_rng(n)
            lt = projector_dilation(n, eta)
            rho0 = linops.DensityMatrix.uniform_superposition(n)
            for tau in rng.uniform(0.05, 4.0, size=4):
                run = ChannelRun(tau=float(tau), n_steps=12)
                traj = iterate_channel(run, lt, rho0)
                closed = multitrace_closed_form(ClosedFormParams(n_dim, eta, float(tau)), 12)
                gap = linops.trace_norm(traj.states[-1].matrix - closed.matrix)
                assert gap < 1e-10

    def test_ground_start_is_constant(self):
        lt = projector_dilation(2, 0.25)
        run = ChannelRun(tau=1.0, n_steps=6)
        traj = iterate_channel(run, lt, linops.DensityMatrix.basis_state(4, 0))
        assert np.abs(traj["ground_overlap"] - 1.0).max() < 1e-12

    def test_multitrace_tracks_lme_at_long_range(self):
        # unit step, eta = 1/N: per-step overlap matches the continuous
        # projector dynamics up to the cos^2 vs exp rate mismatch O(1/N^2)
        n = 6
        n_dim = 2**n
        eta = 1.0 / n_dim
        c = (n_dim - 1) * eta * eta
        params = ClosedFormParams(n_dim, eta, 1.0)
        ms = np.arange(0, 1 + int(np.ceil(3.0 / c)))
        discrete_overlap = np.array([multitrace_overlap(params, int(m)) for m in ms])
        lme_overlap = 1 / n_dim + (n_dim - 1) / n_dim * (1.0 - np.exp(-c * ms))
        assert np.abs(discrete_overlap - lme_overlap).max() < 5e-3

    def test_single_trace_mode_is_one_step(self):
        with pytest.raises(ValueError):
            ChannelRun(tau=1.0, n_steps=3, mode="single_trace")

    def test_cap_enforced(self):
        big = np.zeros((2**11, 2**11))
        run = ChannelRun(tau=1.0, n_steps=1)
        with pytest.raises(ValueError):
            iterate_channel(run, jump.dilate(np.zeros((2**11, 2**11))), big)


class TestClosedForm:
    def test_base_case(self):
        p = ClosedFormParams(8, 0.125, 1.3)
        rho = multitrace_closed_form(p, 0)
        s = np.full(8, 1.0 / np.sqrt(8))
        assert np.abs(rho.matrix - np.outer(s, s)).max() < 1e-15

    def test_overlap_formula(self):
        p = ClosedFormParams(8, 0.125, 1.3)
        for m in (1, 4, 9):
            rho = multitrace_closed_form(p, m)
            assert rho.matrix[0, 0].real == pytest.approx(multitrace_overlap(p, m), abs=1e-14)

    def test_channel_oracle_n4(self):
        p = ClosedFormParams(4, 0.25, 1.0)
        lt = projector_dilation(2, 0.25)
        sigma = linops.DensityMatrix.uniform_superposition(2)
        for _ in range(3):
            sigma = channel_step(sigma, lt, 1.0)
        expected = multitrace_closed_form(p, 3)
        assert np.abs(sigma.matrix[0, 0].real - expected.matrix[0, 0].real) < 1e-12
        assert np.abs(sigma.matrix - expected.matrix).max() < 1e-12

    def test_states_stay_physical(self):
        p = ClosedFormParams(16, 1.0 / 16.0, 2.0)
        for m in (0, 1, 5, 40):
            multitrace_closed_form(p, m).validate()

    def test_overlap_monotone_for_small_zeta(self):
        p = ClosedFormParams(8, 0.125, 1.0)
        assert 0 < p.zeta <= math.pi / 2
        vals = [multitrace_overlap(p, m) for m in range(25)]
        assert np.all(np.diff(vals) >= -1e-15)

    def test_degenerate_angle_makes_no_progress(self):
        # zeta = 2 pi: the closed form falls back to the m-multiplied branch
        # and the overlap never leaves 1/N
        eta = 2.0 * math.pi / math.sqrt(3.0)
        p = ClosedFormParams(4, eta, 1.0)
        assert math.cos(p.zeta) == pytest.approx(1.0, abs=1e-15)
        rho = multitrace_closed_form(p, 37)
        assert rho.matrix[0, 0].real == pytest.approx(0.25, abs=1e-9)


class TestRequiredSteps:
    def test_target_equal_initial_overlap(self):
        rep = multitrace_required_steps(1.0 - 1.0 / 8.0, 8, 0.125, 1.0)
        assert rep.n_steps == 0

    def test_exact_vs_laurent(self):
        rep = multitrace_required_steps(0.05, 8, 1.0 / 8.0, 1.0)
        assert rep.n_steps == 26
        assert abs(rep.n_steps - rep.laurent_n_steps) <= 1.0

    def test_scaling_linear_in_n(self):
        times = []
        for n in (6, 7, 8):
            n_dim = 2**n
            rep = multitrace_required_steps(0.05, n_dim, 1.0 / n_dim, 1.0)
            times.append(rep.total_time)
        slope = np.polyfit([6, 7, 8], np.log2(times), 1)[0]
        assert slope == pytest.approx(1.0, abs=0.05)

    def test_overlap_actually_reached(self):
        rep = multitrace_required_steps(0.02, 16, 1.0 / 16.0, 2.0)
        p = ClosedFormParams(16, 1.0 / 16.0, 2.0)
        assert multitrace_overlap(p, rep.n_steps) >= 0.98
        assert multitrace_overlap(p, rep.n_steps - 1) < 0.98

    def test_unreachable_target(self):
        eta = 2.0 * math.pi / math.sqrt(3.0)
        with pytest.raises(ValueError):
            multitrace_required_steps(0.05, 4, eta, 1.0)

    def test_more_traces_are_slower(self):
        # fixed total time T with a small rotation angle (before the single
        # coherent step overshoots): one long step beats k reset steps
        n_dim = 16
        eta = 1.0 / n_dim
        t_max = singletrace_optimal_time(n_dim, eta)
        for t_total in (0.25 * t_max, 0.5 * t_max, t_max):
            single = singletrace_overlap(n_dim, eta, t_total)
            for k in (2, 4, 8):
                p = ClosedFormParams(n_dim, eta, (t_total / k) ** 2)
                assert single >= multitrace_overlap(p, k) - 1e-12


class TestSingleTrace:
    def test_initial_value(self):
        assert singletrace_overlap(8, 0.125, 0.0) == pytest.approx(1.0 / 8.0, abs=1e-15)

    def test_perfect_overlap_at_optimal_time(self):
        for n_dim in (4, 16, 64):
            eta = 1.0 / n_dim
            t_opt = singletrace_optimal_time(n_dim, eta)
            assert abs(singletrace_overlap(n_dim, eta, t_opt) - 1.0) < 1e-12

    def test_channel_oracle(self):
        n, n_dim = 4, 16
        eta = 1.0 / 16.0
        t = 5.0
        lt = projector_dilation(n, eta)
        out = channel_step(linops.DensityMatrix.uniform_superposition(n), lt, t * t)
        assert abs(out.matrix[0, 0].real - singletrace_overlap(n_dim, eta, t)) < 1e-12

    def test_cost_eps_exponent(self):
        big = 2**20
        r1 = singletrace_cost(big, 1e-2, 2).r
        r2 = singletrace_cost(big, 5e-3, 2).r
        assert r2 / r1 == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-3)

    def test_cost_trend_near_sqrt_n(self):
        # at p = 8 the elasticity d log r / d log sqrt(N) sits within 25%
        # of 1, and T_H scales as sqrt(N)^(1+o(1))
        ns = np.arange(10, 61, 10)
        rs = [singletrace_cost(2**int(n), 1e-2, 8).r for n in ns]
        ths = [singletrace_cost(2**int(n), 1e-2, 8).t_hamiltonian for n in ns]
        slope_r = np.polyfit(0.5 * ns * math.log(2), np.log(rs), 1)[0]
        assert abs(slope_r - 1.0) < 0.25
        slope_th = np.polyfit(ns * math.log(2), np.log(ths), 1)[0]
        assert 0.5 <= slope_th <= 0.75


class TestClassicalWalk:
    def test_identity_matrix_constant(self):
        mu0 = np.full(4, 0.25)
        traj = classical_walk(np.eye(4), mu0, 5)
        assert np.abs(traj["ground_overlap"] - 0.25).max() == 0.0

    def test_absorbing_decay_rate(self):
        n_dim = 8
        p = absorbing_walk_matrix(n_dim)
        mu0 = np.full(n_dim, 1.0 / n_dim)
        traj = classical_walk(p, mu0, 10)
        miss = 1.0 - traj["ground_overlap"]
        ratios = miss[1:] / miss[:-1]
        assert np.abs(ratios - (n_dim - 2) / (n_dim - 1)).max() < 1e-12

    def test_steps_to_threshold_scale_linearly(self):
        def steps_to(n_dim, target=0.95):
            p = absorbing_walk_matrix(n_dim)
            traj = classical_walk(p, np.full(n_dim, 1.0 / n_dim), 6 * n_dim)
            hits = np.nonzero(traj["ground_overlap"] >= target)[0]
            return int(hits[0])

        s8, s16 = steps_to(8), steps_to(16)
        assert (s8, s16) == (19, 43)  # frozen from direct iteration
        assert 1.8 < s16 / s8 < 2.4

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            classical_walk(np.ones((3, 3)), np.full(3, 1 / 3), 2)
        with pytest.raises(ValueError):
            classical_walk(np.eye(3), np.array([0.5, 0.2, 0.2]), 2)
