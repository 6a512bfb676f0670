"""Integrator tests: step correctness, guards, dense output, periods."""

import math

import numpy as np
import pytest

from pdmdyn.core import State, build_system, parameter_set
from pdmdyn.errors import DomainViolation, InvalidParameter, NoPeriod
from pdmdyn.exact import ExactSolutionSpec, exact_trajectory, kinematics
from pdmdyn.integrate import (ADAPTIVE45, FIXED_RK4, IntegratorOptions,
                              estimate_period, integrate, rk4_step,
                              sample_dense)
from pdmdyn.verify import el1_rhs


def harmonic_rhs(t, x, v):
    return -x


class TestRk4Step:
    def test_matches_harmonic_oracle(self):
        st = rk4_step(harmonic_rhs, State.of(0.0, [1.0], [0.0]), 0.1)
        assert abs(st.x[0] - math.cos(0.1)) < 1e-7
        assert abs(st.v[0] + math.sin(0.1)) < 1e-7

    def test_zero_step_is_identity(self):
        s0 = State.of(0.0, [1.0], [2.0])
        s1 = rk4_step(harmonic_rhs, s0, 0.0)
        assert s1.t == s0.t
        assert np.array_equal(s1.x, s0.x)
        assert np.array_equal(s1.v, s0.v)

    def test_error_propagates_from_stage(self):
        def bad_rhs(t, x, v):
            raise DomainViolation("outside", t=t)
        with pytest.raises(DomainViolation):
            rk4_step(bad_rhs, State.of(0.0, [1.0], [0.0]), 0.1)

    def test_negative_step_rejected(self):
        with pytest.raises(InvalidParameter):
            rk4_step(harmonic_rhs, State.of(0.0, [1.0], [0.0]), -0.1)


class TestOptions:
    def test_bad_scheme(self):
        with pytest.raises(InvalidParameter):
            IntegratorOptions(t_end=1.0, scheme="euler")

    def test_bad_tolerances(self):
        with pytest.raises(InvalidParameter):
            IntegratorOptions(t_end=1.0, rel_tol=0.0)

    def test_h_ordering(self):
        with pytest.raises(InvalidParameter):
            IntegratorOptions(t_end=1.0, h_init=1.0, h_max=0.1)


class TestIntegrate:
    def test_ml1_returns_to_start_after_one_period(self):
        system = build_system("ml1", 1, {"omega": [1.0], "lambda": 1.0,
                                         "sign": "+"})
        T = 2.0 * math.pi * math.sqrt(2.0)
        opts = IntegratorOptions(t_end=T, scheme=ADAPTIVE45,
                                 rel_tol=1e-10, abs_tol=1e-12)
        traj = integrate(el1_rhs(system), State.of(0.0, [1.0], [0.0]), opts)
        assert traj.termination.kind == "completed"
        assert abs(traj.x[-1, 0] - 1.0) < 1e-7
        assert abs(traj.v[-1, 0]) < 1e-7

    def test_morse_stays_within_closed_form_bounds(self):
        system = build_system("morse", 1, {"omega": [1.0], "zeta": [1.0]})
        spec = ExactSolutionSpec("morse", parameter_set(
            {"omega": [1.0], "zeta": [1.0]}, 1), (0.5,))
        x0, v0, _ = kinematics(spec, 0.0)
        opts = IntegratorOptions(t_end=40.0, scheme=ADAPTIVE45, rel_tol=1e-10)
        traj = integrate(el1_rhs(system), State(0.0, x0, v0), opts)
        assert traj.termination.kind == "completed"
        assert np.all(traj.x >= math.log(0.5) - 1e-9)
        assert np.all(traj.x <= math.log(1.5) + 1e-9)

    def test_minus_branch_stage_guard_truncates_fixed_stepping(self):
        # launched just inside the domain edge, a coarse fixed step pokes a
        # stage past the wall; the per-stage guard turns that into a clean
        # truncation instead of a silently corrupted step
        system = build_system("ml1", 1, {"omega": [1.0], "lambda": 1.0,
                                         "sign": "-"})
        opts = IntegratorOptions(t_end=10.0, scheme=FIXED_RK4, h=0.01)
        traj = integrate(el1_rhs(system), State.of(0.0, [0.9999], [0.5]), opts)
        assert traj.termination.kind in ("domain_violation", "step_failure")
        assert traj.t[-1] < 10.0
        assert np.all(np.abs(traj.x) < 1.0)

    def test_vanishing_mass_truncates_adaptive(self):
        # a mass zero inside the working interval makes the velocity diverge
        # in finite time; the adaptive run must stop, not wander outside
        system = build_system("custom", 1, mass_exprs=["1-x^2"])
        opts = IntegratorOptions(t_end=10.0, scheme=ADAPTIVE45, rel_tol=1e-8)
        traj = integrate(el1_rhs(system), State.of(0.0, [0.9], [0.5]), opts)
        assert traj.termination.kind in ("domain_violation", "step_failure")
        assert traj.t[-1] < 10.0
        assert np.all(np.abs(traj.x) <= 1.0)

    def test_minus_branch_potential_wall_confines_adaptive(self):
        # the catalog potential diverges at the domain edge, so the true
        # orbit turns around inside it; stage-level retries let the adaptive
        # scheme resolve the turn instead of aborting
        system = build_system("ml1", 1, {"omega": [1.0], "lambda": 1.0,
                                         "sign": "-"})
        opts = IntegratorOptions(t_end=10.0, scheme=ADAPTIVE45, rel_tol=1e-8)
        traj = integrate(el1_rhs(system), State.of(0.0, [0.9999], [0.5]), opts)
        assert traj.termination.kind == "completed"
        assert np.all(np.abs(traj.x) < 1.0)

    def test_custom_guard_predicate_truncates(self):
        def guard(t, x, v):
            if abs(x[0]) > 0.5:
                raise DomainViolation("left the watched region", t=t, coordinate=0)

        opts = IntegratorOptions(t_end=10.0, scheme=ADAPTIVE45, rel_tol=1e-8,
                                 guard=guard)
        traj = integrate(harmonic_rhs, State.of(0.0, [0.0], [1.0]), opts)
        assert traj.termination.kind == "domain_violation"
        assert traj.termination.coordinate == 0
        assert np.all(np.abs(traj.x) <= 0.5 + 1e-12)

    def test_fixed_rk4_scheme(self):
        opts = IntegratorOptions(t_end=2.0 * math.pi, scheme=FIXED_RK4, h=1e-3)
        traj = integrate(harmonic_rhs, State.of(0.0, [1.0], [0.0]), opts)
        assert traj.termination.kind == "completed"
        assert abs(traj.x[-1, 0] - 1.0) < 1e-10

    def test_step_statistics_populated(self):
        opts = IntegratorOptions(t_end=5.0, scheme=ADAPTIVE45, rel_tol=1e-10)
        traj = integrate(harmonic_rhs, State.of(0.0, [1.0], [0.0]), opts)
        assert traj.accepted == len(traj.t) - 1
        assert traj.max_error <= 1.0
        assert traj.rejected >= 0

    def test_dense_output_accuracy(self):
        opts = IntegratorOptions(t_end=6.0, scheme=ADAPTIVE45, rel_tol=1e-10)
        traj = integrate(harmonic_rhs, State.of(0.0, [1.0], [0.0]), opts)
        ts = np.linspace(0.1, 5.9, 137)
        xs, vs = sample_dense(traj, ts)
        assert np.max(np.abs(xs[:, 0] - np.cos(ts))) < 1e-7
        assert np.max(np.abs(vs[:, 0] + np.sin(ts))) < 1e-7

    def test_samples_property_round_trips(self):
        opts = IntegratorOptions(t_end=1.0, scheme=FIXED_RK4, h=0.25)
        traj = integrate(harmonic_rhs, State.of(0.0, [1.0], [0.0]), opts)
        states = traj.samples
        assert len(states) == len(traj.t)
        assert states[0].x[0] == 1.0
        assert np.all(np.diff(traj.t) > 0)


class TestRk4Order:
    def test_halving_reduces_error_sixteenfold(self):
        errs = []
        for h in (0.05, 0.025):
            opts = IntegratorOptions(t_end=20.0 * math.pi, scheme=FIXED_RK4, h=h)
            traj = integrate(harmonic_rhs, State.of(0.0, [1.0], [0.0]), opts)
            errs.append(float(np.max(np.abs(traj.x[:, 0] - np.cos(traj.t)))))
        ratio = errs[0] / errs[1]
        assert 12.0 <= ratio <= 20.0


class TestEstimatePeriod:
    def test_known_cosine(self):
        ts = np.linspace(0.0, 20.0, 4001)
        x = np.cos(2.0 * ts)
        traj_spec = ExactSolutionSpec("harmonic", parameter_set(
            {"omega": [2.0]}, 1), (1.0,))
        traj = exact_trajectory(traj_spec, 0.0, 20.0, 4001)
        measured = estimate_period(traj, 0)
        assert measured == pytest.approx(math.pi, rel=1e-6)
        assert np.allclose(traj.x[:, 0], x, atol=1e-12)

    def test_ml1_measured_period(self):
        system = build_system("ml1", 1, {"omega": [1.0], "lambda": 1.0,
                                         "sign": "+"})
        T = 2.0 * math.pi * math.sqrt(2.0)
        opts = IntegratorOptions(t_end=6.0 * T, scheme=ADAPTIVE45, rel_tol=1e-10)
        traj = integrate(el1_rhs(system), State.of(0.0, [1.0], [0.0]), opts)
        measured = estimate_period(traj, 0)
        assert measured == pytest.approx(8.885766, rel=1e-6)

    def test_monotone_signal_has_no_period(self):
        opts = IntegratorOptions(t_end=5.0, scheme=FIXED_RK4, h=0.01)

        def free(t, x, v):
            return np.zeros_like(x)

        traj = integrate(free, State.of(0.0, [0.0], [1.0]), opts)
        with pytest.raises(NoPeriod):
            estimate_period(traj, 0)

    def test_drifting_period_rejected(self):
        from pdmdyn.core import Termination, Trajectory
        ts = np.linspace(0.0, 30.0, 6001)
        x = np.cos(ts + 0.05 * ts * ts)  # chirp: crossings drift > 1%
        traj = Trajectory(ts, x[:, None], np.gradient(x, ts)[:, None],
                          np.zeros_like(x)[:, None], len(ts), 0, 0.0,
                          Termination("completed"))
        with pytest.raises(NoPeriod):
            estimate_period(traj, 0)
