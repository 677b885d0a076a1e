import math

import numpy as np
import pytest

from inhibnet.errors import ConfigError, InhibnetError
from inhibnet.flow import FlowContext, evolve, first_jump_survival
from inhibnet.model import (
    ConstantRate,
    ExponentialReset,
    LinearDrift,
    MeanFieldWeights,
    NetworkModel,
    StepRate,
    weight,
)
from inhibnet.pdmp import (
    EventRecord,
    empirical_jump_rate,
    first_accepted_jump_times,
    simulate,
    trajectory_csv,
    trajectory_summary,
)


def two_neuron_model(rate=None, w=0.5, x0=(4.0, 4.0)):
    return NetworkModel(
        drift=LinearDrift(1.0),
        rate=rate or StepRate(3.0, 1.0, 2.0),
        reset=ExponentialReset(1.0),
        weights=MeanFieldWeights(w),
        n=2,
        initial_state=list(x0),
    )


def one_neuron_model(rate=None, x0=4.0):
    return NetworkModel(
        drift=LinearDrift(1.0),
        rate=rate or StepRate(3.0, 1.0, 2.0),
        reset=ExponentialReset(1.0),
        weights=MeanFieldWeights(0.5),
        n=1,
        initial_state=[x0],
    )


class TestSimulate:
    def test_constant_rate_all_sure_and_accepted(self):
        traj = simulate(two_neuron_model(rate=ConstantRate(3.0)), 200, seed=1)
        assert all(e.label == "sure" and e.accepted for e in traj.events)

    def test_deterministic_given_seed(self):
        a = simulate(two_neuron_model(), 50, seed=7)
        b = simulate(two_neuron_model(), 50, seed=7)
        assert repr(a.events) == repr(b.events)
        assert a.states == b.states

    def test_different_seeds_differ(self):
        a = simulate(two_neuron_model(), 50, seed=7)
        b = simulate(two_neuron_model(), 50, seed=8)
        assert a.events != b.events

    def test_event_times_strictly_increasing(self):
        traj = simulate(two_neuron_model(), 500, seed=3)
        times = [e.time for e in traj.events]
        assert all(b > a for a, b in zip(times, times[1:]))

    def test_states_nonnegative(self):
        traj = simulate(two_neuron_model(), 500, seed=3)
        assert all(v >= 0.0 for st in traj.states for v in st)

    def test_inhibition_jump_is_exactly_w(self):
        # non-spiking coordinate gains exactly 0.5 on top of its flowed value
        model = two_neuron_model(w=0.5)
        traj = simulate(model, 200, seed=11)
        ctx = FlowContext(model.drift_of(0), model.rate_of(0))
        prev_t, prev_state = 0.0, np.array(traj.initial_state)
        for ev, st in zip(traj.events, traj.states):
            gap = ev.time - prev_t
            flowed = np.array([evolve(ctx, s, gap) for s in prev_state])
            if ev.accepted:
                other = 1 - ev.neuron
                assert st[other] == pytest.approx(flowed[other] + 0.5, abs=1e-12)
                assert st[ev.neuron] == ev.reset_value
            prev_t, prev_state = ev.time, np.array(st)

    def test_flow_consistency_between_events(self):
        model = two_neuron_model()
        traj = simulate(model, 300, seed=5)
        ctx = FlowContext(model.drift_of(0), model.rate_of(0))
        prev_t, prev = 0.0, np.array(traj.initial_state)
        for ev, st in zip(traj.events, traj.states):
            gap = ev.time - prev_t
            flowed = np.array([evolve(ctx, s, gap) for s in prev])
            if ev.accepted:
                expected = flowed + np.array(
                    [weight(model, ev.neuron, j) for j in range(2)]
                )
                expected[ev.neuron] = ev.reset_value
            else:
                expected = flowed
            assert np.max(np.abs(np.array(st) - expected)) < 1e-10
            prev_t, prev = ev.time, np.array(st)

    def test_label_frequencies(self):
        # sure fraction should match beta_star / beta_sup = 3/4
        traj = simulate(two_neuron_model(), 100_000, seed=13)
        frac = sum(e.label == "sure" for e in traj.events) / len(traj.events)
        p = 0.75
        se = math.sqrt(p * (1 - p) / len(traj.events))
        assert abs(frac - p) < 4 * se

    def test_rejects_bad_input(self):
        with pytest.raises(ConfigError):
            simulate(two_neuron_model(), 0, seed=1)
        lattice = NetworkModel(
            drift=LinearDrift(1.0),
            rate=StepRate(3.0, 1.0, 2.0),
            reset=ExponentialReset(1.0),
            weights=__import__("inhibnet.model", fromlist=["NearestNeighborZWeights"]).NearestNeighborZWeights(1.0),
            lattice=True,
        )
        with pytest.raises(ConfigError):
            simulate(lattice, 10, seed=1)

    def test_event_record_invariants(self):
        with pytest.raises(InhibnetError):
            EventRecord(1.0, 0, "sure", False, None)
        with pytest.raises(InhibnetError):
            EventRecord(1.0, 0, "uncertain", True, None)


class TestEmpiricalRate:
    def test_constant_rate_matches_beta(self):
        # thinning correctness: accepted events of a single neuron with
        # constant rate b form a Poisson process of rate b
        traj = simulate(one_neuron_model(rate=ConstantRate(2.0)), 20_000, seed=21)
        rate = empirical_jump_rate(traj, 0)
        accepted = traj.accepted_count(0)
        se = math.sqrt(accepted) / traj.duration
        assert abs(rate - 2.0) < 4 * se

    def test_no_events_for_neuron(self):
        traj = simulate(two_neuron_model(), 5, seed=1)
        # a neuron index with no accepted events gives rate 0
        counts = [traj.accepted_count(i) for i in range(2)]
        if 0 in counts:
            assert empirical_jump_rate(traj, counts.index(0)) == 0.0

    def test_symmetric_model_rates_agree(self):
        traj = simulate(two_neuron_model(), 50_000, seed=31)
        r0 = empirical_jump_rate(traj, 0)
        r1 = empirical_jump_rate(traj, 1)
        se = math.sqrt(traj.accepted_count()) / traj.duration
        assert abs(r0 - r1) < 4 * se


def ks_against_cdf(samples: np.ndarray, cdf) -> float:
    xs = np.sort(samples)
    n = len(xs)
    f = np.array([cdf(x) for x in xs])
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return max(upper, lower)


class TestFirstAcceptedJump:
    def test_matches_survival_law(self):
        model = one_neuron_model(x0=4.0)
        times = first_accepted_jump_times(model, 20_000, seed=41)

        def cdf(t):
            return 1.0 - first_jump_survival(model, t).value

        assert ks_against_cdf(times, cdf) < 0.02

    def test_deterministic(self):
        model = one_neuron_model()
        a = first_accepted_jump_times(model, 100, seed=5)
        b = first_accepted_jump_times(model, 100, seed=5)
        assert np.array_equal(a, b)

    def test_constant_rate_is_exponential(self):
        model = one_neuron_model(rate=ConstantRate(2.0))
        times = first_accepted_jump_times(model, 20_000, seed=43)
        assert ks_against_cdf(times, lambda t: 1.0 - math.exp(-2.0 * t)) < 0.02


class TestExports:
    def test_csv_shape(self):
        traj = simulate(two_neuron_model(), 50, seed=7)
        text = trajectory_csv(traj)
        lines = text.strip().split("\n")
        assert lines[0] == "time,neuron,label,accepted,reset_value,state_1,state_2"
        assert len(lines) == 51
        # rejected rows have an empty reset field
        for ev, line in zip(traj.events, lines[1:]):
            fields = line.split(",")
            assert (fields[4] == "") == (not ev.accepted)

    def test_csv_round_trips_floats(self):
        traj = simulate(two_neuron_model(), 20, seed=7)
        line = trajectory_csv(traj).strip().split("\n")[1]
        assert float(line.split(",")[0]) == traj.events[0].time

    def test_summary(self):
        traj = simulate(two_neuron_model(), 50, seed=7)
        s = trajectory_summary(traj)
        assert s["n_events"] == 50
        assert s["n_accepted"] == traj.accepted_count()
        assert len(s["empirical_rates"]) == 2
