"""Event-driven finite-network simulator based on thinning.

Proposals arrive at the constant dominating rate beta_sup * N. Each one
is labeled sure with probability beta_star/beta_sup (it then fires
regardless of state) or uncertain otherwise, in which case it is accepted
with probability (beta_k(x) - beta_star)/(beta_sup - beta_star) evaluated
at the flowed state of the uniformly chosen neuron k. An accepted spike
resets the spiking neuron from its reset law and adds the inhibition
weight to every other neuron. Rejected proposals still advance all flows.

Simulation length is counted in proposals, matching the way runs are
reported; accepted spike counts are exposed separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng
from .errors import ConfigError, InhibnetError
from .flow import FlowContext, evolve_array
from .model import NetworkModel, require_valid, weight


@dataclass(frozen=True)
class EventRecord:
    time: float
    neuron: int
    label: str  # "sure" | "uncertain"
    accepted: bool
    reset_value: Optional[float]  # present iff accepted

    def __post_init__(self):
        if self.label == "sure" and not self.accepted:
            raise InhibnetError("sure events are always accepted")
        if (self.reset_value is not None) != self.accepted:
            raise InhibnetError("reset_value present iff accepted")


@dataclass(frozen=True)
class Trajectory:
    initial_state: tuple[float, ...]
    events: tuple[EventRecord, ...]
    states: tuple[tuple[float, ...], ...]  # post-event state vectors

    @property
    def duration(self) -> float:
        return self.events[-1].time if self.events else 0.0

    def accepted_count(self, neuron: Optional[int] = None) -> int:
        return sum(
            1
            for e in self.events
            if e.accepted and (neuron is None or e.neuron == neuron)
        )


def _check_finite(model: NetworkModel):
    require_valid(model)
    if model.lattice:
        raise ConfigError("the event simulator needs a finite model")
    if model.initial_state is None:
        raise ConfigError("the event simulator needs an initial state")


def simulate(model: NetworkModel, n_events: int, seed: int) -> Trajectory:
    """Process exactly n_events proposals; deterministic given the seed."""
    _check_finite(model)
    if n_events < 1:
        raise ConfigError("n_events must be >= 1")
    n = model.n
    beta_star, beta_sup = model.global_rate_bounds()
    p_sure = beta_star / beta_sup
    gaps = rng.substream(seed, rng.SIM, rng.SIM_GAPS)
    labels = rng.substream(seed, rng.SIM, rng.SIM_LABELS)
    neurons = rng.substream(seed, rng.SIM, rng.SIM_NEURONS)
    coins = rng.substream(seed, rng.SIM, rng.SIM_COINS)
    resets = rng.substream(seed, rng.SIM, rng.SIM_RESETS)

    drifts = [model.drift_of(i) for i in range(n)]
    rates = [model.rate_of(i) for i in range(n)]
    state = np.array(model.initial_state, dtype=float)
    t = 0.0
    events: list[EventRecord] = []
    snapshots: list[tuple[float, ...]] = []

    for _ in range(n_events):
        gap = gaps.exponential(1.0 / (beta_sup * n))
        while gap == 0.0:  # keep event times strictly increasing
            gap = gaps.exponential(1.0 / (beta_sup * n))
        t_new = t + gap
        k = int(neurons.integers(n))
        sure = bool(labels.random() < p_sure)
        # advance all flows to the proposal time
        for i in range(n):
            state[i] = float(evolve_array(drifts[i], state[i], gap))
        if sure:
            accepted = True
        else:
            p = (float(rates[k].beta(state[k])) - beta_star) / (beta_sup - beta_star)
            accepted = bool(coins.random() < p)
        reset_value = None
        if accepted:
            reset_value = model.reset_of(k).draw(resets)
            for j in range(n):
                if j != k:
                    state[j] += weight(model, k, j)
            state[k] = reset_value
        events.append(
            EventRecord(t_new, k, "sure" if sure else "uncertain", accepted, reset_value)
        )
        snapshots.append(tuple(state))
        t = t_new

    return Trajectory(tuple(model.initial_state), tuple(events), tuple(snapshots))


def empirical_jump_rate(traj: Trajectory, neuron: int) -> float:
    """Accepted-spike count of the neuron divided by the simulated time."""
    if not traj.events:
        raise InhibnetError("empty trajectory")
    if traj.duration <= 0.0:
        raise InhibnetError("zero elapsed time")
    return traj.accepted_count(neuron) / traj.duration


def first_accepted_jump_times(
    model: NetworkModel, n_runs: int, seed: int
) -> np.ndarray:
    """Time of the first accepted jump of the network, over n_runs
    independent runs (vectorized thinning).

    Until the first acceptance every neuron just flows, so proposal
    states are deterministic functions of the proposal time and the loop
    vectorizes across runs.
    """
    _check_finite(model)
    n = model.n
    beta_star, beta_sup = model.global_rate_bounds()
    p_sure = beta_star / beta_sup
    g = rng.substream(seed, rng.FIRST_JUMP)
    x0 = np.array(model.initial_state, dtype=float)
    drifts = [model.drift_of(i) for i in range(n)]
    rates = [model.rate_of(i) for i in range(n)]

    t = np.zeros(n_runs)
    out = np.full(n_runs, np.nan)
    active = np.arange(n_runs)
    while active.size:
        t[active] += g.exponential(1.0 / (beta_sup * n), size=active.size)
        ks = g.integers(n, size=active.size)
        sure = g.random(active.size) < p_sure
        coin = g.random(active.size)
        accepted = sure.copy()
        for k in range(n):
            mask = (ks == k) & ~sure
            if not np.any(mask):
                continue
            xs = evolve_array(drifts[k], x0[k], t[active][mask])
            if beta_sup > beta_star:
                p = (np.asarray(rates[k].beta(xs)) - beta_star) / (beta_sup - beta_star)
            else:
                p = np.ones_like(np.asarray(xs))
            accepted[mask] = coin[mask] < p
        done = active[accepted]
        out[done] = t[done]
        active = active[~accepted]
    return out


def states_after_horizon(
    model: NetworkModel, x, horizon: float, n_reps: int, seed: int
) -> np.ndarray:
    """Exact state vectors X_h over independent replicas started at x.

    Used as a short-horizon Monte Carlo oracle for the generator. The
    number of proposals per replica is Poisson; replicas with none are
    handled in one vectorized step, the rest replay the thinning loop.
    """
    require_valid(model)
    if model.lattice:
        raise ConfigError("needs a finite model")
    n = model.n
    x = np.asarray(x, dtype=float)
    beta_star, beta_sup = model.global_rate_bounds()
    p_sure = beta_star / beta_sup
    g = rng.substream(seed, rng.GENERATOR_MC)
    drifts = [model.drift_of(i) for i in range(n)]
    rates = [model.rate_of(i) for i in range(n)]
    wmat = np.array([[weight(model, k, j) for j in range(n)] for k in range(n)])

    out = np.empty((n_reps, n))
    flowed = np.array(
        [float(evolve_array(drifts[i], x[i], horizon)) for i in range(n)]
    )
    counts = g.poisson(beta_sup * n * horizon, size=n_reps)
    out[:] = flowed
    for r in np.nonzero(counts)[0]:
        k_count = int(counts[r])
        times = np.sort(g.uniform(0.0, horizon, size=k_count))
        state = x.copy()
        prev = 0.0
        for t_ev in times:
            dt = t_ev - prev
            for i in range(n):
                state[i] = float(evolve_array(drifts[i], state[i], dt))
            k = int(g.integers(n))
            if g.random() < p_sure:
                accepted = True
            else:
                p = (float(rates[k].beta(state[k])) - beta_star) / (
                    beta_sup - beta_star
                )
                accepted = g.random() < p
            if accepted:
                y = model.reset_of(k).draw(g)
                state += wmat[k]
                state[k] = y
            prev = t_ev
        dt = horizon - prev
        for i in range(n):
            state[i] = float(evolve_array(drifts[i], state[i], dt))
        out[r] = state
    return out


def sample_time_average(
    model: NetworkModel,
    neuron: int,
    n_samples: int,
    spacing: float,
    burn_in: float,
    seed: int,
) -> np.ndarray:
    """States of one neuron sampled on a regular time grid after burn-in.

    Runs the thinning simulation without recording a trajectory, with
    lazy per-neuron flow updates, so large networks stay cheap.
    """
    _check_finite(model)
    n = model.n
    beta_star, beta_sup = model.global_rate_bounds()
    p_sure = beta_star / beta_sup
    g = rng.substream(seed, rng.TIME_AVERAGE)
    drifts = [model.drift_of(i) for i in range(n)]
    rates = [model.rate_of(i) for i in range(n)]
    neighbor_w = [
        [(j, weight(model, k, j)) for j in range(n) if j != k and weight(model, k, j) > 0]
        for k in range(n)
    ]

    state = list(map(float, model.initial_state))
    last = [0.0] * n
    t = 0.0
    next_sample = burn_in
    out: list[float] = []
    mean_gap = 1.0 / (beta_sup * n)
    block = 65536
    while len(out) < n_samples:
        gaps = g.exponential(mean_gap, size=block)
        ks = g.integers(n, size=block)
        labs = g.random(block)
        coins = g.random(block)
        for m_idx in range(block):
            t += gaps[m_idx]
            while next_sample <= t and len(out) < n_samples:
                val = float(
                    evolve_array(drifts[neuron], state[neuron], next_sample - last[neuron])
                )
                out.append(val)
                next_sample += spacing
            if len(out) >= n_samples:
                break
            k = int(ks[m_idx])
            xk = float(evolve_array(drifts[k], state[k], t - last[k]))
            state[k] = xk
            last[k] = t
            if labs[m_idx] < p_sure:
                accepted = True
            else:
                p = (float(rates[k].beta(xk)) - beta_star) / (beta_sup - beta_star)
                accepted = coins[m_idx] < p
            if accepted:
                for j, wkj in neighbor_w[k]:
                    state[j] = float(evolve_array(drifts[j], state[j], t - last[j])) + wkj
                    last[j] = t
                state[k] = model.reset_of(k).draw(g)
    return np.array(out)


# ---------------------------------------------------------------------------
# Export formats.


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text: time,neuron,label,accepted,reset_value,state_1..state_N."""
    n = len(traj.initial_state)
    header = "time,neuron,label,accepted,reset_value," + ",".join(
        f"state_{i + 1}" for i in range(n)
    )
    lines = [header]
    for ev, st in zip(traj.events, traj.states):
        reset = repr(ev.reset_value) if ev.reset_value is not None else ""
        row = [repr(ev.time), str(ev.neuron), ev.label, str(ev.accepted).lower(), reset]
        row.extend(repr(v) for v in st)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def trajectory_summary(traj: Trajectory) -> dict:
    """Event counts and empirical per-neuron rates."""
    n = len(traj.initial_state)
    duration = traj.duration
    return {
        "n_events": len(traj.events),
        "n_accepted": traj.accepted_count(),
        "n_sure": sum(1 for e in traj.events if e.label == "sure"),
        "duration": duration,
        "empirical_rates": [
            (traj.accepted_count(i) / duration if duration > 0 else 0.0)
            for i in range(n)
        ],
    }
