"""Perfect simulation of the stationary state on the integer lattice.

Each neuron carries two independent Poisson streams into the past: sure
events at intensity beta_star (spikes that fire regardless of state) and
possible events at intensity beta_sup - beta_star (spikes whose
acceptance depends on the state). The backward procedure explores these
streams in increasing depth, growing the clan of ancestors of the target
neuron: a possible event of a non-member in-neighbor adds it, a sure
event of a member removes it (the member's state is freshly drawn there,
erasing deeper history). Once the clan dies out, the forward procedure
replays the recorded events in chronological order, resolving each
possible event with an acceptance coin at the now-known state, and
returns the target neuron's state at time zero — an exact draw from the
stationary law.

Depths are stored as positive distances into the past; the forward
replay walks depths in decreasing order.
"""

from __future__ import annotations

import bisect
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng
from .errors import (
    CapExceededError,
    ConfigError,
    DomainError,
    ExcessiveCapFailuresError,
    UnresolvedDependencyError,
)
from .flow import FlowContext, evolve_array
from .model import NearestNeighborZWeights, NetworkModel, require_valid

SURE = "sure"
POSSIBLE = "possible"

_KIND_ID = {SURE: rng.KIND_SURE, POSSIBLE: rng.KIND_POSSIBLE}

DEFAULT_CAP = 10**6


# ---------------------------------------------------------------------------
# Lazy backward Poisson streams.


class EventStream:
    """Ordered event depths of one (neuron, kind) stream, extended on
    demand. Regenerating the stream from the same key reproduces every
    previously served event."""

    __slots__ = ("intensity", "_rng", "_events")

    def __init__(self, seed: int, sample_index: int, neuron: int, kind: str, intensity: float):
        self.intensity = intensity
        self._rng = rng.substream(
            seed, rng.BACKWARD, sample_index, rng.zigzag(neuron), _KIND_ID[kind]
        )
        self._events: list[float] = []

    def _extend_past(self, depth: float):
        last = self._events[-1] if self._events else 0.0
        while last <= depth:
            block = self._rng.exponential(1.0 / self.intensity, size=32)
            for gap in block:
                last += gap
                self._events.append(last)
            last = self._events[-1]

    def first_after(self, depth: float) -> tuple[float, int]:
        """(depth, ordinal) of the first event strictly deeper than depth."""
        if self.intensity <= 0.0:
            return math.inf, -1
        self._extend_past(depth)
        idx = bisect.bisect_right(self._events, depth)
        while idx >= len(self._events):
            self._extend_past(self._events[-1])
            idx = bisect.bisect_right(self._events, depth)
        return self._events[idx], idx


class StreamStore:
    """Keyed store materializing neuron streams on demand; memory stays
    bounded by the clan's spatial extent."""

    def __init__(self, seed: int, sample_index: int, beta_star: float, beta_extra: float):
        self.seed = seed
        self.sample_index = sample_index
        self.intensity = {SURE: beta_star, POSSIBLE: beta_extra}
        self._streams: dict[tuple[int, str], EventStream] = {}

    def get(self, neuron: int, kind: str) -> EventStream:
        key = (neuron, kind)
        if key not in self._streams:
            self._streams[key] = EventStream(
                self.seed, self.sample_index, neuron, kind, self.intensity[kind]
            )
        return self._streams[key]


# ---------------------------------------------------------------------------
# Backward clan exploration.


@dataclass(frozen=True)
class HistoryEvent:
    depth: float
    neuron: int
    kind: str  # "sure" | "possible"
    was_member: bool
    change: str  # "added" | "removed" | "none"
    ordinal: int  # index within its (neuron, kind) stream
    members_after: tuple[int, ...]


@dataclass(frozen=True)
class ClanState:
    root: int
    members: tuple[int, ...]
    history: tuple[HistoryEvent, ...]
    stop_depth: Optional[float]
    step_count: int
    size_trajectory: tuple[int, ...]

    @property
    def stopped(self) -> bool:
        return self.stop_depth is not None

    @property
    def max_size(self) -> int:
        return max(self.size_trajectory)


@dataclass(frozen=True)
class StationarySample:
    neuron: int
    value: float
    events_processed: int
    clan_max_size: int


@dataclass(frozen=True)
class SampleSet:
    neuron: int
    values: np.ndarray
    records: tuple[StationarySample, ...]
    sample_indices: tuple[int, ...]  # aligned with records
    failures: int
    seed: int
    cap: int


def _check_lattice(model: NetworkModel):
    require_valid(model)
    if not model.lattice:
        raise ConfigError("perfect simulation needs a lattice model")
    if not isinstance(model.weights, NearestNeighborZWeights):
        raise ConfigError("perfect simulation needs nearest-neighbor weights on Z")


def backward_clan(
    model: NetworkModel,
    i: int,
    seed: int,
    cap: int = DEFAULT_CAP,
    sample_index: int = 0,
) -> ClanState:
    """Explore the clan of ancestors of neuron i into the past.

    Scans sure and possible events of every member and of every
    in-neighbor of a member, in increasing depth, until the clan empties
    or the cap is exceeded.
    """
    _check_lattice(model)
    if cap < 1:
        raise ConfigError("cap must be >= 1")
    beta_star, beta_sup = model.global_rate_bounds()
    store = StreamStore(seed, sample_index, beta_star, beta_sup - beta_star)

    members = {i}
    depth = 0.0
    history: list[HistoryEvent] = []
    sizes = [1]

    while members:
        if len(history) >= cap:
            raise CapExceededError(cap, sizes)
        boundary = {j for m in members for j in (m - 1, m + 1)} - members
        best_depth, best = math.inf, None
        for j in sorted(members | boundary):
            for kind in (SURE, POSSIBLE):
                d, ordinal = store.get(j, kind).first_after(depth)
                if d < best_depth:
                    best_depth, best = d, (j, kind, ordinal)
        j, kind, ordinal = best
        was_member = j in members
        if kind == POSSIBLE and not was_member:
            members.add(j)
            change = "added"
        elif kind == SURE and was_member:
            members.remove(j)
            change = "removed"
        else:
            change = "none"
        history.append(
            HistoryEvent(
                best_depth, j, kind, was_member, change, ordinal, tuple(sorted(members))
            )
        )
        sizes.append(len(members))
        depth = best_depth

    return ClanState(
        root=i,
        members=(),
        history=tuple(history),
        stop_depth=depth,
        step_count=len(history),
        size_trajectory=tuple(sizes),
    )


# ---------------------------------------------------------------------------
# Forward filling.


def _event_rng(seed: int, sample_index: int, ev: HistoryEvent) -> np.random.Generator:
    # keyed by the event's own stream position so exploration order
    # cannot perturb the draws
    return rng.substream(
        seed,
        rng.FORWARD,
        sample_index,
        rng.zigzag(ev.neuron),
        _KIND_ID[ev.kind],
        ev.ordinal,
    )


def forward_fill(
    model: NetworkModel,
    clan: ClanState,
    seed: int,
    sample_index: int = 0,
) -> StationarySample:
    """Replay the clan history in chronological order and return the root
    neuron's state at time zero."""
    _check_lattice(model)
    if not clan.stopped:
        raise ConfigError("forward_fill needs a completed backward exploration")
    beta_star, beta_sup = model.global_rate_bounds()
    extra = beta_sup - beta_star
    ctx = FlowContext(model.drift_of(0), model.rate_of(0))
    reset = model.reset_of(0)
    w = model.weights.w

    # neuron -> [value, depth at which the value holds]
    determined: dict[int, list[float]] = {}

    def flow_to(j: int, d: float) -> float:
        value, at = determined[j]
        return float(evolve_array(ctx.drift, value, at - d))

    def inhibit(spiker: int, targets, d: float):
        for l in targets:
            if l == spiker:
                continue
            if l not in determined:
                raise UnresolvedDependencyError(
                    f"member {l} undetermined at depth {d}"
                )
            determined[l] = [flow_to(l, d) + w, d]

    for ev in reversed(clan.history):
        d = ev.depth
        neighbors_in_clan = [
            l for l in (ev.neuron - 1, ev.neuron + 1) if l in ev.members_after
        ]
        if ev.kind == SURE:
            # a sure spike always fires: inhibit adjacent members, and a
            # member spiker restarts from a fresh reset draw
            inhibit(ev.neuron, neighbors_in_clan, d)
            if ev.was_member:
                g = _event_rng(seed, sample_index, ev)
                determined[ev.neuron] = [reset.draw(g), d]
        else:
            # a possible spike fires with the state-dependent residual
            # probability; the deciding state is known because the
            # neuron's deeper history was replayed first
            if ev.neuron not in determined:
                raise UnresolvedDependencyError(
                    f"possible event of undetermined neuron {ev.neuron} at depth {d}"
                )
            g = _event_rng(seed, sample_index, ev)
            coin = g.random()
            x = flow_to(ev.neuron, d)
            p = (float(ctx.rate.beta(x)) - beta_star) / extra if extra > 0 else 0.0
            if coin < p:
                inhibit(ev.neuron, neighbors_in_clan, d)
                determined[ev.neuron] = [reset.draw(g), d]
            else:
                determined[ev.neuron] = [x, d]
            if ev.change == "added":
                # the neuron leaves the clan going forward; its state is
                # no longer needed
                del determined[ev.neuron]

    if clan.root not in determined:
        raise UnresolvedDependencyError("root state never determined")
    return StationarySample(
        neuron=clan.root,
        value=flow_to(clan.root, 0.0),
        events_processed=clan.step_count,
        clan_max_size=clan.max_size,
    )


# ---------------------------------------------------------------------------
# Sampling pipelines.


def _one_sample(args) -> Optional[StationarySample]:
    model, i, seed, cap, sample_index = args
    try:
        clan = backward_clan(model, i, seed, cap=cap, sample_index=sample_index)
    except CapExceededError:
        return None
    return forward_fill(model, clan, seed, sample_index=sample_index)


def _worker_count() -> int:
    env = os.environ.get("INHIBNET_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def draw_stationary(
    model: NetworkModel,
    i: int,
    n_samples: int,
    seed: int,
    cap: int = DEFAULT_CAP,
    workers: Optional[int] = None,
) -> SampleSet:
    """n_samples independent backward+forward pipelines.

    Cap failures are counted, not dropped silently; more than 1% of them
    aborts the run with a subcriticality warning.
    """
    _check_lattice(model)
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    if workers is None:
        workers = _worker_count()
    tolerated = int(0.01 * n_samples)
    jobs = [(model, i, seed, cap, s) for s in range(n_samples)]
    results: list[Optional[StationarySample]] = [None] * n_samples
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, res in enumerate(pool.map(_one_sample, jobs, chunksize=64)):
                results[idx] = res
        failures = sum(1 for r in results if r is None)
        if failures > tolerated:
            raise ExcessiveCapFailuresError(failures, n_samples, cap)
    else:
        failures = 0
        for idx, job in enumerate(jobs):
            res = _one_sample(job)
            results[idx] = res
            if res is None:
                failures += 1
                if failures > tolerated:
                    raise ExcessiveCapFailuresError(failures, n_samples, cap)
    records = tuple(r for r in results if r is not None)
    return SampleSet(
        neuron=i,
        values=np.array([r.value for r in records]),
        records=records,
        sample_indices=tuple(s for s, r in enumerate(results) if r is not None),
        failures=failures,
        seed=seed,
        cap=cap,
    )


def sample_csv(samples: SampleSet) -> str:
    """CSV text: sample,value,events_processed,clan_max_size,status.

    Cap failures keep their row with empty numeric fields so sample
    indices stay aligned with the seeds that produced them.
    """
    by_index = dict(zip(samples.sample_indices, samples.records))
    n_total = len(samples.records) + samples.failures
    lines = ["sample,value,events_processed,clan_max_size,status"]
    for s in range(n_total):
        rec = by_index.get(s)
        if rec is None:
            lines.append(f"{s},,,,cap_exceeded")
        else:
            lines.append(
                f"{s},{rec.value!r},{rec.events_processed},{rec.clan_max_size},ok"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcriticality diagnostics.


def delta_from_bounds(beta_star: float, beta_sup: float) -> float:
    """Sure-to-extra-rate ratio; inf in the degenerate equal-bounds case
    (no possible jumps, trivially subcritical)."""
    if beta_sup < beta_star:
        raise ConfigError("beta_sup must be >= beta_star")
    if beta_sup == beta_star:
        return math.inf
    return beta_star / (beta_sup - beta_star)


def delta(model: NetworkModel) -> float:
    beta_star, beta_sup = model.global_rate_bounds()
    return delta_from_bounds(beta_star, beta_sup)


@dataclass(frozen=True)
class BranchingReport:
    b: tuple[float, ...]  # per neuron: incoming rate spread sum
    d: tuple[float, ...]  # per neuron: minimal spiking rate
    verdict: str  # "subcritical" | "inconclusive"
    delta: float
    extinction_probability: float


def branching_domination_check(model: NetworkModel) -> BranchingReport:
    """Compare the clan's growth pressure against its death rate.

    b_j sums the rate spread (sup beta - inf beta) of the in-neighbors of
    j; b_j < d_j = inf beta_j for all j certifies almost-sure extinction.
    Also reports the extinction probability of the dominating birth-death
    process started from one individual."""
    require_valid(model)
    if model.lattice:
        k = 2 if model.weights.w > 0 else 0
        lo, hi = model.global_rate_bounds()
        b = (k * (hi - lo),)
        d = (lo,)
    else:
        from .model import in_neighbors, rate_bounds

        b = tuple(
            sum(
                rate_bounds(model.rate_of(k))[1] - rate_bounds(model.rate_of(k))[0]
                for k in in_neighbors(model, j)
            )
            for j in range(model.n)
        )
        d = tuple(rate_bounds(model.rate_of(j))[0] for j in range(model.n))
    verdict = "subcritical" if all(bj < dj for bj, dj in zip(b, d)) else "inconclusive"
    dlt = delta(model)
    extinction = 1.0 if dlt >= 1.0 else dlt
    return BranchingReport(b=b, d=d, verdict=verdict, delta=dlt, extinction_probability=extinction)


def contour_bound(delta_value: float) -> float:
    """Series bound on the clan-finiteness probability from counting
    direction-triplet contours; valid for 0 < delta < 1/256 (the bound's
    geometric tail has its pole at 16 * sqrt(delta) = 1)."""
    if not 0.0 < delta_value < 1.0 / 256.0:
        raise DomainError(
            f"contour bound needs 0 < delta < 1/256, got {delta_value}"
        )
    root = 16.0 * math.sqrt(delta_value)
    return delta_value + 4.0 * delta_value**2 + root**3 / (1.0 - root)


def dominating_chain_trajectory(model: NetworkModel, n_steps: int, seed: int) -> np.ndarray:
    """Jump-chain trajectory of the birth-death process that dominates
    the clan size: up with probability b/(b+d), down with d/(b+d),
    absorbed at zero, started from one individual."""
    report = branching_domination_check(model)
    b, d = report.b[0], report.d[0]
    g = rng.substream(seed, rng.DOMINATING)
    sizes = np.empty(n_steps + 1, dtype=int)
    z = 1
    sizes[0] = z
    p_up = b / (b + d) if (b + d) > 0 else 0.0
    for k in range(1, n_steps + 1):
        if z > 0:
            z += 1 if g.random() < p_up else -1
        sizes[k] = z
    return sizes


def clan_sizes_at_steps(clan: ClanState, n_steps: int) -> np.ndarray:
    """Clan size after each of the first n_steps membership changes
    (0 once stopped).

    Scanned events that leave the membership unchanged do not count as
    steps; the dominating chain moves at every step, so the comparison
    is between the two embedded jump chains."""
    sizes = np.zeros(n_steps + 1, dtype=int)
    sizes[0] = 1
    k = 0
    for ev in clan.history:
        if ev.change == "none":
            continue
        k += 1
        if k > n_steps:
            break
        sizes[k] = len(ev.members_after)
    return sizes
