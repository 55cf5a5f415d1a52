"""Trace-driven discrete-event simulation of a server cluster.

One FCFS central queue feeds a fixed fleet of servers. Dispatch packs work
onto the lowest-indexed idle server; every sleep -> serving transition
passes through a setup period of exactly t_setup_s at setup power. The
provisioning policy is re-evaluated on a fixed decision epoch against the
trace's current rate; surplus servers are slept highest-index-first (after
an optional continuous-idle timeout) and deficits wake the lowest-indexed
sleeping servers. All randomness comes from one seeded generator, so equal
inputs reproduce results exactly.
"""

from __future__ import annotations

import math
from array import array
from collections import deque
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ContractViolationError, ValidationError
from .policies import (
    ALWAYSON,
    HYBRID,
    SOFTREACTIVE,
    PolicySpec,
    TierInput,
    hybrid_target,
    reactive_target,
)
from .workload import RequestTrace

SLEEP = "sleep"
SETUP = "setup"
IDLE = "idle"
BUSY = "busy"

_STATE_NAMES = (SLEEP, SETUP, IDLE, BUSY)
_SLEEP, _SETUP, _IDLE, _BUSY = range(4)

# Event priorities at equal timestamps: policy decisions first, then
# completions and setup exits free capacity, timers fire, new arrivals
# are admitted last, and the horizon closes after everything else.
_P_EPOCH, _P_COMPLETE, _P_SETUP_DONE, _P_TIMER, _P_ARRIVAL, _P_END = range(6)


@dataclass(frozen=True)
class ServerState:
    """Busy, Idle, Sleep, or Setup(remaining seconds)."""

    kind: str
    remaining: float = 0.0

    def __post_init__(self):
        if self.kind not in _STATE_NAMES:
            raise ValidationError(f"unknown server state {self.kind!r}")
        if self.kind == SETUP and not self.remaining > 0:
            raise ValidationError(f"setup remaining must be > 0, got {self.remaining}")
        if self.kind != SETUP and self.remaining:
            raise ValidationError(f"{self.kind} state carries no remaining time")


SLEEP_STATE = ServerState(SLEEP)
IDLE_STATE = ServerState(IDLE)
BUSY_STATE = ServerState(BUSY)


def setup_state(remaining: float) -> ServerState:
    return ServerState(SETUP, remaining)


@dataclass(frozen=True)
class Server:
    index: int
    state: ServerState


class Event(NamedTuple):
    """A state-machine input: dispatch/complete/sleep/wake/tick."""

    kind: str
    value: float = 0.0


DISPATCH = Event("dispatch")
COMPLETE = Event("complete")
SLEEP_COMMAND = Event("sleep_command")


def wake_command(t_setup_s: float) -> Event:
    return Event("wake_command", t_setup_s)


def tick(dt: float) -> Event:
    return Event("tick", dt)


def advance_server(server: Server, event: Event) -> Server:
    """Pure per-server state machine.

    dispatch requires Idle and complete requires Busy (anything else is a
    contract violation); sleep commands are ignored unless the server is
    Idle, wake commands are ignored unless it is asleep, and tick only
    counts down a setup period.
    """
    state = server.state
    kind = event.kind
    if kind == "dispatch":
        if state.kind != IDLE:
            raise ContractViolationError(f"dispatch to a {state.kind} server")
        return Server(server.index, BUSY_STATE)
    if kind == "complete":
        if state.kind != BUSY:
            raise ContractViolationError(f"complete on a {state.kind} server")
        return Server(server.index, IDLE_STATE)
    if kind == "sleep_command":
        if state.kind == IDLE:
            return Server(server.index, SLEEP_STATE)
        return server
    if kind == "wake_command":
        if state.kind == SLEEP:
            if event.value <= 0:
                raise ValidationError(f"t_setup must be > 0, got {event.value}")
            return Server(server.index, setup_state(event.value))
        return server
    if kind == "tick":
        if event.value < 0:
            raise ContractViolationError(f"tick dt must be >= 0, got {event.value}")
        if state.kind == SETUP:
            rem = state.remaining - event.value
            if rem <= 0:
                return Server(server.index, IDLE_STATE)
            return Server(server.index, setup_state(rem))
        return server
    raise ValidationError(f"unknown event kind {kind!r}")


def route_request(states: Sequence) -> int | None:
    """Packing dispatch: the lowest-indexed idle server, or None to queue."""
    for i, s in enumerate(states):
        kind = s.kind if hasattr(s, "kind") else s
        if kind == IDLE:
            return i
    return None


@dataclass(frozen=True)
class ServerPowerProfile:
    """Per-state power draw of one server.

    Idle draws idle_fraction * p_full_w; setup defaults to full power.
    """

    p_full_w: float = 200.0
    idle_fraction: float = 0.9
    p_sleep_w: float = 0.0
    p_setup_w: float | None = None

    def __post_init__(self):
        if self.p_full_w < 0:
            raise ValidationError(f"p_full_w must be >= 0, got {self.p_full_w}")
        if not 0 <= self.idle_fraction <= 1:
            raise ValidationError(
                f"idle_fraction must lie in [0, 1], got {self.idle_fraction}"
            )
        if not 0 <= self.p_sleep_w <= self.idle_fraction * self.p_full_w:
            raise ValidationError(
                "need 0 <= p_sleep_w <= idle_fraction * p_full_w, got "
                f"p_sleep_w={self.p_sleep_w}"
            )
        setup_w = self.setup_w
        if not self.p_sleep_w <= setup_w <= self.p_full_w:
            raise ValidationError(
                f"need p_sleep_w <= p_setup_w <= p_full_w, got p_setup_w={setup_w}"
            )

    @property
    def p_idle_w(self) -> float:
        return self.idle_fraction * self.p_full_w

    @property
    def setup_w(self) -> float:
        return self.p_full_w if self.p_setup_w is None else self.p_setup_w


@dataclass(frozen=True)
class ClusterConfig:
    """Fleet size, timing, and power parameters of the simulated cluster.

    idle_timeout_s is a fallback for SoftReactive specs built without one;
    the policy's own idle_timeout_s wins when set.
    """

    n_servers: int
    t_setup_s: float = 60.0
    service_rate: float = 60.0
    decision_epoch_s: float = 60.0
    idle_timeout_s: float = 0.0
    power: ServerPowerProfile = field(default_factory=ServerPowerProfile)

    def __post_init__(self):
        if self.n_servers < 1:
            raise ValidationError(f"n_servers must be >= 1, got {self.n_servers}")
        if self.t_setup_s <= 0:
            raise ValidationError(f"t_setup_s must be > 0, got {self.t_setup_s}")
        if self.service_rate <= 0:
            raise ValidationError(f"service_rate must be > 0, got {self.service_rate}")
        if self.decision_epoch_s <= 0:
            raise ValidationError(
                f"decision_epoch_s must be > 0, got {self.decision_epoch_s}"
            )
        if self.idle_timeout_s < 0:
            raise ValidationError(
                f"idle_timeout_s must be >= 0, got {self.idle_timeout_s}"
            )


class StateCounts(NamedTuple):
    busy: int
    idle: int
    setup: int
    sleep: int


@dataclass
class SimResult:
    """Outcome of one run: per-request latencies, energy, and timelines.

    power_times/power_watts hold the piecewise-constant power signal (a
    breakpoint per change); active_server_timeline samples state counts at
    decision epochs. transitions and request_events are populated only
    when the run records them.
    """

    policy: str
    duration_s: float
    arrived: int
    completed: int
    queued_at_end: int
    in_service_at_end: int
    energy_wh: float
    avg_power_w: float
    response_times: list[float]
    power_times: Sequence[float]
    power_watts: Sequence[float]
    active_server_timeline: list[tuple[float, StateCounts]]
    commands: list[tuple[float, str, int]]
    saturated: bool
    seed: int
    deterministic: bool
    transitions: list[tuple[float, int, str, str, str]] | None = None
    request_events: list[tuple[float, str, int]] | None = None

    @property
    def power_timeline(self) -> list[tuple[float, float]]:
        return list(zip(self.power_times, self.power_watts))


def _realize_arrivals(
    trace: RequestTrace, deterministic: bool, rng: np.random.Generator, mu: float
):
    """Arrival times and paired service demands for the whole horizon.

    Each one-second bucket of rate r contributes Poisson(r) arrivals at
    uniform offsets (an exact Poisson process), or exactly round(r) evenly
    spaced arrivals in deterministic mode. Service is exponential with
    mean 1/mu, or constant 1/mu when deterministic.
    """
    duration = trace.duration_s
    n_buckets = math.ceil(duration)
    sample_times = np.array([t for t, _ in trace.samples])
    sample_rates = np.array([r for _, r in trace.samples])
    idx = np.searchsorted(sample_times, np.arange(n_buckets), side="right") - 1
    rates = sample_rates[idx]
    if deterministic:
        counts = np.rint(rates).astype(np.int64)
        parts = [
            b + (np.arange(c) + 0.5) / c
            for b, c in enumerate(counts)
            if c > 0
        ]
        times = np.concatenate(parts) if parts else np.empty(0)
    else:
        counts = rng.poisson(rates)
        total = int(counts.sum())
        starts = np.repeat(np.arange(n_buckets, dtype=np.float64), counts)
        times = np.sort(starts + rng.random(total))
    times = times[times < duration]
    if deterministic:
        service = np.full(times.size, 1.0 / mu)
    else:
        service = rng.exponential(1.0 / mu, times.size)
    return times.tolist(), service.tolist()


def _policy_target(
    policy: PolicySpec, rate: float, queue_len: int, capacity: float
) -> int:
    if policy.kind == ALWAYSON:
        return policy.provisioned_count
    if policy.kind == HYBRID:
        front = TierInput(
            queued=float(queue_len),
            incoming=rate,
            t_sla_ms=policy.t_sla_ms,
            throughput_est_ms=policy.throughput_est_ms,
        )
        return hybrid_target((front, *policy.extra_tiers), rate, capacity)
    return reactive_target(rate, capacity)


def run_simulation(
    trace: RequestTrace,
    policy: PolicySpec,
    config: ClusterConfig,
    seed: int = 0,
    *,
    deterministic: bool = False,
    record_transitions: bool = False,
) -> SimResult:
    """Simulate the trace under one policy and return the full result.

    The cluster starts pre-provisioned for the trace's initial rate (no
    cold-start transient). Policy targets above n_servers are clamped and
    flagged in SimResult.saturated rather than raised.
    """
    rng = np.random.default_rng(seed)
    mu = config.service_rate
    n = config.n_servers
    duration = float(trace.duration_s)
    t_setup = config.t_setup_s
    capacity = config.service_rate
    if policy.kind == SOFTREACTIVE:
        timeout = (
            policy.idle_timeout_s
            if policy.idle_timeout_s is not None
            else config.idle_timeout_s
        )
    else:
        timeout = 0.0

    arr_times, service = _realize_arrivals(trace, deterministic, rng, mu)
    arr_n = len(arr_times)

    profile = config.power
    p_full = profile.p_full_w
    p_idle = profile.p_idle_w
    p_setup = profile.setup_w
    p_sleep = profile.p_sleep_w

    saturated = False
    raw0 = _policy_target(policy, trace.rate_at(0.0), 0, capacity)
    if raw0 > n:
        saturated = True
    cur_target = min(raw0, n)

    states = [_IDLE] * cur_target + [_SLEEP] * (n - cur_target)
    idle_since = [0.0] * n
    idle_heap = list(range(cur_target))
    nb, ni, ns, nsl = 0, cur_target, 0, n - cur_target

    power = nb * p_full + ni * p_idle + ns * p_setup + nsl * p_sleep
    tl_t = array("d", [0.0])
    tl_w = array("d", [power])
    energy_ws = 0.0
    last_t = 0.0

    queue: deque[int] = deque()
    responses: list[float] = []
    commands: list[tuple[float, str, int]] = []
    counts_timeline: list[tuple[float, StateCounts]] = []
    transitions: list[tuple[float, int, str, str, str]] | None = (
        [] if record_transitions else None
    )
    req_events: list[tuple[float, str, int]] | None = (
        [] if record_transitions else None
    )

    arrived = completed = 0
    heap: list[tuple] = []
    seq = 0
    for et in np.arange(0.0, duration, config.decision_epoch_s).tolist():
        heap.append((et, _P_EPOCH, seq, 0, 0.0))
        seq += 1
    heap.append((duration, _P_END, seq, 0, 0.0))
    seq += 1
    heap.sort()

    def sync_power(now: float) -> None:
        """Fold the current state counts into the power timeline."""
        nonlocal power
        p_new = nb * p_full + ni * p_idle + ns * p_setup + nsl * p_sleep
        if p_new != power:
            if tl_t[-1] == now:
                if len(tl_t) > 1 and tl_w[-2] == p_new:
                    tl_t.pop()
                    tl_w.pop()
                else:
                    tl_w[-1] = p_new
            else:
                tl_t.append(now)
                tl_w.append(p_new)
            power = p_new

    def adv(now: float) -> None:
        """Integrate energy at the current power up to now."""
        nonlocal energy_ws, last_t
        if now > last_t:
            energy_ws += power * (now - last_t)
            last_t = now

    def reconcile_sleep(now: float) -> None:
        """Sleep surplus idle servers, highest index first.

        Servers whose continuous idle time has not yet reached the timeout
        get a recheck scheduled at the moment it will.
        """
        nonlocal nb, ni, ns, nsl, seq
        for s2 in range(n - 1, -1, -1):
            if nb + ni + ns <= cur_target:
                break
            if states[s2] != _IDLE:
                continue
            due = idle_since[s2] + timeout
            if now >= due:
                states[s2] = _SLEEP
                ni -= 1
                nsl += 1
                commands.append((now, "sleep", s2))
                if transitions is not None:
                    transitions.append((now, s2, IDLE, SLEEP, "sleep_command"))
            else:
                heappush(heap, (due, _P_TIMER, seq, s2, 0.0))
                seq += 1
        sync_power(now)

    def run_epoch(now: float) -> None:
        nonlocal cur_target, saturated, nb, ni, ns, nsl, seq
        rate = trace.rate_at(now)
        raw = _policy_target(policy, rate, len(queue), capacity)
        if raw > n:
            saturated = True
        cur_target = min(raw, n)
        active = nb + ni + ns
        if active < cur_target:
            deficit = cur_target - active
            for s2 in range(n):
                if deficit == 0:
                    break
                if states[s2] == _SLEEP:
                    states[s2] = _SETUP
                    nsl -= 1
                    ns += 1
                    heappush(heap, (now + t_setup, _P_SETUP_DONE, seq, s2, 0.0))
                    seq += 1
                    commands.append((now, "wake", s2))
                    if transitions is not None:
                        transitions.append((now, s2, SLEEP, SETUP, "wake_command"))
                    deficit -= 1
            sync_power(now)
        elif active > cur_target:
            reconcile_sleep(now)
        if counts_timeline and counts_timeline[-1][0] == now:
            counts_timeline[-1] = (now, StateCounts(nb, ni, ns, nsl))
        else:
            counts_timeline.append((now, StateCounts(nb, ni, ns, nsl)))

    counts_timeline.append((0.0, StateCounts(nb, ni, ns, nsl)))

    ai = 0
    while True:
        head = heap[0]
        t_heap = head[0]
        if ai < arr_n and arr_times[ai] < t_heap:
            # arrival
            now = arr_times[ai]
            req = ai
            ai += 1
            arrived += 1
            if req_events is not None:
                req_events.append((now, "arrive", req))
            s = -1
            while idle_heap:
                c = idle_heap[0]
                if states[c] == _IDLE:
                    s = c
                    break
                heappop(idle_heap)
            if s >= 0:
                heappop(idle_heap)
                adv(now)
                states[s] = _BUSY
                ni -= 1
                nb += 1
                sync_power(now)
                heappush(heap, (now + service[req], _P_COMPLETE, seq, s, req))
                seq += 1
                if transitions is not None:
                    transitions.append((now, s, IDLE, BUSY, "dispatch"))
                    req_events.append((now, "dispatch", req))
            else:
                queue.append(req)
            continue

        heappop(heap)
        now, prio, _, s, payload = head

        if prio == _P_COMPLETE:
            adv(now)
            completed += 1
            responses.append((now - arr_times[payload]) * 1000.0)
            if req_events is not None:
                req_events.append((now, "complete", payload))
            if transitions is not None:
                transitions.append((now, s, BUSY, IDLE, "complete"))
            if nb + ni + ns > cur_target and timeout == 0.0:
                states[s] = _SLEEP
                nb -= 1
                nsl += 1
                sync_power(now)
                commands.append((now, "sleep", s))
                if transitions is not None:
                    transitions.append((now, s, IDLE, SLEEP, "sleep_command"))
            elif queue:
                req = queue.popleft()
                heappush(heap, (now + service[req], _P_COMPLETE, seq, s, req))
                seq += 1
                if transitions is not None:
                    transitions.append((now, s, IDLE, BUSY, "dispatch"))
                    req_events.append((now, "dispatch", req))
            else:
                states[s] = _IDLE
                nb -= 1
                ni += 1
                idle_since[s] = now
                heappush(idle_heap, s)
                sync_power(now)
                if timeout > 0.0 and nb + ni + ns > cur_target:
                    heappush(heap, (now + timeout, _P_TIMER, seq, s, 0.0))
                    seq += 1

        elif prio == _P_EPOCH:
            adv(now)
            run_epoch(now)

        elif prio == _P_SETUP_DONE:
            adv(now)
            states[s] = _IDLE
            ns -= 1
            ni += 1
            idle_since[s] = now
            if transitions is not None:
                transitions.append((now, s, SETUP, IDLE, "setup_done"))
            if nb + ni + ns > cur_target and timeout == 0.0:
                states[s] = _SLEEP
                ni -= 1
                nsl += 1
                sync_power(now)
                commands.append((now, "sleep", s))
                if transitions is not None:
                    transitions.append((now, s, IDLE, SLEEP, "sleep_command"))
            elif queue:
                req = queue.popleft()
                states[s] = _BUSY
                ni -= 1
                nb += 1
                sync_power(now)
                heappush(heap, (now + service[req], _P_COMPLETE, seq, s, req))
                seq += 1
                if transitions is not None:
                    transitions.append((now, s, IDLE, BUSY, "dispatch"))
                    req_events.append((now, "dispatch", req))
            else:
                sync_power(now)
                heappush(idle_heap, s)
                if timeout > 0.0 and nb + ni + ns > cur_target:
                    heappush(heap, (now + timeout, _P_TIMER, seq, s, 0.0))
                    seq += 1

        elif prio == _P_TIMER:
            adv(now)
            if nb + ni + ns > cur_target:
                reconcile_sleep(now)

        else:  # _P_END
            adv(duration)
            break

    if counts_timeline[-1][0] != duration:
        counts_timeline.append((duration, StateCounts(nb, ni, ns, nsl)))

    return SimResult(
        policy=policy.label,
        duration_s=duration,
        arrived=arrived,
        completed=completed,
        queued_at_end=len(queue),
        in_service_at_end=nb,
        energy_wh=energy_ws / 3600.0,
        avg_power_w=energy_ws / duration,
        response_times=responses,
        power_times=tl_t,
        power_watts=tl_w,
        active_server_timeline=counts_timeline,
        commands=commands,
        saturated=saturated,
        seed=seed,
        deterministic=deterministic,
        transitions=transitions,
        request_events=req_events,
    )
