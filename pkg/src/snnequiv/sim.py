"""Discrete-time simulator with threshold-ladder spiking.

Each neuron integrates a reset-free membrane

    v(t) = leak * v(t - 1) + I(t),    v(-1) = 0,

where I(t) sums the weights of spikes arriving at step t (a spike emitted at
step s over a synapse with delay d arrives at s + d). A neuron with
threshold multiplier k that has spiked c times emits another spike while
v(t) >= (c + 1) * k * threshold_base, so several spikes may share a step.
A spike therefore acts as a permanent offset of one threshold and never
changes v itself. Single-spike neurons stop after their first spike.

Arithmetic is exact. Parameters are read as rationals (see ``core.exact``)
and the membrane is carried as the integer ``v * q**t * D``, with q the
leak denominator and D a common denominator of weights and thresholds.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    DomainError,
    InvalidNetwork,
    NetworkSpec,
    SpikeBudgetExceeded,
    SpikeTrain,
    exact,
    parse_input_ref,
    update_order,
    validate_network,
)

__all__ = ["SimResult", "simulate", "simulate_decaying_reset", "write_traces"]


@dataclass(frozen=True)
class SimResult:
    """Outcome of one run, keyed by neuron id in declaration order.

    ``crossings[n]`` is the number of ladder rungs the raw membrane of ``n``
    reached during the run. It equals the spike count for multi-spike
    neurons and is what a single-spike neuron *would* have emitted without
    its limit. ``traces`` holds exact membrane values, one per step.
    """

    outputs: dict
    spike_counts: dict
    crossings: dict
    traces: Optional[dict] = None

    def trains(self, ids: Sequence[str]) -> list[SpikeTrain]:
        return [self.outputs[i] for i in ids]

    def output_trains(self, net: NetworkSpec) -> list[SpikeTrain]:
        return self.trains(net.output_neurons)


class _Prepared:
    """Integer-scaled view of a validated network."""

    def __init__(self, net: NetworkSpec):
        self.net = net
        self.order = update_order(net)
        neurons = net.neurons
        self.index = {n.id: i for i, n in enumerate(neurons)}
        weights = [exact(s.weight) for s in net.synapses]
        thetas = [exact(n.threshold_base) for n in neurons]
        leaks = [exact(n.leak) for n in neurons]
        D = 1
        for x in weights + thetas:
            D = D * x.denominator // math.gcd(D, x.denominator)
        self.D = D
        self.p = [lk.numerator for lk in leaks]
        self.q = [lk.denominator for lk in leaks]
        # one threshold rung in units of D (before the q**t scaling)
        self.rung = [int(th * D) * n.threshold_multiplier for th, n in zip(thetas, neurons)]
        self.budget = [n.budget for n in neurons]
        self.position = {i: pos for pos, i in enumerate(self.order)}

        self.fanout: list[list[tuple[int, int, int]]] = [[] for _ in neurons]
        self.from_inputs: list[list[tuple[int, int, int]]] = [[] for _ in range(net.d_in)]
        for s, w in zip(net.synapses, weights):
            wd = int(w * D)
            post = self.index[s.post]
            ch = parse_input_ref(s.pre)
            if ch is not None:
                self.from_inputs[ch].append((post, wd, s.delay))
            else:
                self.fanout[self.index[s.pre]].append((post, wd, s.delay))

        H = net.horizon
        self._powers: dict[int, list[int]] = {}
        self.qpow = [self._table(q, H) for q in self.q]
        self.ppow = [self._table(p, H) for p in self.p]

    def _table(self, base: int, H: int) -> list[int]:
        if base not in self._powers:
            tab = [1] * (H + 2)
            for t in range(1, H + 2):
                tab[t] = tab[t - 1] * base
            self._powers[base] = tab
        return self._powers[base]


def _check_inputs(net: NetworkSpec, inputs) -> list[SpikeTrain]:
    if len(inputs) != net.d_in:
        raise DomainError(f"expected {net.d_in} input trains, got {len(inputs)}")
    trains = [t if isinstance(t, SpikeTrain) else SpikeTrain(t) for t in inputs]
    for c, t in enumerate(trains):
        if not t.within(net.horizon):
            raise DomainError(f"input channel {c} spikes after the horizon {net.horizon}")
    return trains


def _admit(net, i, t, budget, have, want, enforce) -> int:
    """Spikes neuron ``i`` may emit to go from ``have`` to ``want`` spikes."""
    if budget is None:
        return 1 if have == 0 else 0
    if want > budget:
        if enforce:
            raise SpikeBudgetExceeded(net.neurons[i].id, t, budget)
        want = budget
    return max(0, want - have)


def _run(net, inputs, *, record_traces, decaying_all, enforce_budget, spiking, check):
    if check:
        result = validate_network(net)
        if not result.ok:
            raise InvalidNetwork(result.violations)
    trains = _check_inputs(net, inputs)
    prep = _Prepared(net)
    H = net.horizon
    n = len(net.neurons)
    decaying = [decaying_all or nr.reset == "decaying" for nr in net.neurons]

    arrivals: list[dict[int, int]] = [dict() for _ in range(H + 1)]
    for c, train in enumerate(trains):
        for post, wd, d in prep.from_inputs[c]:
            for s in train:
                t = s + d
                if t <= H:
                    slot = arrivals[t]
                    slot[post] = slot.get(post, 0) + wd

    S = [0] * n            # scaled membrane as of step last[i]
    last = [-1] * n
    count = [0] * n
    reached = [0] * n
    spikes: list[list[int]] = [[] for _ in range(n)]
    log: list[list[tuple[int, int]]] = [[] for _ in range(n)] if record_traces else []

    position = prep.position
    order = prep.order
    for t in range(H + 1):
        slot = arrivals[t]
        if not slot:
            continue
        heap = [position[i] for i in slot]
        heapq.heapify(heap)
        while heap:
            i = order[heapq.heappop(heap)]
            gap = t - last[i]
            s = prep.ppow[i][gap] * S[i] if S[i] else 0
            s += prep.qpow[i][t] * slot[i]
            last[i] = t
            unit = prep.rung[i] * prep.qpow[i][t]
            budget = prep.budget[i]
            emitted = 0
            if decaying[i]:
                k = s // unit if s >= unit else 0
                if k and spiking:
                    emitted = _admit(net, i, t, budget, count[i], count[i] + k, enforce_budget)
                    s -= emitted * unit
                reached[i] = count[i] + emitted
            else:
                rungs = s // unit if s >= unit else 0
                if rungs > reached[i]:
                    reached[i] = rungs
                if spiking and rungs > count[i]:
                    emitted = _admit(net, i, t, budget, count[i], rungs, enforce_budget)
            S[i] = s
            if record_traces:
                log[i].append((t, s))
            if emitted:
                count[i] += emitted
                spikes[i].extend([t] * emitted)
                for post, wd, d in prep.fanout[i]:
                    ta = t + d
                    if ta > H:
                        continue
                    target = arrivals[ta]
                    if ta == t and post not in target:
                        heapq.heappush(heap, position[post])
                    target[post] = target.get(post, 0) + wd * emitted

    ids = [nr.id for nr in net.neurons]
    traces = None
    if record_traces:
        traces = {}
        for i, nid in enumerate(ids):
            traces[nid] = _dense_trace(log[i], prep.p[i], prep.q[i], prep.D, H)
    return SimResult(
        outputs={nid: SpikeTrain(spikes[i]) for i, nid in enumerate(ids)},
        spike_counts={nid: count[i] for i, nid in enumerate(ids)},
        crossings={nid: reached[i] for i, nid in enumerate(ids)},
        traces=traces,
    )


def _dense_trace(events, p, q, D, H) -> tuple[Fraction, ...]:
    leak = Fraction(p, q)
    out = []
    v = Fraction(0)
    it = iter(events)
    nxt = next(it, None)
    for t in range(H + 1):
        if nxt is not None and nxt[0] == t:
            v = Fraction(nxt[1], q ** t * D)
            nxt = next(it, None)
        elif t:
            v = v * leak
        out.append(v)
    return tuple(out)


def simulate(net: NetworkSpec, inputs, record_traces: bool = False, *,
             enforce_budget: bool = True, spiking: bool = True,
             check: bool = True) -> SimResult:
    """Run ``net`` on ``inputs`` (one train per input channel).

    Raises ``SpikeBudgetExceeded`` when a multi-spike neuron would emit more
    spikes than its budget, unless ``enforce_budget`` is false, in which case
    the neuron is silenced at its budget. ``spiking=False`` suppresses all
    emissions, leaving only the driven membranes.
    """
    return _run(net, inputs, record_traces=record_traces, decaying_all=False,
                enforce_budget=enforce_budget, spiking=spiking, check=check)


def simulate_decaying_reset(net: NetworkSpec, inputs, record_traces: bool = False, *,
                            enforce_budget: bool = True, check: bool = True) -> SimResult:
    """Run ``net`` with the reset applied to the membrane state itself.

    Every spike subtracts the effective threshold from the membrane, and that
    subtraction then leaks away like any other input. With leak 1 this is the
    same as ``simulate``; with leak < 1 later spikes come earlier. Traces hold
    the post-reset membrane.
    """
    return _run(net, inputs, record_traces=record_traces, decaying_all=True,
                enforce_budget=enforce_budget, spiking=True, check=check)


def write_traces(result: SimResult, path) -> None:
    """Export traces as CSV rows ``step,neuron_id,v,spiked_count_this_step``."""
    import csv

    if result.traces is None:
        raise ValueError("simulation was run without record_traces")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "neuron_id", "v", "spiked_count_this_step"])
        for nid, trace in result.traces.items():
            per_step: dict[int, int] = {}
            for s in result.outputs[nid]:
                per_step[s] = per_step.get(s, 0) + 1
            for t, v in enumerate(trace):
                w.writerow([t, nid, repr(float(v)), per_step.get(t, 0)])
