"""Network passes between multi-spike and single-spike neurons.

``multi_to_single`` splits every multi-spike neuron with budget N into N
single-spike replicas whose thresholds climb the original's ladder; the
``merge_adapter`` decoder reassembles the spike train from the replicas.

``single_to_multi`` turns every single-spike neuron into a population of
multi-spike neurons, one per square-free index j <= N, with threshold
multiplier j and output weights scaled by the Möbius factor of j. At every
ladder crossing n the factors of the neurons that fire sum to 1 if n = 1 and
to 0 otherwise, so downstream neurons only ever feel the first spike.
``first_spike_filter`` is the matching output decoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

from .core import (
    InvalidNetwork,
    Multi,
    NetworkSpec,
    NeuronSpec,
    Single,
    SpikeTrain,
    Synapse,
    UnsupportedModel,
    append_trains,
    parse_input_ref,
    validate_network,
)
from .ntheory import mobius_alpha

__all__ = [
    "PassOutput",
    "multi_to_single",
    "single_to_multi",
    "merge_adapter",
    "first_spike_filter",
    "decode_outputs",
]


@dataclass(frozen=True)
class PassOutput:
    """A transformed network plus what is needed to read it back.

    ``output_groups`` lists, per original output, the transformed neurons
    that stand for it: all replicas in ladder order for ``m2s``, the
    designated j = 1 population member for ``s2m``.
    """

    direction: str
    network: NetworkSpec
    neuron_map: dict
    output_groups: tuple[tuple[str, ...], ...]
    ns: Optional[int] = None
    alpha: tuple[int, ...] = field(default=())

    @property
    def first_spike(self) -> bool:
        return self.direction == "s2m"

    def decode(self, result) -> list[SpikeTrain]:
        return decode_outputs(self.network, result, first_spike=self.first_spike)

    def sidecar(self) -> dict:
        return {
            "direction": self.direction,
            "ns": self.ns,
            "alpha": list(self.alpha),
            "decoder": "first-spike" if self.first_spike else "merge",
            "neuron_map": {k: list(v) for k, v in self.neuron_map.items()},
            "output_groups": [list(g) for g in self.output_groups],
        }


def _require_valid(net: NetworkSpec) -> None:
    res = validate_network(net)
    if not res.ok:
        raise InvalidNetwork(res.violations)


def _rewire(net, mapping, out_scale) -> list[Synapse]:
    """Copy every synapse onto all replacements of its endpoints.

    ``out_scale[id]`` gives one weight factor per replacement of a
    presynaptic neuron; absent ids use factor 1 on each replacement.
    """
    syns = []
    for s in net.synapses:
        if parse_input_ref(s.pre) is not None:
            pres = [(s.pre, 1)]
        else:
            factors = out_scale.get(s.pre)
            reps = mapping[s.pre]
            pres = list(zip(reps, factors)) if factors else [(r, 1) for r in reps]
        for pre, a in pres:
            w = s.weight if a == 1 else (0.0 if a == 0 else s.weight * a)
            for post in mapping[s.post]:
                syns.append(Synapse(pre, post, w, s.delay))
    return syns


def _regroup(net, mapping, pick) -> tuple[list[str], list[tuple[str, ...]]]:
    groups = net.output_groups if net.output_groups is not None else [(o,) for o in net.output_neurons]
    new_groups = [tuple(r for m in g for r in pick(mapping[m])) for g in groups]
    return [r for g in new_groups for r in g], new_groups


def multi_to_single(net: NetworkSpec) -> PassOutput:
    """Replace each multi-spike neuron by single-spike threshold replicas.

    Replica k of a neuron with budget N and multiplier m gets multiplier k*m
    and the same leak, threshold base, incoming and outgoing synapses.
    Single-spike neurons pass through unchanged.
    """
    _require_valid(net)
    bad = [n.id for n in net.neurons if n.reset != "offset"]
    if bad:
        raise UnsupportedModel(f"replica expansion needs offset reset; decaying reset on {bad}")

    neurons, mapping = [], {}
    for n in net.neurons:
        if n.is_single:
            neurons.append(n)
            mapping[n.id] = (n.id,)
            continue
        reps = []
        for k in range(1, n.budget + 1):
            rid = f"{n.id}.r{k}"
            neurons.append(NeuronSpec(
                id=rid, layer=n.layer, threshold_base=n.threshold_base,
                threshold_multiplier=k * n.threshold_multiplier, leak=n.leak,
                spike_limit=Single(), reset=n.reset))
            reps.append(rid)
        mapping[n.id] = tuple(reps)

    outputs, groups = _regroup(net, mapping, lambda reps: reps)
    new = NetworkSpec(
        d_in=net.d_in, d_out=net.d_out, neurons=neurons,
        synapses=_rewire(net, mapping, {}), output_neurons=outputs,
        B=net.B, dt=net.dt, horizon=net.horizon, output_groups=groups,
    )
    _require_valid(new)
    return PassOutput("m2s", new, mapping, tuple(groups))


def single_to_multi(net: NetworkSpec, ns: int, prune: bool = True) -> PassOutput:
    """Replace each single-spike neuron by a Möbius-weighted population.

    Population member j gets budget ``ns``, multiplier j times the original,
    and outgoing weights multiplied by mu(j). With ``prune`` (the default)
    members with mu(j) = 0 are left out, giving eta(ns) members; without it
    all ns members are emitted and the zero-factor ones get weight 0.
    Multi-spike neurons pass through unchanged.
    """
    if not isinstance(ns, int) or ns < 1:
        raise ValueError(f"spike budget must be a positive integer, got {ns!r}")
    _require_valid(net)
    alpha = mobius_alpha(ns).values
    members = [j for j in range(1, ns + 1) if alpha[j - 1] or not prune]

    neurons, mapping, scale = [], {}, {}
    for n in net.neurons:
        if not n.is_single:
            neurons.append(n)
            mapping[n.id] = (n.id,)
            continue
        pop = []
        for j in members:
            pid = f"{n.id}.p{j}"
            neurons.append(NeuronSpec(
                id=pid, layer=n.layer, threshold_base=n.threshold_base,
                threshold_multiplier=j * n.threshold_multiplier, leak=n.leak,
                spike_limit=Multi(ns), reset=n.reset))
            pop.append(pid)
        mapping[n.id] = tuple(pop)
        scale[n.id] = [alpha[j - 1] for j in members]

    # only the j = 1 member of an output population is read out
    outputs, groups = _regroup(net, mapping, lambda pop: pop[:1])
    new = NetworkSpec(
        d_in=net.d_in, d_out=net.d_out, neurons=neurons,
        synapses=_rewire(net, mapping, scale), output_neurons=outputs,
        B=net.B, dt=net.dt, horizon=net.horizon,
        output_groups=groups if net.output_groups is not None else None,
    )
    _require_valid(new)
    return PassOutput("s2m", new, mapping, tuple(groups), ns=ns, alpha=tuple(alpha))


def merge_adapter(groups: Sequence[Sequence[Sequence[int]]]) -> list[SpikeTrain]:
    """Append the replica trains of each group, in order."""
    return [reduce(append_trains, g, SpikeTrain()) for g in groups]


def first_spike_filter(trains: Sequence[Sequence[int]]) -> list[SpikeTrain]:
    return [SpikeTrain(t[:1]) for t in trains]


def decode_outputs(net: NetworkSpec, result, first_spike: bool = False) -> list[SpikeTrain]:
    """Output trains of ``net`` read through its grouping, one per output."""
    trains = result.trains(net.output_neurons)
    if first_spike:
        trains = first_spike_filter(trains)
    if net.output_groups is None:
        return list(trains)
    by_id = dict(zip(net.output_neurons, trains))
    return merge_adapter([[by_id[i] for i in g] for g in net.output_groups])
