"""Domain types for spike trains and layered spiking networks.

Spike times are integer step indices; physical time is ``step * dt``.
Input channels are virtual sources referenced as ``"in:<index>"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral, Real
from typing import Iterable, Optional, Sequence, Union

__all__ = [
    "SNNError",
    "OrderViolation",
    "InvalidNetwork",
    "SpikeBudgetExceeded",
    "UnsupportedModel",
    "DomainError",
    "ShapeMismatch",
    "SpikeTrain",
    "Single",
    "Multi",
    "SpikeLimit",
    "NeuronSpec",
    "Synapse",
    "NetworkSpec",
    "Violation",
    "ValidationResult",
    "input_ref",
    "parse_input_ref",
    "exact",
    "validate_network",
    "append_trains",
    "min_spike_time",
    "update_order",
]

INPUT_PREFIX = "in:"


class SNNError(Exception):
    """Base class for all errors raised by this package."""


class OrderViolation(SNNError, ValueError):
    pass


class InvalidNetwork(SNNError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invalid network")


class SpikeBudgetExceeded(SNNError, RuntimeError):
    def __init__(self, neuron, step: int, budget: int):
        self.neuron = neuron
        self.step = step
        self.budget = budget
        super().__init__(f"neuron {neuron!r} exceeded its budget of {budget} spikes at step {step}")


class UnsupportedModel(SNNError, ValueError):
    pass


class DomainError(SNNError, ValueError):
    pass


class ShapeMismatch(SNNError, ValueError):
    pass


def exact(x) -> Fraction:
    """Exact rational value of a model parameter.

    Floats are read as the decimal they print as (``0.9`` -> ``9/10``), so
    a value written in a network file means exactly what it says.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a numeric parameter")
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite parameter {x!r}")
        return Fraction(repr(x))
    if isinstance(x, (str, Real)):
        return Fraction(str(x))
    raise TypeError(f"cannot interpret {x!r} as a number")


class SpikeTrain(tuple):
    """Non-decreasing tuple of non-negative integer spike steps.

    Compares equal to a plain tuple with the same steps.
    """

    __slots__ = ()

    def __new__(cls, steps: Iterable[int] = ()):
        vals = []
        for s in steps:
            if isinstance(s, bool) or not isinstance(s, Integral):
                raise TypeError(f"spike step must be an integer, got {s!r}")
            vals.append(int(s))
        for a, b in zip(vals, vals[1:]):
            if a > b:
                raise OrderViolation(f"spike train not sorted: {a} > {b}")
        if vals and vals[0] < 0:
            raise ValueError(f"negative spike step {vals[0]}")
        return super().__new__(cls, vals)

    def __repr__(self):
        return f"SpikeTrain({tuple(self)!r})"

    @property
    def first(self) -> Optional[int]:
        return self[0] if self else None

    def within(self, horizon: int) -> bool:
        return not self or self[-1] <= horizon

    def times(self, dt: float) -> list[float]:
        return [s * dt for s in self]


@dataclass(frozen=True)
class Single:
    def __str__(self):
        return "single"


@dataclass(frozen=True)
class Multi:
    budget: int

    def __str__(self):
        return f"multi({self.budget})"


SpikeLimit = Union[Single, Multi]

RESET_MODELS = ("offset", "decaying")


@dataclass(frozen=True)
class NeuronSpec:
    """One integrate-and-fire neuron.

    The effective first threshold is ``threshold_multiplier * threshold_base``.
    ``reset`` selects how a spike acts on the membrane: ``"offset"`` is the
    persistent offset model every pass relies on, ``"decaying"`` lets the
    subtracted threshold leak away with the membrane.
    """

    id: str
    layer: int
    threshold_base: float = 1.0
    threshold_multiplier: int = 1
    leak: float = 1.0
    spike_limit: SpikeLimit = field(default_factory=Single)
    reset: str = "offset"

    @property
    def is_single(self) -> bool:
        return isinstance(self.spike_limit, Single)

    @property
    def budget(self) -> Optional[int]:
        return None if self.is_single else self.spike_limit.budget


@dataclass(frozen=True)
class Synapse:
    pre: str
    post: str
    weight: float
    delay: int = 0


@dataclass(frozen=True)
class NetworkSpec:
    d_in: int
    d_out: int
    neurons: tuple[NeuronSpec, ...]
    synapses: tuple[Synapse, ...]
    output_neurons: tuple[str, ...]
    B: float
    dt: float = 1.0
    horizon: int = 100
    output_groups: Optional[tuple[tuple[str, ...], ...]] = None

    def __post_init__(self):
        # Accept lists from callers; keep the stored value hashable and immutable.
        object.__setattr__(self, "neurons", tuple(self.neurons))
        object.__setattr__(self, "synapses", tuple(self.synapses))
        object.__setattr__(self, "output_neurons", tuple(self.output_neurons))
        if self.output_groups is not None:
            object.__setattr__(self, "output_groups", tuple(tuple(g) for g in self.output_groups))

    def neuron(self, nid: str) -> NeuronSpec:
        for n in self.neurons:
            if n.id == nid:
                return n
        raise KeyError(nid)

    @property
    def layers(self) -> tuple[int, ...]:
        return tuple(sorted({n.layer for n in self.neurons}))

    def max_abs_weight(self) -> Fraction:
        return max((abs(exact(s.weight)) for s in self.synapses), default=Fraction(0))


def input_ref(index: int) -> str:
    return f"{INPUT_PREFIX}{index}"


def parse_input_ref(ref: str) -> Optional[int]:
    """Channel index for an input reference, ``None`` for a neuron id."""
    if isinstance(ref, str) and ref.startswith(INPUT_PREFIX):
        tail = ref[len(INPUT_PREFIX):]
        if tail.isdigit():
            return int(tail)
    return None


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self):
        return self.message


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def raise_for_violations(self):
        if self.violations:
            raise InvalidNetwork(self.violations)


def _positive_int(x) -> bool:
    return isinstance(x, Integral) and not isinstance(x, bool) and x >= 1


def validate_network(net: NetworkSpec) -> ValidationResult:
    """Collect every structural violation of ``net``; never raises."""
    out: list[Violation] = []
    add = lambda kind, msg: out.append(Violation(kind, msg))  # noqa: E731

    if net.d_in < 0 or net.d_out < 0:
        add("channels", "channel counts must be non-negative")
    if not exact(net.B) > 0:
        add("bound", f"weight bound B must be positive, got {net.B}")
    if not exact(net.dt) > 0:
        add("dt", f"dt must be positive, got {net.dt}")
    if not _positive_int(net.horizon):
        add("horizon", f"horizon must be a positive integer, got {net.horizon}")

    ids: dict[str, NeuronSpec] = {}
    for n in net.neurons:
        if n.id in ids:
            add("duplicate", f"duplicate neuron id {n.id}")
        ids[n.id] = n
        if parse_input_ref(n.id) is not None:
            add("reserved", f"neuron id {n.id} collides with input reference syntax")
        if not isinstance(n.layer, Integral) or n.layer < 0:
            add("neuron", f"layer of {n.id} must be a non-negative integer")
        if not exact(n.threshold_base) > 0:
            add("neuron", f"threshold_base of {n.id} must be positive")
        if not _positive_int(n.threshold_multiplier):
            add("neuron", f"threshold_multiplier of {n.id} must be a positive integer")
        if not (0 < exact(n.leak) <= 1):
            add("neuron", f"leak of {n.id} must lie in (0, 1]")
        if isinstance(n.spike_limit, Multi):
            if not _positive_int(n.spike_limit.budget):
                add("neuron", f"spike budget of {n.id} must be a positive integer")
        elif not isinstance(n.spike_limit, Single):
            add("neuron", f"unknown spike limit {n.spike_limit!r} on {n.id}")
        if n.reset not in RESET_MODELS:
            add("neuron", f"unknown reset model {n.reset!r} on {n.id}")

    bound = exact(net.B) if exact(net.B) > 0 else None
    for s in net.synapses:
        ch = parse_input_ref(s.pre)
        if ch is not None:
            if ch >= net.d_in:
                add("dangling", f"input channel {s.pre} out of range (d_in={net.d_in})")
        elif s.pre not in ids:
            add("dangling", f"unknown presynaptic neuron {s.pre}")
        if s.post not in ids:
            add("dangling", f"unknown postsynaptic neuron {s.post}")
        if s.pre == s.post:
            add("autapse", f"autapse at {s.pre}")
        if bound is not None and abs(exact(s.weight)) > bound:
            add("weight", f"weight bound violated: |{s.weight}| > B={net.B} on {s.pre}->{s.post}")
        if not isinstance(s.delay, Integral) or isinstance(s.delay, bool) or s.delay < 0:
            add("delay", f"delay on {s.pre}->{s.post} must be a non-negative integer")
        if ch is None and s.pre in ids and s.post in ids:
            if ids[s.pre].layer > ids[s.post].layer:
                add("layering", f"edge {s.pre}->{s.post} goes from layer "
                                f"{ids[s.pre].layer} down to {ids[s.post].layer}")

    seen = set()
    for o in net.output_neurons:
        if o not in ids:
            add("dangling", f"unknown output neuron {o}")
        if o in seen:
            add("duplicate", f"output neuron {o} listed twice")
        seen.add(o)
    if net.output_groups is None:
        if len(net.output_neurons) != net.d_out:
            add("outputs", f"{len(net.output_neurons)} output neurons for d_out={net.d_out}")
    else:
        if len(net.output_groups) != net.d_out:
            add("outputs", f"{len(net.output_groups)} output groups for d_out={net.d_out}")
        flat = [i for g in net.output_groups for i in g]
        if flat != list(net.output_neurons):
            add("outputs", "output_groups must partition output_neurons in order")

    if not out:
        try:
            update_order(net)
        except InvalidNetwork as exc:
            out.extend(exc.violations)
    return ValidationResult(tuple(out))


def update_order(net: NetworkSpec) -> list[int]:
    """Neuron indices in per-step update order.

    Layer first; inside a layer, zero-delay edges are respected so a spike
    crossing such an edge is seen within the same step. Ties keep
    declaration order.
    """
    index = {n.id: i for i, n in enumerate(net.neurons)}
    by_layer: dict[int, list[int]] = {}
    for i, n in enumerate(net.neurons):
        by_layer.setdefault(n.layer, []).append(i)
    succ: dict[int, set[int]] = {}
    indeg = [0] * len(net.neurons)
    for s in net.synapses:
        if s.delay != 0 or s.pre not in index or s.post not in index:
            continue
        a, b = index[s.pre], index[s.post]
        if net.neurons[a].layer != net.neurons[b].layer or a == b:
            continue
        if b not in succ.setdefault(a, set()):
            succ[a].add(b)
            indeg[b] += 1

    order: list[int] = []
    for layer in sorted(by_layer):
        members = by_layer[layer]
        ready = [i for i in members if indeg[i] == 0]
        done = 0
        while ready:
            ready.sort()
            i = ready.pop(0)
            order.append(i)
            done += 1
            for j in sorted(succ.get(i, ())):
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
        if done != len(members):
            stuck = sorted(net.neurons[i].id for i in members if indeg[i] > 0)
            raise InvalidNetwork([Violation(
                "zero_delay_cycle", f"zero-delay cycle in layer {layer} among {stuck}")])
    return order


def append_trains(a: Sequence[int], b: Sequence[int]) -> SpikeTrain:
    """Concatenate two trains; the result must stay sorted."""
    if a and b and a[-1] > b[0]:
        raise OrderViolation(f"cannot append train starting at {b[0]} after one ending at {a[-1]}")
    return SpikeTrain(tuple(a) + tuple(b))


def min_spike_time(trains: Iterable[Sequence[int]]) -> Optional[int]:
    firsts = [t[0] for t in trains if len(t)]
    return min(firsts) if firsts else None
