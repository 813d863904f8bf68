"""Seeded differential checking of the two passes.

Every trial draws a random layered network and input trains from a seed
derived from ``(cfg.seed, trial, attempt)``, simulates the original and the
transformed network and compares spike trains for exact equality.

The networks must stay within their spike budget for the passes to apply,
so the input distribution is sampled conditionally on that: a draw that
would overrun the budget is rejected and redrawn (with the input density
scaled by ``density_decay``) up to ``max_attempts`` times. Rejections are
counted in the report. Set ``respect_budget=False`` to keep the first draw
and let budget overruns surface as violations instead.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .codecs import DECODERS, latency_encode, lp_error, rate_encode
from .core import (
    Multi,
    NetworkSpec,
    NeuronSpec,
    Single,
    SpikeBudgetExceeded,
    SpikeTrain,
    Synapse,
    exact,
    input_ref,
    min_spike_time,
    validate_network,
)
from .ntheory import SQUAREFREE_DENSITY, eta
from .sim import SimResult, simulate, simulate_decaying_reset
from .transform import PassOutput, first_spike_filter, merge_adapter, multi_to_single, single_to_multi

__all__ = [
    "GenConfig",
    "TrialShape",
    "FailureRecord",
    "EquivalenceReport",
    "EpsilonResult",
    "trial_shape",
    "random_network",
    "random_inputs",
    "check_m2s",
    "check_s2m",
    "check_equivalence",
    "check_causality",
    "discrepancy",
    "perturbed_copy",
    "epsilon_transfer",
    "negative_control_config",
]

_NET, _INPUT, _SHAPE, _REF, _ENC = 1, 2, 3, 4, 5
WEIGHT_DECIMALS = 4


@dataclass(frozen=True)
class GenConfig:
    """Parameters of the random network and input family.

    ``layers`` and ``neurons_per_layer`` are maxima: each trial draws its
    depth and layer widths uniformly up to them. ``beta`` and ``ns`` are
    the choices a trial's leak and spike budget are drawn from.
    """

    seed: int = 0
    layers: int = 3
    neurons_per_layer: int = 8
    d_in: int = 3
    d_out: int = 2
    B: float = 2.0
    weight_range: Optional[tuple[float, float]] = None
    delay_min: int = 1
    delay_max: int = 3
    beta: tuple[float, ...] = (1.0, 0.9)
    theta: float = 1.0
    ns: tuple[int, ...] = tuple(range(1, 9))
    horizon: int = 200
    input_density: float = 0.05
    trials: int = 100
    conn_prob: float = 0.6
    skip_prob: float = 0.15
    lateral_prob: float = 0.15
    dt: float = 1.0
    max_attempts: int = 24
    density_decay: float = 0.7
    respect_budget: bool = True

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(self.beta))
        object.__setattr__(self, "ns", tuple(self.ns))
        if self.weight_range is not None:
            object.__setattr__(self, "weight_range", tuple(self.weight_range))
        problems = []
        if not 0 <= self.seed < 2 ** 64:
            problems.append("seed must be a 64-bit unsigned integer")
        if self.layers < 1 or self.neurons_per_layer < 1:
            problems.append("layers and neurons_per_layer must be positive")
        if self.d_in < 1 or self.d_out < 1:
            problems.append("d_in and d_out must be positive")
        if not self.B > 0:
            problems.append("B must be positive")
        if self.weight_range is not None:
            lo, hi = self.weight_range
            if not (-self.B <= lo <= hi <= self.B):
                problems.append("weight_range must lie inside [-B, B]")
        if not 1 <= self.delay_min <= self.delay_max:
            problems.append("delays must satisfy 1 <= delay_min <= delay_max")
        if not self.beta or any(not 0 < b <= 1 for b in self.beta):
            problems.append("beta choices must lie in (0, 1]")
        if not self.theta > 0:
            problems.append("theta must be positive")
        if not self.ns or any(n < 1 for n in self.ns):
            problems.append("ns choices must be positive")
        if self.horizon < 1 or self.trials < 0:
            problems.append("horizon must be positive and trials non-negative")
        if not 0 <= self.input_density <= 1:
            problems.append("input_density must lie in [0, 1]")
        for name in ("conn_prob", "skip_prob", "lateral_prob", "density_decay"):
            if not 0 <= getattr(self, name) <= 1:
                problems.append(f"{name} must lie in [0, 1]")
        if self.max_attempts < 1:
            problems.append("max_attempts must be positive")
        if problems:
            raise ValueError("; ".join(problems))


def negative_control_config(**overrides) -> GenConfig:
    """Single neuron under constant excitatory drive.

    Every step carries an input spike of weight 0.4..0.6 onto one leaky
    neuron with budget 8, over 12 steps: at least three spikes, never more
    than the budget.
    """
    base = dict(
        layers=1, neurons_per_layer=1, d_in=1, d_out=1, B=2.0,
        weight_range=(0.4, 0.6), delay_min=1, delay_max=1, beta=(0.9,),
        ns=(8,), horizon=12, input_density=1.0, density_decay=1.0,
        lateral_prob=0.0, skip_prob=0.0, conn_prob=1.0, trials=50,
    )
    base.update(overrides)
    return GenConfig(**base)


def _rng(cfg: GenConfig, trial: int, attempt: int, stream: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, trial, attempt, stream, *extra])


@dataclass(frozen=True)
class TrialShape:
    widths: tuple[int, ...]
    beta: float
    ns: int


def trial_shape(cfg: GenConfig, trial: int = 0, attempt: int = 0) -> TrialShape:
    rng = _rng(cfg, trial, attempt, _SHAPE)
    L = int(rng.integers(1, cfg.layers + 1))
    widths = tuple(int(w) for w in rng.integers(1, cfg.neurons_per_layer + 1, size=L))
    beta = cfg.beta[int(rng.integers(len(cfg.beta)))]
    ns = cfg.ns[int(rng.integers(len(cfg.ns)))]
    return TrialShape(widths, beta, ns)


def random_network(cfg: GenConfig, trial: int = 0, attempt: int = 0, *,
                   kind: str = "multi", shape: Optional[TrialShape] = None) -> NetworkSpec:
    """Random layered network; pure function of its arguments.

    Inputs project onto layer 1 (and, with ``skip_prob``, deeper layers).
    Every neuron has at least one presynaptic source from the layer below
    or the inputs. Weights are uniform over ``weight_range`` (default
    [-B, B]) on a 1e-4 grid; delays are uniform integers.
    """
    if kind not in ("multi", "single"):
        raise ValueError(f"kind must be 'multi' or 'single', got {kind!r}")
    shape = shape or trial_shape(cfg, trial, attempt)
    rng = _rng(cfg, trial, attempt, _NET)
    lo, hi = cfg.weight_range or (-cfg.B, cfg.B)
    limit = Multi(shape.ns) if kind == "multi" else Single()

    layers = [[f"L{l}n{i}" for i in range(w)] for l, w in enumerate(shape.widths, start=1)]
    neurons = [
        NeuronSpec(id=nid, layer=l, threshold_base=cfg.theta, threshold_multiplier=1,
                   leak=shape.beta, spike_limit=limit)
        for l, ids in enumerate(layers, start=1) for nid in ids
    ]
    sources = [[input_ref(c) for c in range(cfg.d_in)]] + layers

    def weight():
        w = round(float(rng.uniform(lo, hi)), WEIGHT_DECIMALS)
        return min(max(w, -cfg.B), cfg.B)

    def delay():
        return int(rng.integers(cfg.delay_min, cfg.delay_max + 1))

    synapses = []
    for l, ids in enumerate(layers, start=1):
        for post in ids:
            pres = []
            for src_layer in range(l):
                p = cfg.conn_prob if src_layer == l - 1 else cfg.skip_prob
                pres += [pre for pre in sources[src_layer] if rng.random() < p]
            if not any(pre in sources[l - 1] for pre in pres):
                below = sources[l - 1]
                pres.insert(0, below[int(rng.integers(len(below)))])
            pres += [pre for pre in ids if pre != post and rng.random() < cfg.lateral_prob]
            synapses += [Synapse(pre, post, weight(), delay()) for pre in pres]

    outputs = layers[-1][:cfg.d_out]
    return NetworkSpec(
        d_in=cfg.d_in, d_out=len(outputs), neurons=neurons, synapses=synapses,
        output_neurons=outputs, B=cfg.B, dt=cfg.dt, horizon=cfg.horizon,
    )


def random_inputs(cfg: GenConfig, trial: int = 0, attempt: int = 0, *,
                  sample: int = 0, density: Optional[float] = None) -> list[SpikeTrain]:
    """Independent Bernoulli trains, one spike chance per step and channel."""
    rho = cfg.input_density if density is None else density
    rng = _rng(cfg, trial, attempt, _INPUT, sample)
    trains = []
    for _ in range(cfg.d_in):
        hits = rng.random(cfg.horizon + 1) < rho
        trains.append(SpikeTrain(np.flatnonzero(hits).tolist()))
    return trains


def check_causality(net: NetworkSpec, inputs, outputs=None) -> bool:
    """Every non-empty output starts strictly after the earliest input spike.

    Silent outputs pass vacuously. ``outputs`` defaults to simulating ``net``.
    """
    if outputs is None:
        outputs = simulate(net, inputs, enforce_budget=False).output_trains(net)
    first_out = min_spike_time(outputs)
    if first_out is None:
        return True
    first_in = min_spike_time(inputs)
    return first_in is not None and first_out > first_in


def discrepancy(expected: Sequence[int], actual: Sequence[int]) -> float:
    """inf if spike counts differ, else the largest step difference."""
    if len(expected) != len(actual):
        return math.inf
    return float(max((abs(a - b) for a, b in zip(expected, actual)), default=0))


def _first_divergence(expected, actual) -> Optional[int]:
    for a, b in zip(expected, actual):
        if a != b:
            return min(a, b)
    if len(expected) != len(actual):
        longer = expected if len(expected) > len(actual) else actual
        return longer[min(len(expected), len(actual))]
    return None


@dataclass(frozen=True)
class FailureRecord:
    trial: int
    attempt: int
    seed: tuple[int, int, int]
    neuron: str
    kind: str
    first_divergent_step: Optional[int] = None
    expected: tuple[int, ...] = ()
    actual: tuple[int, ...] = ()
    discrepancy: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seed"] = list(self.seed)
        d["expected"] = list(self.expected)
        d["actual"] = list(self.actual)
        d["discrepancy"] = "inf" if math.isinf(self.discrepancy) else self.discrepancy
        return d


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    outcome: str  # "match" | "mismatch" | "budget"
    attempts: int
    failures: tuple[FailureRecord, ...] = ()
    accounting: dict = field(default_factory=dict)
    spiking: bool = False
    multi_spike: bool = False


@dataclass
class EquivalenceReport:
    direction: str
    model: str
    config: dict
    trials: int = 0
    exact_matches: int = 0
    failed_trials: int = 0
    budget_violations: int = 0
    spiking_trials: int = 0
    multi_spike_trials: int = 0
    rejected_draws: int = 0
    failures: list = field(default_factory=list)
    budget_records: list = field(default_factory=list)
    accounting: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.exact_matches + self.failed_trials + self.budget_violations == self.trials

    @property
    def all_exact(self) -> bool:
        return self.exact_matches == self.trials

    def add(self, rec: TrialRecord) -> None:
        self.trials += 1
        self.rejected_draws += rec.attempts - 1
        self.spiking_trials += rec.spiking
        self.multi_spike_trials += rec.multi_spike
        if rec.outcome == "match":
            self.exact_matches += 1
        elif rec.outcome == "budget":
            self.budget_violations += 1
            self.budget_records.extend(rec.failures)
        else:
            self.failed_trials += 1
            self.failures.extend(rec.failures)
        self.accounting.append({"trial": rec.trial, **rec.accounting})

    def summary(self) -> dict:
        return {
            "direction": self.direction,
            "model": self.model,
            "trials": self.trials,
            "exact_matches": self.exact_matches,
            "failed_trials": self.failed_trials,
            "budget_violations": self.budget_violations,
            "spiking_trials": self.spiking_trials,
            "multi_spike_trials": self.multi_spike_trials,
            "rejected_draws": self.rejected_draws,
            "audit_failures": sum(1 for f in self.failures if f.kind.startswith("audit")),
        }

    def to_dict(self, with_accounting: bool = True) -> dict:
        doc = {
            "summary": self.summary(),
            "config": self.config,
            "failures": [f.to_dict() for f in self.failures],
            "budget_violations": [f.to_dict() for f in self.budget_records],
        }
        if with_accounting:
            doc["accounting"] = self.accounting
        return doc


def _config_dict(cfg: GenConfig) -> dict:
    d = asdict(cfg)
    for k, v in d.items():
        if isinstance(v, tuple):
            d[k] = list(v)
    return d


def _simulator(model: str) -> Callable[..., SimResult]:
    if model == "offset":
        return simulate
    if model == "decaying":
        return simulate_decaying_reset
    raise ValueError(f"unknown neuron model {model!r}")


@dataclass(frozen=True)
class _Draw:
    attempt: int
    shape: TrialShape
    net: NetworkSpec
    samples: tuple
    results: Optional[tuple]  # None if the original itself overran its budget
    overrun: Optional[SpikeBudgetExceeded] = None


def _draw(cfg, trial, direction, model, make_inputs, n_samples=1) -> tuple[_Draw, bool]:
    """Budget-respecting network and input draw; second value is success."""
    sim = _simulator(model)
    kind = "multi" if direction == "m2s" else "single"
    draw = None
    for attempt in range(cfg.max_attempts):
        shape = trial_shape(cfg, trial, attempt)
        net = random_network(cfg, trial, attempt, kind=kind, shape=shape)
        scale = cfg.density_decay ** attempt
        samples = tuple(make_inputs(cfg, trial, attempt, k, scale) for k in range(n_samples))
        results, overrun = [], None
        for x in samples:
            try:
                r = sim(net, x, check=False)
            except SpikeBudgetExceeded as exc:
                overrun = exc
                break
            results.append(r)
            # a single-spike original is fine; its replacement population is not
            if direction == "s2m" and overrun is None:
                worst = max(r.crossings, key=r.crossings.get, default=None)
                if worst is not None and r.crossings[worst] > shape.ns:
                    overrun = SpikeBudgetExceeded(worst, -1, shape.ns)
        complete = len(results) == len(samples)
        draw = _Draw(attempt, shape, net, samples, tuple(results) if complete else None, overrun)
        if overrun is None:
            return draw, True
        if not cfg.respect_budget:
            return draw, False
    return draw, False


def _bernoulli_inputs(cfg, trial, attempt, sample, scale):
    return random_inputs(cfg, trial, attempt, sample=sample, density=cfg.input_density * scale)


def _apply(direction: str, net: NetworkSpec, ns: int) -> PassOutput:
    return multi_to_single(net) if direction == "m2s" else single_to_multi(net, ns)


def _audit(direction, net, out: PassOutput, ns) -> dict:
    n = len(net.neurons)
    n_replaced = sum(1 for x in net.neurons if x.is_single == (direction == "s2m"))
    count = len(out.network.neurons)
    e = eta(ns)
    if direction == "m2s":
        count_ok = count <= ns * n
    else:
        count_ok = count == e * n_replaced + (n - n_replaced)
    eta_ok = e <= min(ns, SQUAREFREE_DENSITY * ns + math.sqrt(ns))
    B = NetworkSpec.max_abs_weight
    delays = lambda nw: {s.delay for s in nw.synapses}  # noqa: E731
    return {
        "n": n, "ns": ns, "eta": e, "transformed": count,
        "count_ok": count_ok, "eta_ok": eta_ok,
        "layers_ok": net.layers == out.network.layers,
        "weights_ok": B(out.network) <= B(net) <= exact(net.B),
        "delays_ok": delays(net) == delays(out.network),
        "valid": validate_network(out.network).ok,
    }


def _replacement_train(direction, result: SimResult, reps) -> SpikeTrain:
    trains = [result.outputs[r] for r in reps]
    if direction == "m2s":
        return merge_adapter([trains])[0]
    return first_spike_filter(trains[:1])[0]


def _compare(direction, seed, draw, out: PassOutput, original: SimResult, transformed: SimResult):
    trial = seed[1]
    failures = []

    def record(neuron, kind, expected, actual, detail=""):
        failures.append(FailureRecord(
            trial=trial, attempt=draw.attempt, seed=seed, neuron=neuron, kind=kind,
            first_divergent_step=_first_divergence(expected, actual),
            expected=tuple(expected), actual=tuple(actual),
            discrepancy=discrepancy(expected, actual), detail=detail))

    for nid, reps in out.neuron_map.items():
        expected = original.outputs[nid]
        try:
            actual = _replacement_train(direction, transformed, reps)
        except ValueError as exc:  # OrderViolation from the merge
            record(nid, "order", expected, (), str(exc))
            continue
        if tuple(actual) != tuple(expected):
            record(nid, "spikes", expected, actual)
    exp_out = original.output_trains(draw.net)
    try:
        got_out = out.decode(transformed)
    except ValueError as exc:
        record("<outputs>", "order", (), (), str(exc))
        return failures
    for k, (a, b) in enumerate(zip(exp_out, got_out)):
        if tuple(a) != tuple(b):
            record(f"output[{k}]", "decoded", a, b)
    return failures


def _run_trial(cfg: GenConfig, trial: int, direction: str, model: str) -> TrialRecord:
    draw, ok = _draw(cfg, trial, direction, model, _bernoulli_inputs)
    seed = (cfg.seed, trial, draw.attempt)
    if draw.results is None:
        exc = draw.overrun
        fr = FailureRecord(trial, draw.attempt, seed, str(exc.neuron), "budget:original",
                           detail=str(exc))
        return TrialRecord(trial, "budget", draw.attempt + 1, (fr,))

    inputs = draw.samples[0]
    original = draw.results[0]
    out = _apply(direction, draw.net, draw.shape.ns)
    acc = _audit(direction, draw.net, out, draw.shape.ns)
    acc["attempts"] = draw.attempt + 1
    acc["causal"] = check_causality(draw.net, inputs, original.output_trains(draw.net))
    crossings = max(original.crossings.values(), default=0)
    spiking = any(original.spike_counts.values())
    multi = crossings >= 2

    if not ok:
        exc = draw.overrun
        fr = FailureRecord(trial, draw.attempt, seed, str(exc.neuron), "budget:drive",
                           detail=str(exc))
        return TrialRecord(trial, "budget", draw.attempt + 1, (fr,), acc, spiking, multi)
    try:
        transformed = _simulator(model)(out.network, inputs, check=False)
    except SpikeBudgetExceeded as exc:
        fr = FailureRecord(trial, draw.attempt, seed, str(exc.neuron), "budget:transformed",
                           first_divergent_step=exc.step, detail=str(exc))
        return TrialRecord(trial, "budget", draw.attempt + 1, (fr,), acc, spiking, multi)

    failures = _compare(direction, seed, draw, out, original, transformed)
    for key in ("count_ok", "eta_ok", "layers_ok", "weights_ok", "delays_ok", "valid", "causal"):
        if not acc[key]:
            failures.append(FailureRecord(trial, draw.attempt, seed, "<network>", f"audit:{key}"))
    outcome = "mismatch" if failures else "match"
    return TrialRecord(trial, outcome, draw.attempt + 1, tuple(failures), acc, spiking, multi)


def _trial_job(args):
    return _run_trial(*args)


def check_equivalence(cfg: GenConfig, direction: str, *, model: str = "offset",
                      workers: int = 1) -> EquivalenceReport:
    """Run ``cfg.trials`` differential trials of one pass.

    ``model="decaying"`` simulates both networks with the decaying reset,
    which is the negative control for ``m2s``. Trials are independent, so
    ``workers > 1`` spreads them over processes without changing the report.
    """
    if direction not in ("m2s", "s2m"):
        raise ValueError(f"direction must be 'm2s' or 's2m', got {direction!r}")
    _simulator(model)
    jobs = [(cfg, t, direction, model) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [_trial_job(j) for j in jobs]
    report = EquivalenceReport(direction, model, _config_dict(cfg))
    for rec in sorted(records, key=lambda r: r.trial):
        report.add(rec)
    return report


def check_m2s(cfg: GenConfig, *, decaying: bool = False, workers: int = 1) -> EquivalenceReport:
    return check_equivalence(cfg, "m2s", model="decaying" if decaying else "offset", workers=workers)


def check_s2m(cfg: GenConfig, *, workers: int = 1) -> EquivalenceReport:
    return check_equivalence(cfg, "s2m", workers=workers)


# ---------------------------------------------------------------------------
# error transfer


def perturbed_copy(net: NetworkSpec, rng: np.random.Generator, scale: float = 0.25) -> NetworkSpec:
    """Same architecture with Gaussian weight noise, clipped to [-B, B]."""
    B = float(net.B)
    syns = []
    for s in net.synapses:
        w = round(float(s.weight) + float(rng.normal(0.0, scale * B)), WEIGHT_DECIMALS)
        syns.append(replace(s, weight=min(max(w, -B), B)))
    return replace(net, synapses=tuple(syns))


@dataclass(frozen=True)
class EpsilonResult:
    trial: int
    direction: str
    decoder: str
    errors: dict  # p -> (eps_original, eps_transformed)
    budget_ok: bool = True

    @property
    def equal(self) -> bool:
        return self.budget_ok and all(a == b for a, b in self.errors.values())


def _encoded_inputs(encoder: str):
    def make(cfg, trial, attempt, sample, scale):
        rng = _rng(cfg, trial, attempt, _ENC, sample)
        if encoder == "latency":
            return latency_encode(rng.uniform(0.0, 1.0, cfg.d_in), cfg.horizon // 2)
        if encoder == "rate":
            top = min(1.0, 2 * cfg.input_density * scale)
            return rate_encode(rng.uniform(0.0, top, cfg.d_in), cfg.horizon)
        raise ValueError(f"unknown encoder {encoder!r}")
    return make


def epsilon_transfer(cfg: GenConfig, direction: str = "m2s", decoder: str = "latency",
                     ps: Sequence[float] = (1, 2, math.inf), *, trial: int = 0,
                     samples: int = 4, encoder: Optional[str] = None,
                     target: str = "perturbed") -> EpsilonResult:
    """Approximation error of a network and of its transform against one target.

    The target F is a perturbed-weight copy of the original network (or the
    original itself with ``target="self"``), evaluated on ``samples`` input
    draws from Ω: Bernoulli trains, or ``encoder`` applied to uniform
    feature vectors. Both errors are computed independently from decoded
    outputs; they coincide whenever the transform is exact.
    """
    make = _encoded_inputs(encoder) if encoder else _bernoulli_inputs
    draw, ok = _draw(cfg, trial, direction, "offset", make, n_samples=samples)
    if not ok:
        return EpsilonResult(trial, direction, decoder, {}, budget_ok=False)
    net = draw.net
    if target == "self":
        ref = net
    elif target == "perturbed":
        ref = perturbed_copy(net, _rng(cfg, trial, draw.attempt, _REF))
    else:
        raise ValueError(f"unknown target {target!r}")
    out = _apply(direction, net, draw.shape.ns)
    dec = DECODERS[decoder]

    f_vals, orig_vals, trans_vals = [], [], []
    for x, res in zip(draw.samples, draw.results):
        f_res = simulate(ref, x, enforce_budget=False, check=False)
        try:
            t_res = simulate(out.network, x, check=False)
        except SpikeBudgetExceeded:
            return EpsilonResult(trial, direction, decoder, {}, budget_ok=False)
        f_vals.append(dec(f_res.output_trains(ref), net.dt))
        orig_vals.append(dec(res.output_trains(net), net.dt))
        trans_vals.append(dec(out.decode(t_res), net.dt))
    errors = {p: (lp_error(f_vals, orig_vals, p), lp_error(f_vals, trans_vals, p)) for p in ps}
    return EpsilonResult(trial, direction, decoder, errors)
