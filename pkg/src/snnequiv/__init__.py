"""Exact conversion between multi-spike and single-spike spiking networks.

Two network passes (``multi_to_single`` and ``single_to_multi``), a
discrete-time simulator with threshold-ladder spiking, the number theory
behind the Möbius population weights, spike codecs, and a seeded harness
that checks the passes by differential simulation.
"""

from .codecs import count_decode, latency_decode, latency_encode, lp_error, rate_encode
from .core import (
    DomainError,
    InvalidNetwork,
    Multi,
    NetworkSpec,
    NeuronSpec,
    OrderViolation,
    ShapeMismatch,
    Single,
    SpikeBudgetExceeded,
    SpikeTrain,
    Synapse,
    UnsupportedModel,
    append_trains,
    input_ref,
    min_spike_time,
    validate_network,
)
from .harness import (
    EquivalenceReport,
    GenConfig,
    check_causality,
    check_m2s,
    check_s2m,
    epsilon_transfer,
    random_inputs,
    random_network,
)
from .ntheory import (
    check_eta_bounds,
    divisor_matrix,
    eta,
    mobius_alpha,
    solve_alpha_substitution,
)
from .sim import SimResult, simulate, simulate_decaying_reset
from .transform import (
    PassOutput,
    first_spike_filter,
    merge_adapter,
    multi_to_single,
    single_to_multi,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "EquivalenceReport",
    "GenConfig",
    "InvalidNetwork",
    "Multi",
    "NetworkSpec",
    "NeuronSpec",
    "OrderViolation",
    "PassOutput",
    "ShapeMismatch",
    "SimResult",
    "Single",
    "SpikeBudgetExceeded",
    "SpikeTrain",
    "Synapse",
    "UnsupportedModel",
    "append_trains",
    "check_causality",
    "check_eta_bounds",
    "check_m2s",
    "check_s2m",
    "count_decode",
    "divisor_matrix",
    "epsilon_transfer",
    "eta",
    "first_spike_filter",
    "input_ref",
    "latency_decode",
    "latency_encode",
    "lp_error",
    "merge_adapter",
    "min_spike_time",
    "mobius_alpha",
    "multi_to_single",
    "random_inputs",
    "random_network",
    "rate_encode",
    "simulate",
    "simulate_decaying_reset",
    "single_to_multi",
    "solve_alpha_substitution",
    "validate_network",
]
