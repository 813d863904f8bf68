"""Deterministic spike encoders, spike-train decoders and empirical L^p error."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import DomainError, ShapeMismatch, SpikeTrain

__all__ = [
    "latency_encode",
    "rate_encode",
    "latency_decode",
    "count_decode",
    "first_spike_decode",
    "lp_error",
    "ENCODERS",
    "DECODERS",
]


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _unit_interval(x) -> list[float]:
    vals = [float(v) for v in x]
    for v in vals:
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"value {v} outside [0, 1]")
    return vals


def latency_encode(x: Sequence[float], t_max: int) -> list[SpikeTrain]:
    """One spike per channel at step round(x_i * t_max), halves rounded up."""
    return [SpikeTrain((_round_half_up(v * t_max),)) for v in _unit_interval(x)]


def rate_encode(x: Sequence[float], horizon: int) -> list[SpikeTrain]:
    """Periodic trains: channel i spikes at round(k / x_i) for k = 1, 2, ...

    Rates are spikes per step, so x_i = 1 spikes at every step from 1 on
    and x_i = 0 stays silent.
    """
    out = []
    for v in _unit_interval(x):
        steps = []
        if v > 0:
            k = 1
            while (s := _round_half_up(k / v)) <= horizon:
                steps.append(s)
                k += 1
        out.append(SpikeTrain(steps))
    return out


def latency_decode(trains: Sequence[Sequence[int]], dt: float = 1.0) -> list[float]:
    """First spike time per channel in seconds; ``inf`` for a silent channel."""
    return [t[0] * dt if len(t) else math.inf for t in trains]


def count_decode(trains: Sequence[Sequence[int]]) -> list[int]:
    return [len(t) for t in trains]


def first_spike_decode(trains: Sequence[Sequence[int]], dt: float = 1.0) -> list[float]:
    # first-spike filtering followed by latency readout
    return latency_decode([t[:1] for t in trains], dt)


ENCODERS = {"latency": latency_encode, "rate": rate_encode}
DECODERS = {
    "latency": latency_decode,
    "count": lambda trains, dt=1.0: [float(c) for c in count_decode(trains)],
    "first-spike": first_spike_decode,
}


def lp_error(a, b, p: float) -> float:
    """Empirical L^p distance between two sample sets of output vectors.

    For finite p this is (mean_s sum_i |a_si - b_si|^p)^(1/p); for p = inf
    the largest coordinate difference. Two infinite entries of the same sign
    count as equal, a single infinite entry makes the error infinite.
    """
    A = np.asarray(a, dtype=float)
    Bv = np.asarray(b, dtype=float)
    if A.shape != Bv.shape:
        raise ShapeMismatch(f"shapes {A.shape} and {Bv.shape} differ")
    if A.ndim == 1:
        A, Bv = A[:, None], Bv[:, None]
    if A.ndim != 2 or A.shape[0] == 0:
        raise ShapeMismatch("expected a non-empty list of equal-length vectors")
    if not (p > 0):
        raise DomainError(f"p must be positive, got {p}")
    same = A == Bv
    with np.errstate(invalid="ignore"):
        diff = np.where(same, 0.0, np.abs(A - Bv))
    if math.isinf(p):
        return float(diff.max()) if diff.size else 0.0
    per_sample = (diff ** p).sum(axis=1)
    return float(per_sample.mean() ** (1.0 / p))
