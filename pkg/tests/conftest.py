import sys
from fractions import Fraction

import pytest
from hypothesis import settings

from snnequiv.core import Multi, NetworkSpec, NeuronSpec, Single, Synapse

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def one_neuron(weight, *, beta=1.0, budget=10, mult=1, horizon=20, delay=0, reset="offset"):
    """One input channel driving one neuron."""
    limit = Single() if budget is None else Multi(budget)
    n = NeuronSpec("n", 1, threshold_multiplier=mult, leak=beta, spike_limit=limit, reset=reset)
    return NetworkSpec(1, 1, [n], [Synapse("in:0", "n", weight, delay)], ["n"], B=2.0, horizon=horizon)


def brute_stepper(weight, beta, inputs, horizon, theta=1, k=1, budget=None):
    """Literal per-step oracle for one neuron fed by one zero-delay channel.

    v(t) = beta*v(t-1) + w*[t in inputs]; a spike per ladder rung reached.
    """
    w, b = Fraction(str(weight)), Fraction(str(beta))
    v, count, out = Fraction(0), 0, []
    for t in range(horizon + 1):
        v = (b * v if t else 0) + w * inputs.count(t)
        while v >= (count + 1) * k * Fraction(str(theta)) and (budget is None or count < budget):
            count += 1
            out.append(t)
    return out


@pytest.fixture
def drive():
    return one_neuron


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.line(n))
