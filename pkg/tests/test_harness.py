import dataclasses
import math

import numpy as np
import pytest

from snnequiv import harness
from snnequiv.core import NetworkSpec, SpikeTrain, validate_network
from snnequiv.harness import (
    GenConfig,
    check_causality,
    check_equivalence,
    check_m2s,
    check_s2m,
    discrepancy,
    epsilon_transfer,
    negative_control_config,
    perturbed_copy,
    random_inputs,
    random_network,
)
from snnequiv.transform import multi_to_single, single_to_multi


class TestGenConfig:
    @pytest.mark.parametrize("bad", [
        {"delay_min": 0}, {"beta": (1.2,)}, {"ns": (0,)}, {"B": 0},
        {"input_density": 1.5}, {"weight_range": (-3, 1)}, {"seed": -1},
    ])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            GenConfig(**bad)


class TestRandomNetwork:
    def test_deterministic(self):
        cfg = GenConfig(seed=11)
        assert random_network(cfg, 3) == random_network(cfg, 3)
        assert random_network(cfg, 3) != random_network(cfg, 4)

    def test_feed_forward_when_no_lateral(self):
        cfg = GenConfig(seed=5, lateral_prob=0.0)
        for t in range(20):
            net = random_network(cfg, t)
            layer = {n.id: n.layer for n in net.neurons}
            for s in net.synapses:
                if s.pre in layer:
                    assert layer[s.pre] < layer[s.post]

    def test_validation_sweep(self):
        for seed in range(400):
            cfg = GenConfig(seed=seed)
            assert validate_network(random_network(cfg, kind="single" if seed % 2 else "multi")).ok

    def test_ranges(self):
        cfg = GenConfig(seed=1)
        for t in range(20):
            net = random_network(cfg, t)
            assert len(net.layers) <= 3
            assert all(len([n for n in net.neurons if n.layer == l]) <= 8 for l in net.layers)
            assert all(1 <= s.delay <= 3 and abs(s.weight) <= 2 for s in net.synapses)
            assert {n.leak for n in net.neurons} <= {1.0, 0.9}


class TestRandomInputs:
    def test_density_zero(self):
        assert random_inputs(GenConfig(input_density=0.0)) == [()] * 3

    def test_density_one(self):
        cfg = GenConfig(input_density=1.0, horizon=10)
        assert random_inputs(cfg) == [tuple(range(11))] * 3

    def test_deterministic(self):
        cfg = GenConfig(seed=9)
        assert random_inputs(cfg, 2) == random_inputs(cfg, 2)
        assert random_inputs(cfg, 2) != random_inputs(cfg, 3)


class TestCausality:
    def test_examples(self):
        net = random_network(GenConfig())
        assert check_causality(net, [SpikeTrain([2])], [SpikeTrain([3])])
        assert not check_causality(net, [SpikeTrain([2])], [SpikeTrain([2])])
        assert check_causality(net, [SpikeTrain([2])], [SpikeTrain(), SpikeTrain()])

    def test_generated_networks_are_causal(self):
        cfg = GenConfig(seed=2, input_density=0.1)
        for t in range(20):
            net = random_network(cfg, t)
            assert check_causality(net, random_inputs(cfg, t))


def test_discrepancy():
    assert discrepancy((1, 2), (1, 5)) == 3
    assert discrepancy((1, 2), (1,)) == math.inf
    assert discrepancy((), ()) == 0


class TestReports:
    def test_m2s_exact(self):
        r = check_m2s(GenConfig(seed=3, trials=40))
        assert r.all_exact and r.consistent
        assert r.multi_spike_trials > 10
        assert all(a["count_ok"] and a["layers_ok"] for a in r.accounting)

    def test_s2m_exact(self):
        r = check_s2m(GenConfig(seed=3, trials=40))
        assert r.all_exact and r.consistent
        assert all(a["transformed"] == a["eta"] * a["n"] for a in r.accounting)

    def test_deterministic(self):
        cfg = GenConfig(seed=8, trials=15)
        assert check_m2s(cfg).to_dict() == check_m2s(cfg).to_dict()

    def test_workers_do_not_change_report(self):
        cfg = GenConfig(seed=8, trials=6)
        assert check_s2m(cfg, workers=2).to_dict() == check_s2m(cfg).to_dict()

    def test_budget_overruns_surface(self):
        cfg = GenConfig(seed=1, trials=30, respect_budget=False, input_density=0.2)
        r = check_s2m(cfg)
        assert r.budget_violations > 0 and r.consistent
        assert r.failed_trials == 0

    def test_negative_control(self):
        r = check_m2s(negative_control_config(trials=20), decaying=True)
        assert r.failed_trials == 20
        f = r.failures[0]
        assert f.first_divergent_step is not None and f.discrepancy > 0
        clean = check_m2s(negative_control_config(trials=20, beta=(1.0,)), decaying=True)
        assert clean.all_exact

    def test_unknown_direction(self):
        with pytest.raises(ValueError):
            check_equivalence(GenConfig(trials=1), "x2y")


class TestCatchesBrokenPasses:
    """The checker must notice a pass that is subtly wrong."""

    def test_wrong_replica_thresholds(self, monkeypatch):
        def broken(direction, net, ns):
            out = multi_to_single(net)
            neurons = tuple(dataclasses.replace(n, threshold_multiplier=1) for n in out.network.neurons)
            return dataclasses.replace(out, network=dataclasses.replace(out.network, neurons=neurons))
        monkeypatch.setattr(harness, "_apply", broken)
        r = check_m2s(GenConfig(seed=3, trials=20))
        assert r.failed_trials + r.budget_violations > 0

    def test_unsigned_population_weights(self, monkeypatch):
        def broken(direction, net, ns):
            out = single_to_multi(net, ns)
            syns = tuple(dataclasses.replace(s, weight=abs(s.weight)) if ".p" in s.pre else s
                         for s in out.network.synapses)
            return dataclasses.replace(out, network=dataclasses.replace(out.network, synapses=syns))
        monkeypatch.setattr(harness, "_apply", broken)
        r = check_s2m(GenConfig(seed=3, trials=20))
        assert r.failed_trials > 0
        assert any(f.kind == "spikes" for f in r.failures)

    def test_broken_pass_breaks_error_transfer(self, monkeypatch):
        def broken(direction, net, ns):
            out = multi_to_single(net)
            return dataclasses.replace(out, network=dataclasses.replace(
                out.network, synapses=out.network.synapses[1:]))
        monkeypatch.setattr(harness, "_apply", broken)
        cfg = GenConfig(seed=7)
        results = [epsilon_transfer(cfg, "m2s", "count", trial=t) for t in range(20)]
        assert not all(r.equal for r in results)


class TestEpsilon:
    def test_self_target_is_zero(self):
        r = epsilon_transfer(GenConfig(seed=1), "m2s", "count", target="self")
        assert r.equal and all(a == b == 0 for a, b in r.errors.values())

    @pytest.mark.parametrize("direction", ["m2s", "s2m"])
    @pytest.mark.parametrize("encoder", [None, "latency", "rate"])
    def test_equal(self, direction, encoder):
        cfg = GenConfig(seed=2)
        for t in range(5):
            assert epsilon_transfer(cfg, direction, "count", trial=t, encoder=encoder).equal

    def test_perturbed_copy_keeps_bound(self):
        net = random_network(GenConfig(seed=4))
        ref = perturbed_copy(net, np.random.default_rng(0), scale=2.0)
        assert isinstance(ref, NetworkSpec) and validate_network(ref).ok
        assert [s.pre for s in ref.synapses] == [s.pre for s in net.synapses]
