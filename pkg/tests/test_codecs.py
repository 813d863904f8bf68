import math

import pytest
from hypothesis import given, strategies as st

from snnequiv.codecs import (
    DECODERS,
    count_decode,
    first_spike_decode,
    latency_decode,
    latency_encode,
    lp_error,
    rate_encode,
)
from snnequiv.core import DomainError, ShapeMismatch

INF = math.inf


class TestLatency:
    def test_examples(self):
        assert latency_encode((0, 0.5, 1), 10) == [(0,), (5,), (10,)]
        assert latency_encode((), 10) == []
        assert latency_encode((0.33,), 100) == [(33,)]

    def test_half_rounds_up(self):
        assert latency_encode((0.25,), 10) == [(3,)]

    @pytest.mark.parametrize("bad", [-0.1, 1.01])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            latency_encode((bad,), 10)

    @given(st.lists(st.integers(0, 50), max_size=5))
    def test_round_trip_on_grid(self, steps):
        x = [s / 50 for s in steps]
        assert latency_decode(latency_encode(x, 50)) == [float(s) for s in steps]


class TestRate:
    def test_examples(self):
        assert rate_encode((0.5,), 8) == [(2, 4, 6, 8)]
        assert rate_encode((0,), 20) == [()]
        assert rate_encode((1,), 3) == [(1, 2, 3)]

    def test_domain(self):
        with pytest.raises(DomainError):
            rate_encode((2.0,), 5)

    @given(st.floats(0.01, 1.0), st.integers(1, 200))
    def test_count_tracks_rate(self, x, h):
        (train,) = rate_encode((x,), h)
        assert abs(len(train) - x * h) <= 1
        assert all(0 < t <= h for t in train)


class TestDecoders:
    def test_examples(self):
        assert latency_decode([(3, 5), ()], 1.0) == [3, INF]
        assert count_decode([(3, 5), ()]) == [2, 0]
        assert latency_decode([(), ()]) == [INF, INF]
        assert count_decode([(), ()]) == [0, 0]
        assert latency_decode([(0,)]) == [0]

    def test_dt(self):
        assert latency_decode([(4,)], 0.5) == [2.0]

    def test_first_spike(self):
        assert first_spike_decode([(2, 7), ()]) == [2, INF]

    def test_registry(self):
        assert set(DECODERS) == {"latency", "count", "first-spike"}
        assert DECODERS["count"]([(1, 2)], 1.0) == [2.0]


class TestLpError:
    def test_identical(self):
        a = [[1.0, INF], [2.0, 3.0]]
        for p in (1, 2, 0.5, INF):
            assert lp_error(a, a, p) == 0

    def test_scalar_samples(self):
        assert lp_error([0, 0], [3, 4], 2) == pytest.approx(3.53553, abs=1e-5)
        assert lp_error([0, 0], [3, 4], INF) == 4
        assert lp_error([0, 0], [3, 4], 1) == 3.5

    def test_per_sample_norm(self):
        # one sample, two coordinates: plain p-norm
        assert lp_error([[0, 0]], [[3, 4]], 2) == 5

    def test_infinite_sentinel(self):
        assert lp_error([[INF]], [[2.0]], 1) == INF
        assert lp_error([[INF]], [[2.0]], INF) == INF

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            lp_error([[1, 2]], [[1, 2, 3]], 2)
        with pytest.raises(ShapeMismatch):
            lp_error([], [], 2)

    def test_bad_p(self):
        with pytest.raises(DomainError):
            lp_error([1], [2], 0)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=8),
           st.lists(st.floats(-100, 100), min_size=1, max_size=8))
    def test_symmetric_and_monotone_in_p(self, a, b):
        n = min(len(a), len(b))
        a, b = [[v] for v in a[:n]], [[v] for v in b[:n]]
        assert lp_error(a, b, 2) == lp_error(b, a, 2)
        assert lp_error(a, b, 1) <= lp_error(a, b, 2) + 1e-9 <= lp_error(a, b, INF) + 2e-9
