import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from snnequiv.ntheory import (
    DENSE_LIMIT,
    SQUAREFREE_DENSITY,
    check_eta_bounds,
    divisor_matrix,
    eta,
    eta_mertens,
    eta_table,
    iter_alpha_substitution,
    mobius_alpha,
    mobius_table,
    neuron_factor_bound,
    smallest_prime_factors,
    solve_alpha_substitution,
)

SIX_ROWS = ["100000", "110000", "101000", "110100", "100010", "111001"]


def trial_division_mobius(n):
    """Independent oracle by factoring."""
    k, p = 0, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            k += 1
        p += 1
    if n > 1:
        k += 1
    return (-1) ** k


class TestDivisorMatrix:
    def test_six(self):
        assert divisor_matrix(6).rows() == SIX_ROWS

    def test_one(self):
        assert divisor_matrix(1).dense().tolist() == [[1]]

    def test_row_four(self):
        assert divisor_matrix(4).row(4) == (1, 1, 0, 1)
        assert divisor_matrix(12).divisors(12) == [1, 2, 3, 4, 6, 12]

    def test_lower_unit_triangular(self):
        M = divisor_matrix(40).dense()
        assert np.array_equal(M, np.tril(M))
        assert (np.diag(M) == 1).all()

    def test_entries(self):
        M = divisor_matrix(12)
        assert M[12, 4] == 1 and M[12, 5] == 0 and M[3, 6] == 0

    def test_matvec_agrees_with_dense(self):
        M = divisor_matrix(50)
        x = np.arange(1, 51, dtype=np.int64)
        assert np.array_equal(M.matvec(x), M.dense() @ x)

    def test_dense_limit(self):
        with pytest.raises(MemoryError):
            divisor_matrix(DENSE_LIMIT + 1).dense()


class TestAlpha:
    def test_substitution_six(self):
        assert solve_alpha_substitution(6).values == (1, -1, -1, 0, -1, 1)

    def test_substitution_ten(self):
        assert solve_alpha_substitution(10).values == (1, -1, -1, 0, -1, 1, -1, 0, 0, 1)

    def test_one(self):
        assert solve_alpha_substitution(1).values == (1,)
        assert mobius_alpha(1).values == (1,)

    def test_closed_form(self):
        a = mobius_alpha(30)
        assert a[4] == 0 and a[30] == -1 and a[1] == 1
        assert a == solve_alpha_substitution(30)

    def test_trial_division_oracle(self):
        a = mobius_alpha(2000)
        assert list(a.values) == [trial_division_mobius(n) for n in range(1, 2001)]

    def test_table_matches_cache(self):
        assert tuple(mobius_table(500)[1:].tolist()) == mobius_alpha(500).values

    def test_prefix_consistency(self):
        # the cache must not make small N depend on earlier large calls
        mobius_alpha(3000)
        assert mobius_alpha(7).values == (1, -1, -1, 0, -1, 1, -1)

    def test_generator_prefix(self):
        gen = iter_alpha_substitution()
        assert [next(gen) for _ in range(6)] == [1, -1, -1, 0, -1, 1]

    def test_read_only(self):
        with pytest.raises(ValueError):
            mobius_alpha(5).array[0] = 3

    @pytest.mark.parametrize("bad", [0, -3])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            mobius_alpha(bad)
        with pytest.raises(ValueError):
            divisor_matrix(bad)


@given(st.integers(1, 3000))
def test_residual_is_e0(n):
    r = divisor_matrix(n).matvec(mobius_alpha(n).array)
    assert r[0] == 1 and not r[1:].any()


def test_spf():
    spf = smallest_prime_factors(30)
    assert spf[12] == 2 and spf[25] == 5 and spf[29] == 29


class TestEta:
    @pytest.mark.parametrize("n,expected", [(0, 0), (1, 1), (6, 5), (8, 6), (100, 61)])
    def test_values(self, n, expected):
        assert eta(n) == expected
        assert eta_mertens(n) == expected

    def test_million(self):
        assert eta(10 ** 6) == 607926

    def test_table_against_mertens(self):
        table = eta_table(5000)
        for n in range(0, 5001, 37):
            assert table[n] == eta_mertens(n)

    @given(st.integers(1, 20000))
    def test_support_size(self, n):
        assert len(mobius_alpha(n).support()) == eta(n)


class TestBounds:
    def test_one(self):
        r = check_eta_bounds(1)
        assert r.eta == 1 and r.at_most_n and r.holds_all and r.holds
        assert r.bound_large is None

    def test_eight(self):
        r = check_eta_bounds(8)
        assert r.eta == 6
        assert r.bound_large == pytest.approx(6.278, abs=1e-3)
        assert r.holds_large and r.slack_large > 0

    def test_hundred_thousand(self):
        r = check_eta_bounds(10 ** 5)
        assert r.holds
        assert 0.60 <= r.eta / r.n <= 0.62

    def test_density_constant(self):
        assert SQUAREFREE_DENSITY == pytest.approx(6 / math.pi ** 2)
        assert SQUAREFREE_DENSITY == pytest.approx(0.607927, abs=1e-6)

    def test_factor_bound(self):
        assert neuron_factor_bound(1) == 1
        assert neuron_factor_bound(100) == pytest.approx(SQUAREFREE_DENSITY + 0.1)
        for n in range(1, 200):
            assert eta(n) <= neuron_factor_bound(n) * n + 1e-9
