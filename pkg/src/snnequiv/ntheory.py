"""Divisor matrix, Möbius weight factors and square-free counting.

Everything here is exact integer arithmetic; floats only appear in the
square-free density bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

__all__ = [
    "SQUAREFREE_DENSITY",
    "DENSE_LIMIT",
    "DivisorMatrix",
    "AlphaVector",
    "BoundReport",
    "divisor_matrix",
    "divisor_pairs",
    "iter_alpha_substitution",
    "solve_alpha_substitution",
    "smallest_prime_factors",
    "mobius_table",
    "mobius_alpha",
    "squarefree_mask",
    "eta",
    "eta_table",
    "eta_mertens",
    "check_eta_bounds",
    "neuron_factor_bound",
]

SQUAREFREE_DENSITY = 6 / math.pi ** 2
DENSE_LIMIT = 2 ** 12


class DivisorMatrix:
    """N x N 0/1 matrix with ``M[i, j] = 1`` iff ``j`` divides ``i`` (1-indexed).

    Dense storage is only built on request and only up to ``DENSE_LIMIT``;
    products are always computed row-streaming from the divisor structure.
    """

    def __init__(self, N: int):
        if N < 1:
            raise ValueError("N must be at least 1")
        self.N = N
        self._dense: Optional[np.ndarray] = None

    def __getitem__(self, ij) -> int:
        i, j = ij
        if not (1 <= i <= self.N and 1 <= j <= self.N):
            raise IndexError(ij)
        return int(i % j == 0)

    def row(self, i: int) -> tuple[int, ...]:
        """Entries of row ``i`` as a 0/1 tuple."""
        cols = set(self.divisors(i))
        return tuple(int(j in cols) for j in range(1, self.N + 1))

    def divisors(self, i: int) -> list[int]:
        """Column indices of the ones in row ``i``."""
        if not 1 <= i <= self.N:
            raise IndexError(i)
        small = [d for d in range(1, math.isqrt(i) + 1) if i % d == 0]
        return sorted(set(small + [i // d for d in small]))

    def dense(self) -> np.ndarray:
        if self.N > DENSE_LIMIT:
            raise MemoryError(f"dense divisor matrix refused for N={self.N} > {DENSE_LIMIT}")
        if self._dense is None:
            i = np.arange(1, self.N + 1)
            self._dense = (i[:, None] % i[None, :] == 0).astype(np.int64)
        return self._dense

    def rows(self) -> list[str]:
        return ["".join(str(self[i, j]) for j in range(1, self.N + 1)) for i in range(1, self.N + 1)]

    def matvec(self, x) -> np.ndarray:
        """Exact ``M @ x`` for an integer vector, without dense storage."""
        x = np.asarray(x, dtype=np.int64).reshape(-1)
        if len(x) != self.N:
            raise ValueError("length mismatch")
        rows, cols = divisor_pairs(self.N)
        out = np.zeros(self.N + 1, dtype=np.int64)
        np.add.at(out, rows, x[cols - 1])
        return out[1:]


_PAIRS_CACHE = (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), 0)


def divisor_pairs(N: int) -> tuple[np.ndarray, np.ndarray]:
    """All (i, j) with j | i <= N, sorted by i: the ones of M, row by row."""
    global _PAIRS_CACHE
    rows, cols, size = _PAIRS_CACHE
    if size < N:
        size = max(N, 2 * size, 64)
        cs = [np.full(size // j, j, dtype=np.int64) for j in range(1, size + 1)]
        rs = [np.arange(j, size + 1, j, dtype=np.int64) for j in range(1, size + 1)]
        rows, cols = np.concatenate(rs), np.concatenate(cs)
        key = np.lexsort((cols, rows))
        rows, cols = rows[key], cols[key]
        _PAIRS_CACHE = (rows, cols, size)
    stop = np.searchsorted(rows, N, side="right")
    return rows[:stop], cols[:stop]


def divisor_matrix(N: int) -> DivisorMatrix:
    return DivisorMatrix(N)


class AlphaVector:
    """Weight factors alpha_1..alpha_N backed by a read-only int64 array."""

    __slots__ = ("array",)

    def __init__(self, values):
        arr = np.array(values, dtype=np.int64).reshape(-1)
        arr.flags.writeable = False
        self.array = arr

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(self.array.tolist())

    def __len__(self):
        return len(self.array)

    def __getitem__(self, n: int) -> int:
        """1-indexed access: ``alpha[1]`` is the first factor."""
        if not 1 <= n <= len(self.array):
            raise IndexError(n)
        return int(self.array[n - 1])

    def __eq__(self, other):
        if isinstance(other, AlphaVector):
            return np.array_equal(self.array, other.array)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"AlphaVector({self.values!r})"

    def support(self) -> list[int]:
        """Indices with a nonzero factor, in increasing order."""
        return (np.flatnonzero(self.array) + 1).tolist()


def iter_alpha_substitution() -> Iterator[int]:
    """Forward substitution on M alpha = e0, one component at a time.

    Row i of M only involves alpha_1..alpha_i, so the n-th value yielded is
    alpha_n for every N >= n.
    """
    alpha: list[int] = []
    n = 0
    while True:
        n += 1
        rhs = 1 if n == 1 else 0
        acc = 0
        for d in range(1, math.isqrt(n) + 1):
            if n % d == 0:
                if d < n:
                    acc += alpha[d - 1]
                e = n // d
                if e != d and e < n:
                    acc += alpha[e - 1]
        # diagonal entry is 1
        alpha.append(rhs - acc)
        yield alpha[-1]


def solve_alpha_substitution(N: int) -> AlphaVector:
    if N < 1:
        raise ValueError("N must be at least 1")
    it = iter_alpha_substitution()
    return AlphaVector([next(it) for _ in range(N)])


def smallest_prime_factors(N: int) -> np.ndarray:
    """``spf[n]`` for 0 <= n <= N, with spf[0] = 0 and spf[1] = 1."""
    spf = np.zeros(N + 1, dtype=np.int64)
    for p in range(2, math.isqrt(N) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p
    idx = np.arange(N + 1)
    unset = spf == 0
    spf[unset] = idx[unset]
    return spf


def mobius_table(N: int) -> np.ndarray:
    """mu(n) for 0 <= n <= N (mu(0) = 0), freshly sieved."""
    spf = smallest_prime_factors(N)
    x = np.arange(N + 1)
    squarefree = np.ones(N + 1, dtype=bool)
    omega = np.zeros(N + 1, dtype=np.int64)
    active = x > 1
    while active.any():
        p = spf[x[active]]
        rest = x[active] // p
        squarefree[np.flatnonzero(active)[rest % p == 0]] = False
        omega[active] += 1
        x[active] = rest
        active = x > 1
    mu = np.where(squarefree, 1 - 2 * (omega % 2), 0)
    mu[0] = 0
    return mu


_MU_CACHE = np.zeros(1, dtype=np.int64)


def mobius_alpha(N: int) -> AlphaVector:
    """Closed-form weight factors: 0 for non-square-free n, else (-1)^(#primes)."""
    global _MU_CACHE
    if N < 1:
        raise ValueError("N must be at least 1")
    if len(_MU_CACHE) <= N:
        _MU_CACHE = mobius_table(max(N, 2 * (len(_MU_CACHE) - 1), 64))
    return AlphaVector(_MU_CACHE[1:N + 1])


def squarefree_mask(N: int) -> np.ndarray:
    """Boolean mask over 0..N; index 0 is False."""
    mask = np.ones(N + 1, dtype=bool)
    mask[0] = False
    for p in range(2, math.isqrt(N) + 1):
        mask[p * p::p * p] = False
    return mask


def eta_table(N: int) -> np.ndarray:
    """``eta_table(N)[n]`` is the number of square-free integers in [1, n]."""
    return np.cumsum(squarefree_mask(N)).astype(np.int64)


def eta(N: int) -> int:
    if N < 0:
        raise ValueError("N must be non-negative")
    return int(squarefree_mask(N).sum()) if N else 0


def eta_mertens(N: int) -> int:
    """Square-free count via sum_{d <= sqrt N} mu(d) * floor(N / d^2).

    Independent of the sieve in ``eta``; used as a cross-check.
    """
    if N < 1:
        return 0
    r = math.isqrt(N)
    mu = mobius_alpha(r).values
    return sum(mu[d - 1] * (N // (d * d)) for d in range(1, r + 1))


@dataclass(frozen=True)
class BoundReport:
    n: int
    eta: int
    at_most_n: bool
    bound_all: float
    holds_all: bool
    bound_large: Optional[float]
    holds_large: Optional[bool]

    @property
    def slack_n(self) -> int:
        return self.n - self.eta

    @property
    def slack_all(self) -> float:
        return self.bound_all - self.eta

    @property
    def slack_large(self) -> Optional[float]:
        return None if self.bound_large is None else self.bound_large - self.eta

    @property
    def holds(self) -> bool:
        return self.at_most_n and self.holds_all and self.holds_large is not False


def check_eta_bounds(N: int, eta_value: Optional[int] = None) -> BoundReport:
    """Evaluate eta(N) <= N and the two density bounds.

    The second bound, with half the square-root term, is only claimed for
    N >= 8 and is reported as ``None`` below that.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    e = eta(N) if eta_value is None else int(eta_value)
    b1 = SQUAREFREE_DENSITY * N + math.sqrt(N)
    b2 = SQUAREFREE_DENSITY * N + 0.5 * math.sqrt(N) if N >= 8 else None
    return BoundReport(
        n=N, eta=e, at_most_n=e <= N,
        bound_all=b1, holds_all=e < b1,
        bound_large=b2, holds_large=None if b2 is None else e < b2,
    )


def neuron_factor_bound(ns: int) -> float:
    """Upper bound on eta(ns)/ns: min(1, 6/pi^2 + 1/sqrt(ns))."""
    return min(1.0, SQUAREFREE_DENSITY + 1 / math.sqrt(ns))
