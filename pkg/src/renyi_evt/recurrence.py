"""Exact B_n (union measure of exceedance sets) and the rescaled k-generalized Fibonacci numbers.

    F_n = 0 (n < 1),  F_1 = 1,  F_n = (beta - 1)(F_{n-1} + ... + F_{n-k})  (n >= 2)

    B_n = (n - 1)(beta - 1)/beta * u + u                       1 <= n <= k + 1
    B_{n+1} = B_n + (beta - 1)/beta * u * (1 - B_{n-k})        n >= k + 1

and ``P(M_n <= 1 - u) = 1 - B_n = beta**(1-n-k) / (beta - 1) * F_{n+k+1}``.
"""
from __future__ import annotations

from collections import deque
from fractions import Fraction

import numpy as np

from .config import DEFAULT_BUDGET, Budget, ConsistencyError, MapParams
from .measure import exceedance_union_measures

# past this many terms a table stops caching and streams with a k-term window
MEMO_LIMIT = 20_000


class FibTable:
    """Memoized F_n and B_n for one ``(beta, k)``.

    B_n is kept as the integer ``b_n = B_n * beta**(n+k-1)``, which turns the
    recursion into ``b_{n+1} = beta*b_n + (beta-1)(beta**(n-1) - b_{n-k})``.
    Not safe for concurrent mutation; use one table per worker.
    """

    def __init__(self, params: MapParams, memo_limit: int = MEMO_LIMIT):
        self.params = params
        self.memo_limit = memo_limit
        self._f = [0, 1]  # index 0 is the F_0 = 0 sentinel
        self._b = [None, 1]  # b_1 = u * beta**k = 1

    # -- Fibonacci side -----------------------------------------------
    def fib(self, n: int) -> int:
        if n < 1:
            return 0
        if n < len(self._f):
            return self._f[n]
        if n <= self.memo_limit:
            self._extend_f(n)
            return self._f[n]
        return self._stream_f(n)

    def _extend_f(self, n: int) -> None:
        beta, k = self.params.beta, self.params.k
        f = self._f
        window = sum(f[max(1, len(f) - k):])
        while len(f) <= n:
            m = len(f)
            val = (beta - 1) * window
            f.append(val)
            window += val
            if m - k >= 1:
                window -= f[m - k]

    def _stream_f(self, n: int) -> int:
        beta, k = self.params.beta, self.params.k
        if len(self._f) <= self.memo_limit:
            self._extend_f(self.memo_limit)
        top = len(self._f) - 1
        win = deque(self._f[top - k + 1:top + 1] if top >= k else [0] * (k - top) + self._f[1:], maxlen=k)
        s = sum(win)
        val = self._f[top]
        for _ in range(top + 1, n + 1):
            val = (beta - 1) * s
            s += val - win[0]
            win.append(val)
        return val

    def fibs(self, n_max: int) -> list[int]:
        """``[F_1, ..., F_{n_max}]``."""
        return [self.fib(n) for n in range(1, n_max + 1)]

    # -- Haiman side --------------------------------------------------
    def _b_linear(self, n: int) -> int:
        beta = self.params.beta
        if n == 1:
            return 1
        return beta ** (n - 2) * ((n - 1) * (beta - 1) + beta)

    def b_scaled(self, n: int) -> int:
        if n < 1:
            raise ValueError("B_n is defined for n >= 1")
        if n < len(self._b):
            return self._b[n]
        if n <= self.memo_limit:
            self._extend_b(n)
            return self._b[n]
        return self._stream_b(n)

    def _extend_b(self, n: int) -> None:
        beta, k = self.params.beta, self.params.k
        b = self._b
        while len(b) <= n:
            m = len(b)
            if m <= k + 1:
                b.append(self._b_linear(m))
            else:
                p = m - 1  # b_{p+1} from b_p and b_{p-k}
                b.append(beta * b[p] + (beta - 1) * (beta ** (p - 1) - b[p - k]))

    def _stream_b(self, n: int) -> int:
        beta, k = self.params.beta, self.params.k
        if len(self._b) <= self.memo_limit:
            self._extend_b(self.memo_limit)
        top = len(self._b) - 1
        # hold b_{p-k} .. b_p
        win = deque(self._b[top - k:top + 1], maxlen=k + 1)
        pw = beta ** (top - 1)
        for p in range(top, n):
            nxt = beta * win[-1] + (beta - 1) * (pw - win[0])
            win.append(nxt)
            pw *= beta
        return win[-1]

    def haiman_b(self, n: int) -> Fraction:
        p = self.params
        return Fraction(self.b_scaled(n), p.beta ** (n + p.k - 1))

    def max_prob(self, n: int) -> Fraction:
        """``P(M_n <= 1 - beta**-k)`` from ``F_{n+k+1}``."""
        if n < 1:
            raise ValueError("n must be >= 1")
        p = self.params
        return Fraction(self.fib(n + p.k + 1), (p.beta - 1) * p.beta ** (n + p.k - 1))


_tables: dict[MapParams, FibTable] = {}


def table(params: MapParams) -> FibTable:
    """Process-wide shared table for ``params`` (single-threaded use)."""
    t = _tables.get(params)
    if t is None:
        t = _tables[params] = FibTable(params)
    return t


def haiman_b(params: MapParams, n: int) -> Fraction:
    return table(params).haiman_b(n)


def fib(params: MapParams, n: int) -> int:
    return table(params).fib(n)


def max_prob_via_fib(params: MapParams, n: int) -> Fraction:
    return table(params).max_prob(n)


def fib_from_measure(params: MapParams, n: int, budget: Budget = DEFAULT_BUDGET) -> int:
    """F_n recovered from interval-algebra values of B_n and B_{n-1}."""
    if n < 2:
        raise ValueError("fib_from_measure needs n >= 2")
    bs = exceedance_union_measures(params, n, budget)
    return fib_from_union_measures(params, bs)[n - 2]


def fib_from_union_measures(params: MapParams, bs: list[Fraction]) -> list[int]:
    """``[F_2, ..., F_N]`` from ``[B_1, ..., B_N]``; each quotient must be an integer."""
    out = []
    for n in range(2, len(bs) + 1):
        q = (bs[n - 1] - bs[n - 2]) * params.beta ** (n - 1) / params.u
        if q.denominator != 1:
            raise ConsistencyError(f"F_{n} from interval measures is not an integer: {q}")
        out.append(q.numerator)
    return out


def brute_force_prob(params: MapParams, n: int, budget: Budget = DEFAULT_BUDGET, chunk: int = 1 << 20) -> Fraction:
    """``P(M_n <= 1 - beta**-k)`` by enumerating every base-beta digit string of length n+k-1.

    ``X_i > 1 - beta**-k`` exactly when digits ``i+1..i+k`` all equal ``beta - 1``,
    so the event is "no run of k top digits anywhere in the string".
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    beta, k = params.beta, params.k
    length = n + k - 1
    total = beta**length
    budget.check_strings(total, f"digit strings of length {length}")
    powers = [beta ** (length - 1 - p) for p in range(length)]
    good = 0
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        run = np.zeros(codes.shape, dtype=np.int16)
        hit = np.zeros(codes.shape, dtype=bool)
        for pw in powers:
            top = (codes // pw) % beta == beta - 1
            run = np.where(top, run + 1, 0)
            hit |= run >= k
        good += int(np.count_nonzero(~hit))
    return Fraction(good, total)
