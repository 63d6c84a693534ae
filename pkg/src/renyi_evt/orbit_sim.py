"""Monte Carlo orbits of x -> beta*x mod 1 represented as base-beta digit strings.

The map shifts the base-beta expansion by one digit, so ``X_i > 1 - beta**-k``
exactly when digits ``d_{i+1} .. d_{i+k}`` all equal ``beta - 1``. Sampling
X_0 ~ U(0, 1) is sampling i.i.d. uniform digits, and no floating-point
arithmetic on X is needed to decide exceedances.

Each chunk of samples draws from its own PCG64 substream keyed by
``(seed, stream_id, chunk_index)``; statistics are integer tallies, so merged
results do not depend on chunk order or worker count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import ceil, log2, sqrt

import numpy as np
from scipy import stats

from .config import MapParams

RNG_NAME = "numpy.random.PCG64"
UNIFORMITY_TAG = 1 << 32


def rng_identity() -> dict:
    return {"generator": RNG_NAME, "seeding": "SeedSequence(seed, spawn_key=(stream_id, chunk))", "numpy": np.__version__}


@dataclass(frozen=True)
class SimConfig:
    params: MapParams
    n: int
    samples: int
    seed: int = 0
    stream_id: int = 0
    chunk: int = 10_000

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("orbit length n must be >= 1")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.params.beta > 255:
            raise ValueError("simulation supports beta <= 255")

    def generator(self, chunk_index: int, tag: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, tag + chunk_index))
        return np.random.Generator(np.random.PCG64(ss))

    def chunks(self) -> list[tuple[int, int]]:
        return [(i, min(self.chunk, self.samples - i * self.chunk)) for i in range(ceil(self.samples / self.chunk))]


def draw_digits(config: SimConfig, chunk_index: int, rows: int, length: int, tag: int = 0) -> np.ndarray:
    rng = config.generator(chunk_index, tag)
    return rng.integers(0, config.params.beta, size=(rows, length), dtype=np.uint8)


def exceedances(digits: np.ndarray, beta: int, k: int, n: int) -> np.ndarray:
    """Boolean ``(rows, n)`` matrix of ``X_i > 1 - beta**-k`` for i = 0..n-1."""
    top = digits == beta - 1
    c = np.zeros((top.shape[0], top.shape[1] + 1), dtype=np.int32)
    np.cumsum(top, axis=1, out=c[:, 1:])
    return (c[:, k:k + n] - c[:, :n]) == k


@dataclass
class Tally:
    """Integer counts from a batch of orbits; merging is plain addition."""

    samples: int = 0
    no_exceedance: int = 0  # orbits with M_n <= 1 - beta**-k
    exceedances: int = 0
    truncated: int = 0  # runs still open at the end of the window
    histogram: dict[int, int] = field(default_factory=dict)  # complete run length -> count
    censored: dict[int, int] = field(default_factory=dict)  # observed length of cut-off runs -> count

    def merge(self, other: "Tally") -> "Tally":
        return Tally(
            self.samples + other.samples,
            self.no_exceedance + other.no_exceedance,
            self.exceedances + other.exceedances,
            self.truncated + other.truncated,
            _add_counts(self.histogram, other.histogram),
            _add_counts(self.censored, other.censored),
        )


def _add_counts(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out = dict(a)
    for q, c in b.items():
        out[q] = out.get(q, 0) + c
    return out


def _counts(values: np.ndarray) -> dict[int, int]:
    return {int(q): int(c) for q, c in enumerate(np.bincount(values)) if c}


def _tally_chunk(args) -> Tally:
    config, chunk_index, rows = args
    beta, k = config.params.beta, config.params.k
    n = config.n
    digits = draw_digits(config, chunk_index, rows, n + k - 1)
    exc = exceedances(digits, beta, k, n)
    padded = np.zeros((rows, n + 2), dtype=np.int8)
    padded[:, 1:-1] = exc
    d = np.diff(padded, axis=1)
    starts = np.nonzero(d == 1)
    ends = np.nonzero(d == -1)
    lengths = ends[1] - starts[1]
    # a run whose last exceedance is X_{n-1} has no observed terminating non-exceedance
    complete = ends[1] < n
    return Tally(
        samples=rows,
        no_exceedance=int(np.count_nonzero(~exc.any(axis=1))),
        exceedances=int(np.count_nonzero(exc)),
        truncated=int(np.count_nonzero(~complete)),
        histogram=_counts(lengths[complete]),
        censored=_counts(lengths[~complete]),
    )


def simulate(config: SimConfig, workers: int = 1) -> Tally:
    jobs = [(config, i, rows) for i, rows in config.chunks()]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_tally_chunk, jobs))
    else:
        parts = [_tally_chunk(j) for j in jobs]
    total = Tally()
    for p in parts:
        total = total.merge(p)
    return total


@dataclass
class MaxProbEstimate:
    estimate: float
    stderr: float
    count: int
    samples: int
    rng: dict

    def z_score(self, exact) -> float:
        return (self.estimate - float(exact)) / self.stderr if self.stderr > 0 else float("inf")


def empirical_max_prob(config: SimConfig, workers: int = 1, tally: Tally | None = None) -> MaxProbEstimate:
    """Fraction of sampled orbits with no exceedance among X_0..X_{n-1}, with binomial standard error."""
    if config.samples < 100:
        raise ValueError("empirical_max_prob needs samples >= 100")
    t = tally if tally is not None else simulate(config, workers)
    p = t.no_exceedance / t.samples
    return MaxProbEstimate(p, sqrt(p * (1 - p) / t.samples), t.no_exceedance, t.samples, rng_identity())


def geometric_law(beta: int, q: int) -> float:
    return (beta - 1) / beta**q


@dataclass
class EmpiricalStats:
    tally: Tally
    clusters: int
    mean_size: float
    mean_se: float
    theta_hat: float
    theta_se: float
    chi2: float
    chi2_dof: int
    chi2_p: float
    few_clusters: bool  # fewer than 1000 complete clusters observed
    rng: dict
    # 1 / (product-limit mean size): cut-off runs enter as "length >= observed"
    theta_km: float = float("nan")

    @property
    def probabilities(self) -> dict[int, float]:
        return {q: c / self.clusters for q, c in sorted(self.tally.histogram.items())}


def cluster_chi_square(histogram: dict[int, int], beta: int, min_expected: float = 5.0) -> tuple[float, int, float]:
    """Chi-square of cluster sizes against ``(beta-1)/beta**q``; the tail past the last well-populated bin is pooled."""
    total = sum(histogram.values())
    if total == 0:
        return float("nan"), 0, float("nan")
    q_last = 1
    while total * geometric_law(beta, q_last + 1) >= min_expected:
        q_last += 1
    observed = [histogram.get(q, 0) for q in range(1, q_last + 1)]
    observed.append(total - sum(observed))
    expected = [total * geometric_law(beta, q) for q in range(1, q_last + 1)]
    expected.append(total * beta ** (-q_last))
    res = stats.chisquare(observed, expected)
    return float(res.statistic), len(observed) - 1, float(res.pvalue)


def empirical_clusters(config: SimConfig, workers: int = 1, tally: Tally | None = None) -> EmpiricalStats:
    """Histogram of maximal exceedance runs; runs cut off by the end of the window are dropped and counted."""
    t = tally if tally is not None else simulate(config, workers)
    hist = t.histogram
    n_cl = sum(hist.values())
    if n_cl == 0:
        nan = float("nan")
        return EmpiricalStats(t, 0, nan, nan, nan, nan, nan, 0, nan, True, rng_identity())
    s1 = sum(q * c for q, c in hist.items())
    s2 = sum(q * q * c for q, c in hist.items())
    mean = s1 / n_cl
    var = max(s2 / n_cl - mean * mean, 0.0)
    mean_se = sqrt(var / n_cl)
    theta_hat = 1 / mean
    theta_se = mean_se / mean**2
    chi2, dof, p = cluster_chi_square(hist, config.params.beta)
    theta_km = 1 / product_limit_mean(hist, t.censored)
    return EmpiricalStats(t, n_cl, mean, mean_se, theta_hat, theta_se, chi2, dof, p, n_cl < 1000, rng_identity(), theta_km)


def product_limit_mean(complete: dict[int, int], censored: dict[int, int]) -> float:
    """Kaplan-Meier mean of a positive integer length from complete and right-censored runs.

    A run cut off after L observed exceedances is known to have length >= L, so
    it is at risk of ending at sizes 1..L-1 only; after the last
    observed size the survival curve is taken as zero.
    """
    q_top = max([*complete, *censored, 0])
    at_risk = sum(complete.values()) + sum(censored.values())
    surv = 1.0
    mean = 0.0
    for q in range(1, q_top + 1):
        mean += surv  # P(length >= q)
        at_risk -= censored.get(q, 0)  # whether these end at q is unobserved
        if at_risk == 0:
            break
        ended = complete.get(q, 0)
        surv *= 1 - ended / at_risk
        at_risk -= ended
    return mean


@dataclass
class UniformityResult:
    t: int
    bins: int
    statistic: float
    p_value: float
    passed: bool


def uniformity_check(config: SimConfig, times=(0, 5), alpha: float = 1e-3) -> list[UniformityResult]:
    """Chi-square of X_t against U(0,1) on ``beta*k`` equal bins, for each t in ``times``.

    X_t is rebuilt from the digits after position t, to double precision.
    """
    if config.samples < 10_000:
        raise ValueError("uniformity_check needs samples >= 10^4")
    beta, k = config.params.beta, config.params.k
    bins = beta * k
    m = ceil(53 / log2(beta))
    t_max = max(times)
    counts = {t: np.zeros(bins, dtype=np.int64) for t in times}
    for ci, rows in config.chunks():
        digits = draw_digits(config, ci, rows, t_max + m, tag=UNIFORMITY_TAG)
        for t in times:
            x = np.zeros(rows)
            for j in range(t + m - 1, t - 1, -1):
                x = (x + digits[:, j]) / beta
            idx = np.minimum((x * bins).astype(np.int64), bins - 1)
            counts[t] += np.bincount(idx, minlength=bins)
    out = []
    for t in times:
        res = stats.chisquare(counts[t])
        out.append(UniformityResult(t, bins, float(res.statistic), float(res.pvalue), bool(res.pvalue > alpha)))
    return out
