"""Joint-degree-distribution metrics and power-law goodness of fit.

The joint degree series counts edges by the (sorted) degrees of their
endpoints; the deviation between two graphs is the Euclidean distance
between their series normalized by the number of distinct degree pairs in
the union of supports.  Fitting uses the continuous maximum-likelihood
exponent estimate, a KS-minimizing lower cutoff, and a semiparametric
bootstrap p-value.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from ._kv import format_kv
from ._seeds import numpy_rng
from .errors import ParameterError
from .graph import Graph

DEFAULT_BOOTSTRAP_RESAMPLES = 1000
MIN_BOOTSTRAP_RESAMPLES = 100
MIN_DISTINCT_FOR_CUTOFF = 10


def dk2_series(g: Graph) -> Counter:
    """Edge counts keyed by canonical endpoint-degree pairs (d1 <= d2)."""
    series: Counter = Counter()
    if g.num_edges == 0:
        return series
    deg = g.degrees
    edges = g.edge_array()
    d1 = deg[edges[:, 0]]
    d2 = deg[edges[:, 1]]
    lo = np.minimum(d1, d2)
    hi = np.maximum(d1, d2)
    scale = int(deg.max()) + 1
    keys, counts = np.unique(lo * scale + hi, return_counts=True)
    for key, count in zip(keys, counts):
        series[(int(key) // scale, int(key) % scale)] = int(count)
    if sum(series.values()) != g.num_edges:
        raise RuntimeError("degree-pair counts lost edges; series is corrupt")
    return series


def dk2_distance(a: Counter, b: Counter) -> float:
    """Euclidean distance between two series (a true metric on counts)."""
    keys = set(a) | set(b)
    return math.sqrt(sum((a.get(k, 0) - b.get(k, 0)) ** 2 for k in keys))


def dk2_deviation(a: Counter, b: Counter) -> float:
    """Distance normalized by the number of degree pairs in the union of supports.

    Symmetric and zero on identical series; the per-pair normalization means
    the triangle inequality only holds for :func:`dk2_distance`.
    """
    keys = set(a) | set(b)
    if not keys:
        return 0.0
    return dk2_distance(a, b) / len(keys)


def dk2_to_text(series: Counter) -> str:
    lines = [f"{k1} {k2} {count}" for (k1, k2), count in sorted(series.items())]
    return "\n".join(lines) + ("\n" if lines else "")


def dk2_from_text(text: str) -> Counter:
    series: Counter = Counter()
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        k1, k2, count = line.split()
        series[(int(k1), int(k2))] = int(count)
    return series


# -- power-law fitting -----------------------------------------------------------


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    xmin: float
    ks_stat: float
    p_value: float | None
    n_tail: int

    def to_text(self) -> str:
        return format_kv({
            "gamma": f"{self.gamma:.6g}",
            "xmin": f"{self.xmin:g}",
            "ks": f"{self.ks_stat:.6g}",
            "pvalue": "" if self.p_value is None else f"{self.p_value:.6g}",
            "ntail": self.n_tail,
        })


def fit_gamma(samples: Sequence[float], xmin: float) -> float:
    """Continuous MLE exponent over samples >= xmin: 1 + k / sum(ln(x/xmin))."""
    data = np.asarray(samples, dtype=np.float64)
    tail = data[data >= xmin]
    if tail.size < 2:
        raise ParameterError(f"need at least two samples >= xmin={xmin:g}")
    log_sum = float(np.log(tail / xmin).sum())
    if log_sum <= 0.0:
        raise ParameterError("all tail samples equal xmin; the estimator degenerates")
    return 1.0 + tail.size / log_sum


def _is_integral(values: np.ndarray) -> bool:
    return bool(values.size and np.all(np.equal(np.mod(values, 1), 0)))


def _tail_ks(tail_sorted: np.ndarray, gamma: float, xmin: float) -> float:
    """KS distance of a sorted tail against the fitted power law.

    Integer tails are treated as rounded measurements: the fitted CDF is
    evaluated at the upper half-lattice edge and compared once per distinct
    value (both CDFs are step functions jumping at the integers).  Continuous
    tails use the usual two-sided per-sample comparison.
    """
    m = tail_sorted.size
    if _is_integral(tail_sorted):
        values, counts = np.unique(tail_sorted, return_counts=True)
        empirical = np.cumsum(counts) / m
        fitted = 1.0 - ((values + 0.5) / xmin) ** (1.0 - gamma)
        return float(np.abs(empirical - fitted).max())
    fitted = 1.0 - (tail_sorted / xmin) ** (1.0 - gamma)
    upper = np.arange(1, m + 1) / m
    return float(np.maximum(np.abs(fitted - upper), np.abs(fitted - upper + 1.0 / m)).max())


def ks_statistic(samples: Sequence[float], gamma: float, xmin: float) -> float:
    """KS distance between the empirical tail CDF and the fitted power law."""
    tail = np.sort(np.asarray(samples, dtype=np.float64))
    tail = tail[tail >= xmin]
    if tail.size == 0:
        raise ParameterError("no samples at or above xmin")
    return _tail_ks(tail, gamma, xmin)


def select_xmin(samples: Sequence[float]) -> tuple[float, float]:
    """Cutoff minimizing the KS distance of the tail fit; ties take the smallest."""
    data = np.sort(np.asarray(samples, dtype=np.float64))
    distinct = np.unique(data)
    if distinct.size < MIN_DISTINCT_FOR_CUTOFF:
        raise ParameterError(
            f"need at least {MIN_DISTINCT_FOR_CUTOFF} distinct values, got {distinct.size}"
        )
    log_data = np.log(data)
    suffix_log = np.concatenate([np.cumsum(log_data[::-1])[::-1], [0.0]])
    best_xmin, best_ks = None, None
    for candidate in distinct[:-1]:
        start = int(np.searchsorted(data, candidate, side="left"))
        count = data.size - start
        log_sum = suffix_log[start] - count * math.log(candidate)
        if log_sum <= 0.0:
            continue
        gamma = 1.0 + count / log_sum
        ks = _tail_ks(data[start:], gamma, candidate)
        if best_ks is None or ks < best_ks:
            best_xmin, best_ks = float(candidate), ks
    if best_xmin is None:
        raise ParameterError("no viable cutoff candidate; data is degenerate")
    return best_xmin, best_ks


def sample_power_law_tail(gamma: float, xmin: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Continuous draws from the fitted tail law via inverse CDF."""
    u = rng.random(size)
    return xmin * (1.0 - u) ** (-1.0 / (gamma - 1.0))


def synthetic_degree_samples(gamma: float, xmin: float, size: int, seed: int) -> np.ndarray:
    """Integer-valued power-law samples (continuous draws rounded to ints)."""
    draws = sample_power_law_tail(gamma, xmin, size, numpy_rng(seed, "synthetic-degrees"))
    return np.rint(draws).astype(np.int64)


def bootstrap_pvalue(
    samples: Sequence[float],
    fit: PowerLawFit,
    resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    seed: int = 0,
) -> float:
    """Semiparametric bootstrap p-value for the power-law hypothesis.

    Each synthetic data set mixes fitted-tail draws (with probability
    n_tail/n) with resampled sub-cutoff observations, then goes through the
    same cutoff selection and fit as the original data; the p-value is the
    fraction of synthetic KS statistics exceeding the observed one.
    """
    if resamples < MIN_BOOTSTRAP_RESAMPLES:
        raise ParameterError(f"resamples must be >= {MIN_BOOTSTRAP_RESAMPLES}")
    data = np.asarray(samples, dtype=np.float64)
    head = data[data < fit.xmin]
    n = data.size
    p_tail = (n - head.size) / n
    integral = bool(np.all(np.equal(np.mod(data, 1), 0)))
    rng = numpy_rng(seed, "bootstrap")
    exceed = 0
    for _ in range(resamples):
        k_tail = int(rng.binomial(n, p_tail))
        tail_draws = sample_power_law_tail(fit.gamma, fit.xmin, k_tail, rng)
        if integral:
            # Keep synthetic data on the observed (integer) support.
            tail_draws = np.rint(tail_draws)
        parts = [tail_draws]
        if n - k_tail > 0:
            if head.size:
                parts.append(rng.choice(head, size=n - k_tail, replace=True))
            else:
                parts.append(sample_power_law_tail(fit.gamma, fit.xmin, n - k_tail, rng))
        synthetic = np.concatenate(parts)
        try:
            xmin_b, ks_b = select_xmin(synthetic)
        except ParameterError:
            try:
                gamma_b = fit_gamma(synthetic, fit.xmin)
                ks_b = ks_statistic(synthetic, gamma_b, fit.xmin)
            except ParameterError:
                exceed += 1  # degenerate resample counts as non-rejecting
                continue
        if ks_b > fit.ks_stat:
            exceed += 1
    return exceed / resamples


def fit_power_law(
    samples: Sequence[float],
    xmin: float | None = None,
    resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    seed: int = 0,
    skip_pvalue: bool = False,
) -> PowerLawFit:
    """Full fitting pipeline: cutoff selection, MLE exponent, bootstrap p-value."""
    data = np.asarray(samples, dtype=np.float64)
    data = data[data > 0]
    if data.size < 2:
        raise ParameterError("need at least two positive samples")
    if xmin is None:
        xmin, _ = select_xmin(data)
    gamma = fit_gamma(data, xmin)
    ks = ks_statistic(data, gamma, xmin)
    partial = PowerLawFit(
        gamma=gamma, xmin=float(xmin), ks_stat=ks, p_value=None,
        n_tail=int((data >= xmin).sum()),
    )
    if skip_pvalue:
        return partial
    p_value = bootstrap_pvalue(data, partial, resamples=resamples, seed=seed)
    return PowerLawFit(
        gamma=partial.gamma, xmin=partial.xmin, ks_stat=partial.ks_stat,
        p_value=p_value, n_tail=partial.n_tail,
    )
