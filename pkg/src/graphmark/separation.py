"""Degree-class thresholds, vertex labeling, and separation checking.

Two labeling modes are provided.  ``strict`` follows the scheme to the
letter: high-degree vertices must have pairwise-distinct degrees and
medium-degree vertices pairwise-distinct bit vectors of high adjacencies,
otherwise labeling fails.  ``relaxed`` is the experimental variant: high
vertices are keyed by (degree, sorted neighbor-degree list), collisions are
tolerated and reported, and labeling never fails.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kv import format_kv
from .errors import LabelingFailure, ParameterError, ThresholdInfeasibleError, ValidationError
from .graph import Graph
from .models import PowerLawParams

ER_EPS_MAX = 1.0 / 9.0


@dataclass(frozen=True)
class SeparationThresholds:
    """Degree-class sizes plus separation targets.

    ``h`` high-degree vertices are distinguished by degree; the next
    ``medium`` vertices by their bit vector of high adjacencies.  ``d`` is the
    required gap between consecutive high degrees, ``d_prime`` the required
    neighborhood distance between medium vertices.
    """

    kind: str
    h: int
    medium: int
    d: float
    d_prime: float
    analytic: bool = True
    h_raw: float | None = None
    medium_raw: float | None = None

    def __post_init__(self):
        if self.h < 1:
            raise ParameterError("need at least one high-degree vertex")
        if self.medium < 0:
            raise ParameterError("medium count must be non-negative")

    @property
    def x(self) -> int:
        """Total number of rankable (high + medium) vertices."""
        return self.h + self.medium


def er_thresholds(
    n: int,
    p: float,
    eps: float = 0.0,
    d: float = 3.0,
    log_factor: float = 3.0,
    h: int | None = None,
    medium: int | None = None,
) -> SeparationThresholds:
    """Thresholds for G(n, p): h = floor(n^((1-eps)/8)), everyone else medium.

    ``eps = 0`` is accepted as the limiting value so that e.g. n = 256 gives
    h = 2.  Explicit ``h``/``medium`` overrides replace the analytic values
    (experiments tune class sizes; the analytic h is tiny at desk scales).
    """
    if not 0.0 <= eps < ER_EPS_MAX:
        raise ParameterError(f"eps={eps} outside [0, 1/9)")
    if not 0.0 < p <= 0.5:
        raise ParameterError(f"p={p} outside (0, 1/2]")
    if log_factor < 3.0:
        raise ParameterError("log_factor must be >= 3")
    h_raw = n ** ((1.0 - eps) / 8.0)
    if h is None and medium is None:
        h_val = max(1, math.floor(h_raw))
        return SeparationThresholds(
            kind="er", h=h_val, medium=n - h_val, d=d,
            d_prime=log_factor * math.log(n), h_raw=h_raw,
        )
    if h is None or medium is None:
        raise ParameterError("override h and medium together")
    _check_override(h, medium, n)
    return SeparationThresholds(
        kind="er", h=h, medium=medium, d=d, d_prime=log_factor * math.log(n),
        analytic=False, h_raw=h_raw,
    )


def high_index_cutoff(params: PowerLawParams, eps1: float = 1.0, c1: float = 1.0) -> float:
    """Largest index whose degree concentrates tightly enough to rank."""
    if not 0.0 < eps1 <= 1.0:
        raise ParameterError(f"eps1={eps1} outside (0, 1]")
    if c1 <= 0.0:
        raise ParameterError("c1 must be positive")
    g = params.gamma
    base = params.c * eps1 ** 2 / (16.0 * (g - 1) ** 2 * c1 * math.log(params.n))
    return base ** ((g - 1) / (2 * g - 1))


def threshold_exponent(gamma: float) -> float:
    """Exponent of n in the medium-index cutoff: -(2g^2 - 8g + 5) / (2g - 1)."""
    return -(2 * gamma * gamma - 8 * gamma + 5) / (2 * gamma - 1)


def medium_index_cutoff(
    params: PowerLawParams,
    eps1: float = 1.0,
    c1: float = 1.0,
    eps2: float = 1.0,
    c2: float = 1.0,
) -> float:
    """Largest index still separated from its peers by high-neighborhoods."""
    if eps2 <= 0.0 or c2 <= 0.0:
        raise ParameterError("eps2 and c2 must be positive")
    g = params.gamma
    gamma_exp = threshold_exponent(g)
    k1 = ((g - 2) / (g - 1) ** 3 * params.w * eps1 ** 2 / (16.0 * c1)) ** ((g - 1) / (2 * g - 1))
    amplitude = params.k0 ** (g - 1) * k1 ** (g - 2)
    denom = c2 + 2.0 * gamma_exp + 2.0 * math.log(amplitude) + 2.0 * eps2
    if denom <= 0.0:
        # Only meaningful for large n; the constants assume log(amplitude) > 0.
        warnings.warn(
            f"medium-cutoff constant is non-positive ({denom:.4g}); "
            f"thresholds are not meaningful at these parameters",
            stacklevel=2,
        )
        return 0.0
    k2 = amplitude / denom ** (g - 1)
    return (
        k2
        * params.n ** gamma_exp
        * math.log(params.n) ** (-3.0 * (g - 1) ** 2 / (2 * g - 1))
    )


def plg_thresholds(
    params: PowerLawParams,
    eps1: float = 1.0,
    c1: float = 1.0,
    eps2: float = 1.0,
    c2: float = 1.0,
    h: int | None = None,
    medium: int | None = None,
) -> SeparationThresholds:
    """Power-law thresholds; analytic values only separate at extreme n.

    Without overrides this computes the index cutoffs and raises
    :class:`ThresholdInfeasibleError` when they cross (which they do at any
    desk scale; the asymptotic constants need n beyond ~1e16).  Experiments
    pass tuned ``h``/``medium`` overrides instead.
    """
    g = params.gamma
    h_raw = high_index_cutoff(params, eps1, c1)
    d = eps2 * params.n ** (1.0 / (2 * g - 1))
    d_prime = eps2 * math.log(params.n)
    if h is not None or medium is not None:
        if h is None or medium is None:
            raise ParameterError("override h and medium together")
        _check_override(h, medium, params.n)
        return SeparationThresholds(
            kind="plg", h=h, medium=medium, d=d, d_prime=d_prime,
            analytic=False, h_raw=h_raw,
        )
    m_raw = medium_index_cutoff(params, eps1, c1, eps2, c2)
    if h_raw <= params.i0:
        raise ThresholdInfeasibleError(
            f"high cutoff {h_raw:.4g} does not exceed the lowest index {params.i0:.4g} "
            f"(pass explicit h/medium overrides)"
        )
    if h_raw >= m_raw:
        raise ThresholdInfeasibleError(
            f"high cutoff {h_raw:.4g} >= medium cutoff {m_raw:.4g}; "
            f"no medium class exists at n={params.n} (pass explicit h/medium overrides)"
        )
    h_val = max(1, math.floor(h_raw))
    medium_val = min(params.n, math.floor(m_raw)) - h_val
    return SeparationThresholds(
        kind="plg", h=h_val, medium=medium_val, d=d, d_prime=d_prime,
        h_raw=h_raw, medium_raw=m_raw,
    )


def _check_override(h: int, medium: int, n: int) -> None:
    if h < 1 or medium < 0 or h + medium > n:
        raise ParameterError(f"override h={h}, medium={medium} invalid for n={n}")


# -- labeling ------------------------------------------------------------------


@dataclass(frozen=True)
class HighLabel:
    vertex: int
    rank: int
    degree: int
    neighbor_degrees: tuple[int, ...] | None = None


@dataclass(frozen=True)
class MediumLabel:
    vertex: int
    bits: int  # adjacency to high vertices, rank 0 at the most significant bit


@dataclass(frozen=True)
class LabelSet:
    mode: str
    width: int
    high: tuple[HighLabel, ...]
    medium: tuple[MediumLabel, ...]
    high_collisions: int = 0
    medium_collisions: int = 0

    @property
    def collision_free(self) -> bool:
        return self.high_collisions == 0 and self.medium_collisions == 0

    def mark_order(self) -> tuple[int, ...]:
        """Canonical rank order: high by rank, then medium by bit vector."""
        mediums = sorted(self.medium, key=lambda m: (m.bits, m.vertex))
        return tuple(hl.vertex for hl in self.high) + tuple(m.vertex for m in mediums)

    def bit_string(self, m: MediumLabel) -> str:
        return format(m.bits, f"0{self.width}b") if self.width else ""


def _ordered_candidates(g: Graph, count: int, mode: str) -> list[int]:
    """Vertices sorted by descending degree with mode-specific tie-breaks."""
    degrees = g.degrees
    if count > g.n:
        raise ValidationError(f"thresholds require {count} vertices, graph has {g.n}")
    base = np.lexsort((np.arange(g.n), -degrees))
    if mode == "strict" or count == 0:
        return [int(v) for v in base[:count]]
    # Relaxed ties are broken by neighbor-degree lists; only vertices at or
    # above the boundary degree can be affected, so lists stay local.
    cutoff = int(degrees[base[count - 1]])
    cand = np.flatnonzero(degrees >= cutoff)
    keyed = []
    for v in cand.tolist():
        ndl = np.sort(degrees[g.neighbors(v)])[::-1]
        keyed.append((-int(degrees[v]), tuple(int(-d) for d in ndl), v))
    keyed.sort()
    return [entry[2] for entry in keyed[:count]]


def _neighbor_degree_list(g: Graph, v: int) -> tuple[int, ...]:
    return tuple(int(d) for d in np.sort(g.degrees[g.neighbors(v)])[::-1])


def _medium_vectors(g: Graph, mediums: list[int], high: list[int]) -> list[int]:
    if not high:
        return [0 for _ in mediums]
    pairs = [(v, k) for v in mediums for k in high]
    member = g.has_pairs(pairs) if pairs else np.zeros(0, dtype=bool)
    h = len(high)
    vectors = []
    for i in range(len(mediums)):
        bits = 0
        row = member[i * h:(i + 1) * h]
        for b in row:
            bits = (bits << 1) | int(b)
        vectors.append(bits)
    return vectors


def label(g: Graph, thresholds: SeparationThresholds, mode: str = "strict") -> LabelSet:
    """Label the high and medium vertices of ``g``.

    Strict mode raises :class:`LabelingFailure` on a high-degree collision or
    a medium bit-vector collision.  Relaxed mode orders high vertices by
    (degree, neighbor-degree list, id), tolerates collisions, and reports
    their counts on the returned :class:`LabelSet`.
    """
    if mode not in ("strict", "relaxed"):
        raise ValidationError(f"unknown labeling mode {mode!r}")
    h, m = thresholds.h, thresholds.medium
    ordered = _ordered_candidates(g, h + m, mode)
    high_vertices = ordered[:h]
    medium_vertices = ordered[h:]
    degrees = g.degrees

    high_collisions = 0
    if mode == "strict":
        degs = [int(degrees[v]) for v in high_vertices]
        boundary = int(degrees[ordered[h]]) if m > 0 else (
            int(np.partition(degrees, -h - 1)[-h - 1]) if g.n > h else None
        )
        distinct = all(degs[i] > degs[i + 1] for i in range(len(degs) - 1))
        if not distinct or (boundary is not None and degs and degs[-1] <= boundary):
            raise LabelingFailure("high-degree collision: degrees of high vertices are not unique")
        high = tuple(
            HighLabel(vertex=v, rank=i, degree=degs[i]) for i, v in enumerate(high_vertices)
        )
    else:
        keys = []
        high = []
        for i, v in enumerate(high_vertices):
            ndl = _neighbor_degree_list(g, v)
            keys.append((int(degrees[v]), ndl))
            high.append(HighLabel(vertex=v, rank=i, degree=int(degrees[v]), neighbor_degrees=ndl))
        high_collisions = len(keys) - len(set(keys))
        high = tuple(high)

    vectors = _medium_vectors(g, medium_vertices, high_vertices)
    medium_collisions = len(vectors) - len(set(vectors))
    if mode == "strict" and medium_collisions:
        raise LabelingFailure("bit-vector collision: medium adjacency vectors are not unique")
    medium = tuple(
        MediumLabel(vertex=v, bits=bits) for v, bits in zip(medium_vertices, vectors)
    )
    return LabelSet(
        mode=mode, width=h, high=high, medium=medium,
        high_collisions=high_collisions, medium_collisions=medium_collisions,
    )


def tune_medium_count(g: Graph, h: int, mode: str = "relaxed", max_medium: int | None = None) -> int:
    """Largest medium prefix with collision-free bit vectors (given h).

    Mirrors how the experiments pick the medium class: walk vertices in label
    order after the top h and stop just before the first repeated vector.
    """
    limit = min(g.n - h, max_medium) if max_medium is not None else g.n - h
    if limit <= 0:
        return 0
    ordered = _ordered_candidates(g, h + limit, mode)
    vectors = _medium_vectors(g, ordered[h:], ordered[:h])
    seen: set[int] = set()
    for count, bits in enumerate(vectors):
        if bits in seen:
            return count
        seen.add(bits)
    return limit


# -- separation --------------------------------------------------------------


def neighborhood_distance(g: Graph, u: int, v: int, high_set) -> int:
    """Number of high vertices adjacent to exactly one of u and v."""
    if u == v:
        raise ValidationError("neighborhood distance needs two distinct vertices")
    nu = set(map(int, g.neighbors(u)))
    nv = set(map(int, g.neighbors(v)))
    return sum(1 for k in high_set if (k in nu) != (k in nv))


@dataclass(frozen=True)
class SeparationReport:
    separated: bool
    d: float
    d_prime: float
    min_degree_gap: int | None
    min_neighborhood_distance: int | None
    gap_witness: tuple[int, int] | None
    distance_witness: tuple[int, int] | None

    def to_text(self) -> str:
        return format_kv({
            "separated": str(self.separated).lower(),
            "d": f"{self.d:g}",
            "d_prime": f"{self.d_prime:g}",
            "min_degree_gap": "" if self.min_degree_gap is None else self.min_degree_gap,
            "min_neighborhood_distance": (
                "" if self.min_neighborhood_distance is None else self.min_neighborhood_distance
            ),
            "gap_witness": "" if self.gap_witness is None else f"{self.gap_witness[0]},{self.gap_witness[1]}",
            "distance_witness": (
                "" if self.distance_witness is None else f"{self.distance_witness[0]},{self.distance_witness[1]}"
            ),
        })


def check_separation(
    g: Graph,
    thresholds: SeparationThresholds,
    d: float | None = None,
    d_prime: float | None = None,
    mode: str = "relaxed",
    labels: LabelSet | None = None,
) -> SeparationReport:
    """Measure the separation witnesses and compare against (d, d').

    ``mode`` (or explicit ``labels``) controls which class selection is
    measured; relaxed never fails and is the default.
    """
    d = thresholds.d if d is None else d
    d_prime = thresholds.d_prime if d_prime is None else d_prime
    labels = labels or label(g, thresholds, mode=mode)

    min_gap: int | None = None
    gap_witness = None
    for a, b in zip(labels.high, labels.high[1:]):
        gap = a.degree - b.degree
        if min_gap is None or gap < min_gap:
            min_gap, gap_witness = gap, (a.vertex, b.vertex)

    min_nd: int | None = None
    nd_witness = None
    mediums = labels.medium
    for i in range(len(mediums)):
        for j in range(i + 1, len(mediums)):
            dist = (mediums[i].bits ^ mediums[j].bits).bit_count()
            if min_nd is None or dist < min_nd:
                min_nd, nd_witness = dist, (mediums[i].vertex, mediums[j].vertex)
        if min_nd == 0:
            break

    separated = (min_gap is None or min_gap >= d) and (min_nd is None or min_nd >= d_prime)
    return SeparationReport(
        separated=separated, d=d, d_prime=d_prime,
        min_degree_gap=min_gap, min_neighborhood_distance=min_nd,
        gap_witness=gap_witness, distance_witness=nd_witness,
    )
