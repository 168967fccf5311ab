"""Keyed edge-flip watermarking: key generation, marking, and identification.

A key is a list of rank pairs over the label-sorted high and medium vertices.
Marking resamples the edges at the key positions (erasing the original
membership) and records the drawn bits as the copy's id; identification
recovers the vertex ranks of a suspect graph by approximate isomorphism,
re-reads the bits at the key positions, and returns the closest known id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Protocol, Sequence

import numpy as np

from ._seeds import python_rng
from .errors import (
    KeygenInfeasibleError,
    LabelingFailure,
    MatchingFailure,
    ParameterError,
    ValidationError,
)
from .graph import Graph
from .models import ErdosRenyiParams, PowerLawParams, edge_probability
from .separation import LabelSet, SeparationThresholds, label

KEYGEN_RETRY_BUDGET_FACTOR = 100
KEYGEN_RESTARTS = 10


@dataclass(frozen=True)
class MarkKey:
    """Ordered rank pairs (1-based, u < v) with a per-endpoint cap of t."""

    ell: int
    n: int
    t: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.ell != len(self.pairs):
            raise ValidationError("key length does not match the pair list")
        seen: dict[int, int] = {}
        previous: set[tuple[int, int]] = set()
        for u, v in self.pairs:
            if not 1 <= u < v:
                raise ValidationError(f"rank pair ({u}, {v}) is not canonical 1-based")
            if (u, v) in previous:
                raise ValidationError(f"rank pair ({u}, {v}) repeats")
            previous.add((u, v))
            for e in (u, v):
                seen[e] = seen.get(e, 0) + 1
                if seen[e] > self.t:
                    raise ValidationError(f"rank {e} appears in more than t={self.t} pairs")

    def max_rank(self) -> int:
        return max(max(p) for p in self.pairs) if self.pairs else 0

    def to_text(self) -> str:
        lines = [f"{self.ell} {self.n} {self.t}"]
        lines += [f"{u} {v}" for u, v in self.pairs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MarkKey":
        rows = [line.split() for line in text.splitlines() if line.strip()]
        if not rows or len(rows[0]) != 3:
            raise ValidationError("key file must start with 'ell n t'")
        ell, n, t = (int(x) for x in rows[0])
        pairs = tuple((int(u), int(v)) for u, v in rows[1:])
        return cls(ell=ell, n=n, t=t, pairs=pairs)


@dataclass(frozen=True)
class WatermarkId:
    """One copy's identifier: a string of '0'/'1' of the key length."""

    bits: str

    def __post_init__(self):
        if not all(c in "01" for c in self.bits):
            raise ValidationError("id bits must be '0'/'1' characters")

    def __len__(self) -> int:
        return len(self.bits)

    def as_int(self) -> int:
        return int(self.bits, 2) if self.bits else 0


@dataclass(frozen=True)
class MarkedCopy:
    id: WatermarkId
    graph: Graph
    flips: int  # key positions whose drawn bit differed from the original edge


def hamming(a: WatermarkId | str, b: WatermarkId | str) -> int:
    """Number of differing positions between two equal-length bit strings."""
    sa = a.bits if isinstance(a, WatermarkId) else a
    sb = b.bits if isinstance(b, WatermarkId) else b
    if len(sa) != len(sb):
        raise ValidationError(f"length mismatch ({len(sa)} vs {len(sb)})")
    if not sa:
        return 0
    return (int(sa, 2) ^ int(sb, 2)).bit_count()


def write_id(wid: WatermarkId, stream: IO[str]) -> None:
    stream.write(wid.bits + "\n")


def read_ids(stream: IO[str]) -> list[WatermarkId]:
    """Read one id per line; the single-id file is the one-line case."""
    return [WatermarkId(line.strip()) for line in stream if line.strip()]


# -- key generation -----------------------------------------------------------


def keygen(ell: int, n: int, x: int, t: int, seed: int) -> MarkKey:
    """Sample ell distinct rank pairs with no endpoint used more than t times.

    Pairs are drawn uniformly over the currently valid choices (endpoints
    with remaining capacity, pair not yet chosen), which completes perfect
    matchings that plain rejection against the full pair set cannot reach
    within any reasonable budget.
    """
    if x < 2:
        raise KeygenInfeasibleError("need at least two rankable vertices")
    if t < 1 or ell < 1:
        raise KeygenInfeasibleError("need t >= 1 and ell >= 1")
    if 2 * ell > x * t:
        raise KeygenInfeasibleError(
            f"ell={ell} exceeds the endpoint capacity x*t/2 = {x * t / 2:g}"
        )
    if ell > x * (x - 1) // 2:
        raise KeygenInfeasibleError(f"ell={ell} exceeds the number of distinct pairs")
    rng = python_rng(seed, "keygen")
    for _ in range(KEYGEN_RESTARTS):
        budget = KEYGEN_RETRY_BUDGET_FACTOR * ell
        free = list(range(1, x + 1))
        capacity = {r: t for r in free}
        chosen: list[tuple[int, int]] = []
        chosen_set: set[tuple[int, int]] = set()
        failed = False
        while len(chosen) < ell:
            if len(free) < 2:
                failed = True
                break
            i = rng.randrange(len(free))
            j = rng.randrange(len(free) - 1)
            if j >= i:
                j += 1
            u, v = free[i], free[j]
            pair = (u, v) if u < v else (v, u)
            if pair in chosen_set:
                budget -= 1
                if budget <= 0:
                    failed = True
                    break
                continue
            chosen.append(pair)
            chosen_set.add(pair)
            for e in pair:
                capacity[e] -= 1
            # Sweep spent endpoints out of the free list.
            if capacity[pair[0]] == 0 or capacity[pair[1]] == 0:
                free = [r for r in free if capacity[r] > 0]
        if not failed:
            return MarkKey(ell=ell, n=n, t=t, pairs=tuple(chosen))
    raise KeygenInfeasibleError(
        f"could not place ell={ell} pairs over x={x} ranks with t={t} "
        f"after {KEYGEN_RESTARTS} restarts"
    )


# -- resampling sources ---------------------------------------------------------


class ResampleSource(Protocol):
    def bit_probability(self, u_rank: int, v_rank: int) -> float: ...


@dataclass(frozen=True)
class ConstantResample:
    """Fixed bit probability; 0.5 reproduces the experimental setting."""

    p: float = 0.5

    def bit_probability(self, u_rank: int, v_rank: int) -> float:
        return self.p


@dataclass(frozen=True)
class ModelResample:
    """Resample from the source distribution the graph was drawn from.

    Ranks map to model positions by degree rank: rank r corresponds to the
    r-th heaviest vertex, i.e. real index i0 + (r - 1) in the power-law
    model; the uniform model is rank-independent.
    """

    params: ErdosRenyiParams | PowerLawParams

    def bit_probability(self, u_rank: int, v_rank: int) -> float:
        if isinstance(self.params, ErdosRenyiParams):
            return self.params.p
        hi = self.params.i0 + self.params.n
        i = min(self.params.i0 + (u_rank - 1), hi)
        j = min(self.params.i0 + (v_rank - 1), hi)
        return edge_probability(self.params, i, j)


# -- marking -------------------------------------------------------------------


def mark(
    key: MarkKey,
    g: Graph,
    labels: LabelSet,
    seed: int,
    resample: ResampleSource = ConstantResample(0.5),
) -> MarkedCopy:
    """Produce one marked copy and its id.

    The id bit for key pair j is drawn with the resampling probability of
    that pair; bit 1 forces the mapped edge present, bit 0 forces it absent.
    Only key positions can differ from ``g``.
    """
    order = labels.mark_order()
    if key.max_rank() > len(order):
        raise ValidationError(
            f"key rank {key.max_rank()} exceeds the {len(order)} labeled vertices"
        )
    rng = python_rng(seed, "mark")
    bits = "".join(
        "1" if rng.random() < resample.bit_probability(u, v) else "0"
        for u, v in key.pairs
    )
    mapped = [(order[u - 1], order[v - 1]) for u, v in key.pairs]
    before = g.has_pairs(mapped)
    assignments = [(pair, bit == "1") for pair, bit in zip(mapped, bits)]
    marked = g.with_edges_set(assignments)
    flips = int(sum(1 for was, bit in zip(before, bits) if bool(was) != (bit == "1")))
    return MarkedCopy(id=WatermarkId(bits), graph=marked, flips=flips)


# -- approximate isomorphism -----------------------------------------------------


def _second_order_distance_matrix(
    g_high: Sequence, h_high: Sequence
) -> np.ndarray:
    """Pairwise label distance |deg_a - deg_b| + L1 over the common prefix.

    The sorted neighbor-degree lists are compared only over the shorter
    length; extra entries are charged through the degree term alone, so a
    single incident flip costs a few units instead of a whole entry.
    """
    max_len = max(
        [len(a.neighbor_degrees or ()) for a in g_high]
        + [len(b.neighbor_degrees or ()) for b in h_high]
        + [1]
    )

    def padded(entries):
        mat = np.zeros((len(entries), max_len), dtype=np.int64)
        lengths = np.zeros(len(entries), dtype=np.int64)
        for i, e in enumerate(entries):
            ndl = e.neighbor_degrees or ()
            mat[i, : len(ndl)] = ndl
            lengths[i] = len(ndl)
        return mat, lengths

    a, len_a = padded(g_high)
    b, len_b = padded(h_high)
    deg_a = np.array([e.degree for e in g_high], dtype=np.int64)
    deg_b = np.array([e.degree for e in h_high], dtype=np.int64)
    cols = np.arange(len(h_high))
    out = np.empty((len(g_high), len(h_high)), dtype=np.int64)
    for i in range(len(g_high)):
        cum = np.cumsum(np.abs(a[i][None, :] - b), axis=1)
        prefix = np.minimum(len_a[i], len_b)
        row = np.where(prefix > 0, cum[cols, np.maximum(prefix - 1, 0)], 0)
        out[i] = row
    out += np.abs(deg_a[:, None] - deg_b[None, :])
    return out


def _greedy_assign(dist: np.ndarray) -> list[int]:
    """Globally greedy min-distance assignment; ties fall to label order."""
    rows, cols = dist.shape
    order = np.lexsort((
        np.tile(np.arange(cols), rows),
        np.repeat(np.arange(rows), cols),
        dist.ravel(),
    ))
    match = [-1] * rows
    taken = [False] * cols
    assigned = 0
    for flat in order:
        i, j = divmod(int(flat), cols)
        if match[i] == -1 and not taken[j]:
            match[i] = j
            taken[j] = True
            assigned += 1
            if assigned == min(rows, cols):
                break
    return match


def _vectors_over(g: Graph, vertices: Sequence[int], columns: Sequence[int]) -> list[int]:
    pairs = [(v, k) for v in vertices for k in columns]
    member = g.has_pairs(pairs) if pairs else np.zeros(0, dtype=bool)
    width = len(columns)
    out = []
    for i in range(len(vertices)):
        bits = 0
        for b in member[i * width:(i + 1) * width]:
            bits = (bits << 1) | int(b)
        out.append(bits)
    return out


def approximate_isomorphism(
    g: Graph,
    h: Graph,
    thresholds: SeparationThresholds,
    mode: str = "strict",
    labels_g: LabelSet | None = None,
    labels_h: LabelSet | None = None,
) -> dict[int, int]:
    """Map g's high and medium vertices onto h's.

    Strict mode matches high vertices rank-to-rank and each medium vertex to
    the minimum-Hamming medium vector in h, failing if labeling fails or any
    h vertex is matched twice.  Relaxed mode matches high vertices greedily
    by nearest (degree, neighbor-degree list) label, re-reads h's medium
    vectors against the matched high columns, and resolves medium conflicts
    greedily by ascending Hamming distance.
    """
    labels_g = labels_g or label(g, thresholds, mode)
    labels_h = labels_h or label(h, thresholds, mode)
    mapping: dict[int, int] = {}

    if mode == "strict":
        for a, b in zip(labels_g.high, labels_h.high):
            mapping[a.vertex] = b.vertex
        used: set[int] = set()
        h_bits = [m.bits for m in labels_h.medium]
        for gm in labels_g.medium:
            best_j, best_dist = -1, None
            for j, hb in enumerate(h_bits):
                dist = (gm.bits ^ hb).bit_count()
                if best_dist is None or dist < best_dist:
                    best_j, best_dist = j, dist
            target = labels_h.medium[best_j].vertex
            if target in used:
                raise MatchingFailure(
                    f"vertex {target} matched more than once during medium matching"
                )
            used.add(target)
            mapping[gm.vertex] = target
        return mapping

    # Relaxed: nearest second-order labels for high vertices.
    dist_high = _second_order_distance_matrix(labels_g.high, labels_h.high)
    high_match = _greedy_assign(dist_high)
    matched_high = []
    for i, a in enumerate(labels_g.high):
        target = labels_h.high[high_match[i]].vertex
        mapping[a.vertex] = target
        matched_high.append(target)

    # Medium vectors on the h side are read against the matched high columns
    # so that bit i means adjacency to the image of g's rank-i high vertex.
    g_bits = [m.bits for m in labels_g.medium]
    h_vertices = [m.vertex for m in labels_h.medium]
    h_bits = _vectors_over(h, h_vertices, matched_high)
    if g_bits and h_bits:
        xor_counts = np.empty((len(g_bits), len(h_bits)), dtype=np.int64)
        for i, gb in enumerate(g_bits):
            xor_counts[i] = [(gb ^ hb).bit_count() for hb in h_bits]
        med_match = _greedy_assign(xor_counts)
        for i, gm in enumerate(labels_g.medium):
            if med_match[i] >= 0:
                mapping[gm.vertex] = h_vertices[med_match[i]]
    return mapping


# -- identification ---------------------------------------------------------------


@dataclass(frozen=True)
class IdentificationResult:
    """Outcome of identification; ``matched_index`` is None on failure."""

    matched_index: int | None
    matched_id: WatermarkId | None
    extracted: str
    distance: int | None
    failure: str | None = None

    @property
    def bottom(self) -> bool:
        return self.matched_index is None


def identify(
    key: MarkKey,
    g: Graph,
    ids: Sequence[WatermarkId],
    suspect: Graph,
    thresholds: SeparationThresholds,
    mode: str = "strict",
    labels_g: LabelSet | None = None,
    max_distance: int | None = None,
) -> IdentificationResult:
    """Extract the suspect's bits at the key positions and return the closest id.

    Returns a failure result (the bottom outcome) when labeling or matching
    fails, or when the suspect has a different vertex count.  By default the
    closest id wins no matter how far it is; ``max_distance`` optionally turns
    distant matches into failures.
    """
    if not ids:
        raise ValidationError("need at least one candidate id")
    if any(len(i) != key.ell for i in ids):
        raise ValidationError("all candidate ids must have the key length")
    if suspect.n != g.n:
        return IdentificationResult(None, None, "", None, failure="size-mismatch")
    try:
        labels_g = labels_g or label(g, thresholds, mode)
        mapping = approximate_isomorphism(
            g, suspect, thresholds, mode, labels_g=labels_g
        )
    except (LabelingFailure, MatchingFailure) as exc:
        return IdentificationResult(None, None, "", None, failure=str(exc))
    order = labels_g.mark_order()
    if key.max_rank() > len(order):
        raise ValidationError(
            f"key rank {key.max_rank()} exceeds the {len(order)} labeled vertices"
        )
    try:
        mapped = [(mapping[order[u - 1]], mapping[order[v - 1]]) for u, v in key.pairs]
    except KeyError:
        return IdentificationResult(None, None, "", None, failure="unmatched-vertex")
    member = suspect.has_pairs(mapped)
    extracted = "".join("1" if b else "0" for b in member)
    best_index, best_dist = 0, None
    for i, candidate in enumerate(ids):
        dist = hamming(extracted, candidate.bits)
        if best_dist is None or dist < best_dist:
            best_index, best_dist = i, dist
    if max_distance is not None and best_dist is not None and best_dist > max_distance:
        return IdentificationResult(None, None, extracted, best_dist, failure="beyond-max-distance")
    return IdentificationResult(
        matched_index=best_index,
        matched_id=ids[best_index],
        extracted=extracted,
        distance=best_dist,
    )
