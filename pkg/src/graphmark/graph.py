"""Undirected simple graphs: degrees, edge algebra, distances, edge-list I/O.

Graphs are immutable.  Edges live in one sorted ``int64`` array of flattened
pair keys (``u * n + v`` with ``u < v``), so memory stays linear in the edge
count and every bulk edge operation (toggle, overwrite, symmetric difference)
is a sorted-array merge.  Adjacency is materialised lazily as sorted neighbor
lists when degree-structure queries need it.
"""

from __future__ import annotations

import re
from itertools import permutations
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .errors import EdgeListParseError, ValidationError

# Exact distance search enumerates all n! vertex bijections.
EXACT_SEARCH_CAP = 8

_HEADER_RE = re.compile(r"#\s*nodes\s*[:=]\s*(\d+)", re.IGNORECASE)


def canonical_pair(u: int, v: int) -> tuple[int, int]:
    """Order a vertex pair as (min, max); self-loops are rejected."""
    if u == v:
        raise ValidationError(f"self-loop ({u}, {v}) is not a valid edge")
    return (u, v) if u < v else (v, u)


def _encode_pairs(n: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    """Canonicalize and flatten pairs to sorted unique int64 keys."""
    keys = []
    for u, v in pairs:
        if u == v:
            raise ValidationError(f"self-loop ({u}, {v}) is not a valid edge")
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"pair ({u}, {v}) out of range for n={n}")
        a, b = (u, v) if u < v else (v, u)
        keys.append(a * n + b)
    if not keys:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.asarray(keys, dtype=np.int64))


class Graph:
    """Immutable undirected simple graph on vertex ids ``0 .. n-1``."""

    __slots__ = ("n", "_keys", "_degrees", "_csr")

    def __init__(self, n: int, _keys: np.ndarray | None = None):
        if n < 0:
            raise ValidationError("vertex count must be non-negative")
        self.n = int(n)
        self._keys = _keys if _keys is not None else np.empty(0, dtype=np.int64)
        self._degrees: np.ndarray | None = None
        self._csr: tuple[np.ndarray, np.ndarray] | None = None

    # -- construction -------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph from a pair list; duplicates collapse silently."""
        return cls(n, _encode_pairs(n, edges))

    @classmethod
    def from_keys(cls, n: int, keys: np.ndarray) -> "Graph":
        """Adopt an already sorted, unique, canonical key array (trusted)."""
        return cls(n, np.asarray(keys, dtype=np.int64))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        u, v = np.triu_indices(n, k=1)
        return cls(n, (u.astype(np.int64) * n + v).astype(np.int64))

    # -- basic queries -------------------------------------------------

    @property
    def num_edges(self) -> int:
        return int(self._keys.size)

    @property
    def edge_keys(self) -> np.ndarray:
        """Sorted flattened edge keys (read-only view)."""
        return self._keys

    def edge_array(self) -> np.ndarray:
        """Edges as an (E, 2) array with u < v, sorted lexicographically."""
        out = np.empty((self._keys.size, 2), dtype=np.int64)
        if self.n:
            out[:, 0] = self._keys // self.n
            out[:, 1] = self._keys % self.n
        return out

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, v in self.edge_array():
            yield int(u), int(v)

    def has_edge(self, u: int, v: int) -> bool:
        a, b = canonical_pair(u, v)
        key = a * self.n + b
        i = np.searchsorted(self._keys, key)
        return bool(i < self._keys.size and self._keys[i] == key)

    def has_pairs(self, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
        """Vectorized membership test for vertex pairs."""
        keys = np.empty(len(pairs), dtype=np.int64)
        for i, (u, v) in enumerate(pairs):
            a, b = canonical_pair(u, v)
            keys[i] = a * self.n + b
        if self._keys.size == 0:
            return np.zeros(len(pairs), dtype=bool)
        idx = np.minimum(np.searchsorted(self._keys, keys), self._keys.size - 1)
        return self._keys[idx] == keys

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            ends = np.concatenate([self._keys // self.n, self._keys % self.n]) \
                if self.n and self._keys.size else np.empty(0, dtype=np.int64)
            self._degrees = np.bincount(ends, minlength=self.n).astype(np.int64)
        return self._degrees

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def _adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        # CSR-style: sorted neighbor lists per vertex, built once on demand.
        if self._csr is None:
            u = self._keys // self.n if self.n else np.empty(0, dtype=np.int64)
            v = self._keys % self.n if self.n else np.empty(0, dtype=np.int64)
            src = np.concatenate([u, v])
            dst = np.concatenate([v, u])
            order = np.lexsort((dst, src))
            starts = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=self.n), out=starts[1:])
            self._csr = (starts, dst[order])
        return self._csr

    def neighbors(self, v: int) -> np.ndarray:
        starts, flat = self._adjacency()
        return flat[starts[v]:starts[v + 1]]

    # -- edge algebra ---------------------------------------------------

    def toggle_pairs(self, pairs: Iterable[tuple[int, int]]) -> "Graph":
        """Flip membership of each listed pair (symmetric difference)."""
        target = _encode_pairs(self.n, pairs)
        return Graph(self.n, np.setxor1d(self._keys, target, assume_unique=True))

    def toggle_keys(self, keys: np.ndarray) -> "Graph":
        """Flip membership of unique canonical keys (trusted fast path)."""
        return Graph(self.n, np.setxor1d(self._keys, keys, assume_unique=True))

    def with_edges_set(self, assignments: Iterable[tuple[tuple[int, int], bool]]) -> "Graph":
        """Force membership of listed pairs to the given booleans."""
        add, remove = [], []
        for pair, present in assignments:
            (add if present else remove).append(pair)
        keys = self._keys
        if remove:
            keys = np.setdiff1d(keys, _encode_pairs(self.n, remove), assume_unique=True)
        if add:
            keys = np.union1d(keys, _encode_pairs(self.n, add))
        return Graph(self.n, keys)

    def relabel(self, mapping: Sequence[int]) -> "Graph":
        """Apply a vertex bijection ``old id -> mapping[old id]``."""
        perm = np.asarray(mapping, dtype=np.int64)
        if perm.size != self.n or np.unique(perm).size != self.n:
            raise ValidationError("mapping must be a bijection on 0..n-1")
        u = perm[self._keys // self.n] if self.n else np.empty(0, dtype=np.int64)
        v = perm[self._keys % self.n] if self.n else np.empty(0, dtype=np.int64)
        a, b = np.minimum(u, v), np.maximum(u, v)
        return Graph(self.n, np.sort(a * self.n + b))

    # -- dunder ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._keys, other._keys)

    def __hash__(self) -> int:
        return hash((self.n, self._keys.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges})"


def build_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Validate and canonicalize a pair list into a :class:`Graph`."""
    return Graph.from_edges(n, edges)


def flip_edge(g: Graph, pair: tuple[int, int]) -> Graph:
    """Toggle a single pair: add the edge if absent, remove it otherwise."""
    return g.toggle_pairs([pair])


# -- distances -----------------------------------------------------------


def _check_same_size(g: Graph, h: Graph) -> None:
    if g.n != h.n:
        raise ValidationError(f"graphs differ in size ({g.n} vs {h.n})")


def _check_cap(g: Graph, cap: int) -> None:
    if g.n > cap:
        raise ValidationError(
            f"exact distance search is capped at n={cap} (minimization over all "
            f"bijections); use identity_distances for known correspondences"
        )


def edit_distance_exact(g: Graph, h: Graph, cap: int = EXACT_SEARCH_CAP) -> int:
    """Minimum edge symmetric difference over all vertex bijections."""
    _check_same_size(g, h)
    _check_cap(g, cap)
    g_edges = [tuple(e) for e in g.edge_array()]
    h_set = {tuple(e) for e in h.edge_array()}
    eg, eh = len(g_edges), len(h_set)
    best = eg + eh
    for pi in permutations(range(g.n)):
        matched = 0
        for u, v in g_edges:
            a, b = pi[u], pi[v]
            if ((a, b) if a < b else (b, a)) in h_set:
                matched += 1
        cost = eg + eh - 2 * matched
        if cost < best:
            best = cost
            if best == 0:
                break
    return best


def vertex_distance_exact(g: Graph, h: Graph, cap: int = EXACT_SEARCH_CAP) -> int:
    """Min over bijections of the max per-vertex incident-edge difference."""
    _check_same_size(g, h)
    _check_cap(g, cap)
    n = g.n
    g_adj = [set(map(int, g.neighbors(v))) for v in range(n)]
    h_adj = [set(map(int, h.neighbors(v))) for v in range(n)]
    best = 2 * n
    inv = [0] * n
    for pi in permutations(range(n)):
        for i, p in enumerate(pi):
            inv[p] = i
        worst = 0
        for v in range(n):
            pv = pi[v]
            missing = sum(1 for w in g_adj[v] if pi[w] not in h_adj[pv])
            extra = sum(1 for x in h_adj[pv] if inv[x] not in g_adj[v])
            worst = max(worst, missing + extra)
            if worst >= best:
                break
        if worst < best:
            best = worst
            if best == 0:
                break
    return best


def identity_distances(g: Graph, h: Graph) -> tuple[int, int]:
    """Edit and vertex distance under the identity correspondence.

    Valid when the caller knows the true vertex correspondence (the
    experiment harness does); both values upper-bound the exact distances.
    """
    _check_same_size(g, h)
    diff = np.setxor1d(g.edge_keys, h.edge_keys, assume_unique=True)
    if diff.size == 0:
        return 0, 0
    ends = np.concatenate([diff // g.n, diff % g.n])
    per_vertex = np.bincount(ends, minlength=g.n)
    return int(diff.size), int(per_vertex.max())


# -- edge-list I/O ---------------------------------------------------------


def read_edge_list(stream: IO[str]) -> Graph:
    """Parse a SNAP-style edge list.

    Lines starting with '#' are comments; a ``# nodes=N ...`` (or SNAP
    ``# Nodes: N``) header, when present, preserves trailing isolated
    vertices.  Ids are remapped to ``0..n-1`` in first-seen order, duplicate
    edges (either orientation) collapse, and self-loops are skipped.
    """
    remap: dict[int, int] = {}
    pairs: list[tuple[int, int]] = []
    declared = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _HEADER_RE.search(line)
            if match:
                declared = int(match.group(1))
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(f"expected two vertex ids, got {line!r}", lineno)
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(f"non-integer vertex id in {line!r}", lineno) from None
        if a == b:
            continue
        for x in (a, b):
            if x not in remap:
                remap[x] = len(remap)
        pairs.append((remap[a], remap[b]))
    n = max(len(remap), declared)
    return Graph.from_edges(n, pairs)


def write_edge_list(g: Graph, stream: IO[str]) -> None:
    """Write the canonical sorted edge list with a node/edge-count header."""
    stream.write(f"# nodes={g.n} edges={g.num_edges}\n")
    for u, v in g.edge_array():
        stream.write(f"{u} {v}\n")


def read_edge_list_path(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return read_edge_list(fh)


def write_edge_list_path(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_edge_list(g, fh)
