"""Edge-flipping attackers with budget accounting.

Attacks operate on the flattened pair space of all C(n, 2) vertex pairs, so
random attacks sample exactly the right number of distinct pairs without
touching a quadratic structure.  The capped attack wraps any flip-proposing
strategy and enforces total and per-vertex budgets outside the strategy.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from ._kv import format_kv, parse_kv
from ._seeds import numpy_rng, python_rng
from .errors import ParameterError, ValidationError
from .graph import Graph, canonical_pair, identity_distances


@dataclass(frozen=True)
class AttackBudget:
    """Distance budgets: total flips (edit) and flips per vertex (vertex)."""

    max_total_flips: int
    max_flips_per_vertex: int
    fraction_of_potential_edges: float | None = None

    def __post_init__(self):
        if self.max_total_flips < 0 or self.max_flips_per_vertex < 0:
            raise ParameterError("budgets must be non-negative")
        frac = self.fraction_of_potential_edges
        if frac is not None and not 0.0 <= frac <= 1.0:
            raise ParameterError("fraction must lie in [0, 1]")

    @classmethod
    def from_fraction(cls, n: int, fraction: float, max_flips_per_vertex: int) -> "AttackBudget":
        total = int(round(fraction * pair_count(n)))
        return cls(total, max_flips_per_vertex, fraction)


def pair_count(n: int) -> int:
    """Number of potential edges C(n, 2): the fraction denominators."""
    return n * (n - 1) // 2


def _row_offset(u: np.ndarray, n: int) -> np.ndarray:
    return u * (2 * n - u - 1) // 2


def decode_flat_pairs(n: int, flat: np.ndarray) -> np.ndarray:
    """Map flat indices in [0, C(n,2)) to (u, v) rows with u < v."""
    t = np.asarray(flat, dtype=np.int64)
    # Invert the row offset with a float solve, then fix rounding.
    u = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * t)) / 2.0).astype(np.int64)
    u = np.clip(u, 0, n - 2)
    too_low = _row_offset(u + 1, n) <= t
    u[too_low] += 1
    too_high = _row_offset(u, n) > t
    u[too_high] -= 1
    v = u + 1 + (t - _row_offset(u, n))
    return np.stack([u, v], axis=1)


def _flat_to_keys(n: int, flat: np.ndarray) -> np.ndarray:
    uv = decode_flat_pairs(n, flat)
    return uv[:, 0] * n + uv[:, 1]


def _sample_distinct_flat(total: int, count: int, rng: random.Random) -> np.ndarray:
    """Uniform random subset of ``count`` flat indices (Floyd's algorithm)."""
    if count > total:
        raise ParameterError(f"cannot sample {count} distinct pairs out of {total}")
    if count == total:
        return np.arange(total, dtype=np.int64)
    if count > total // 2:
        excluded = _sample_distinct_flat(total, total - count, rng)
        mask = np.ones(total, dtype=bool)
        mask[excluded] = False
        return np.flatnonzero(mask).astype(np.int64)
    chosen: set[int] = set()
    for j in range(total - count, total):
        pick = rng.randrange(j + 1)
        chosen.add(j if pick in chosen else pick)
    return np.fromiter(chosen, dtype=np.int64, count=count)


def random_flip_attack(g: Graph, flip_prob: float, seed: int) -> Graph:
    """Toggle every vertex pair independently with probability flip_prob."""
    if not 0.0 <= flip_prob <= 1.0:
        raise ParameterError(f"flip probability {flip_prob} outside [0, 1]")
    total = pair_count(g.n)
    if total == 0 or flip_prob == 0.0:
        return g
    count = int(numpy_rng(seed, "attack-random").binomial(total, flip_prob))
    flats = _sample_distinct_flat(total, count, python_rng(seed, "attack-random-pairs"))
    return g.toggle_keys(_flat_to_keys(g.n, flats))


def uniform_pair_attack(g: Graph, num_pairs: int, seed: int) -> Graph:
    """Toggle exactly ``num_pairs`` distinct uniformly chosen vertex pairs."""
    total = pair_count(g.n)
    if not 0 <= num_pairs <= total:
        raise ParameterError(f"num_pairs={num_pairs} outside [0, {total}]")
    if num_pairs == 0:
        return g
    flats = _sample_distinct_flat(total, num_pairs, python_rng(seed, "attack-uniform"))
    return g.toggle_keys(_flat_to_keys(g.n, flats))


# -- budget-capped strategies ---------------------------------------------------

Strategy = Callable[[Graph, random.Random], Iterable[tuple[int, int]]]


def random_pairs_strategy(g: Graph, rng: random.Random) -> Iterator[tuple[int, int]]:
    """Endless stream of uniform vertex pairs (with replacement)."""
    n = g.n
    while True:
        u = rng.randrange(n)
        v = rng.randrange(n - 1)
        if v >= u:
            v += 1
        yield (u, v) if u < v else (v, u)


def high_degree_first_strategy(g: Graph, rng: random.Random) -> Iterator[tuple[int, int]]:
    """Propose flips among the highest-degree vertices first."""
    order = np.lexsort((np.arange(g.n), -g.degrees))
    for j in range(1, g.n):
        for i in range(j):
            yield canonical_pair(int(order[i]), int(order[j]))


STRATEGIES: dict[str, Strategy] = {
    "random_pairs": random_pairs_strategy,
    "high_degree_first": high_degree_first_strategy,
}


@dataclass(frozen=True)
class AttackOutcome:
    graph: Graph
    flips_applied: int
    flips_skipped: int


def budget_capped_attack(
    g: Graph,
    budget: AttackBudget,
    strategy: str | Strategy,
    seed: int,
    max_proposals: int | None = None,
) -> AttackOutcome:
    """Apply a strategy's flips, skipping any that would exceed the budgets.

    The strategy only proposes; budget enforcement lives here so arbitrary
    (even watermark-aware) adversaries can be plugged in.  Proposal streams
    are cut off after ``max_proposals`` (default 20x the total budget) in
    case a stream never ends.
    """
    if isinstance(strategy, str):
        try:
            strategy_fn = STRATEGIES[strategy]
        except KeyError:
            raise ValidationError(
                f"unknown strategy {strategy!r}; known: {sorted(STRATEGIES)}"
            ) from None
    else:
        strategy_fn = strategy
    limit = max_proposals if max_proposals is not None else max(1000, 20 * budget.max_total_flips)
    rng = python_rng(seed, "attack-capped")
    per_vertex = np.zeros(g.n, dtype=np.int64)
    applied: dict[tuple[int, int], int] = {}
    skipped = 0
    proposals = 0
    for raw in strategy_fn(g, rng):
        if len(applied) >= budget.max_total_flips:
            break
        proposals += 1
        if proposals > limit:
            break
        pair = canonical_pair(*raw)
        u, v = pair
        if pair in applied:
            skipped += 1
            continue
        if per_vertex[u] + 1 > budget.max_flips_per_vertex or \
           per_vertex[v] + 1 > budget.max_flips_per_vertex:
            skipped += 1
            continue
        applied[pair] = 1
        per_vertex[u] += 1
        per_vertex[v] += 1
    attacked = g.toggle_pairs(list(applied))
    edit, vertex = identity_distances(g, attacked)
    if edit > budget.max_total_flips or vertex > budget.max_flips_per_vertex:
        raise RuntimeError(
            f"budget overrun: applied distances ({edit}, {vertex}) exceed "
            f"({budget.max_total_flips}, {budget.max_flips_per_vertex})"
        )
    return AttackOutcome(graph=attacked, flips_applied=len(applied), flips_skipped=skipped)


# -- attack config blocks ----------------------------------------------------------


def attack_config_to_text(kind: str, seed: int, **kwargs: object) -> str:
    items: dict[str, object] = {"attack": kind, "seed": seed}
    items.update(kwargs)
    return format_kv(items)


def apply_attack_config(g: Graph, text: str) -> Graph:
    """Run an attack described by a key=value block against ``g``."""
    kv = parse_kv(text)
    kind = kv.get("attack")
    seed = int(kv.get("seed", "0"))
    if kind == "random":
        return random_flip_attack(g, float(kv["prob"]), seed)
    if kind == "uniform":
        if "pairs" in kv:
            num = int(kv["pairs"])
        else:
            num = int(round(float(kv["fraction"]) * pair_count(g.n)))
        return uniform_pair_attack(g, num, seed)
    if kind == "capped":
        if "total" in kv:
            total = int(kv["total"])
        else:
            total = int(round(float(kv.get("fraction", "0")) * pair_count(g.n)))
        per_vertex = int(kv.get("per_vertex", max(1, math.ceil(math.log(max(g.n, 2))))))
        budget = AttackBudget(total, per_vertex)
        return budget_capped_attack(g, budget, kv.get("strategy", "random_pairs"), seed).graph
    raise ParameterError(f"unknown attack kind {kind!r}")
