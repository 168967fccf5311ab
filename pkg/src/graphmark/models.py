"""Random-graph generators: G(n, p) and the heavy-tailed expected-degree model.

The power-law family assigns vertex ``k`` the real index ``i0 + k`` and
expected degree ``w_i = c * i**(-1/(gamma-1))``; each pair (i, j) appears
independently with probability ``K0 * (n**(gamma-3) * i * j)**(-1/(gamma-1))``.
Generation skips over runs of absent edges (geometric jumps with rejection
against a per-row probability bound), so both samplers run in expected time
linear in ``n`` plus the number of edges produced.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._kv import format_kv, parse_kv
from ._seeds import python_rng
from .errors import ParameterError
from .graph import Graph

GAMMA_MIN = 2.5
GAMMA_MAX = 3.0


@dataclass(frozen=True)
class ErdosRenyiParams:
    """G(n, p): every one of the C(n, 2) pairs is an edge with probability p."""

    n: int
    p: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"edge probability {self.p} outside [0, 1]")

    @property
    def q(self) -> float:
        return 1.0 - self.p


@dataclass(frozen=True)
class PowerLawParams:
    """Power-law model parameters with derived constants.

    Attributes:
        n: vertex count.
        m: maximum expected degree (expected degree of the lowest index i0).
        w: average expected degree.
        gamma: tail exponent, restricted to (5/2, 3).
        c: weight scale, ``(gamma-2)/(gamma-1) * w * n**(1/(gamma-1))``.
        i0: lowest real index, ``n * (w*(gamma-2) / (m*(gamma-1)))**(gamma-1)``.
        k0: probability constant, ``((gamma-2)/(gamma-1))**2 * w``.
    """

    n: int
    m: float
    w: float
    gamma: float
    c: float = field(init=False)
    i0: float = field(init=False)
    k0: float = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be positive")
        if not GAMMA_MIN < self.gamma < GAMMA_MAX:
            raise ParameterError(
                f"gamma={self.gamma} outside ({GAMMA_MIN}, {GAMMA_MAX}); the degree-class "
                f"thresholds only separate in that range"
            )
        if not self.m > self.w > 0:
            raise ParameterError("need max degree m > average degree w > 0")
        g = self.gamma
        object.__setattr__(self, "c", (g - 2) / (g - 1) * self.w * self.n ** (1 / (g - 1)))
        object.__setattr__(self, "i0", self.n * (self.w * (g - 2) / (self.m * (g - 1))) ** (g - 1))
        object.__setattr__(self, "k0", ((g - 2) / (g - 1)) ** 2 * self.w)

    def weight(self, i: float) -> float:
        """Expected degree of real index i (before probability clipping)."""
        return self.c * i ** (-1 / (self.gamma - 1))

    def index_of(self, k: int) -> float:
        """Real index of internal vertex id k."""
        return self.i0 + k


def derive_constants(n: int, m: float, w: float, gamma: float, strict: bool = False) -> PowerLawParams:
    """Construct :class:`PowerLawParams`, checking the probability constraints.

    The top-pair constraint ``P[i0, i0] < 1`` is reported as a warning by
    default, since realistic heavy-tailed settings (a large maximum degree at
    moderate n*w) routinely violate it; sampling then clips pair
    probabilities at 1.  Pass ``strict=True`` to turn either constraint
    violation into an error.
    """
    params = PowerLawParams(n=n, m=m, w=w, gamma=gamma)
    top = _raw_edge_probability(params, params.i0, params.i0)
    if top >= 1.0:
        message = (
            f"P[i0, i0] = {top:.4g} >= 1: probabilities will be clipped at 1 "
            f"(violates the model constraint; lower m or raise n*w to avoid)"
        )
        if strict:
            raise ParameterError(message)
        warnings.warn(message, stacklevel=2)
    # The general random-graph form needs max_i w_i^2 < sum_k w_k; surfaced
    # as a warning only, since only the P[i0, i0] constraint is operative.
    total_weight = _weight_sum(params)
    if params.m ** 2 >= total_weight and top < 1.0:
        warnings.warn(
            f"m^2 = {params.m ** 2:.4g} >= sum of weights {total_weight:.4g}",
            stacklevel=2,
        )
    return params


def _weight_sum(params: PowerLawParams) -> float:
    idx = params.i0 + np.arange(params.n, dtype=np.float64)
    return float(np.sum(params.c * idx ** (-1 / (params.gamma - 1))))


def _raw_edge_probability(params: PowerLawParams, i: float, j: float) -> float:
    g = params.gamma
    return params.k0 * (params.n ** (g - 3) * i * j) ** (-1 / (g - 1))


def edge_probability(params: PowerLawParams, i: float, j: float) -> float:
    """Pair probability for real indices i, j in [i0, i0 + n], clipped at 1."""
    lo, hi = params.i0, params.i0 + params.n
    if not (lo <= i <= hi and lo <= j <= hi):
        raise ParameterError(f"indices ({i}, {j}) outside [{lo:.6g}, {hi:.6g}]")
    return min(1.0, _raw_edge_probability(params, i, j))


def degree_count_bracket(params: PowerLawParams, k: int) -> tuple[float, float]:
    """Expected-count bracket for vertices of degree k: C*n/(k+1)^g .. C*n/k^g."""
    g = params.gamma
    const = (params.w * (g - 2)) ** (g - 1) / (g - 1) ** (g - 2)
    return const * params.n / (k + 1) ** g, const * params.n / k ** g


# -- samplers ----------------------------------------------------------------


def sample_er(params: ErdosRenyiParams, seed: int) -> Graph:
    """Sample G(n, p); deterministic for a fixed seed."""
    n, p = params.n, params.p
    if p == 0.0 or n < 2:
        return Graph.empty(n)
    if p == 1.0:
        return Graph.complete(n)
    rng = python_rng(seed, "er")
    log_q = math.log1p(-p)
    total = n * (n - 1) // 2
    keys: list[int] = []
    # Walk the flattened pair space, jumping geometric gaps between edges.
    t = -1
    u = 0
    row_end = n - 1  # pairs (0, 1..n-1) occupy flat slots [0, n-1)
    while True:
        r = rng.random()
        t += 1 + int(math.log(1.0 - r) / log_q)
        if t >= total:
            break
        while t >= row_end:
            u += 1
            row_end += n - 1 - u
        v = u + 1 + (t - (row_end - (n - 1 - u)))
        keys.append(u * n + v)
    return Graph.from_keys(n, np.asarray(keys, dtype=np.int64))


def sample_power_law(params: PowerLawParams, seed: int) -> Graph:
    """Sample the power-law model; pair probabilities are clipped at 1.

    Row-by-row skip sampling: within a row the per-pair probability is
    non-increasing, so candidate positions are drawn under the probability of
    the previous accept and thinned by the exact ratio.
    """
    n, g = params.n, params.gamma
    beta = 1.0 / (g - 1)
    amplitude = params.k0 * params.n ** ((3 - g) / (g - 1))
    idx = params.i0 + np.arange(n, dtype=np.float64)
    s = math.sqrt(amplitude) * idx ** (-beta)  # P[u, v] == s[u] * s[v]
    rng = python_rng(seed, "plg")
    keys: list[int] = []
    for u in range(n - 1):
        su = float(s[u])
        v = u + 1
        bound = min(1.0, su * float(s[v]))
        while v < n:
            if bound < 1.0:
                if bound <= 0.0:
                    break
                r = rng.random()
                v += int(math.log(1.0 - r) / math.log1p(-bound))
                if v >= n:
                    break
            prob = min(1.0, su * float(s[v]))
            if prob >= bound or rng.random() < prob / bound:
                keys.append(u * n + v)
            bound = prob
            v += 1
    return Graph.from_keys(n, np.asarray(keys, dtype=np.int64))


# -- serialization -----------------------------------------------------------


def params_to_text(params: ErdosRenyiParams | PowerLawParams, seed: int | None = None) -> str:
    if isinstance(params, ErdosRenyiParams):
        items: dict[str, object] = {"model": "er", "n": params.n, "p": params.p}
    else:
        items = {"model": "plg", "n": params.n, "m": params.m,
                 "w": params.w, "gamma": params.gamma}
    if seed is not None:
        items["seed"] = seed
    return format_kv(items)


def params_from_text(text: str) -> tuple[ErdosRenyiParams | PowerLawParams, int | None]:
    kv = parse_kv(text)
    model = kv.get("model")
    seed = int(kv["seed"]) if "seed" in kv else None
    if model == "er":
        return ErdosRenyiParams(n=int(kv["n"]), p=float(kv["p"])), seed
    if model == "plg":
        return derive_constants(
            n=int(kv["n"]), m=float(kv["m"]), w=float(kv["w"]), gamma=float(kv["gamma"])
        ), seed
    raise ParameterError(f"unknown model {model!r} (expected er or plg)")
