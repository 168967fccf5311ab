"""Security-experiment harness: key, sample, mark k copies, attack, identify.

One trial follows the hypothetical experiment end to end; a run sweeps an
attack-strength axis and aggregates success rates, failure taxonomy, and
distortion metrics per sweep point.  Everything is deterministic given the
master seed: per-trial streams are derived from (seed, sweep index, trial
index, role).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from ._kv import format_kv, parse_kv
from ._seeds import seed_sequence
from .adversary import AttackBudget, budget_capped_attack, pair_count, random_flip_attack, uniform_pair_attack
from .errors import LabelingFailure, ParameterError
from .graph import Graph, identity_distances, read_edge_list_path
from .metrics import dk2_deviation, dk2_series
from .models import ErdosRenyiParams, PowerLawParams, derive_constants, sample_er, sample_power_law
from .separation import SeparationThresholds, er_thresholds, label, plg_thresholds
from .watermark import ConstantResample, ModelResample, ResampleSource, identify, keygen, mark


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of one experiment run; see ``from_text`` for the file keys."""

    model: str = "plg"                # er | plg | file
    input_path: str | None = None
    n: int = 10000
    p: float = 0.1
    m: float = 1000.0
    w: float = 20.0
    gamma: float = 2.75
    h: int | None = None
    medium: int | None = None
    ell: int = 219
    t: int = 1
    k: int = 10
    resample: str = "constant:0.5"    # constant:<p> | model
    mode: str = "relaxed"             # strict | relaxed
    attack: str = "uniform"           # uniform | random | none | capped:<strategy>
    sweep: tuple[float, ...] = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2)
    per_vertex_cap: int | None = None
    trials: int = 10
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not self.sweep:
            raise ParameterError("sweep must be non-empty")
        if self.k < 1:
            raise ParameterError("need at least one marked copy")

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        kv = parse_kv(text)
        kwargs: dict = {}
        for key in ("model", "input_path", "resample", "mode", "attack", "output"):
            if key in kv:
                kwargs[key] = kv[key]
        for key in ("n", "h", "medium", "ell", "t", "k", "per_vertex_cap", "trials", "seed"):
            if key in kv:
                kwargs[key] = int(kv[key])
        for key in ("p", "m", "w", "gamma"):
            if key in kv:
                kwargs[key] = float(kv[key])
        if "sweep" in kv:
            kwargs["sweep"] = tuple(float(x) for x in kv["sweep"].split(",") if x.strip())
        return cls(**kwargs)

    def to_text(self) -> str:
        items: dict[str, object] = {
            "model": self.model, "n": self.n, "ell": self.ell, "t": self.t,
            "k": self.k, "resample": self.resample, "mode": self.mode,
            "attack": self.attack, "sweep": ",".join(f"{x:g}" for x in self.sweep),
            "trials": self.trials, "seed": self.seed,
        }
        if self.model == "er":
            items["p"] = self.p
        elif self.model == "plg":
            items.update({"m": self.m, "w": self.w, "gamma": self.gamma})
        if self.input_path:
            items["input_path"] = self.input_path
        if self.h is not None:
            items["h"] = self.h
        if self.medium is not None:
            items["medium"] = self.medium
        if self.per_vertex_cap is not None:
            items["per_vertex_cap"] = self.per_vertex_cap
        if self.output:
            items["output"] = self.output
        return format_kv(items)


@dataclass(frozen=True)
class SweepPointResult:
    attack_value: float
    trials: int
    successes: int
    bottoms: int
    wrongs: int
    label_clean: int
    mean_dk2_deviation: float
    mean_identity_edit: float
    mean_identity_vertex: float

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    points: tuple[SweepPointResult, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([
            "attack_value", "trials", "successes", "bottoms", "wrongs",
            "label_clean", "success_rate", "mean_dk2_deviation",
            "mean_identity_edit", "mean_identity_vertex",
        ])
        for pt in self.points:
            writer.writerow([
                f"{pt.attack_value:g}", pt.trials, pt.successes, pt.bottoms,
                pt.wrongs, pt.label_clean, f"{pt.success_rate:.6g}",
                f"{pt.mean_dk2_deviation:.6g}", f"{pt.mean_identity_edit:.6g}",
                f"{pt.mean_identity_vertex:.6g}",
            ])
        return buf.getvalue()

    def to_plot_data(self) -> str:
        lines = ["# attack_value success_rate mean_dk2_deviation"]
        lines += [
            f"{pt.attack_value:g} {pt.success_rate:.6g} {pt.mean_dk2_deviation:.6g}"
            for pt in self.points
        ]
        return "\n".join(lines) + "\n"


def _trial_seed(master: int, sweep_index: int, trial_index: int) -> int:
    return int(seed_sequence(master, sweep_index, trial_index).generate_state(1)[0])


def _resolve_params(config: ExperimentConfig):
    if config.model == "er":
        return ErdosRenyiParams(n=config.n, p=config.p)
    if config.model == "plg":
        return derive_constants(n=config.n, m=config.m, w=config.w, gamma=config.gamma)
    if config.model == "file":
        if not config.input_path:
            raise ParameterError("file-based experiments need input_path")
        return None
    raise ParameterError(f"unknown model {config.model!r}")


def _resolve_thresholds(config: ExperimentConfig, params, n: int) -> SeparationThresholds:
    if config.model == "er":
        return er_thresholds(n, config.p, h=config.h, medium=config.medium)
    if config.model == "plg":
        return plg_thresholds(params, h=config.h, medium=config.medium)
    if config.h is None or config.medium is None:
        raise ParameterError("file-based experiments need explicit h and medium")
    return SeparationThresholds(
        kind="file", h=config.h, medium=config.medium,
        d=3.0, d_prime=math.log(max(n, 2)), analytic=False,
    )


def _resolve_resample(config: ExperimentConfig, params) -> ResampleSource:
    if config.resample == "model":
        if params is None:
            raise ParameterError("model resampling needs model parameters, not a file graph")
        return ModelResample(params)
    if config.resample.startswith("constant"):
        _, _, value = config.resample.partition(":")
        return ConstantResample(float(value) if value else 0.5)
    raise ParameterError(f"unknown resample source {config.resample!r}")


def _sample_graph(config: ExperimentConfig, params, trial_seed: int, fixed: Graph | None) -> Graph:
    if fixed is not None:
        return fixed
    if config.model == "er":
        return sample_er(params, trial_seed)
    return sample_power_law(params, trial_seed)


def _apply_attack(config: ExperimentConfig, g: Graph, value: float, trial_seed: int) -> Graph:
    kind, _, qualifier = config.attack.partition(":")
    if kind == "none":
        return g
    if kind == "uniform":
        num = int(round(value * pair_count(g.n)))
        return uniform_pair_attack(g, num, trial_seed)
    if kind == "random":
        return random_flip_attack(g, value, trial_seed)
    if kind == "capped":
        per_vertex = config.per_vertex_cap
        if per_vertex is None:
            per_vertex = max(1, math.ceil(math.log(max(g.n, 2))))
        budget = AttackBudget.from_fraction(g.n, value, per_vertex)
        strategy = qualifier or "random_pairs"
        return budget_capped_attack(g, budget, strategy, trial_seed).graph
    raise ParameterError(f"unknown attack {config.attack!r}")


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the full sweep; deterministic for a fixed config (incl. seed)."""
    params = _resolve_params(config)
    fixed_graph = read_edge_list_path(config.input_path) if config.model == "file" else None
    n = fixed_graph.n if fixed_graph is not None else config.n
    thresholds = _resolve_thresholds(config, params, n)
    resample = _resolve_resample(config, params)
    fixed_series = dk2_series(fixed_graph) if fixed_graph is not None else None

    points = []
    for s_idx, value in enumerate(config.sweep):
        successes = bottoms = wrongs = clean = 0
        dk2_sum = edit_sum = vertex_sum = 0.0
        for t_idx in range(config.trials):
            trial_seed = _trial_seed(config.seed, s_idx, t_idx)
            key = keygen(config.ell, n, thresholds.x, config.t, trial_seed)
            g = _sample_graph(config, params, trial_seed, fixed_graph)
            try:
                labels = label(g, thresholds, config.mode)
            except LabelingFailure:
                bottoms += 1
                continue
            if labels.collision_free:
                clean += 1
            copies = [
                mark(key, g, labels, seed_sequence(trial_seed, "copy", i).generate_state(1)[0],
                     resample=resample)
                for i in range(config.k)
            ]
            pick = int(seed_sequence(trial_seed, "pick").generate_state(1)[0]) % config.k
            attacked = _apply_attack(config, copies[pick].graph, value, trial_seed)

            series_g = fixed_series if fixed_series is not None else dk2_series(g)
            dk2_sum += dk2_deviation(series_g, dk2_series(attacked))
            edit, vertex = identity_distances(g, attacked)
            edit_sum += edit
            vertex_sum += vertex

            result = identify(
                key, g, [c.id for c in copies], attacked, thresholds,
                mode=config.mode, labels_g=labels,
            )
            if result.bottom:
                bottoms += 1
            elif result.matched_index == pick:
                successes += 1
            else:
                wrongs += 1
        points.append(SweepPointResult(
            attack_value=value, trials=config.trials, successes=successes,
            bottoms=bottoms, wrongs=wrongs, label_clean=clean,
            mean_dk2_deviation=dk2_sum / config.trials,
            mean_identity_edit=edit_sum / config.trials,
            mean_identity_vertex=vertex_sum / config.trials,
        ))
    return ExperimentResult(config=config, points=tuple(points))
