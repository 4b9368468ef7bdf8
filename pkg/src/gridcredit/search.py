"""Parameter search: random sweeps for defaults, RMSE calibration to curves.

Each trial draws one parameter point uniformly from per-parameter
intervals inside (0,1), runs a full batch with it, and scores either
the mean rate of ending on the highest-value target (maximized) or the
root-mean-square distance between the model's per-episode curve and a
reference curve (minimized). Uniform sampling keeps the sweep trivially
reproducible; the trial log keeps every (params, score) pair so the
search can be audited or extended.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .agents import (
    KIND_IBL_EQUAL,
    KIND_IBL_EXPONENTIAL,
    KIND_IBL_TD,
    KIND_Q_LEARNING,
    AgentParams,
)
from .env import GridConfig
from .harness import RunSpec, run_batch, run_seed
from .metrics import curve_values, episode_metrics, learning_curves

OBJECTIVE_PMAX = "pmax"
OBJECTIVE_RMSE = "rmse"

# Which fields the sweep explores, per agent kind.
SEARCHED_FIELDS = {
    KIND_IBL_EQUAL: ("sigma", "decay"),
    KIND_IBL_EXPONENTIAL: ("sigma", "decay", "gamma"),
    KIND_IBL_TD: ("sigma", "decay", "gamma", "alpha"),
    KIND_Q_LEARNING: ("gamma", "alpha", "epsilon"),
}

DEFAULT_BOUNDS = (1e-6, 1.0 - 1e-6)


@dataclass(frozen=True)
class SearchSpace:
    """Uniform sampling box; bounds must stay inside (0,1)."""

    trials: int = 1000
    bounds: dict = field(default_factory=dict)  # field name -> (lo, hi)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for name, (lo, hi) in self.bounds.items():
            if not (0.0 < lo <= hi < 1.0):
                raise ValueError(f"bounds for {name} must lie within (0,1)")

    def interval(self, name: str) -> tuple[float, float]:
        return self.bounds.get(name, DEFAULT_BOUNDS)


@dataclass
class Trial:
    index: int
    params: AgentParams
    objective: float
    error: str = ""


@dataclass
class SearchResult:
    best_params: AgentParams
    best_objective: float
    trials: list[Trial]


def sample_params(space: SearchSpace, kind: str, rng: np.random.Generator,
                  base: Optional[AgentParams] = None) -> AgentParams:
    """One uniform draw over the kind's searched fields; others keep base values."""
    params = base if base is not None else AgentParams(kind=kind)
    draws = {}
    for name in SEARCHED_FIELDS[kind]:
        lo, hi = space.interval(name)
        draws[name] = lo + (hi - lo) * float(rng.random())
    return replace(params, kind=kind, **draws)


def rmse_to_curve(model_curve: Sequence[float], reference_curve: Sequence[float]) -> float:
    """Root mean squared per-episode difference between two curves."""
    if len(model_curve) != len(reference_curve):
        raise ValueError("curves must have equal length")
    if not model_curve:
        raise ValueError("curves must be nonempty")
    return math.sqrt(
        sum((m - r) ** 2 for m, r in zip(model_curve, reference_curve)) / len(model_curve)
    )


def evaluate_params(
    params: AgentParams,
    configs: dict[str, GridConfig],
    config_ids: list[str],
    base_seed: int,
    episodes: int,
    runs_per_config: int,
    workers: int = 1,
) -> tuple[float, list[float]]:
    """(mean pmax over every episode of the batch, per-episode pmax curve)."""
    spec = RunSpec(
        config_ids=config_ids,
        agent=params,
        episodes=episodes,
        runs_per_config=runs_per_config,
        base_seed=base_seed,
    )
    result = run_batch(spec, configs, workers=workers)
    if not result.records:
        raise RuntimeError("evaluation produced no records")
    scored = [
        (rec, episode_metrics(rec, configs[rec.config_id]), configs[rec.config_id])
        for rec in result.records
    ]
    flat = sum(em.pmax for _, em, _ in scored) / len(scored)
    curves = learning_curves(scored, metrics=("pmax",))
    merged: list[float] = []
    for ep in range(1, episodes + 1):
        vals = [curves[c][ep]["pmax"] for c in curves if ep in curves[c]]
        merged.append(sum(vals) / len(vals))
    return flat, merged


def random_search(
    kind: str,
    space: SearchSpace,
    configs: dict[str, GridConfig],
    config_ids: list[str],
    objective: str = OBJECTIVE_PMAX,
    reference_curve: Optional[Sequence[float]] = None,
    seed: int = 0,
    episodes: int = 40,
    runs_per_config: int = 1,
    workers: int = 1,
) -> SearchResult:
    """Uniform random sweep; returns the best point and the full trial log.

    Maximizes mean pmax, or minimizes RMSE against reference_curve.
    Failed trials score as worst-possible and stay in the log.
    """
    if objective == OBJECTIVE_RMSE and reference_curve is None:
        raise ValueError("rmse objective requires a reference curve")
    rng = np.random.default_rng(seed)
    minimize = objective == OBJECTIVE_RMSE
    worst = math.inf if minimize else -math.inf

    trials: list[Trial] = []
    best: Optional[Trial] = None
    for index in range(space.trials):
        params = sample_params(space, kind, rng)
        try:
            flat, curve = evaluate_params(
                params, configs, config_ids,
                base_seed=run_seed(seed, "trial", index),
                episodes=episodes, runs_per_config=runs_per_config, workers=workers,
            )
            score = rmse_to_curve(curve, reference_curve) if minimize else flat
            trial = Trial(index=index, params=params, objective=score)
        except Exception as exc:
            trial = Trial(index=index, params=params, objective=worst,
                          error=f"{type(exc).__name__}: {exc}")
        trials.append(trial)
        if not trial.error and (
            best is None
            or (minimize and trial.objective < best.objective)
            or (not minimize and trial.objective > best.objective)
        ):
            best = trial
    if best is None:
        raise RuntimeError("every search trial failed")
    return SearchResult(best_params=best.params, best_objective=best.objective,
                        trials=trials)


def write_trial_log(path: Path, result: SearchResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "sigma", "decay", "gamma", "alpha", "epsilon",
                         "objective", "error"])
        for t in result.trials:
            p = t.params
            writer.writerow([t.index, repr(p.sigma), repr(p.decay), repr(p.gamma),
                             repr(p.alpha), repr(p.epsilon), repr(t.objective), t.error])


def load_reference_curve(path: Path) -> list[float]:
    """CSV with (episode, value) rows, header optional; returns episode-ordered values."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rows.append((int(row[0]), float(row[1])))
            except ValueError:
                continue  # header
    rows.sort()
    return [v for _, v in rows]
