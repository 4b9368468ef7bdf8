"""Performance and process metrics over episode records.

Identical code scores simulated agents and human players. Performance:
pmax (episode ended on the highest-value target) and poptimal (pmax in
exactly the shortest-path step count). Process: revisit redundancy,
immediate backtracking, grid coverage, the four-straight-moves opener,
and consumption of the nearest lesser target.

A collision never moves the player, so the blocked cell is not counted
as visited anywhere; only occupied cells enter visit sets, with the
spawn occupied from step 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .env import Coord, GridConfig, accessible_cells, bfs_distances
from .records import EpisodeRecord

METRIC_NAMES = (
    "pmax",
    "poptimal",
    "redundancy",
    "immediate_redundancy",
    "coverage",
    "linear_move",
    "closest_distractor",
)


@dataclass(frozen=True)
class EpisodeMetrics:
    pmax: bool
    poptimal: bool
    consumed_rank: Optional[int]  # 1 = highest-value target, None = no target
    redundancy: float
    immediate_redundancy: float
    coverage: float
    linear_move: bool
    closest_distractor: bool

    def value(self, name: str) -> float:
        return float(getattr(self, name))


def position_sequence(record: EpisodeRecord, config: GridConfig) -> list[Coord]:
    """Spawn plus the position after every step, collisions included."""
    return [config.spawn] + [(s.x, s.y) for s in record.steps]


def occupied_cells(record: EpisodeRecord, config: GridConfig) -> list[Coord]:
    """Arrival sequence: spawn plus each cell actually entered."""
    return [config.spawn] + [(s.x, s.y) for s in record.steps if not s.collided]


def pmax(record: EpisodeRecord, config: GridConfig) -> bool:
    _require_match(record, config)
    return record.consumed_target == config.preferred_index()


def poptimal(record: EpisodeRecord, config: GridConfig) -> bool:
    if not pmax(record, config):
        return False
    pref = config.targets[config.preferred_index()].cell
    return len(record.steps) == bfs_distances(config, config.spawn).get(pref)


def consumed_rank(record: EpisodeRecord, config: GridConfig) -> Optional[int]:
    """Rank of the consumed target by value, 1 = highest; None when no target."""
    if record.consumed_target is None:
        return None
    value = config.targets[record.consumed_target].value
    return 1 + sum(1 for t in config.targets if t.value > value)


def redundancy(record: EpisodeRecord, config: GridConfig) -> float:
    """Revisits over unique cells among occupied positions."""
    visits = occupied_cells(record, config)
    unique = len(set(visits))
    return (len(visits) - unique) / unique


def immediate_redundancy(record: EpisodeRecord, config: GridConfig) -> float:
    """Fraction of steps (from the second on) that return to the cell of two steps ago."""
    seq = position_sequence(record, config)
    if len(record.steps) < 2:
        return 0.0
    hits = sum(1 for l in range(2, len(seq)) if seq[l] == seq[l - 2])
    return hits / (len(seq) - 2)


def coverage(record: EpisodeRecord, config: GridConfig) -> float:
    """Unique occupied cells over all cells reachable from spawn."""
    return len(set(occupied_cells(record, config))) / accessible_cells(config)


def linear_move(record: EpisodeRecord, config: Optional[GridConfig] = None) -> bool:
    """First four actions from spawn exist and share one direction.

    Attempted directions count even when they collide; the metric reads
    strategy intent, not displacement.
    """
    if len(record.steps) < 4:
        return False
    first = record.steps[0].action
    return all(s.action == first for s in record.steps[1:4])


def closest_distractor_index(config: GridConfig) -> int:
    """The non-preferred target nearest the spawn; ties break by target index."""
    dist = bfs_distances(config, config.spawn)
    pref = config.preferred_index()
    candidates = [
        (dist.get(t.cell, 10**9), i)
        for i, t in enumerate(config.targets)
        if i != pref
    ]
    return min(candidates)[1]


def closest_distractor(record: EpisodeRecord, config: GridConfig) -> bool:
    _require_match(record, config)
    return (
        record.consumed_target is not None
        and record.consumed_target == closest_distractor_index(config)
    )


def episode_metrics(record: EpisodeRecord, config: GridConfig) -> EpisodeMetrics:
    return EpisodeMetrics(
        pmax=pmax(record, config),
        poptimal=poptimal(record, config),
        consumed_rank=consumed_rank(record, config),
        redundancy=redundancy(record, config),
        immediate_redundancy=immediate_redundancy(record, config),
        coverage=coverage(record, config),
        linear_move=linear_move(record, config),
        closest_distractor=closest_distractor(record, config),
    )


def _require_match(record: EpisodeRecord, config: GridConfig) -> None:
    if record.config_id != config.id:
        raise ValueError(
            f"record belongs to config {record.config_id!r}, got {config.id!r}"
        )


# -- aggregation -------------------------------------------------------------


def learning_curves(
    scored: Iterable[tuple[EpisodeRecord, EpisodeMetrics, GridConfig]],
    metrics: Sequence[str] = METRIC_NAMES,
) -> dict[str, dict[int, dict[str, float]]]:
    """Per-episode means, averaged over runs within a config then over configs.

    Returns {condition: {episode: {metric: mean}}}.
    """
    # condition -> config -> episode -> metric -> list of per-run values
    tree: dict[str, dict[str, dict[int, dict[str, list[float]]]]] = {}
    for record, em, config in scored:
        per_cfg = tree.setdefault(config.complexity, {}).setdefault(config.id, {})
        per_ep = per_cfg.setdefault(record.episode, {})
        for name in metrics:
            per_ep.setdefault(name, []).append(em.value(name))

    curves: dict[str, dict[int, dict[str, float]]] = {}
    for condition, per_config in tree.items():
        episodes = sorted({ep for cfg in per_config.values() for ep in cfg})
        curves[condition] = {}
        for ep in episodes:
            out = {}
            for name in metrics:
                config_means = [
                    sum(cfg[ep][name]) / len(cfg[ep][name])
                    for cfg in per_config.values()
                    if ep in cfg
                ]
                out[name] = sum(config_means) / len(config_means)
            curves[condition][ep] = out
    return curves


def condition_summary(
    curves: dict[str, dict[int, dict[str, float]]]
) -> dict[str, dict[str, float]]:
    """Overall per-condition means (mean of the per-episode means)."""
    summary = {}
    for condition, by_episode in curves.items():
        names = next(iter(by_episode.values())).keys() if by_episode else []
        summary[condition] = {
            name: sum(row[name] for row in by_episode.values()) / len(by_episode)
            for name in names
        }
    return summary


def curve_values(
    curves: dict[str, dict[int, dict[str, float]]], condition: str, metric: str
) -> list[float]:
    """One metric's per-episode means as a plain list, episode-ordered."""
    by_episode = curves.get(condition, {})
    return [by_episode[ep][metric] for ep in sorted(by_episode)]
