"""Episode and batch orchestration with deterministic seeding.

One agent-run is the unit of work: a fresh agent playing 40 episodes on
one grid. Each run's seed derives from (base seed, config id, run index)
through SHA-256, so results are independent of execution order and
identical whether runs execute serially or across a worker pool. The
batch writer emits records in (config, run, episode) order regardless of
completion order, which keeps output files byte-identical across worker
counts and process restarts.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import metrics as metrics_mod
from .agents import AgentParams, make_agent
from .env import GridConfig, initial_state, step
from .records import EpisodeRecord, StepRecord

DEFAULT_EPISODES = 40
DEFAULT_RUNS_PER_CONFIG = 3


@dataclass
class RunSpec:
    config_ids: list[str]
    agent: AgentParams
    episodes: int = DEFAULT_EPISODES
    runs_per_config: int = DEFAULT_RUNS_PER_CONFIG
    base_seed: int = 0

    def __post_init__(self):
        if self.episodes < 1 or self.runs_per_config < 1:
            raise ValueError("episodes and runs_per_config must be at least 1")


def run_seed(base_seed: int, config_id: str, run: int) -> int:
    """Stable 64-bit seed for one agent-run; independent of batch layout."""
    digest = hashlib.sha256(f"{base_seed}|{config_id}|{run}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def run_episode(config: GridConfig, agent, run: int = 0, episode: int = 1) -> EpisodeRecord:
    """One act-step-learn episode; returns the complete step log."""
    agent.begin_episode()
    state = initial_state(config)
    record = EpisodeRecord(config_id=config.id, run=run, episode=episode)
    while not state.terminated:
        action = agent.act(state.position)
        new_state, outcome = step(config, state, action)
        agent.observe(state.position, action, outcome.reward, outcome.new_position,
                      outcome.terminal)
        record.steps.append(
            StepRecord(
                x=outcome.new_position[0],
                y=outcome.new_position[1],
                action=action,
                reward=outcome.reward,
                collided=outcome.collided,
            )
        )
        state = new_state
    consumed = state.consumed_target
    record.consumed_target = consumed
    record.score = state.score
    agent.end_episode(config.targets[consumed].value if consumed is not None else None)
    return record


def run_agent(config: GridConfig, params: AgentParams, seed: int,
              episodes: int = DEFAULT_EPISODES, run: int = 0) -> list[EpisodeRecord]:
    """All episodes of a single fresh agent on one grid."""
    agent = make_agent(params, config, seed=seed)
    return [run_episode(config, agent, run=run, episode=ep)
            for ep in range(1, episodes + 1)]


def _run_task(args) -> tuple[str, int, list[EpisodeRecord], str]:
    config_json, params_json, seed, episodes, run = args
    try:
        config = GridConfig.from_json(config_json)
        params = AgentParams.from_json(params_json)
        return config.id, run, run_agent(config, params, seed, episodes, run=run), ""
    except Exception as exc:  # per-run isolation: batch continues
        return config_json.get("id", "?"), run, [], f"{type(exc).__name__}: {exc}"


@dataclass
class BatchResult:
    records: list[EpisodeRecord] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)


def run_batch(spec: RunSpec, configs: dict[str, GridConfig], workers: int = 1) -> BatchResult:
    """runs_per_config independent agents per config, in deterministic order.

    Missing configs are skipped with a note; per-run failures are
    recorded and the batch continues.
    """
    tasks = []
    result = BatchResult()
    for config_id in spec.config_ids:
        config = configs.get(config_id)
        if config is None:
            result.failures.append(f"missing config {config_id}")
            continue
        for run in range(spec.runs_per_config):
            seed = run_seed(spec.base_seed, config_id, run)
            tasks.append((config.to_json(), spec.agent.to_json(), seed, spec.episodes, run))

    outputs: dict[tuple[str, int], list[EpisodeRecord]] = {}
    if workers <= 1:
        finished = map(_run_task, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        finished = pool.map(_run_task, tasks, chunksize=4)
    for config_id, run, records, error in finished:
        if error:
            result.failures.append(f"run failed for {config_id} run {run}: {error}")
        else:
            outputs[(config_id, run)] = records
    if workers > 1:
        pool.shutdown()

    for config_id in spec.config_ids:
        for run in range(spec.runs_per_config):
            result.records.extend(outputs.get((config_id, run), []))
    return result


def summary_rows(records: list[EpisodeRecord], configs: dict[str, GridConfig]):
    """(record, consumed_rank, score, pmax, poptimal) tuples for the summary CSV."""
    rows = []
    for rec in records:
        config = configs[rec.config_id]
        rank = metrics_mod.consumed_rank(rec, config)
        rows.append(
            (
                rec,
                "none" if rank is None else str(rank),
                rec.score,
                metrics_mod.pmax(rec, config),
                metrics_mod.poptimal(rec, config),
            )
        )
    return rows
