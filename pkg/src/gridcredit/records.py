"""Shared trajectory log formats: episode records, CSV schemas, config IO.

One EpisodeRecord is the unit both simulated agents and human players
produce. The step CSV holds one row per move (position after the move);
the summary CSV holds one row per episode. Floats are written with
repr() so files round-trip exactly and identical runs are byte-identical.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .env import GridConfig

STEP_HEADER = ["config_id", "run", "episode", "step", "x", "y", "action", "reward", "collided"]
SUMMARY_HEADER = [
    "config_id",
    "run",
    "episode",
    "consumed_rank",
    "steps",
    "score",
    "pmax",
    "poptimal",
]


@dataclass(frozen=True)
class StepRecord:
    """One move; x, y is the position after the move (unchanged on a collision)."""

    x: int
    y: int
    action: str
    reward: float
    collided: bool


@dataclass
class EpisodeRecord:
    config_id: str
    run: int
    episode: int
    steps: list[StepRecord] = field(default_factory=list)
    consumed_target: Optional[int] = None
    score: float = 0.0


def write_step_csv(path: Path, records: Iterable[EpisodeRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(step_csv_text(records))


def step_csv_text(records: Iterable[EpisodeRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STEP_HEADER)
    for rec in records:
        for i, s in enumerate(rec.steps, start=1):
            writer.writerow(
                [rec.config_id, rec.run, rec.episode, i, s.x, s.y, s.action,
                 repr(s.reward), int(s.collided)]
            )
    return buf.getvalue()


def read_step_csv(path: Path, configs: dict[str, GridConfig]) -> list[EpisodeRecord]:
    """Rebuild EpisodeRecords from a step CSV; configs supply spawn/target data."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    records: dict[tuple[str, int, int], EpisodeRecord] = {}
    for row in rows:
        key = (row["config_id"], int(row["run"]), int(row["episode"]))
        rec = records.get(key)
        if rec is None:
            rec = EpisodeRecord(config_id=key[0], run=key[1], episode=key[2])
            records[key] = rec
        rec.steps.append(
            StepRecord(
                x=int(row["x"]),
                y=int(row["y"]),
                action=row["action"],
                reward=float(row["reward"]),
                collided=bool(int(row["collided"])),
            )
        )
    for rec in records.values():
        rec.score = sum(s.reward for s in rec.steps)
        last = rec.steps[-1]
        config = configs.get(rec.config_id)
        if config is not None and not last.collided:
            rec.consumed_target = config.target_at((last.x, last.y))
    return [records[k] for k in sorted(records)]


def summary_csv_text(
    rows: Iterable[tuple[EpisodeRecord, str, float, bool, bool]]
) -> str:
    """Rows are (record, consumed_rank, score, pmax, poptimal)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for rec, rank, score, pmax, poptimal in rows:
        writer.writerow(
            [rec.config_id, rec.run, rec.episode, rank, len(rec.steps),
             repr(score), int(pmax), int(poptimal)]
        )
    return buf.getvalue()


# -- config directories ----------------------------------------------------


def save_config(config: GridConfig, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{config.id}.json"
    path.write_text(config.to_json_str() + "\n")
    return path


def load_config(path: Path) -> GridConfig:
    return GridConfig.from_json(json.loads(Path(path).read_text()))


def load_config_dir(config_dir: Path) -> dict[str, GridConfig]:
    configs = {}
    for path in sorted(Path(config_dir).glob("*.json")):
        if path.name == "manifest.json":
            continue
        cfg = load_config(path)
        configs[cfg.id] = cfg
    return configs


def config_set_hash(configs: Iterable[GridConfig]) -> str:
    digest = hashlib.sha256()
    for cfg in sorted(configs, key=lambda c: c.id):
        digest.update(cfg.to_json_str().encode())
    return digest.hexdigest()
