"""Experiment service: serves task sessions to the browser UI.

The server owns the rules. A session walks one participant through an
optional practice episode (full-grid sessions only, on a small 6x6
grid) and 40 main episodes on one fixed grid, applying every move
through the environment engine and logging each event to an append-only
NDJSON file. Responses are filtered by information mode:

  full_grid   grid shape, own position, and the content of every cell
              the player has touched so far (progressive reveal)
  restricted  only the player's (x, y), the step count, and the last
              step's cost or reward; no grid shape, obstacles, targets

Scores and rewards are multiplied by 100 in views only; stored records
keep raw units and export in the exact batch-harness CSV schema so the
metrics tooling runs unmodified on human data.
"""
from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import env as env_mod
from .env import EnvState, GridConfig, initial_state
from .gen import GenSpec, generate
from .harness import summary_rows
from .records import EpisodeRecord, StepRecord, step_csv_text, summary_csv_text

FULL_GRID = "full_grid"
RESTRICTED = "restricted"

EPISODES_TOTAL = 40
PRACTICE_GRID_SIZE = 6
PRACTICE_SEED = 424242


class CreateSessionBody(BaseModel):
    participant: str
    condition: Literal["simple", "complex"]
    info_mode: Literal["full_grid", "restricted"]


class MoveBody(BaseModel):
    direction: Literal["up", "down", "left", "right"]


class RecallBody(BaseModel):
    target_positions: list[list[int]] = []
    judged_preferred: Optional[list[int]] = None
    notes: str = ""


@dataclass
class Session:
    id: str
    ordinal: int  # creation index; doubles as the "run" column on export
    participant: str
    condition: str
    info_mode: str
    config: GridConfig
    practice_config: Optional[GridConfig]
    state: EnvState
    episode: int  # 0 = practice
    practice_done: bool
    cumulative_score: float = 0.0
    last_reward: Optional[float] = None
    revealed: dict[tuple[int, int], dict] = field(default_factory=dict)
    records: list[EpisodeRecord] = field(default_factory=list)
    current: Optional[EpisodeRecord] = None
    recall: Optional[dict] = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def active_config(self) -> GridConfig:
        if self.episode == 0 and self.practice_config is not None:
            return self.practice_config
        return self.config

    @property
    def completed_all(self) -> bool:
        return self.episode >= EPISODES_TOTAL and self.state.terminated


class TaskStore:
    """All live sessions plus round-robin config assignment and event logs."""

    def __init__(self, configs: dict[str, GridConfig], data_dir: Path,
                 shuffle: bool = False, seed: int = 0):
        self.data_dir = Path(data_dir)
        (self.data_dir / "sessions").mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self._order_lock = threading.Lock()
        self._counters = {"simple": 0, "complex": 0}
        self._by_condition: dict[str, list[GridConfig]] = {"simple": [], "complex": []}
        for cfg_id in sorted(configs):
            cfg = configs[cfg_id]
            self._by_condition.setdefault(cfg.complexity, []).append(cfg)
        if shuffle:
            import numpy as np

            rng = np.random.default_rng(seed)
            for pool in self._by_condition.values():
                rng.shuffle(pool)  # type: ignore[arg-type]
        self.practice = generate(
            GenSpec(seed=PRACTICE_SEED, complexity="simple", size=PRACTICE_GRID_SIZE)
        )

    def assign(self, condition: str) -> GridConfig:
        pool = self._by_condition.get(condition)
        if not pool:
            raise HTTPException(status_code=400, detail=f"no configs for {condition!r}")
        with self._order_lock:
            cfg = pool[self._counters[condition] % len(pool)]
            self._counters[condition] += 1
        return cfg

    def create(self, body: CreateSessionBody) -> Session:
        config = self.assign(body.condition)
        practice = self.practice if body.info_mode == FULL_GRID else None
        with self._order_lock:
            ordinal = len(self.sessions)
            session = Session(
                id=uuid.uuid4().hex,
                ordinal=ordinal,
                participant=body.participant,
                condition=body.condition,
                info_mode=body.info_mode,
                config=config,
                practice_config=practice,
                state=initial_state(practice if practice is not None else config),
                episode=0 if practice is not None else 1,
                practice_done=practice is None,
            )
            self.sessions[session.id] = session
        session.current = EpisodeRecord(
            config_id=session.active_config.id, run=session.ordinal, episode=session.episode
        )
        self._reveal_spawn(session)
        self.log(session, {"event": "created", "participant": body.participant,
                           "condition": body.condition, "info_mode": body.info_mode,
                           "config_id": config.id})
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    def log(self, session: Session, event: dict) -> None:
        event = {"t": time.time(), "session": session.id, **event}
        path = self.data_dir / "sessions" / f"{session.id}.ndjson"
        with open(path, "a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _reveal_spawn(self, session: Session) -> None:
        if session.info_mode == FULL_GRID:
            spawn = session.active_config.spawn
            session.revealed[spawn] = {"x": spawn[0], "y": spawn[1], "kind": "empty"}


def _reveal_after_move(session: Session, attempted: tuple[int, int],
                       outcome: env_mod.StepOutcome, config: GridConfig) -> None:
    if session.info_mode != FULL_GRID:
        return
    if outcome.collided:
        if config.in_bounds(attempted):
            session.revealed[attempted] = {
                "x": attempted[0], "y": attempted[1], "kind": "obstacle"
            }
        return
    cell = outcome.new_position
    target_idx = config.target_at(cell)
    if target_idx is not None:
        session.revealed[cell] = {
            "x": cell[0], "y": cell[1], "kind": "target",
            "target_index": target_idx,
            "value_x100": config.targets[target_idx].value * 100,
        }
    else:
        session.revealed[cell] = {"x": cell[0], "y": cell[1], "kind": "empty"}


def session_view(session: Session) -> dict:
    """The participant-facing state, filtered by information mode."""
    view = {
        "mode": session.info_mode,
        "session_id": session.id,
        "condition": session.condition,
        "practice": session.episode == 0,
        "episode": session.episode,
        "episodes_total": EPISODES_TOTAL,
        "steps_taken": session.state.steps_taken,
        "position": list(session.state.position),
        "last_reward_x100": None if session.last_reward is None
        else session.last_reward * 100,
        "episode_score_x100": session.state.score * 100,
        "cumulative_score_x100": session.cumulative_score * 100,
        "terminal": session.state.terminated,
        "completed_all": session.completed_all,
        "recall_done": session.recall is not None,
    }
    if session.info_mode == FULL_GRID:
        config = session.active_config
        view.update(
            {
                "width": config.width,
                "height": config.height,
                "consumed_target": session.state.consumed_target is not None,
                "revealed": [session.revealed[c] for c in sorted(session.revealed)],
            }
        )
    return view


def create_app(configs: dict[str, GridConfig], data_dir: Path,
               shuffle: bool = False, seed: int = 0,
               ui_dir: Optional[Path] = None) -> FastAPI:
    store = TaskStore(configs, data_dir, shuffle=shuffle, seed=seed)
    app = FastAPI(title="gridcredit task server")
    app.state.store = store

    @app.get("/health")
    def health():
        return {"ok": True}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        session = store.create(body)
        return {"session_id": session.id, "view": session_view(session)}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(store.get(session_id))

    @app.post("/sessions/{session_id}/move")
    def move(session_id: str, body: MoveBody):
        session = store.get(session_id)
        with session.lock:
            if session.state.terminated:
                raise HTTPException(status_code=409, detail="episode already over")
            config = session.active_config
            px, py = session.state.position
            dx, dy = env_mod.DELTAS[body.direction]
            attempted = (px + dx, py + dy)
            new_state, outcome = env_mod.step(config, session.state, body.direction)
            session.state = new_state
            session.last_reward = outcome.reward
            session.cumulative_score += outcome.reward
            _reveal_after_move(session, attempted, outcome, config)
            assert session.current is not None
            session.current.steps.append(
                StepRecord(
                    x=outcome.new_position[0], y=outcome.new_position[1],
                    action=body.direction, reward=outcome.reward,
                    collided=outcome.collided,
                )
            )
            if outcome.terminal:
                session.current.consumed_target = new_state.consumed_target
                session.current.score = new_state.score
                session.records.append(session.current)
                store.log(session, {"event": "episode_end", "episode": session.episode,
                                    "steps": new_state.steps_taken,
                                    "score": new_state.score,
                                    "consumed_target": new_state.consumed_target})
            store.log(session, {"event": "move", "episode": session.episode,
                                "direction": body.direction,
                                "x": outcome.new_position[0],
                                "y": outcome.new_position[1],
                                "reward": outcome.reward,
                                "collided": outcome.collided})
            return session_view(session)

    @app.post("/sessions/{session_id}/next-episode")
    def next_episode(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if not session.state.terminated:
                raise HTTPException(status_code=409, detail="episode still in progress")
            if session.completed_all:
                return session_view(session)  # completion marker; nothing to advance
            session.episode += 1
            if session.episode == 1:
                session.practice_done = True
                session.revealed = {}  # the practice grid's reveals do not carry over
            session.state = initial_state(session.config)
            session.last_reward = None
            session.current = EpisodeRecord(
                config_id=session.config.id, run=session.ordinal, episode=session.episode
            )
            store._reveal_spawn(session)
            store.log(session, {"event": "episode_start", "episode": session.episode,
                                "config_id": session.config.id})
            return session_view(session)

    @app.post("/sessions/{session_id}/recall")
    def recall(session_id: str, body: RecallBody):
        session = store.get(session_id)
        with session.lock:
            if not session.completed_all:
                raise HTTPException(status_code=409,
                                    detail="recall opens after the final episode")
            session.recall = body.model_dump()
            store.log(session, {"event": "recall", **session.recall})
            return {"ok": True}

    @app.get("/export")
    def export(condition: Optional[str] = Query(default=None),
               info_mode: Optional[str] = Query(default=None),
               kind: str = Query(default="steps")):
        records: list[EpisodeRecord] = []
        config_map: dict[str, GridConfig] = {}
        for session in sorted(store.sessions.values(), key=lambda s: s.ordinal):
            if condition and session.condition != condition:
                continue
            if info_mode and session.info_mode != info_mode:
                continue
            config_map[session.config.id] = session.config
            records.extend(r for r in session.records if r.episode >= 1)
        if kind == "summary":
            text = summary_csv_text(summary_rows(records, config_map))
        elif kind == "steps":
            text = step_csv_text(records)
        else:
            raise HTTPException(status_code=400, detail="kind must be steps or summary")
        return PlainTextResponse(text, media_type="text/csv")

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
