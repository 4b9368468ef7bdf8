"""Deterministic gridworld: movement, rewards, termination, path queries.

A single avatar walks a rectangular grid containing blocking obstacle
cells and four valued targets. Each move costs -0.01; walking into an
obstacle or off the grid additionally costs -0.05 and leaves the avatar
in place. Touching any target ends the episode with that target's value
(minus the step cost); otherwise the episode ends after 31 steps.

All transitions are pure functions over an immutable ``GridConfig`` and
a value-type ``EnvState``, so arbitrarily many episodes can run in
parallel without shared state. All stochasticity in the toolkit lives in
the agents, never here.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterator, Optional

Coord = tuple[int, int]

ACTIONS: tuple[str, ...] = ("up", "down", "left", "right")

# x grows rightward, y grows downward (screen coordinates).
DELTAS: dict[str, Coord] = {
    "up": (0, -1),
    "down": (0, 1),
    "left": (-1, 0),
    "right": (1, 0),
}

STEP_COST = -0.01
OBSTACLE_PENALTY = -0.05
# Both penalties stack on a collision step (the step was still taken).
# Set COLLISION_STEP_COST = 0.0 to charge the obstacle penalty alone.
COLLISION_STEP_COST = STEP_COST
MAX_STEPS = 31

N_TARGETS = 4


@dataclass(frozen=True)
class Target:
    x: int
    y: int
    value: float

    @property
    def cell(self) -> Coord:
        return (self.x, self.y)


@dataclass(frozen=True)
class GridConfig:
    """Immutable task definition shared by generator, agents, and server."""

    id: str
    width: int
    height: int
    obstacles: frozenset[Coord]
    targets: tuple[Target, ...]
    spawn: Coord
    complexity: str  # "simple" | "complex"

    def in_bounds(self, cell: Coord) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_free(self, cell: Coord) -> bool:
        return self.in_bounds(cell) and cell not in self.obstacles

    def cells(self) -> Iterator[Coord]:
        for y in range(self.height):
            for x in range(self.width):
                yield (x, y)

    def target_at(self, cell: Coord) -> Optional[int]:
        for i, t in enumerate(self.targets):
            if t.cell == cell:
                return i
        return None

    def preferred_index(self) -> int:
        return max(range(len(self.targets)), key=lambda i: self.targets[i].value)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "width": self.width,
            "height": self.height,
            "obstacles": sorted([list(c) for c in self.obstacles]),
            "targets": [{"x": t.x, "y": t.y, "value": t.value} for t in self.targets],
            "spawn": list(self.spawn),
            "complexity": self.complexity,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict) -> "GridConfig":
        return cls(
            id=data["id"],
            width=int(data["width"]),
            height=int(data["height"]),
            obstacles=frozenset((int(x), int(y)) for x, y in data["obstacles"]),
            targets=tuple(
                Target(int(t["x"]), int(t["y"]), float(t["value"]))
                for t in data["targets"]
            ),
            spawn=(int(data["spawn"][0]), int(data["spawn"][1])),
            complexity=data["complexity"],
        )


@dataclass(frozen=True)
class EnvState:
    """Within-episode state; steps_taken counts completed moves (0 at spawn)."""

    position: Coord
    steps_taken: int = 0
    score: float = 0.0
    terminated: bool = False
    consumed_target: Optional[int] = None


@dataclass(frozen=True)
class StepOutcome:
    new_position: Coord
    reward: float
    collided: bool
    terminal: bool


def initial_state(config: GridConfig) -> EnvState:
    return EnvState(position=config.spawn)


def step(config: GridConfig, state: EnvState, action: str) -> tuple[EnvState, StepOutcome]:
    """Apply one move. Stepping a terminated state is a contract violation."""
    if state.terminated:
        raise ValueError("cannot step a terminated episode")
    if action not in DELTAS:
        raise ValueError(f"unknown action {action!r}")

    dx, dy = DELTAS[action]
    px, py = state.position
    candidate = (px + dx, py + dy)

    consumed: Optional[int] = None
    if not config.is_free(candidate):
        new_position = state.position
        reward = COLLISION_STEP_COST + OBSTACLE_PENALTY
        collided = True
        terminal = False
    else:
        new_position = candidate
        collided = False
        target_idx = config.target_at(candidate)
        if target_idx is not None:
            reward = config.targets[target_idx].value + STEP_COST
            consumed = target_idx
            terminal = True
        else:
            reward = STEP_COST
            terminal = False

    steps = state.steps_taken + 1
    if steps >= MAX_STEPS:
        terminal = True

    new_state = EnvState(
        position=new_position,
        steps_taken=steps,
        score=state.score + reward,
        terminated=terminal,
        consumed_target=consumed,
    )
    return new_state, StepOutcome(new_position, reward, collided, terminal)


def reset(config: GridConfig, state: EnvState) -> EnvState:
    """Fresh episode on the same grid (score does not carry over)."""
    del state
    return initial_state(config)


def bfs_distances(
    config: GridConfig,
    source: Coord,
    extra_blocked: frozenset[Coord] = frozenset(),
) -> dict[Coord, int]:
    """4-neighbor BFS distances from source, avoiding obstacles and extra_blocked.

    Cells listed in extra_blocked are impassable but the returned map still
    assigns them a distance if they are adjacent to a reached cell, so a
    blocked target's own distance stays queryable.
    """
    dist: dict[Coord, int] = {source: 0}
    queue: deque[Coord] = deque([source])
    while queue:
        cell = queue.popleft()
        d = dist[cell]
        cx, cy = cell
        for dx, dy in DELTAS.values():
            nxt = (cx + dx, cy + dy)
            if nxt in dist or not config.is_free(nxt):
                continue
            dist[nxt] = d + 1
            if nxt not in extra_blocked:
                queue.append(nxt)
    return dist


def shortest_path_len(config: GridConfig, src: Coord, dst: Coord) -> Optional[int]:
    """Minimal number of moves from src to dst avoiding obstacles; None if unreachable."""
    if not config.is_free(src) or not config.is_free(dst):
        raise ValueError("shortest_path_len requires non-obstacle endpoints")
    if src == dst:
        return 0
    return bfs_distances(config, src).get(dst)


def accessible_cells(config: GridConfig) -> int:
    """Count of non-obstacle cells reachable from spawn (spawn included)."""
    return len(bfs_distances(config, config.spawn))
