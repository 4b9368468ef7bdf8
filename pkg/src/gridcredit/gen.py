"""Procedural grid generator with controlled decision complexity.

Complexity is the gap between how far the best target is and how far the
nearest lesser target is: delta = dist(spawn, preferred) - dist(spawn,
closest distractor), measured along obstacle-aware shortest paths.
Simple grids fix delta = 1 and place the preferred target on a straight
unobstructed line from the spawn; complex grids fix delta = 4 and put an
obstacle squarely on that line, forcing a detour.

Obstacles are 1-3 straight segments rasterized between two sampled
endpoints. The four target values are drawn from a Dirichlet
distribution (concentration 0.5 by default: dispersed values, so the
best target usually clears the agents' 0.4 optimism default) and
resampled until they are pairwise distinct and the preferred target's
net reward (value - 0.01 * path length) strictly beats every
distractor's. Everything is a pure function of the seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .env import Coord, GridConfig, Target, bfs_distances

SIMPLE = "simple"
COMPLEX = "complex"

COMPLEXITY_GAP = {SIMPLE: 1, COMPLEX: 4}

STEP_COST_RATE = 0.01
VALUE_DISTINCT_TOL = 1e-9

# Placement scheme: the nearest lesser target sits d' = d - delta steps
# out and carries the smallest value (the low-hanging fruit is the worst
# one); the other two lesser targets sit beyond the preferred target.
# The preferred distance band keeps every grid discoverable within the
# 31-step budget.
PREFERRED_DISTANCE_RANGE = {SIMPLE: (3, 5), COMPLEX: (5, 5)}
MAX_SEGMENT_SPAN = 4  # obstacle endpoints at most this far apart per axis

MAX_ATTEMPTS = 2000
VALUE_RESAMPLES = 200

# Fixed seed ranges defining this repo's reference grid set.
REFERENCE_SIMPLE_COUNT = 64
REFERENCE_COMPLEX_COUNT = 62
_REFERENCE_SEED_BASE = {SIMPLE: 1, COMPLEX: 10_001}


class GenerationError(Exception):
    """Raised when no valid grid exists within the attempt budget."""


@dataclass(frozen=True)
class GenSpec:
    seed: int
    complexity: str = SIMPLE
    size: int = 11
    dirichlet_alpha: float = 0.5
    max_obstacles: int = 3  # segment count sampled from [1, max_obstacles]

    def __post_init__(self):
        if self.complexity not in COMPLEXITY_GAP:
            raise ValueError(f"unknown complexity {self.complexity!r}")
        if not 1 <= self.max_obstacles <= 3:
            raise ValueError("obstacle segment count must stay within [1, 3]")
        if self.size < 5:
            raise ValueError("grids smaller than 5x5 cannot hold the task")


def raster_segment(a: Coord, b: Coord) -> set[Coord]:
    """Cells of the line segment from a to b (Bresenham walk, endpoints included)."""
    x0, y0 = a
    x1, y1 = b
    cells = set()
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        cells.add((x0, y0))
        if (x0, y0) == (x1, y1):
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
    return cells


def _line_between(a: Coord, b: Coord) -> list[Coord]:
    """Cells strictly between two axis-aligned coordinates."""
    (x0, y0), (x1, y1) = a, b
    if x0 == x1:
        step = 1 if y1 > y0 else -1
        return [(x0, y) for y in range(y0 + step, y1, step)]
    if y0 == y1:
        step = 1 if x1 > x0 else -1
        return [(x, y0) for x in range(x0 + step, x1, step)]
    raise ValueError("cells are not axis-aligned")


def _sample_cell(rng: np.random.Generator, size: int) -> Coord:
    return (int(rng.integers(size)), int(rng.integers(size)))


def _sample_segment(rng: np.random.Generator, size: int) -> set[Coord]:
    """A short obstacle: two nearby endpoints, rasterized."""
    ax, ay = _sample_cell(rng, size)
    for _ in range(20):
        bx = ax + int(rng.integers(-MAX_SEGMENT_SPAN, MAX_SEGMENT_SPAN + 1))
        by = ay + int(rng.integers(-MAX_SEGMENT_SPAN, MAX_SEGMENT_SPAN + 1))
        if 0 <= bx < size and 0 <= by < size:
            return raster_segment((ax, ay), (bx, by))
    return {(ax, ay)}


def _attempt(spec: GenSpec, rng: np.random.Generator) -> Optional[GridConfig]:
    size = spec.size
    gap = COMPLEXITY_GAP[spec.complexity]

    spawn = _sample_cell(rng, size)
    if size >= 9:
        lo_pref, hi_pref = PREFERRED_DISTANCE_RANGE[spec.complexity]
    else:  # small practice grids scale the band down
        lo_pref, hi_pref = size // 2, size // 2 + 1

    # Preferred target sits on an axis-aligned line from the spawn. In
    # simple grids its distance is the line length; in complex ones the
    # blocker adds a detour, so the line is drawn a little shorter.
    directions = [(0, -1), (0, 1), (-1, 0), (1, 0)]
    ddx, ddy = directions[int(rng.integers(4))]
    extent = _extent(spawn, (ddx, ddy), size)
    if spec.complexity == SIMPLE:
        min_line, max_line = lo_pref, hi_pref
    else:
        # detour adds >= 2; the blocker needs at least one between-cell
        min_line, max_line = max(2, lo_pref - 3), hi_pref - 2
    max_line = min(max_line, extent)
    if max_line < min_line:
        return None
    line_len = int(rng.integers(min_line, max_line + 1))
    preferred = (spawn[0] + ddx * line_len, spawn[1] + ddy * line_len)
    between = _line_between(spawn, preferred)

    n_segments = int(rng.integers(1, spec.max_obstacles + 1))
    obstacles: set[Coord] = set()
    protected = {spawn, preferred}

    if spec.complexity == COMPLEX:
        # First segment crosses the direct line, perpendicular to it,
        # close to the target: the detour ends where the target is.
        blocker = between[-1 - int(rng.integers(min(2, len(between))))]
        px, py = ddy, ddx  # perpendicular direction
        back = min(int(rng.integers(0, 4)), _extent(blocker, (-px, -py), size))
        fwd = min(int(rng.integers(0, 4)), _extent(blocker, (px, py), size))
        seg = raster_segment(
            (blocker[0] - px * back, blocker[1] - py * back),
            (blocker[0] + px * fwd, blocker[1] + py * fwd),
        )
        if seg & protected:
            return None
        obstacles |= seg
        n_segments -= 1

    forbidden = protected | (set(between) if spec.complexity == SIMPLE else set())
    for _ in range(n_segments):
        for _try in range(30):
            seg = _sample_segment(rng, size)
            if not (seg & forbidden):
                obstacles |= seg
                break
        else:
            return None

    probe = GridConfig(
        id="probe",
        width=size,
        height=size,
        obstacles=frozenset(obstacles),
        targets=(),
        spawn=spawn,
        complexity=spec.complexity,
    )
    dist = bfs_distances(probe, spawn)
    if preferred not in dist:
        return None
    d_pref = dist[preferred]
    if spec.complexity == SIMPLE and d_pref != line_len:
        return None
    if not lo_pref <= d_pref <= hi_pref:
        return None
    d_close = d_pref - gap
    if d_close < 1:
        return None

    # No lesser target sits on the direct line: the straight walk (or in
    # complex grids, the runway up to the blocker) belongs to the
    # preferred target.
    banned = set(between) | {spawn, preferred}

    # The nearest lesser target prefers cells off the spawn's axes, so a
    # straight walk from the spawn rarely runs into it.
    ring = [c for c, d in dist.items() if d == d_close and c not in banned]
    near = sorted(c for c in ring if c[0] != spawn[0] and c[1] != spawn[1]) or sorted(ring)
    if not near:
        return None
    closest = near[int(rng.integers(len(near)))]
    banned.add(closest)

    far = sorted(c for c, d in dist.items() if d > d_pref and c not in banned)
    if len(far) < 2:
        return None
    picks = rng.choice(len(far), size=2, replace=False)
    others = [far[int(i)] for i in sorted(int(p) for p in picks)]

    # The labeled distances must be attainable without crossing another
    # target, or the optimal-path metric would be unachievable.
    target_cells = [preferred, closest] + others
    blocked_pref = frozenset(target_cells[1:])
    if bfs_distances(probe, spawn, extra_blocked=blocked_pref).get(preferred) != d_pref:
        return None
    blocked_close = frozenset([preferred] + others)
    if bfs_distances(probe, spawn, extra_blocked=blocked_close).get(closest) != d_close:
        return None

    distances = [d_pref, d_close, dist[others[0]], dist[others[1]]]
    values = _sample_values(rng, spec.dirichlet_alpha, distances)
    if values is None:
        return None

    config_id = f"{spec.complexity}-s{spec.seed}"
    if size != 11:
        config_id += f"-g{size}"
    return GridConfig(
        id=config_id,
        width=size,
        height=size,
        obstacles=frozenset(obstacles),
        targets=tuple(
            Target(c[0], c[1], v) for c, v in zip(target_cells, values)
        ),
        spawn=spawn,
        complexity=spec.complexity,
    )


def _extent(cell: Coord, direction: Coord, size: int) -> int:
    """How many cells fit from cell along direction before leaving the grid."""
    x, y = cell
    dx, dy = direction
    steps = size
    if dx > 0:
        steps = min(steps, size - 1 - x)
    elif dx < 0:
        steps = min(steps, x)
    if dy > 0:
        steps = min(steps, size - 1 - y)
    elif dy < 0:
        steps = min(steps, y)
    return steps


def _sample_values(
    rng: np.random.Generator, alpha: float, distances: list[int]
) -> Optional[list[float]]:
    """Dirichlet target values in placement order (preferred, closest
    distractor, two far distractors); None if no draw satisfies
    distinctness and the net-reward ordering.

    The closest distractor takes the smallest value; the remaining two
    values go to the far targets in sampled order.
    """
    for _ in range(VALUE_RESAMPLES):
        draw = rng.dirichlet([alpha] * 4)
        vals = sorted(float(v) for v in draw)
        if min(b - a for a, b in zip(vals, vals[1:])) <= VALUE_DISTINCT_TOL:
            continue
        middle = [vals[1], vals[2]]
        if rng.integers(2):
            middle.reverse()
        assigned = [vals[-1], vals[0], *middle]
        net_pref = assigned[0] - STEP_COST_RATE * distances[0]
        if all(
            net_pref > v - STEP_COST_RATE * d
            for v, d in zip(assigned[1:], distances[1:])
        ):
            return assigned
    return None


def generate(spec: GenSpec) -> GridConfig:
    """Generate a valid config for the spec; deterministic in the seed.

    Raises GenerationError if the attempt budget is exhausted (an
    infeasible spec, e.g. a tiny grid with long required distances).
    """
    rng = np.random.default_rng(spec.seed)
    for _ in range(MAX_ATTEMPTS):
        config = _attempt(spec, rng)
        if config is not None and not validate(config):
            return config
    raise GenerationError(f"no valid grid after {MAX_ATTEMPTS} attempts: {spec}")


def validate(config: GridConfig) -> list[str]:
    """All broken invariants of a config, by name; empty means valid."""
    problems: list[str] = []
    if len(config.targets) != 4:
        problems.append("must have exactly 4 targets")
        return problems

    cells = [t.cell for t in config.targets]
    if len(set(cells)) != len(cells):
        problems.append("targets overlap")
    if any(not config.in_bounds(c) for c in cells):
        problems.append("target out of bounds")
    if any(c in config.obstacles for c in cells):
        problems.append("target on an obstacle")
    if any(c == config.spawn for c in cells):
        problems.append("target on the spawn")
    if not config.is_free(config.spawn):
        problems.append("spawn blocked or out of bounds")
        return problems

    values = [t.value for t in config.targets]
    if any(not (0.0 < v < 1.0) for v in values):
        problems.append("target value outside (0,1)")
    ordered = sorted(values)
    if min(b - a for a, b in zip(ordered, ordered[1:])) <= VALUE_DISTINCT_TOL:
        problems.append("target values not distinct")

    dist = bfs_distances(config, config.spawn)
    if any(c not in dist for c in cells):
        problems.append("target unreachable from spawn")
        return problems

    pref = config.preferred_index()
    net_pref = values[pref] - STEP_COST_RATE * dist[cells[pref]]
    for i, (v, c) in enumerate(zip(values, cells)):
        if i != pref and net_pref <= v - STEP_COST_RATE * dist[c]:
            problems.append("net-reward ordering violated")
            break

    problems.extend(_complexity_problems(config, dist, pref))
    return problems


def _complexity_problems(config: GridConfig, dist: dict[Coord, int], pref: int) -> list[str]:
    problems = []
    gap = COMPLEXITY_GAP.get(config.complexity)
    if gap is None:
        return [f"unknown complexity label {config.complexity!r}"]
    pref_cell = config.targets[pref].cell
    d_close = min(
        dist[t.cell] for i, t in enumerate(config.targets) if i != pref
    )
    if dist[pref_cell] - d_close != gap:
        problems.append("complexity gap mismatch")
    sx, sy = config.spawn
    if pref_cell[0] != sx and pref_cell[1] != sy:
        problems.append("preferred target not on an axis line from spawn")
        return problems
    blocked = any(c in config.obstacles for c in _line_between(config.spawn, pref_cell))
    if config.complexity == SIMPLE and blocked:
        problems.append("direct line to preferred target obstructed")
    if config.complexity == COMPLEX and not blocked:
        problems.append("direct line to preferred target unobstructed")
    return problems


def reference_seeds(complexity: str, count: Optional[int] = None) -> list[int]:
    """Seeds of the repo's reference grid set (64 simple + 62 complex).

    Candidate seeds run upward from a fixed base; the rare infeasible
    seed is skipped, so the list is stable.
    """
    if count is None:
        count = REFERENCE_SIMPLE_COUNT if complexity == SIMPLE else REFERENCE_COMPLEX_COUNT
    seeds = []
    candidate = _REFERENCE_SEED_BASE[complexity]
    while len(seeds) < count:
        try:
            generate(GenSpec(seed=candidate, complexity=complexity))
        except GenerationError:
            pass
        else:
            seeds.append(candidate)
        candidate += 1
    return seeds


def reference_set(complexity: str, count: Optional[int] = None) -> list[GridConfig]:
    return [
        generate(GenSpec(seed=s, complexity=complexity))
        for s in reference_seeds(complexity, count)
    ]
