"""The four decision agents and their credit-assignment rules.

Three instance-based learners share one memory engine and differ only in
how an episode's delayed outcome is credited over its steps. Every step
stores its own cost the moment it happens (immediate feedback keeps the
agent from retrying a move it just paid for); when an episode ends on a
target, the mechanism converts those provisional step outcomes into
terminal credit, in place, at each step's original timestamp:

  equal        every step of a successful episode ends up holding the
               raw target value; failed episodes keep per-step costs
  exponential  step l of a T-step successful episode ends up holding
               gamma^(T-l) * target value; failures as above
  td           per-step bootstrapped write: the stored outcome is the
               current blended value nudged by the temporal-difference
               error delta = R + gamma * max_a V(S', a) - V(S, A)

Tabular Q-learning (epsilon-greedy, optimistic initialization) is the
comparison model: delta = R + gamma * max_a Q(S', a) - Q(S, A), with
Q <- Q + alpha * delta applied in place each step.

All four expose the same act/observe/end_episode surface so one episode
loop drives any of them.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .env import ACTIONS, Coord, GridConfig
from .ibl import DEFAULT_UTILITY, InstanceMemory, OptionKey

KIND_IBL_EQUAL = "ibl-equal"
KIND_IBL_EXPONENTIAL = "ibl-exponential"
KIND_IBL_TD = "ibl-td"
KIND_Q_LEARNING = "q-learning"

AGENT_KINDS = (KIND_IBL_EQUAL, KIND_IBL_EXPONENTIAL, KIND_IBL_TD, KIND_Q_LEARNING)


@dataclass
class AgentParams:
    """Full parameter record; fields irrelevant to a kind are kept as-is
    so configurations round-trip exactly."""

    kind: str
    sigma: float = 0.25
    decay: float = 0.5
    gamma: float = 0.99
    alpha: float = 0.8
    epsilon: float = 0.0
    default_utility: float = DEFAULT_UTILITY

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "AgentParams":
        return cls(**data)


# Published defaults per condition. The equal and exponential learners use
# the customary memory defaults (sigma 0.25, decay 0.5, discount 0.99); the
# TD pair carries the values found by the 1,000-trial accuracy sweep.
_DEFAULTS = {
    ("simple", KIND_IBL_EQUAL): dict(sigma=0.25, decay=0.50),
    ("simple", KIND_IBL_EXPONENTIAL): dict(sigma=0.25, decay=0.50, gamma=0.990),
    ("simple", KIND_IBL_TD): dict(sigma=0.049, decay=0.95, gamma=0.986, alpha=0.824),
    ("simple", KIND_Q_LEARNING): dict(gamma=0.997, alpha=0.839, epsilon=0.002),
    ("complex", KIND_IBL_EQUAL): dict(sigma=0.25, decay=0.50),
    ("complex", KIND_IBL_EXPONENTIAL): dict(sigma=0.25, decay=0.50, gamma=0.990),
    ("complex", KIND_IBL_TD): dict(sigma=0.038, decay=0.886, gamma=0.999, alpha=0.838),
    ("complex", KIND_Q_LEARNING): dict(gamma=0.977, alpha=0.865, epsilon=0.022),
}


def default_params(kind: str, complexity: str) -> AgentParams:
    """Published default parameters for an agent kind in one condition."""
    try:
        overrides = _DEFAULTS[(complexity, kind)]
    except KeyError:
        raise ValueError(f"no defaults for kind={kind!r} complexity={complexity!r}")
    return AgentParams(kind=kind, **overrides)


# -- credit-assignment rules ----------------------------------------------


@dataclass
class PendingTrajectory:
    """Episode steps awaiting credit: (option, stored reward, global timestamp)."""

    steps: list[tuple[OptionKey, float, int]] = field(default_factory=list)
    terminal_value: Optional[float] = None  # raw target value when one was reached


def learn_equal(traj: PendingTrajectory, mem: InstanceMemory) -> None:
    """Equal credit: after a hit, every step of the trajectory holds the
    raw target value; after a miss, each step keeps its own cost.

    Step costs were already stored as the episode unfolded, so the miss
    branch has nothing left to do and the hit branch reassigns each
    step's provisional outcome in place.
    """
    if traj.terminal_value is None:
        return
    for option, reward, ts in traj.steps:
        mem.reassign(option, ts, reward, traj.terminal_value)


def learn_exponential(traj: PendingTrajectory, mem: InstanceMemory, gamma: float) -> None:
    """Discounted credit: step l of a T-step hit holds gamma^(T-l) * target
    value; misses keep per-step costs (already stored step by step)."""
    if traj.terminal_value is None:
        return
    total = len(traj.steps)
    for l, (option, reward, ts) in enumerate(traj.steps, start=1):
        mem.reassign(option, ts, reward, gamma ** (total - l) * traj.terminal_value)


def learn_td_step(
    mem: InstanceMemory,
    state: Coord,
    action: str,
    reward: float,
    next_state: Coord,
    terminal: bool,
    gamma: float,
    alpha: float,
) -> float:
    """One bootstrapped update; call once per step, before advancing the clock.

    The learning signal uses noise-free blends (activation noise shapes
    choices, not value estimates); the bootstrap term is 0 at a terminal
    step. Returns the error delta.
    """
    v_sa = mem.blended_value_quiet((state, action))
    if terminal:
        bootstrap = 0.0
    else:
        bootstrap = max(mem.blended_value_quiet((next_state, a)) for a in ACTIONS)
    delta = reward + gamma * bootstrap - v_sa
    mem.store((state, action), v_sa + alpha * delta)
    return delta


class QTable:
    """Tabular action values; unvisited pairs read as the optimistic default."""

    def __init__(self, default_utility: float = DEFAULT_UTILITY):
        self.default_utility = default_utility
        self.values: dict[OptionKey, float] = {}

    def get(self, state: Coord, action: str) -> float:
        return self.values.get((state, action), self.default_utility)

    def set(self, state: Coord, action: str, value: float) -> None:
        self.values[(state, action)] = value

    def best_value(self, state: Coord) -> float:
        return max(self.get(state, a) for a in ACTIONS)


def learn_q_step(
    qt: QTable,
    state: Coord,
    action: str,
    reward: float,
    next_state: Coord,
    terminal: bool,
    gamma: float,
    alpha: float,
) -> float:
    """Standard tabular update Q <- Q + alpha * delta; returns delta."""
    q = qt.get(state, action)
    bootstrap = 0.0 if terminal else qt.best_value(next_state)
    delta = reward + gamma * bootstrap - q
    qt.set(state, action, q + alpha * delta)
    return delta


# -- agents ----------------------------------------------------------------


def _break_tie(winners: list[str], rng) -> str:
    """Exact value ties break uniformly at random."""
    if len(winners) == 1:
        return winners[0]
    return winners[int(rng.integers(len(winners)))]


class IblAgent:
    """Memory-based agent; the credit rule comes from the concrete subclass."""

    kind = KIND_IBL_EQUAL

    def __init__(self, params: AgentParams, config: GridConfig, seed: Optional[int] = None):
        self.params = params
        self.memory = InstanceMemory(
            decay=params.decay,
            noise=params.sigma,
            default_utility=params.default_utility,
            seed=seed,
        )
        self.memory.prepopulate((cell, a) for cell in config.cells() for a in ACTIONS)
        self.trajectory = PendingTrajectory()

    def begin_episode(self) -> None:
        self.trajectory = PendingTrajectory()

    def act(self, state: Coord) -> str:
        (_, action) = self.memory.choose([(state, a) for a in ACTIONS])
        return action

    def observe(
        self, state: Coord, action: str, reward: float, next_state: Coord, terminal: bool
    ) -> None:
        # the step's cost is immediate feedback; terminal credit may
        # overwrite it at episode end
        self.memory.store((state, action), reward)
        self.trajectory.steps.append(((state, action), reward, self.memory.t))
        self.memory.advance_clock()

    def end_episode(self, consumed_value: Optional[float]) -> None:
        self.trajectory.terminal_value = consumed_value
        learn_equal(self.trajectory, self.memory)


class IblEqualAgent(IblAgent):
    kind = KIND_IBL_EQUAL


class IblExponentialAgent(IblAgent):
    kind = KIND_IBL_EXPONENTIAL

    def end_episode(self, consumed_value: Optional[float]) -> None:
        self.trajectory.terminal_value = consumed_value
        learn_exponential(self.trajectory, self.memory, self.params.gamma)


class IblTdAgent(IblAgent):
    kind = KIND_IBL_TD

    def observe(
        self, state: Coord, action: str, reward: float, next_state: Coord, terminal: bool
    ) -> None:
        learn_td_step(
            self.memory,
            state,
            action,
            reward,
            next_state,
            terminal,
            self.params.gamma,
            self.params.alpha,
        )
        self.memory.advance_clock()

    def end_episode(self, consumed_value: Optional[float]) -> None:
        pass  # all learning happened per step


class QLearningAgent:
    kind = KIND_Q_LEARNING

    def __init__(self, params: AgentParams, config: GridConfig, seed: Optional[int] = None):
        self.params = params
        self.qtable = QTable(default_utility=params.default_utility)
        self.rng = np.random.default_rng(seed)

    def begin_episode(self) -> None:
        pass

    def act(self, state: Coord) -> str:
        # The exploration gate is drawn every step, even with epsilon = 0,
        # so the stream layout does not depend on the parameter value.
        if self.rng.random() < self.params.epsilon:
            return ACTIONS[int(self.rng.integers(len(ACTIONS)))]
        values = [self.qtable.get(state, a) for a in ACTIONS]
        best = max(values)
        winners = [a for a, v in zip(ACTIONS, values) if v == best]
        return _break_tie(winners, self.rng)

    def observe(
        self, state: Coord, action: str, reward: float, next_state: Coord, terminal: bool
    ) -> None:
        learn_q_step(
            self.qtable,
            state,
            action,
            reward,
            next_state,
            terminal,
            self.params.gamma,
            self.params.alpha,
        )

    def end_episode(self, consumed_value: Optional[float]) -> None:
        pass


_AGENT_CLASSES = {
    KIND_IBL_EQUAL: IblEqualAgent,
    KIND_IBL_EXPONENTIAL: IblExponentialAgent,
    KIND_IBL_TD: IblTdAgent,
    KIND_Q_LEARNING: QLearningAgent,
}


def make_agent(params: AgentParams, config: GridConfig, seed: Optional[int] = None):
    """Fresh, fully initialized agent of the requested kind."""
    return _AGENT_CLASSES[params.kind](params, config, seed=seed)
