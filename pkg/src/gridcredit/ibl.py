"""Instance memory: activation, retrieval probability, and blending.

An instance is a memory unit pairing an option k = (state, action) with
an experienced outcome x and the set of global times it was observed.
Its activation captures recency and frequency plus logistic noise:

    Act = ln( sum_{t' in T} (t - t')^(-d) ) + sigma * ln((1 - xi) / xi)

with decay d, noise scale sigma, and xi ~ U(0,1) drawn fresh per
instance per query. Retrieval probability is a Boltzmann softmax over
the instances of one option with temperature tau = sigma * sqrt(2), and
the blended value of an option is the retrieval-probability-weighted
mean of its stored outcomes:

    p_i = exp(Act_i / tau) / sum_j exp(Act_j / tau)
    V   = sum_i p_i * x_i

With sigma = 0 the temperature degenerates; we take the deterministic
limit: all retrieval mass on the maximum-activation instance, exact ties
split evenly. Choices pick the option with the maximum blended value.

Reproducibility convention: one memory owns one seeded random stream.
Noise draws happen per instance in ascending-outcome order within an
option, and options are queried in the order the caller lists them, so
identical seeds give bit-identical runs. When sigma = 0 no noise values
are drawn at all.
"""
from __future__ import annotations

import math
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .env import Coord

Direction = str
OptionKey = tuple[Coord, Direction]

DEFAULT_UTILITY = 0.4

# Outcomes are compared after rounding to 12 decimal digits: re-observing
# an (option, outcome) pair appends a timestamp instead of duplicating
# the instance, which keeps continuous-valued outcomes from growing the
# store without bound.
OUTCOME_DECIMALS = 12


@dataclass
class Instance:
    """One memory unit: an outcome and the ascending times it was observed."""

    outcome: float
    timestamps: list[int] = field(default_factory=list)

    def __lt__(self, other: "Instance") -> bool:
        return self.outcome < other.outcome


class InstanceMemory:
    """Per-agent instance store with a global clock and seeded noise stream.

    The clock t starts at 1 and ticks once per environment step; it is
    never reset between episodes. Prepopulated default instances carry
    timestamp 0 and are never evicted; they fade through decay alone.
    """

    def __init__(
        self,
        decay: float,
        noise: float,
        default_utility: float = DEFAULT_UTILITY,
        seed: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        if decay <= 0:
            raise ValueError("decay must be positive")
        if noise < 0:
            raise ValueError("noise must be nonnegative")
        self.decay = decay
        self.noise = noise
        self.default_utility = default_utility
        self.t = 1
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        # per option: instances kept sorted by outcome, plus a rounded-outcome index
        self._instances: dict[OptionKey, list[Instance]] = {}
        self._by_outcome: dict[OptionKey, dict[float, Instance]] = {}

    # -- storage ---------------------------------------------------------

    def instances(self, option: OptionKey) -> list[Instance]:
        return self._instances.get(option, [])

    def instance_count(self, option: OptionKey) -> int:
        return len(self._instances.get(option, ()))

    def store(self, option: OptionKey, outcome: float, timestamp: Optional[int] = None) -> None:
        """Record an observation of (option, outcome) at timestamp (default: now).

        A matching instance (equal outcome after rounding) gains a
        timestamp; otherwise a new instance is created. Timestamps stay
        strictly ascending per instance.
        """
        ts = self.t if timestamp is None else timestamp
        key = round(outcome, OUTCOME_DECIMALS)
        index = self._by_outcome.setdefault(option, {})
        inst = index.get(key)
        if inst is None:
            inst = Instance(outcome=outcome, timestamps=[ts])
            index[key] = inst
            insort(self._instances.setdefault(option, []), inst)
        else:
            pos = bisect_left(inst.timestamps, ts)
            if pos < len(inst.timestamps) and inst.timestamps[pos] == ts:
                raise ValueError("duplicate observation timestamp for one instance")
            inst.timestamps.insert(pos, ts)

    def reassign(self, option: OptionKey, timestamp: int, old_outcome: float,
                 new_outcome: float) -> None:
        """Rewrite one observation in place: the outcome recorded for option
        at timestamp becomes new_outcome at the same time.

        This is how episodic credit rules convert a step's provisional
        cost into the episode's terminal credit once the outcome is
        known; recency structure is untouched.
        """
        old_key = round(old_outcome, OUTCOME_DECIMALS)
        new_key = round(new_outcome, OUTCOME_DECIMALS)
        if old_key == new_key:
            return
        index = self._by_outcome.get(option, {})
        inst = index.get(old_key)
        if inst is None or timestamp not in inst.timestamps:
            raise ValueError(f"no observation of {option!r} at t={timestamp} to reassign")
        inst.timestamps.remove(timestamp)
        if not inst.timestamps:
            del index[old_key]
            self._instances[option].remove(inst)
        self.store(option, new_outcome, timestamp=timestamp)

    def prepopulate(self, options: Iterable[OptionKey]) -> None:
        """Seed every option with one default-utility instance at time 0."""
        if self._instances:
            raise ValueError("prepopulate requires a fresh memory")
        for option in options:
            self.store(option, self.default_utility, timestamp=0)
        self.t = 1

    def advance_clock(self) -> None:
        self.t += 1

    # -- retrieval -------------------------------------------------------

    def activation(self, inst: Instance) -> float:
        """Activation of one instance at the current clock; draws fresh noise."""
        t = self.t
        strength = 0.0
        d = self.decay
        for tp in inst.timestamps:
            age = t - tp
            if age <= 0:
                raise ValueError("instance timestamp must precede the current clock")
            strength += age ** -d
        act = math.log(strength)
        if self.noise > 0.0:
            xi = self.rng.random()
            while xi == 0.0:
                xi = self.rng.random()
            act += self.noise * math.log((1.0 - xi) / xi)
        return act

    def retrieval_probs(self, option: OptionKey) -> list[tuple[Instance, float]]:
        """Boltzmann retrieval distribution over the option's instances.

        One fresh activation (and noise draw) per instance per call.
        Computed with a max shift so large activations cannot overflow.
        """
        insts = self._instances.get(option)
        if not insts:
            raise ValueError(f"option {option!r} has no instances")
        acts = [self.activation(inst) for inst in insts]
        if self.noise == 0.0:
            # deterministic limit of tau -> 0: mass on the argmax, ties split
            top = max(acts)
            winners = [i for i, a in enumerate(acts) if a == top]
            share = 1.0 / len(winners)
            return [
                (inst, share if i in winners else 0.0)
                for i, (inst, a) in enumerate(zip(insts, acts))
            ]
        tau = self.noise * math.sqrt(2.0)
        shift = max(acts)
        weights = [math.exp((a - shift) / tau) for a in acts]
        total = sum(weights)
        return [(inst, w / total) for inst, w in zip(insts, weights)]

    def blended_value(self, option: OptionKey) -> float:
        """Retrieval-probability-weighted mean outcome of one option."""
        return sum(p * inst.outcome for inst, p in self.retrieval_probs(option))

    def blended_value_quiet(self, option: OptionKey) -> float:
        """Blended value in the noise-free limit; consumes no random draws.

        Used as the learning signal of the bootstrapped credit rule:
        choices stay noisy, value estimates stay clean.
        """
        insts = self._instances.get(option)
        if not insts:
            raise ValueError(f"option {option!r} has no instances")
        saved = self.noise
        self.noise = 0.0
        try:
            return sum(p * inst.outcome for inst, p in self.retrieval_probs(option))
        finally:
            self.noise = saved

    def choose(self, options: list[OptionKey]) -> OptionKey:
        """Option with the maximum blended value; exact ties break uniformly."""
        if not options:
            raise ValueError("choose requires at least one option")
        values = [self.blended_value(option) for option in options]
        best = max(values)
        winners = [i for i, v in enumerate(values) if v == best]
        if len(winners) == 1:
            return options[winners[0]]
        return options[winners[int(self.rng.integers(len(winners)))]]

    # -- introspection ---------------------------------------------------

    def snapshot(self) -> list[dict]:
        """Debug export of the full store; not a stability-guaranteed format."""
        out = []
        for option in sorted(self._instances):
            (state, action) = option
            for inst in self._instances[option]:
                out.append(
                    {
                        "state": list(state),
                        "action": action,
                        "outcome": inst.outcome,
                        "timestamps": list(inst.timestamps),
                    }
                )
        return out
