"""Credit assignment in episodic gridworld tasks.

Instance-based learners with three write-back rules (equal,
exponentially discounted, temporal-difference), tabular Q-learning, a
complexity-controlled grid generator, a reproducible batch harness,
behavioral metrics, parameter search, and an experiment server that
collects human trajectories in the same record format.
"""

__version__ = "0.1.0"

from .agents import AgentParams, default_params, make_agent
from .env import GridConfig, Target, accessible_cells, shortest_path_len, step
from .gen import GenSpec, generate, validate
from .harness import RunSpec, run_batch, run_episode
from .ibl import InstanceMemory
from .metrics import episode_metrics, learning_curves

__all__ = [
    "__version__",
    "AgentParams",
    "default_params",
    "make_agent",
    "GridConfig",
    "Target",
    "accessible_cells",
    "shortest_path_len",
    "step",
    "GenSpec",
    "generate",
    "validate",
    "RunSpec",
    "run_batch",
    "run_episode",
    "InstanceMemory",
    "episode_metrics",
    "learning_curves",
]
