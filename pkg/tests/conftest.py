import pytest

from gridcredit.env import GridConfig, Target


def make_config(
    width=5,
    height=5,
    obstacles=(),
    targets=((4, 0, 0.5), (0, 4, 0.2), (4, 4, 0.17), (4, 2, 0.05)),
    spawn=(0, 0),
    complexity="simple",
    config_id="test-grid",
):
    return GridConfig(
        id=config_id,
        width=width,
        height=height,
        obstacles=frozenset(obstacles),
        targets=tuple(Target(x, y, v) for x, y, v in targets),
        spawn=spawn,
        complexity=complexity,
    )


@pytest.fixture
def small_config():
    """5x5 grid, spawn top-left, preferred target (0.5) at the end of row 0."""
    return make_config()


@pytest.fixture
def open_config():
    """11x11 grid with no obstacles; preferred at distance 4 on a line."""
    return make_config(
        width=11,
        height=11,
        targets=((9, 5, 0.6), (5, 2, 0.1), (9, 9, 0.2), (1, 9, 0.05)),
        spawn=(5, 5),
        config_id="open-grid",
    )
