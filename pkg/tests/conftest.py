import json
from pathlib import Path

import numpy as np
import pytest

from distfobs.simcli import build_pipeline, load_scenario
from distfobs.sysmodel import SystemModel

from .instances import feasible_pool, random_instances

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def scenario_file(name: str) -> str:
    return str(SCENARIOS / f"{name}.json")


@pytest.fixture
def scenario_path():
    return scenario_file


@pytest.fixture
def motivating_model():
    return SystemModel.from_lists(
        A=[[0.5, 2.0], [0.0, 3.0]], sensors=[[[0.0, 1.0]], [], []], L=[[1.0, 0.0]],
        edges=[[1, 2], [2, 3], [3, 1]])


@pytest.fixture
def illustration_model():
    return SystemModel.from_lists(
        A=[[0, 2, 0], [3, 0, 0], [0, 0, 5]], sensors=[[[0, 1, 0], [0, 0, 1]]], L=[[1, 0, 0]])


@pytest.fixture
def two_sensor_model():
    return SystemModel.from_lists(
        A=[[0, 2, 0], [3, 0, 0], [0, 0, 5]], sensors=[[[0, 1, 0]], [[0, 0, 1]]],
        L=[[1, 0, 0]], edges=[[1, 2], [2, 1]])


@pytest.fixture
def undetectable_model():
    return SystemModel.from_lists(
        A=[[2.0, 0.0], [0.0, 0.5]], sensors=[[[0.0, 1.0]], []], L=[[1.0, 0.0]],
        edges=[[1, 2], [2, 1]])


@pytest.fixture
def motivating_scenario():
    return load_scenario(scenario_file("motivating"))


@pytest.fixture
def motivating_pipeline(motivating_scenario):
    return build_pipeline(motivating_scenario)


@pytest.fixture
def write_scenario(tmp_path):
    """Dump a dict to a scenario file under tmp_path and return its path."""
    def write(data, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return write


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope="session")
def random_pool():
    pool = feasible_pool(size=100)
    assert len(pool) == 100, f"only {len(pool)} feasible random instances found"
    return pool


@pytest.fixture(scope="session")
def darouach_instances():
    return random_instances(100, seed=4242, max_n=6)
