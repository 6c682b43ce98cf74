import pathlib

import pytest

from hrcsim.config import load_config
from hrcsim.riccati import solve_riccati_backward
from hrcsim.reporting import write_timeseries
from hrcsim.simulation import build_lq_problem, run_scenario

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
SCENARIO_PATH = REPO_ROOT / "configs" / "default_scenario.yaml"


@pytest.fixture(scope="session")
def scenario_config():
    return load_config(SCENARIO_PATH)


@pytest.fixture(scope="session")
def scenario_problem(scenario_config):
    return build_lq_problem(scenario_config)


@pytest.fixture(scope="session")
def scenario_solution(scenario_config, scenario_problem):
    return solve_riccati_backward(scenario_problem, scenario_config.h)


@pytest.fixture(scope="session")
def scenario_report(scenario_config):
    return run_scenario(scenario_config)


@pytest.fixture(scope="session")
def scenario_bundle(scenario_report, tmp_path_factory):
    outdir = tmp_path_factory.mktemp("scenario_out")
    return write_timeseries(scenario_report, outdir)
