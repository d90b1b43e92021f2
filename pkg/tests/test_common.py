import logging

import pytest
from pydantic import ValidationError

from acband.common.config import ScenarioConfig, worker_threads
from acband.common.errors import (
    ConfigError,
    InsufficientBudget,
    InvalidN0,
    InvalidParameter,
    MalformedFile,
    SpawnFailure,
)
from acband.common.helper_functions import handle_run_error, rank_with_ties
from acband.common.logging import configure_logging
from acband.common.models import ExternalRunnerSpec
from acband.common.rng import SeededRng


# ==============================================================================
# RNG
# ==============================================================================

def test_fork_is_deterministic_and_leaves_parent_untouched():
    parent = SeededRng(5)
    first = parent.fork("configs").random(4)
    again = SeededRng(5).fork("configs").random(4)
    assert list(first) == list(again)
    assert parent.random() == SeededRng(5).random()


def test_forks_with_different_labels_differ():
    rng = SeededRng(11)
    assert rng.fork("a").permutation(50) != rng.fork("b").permutation(50)


def test_seed_wraps_to_64_bits():
    assert SeededRng(2**64 + 3).seed == 3


# ==============================================================================
# RANKING
# ==============================================================================

def test_rank_with_ties_orders_by_descending_score():
    ranked = rank_with_ties([(4, 0.1), (7, 0.9), (2, 0.5)], SeededRng(0))
    assert ranked == [7, 2, 4]


def test_rank_with_ties_permutes_tied_blocks_uniformly():
    firsts = [rank_with_ties([(0, 1.0), (1, 1.0), (2, 0.0)], SeededRng(seed))[0] for seed in range(400)]
    share = firsts.count(0) / len(firsts)
    assert 0.4 < share < 0.6
    assert set(firsts) == {0, 1}


def test_rank_with_ties_empty():
    assert rank_with_ties([], SeededRng(0)) == []


# ==============================================================================
# ERRORS
# ==============================================================================

@pytest.mark.parametrize(
    "error, code",
    [
        (InvalidN0("n0"), 2),
        (InvalidParameter("x"), 2),
        (MalformedFile("bad"), 3),
        (SpawnFailure("gone"), 3),
        (InsufficientBudget("b"), 4),
        (FileNotFoundError("missing.csv"), 3),
        (RuntimeError("boom"), 1),
    ],
)
def test_handle_run_error_maps_exit_codes(error, code):
    failure = handle_run_error(error, context="testing")
    assert failure["exit_code"] == code
    assert failure["success"] is False
    assert failure["kind"] == type(error).__name__
    assert "while testing" in failure["message"]


def test_validation_errors_are_configuration_errors():
    with pytest.raises(ValidationError) as info:
        ExternalRunnerSpec(command=["solver"], timeout=1.0)
    assert handle_run_error(info.value)["exit_code"] == 2


# ==============================================================================
# CONFIG
# ==============================================================================

def test_scenario_config_resolves_relative_dataset(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(
        "dataset:\n  path: data/m.csv\nmethod: hyperband\nparams:\n  eta: 5\nseeds: [1, 2]\n",
        encoding="utf-8",
    )
    settings = ScenarioConfig(path).get_scenario()
    assert settings.method == "hyperband"
    assert settings.params.eta == 5
    assert settings.seeds == [1, 2]
    assert settings.dataset.path == str(tmp_path / "data" / "m.csv")


def test_scenario_config_accepts_json(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text('{"synthetic": {"n_configs": 10, "n_instances": 20}, "seeds": [0]}', encoding="utf-8")
    settings = ScenarioConfig(path).get_scenario()
    assert settings.synthetic.n_configs == 10
    assert settings.method == "acband"


def test_scenario_config_needs_exactly_one_source(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(
        "dataset:\n  path: m.csv\nsynthetic:\n  n_configs: 4\n  n_instances: 4\nseeds: [0]\n",
        encoding="utf-8",
    )
    with pytest.raises(InvalidParameter):
        ScenarioConfig(path).get_scenario()


def test_scenario_config_rejects_non_mapping(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ScenarioConfig(path)


def test_scenario_config_rejects_broken_yaml(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text("seeds: [0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ScenarioConfig(path)


def test_worker_threads_from_environment(monkeypatch):
    monkeypatch.setenv("ACBAND_THREADS", "3")
    assert worker_threads() == 3
    monkeypatch.setenv("ACBAND_THREADS", "0")
    with pytest.raises(InvalidParameter):
        worker_threads()
    monkeypatch.setenv("ACBAND_THREADS", "many")
    with pytest.raises(InvalidParameter):
        worker_threads()
    monkeypatch.setenv("ACBAND_THREADS", "")
    assert worker_threads(default=2) == 2


def test_configure_logging_installs_one_handler():
    configure_logging("DEBUG")
    configure_logging("INFO")
    root = logging.getLogger("acband")
    assert root.level == logging.INFO
    assert sum(1 for h in root.handlers if getattr(h, "_acband", False)) == 1


def test_external_command_needs_one_instance_placeholder():
    runner = ExternalRunnerSpec(command=["solver", "--file={instance}"], timeout=1.0)
    assert runner.nonzero_exit_as_timeout is True
    with pytest.raises(ValidationError):
        ExternalRunnerSpec(command=["solver", "{instance}", "{instance}"], timeout=1.0)
