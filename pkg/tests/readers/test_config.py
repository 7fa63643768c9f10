from fractions import Fraction
from pathlib import Path

import pytest

from rwrs.errors import ConfigParseError
from rwrs.readers.config import (
    environment_layer,
    load_config,
    parse_assignment,
    parse_observable,
    parse_triples,
)

CONFIG = """
[run]
experiment = lln
seed = 11

[model]
step = -1 1 2; 1 1 2
scenery = -3 1 4; 1 3 4

[experiment]
n_list = 64 256
observable = 0 1; 1 -1/2

[criteria]
10 = 0.15
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "lln.cfg"
    path.write_text(CONFIG)
    return path


def test_parse_triples():
    assert parse_triples("-1 1 2; 1 1 2") == [(-1, 1, 2), (1, 1, 2)]
    with pytest.raises(ValueError):
        parse_triples("-1 1")
    with pytest.raises(ValueError):
        parse_triples(" ; ")


def test_parse_observable_accepts_fractions():
    assert parse_observable("0 1; 1 -1/2; 0 1") == {0: 2.0, 1: -0.5}


@pytest.mark.parametrize(
    "text, expected",
    [("reps=10", ("reps", "10")), ("run.seed = 4", ("run.seed", "4")), ("times=1 2", ("times", "1 2"))],
)
def test_parse_assignment(text, expected):
    assert parse_assignment(text) == expected


def test_parse_assignment_needs_equals():
    with pytest.raises(ConfigParseError):
        parse_assignment("reps")


def test_load_config(config_file):
    config = load_config(config_file, environ={})
    assert config.run.experiment == "lln"
    assert config.experiment.n_list == [64, 256]
    assert config.experiment.observable == {0: 1.0, 1: -0.5}
    assert config.criteria == {10: 0.15}
    model = config.build_model()
    assert model.periodicity.d == 4
    assert model.scenery.mass_of(1) == Fraction(3, 4)


def test_precedence(config_file):
    environ = {"RWRS_SEED": "99", "RWRS_WORKERS": "3", "RWRS_ORACLE_CAP": "12"}
    config = load_config(config_file, {"run": {"seed": 5}}, environ=environ)
    assert config.run.seed == 5
    assert config.run.workers == 3
    assert config.experiment.cap == 12
    assert load_config(config_file, environ=environ).run.seed == 11
    assert load_config(None, environ=environ).run.seed == 99


def test_environment_layer_ignores_empty_values():
    assert environment_layer({"RWRS_OUT": "", "RWRS_SEED": "3"}) == {"run": {"seed": "3"}}


def test_defaults_without_file():
    config = load_config(environ={})
    assert config.run.experiment == "model-check"
    assert config.build_model().sigma_xi_sq == 1.0


@pytest.mark.parametrize(
    "text",
    [
        "[run]\nseed = minus one\n",
        "[run]\nworkers = 0\n",
        "[experiment]\nunknown_key = 1\n",
        "[plots]\nwidth = 3\n",
        "no section header\n",
        "[experiment]\njoint_times = 0.5\n",
        "[experiment]\njoint_times = 0.5 0.25 1\n",
    ],
)
def test_bad_configs(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigParseError):
        load_config(path, environ={})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigParseError):
        load_config(tmp_path / "absent.cfg", environ={})


def test_hash_is_canonical(config_file):
    first = load_config(config_file, environ={})
    second = load_config(config_file, environ={})
    assert first.config_hash() == second.config_hash()
    changed = load_config(config_file, {"run": {"seed": 12}}, environ={})
    assert changed.config_hash() != first.config_hash()


@pytest.mark.parametrize("name, observable", [
    ("clt", {0: 1.0, 1: -1.0}),
    ("lln", {0: 1.0, 1: 1.0}),
    ("ratio", {0: 1.0, 1: 1.0}),
])
@pytest.mark.parametrize("folder", ["configs", "configs/acceptance"])
def test_shipped_observables_touch_both_parities(folder, name, observable):
    config = load_config(Path(__file__).parents[2] / folder / f"{name}.cfg", environ={})
    assert config.experiment.observable == observable
