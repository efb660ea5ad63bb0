import json
from dataclasses import dataclass

import pytest

from kplist.arguments import Args, BenchConfig, RunConfig
from kplist.decomposition import DecompositionConfig
from kplist.listing import ListingConfig
from kplist.sim.config import SimConfig


@pytest.fixture
def SimpleArgs(tmp_path):
    @dataclass
    class SimpleConfig(Args):
        mode: str = "cc"
        p: int = 4
        seed: int = 0
        light_factor: float = 0.25
        log_dir: str = str(tmp_path / "logs")
        gen: str = None

    return SimpleConfig


def test_config_dict_like(SimpleArgs):
    config = SimpleArgs(mode="congest", p=5, seed=17, light_factor=100.0)
    reconstructed = SimpleArgs.fromdict(json.loads(json.dumps(config.asdict())))
    assert reconstructed.mode == "congest"
    assert reconstructed.p == 5
    assert reconstructed.seed == 17
    assert reconstructed.light_factor == 100.0
    assert reconstructed == config


def test_updated_kwargs_lists_changed_fields(SimpleArgs):
    config = SimpleArgs(**{"mode": "cc", "p": 6})
    assert config.updated_kwargs == {"p": 6}


def test_process_kwargs_literal_eval(SimpleArgs):
    kwargs = {"p": "5", "light_factor": "1e-2", "mode": "congest"}
    logs = SimpleArgs.process_kwargs(kwargs)
    assert kwargs == {"p": 5, "light_factor": 0.01, "mode": "congest"}
    assert len(logs) == 3


def test_process_kwargs_unknown_key(SimpleArgs):
    with pytest.raises(ValueError):
        SimpleArgs.process_kwargs({"not_a_field": 1})
    kwargs = {"not_a_field": 1}
    SimpleArgs.process_kwargs(kwargs, raise_error=False)


def test_process_kwargs_env_substitution(SimpleArgs, monkeypatch, tmp_path):
    monkeypatch.setenv("KPLIST_TEST_DIR", str(tmp_path))
    kwargs = {"log_dir": "$KPLIST_TEST_DIR/run"}
    SimpleArgs.process_kwargs(kwargs)
    assert kwargs["log_dir"] == f"{tmp_path}/run"

    monkeypatch.delenv("KPLIST_TEST_DIR")
    with pytest.raises(KeyError):
        SimpleArgs.process_kwargs({"log_dir": "$KPLIST_TEST_DIR/run"})


def test_run_config_from_sources_precedence(config_file):
    path = config_file(mode="congest", p=5, seed=3, gen="complete:8")
    config = RunConfig.from_sources(path, {"seed": "11"})
    assert config.mode == "congest"
    assert config.p == 5
    assert config.seed == 11
    assert config.gen == "complete:8"

    assert RunConfig.from_sources(None, {"p": 6}).p == 6
    assert RunConfig.from_sources().p == 4


def test_run_config_ignores_class_name(config_file):
    config = RunConfig(mode="cc", p=3, gen="complete:6")
    path = config_file(**json.loads(config.to_json()))
    assert RunConfig.from_sources(path) == config


def test_run_config_missing_file(tmp_path, monkeypatch):
    monkeypatch.setenv("CONFIG_PATH", str(tmp_path))
    with pytest.raises(ValueError):
        RunConfig.from_sources("does_not_exist")

    (tmp_path / "named.json").write_text(json.dumps({"p": 5}))
    assert RunConfig.from_sources("named").p == 5


@pytest.mark.parametrize(
    "kwargs",
    [
        {"p": 2},
        {"light_factor": 0.0},
        {"message_words": -1},
        {"forced_depth": -1},
        {"delta": 1.0},
        {"phi_min": -0.1},
    ],
)
def test_run_config_validation(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_sub_configs():
    config = RunConfig(
        message_words=4,
        routing_polylog_factor=2.0,
        min_degree_factor=0.25,
        heavy_factor=3.0,
        forced_depth=1,
    )
    assert isinstance(config.sim_config, SimConfig)
    assert config.sim_config.message_words == 4
    assert config.sim_config.routing_factor(1024) == 2.0
    assert isinstance(config.decomposition_config, DecompositionConfig)
    assert config.decomposition_config.min_degree_factor == 0.25
    assert isinstance(config.listing_config, ListingConfig)
    assert config.listing_config.heavy_factor == 3.0
    assert config.listing_config.forced_depth == 1


def test_asymptotic_constants():
    config = ListingConfig.asymptotic_constants(forced_depth=2)
    assert config.heavy_factor == 1.0
    assert config.light_factor == 100.0
    assert config.forced_depth == 2


def test_save_config(tmp_path):
    config = RunConfig(mode="congest", p=5, gen="gnp:40:0.2:1")
    config.save_config(str(tmp_path / "out"))
    loaded = RunConfig.from_json(str(tmp_path / "out" / "config.json"))
    assert loaded == config


def test_bench_config_defaults():
    config = BenchConfig()
    assert config.n_values == [64, 128, 256]
    assert config.overrides == {}
    assert "n_values" not in config.updated_kwargs
    assert BenchConfig(n_values=[32]).updated_kwargs == {"n_values": [32]}
    with pytest.raises(ValueError):
        BenchConfig(repetitions=0)
    with pytest.raises(ValueError):
        BenchConfig(density=1.5)


def test_bench_config_overrides():
    config = BenchConfig(overrides={"light_factor": "0.5", "emit_cliques": "False"})
    assert config.overrides == {"light_factor": 0.5, "emit_cliques": False}
    run_config = config.run_config(seed=9)
    assert run_config.light_factor == 0.5
    assert run_config.seed == 9
    assert run_config.mode == config.mode

    with pytest.raises(ValueError):
        BenchConfig(overrides={"no_such_field": 1})
    with pytest.raises(ValueError):
        BenchConfig(overrides={"seed": 3})
