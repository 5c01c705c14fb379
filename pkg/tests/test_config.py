import json

import pytest

from mfsrbf.config import (
    ExternalConfig,
    NoiseConfig,
    PsoConfig,
    RunConfig,
    load_run_config,
    run_config_from_dict,
    write_run_config,
)
from mfsrbf.errors import ConfigError


def write_json(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert (config.problem, config.dim, config.n_levels) == ("P1", 1, 1)
        assert config.budget == 45.0
        assert config.repetitions == 50

    def test_budget_grows_with_dimension(self):
        assert RunConfig(problem="P3", dim=10).budget == 90.0

    def test_unsupported_dimension(self):
        with pytest.raises(ConfigError) as info:
            RunConfig(problem="P2", dim=3)
        assert info.value.key == "dim"

    def test_four_levels_need_costs(self):
        external = ExternalConfig(command=("solver",), n_levels=4)
        with pytest.raises(ConfigError) as info:
            RunConfig(problem="external", external=external)
        assert info.value.key == "beta"
        config = RunConfig(problem="external", external=external, beta=(1, 0.5, 0.25, 0.1))
        assert config.beta == (1.0, 0.5, 0.25, 0.1)

    def test_benchmarks_stop_at_three_levels(self):
        with pytest.raises(ConfigError) as info:
            RunConfig(problem="P4", dim=2, n_levels=4, beta=(1, 0.5, 0.25, 0.1))
        assert info.value.key == "n_levels"

    def test_external_needs_its_section(self):
        with pytest.raises(ConfigError):
            RunConfig(problem="external")

    def test_pso_swarm_size(self):
        assert PsoConfig().swarm_size(5) == 20
        assert PsoConfig(n_particles=7).swarm_size(5) == 7


class TestLoading:
    def test_nested_sections(self):
        config = run_config_from_dict(
            {"problem": "P2", "n_levels": 3, "noise": {"fractions": [0.0, 0.0, 0.0]}, "pso": {"n_iterations": 20}}
        )
        assert config.noise == NoiseConfig(fractions=(0.0, 0.0, 0.0))
        assert config.pso.n_iterations == 20
        assert config.dim == 2

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError) as info:
            run_config_from_dict({"problme": "P1"})
        assert info.value.key == "problme"

    def test_unknown_section_key(self):
        with pytest.raises(ConfigError) as info:
            run_config_from_dict({"srbf": {"n_taus": 10}})
        assert info.value.key == "srbf.n_taus"

    def test_invalid_section_value(self):
        with pytest.raises(ConfigError) as info:
            run_config_from_dict({"acquisition": {"d0": -1.0}})
        assert info.value.key == "acquisition.d0"

    def test_section_must_be_an_object(self):
        with pytest.raises(ConfigError):
            run_config_from_dict({"pso": 5})

    def test_overrides(self, tmp_path):
        path = write_json(tmp_path, {"problem": "P1", "seed": 3, "output": {"compressed_state": True}})
        config = load_run_config(path, seed=11, jobs=None, directory="elsewhere")
        assert config.seed == 11
        assert config.jobs == 1
        assert config.output.directory == "elsewhere"
        assert config.output.compressed_state

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_run_config(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(str(tmp_path / "absent.json"))

    def test_effective_config_round_trip(self, tmp_path):
        config = run_config_from_dict({"problem": "P3", "dim": 5, "n_levels": 3, "repetitions": 4})
        path = str(tmp_path / "effective_config.json")
        write_run_config(config, path)
        assert load_run_config(path) == config
