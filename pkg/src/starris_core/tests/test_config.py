"""
Tests for YAML configuration loading and CLI overrides
"""

import math

import pytest

from starris_core.config import (
    ALL_SCHEMES,
    ExperimentConfig,
    PddConfig,
    SystemConfig,
    load_config,
    parse_config,
)
from starris_core.errors import ConfigError, InvalidInputError


class TestDefaults:
    def test_empty_text(self):
        config = parse_config("")
        assert config == ExperimentConfig()
        assert config.system.N == 20
        assert config.pdd.c == 0.8
        assert config.schemes == ALL_SCHEMES

    def test_no_path(self):
        assert load_config(None) == ExperimentConfig()

    def test_power_conversions(self):
        system = SystemConfig()
        assert system.pt_watts == pytest.approx(0.1)
        assert system.noise_watts == pytest.approx(1e-14)
        assert system.kappa == pytest.approx(10 ** 0.3)


class TestParsing:
    def test_sections_are_read(self):
        text = (
            "system:\n"
            "  N: 12\n"
            "  Pt_dbm: 30\n"
            "pdd:\n"
            "  c: 0.5\n"
            "experiment:\n"
            "  schemes: [CoupledPdd]\n"
            "  n_values: [4, 8]\n"
        )
        config = parse_config(text)
        assert config.system.N == 12
        assert config.system.Pt_dbm == 30.0
        assert config.pdd.c == 0.5
        assert config.schemes == ("CoupledPdd",)
        assert config.n_values == (4, 8)

    def test_bad_scalar_reports_key_and_line(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config("system:\n  Pt_dbm: abc\n")
        assert "system.Pt_dbm: expected float" in str(excinfo.value)
        assert excinfo.value.line == 2

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key 'pdd.gamma'") as excinfo:
            parse_config("pdd:\n  c: 0.5\n  gamma: 1\n")
        assert excinfo.value.line == 3

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="unknown section") as excinfo:
            parse_config("solver:\n  x: 1\n")
        assert excinfo.value.line == 1

    def test_yaml_syntax_error(self):
        with pytest.raises(ConfigError, match="YAML parse error") as excinfo:
            parse_config("system:\n  N: [1, 2\n")
        assert excinfo.value.line is not None

    def test_top_level_must_be_mapping(self):
        with pytest.raises(ConfigError):
            parse_config("- 1\n- 2\n")

    def test_infinite_rician_factor(self):
        config = parse_config("system:\n  rician_db: .inf\n")
        assert math.isinf(config.system.kappa)

    def test_rayleigh_rician_factor(self):
        config = parse_config("system:\n  rician_db: -.inf\n")
        assert config.system.kappa == 0.0

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "exp.yaml"
        path.write_text("experiment:\n  realizations: 3\n", encoding="utf-8")
        assert load_config(path).realizations == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "missing.yaml")


class TestValidation:
    def test_empty_scheme_list(self):
        with pytest.raises(ConfigError, match="must not be empty"):
            parse_config("experiment:\n  schemes: []\n")

    def test_empty_convergence_user_counts(self):
        with pytest.raises(ConfigError, match="convergence_k_values must be non-empty"):
            parse_config("experiment:\n  convergence_k_values: []\n")

    def test_unknown_scheme(self):
        with pytest.raises(ConfigError, match="unknown scheme"):
            ExperimentConfig(schemes=("CoupledPdd", "Oracle"))

    def test_odd_user_count(self):
        with pytest.raises(ConfigError, match="even"):
            parse_config("system:\n  K: 3\n")

    @pytest.mark.parametrize("c", [0.0, 1.0, 1.5])
    def test_shrink_factor_range(self, c):
        with pytest.raises(ConfigError):
            PddConfig(c=c)

    def test_config_errors_are_input_errors(self):
        assert issubclass(ConfigError, InvalidInputError)


class TestOverrides:
    def test_system_keys_are_routed(self):
        config = ExperimentConfig().with_overrides(N=40, seed=7, K=None)
        assert config.system.N == 40
        assert config.seed == 7
        assert config.system.K == 6

    def test_lists_become_tuples(self):
        config = ExperimentConfig().with_overrides(n_values=[4, 6], schemes=["IndependentStar"])
        assert config.n_values == (4, 6)
        assert config.schemes == ("IndependentStar",)

    def test_overrides_are_validated(self):
        with pytest.raises(ConfigError):
            ExperimentConfig().with_overrides(workers=0)
