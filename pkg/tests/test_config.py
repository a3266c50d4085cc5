# tests/test_config.py
import pytest

from src.config import AppConfig, RunConfig, validate_alpha
from src.errors import ConfigError, InvalidParams


def test_app_config_reads_environment(app_config, tmp_path):
    assert app_config.data_dir == str(tmp_path)
    assert app_config.db_path == str(tmp_path / "results.db")
    assert app_config.sieve_limit == 600
    spec = app_config.quadrature_spec()
    assert spec.abs_tol == 1e-10 and spec.max_subdivisions == 200


def test_app_config_overrides(monkeypatch):
    monkeypatch.setenv("QUAD_ABS_TOL", "1e-8")
    monkeypatch.setenv("MAX_WORKERS", "2")
    config = AppConfig()
    assert config.quad_abs_tol == 1e-8
    assert config.max_workers == 2


@pytest.mark.parametrize("alpha", [0.5, 0.0, 1.0001, float("nan"), "0.7"])
def test_validate_alpha_rejects(alpha):
    with pytest.raises(InvalidParams):
        validate_alpha(alpha)


def test_validate_alpha_accepts_one():
    assert validate_alpha(1) == 1.0


class TestRunConfig:
    def test_bounds_needs_alpha_or_littlewood(self):
        with pytest.raises(ConfigError):
            RunConfig("bounds", t_values=[100.0]).validate()
        assert RunConfig("bounds", t_values=[100.0], littlewood=True).validate().littlewood

    def test_explicit_formula_needs_grid(self):
        with pytest.raises(ConfigError):
            RunConfig("explicit-formula", alpha=0.75, delta=1.0).validate()

    def test_eval_needs_target(self):
        with pytest.raises(ConfigError):
            RunConfig("eval", alpha=0.75, delta=1.0).validate()
        RunConfig("eval", alpha=0.75, delta=1.0, want_l1=True).validate()

    def test_bad_values(self):
        with pytest.raises(InvalidParams):
            RunConfig("eval", alpha=0.75, delta=-1.0, want_l1=True).validate()
        with pytest.raises(InvalidParams):
            RunConfig("eval", alpha=0.75, delta=1.0, kind="both", want_l1=True).validate()
        with pytest.raises(ConfigError):
            RunConfig("sieve", output="xml").validate()
        with pytest.raises(ConfigError):
            RunConfig("sieve", sieve_limit=1).validate()
        with pytest.raises(ConfigError):
            RunConfig("zeros", height=10.0).validate()

    def test_missing_zero_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig("bounds", alpha=0.75, t_values=[100.0], zeros_path=str(tmp_path / "none.txt")).validate()

    def test_quadrature_spec_from_run(self, app_config):
        spec = RunConfig("sieve", abs_tol=1e-6, rel_tol=1e-7).quadrature_spec(app_config)
        assert (spec.abs_tol, spec.rel_tol) == (1e-6, 1e-7)

    def test_zero_relative_tolerance_allowed(self, app_config):
        run = RunConfig("sieve", rel_tol=0.0).validate()
        assert run.quadrature_spec(app_config).rel_tol == 0.0
        with pytest.raises(ConfigError):
            RunConfig("sieve", rel_tol=-1e-9).validate()
        with pytest.raises(ConfigError):
            RunConfig("sieve", abs_tol=0.0).validate()
