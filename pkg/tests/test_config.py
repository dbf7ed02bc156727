import logging

from brst_reduction.config import Settings, load_settings

ENV_KEYS = ["BRST_CONFIG", "BRST_DEGREE_BOUND", "BRST_NU_ORDER", "BRST_NORMALIZER_DEGREE_BOUND",
            "BRST_EQUIVALENCE_DEGREE_BOUND", "BRST_KOSZUL_SUITE_DEGREE", "BRST_REDUCED_PRODUCT_DEGREE",
            "BRST_LOG_LEVEL", "BRST_SEED"]


def _clear_env(monkeypatch):
    for key in ENV_KEYS:
        monkeypatch.delenv(key, raising=False)


def test_packaged_defaults(monkeypatch):
    _clear_env(monkeypatch)
    assert load_settings() == Settings()


def test_yaml_file(tmp_path, monkeypatch):
    _clear_env(monkeypatch)
    path = tmp_path / "bounds.yaml"
    path.write_text("degree_bound: 6\nnu_order: 2\n")
    settings = load_settings(str(path))
    assert settings.degree_bound == 6
    assert settings.nu_order == 2
    assert settings.equivalence_degree_bound == 6


def test_config_from_environment_path(tmp_path, monkeypatch):
    _clear_env(monkeypatch)
    path = tmp_path / "bounds.yaml"
    path.write_text("nu_order: 3\n")
    monkeypatch.setenv("BRST_CONFIG", str(path))
    assert load_settings().nu_order == 3


def test_environment_overrides_file(tmp_path, monkeypatch):
    _clear_env(monkeypatch)
    path = tmp_path / "bounds.yaml"
    path.write_text("degree_bound: 6\n")
    monkeypatch.setenv("BRST_DEGREE_BOUND", "10")
    monkeypatch.setenv("BRST_LOG_LEVEL", "debug")
    monkeypatch.setenv("BRST_SEED", "7")
    settings = load_settings(str(path))
    assert settings.degree_bound == 10
    assert settings.log_level == "DEBUG"
    assert settings.seed == 7


def test_bad_values_are_ignored(tmp_path, monkeypatch, caplog):
    _clear_env(monkeypatch)
    path = tmp_path / "bounds.yaml"
    path.write_text("degree_bound: [unclosed\n")
    monkeypatch.setenv("BRST_NU_ORDER", "many")
    with caplog.at_level(logging.WARNING, logger="brst_reduction.config"):
        settings = load_settings(str(path))
    assert settings == Settings()
    assert "malformed" in caplog.text
    assert "BRST_NU_ORDER" in caplog.text


def test_unknown_keys_warn(tmp_path, monkeypatch, caplog):
    _clear_env(monkeypatch)
    path = tmp_path / "bounds.yaml"
    path.write_text("degree_bound: 5\ncolour: blue\n")
    with caplog.at_level(logging.WARNING, logger="brst_reduction.config"):
        settings = load_settings(str(path))
    assert settings.degree_bound == 5
    assert "colour" in caplog.text


def test_overrides_skip_none():
    settings = Settings().with_overrides(degree_bound=None, nu_order=2)
    assert settings.degree_bound == 8
    assert settings.nu_order == 2


def test_suite_degrees(monkeypatch):
    _clear_env(monkeypatch)
    defaults = load_settings()
    assert (defaults.koszul_suite_degree, defaults.reduced_product_degree) == (6, 2)
    monkeypatch.setenv("BRST_KOSZUL_SUITE_DEGREE", "2")
    monkeypatch.setenv("BRST_REDUCED_PRODUCT_DEGREE", "1")
    settings = load_settings()
    assert (settings.koszul_suite_degree, settings.reduced_product_degree) == (2, 1)
