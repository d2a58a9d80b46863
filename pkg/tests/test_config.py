import pytest

from restriction_lab import ConfigurationError, LabConfig, RefinementError, exit_code_for, is_refinement_error
from restriction_lab.config import parse_key_value


def test_parse_sections_and_numbers():
    text = """
    # lab settings
    seed = 7
    alias_bound = 0.2

    [chain]
    pprime = 6
    count = 12
    [knapp]
    lambdas = 4, 8, 16, 32
    """
    data = parse_key_value(text)
    assert data["seed"] == 7
    assert data["alias_bound"] == 0.2
    assert data["chain.pprime"] == 6.0
    assert data["chain.count"] == 12
    assert data["knapp.lambdas"] == ["4", "8", "16", "32"]


def test_parse_reports_line_number():
    with pytest.raises(ConfigurationError) as err:
        parse_key_value("seed = 1\n\nworkers 2\n")
    assert err.value.line == 3
    assert "line 3" in str(err.value)


def test_parse_rejects_bad_number_and_duplicates():
    with pytest.raises(ConfigurationError) as err:
        parse_key_value("seed = seven\n")
    assert err.value.key == "seed"
    with pytest.raises(ConfigurationError):
        parse_key_value("seed = 1\nseed = 2\n")
    with pytest.raises(ConfigurationError):
        parse_key_value("[]\n")


def test_from_dict_keeps_extra():
    config = LabConfig.from_dict({"seed": 3, "workers": 2, "chain.count": 5})
    assert config.seed == 3
    assert config.workers == 2
    assert config.extra == {"chain.count": 5}


def test_from_file(tmp_path):
    path = tmp_path / "lab.conf"
    path.write_text("seed = 11\nformat = json\n[ode]\nk = 4\n", encoding="utf-8")
    config = LabConfig.from_file(path)
    assert config.seed == 11
    assert config.format == "json"
    assert config.extra == {"ode.k": 4}


@pytest.mark.parametrize("kwargs", [
    {"workers": 0},
    {"format": "xml"},
    {"fd_step": 0.0},
    {"alias_bound": -1.0},
    {"chunk_size": 0},
])
def test_invalid_config(kwargs):
    with pytest.raises(ConfigurationError):
        LabConfig(**kwargs)


def test_environment_fallback(monkeypatch):
    monkeypatch.setenv("RESTRICTION_LAB_SEED", "42")
    monkeypatch.setenv("RESTRICTION_LAB_WORKERS", "3")
    config = LabConfig()
    assert config.seed == 42
    assert config.workers == 3

    monkeypatch.setenv("RESTRICTION_LAB_SEED", "many")
    with pytest.raises(ConfigurationError):
        LabConfig()


def test_config_hash():
    assert LabConfig(seed=1, workers=1).config_hash() == LabConfig(seed=1, workers=1).config_hash()
    assert LabConfig(seed=1, workers=1).config_hash() != LabConfig(seed=2, workers=1).config_hash()


def test_exit_codes():
    assert exit_code_for(ConfigurationError("bad")) == 2
    assert exit_code_for(RefinementError()) == 3
    assert exit_code_for(RuntimeError("boom")) == 3
    assert is_refinement_error(RefinementError())
    assert not is_refinement_error(ConfigurationError())
