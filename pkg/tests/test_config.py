import pytest

from sumsolve.config import PRESETS, Settings, get_preset
from sumsolve.errors import UsageError


def test_presets():
    assert set(PRESETS) == {"paper", "desk"}
    assert get_preset("paper").ov_blocks == 20
    assert get_preset("desk").lambda0 == 0.3


def test_overrides_return_a_copy():
    preset = get_preset("desk", mu=0.1, crossover=0)
    assert preset.mu == 0.1
    assert preset.crossover == 0
    assert PRESETS["desk"].mu == 0.2


def test_override_validation():
    with pytest.raises(UsageError):
        get_preset("desk", mu=0.5)
    with pytest.raises(UsageError):
        get_preset("desk", repetitions=0)
    with pytest.raises(UsageError):
        get_preset("desk", nonsense=1)
    with pytest.raises(UsageError):
        get_preset("lab")


def test_small_lambda_trials():
    assert get_preset("desk").trials_for(10) == 1000
    assert get_preset("desk", small_lambda_trials=7).trials_for(10) == 7


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("SUMSOLVE_PRESET", "paper")
    monkeypatch.setenv("SUMSOLVE_MAX_MITM_N", "30")
    settings = Settings()
    assert settings.PRESET == "paper"
    assert settings.MAX_MITM_N == 30
    assert settings.DATABASE_URL is None
