"""Tests for the settings"""
import sys

import pytest

from app.tests.utils.env import (
    TEST_DEFAULT_SEED,
    TEST_MAX_WORKERS,
    TEST_RUN_LOG_FILENAME,
    TEST_STORAGE_ROOT,
)
from app.tests.utils.modules import remove_modules


@pytest.fixture
def fresh_settings(monkeypatch):
    """imports the settings anew, restoring the loaded module afterwards"""
    original = sys.modules.get("settings")

    def _import(**env):
        for key, value in env.items():
            monkeypatch.setenv(key, value)
        remove_modules(["settings"])
        import settings

        return settings

    yield _import
    remove_modules(["settings"])
    if original is not None:
        sys.modules["settings"] = original


def test_test_environment_is_loaded():
    """The test environment variables override the defaults"""
    import settings

    assert settings.APP_SETTINGS == "test"
    assert settings.STORAGE_ROOT == TEST_STORAGE_ROOT
    assert settings.DEFAULT_SEED == TEST_DEFAULT_SEED
    assert settings.MAX_WORKERS == TEST_MAX_WORKERS
    assert settings.RUN_LOG_FILENAME == TEST_RUN_LOG_FILENAME
    assert settings.SHOW_PROGRESS is False


def test_log_level_is_upper_cased(fresh_settings):
    settings = fresh_settings(LOG_LEVEL="debug")
    assert settings.LOG_LEVEL == "DEBUG"


def test_storage_root_is_created(fresh_settings, tmp_path):
    root = tmp_path / "storage"
    fresh_settings(STORAGE_ROOT=str(root))
    assert root.is_dir()


@pytest.mark.parametrize(
    "env, message",
    [
        ({"MAX_WORKERS": "0"}, "MAX_WORKERS"),
        ({"DEFAULT_ZETA": "1.0"}, "DEFAULT_ZETA"),
        ({"DEFAULT_ZETA": "0"}, "DEFAULT_ZETA"),
    ],
)
def test_invalid_settings_are_rejected(fresh_settings, env, message):
    """Raises ValueError on import for out-of-range values"""
    with pytest.raises(ValueError, match=message):
        fresh_settings(**env)
