import os
from pathlib import Path

import pytest

# Keep test runs out of the application log
os.environ.setdefault('COVARKIT_LOG_FILE', os.devnull)

FIXTURES = Path(__file__).parent.parent / 'fixtures'


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def config(tmp_path, monkeypatch):
    from utils.config import Config
    monkeypatch.delenv('COVARKIT_SEED', raising=False)
    return Config(tmp_path / 'config.json')
