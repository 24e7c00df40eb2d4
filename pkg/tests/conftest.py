import os
import pytest

from pathlib import Path
from hypothesis import HealthCheck, settings

from dmm_app import init_config

settings.register_profile('default', max_examples=50, deadline=None)
settings.register_profile(
    'acceptance',
    max_examples=10000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.getenv('HYPOTHESIS_PROFILE', 'default'))

ROOT = Path(__file__).resolve().parent.parent
NETWORKS = ROOT / 'networks'

@pytest.fixture
def networks_dir():
    return NETWORKS

@pytest.fixture
def config(tmp_path):
    return init_config(overrides={'TRACE_FILE': str(tmp_path / 'trace.jsonl')}, root_path=str(ROOT))
