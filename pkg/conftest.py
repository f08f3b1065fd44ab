import os
import sys

import pytest

from sqfree_cover.logging_config import setup_logging
from sqfree_cover.settings import get_settings

project_root = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, project_root)

setup_logging()


@pytest.fixture(autouse=True)
def fresh_settings():
	"""Settings are cached per process; tests that patch the environment must not leak"""
	get_settings.reset()
	yield
	get_settings.reset()
