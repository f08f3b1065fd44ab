import logging

import pytest
from pydantic import ValidationError

from sqfree_cover.logging_config import SqfreeCoverFormatter, setup_logging
from sqfree_cover.settings import Settings, get_settings
from sqfree_cover.utils import singleton, time_execution_sync


@pytest.fixture
def env(monkeypatch):
	return monkeypatch


def test_defaults(env):
	for name in ('ENUMERATION_LIMIT', 'TUPLE_BUDGET', 'MAX_PRIME_INDEX', 'PRECISION', 'LOGGING_LEVEL'):
		env.delenv(f'SQFREE_COVER_{name}', raising=False)
	settings = Settings.from_env()
	assert settings.enumeration_limit == 10**9
	assert settings.tuple_budget == 10**6
	assert settings.precision == 64
	assert settings.logging_level == 'info'


def test_environment_overrides(env):
	env.setenv('SQFREE_COVER_TUPLE_BUDGET', '1_000')
	env.setenv('SQFREE_COVER_LOGGING_LEVEL', 'DEBUG')
	settings = get_settings()
	assert settings.tuple_budget == 1000
	assert settings.logging_level == 'debug'
	assert get_settings() is settings


def test_invalid_environment(env):
	env.setenv('SQFREE_COVER_PRECISION', '32')
	with pytest.raises(ValidationError):
		Settings.from_env()


def test_singleton_reset():
	calls = []

	@singleton
	def make():
		calls.append(1)
		return object()

	first = make()
	assert make() is first
	make.reset()
	assert make() is not first
	assert len(calls) == 2


def test_formatter_shortens_package_loggers():
	formatter = SqfreeCoverFormatter('[%(name)s] %(message)s')
	record = logging.LogRecord('sqfree_cover.engine.service', logging.INFO, __file__, 1, 'hello', None, None)
	assert formatter.format(record) == '[engine] hello'
	other = logging.LogRecord('numpy', logging.INFO, __file__, 1, 'hello', None, None)
	assert formatter.format(other) == '[numpy] hello'


def test_setup_logging_is_idempotent():
	setup_logging()
	handlers = list(logging.getLogger('sqfree_cover').handlers)
	setup_logging()
	assert logging.getLogger('sqfree_cover').handlers == handlers
	assert logging.getLevelName('RESULT') == 35


def test_setup_logging_takes_the_level_from_settings(env):
	env.setenv('SQFREE_COVER_LOGGING_LEVEL', 'debug')
	root, package = logging.getLogger(), logging.getLogger('sqfree_cover')
	saved = [(log, log.handlers[:], log.level) for log in (root, package)]
	for log, _, _ in saved:
		log.handlers = []
	try:
		setup_logging()
		assert get_settings().logging_level == 'debug'
		assert package.level == logging.DEBUG
	finally:
		for log, handlers, level in saved:
			log.handlers = handlers
			log.setLevel(level)


def test_timing_decorator_keeps_the_result():
	@time_execution_sync('--double')
	def double(x: int) -> int:
		return 2 * x

	assert double(4) == 8
	assert double.__name__ == 'double'
