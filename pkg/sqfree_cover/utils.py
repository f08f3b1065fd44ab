import logging
import time
from functools import wraps
from typing import Callable, ParamSpec, TypeVar

logger = logging.getLogger(__name__)

R = TypeVar('R')
P = ParamSpec('P')

# runs slower than this are reported at INFO instead of DEBUG
SLOW_SECONDS = 10.0


def time_execution_sync(additional_text: str = '') -> Callable[[Callable[P, R]], Callable[P, R]]:
	def decorator(func: Callable[P, R]) -> Callable[P, R]:
		label = additional_text or func.__qualname__

		@wraps(func)
		def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
			start = time.perf_counter()
			try:
				return func(*args, **kwargs)
			finally:
				elapsed = time.perf_counter() - start
				level = logging.INFO if elapsed >= SLOW_SECONDS else logging.DEBUG
				logger.log(level, f'{label} took {elapsed:.3f} s')

		return wrapper

	return decorator


def singleton(factory):
	"""Cache the first instance a factory or class produces; `reset()` drops it"""
	cache = {}

	def wrapper(*args, **kwargs):
		if 'value' not in cache:
			cache['value'] = factory(*args, **kwargs)
		return cache['value']

	wrapper.reset = cache.clear
	return wrapper
