import os

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from sqfree_cover.utils import singleton

load_dotenv()

ENV_PREFIX = 'SQFREE_COVER_'


def _env_int(name: str, default: int) -> int:
	raw = os.getenv(ENV_PREFIX + name)
	if raw is None or raw.strip() == '':
		return default
	return int(raw.replace('_', ''))


class Settings(BaseModel):
	"""Process-wide limits, read from SQFREE_COVER_* environment variables"""

	logging_level: str = 'info'
	enumeration_limit: int = Field(default=10**9, ge=1)
	tuple_budget: int = Field(default=10**6, ge=1)
	max_prime_index: int = Field(default=2 * 10**7, ge=1)
	precision: int = Field(default=64, ge=60)

	@classmethod
	def from_env(cls) -> 'Settings':
		return cls(
			logging_level=os.getenv(ENV_PREFIX + 'LOGGING_LEVEL', 'info').lower(),
			enumeration_limit=_env_int('ENUMERATION_LIMIT', 10**9),
			tuple_budget=_env_int('TUPLE_BUDGET', 10**6),
			max_prime_index=_env_int('MAX_PRIME_INDEX', 2 * 10**7),
			precision=_env_int('PRECISION', 64),
		)


@singleton
def get_settings() -> Settings:
	return Settings.from_env()
