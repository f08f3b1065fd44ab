import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from sqfree_cover.covering.views import SqfreeCoverError


class PrimeTableError(SqfreeCoverError):
	"""Base class for prime table errors"""


class PrimeDomainError(PrimeTableError, ValueError):
	"""Argument outside the range where a prime estimate is valid"""


class PrimeTable(BaseModel):
	"""The first `limit_index` primes, p_1 = 2, as a read-only int64 array"""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	limit_index: int
	values: np.ndarray

	@field_validator('values')
	@classmethod
	def _freeze(cls, values: np.ndarray) -> np.ndarray:
		values = np.asarray(values, dtype=np.int64)
		values.flags.writeable = False
		return values

	def p(self, j: int) -> int:
		"""The j-th prime, 1-based"""
		if not 1 <= j <= self.limit_index:
			raise PrimeTableError(f'prime index {j} outside table of {self.limit_index} primes')
		return int(self.values[j - 1])

	@property
	def largest(self) -> int:
		return int(self.values[-1])

	def pi(self, x) -> int:
		"""Number of primes ≤ x; x must not exceed the largest table prime"""
		if x > self.largest:
			raise PrimeTableError(f'pi({x}) needs primes beyond {self.largest}')
		return int(np.searchsorted(self.values, int(x), side='right'))

	def last_index_at_most(self, bound: int) -> int:
		"""Largest j with p_j ≤ bound (0 if none)"""
		return self.pi(bound)

	def index_of(self, p: int) -> int:
		"""1-based index of the prime p"""
		i = int(np.searchsorted(self.values, p, side='left'))
		if i >= self.limit_index or int(self.values[i]) != p:
			raise PrimeTableError(f'{p} is not among the first {self.limit_index} primes')
		return i + 1

	def first(self, n: int) -> list[int]:
		if n > self.limit_index:
			raise PrimeTableError(f'{n} primes requested from a table of {self.limit_index}')
		return [int(v) for v in self.values[:n]]
