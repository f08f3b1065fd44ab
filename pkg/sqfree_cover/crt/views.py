from math import prod
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from sqfree_cover.covering.views import SqfreeCoverError


class HyperplaneError(SqfreeCoverError):
	"""Base class for hyperplane errors"""


class NonSquarefreeError(HyperplaneError):
	"""Modulus divisible by a prime square"""


class DimensionError(HyperplaneError):
	"""Coordinate or prime factor outside the ambient dimension"""


class Hyperplane(BaseModel):
	"""Product set fixing coordinates F(A) = fixed.keys() of S_1 × … × S_n"""

	model_config = ConfigDict(frozen=True)

	n: int = Field(ge=0)
	fixed: dict[int, int] = Field(default_factory=dict)
	sizes: tuple[int, ...]

	@model_validator(mode='before')
	@classmethod
	def _default_sizes(cls, data):
		if isinstance(data, dict) and data.get('sizes') is None:
			from sqfree_cover.primes.service import get_prime_table

			n = data.get('n', 0)
			data = {**data, 'sizes': tuple(get_prime_table(max(n, 1)).first(n))}
		return data

	@model_validator(mode='after')
	def _check(self) -> 'Hyperplane':
		if len(self.sizes) != self.n:
			raise ValueError(f'{len(self.sizes)} sizes given for dimension {self.n}')
		for j, v in self.fixed.items():
			if not 1 <= j <= self.n:
				raise ValueError(f'coordinate {j} outside 1..{self.n}')
			if not 1 <= v <= self.sizes[j - 1]:
				raise ValueError(f'value {v} at coordinate {j} outside 1..{self.sizes[j - 1]}')
		return self

	def __hash__(self) -> int:
		return hash((self.n, tuple(sorted(self.fixed.items())), self.sizes))

	@property
	def coords(self) -> frozenset[int]:
		"""F(A)"""
		return frozenset(self.fixed)

	@property
	def top(self) -> Optional[int]:
		"""max F(A), None for the full space"""
		return max(self.fixed) if self.fixed else None

	@property
	def norm(self) -> int:
		return prod(self.sizes[j - 1] for j in self.fixed)

	def contains(self, point: tuple[int, ...]) -> bool:
		return all(point[j - 1] == v for j, v in self.fixed.items())


class CoordSet(BaseModel):
	"""Finite set J of positive coordinate indices"""

	model_config = ConfigDict(frozen=True)

	indices: frozenset[int] = frozenset()

	@model_validator(mode='after')
	def _positive(self) -> 'CoordSet':
		if any(j < 1 for j in self.indices):
			raise ValueError(f'indices must be positive, got {sorted(self.indices)}')
		return self

	@classmethod
	def of(cls, *indices: int) -> 'CoordSet':
		return cls(indices=frozenset(indices))

	def norm(self, size) -> int:
		"""‖J‖ = ∏ |S_j|; `size` maps j to |S_j|"""
		return prod(size(j) for j in self.indices)

	def __iter__(self):
		return iter(sorted(self.indices))

	def __len__(self) -> int:
		return len(self.indices)


class QCoverResult(BaseModel):
	covered: bool
	witness: Optional[tuple[int, ...]] = None
	nodes_visited: int = 0
