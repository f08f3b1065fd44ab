from functools import cached_property
from math import lcm
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from sympy import factorint


class SqfreeCoverError(Exception):
	"""Base class for all sqfree_cover errors"""


class CapacityError(SqfreeCoverError):
	"""An enumeration or allocation limit would be exceeded"""


class CoveringError(SqfreeCoverError):
	"""Base class for covering system errors"""


class ParseError(CoveringError):
	"""Malformed congruence input"""

	def __init__(self, message: str, line: Optional[int] = None):
		self.line = line
		prefix = f'line {line}: ' if line is not None else ''
		super().__init__(prefix + message)


class DivisibilityError(CoveringError):
	"""A modulus does not divide the requested period"""


def is_squarefree(m: int) -> bool:
	return m >= 1 and all(e == 1 for e in factorint(m).values())


class Congruence(BaseModel):
	"""x ≡ residue (mod modulus), residue kept in [0, modulus)"""

	model_config = ConfigDict(frozen=True)

	residue: int
	modulus: int = Field(ge=1)

	@model_validator(mode='after')
	def _normalize(self) -> 'Congruence':
		if not 0 <= self.residue < self.modulus:
			object.__setattr__(self, 'residue', self.residue % self.modulus)
		return self

	def contains(self, x: int) -> bool:
		return (x - self.residue) % self.modulus == 0

	def __str__(self) -> str:
		return f'{self.residue} mod {self.modulus}'


class CoveringSystem(BaseModel):
	"""Ordered list of congruences; moduli need not be distinct"""

	model_config = ConfigDict(frozen=True)

	congruences: tuple[Congruence, ...]

	@field_validator('congruences', mode='before')
	@classmethod
	def _coerce(cls, value):
		out = []
		for item in value:
			if isinstance(item, Congruence):
				out.append(item)
			elif isinstance(item, dict):
				out.append(Congruence(**item))
			else:
				a, m = item
				out.append(Congruence(residue=a, modulus=m))
		return tuple(out)

	@classmethod
	def from_pairs(cls, pairs) -> 'CoveringSystem':
		return cls(congruences=[(a, m) for a, m in pairs])

	def __len__(self) -> int:
		return len(self.congruences)

	def __iter__(self):
		return iter(self.congruences)

	@cached_property
	def moduli(self) -> tuple[int, ...]:
		return tuple(c.modulus for c in self.congruences)

	@cached_property
	def lcm(self) -> int:
		return lcm(*self.moduli) if self.congruences else 1

	@cached_property
	def is_distinct(self) -> bool:
		return len(set(self.moduli)) == len(self.moduli)

	@cached_property
	def is_squarefree(self) -> bool:
		return all(is_squarefree(m) for m in self.moduli)

	@cached_property
	def duplicates(self) -> list[Congruence]:
		"""Repeated (a, m) pairs, each listed once; retained in the system"""
		seen: set[Congruence] = set()
		dup: list[Congruence] = []
		for c in self.congruences:
			if c in seen and c not in dup:
				dup.append(c)
			seen.add(c)
		return dup

	def head(self, k: int) -> 'CoveringSystem':
		return CoveringSystem(congruences=self.congruences[:k])

	def tail(self, k: int) -> 'CoveringSystem':
		return CoveringSystem(congruences=self.congruences[k:])

	def without(self, index: int) -> 'CoveringSystem':
		return CoveringSystem(congruences=self.congruences[:index] + self.congruences[index + 1 :])


class CoverVerdict(BaseModel):
	"""`witness` is the least uncovered integer in [1, L] on the bitmask route; the hyperplane route gives some uncovered integer"""

	covered: bool
	witness: Optional[int] = None
	lcm: int
	method: Literal['bitmask', 'hyperplane']
