from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from sqfree_cover.covering.views import Congruence, CoveringSystem, CoverVerdict, SqfreeCoverError


class CompositionError(SqfreeCoverError):
	"""Base class for shift and composition errors"""


class HypothesisError(CompositionError):
	"""The leading congruences already cover every class modulo their product"""


class ShiftVerificationError(CompositionError):
	"""A shifted tail misses part of its target class"""


class MissingClassError(CompositionError):
	"""The target classes do not exhaust the residues modulo the head product"""


class SmallModulusError(CompositionError):
	"""An output modulus is not above the last leading modulus"""


class CollisionError(CompositionError):
	"""Two output congruences share a modulus"""


class ClassCover(BaseModel):
	"""A covering system whose tail, after k leading congruences, is retargeted to the class b"""

	model_config = ConfigDict(frozen=True)

	system: CoveringSystem
	k: int = Field(ge=0)
	b: int

	@field_validator('system', mode='before')
	@classmethod
	def _coerce_system(cls, value):
		if isinstance(value, (list, tuple)):
			return CoveringSystem(congruences=value)
		return value

	@property
	def head_moduli(self) -> tuple[int, ...]:
		return self.system.moduli[: self.k]


class CompositionSpec(BaseModel):
	classes: list[ClassCover]


class Composition(BaseModel):
	M: int
	head_moduli: tuple[int, ...]
	congruences: list[Congruence]
	classes: list[int]
	missing: list[int] = Field(default_factory=list)
	verdict: CoverVerdict

	@property
	def covered(self) -> bool:
		return self.verdict.covered

	@property
	def witness(self) -> Optional[int]:
		return self.verdict.witness

	@property
	def system(self) -> CoveringSystem:
		return CoveringSystem(congruences=self.congruences)

	@property
	def m_k(self) -> int:
		return self.head_moduli[-1] if self.head_moduli else 0

	@property
	def tails_above_head(self) -> bool:
		return all(c.modulus > self.m_k for c in self.congruences)
