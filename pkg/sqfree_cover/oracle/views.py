from fractions import Fraction
from typing import Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from sqfree_cover.covering.views import SqfreeCoverError
from sqfree_cover.crt.service import make_hyperplane
from sqfree_cover.crt.views import Hyperplane
from sqfree_cover.engine.schedule import DeltaSchedule

Point = tuple[int, ...]


class OracleError(SqfreeCoverError):
	"""Base class for weight oracle errors"""


class ParallelHyperplaneError(OracleError):
	"""Two hyperplanes fix the same coordinate set"""


class WeightTable(BaseModel):
	"""w_k on Q_k = S_1 × … × S_k, exact"""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	level: int
	sizes: tuple[int, ...]
	weights: dict[Point, Fraction]

	@property
	def total(self) -> Fraction:
		return sum(self.weights.values(), Fraction(0))

	def weight_of(self, points: Iterable[Point]) -> Fraction:
		return sum((self.weights[x] for x in set(points)), Fraction(0))


class AlphaField(BaseModel):
	"""α_k(x) = |F_x ∩ B_k| / |S_k| for x ∈ Q_{k−1}"""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	level: int
	values: dict[Point, Fraction]


class Simulation(BaseModel):
	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	sizes: tuple[int, ...]
	schedule: DeltaSchedule
	tables: list[WeightTable]
	covered: list[frozenset[Point]]
	alphas: list[AlphaField]
	wb: list[Fraction]
	E: list[Fraction]
	families: list[list[Hyperplane]]

	@property
	def n(self) -> int:
		return len(self.sizes)

	@property
	def covered_mass(self) -> Fraction:
		"""Σ_k w_k(B_k)"""
		return sum(self.wb, Fraction(0))


class FiberCheck(BaseModel):
	model_config = ConfigDict(arbitrary_types_allowed=True)

	ok: bool
	level: Optional[int] = None
	witness: Optional[Point] = None
	expected: Optional[Fraction] = None
	actual: Optional[Fraction] = None


class ChainViolation(BaseModel):
	check: str
	k: int
	detail: str


class ChainReport(BaseModel):
	counts: dict[str, int] = Field(default_factory=dict)
	violations: list[ChainViolation] = Field(default_factory=list)
	skipped: list[str] = Field(default_factory=list)

	@property
	def ok(self) -> bool:
		return not self.violations

	def record(self, check: str, k: int, holds: bool, detail: str = '') -> None:
		self.counts[check] = self.counts.get(check, 0) + 1
		if not holds:
			self.violations.append(ChainViolation(check=check, k=k, detail=detail))


class OracleFixture(BaseModel):
	"""Sizes, schedule, C0 and hyperplanes given as {coordinate: value} maps"""

	model_config = ConfigDict(frozen=True)

	sizes: tuple[int, ...]
	schedule: DeltaSchedule
	C0: int = Field(default=0, ge=0)
	hyperplanes: list[dict[int, int]] = Field(default_factory=list)

	@field_validator('sizes')
	@classmethod
	def _at_least_two(cls, value: tuple[int, ...]) -> tuple[int, ...]:
		if not value or any(s < 2 for s in value):
			raise ValueError(f'sizes must be non-empty and ≥ 2, got {list(value)}')
		return value

	@field_validator('schedule', mode='before')
	@classmethod
	def _coerce_schedule(cls, value):
		if isinstance(value, (list, tuple)):
			return DeltaSchedule(breakpoints=value)
		return value

	def build_hyperplanes(self) -> list[Hyperplane]:
		return [make_hyperplane(len(self.sizes), fixed, self.sizes) for fixed in self.hyperplanes]
