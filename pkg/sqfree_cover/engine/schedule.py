from bisect import bisect_right
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Optional, Union

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

HALF = Fraction(1, 2)

DEFAULT_BREAKPOINTS: list[tuple[int, str]] = [
	(1, '0'),
	(8, '0.171'),
	(9, '0.190'),
	(10, '0.199'),
	(11, '0.210'),
	(13, '0.224'),
	(14, '0.233'),
	(15, '0.237'),
	(18, '0.252'),
	(20, '0.255'),
	(21, '0.260'),
	(22, '0.261'),
	(23, '0.263'),
	(24, '0.264'),
	(25, '0.262'),
	(26, '0.265'),
	(27, '0.269'),
	(28, '0.279'),
	(36, '0.289'),
	(46, '0.297'),
	(61, '0.307'),
	(100, '0.331'),
	(1001, '0.372'),
	(10001, '0.418'),
	(1000001, '0.5'),
]


def _as_fraction(value: Union[str, int, float, Fraction]) -> Fraction:
	if isinstance(value, float):
		# floats go through their shortest repr so 0.171 means 171/1000
		return Fraction(repr(value))
	return Fraction(value)


class DeltaSchedule(BaseModel):
	"""Piecewise-constant δ_j: the value at j is that of the last breakpoint starting at or before j"""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	breakpoints: tuple[tuple[int, Fraction], ...]

	@field_validator('breakpoints', mode='before')
	@classmethod
	def _coerce(cls, value):
		return tuple((int(start), _as_fraction(delta)) for start, delta in value)

	@model_validator(mode='after')
	def _check(self) -> 'DeltaSchedule':
		if not self.breakpoints:
			raise ValueError('schedule needs at least one breakpoint')
		if self.breakpoints[0][0] != 1:
			raise ValueError(f'first breakpoint must start at 1, got {self.breakpoints[0][0]}')
		starts = [s for s, _ in self.breakpoints]
		if any(b <= a for a, b in zip(starts, starts[1:])):
			raise ValueError(f'breakpoint starts must be strictly increasing: {starts}')
		for start, delta in self.breakpoints:
			if not 0 <= delta <= HALF:
				raise ValueError(f'δ = {delta} at {start} outside [0, 1/2]')
		return self

	@classmethod
	def constant(cls, delta: Union[str, Fraction]) -> 'DeltaSchedule':
		return cls(breakpoints=[(1, delta)])

	@cached_property
	def starts(self) -> tuple[int, ...]:
		return tuple(s for s, _ in self.breakpoints)

	def value(self, j: int) -> Fraction:
		if j < 1:
			raise ValueError(f'schedule index must be ≥ 1, got {j}')
		return self.breakpoints[bisect_right(self.starts, j) - 1][1]

	def segments(self, N: int) -> Iterator[tuple[int, int, Fraction]]:
		"""Maximal runs (first, last, δ) covering 1..N"""
		for i, (start, delta) in enumerate(self.breakpoints):
			if start > N:
				return
			last = self.breakpoints[i + 1][0] - 1 if i + 1 < len(self.breakpoints) else N
			yield start, min(last, N), delta

	def truncated(self, N: int) -> 'DeltaSchedule':
		"""Same values on 1..N and δ = 1/2 beyond"""
		kept = [(s, d) for s, d in self.breakpoints if s <= N]
		return DeltaSchedule(breakpoints=kept + [(N + 1, HALF)])

	def is_half_beyond(self, N: int) -> bool:
		return self.value(N + 1) == HALF and all(d == HALF for s, d in self.breakpoints if s > N)

	@property
	def head_length(self) -> Optional[int]:
		"""Number of leading indices with δ = 0; None when δ vanishes everywhere"""
		for start, delta in self.breakpoints:
			if delta != 0:
				return start - 1
		return None

	def to_document(self) -> list[list]:
		return [[s, str(d)] for s, d in self.breakpoints]


def default_schedule() -> DeltaSchedule:
	return DeltaSchedule(breakpoints=DEFAULT_BREAKPOINTS)
