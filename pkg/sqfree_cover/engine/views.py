import json
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sqfree_cover.covering.views import SqfreeCoverError
from sqfree_cover.engine.schedule import DeltaSchedule, default_schedule
from sqfree_cover.settings import get_settings

try:
	ENGINE_VERSION = version('sqfree-cover')
except PackageNotFoundError:
	ENGINE_VERSION = '0.1.0'

MIN_TAIL_N = 61
DEFAULT_C0 = 118
DEFAULT_N = 10**6


class EngineError(SqfreeCoverError):
	"""Base class for distortion engine errors"""


class ConfigurationError(EngineError):
	"""A bound was asked for outside its hypotheses"""


class SizeRule(BaseModel):
	"""|S_j|: an explicit prefix for j ≤ len(explicit), the j-th prime beyond"""

	model_config = ConfigDict(frozen=True)

	explicit: tuple[int, ...] = ()

	@field_validator('explicit')
	@classmethod
	def _at_least_two(cls, value: tuple[int, ...]) -> tuple[int, ...]:
		bad = [s for s in value if s < 2]
		if bad:
			raise ValueError(f'sizes must be ≥ 2, got {bad}')
		return value

	def to_document(self) -> Union[str, list[int]]:
		return list(self.explicit) if self.explicit else 'primes'


class EngineConfig(BaseModel):
	model_config = ConfigDict(frozen=True)

	C0: int = Field(default=DEFAULT_C0, ge=0)
	N: int = Field(default=DEFAULT_N, ge=MIN_TAIL_N)
	sizes: SizeRule = Field(default_factory=SizeRule)
	schedule: DeltaSchedule = Field(default_factory=default_schedule)
	K_exact: int = Field(default=30, ge=1)
	precision: int = Field(default_factory=lambda: get_settings().precision, ge=60)
	workers: int = Field(default=1, ge=1)
	detail_limit: int = Field(default=2000, ge=0)
	max_small_sets: int = Field(default=512, ge=1)
	direct_limit: int = Field(default=8, ge=0, le=16)
	compare_small_route: bool = False

	@field_validator('sizes', mode='before')
	@classmethod
	def _coerce_sizes(cls, value):
		if value is None or value == 'primes':
			return SizeRule()
		if isinstance(value, (list, tuple)):
			return SizeRule(explicit=tuple(value))
		return value

	@field_validator('schedule', mode='before')
	@classmethod
	def _coerce_schedule(cls, value):
		if value is None or value == 'default':
			return default_schedule()
		if isinstance(value, (list, tuple)):
			return DeltaSchedule(breakpoints=value)
		if isinstance(value, dict) and 'breakpoints' in value:
			return DeltaSchedule(breakpoints=value['breakpoints'])
		return value

	@model_validator(mode='after')
	def _explicit_within_N(self) -> 'EngineConfig':
		if len(self.sizes.explicit) > self.N:
			raise ValueError(f'{len(self.sizes.explicit)} explicit sizes exceed N = {self.N}')
		return self

	@classmethod
	def reference_defaults(cls, **overrides) -> 'EngineConfig':
		return cls(**overrides)

	@classmethod
	def from_file(cls, path: Union[str, Path]) -> 'EngineConfig':
		return cls.model_validate(json.loads(Path(path).read_text(encoding='utf-8')))

	def with_C0(self, C0: int) -> 'EngineConfig':
		return self.model_copy(update={'C0': C0})

	def to_document(self) -> dict:
		return {
			'C0': self.C0,
			'N': self.N,
			'K_exact': self.K_exact,
			'precision': self.precision,
			'workers': self.workers,
			'max_small_sets': self.max_small_sets,
			'direct_limit': self.direct_limit,
			'compare_small_route': self.compare_small_route,
			'sizes': self.sizes.to_document(),
		}


Formula = Literal['small', 'mid', 'direct']


class KBound(BaseModel):
	"""Certified upper bound on w_k(B_k)"""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	k: int
	value: Fraction
	formula: Formula
	exact: bool
	r: int
	relaxed_C0: Optional[int] = None


class SegmentTotal(BaseModel):
	model_config = ConfigDict(arbitrary_types_allowed=True)

	first: int
	last: int
	delta: Fraction
	subtotal: Fraction


def ceil_decimal(q: Fraction, places: int = 15) -> str:
	"""Decimal string ≥ q with the given number of places"""
	scale = 10**places
	n = -((-q.numerator * scale) // q.denominator)
	sign = '-' if n < 0 else ''
	whole, frac = divmod(abs(n), scale)
	return f'{sign}{whole}.{frac:0{places}d}'


def _rational(q: Fraction) -> str:
	return f'{q.numerator}/{q.denominator}'


def _upper(q: Fraction) -> dict:
	return {'direction': '≤', 'decimal': ceil_decimal(q), 'rational': _rational(q)}


class BoundReport(BaseModel):
	"""Immutable outcome of a certificate run; all sums are upper bounds"""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	per_k: list[KBound]
	head_sum: Fraction
	head_exact: bool
	head_last: int
	mid_sum: Fraction
	tail: Fraction
	total: Fraction
	verdict: bool
	segments: list[SegmentTotal]
	M0: Fraction
	relaxed: list[int] = Field(default_factory=list)
	relaxed_count: int = 0
	config: dict
	schedule: list[list]
	engine_version: str = ENGINE_VERSION
	rounding: dict[str, str] = Field(
		default_factory=lambda: {
			'sums': 'upward',
			'subtracted term': 'downward',
			'tail': 'upward in every factor',
		}
	)

	def to_document(self) -> dict:
		return {
			'engine_version': self.engine_version,
			'config': self.config,
			'schedule': self.schedule,
			'head_sum': {**_upper(self.head_sum), 'exact': self.head_exact, 'last_k': self.head_last},
			'mid_sum': _upper(self.mid_sum),
			'tail': _upper(self.tail),
			'total': _upper(self.total),
			'M0': _upper(self.M0),
			'verdict': self.verdict,
			'segments': [
				{'first': s.first, 'last': s.last, 'delta': str(s.delta), **_upper(s.subtotal)} for s in self.segments
			],
			'relaxed': self.relaxed,
			'relaxed_count': self.relaxed_count,
			'rounding': self.rounding,
			'per_k': [
				{
					'k': b.k,
					'formula': b.formula,
					'exact': b.exact,
					'r': b.r,
					'relaxed_C0': b.relaxed_C0,
					**_upper(b.value),
				}
				for b in self.per_k
			],
		}

	def save_to_file(self, path: Union[str, Path]) -> None:
		path = Path(path)
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(json.dumps(self.to_document(), indent=2, ensure_ascii=False), encoding='utf-8')

	@classmethod
	def from_document(cls, doc: dict) -> 'BoundReport':
		q = lambda entry: Fraction(entry['rational'])  # noqa: E731
		return cls(
			per_k=[
				KBound(
					k=row['k'],
					value=q(row),
					formula=row['formula'],
					exact=row['exact'],
					r=row['r'],
					relaxed_C0=row['relaxed_C0'],
				)
				for row in doc['per_k']
			],
			head_sum=q(doc['head_sum']),
			head_exact=doc['head_sum']['exact'],
			head_last=doc['head_sum']['last_k'],
			mid_sum=q(doc['mid_sum']),
			tail=q(doc['tail']),
			total=q(doc['total']),
			verdict=doc['verdict'],
			segments=[
				SegmentTotal(first=s['first'], last=s['last'], delta=Fraction(s['delta']), subtotal=q(s))
				for s in doc['segments']
			],
			M0=q(doc['M0']),
			relaxed=doc['relaxed'],
			relaxed_count=doc['relaxed_count'],
			config=doc['config'],
			schedule=doc['schedule'],
			engine_version=doc['engine_version'],
			rounding=doc['rounding'],
		)

	@classmethod
	def load_from_file(cls, path: Union[str, Path]) -> 'BoundReport':
		return cls.from_document(json.loads(Path(path).read_text(encoding='utf-8')))
