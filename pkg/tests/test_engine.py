import logging
import random
from fractions import Fraction
from types import SimpleNamespace

import mpmath
import pytest
from pydantic import ValidationError

from sqfree_cover.crt.service import make_hyperplane
from sqfree_cover.engine.schedule import DeltaSchedule, default_schedule
from sqfree_cover.engine.service import (
	DistortionEngine,
	bound_second_moment,
	bound_sum_hyperplanes,
	bound_tail,
	compute_r,
	compute_U_V,
	direct_double_sum,
	nu,
	run_certificate,
	search_threshold,
)
from sqfree_cover.engine.views import BoundReport, ConfigurationError, EngineConfig, ceil_decimal
from sqfree_cover.rounding import to_fraction


@pytest.fixture
def short_config() -> EngineConfig:
	"""Reference schedule and C0 = 118, summed to N = 61"""
	return EngineConfig(N=61, schedule=default_schedule().truncated(61))


@pytest.fixture
def engine(short_config: EngineConfig) -> DistortionEngine:
	return DistortionEngine(short_config)


SMALL_K_VALUES = [
	Fraction(0),
	Fraction(0),
	Fraction(0),
	Fraction(1, 210),
	Fraction(3, 110),
	Fraction(50, 1001),
	Fraction(43, 715),
]


@pytest.mark.parametrize('k, expected', enumerate(SMALL_K_VALUES, start=1))
def test_small_k_bounds(k, expected, engine: DistortionEngine):
	assert engine.bound_small_k(k) == expected


def test_small_k_head_sum(engine: DistortionEngine):
	assert sum(engine.bound_small_k(k) for k in range(1, 8)) == Fraction(194, 1365)


def test_nu_examples(short_config: EngineConfig):
	assert nu([], short_config) == 1
	assert nu([1], short_config) == Fraction(1, 2)
	assert nu([1, 2], short_config) == Fraction(1, 6)
	assert nu([8], short_config) == Fraction(1000, 15751)


def test_compute_r_examples(short_config: EngineConfig):
	assert compute_r(8, short_config) == 4
	assert compute_r(4, short_config) == 7
	assert compute_r(31, short_config) == 1
	assert compute_r(8, short_config.with_C0(0)) == 1


def test_compute_U_V_conventions(short_config: EngineConfig):
	assert compute_U_V(18, None, short_config) == (1, 0)
	assert compute_U_V(31, None, short_config) == (0, 0)


def test_small_sets_of_k_4(engine: DistortionEngine):
	"""Below threshold 16 the small sets over {2, 3, 5} are all but the full one"""
	U, V = engine.compute_U_V(4)
	prefix = Fraction(3, 2) * Fraction(4, 3) * Fraction(6, 5)
	ratio_sum = 1 + Fraction(2, 3) + Fraction(1, 2) + Fraction(1, 3) + Fraction(1, 3) + Fraction(2, 9) + Fraction(1, 6)
	assert U + V == prefix * ratio_sum
	assert U > 0 and V > 0


def _random_config(rng: random.Random) -> tuple[EngineConfig, int]:
	k = rng.randint(1, 12)
	breakpoints = [(j, Fraction(rng.randint(0, 8), 16)) for j in range(1, 13)]
	config = EngineConfig(C0=rng.randint(0, 50), N=61, schedule=DeltaSchedule(breakpoints=breakpoints), K_exact=64)
	return config, k


@pytest.mark.parametrize('seed', range(100))
def test_pair_sum_identity(seed):
	config, k = _random_config(random.Random(seed))
	engine = DistortionEngine(config)
	r = min(engine.compute_r(k), k)
	U, V = engine.compute_U_V(k)
	between = Fraction(1)
	for j in range(r, k):
		between *= engine.terms(j).p_factor()
	M = engine.prefixes(k).M
	assert engine.direct_double_sum(k) == M - 2 * (U + V) * between + U


@pytest.mark.parametrize('k', [2, 5, 9])
def test_bounds_do_not_grow_with_C0(k, short_config: EngineConfig):
	direct = [direct_double_sum(k, short_config.with_C0(C0)) for C0 in range(0, 200, 7)]
	small = [DistortionEngine(short_config.with_C0(C0)).bound_small_k(k) for C0 in range(0, 200, 7)]
	assert all(a >= b for a, b in zip(direct, direct[1:]))
	assert all(a >= b for a, b in zip(small, small[1:]))


def test_relaxed_threshold(short_config: EngineConfig):
	config = short_config.model_copy(update={'max_small_sets': 4})
	engine = DistortionEngine(config)
	value, formula, _, relaxed_C0 = engine.bound_at(engine.terms(7), engine.prefixes(7))
	assert formula == 'small'
	assert relaxed_C0 == 84
	assert value == DistortionEngine(short_config.with_C0(84)).bound_small_k(7)


def test_mid_route_needs_positive_delta(engine: DistortionEngine):
	with pytest.raises(ConfigurationError):
		engine.bound_mid_k(3)
	with pytest.raises(ConfigurationError):
		engine.bound_second_moment(Fraction(1, 4), 3)


def test_exact_mid_route_equals_the_direct_sum(engine: DistortionEngine):
	for k in range(8, 12):
		assert engine.bound_mid_k(k) == engine.terms(k).coef() * engine.direct_double_sum(k)


def test_second_moment_and_hyperplane_sums(short_config: EngineConfig):
	half = short_config.model_copy(update={'schedule': DeltaSchedule.constant('1/2')})
	assert bound_second_moment(Fraction(1, 4), 5, half) == Fraction(1, 4)
	hyperplanes = [make_hyperplane(4, {1: 1, 2: 1}), make_hyperplane(4, {2: 3}), make_hyperplane(4, {4: 2})]
	assert bound_sum_hyperplanes(hyperplanes, 2, short_config) == Fraction(1, 6) + Fraction(1, 3)
	assert bound_sum_hyperplanes(hyperplanes, 3, short_config) == 0


def test_tail_matches_its_integral(short_config: EngineConfig):
	tail = to_fraction(bound_tail(short_config, Fraction(1)))

	with mpmath.workdps(40):
		L = mpmath.log(283)
		c1 = 1 / L**2 - mpmath.log(L)
		c2 = 1 + 3 / (2 * L)
		# e^{-L} (L^5 + 5L^4 + 20L^3 + 60L^2 + 120L + 120)
		integral = mpmath.quad(lambda t: t**5 * mpmath.exp(-t), [L, mpmath.inf])
		expected = 2 * c2 * mpmath.exp(6 * c1) * integral
		bound = mpmath.mpf(tail.numerator) / tail.denominator
		assert bound >= expected * (1 - mpmath.mpf(10) ** -30)
		assert abs(bound / expected - 1) < 1e-9


def test_tail_hypotheses(short_config: EngineConfig):
	with pytest.raises(ConfigurationError):
		DistortionEngine(short_config.model_copy(update={'schedule': default_schedule()})).check_tail_hypotheses()
	with pytest.raises(ValidationError):
		EngineConfig(N=60)


def test_no_threshold_and_half_distortion_is_not_certified():
	config = EngineConfig(C0=0, N=61, schedule=DeltaSchedule.constant('1/2'))
	report = run_certificate(config)
	assert not report.verdict
	assert report.total >= 1
	assert [b.value for b in report.per_k[:2]] == [Fraction(1, 4), Fraction(4, 9)]


def test_all_zero_schedule_uses_the_small_route():
	config = EngineConfig(N=61, schedule=[(1, '0'), (62, '1/2')])
	report = run_certificate(config)
	assert {b.formula for b in report.per_k} == {'small'}
	assert report.head_last == 61
	assert report.mid_sum == 0


def test_short_run_reports_every_index(short_config: EngineConfig):
	report = run_certificate(short_config)
	assert [b.k for b in report.per_k] == list(range(1, 62))
	assert report.head_last == 7
	assert report.head_exact
	assert report.head_sum == Fraction(194, 1365)
	assert report.total >= report.head_sum + report.mid_sum + report.tail
	subtotals = sum(s.subtotal for s in report.segments)
	assert subtotals <= report.head_sum + report.mid_sum < subtotals + Fraction(1, 10**12)


def test_higher_precision_only_tightens(short_config: EngineConfig):
	exact = run_certificate(short_config.model_copy(update={'K_exact': 62}))
	coarse = run_certificate(short_config.model_copy(update={'K_exact': 1, 'precision': 64}))
	fine = run_certificate(short_config.model_copy(update={'K_exact': 1, 'precision': 128}))
	assert exact.mid_sum <= fine.mid_sum <= coarse.mid_sum
	assert fine.total <= coarse.total
	assert not coarse.head_exact


def test_report_survives_a_round_trip(tmp_path, short_config: EngineConfig):
	report = run_certificate(short_config)
	report.save_to_file(tmp_path / 'report.json')
	loaded = BoundReport.load_from_file(tmp_path / 'report.json')
	assert loaded.total == report.total
	assert loaded.verdict == report.verdict
	assert [b.value for b in loaded.per_k] == [b.value for b in report.per_k]
	assert loaded.schedule == report.schedule


def test_ceil_decimal_rounds_up():
	assert ceil_decimal(Fraction(1, 3), 3) == '0.334'
	assert ceil_decimal(Fraction(1, 2), 3) == '0.500'
	assert ceil_decimal(Fraction(-1, 3), 3) == '-0.333'


@pytest.mark.integration
def test_parallel_scan_agrees_with_the_serial_one():
	config = EngineConfig(N=400, schedule=default_schedule().truncated(400))
	serial = run_certificate(config)
	parallel = run_certificate(config.model_copy(update={'workers': 2}))
	assert parallel.verdict == serial.verdict
	assert [b.formula for b in parallel.per_k] == [b.formula for b in serial.per_k]
	assert abs(parallel.total - serial.total) < Fraction(1, 10**12)


def test_search_threshold_bounds(short_config: EngineConfig):
	assert search_threshold(short_config, 10, 5) is None


def test_search_threshold_finds_the_least_certified_C0(short_config: EngineConfig):
	found = search_threshold(short_config, 0, 200)
	if found is None:
		assert not run_certificate(short_config.with_C0(200)).verdict
	else:
		assert run_certificate(short_config.with_C0(found)).verdict
		assert found == 0 or not run_certificate(short_config.with_C0(found - 1)).verdict


@pytest.fixture
def verdict_from_37(monkeypatch) -> list[int]:
	"""run_certificate replaced by a verdict that holds exactly for C0 ≥ 37; returns the C0 values asked"""
	asked: list[int] = []

	def fake(config: EngineConfig) -> SimpleNamespace:
		asked.append(config.C0)
		return SimpleNamespace(verdict=config.C0 >= 37)

	monkeypatch.setattr('sqfree_cover.engine.service.run_certificate', fake)
	return asked


@pytest.mark.parametrize(('lo', 'hi', 'expected'), [(0, 200, 37), (37, 37, 37), (36, 37, 37), (0, 36, None), (10**6, 10**6 + 1, 10**6)])
def test_search_threshold_bisects_to_the_flip(short_config: EngineConfig, verdict_from_37: list[int], lo, hi, expected):
	assert search_threshold(short_config, lo, hi) == expected


def test_search_threshold_runs_logarithmically_many_certificates(short_config: EngineConfig, verdict_from_37: list[int]):
	assert search_threshold(short_config, 0, 1023) == 37
	assert verdict_from_37[0] == 1023
	assert len(verdict_from_37) <= 11


def test_schedule_values_and_segments():
	schedule = default_schedule()
	assert schedule.value(1) == 0
	assert schedule.value(8) == Fraction(171, 1000)
	assert schedule.value(12) == Fraction(21, 100)
	assert schedule.value(10**6 + 1) == Fraction(1, 2)
	assert schedule.head_length == 7
	assert list(schedule.segments(9)) == [(1, 7, 0), (8, 8, Fraction(171, 1000)), (9, 9, Fraction(19, 100))]
	assert schedule.truncated(61).is_half_beyond(61)
	assert not schedule.is_half_beyond(61)
	assert DeltaSchedule.constant('0').head_length is None
	with pytest.raises(ValueError):
		schedule.value(0)


@pytest.mark.parametrize(
	'breakpoints',
	[
		[],
		[(2, '0')],
		[(1, '0'), (1, '1/4')],
		[(1, '0'), (5, '3/4')],
		[(1, '-1/8')],
	],
)
def test_invalid_schedules(breakpoints):
	with pytest.raises(ValidationError):
		DeltaSchedule(breakpoints=breakpoints)


def test_float_breakpoints_read_as_decimals():
	assert DeltaSchedule(breakpoints=[(1, 0.171)]).value(1) == Fraction(171, 1000)


def test_config_coercion():
	config = EngineConfig(sizes=[2, 4], schedule='default', N=61)
	assert config.sizes.explicit == (2, 4)
	assert DistortionEngine(config).size(3) == 5
	with pytest.raises(ValidationError):
		EngineConfig(sizes=[1], N=61)


def test_certificate_summary_is_logged_at_the_result_level(short_config: EngineConfig):
	records: list[logging.LogRecord] = []
	handler = logging.Handler()
	handler.emit = records.append
	service_logger = logging.getLogger('sqfree_cover.engine.service')
	service_logger.addHandler(handler)
	try:
		run_certificate(short_config)
	finally:
		service_logger.removeHandler(handler)
	summaries = [r for r in records if r.levelname == 'RESULT']
	assert len(summaries) == 1
	assert 'total ≤' in summaries[0].getMessage()
