import logging
from collections import defaultdict
from fractions import Fraction
from itertools import product
from math import prod
from typing import Optional, Sequence

from sqfree_cover.covering.views import CapacityError
from sqfree_cover.crt.views import Hyperplane
from sqfree_cover.engine.schedule import DeltaSchedule
from sqfree_cover.engine.service import DistortionEngine
from sqfree_cover.engine.views import MIN_TAIL_N, EngineConfig
from sqfree_cover.oracle.views import (
	AlphaField,
	ChainReport,
	FiberCheck,
	OracleError,
	ParallelHyperplaneError,
	Point,
	Simulation,
	WeightTable,
)
from sqfree_cover.settings import get_settings
from sqfree_cover.utils import time_execution_sync

logger = logging.getLogger(__name__)


def _validate_family(hyperplanes: Sequence[Hyperplane], sizes: tuple[int, ...]) -> None:
	seen: dict[frozenset[int], Hyperplane] = {}
	for h in hyperplanes:
		if h.n != len(sizes) or tuple(h.sizes) != sizes:
			raise OracleError(f'hyperplane {h.fixed} lives in a product with sizes {list(h.sizes)}, expected {list(sizes)}')
		if not h.fixed:
			raise OracleError('the full space is not a hyperplane the weights can distort around')
		other = seen.get(h.coords)
		if other is not None:
			raise ParallelHyperplaneError(f'hyperplanes {other.fixed} and {h.fixed} fix the same coordinates {sorted(h.coords)}')
		seen[h.coords] = h


def _covered_prefixes(family: Sequence[Hyperplane], k: int, sizes: tuple[int, ...]) -> frozenset[Point]:
	"""B_k as a subset of Q_k; every hyperplane in the family has max F(A) = k"""
	covered: set[Point] = set()
	for h in family:
		axes = [(h.fixed[j],) if j in h.fixed else range(1, sizes[j - 1] + 1) for j in range(1, k + 1)]
		covered.update(product(*axes))
	return frozenset(covered)


@time_execution_sync('--evolve_weights')
def evolve_weights(
	hyperplanes: Sequence[Hyperplane],
	sizes: Sequence[int],
	schedule: DeltaSchedule,
	budget: Optional[int] = None,
) -> Simulation:
	"""Exact weights w_1 … w_n, with B_k, α_k, E_{k−1} and w_k(B_k) at every level"""
	sizes = tuple(sizes)
	n = len(sizes)
	budget = budget or get_settings().tuple_budget
	tuples = sum(prod(sizes[:k]) for k in range(1, n + 1))
	if tuples > budget:
		raise CapacityError(f'{tuples} tuples over Q_1 … Q_{n} exceed the budget of {budget}')
	_validate_family(hyperplanes, sizes)

	families = [[h for h in hyperplanes if h.top == k] for k in range(1, n + 1)]
	previous: dict[Point, Fraction] = {(): Fraction(1)}
	tables, covered, alphas, wb, E = [], [], [], [], []

	for k in range(1, n + 1):
		s = sizes[k - 1]
		delta = schedule.value(k)
		B = _covered_prefixes(families[k - 1], k, sizes)
		weights: dict[Point, Fraction] = {}
		alpha_values: dict[Point, Fraction] = {}
		second_moment = Fraction(0)

		for x, w in previous.items():
			hits = [y for y in range(1, s + 1) if x + (y,) in B]
			alpha = Fraction(len(hits), s)
			alpha_values[x] = alpha
			second_moment += alpha * alpha * w
			if alpha <= delta:
				on_b, off_b = Fraction(0), w / ((1 - alpha) * s)
			else:
				on_b, off_b = (alpha - delta) / (alpha * (1 - delta)) * w / s, w / ((1 - delta) * s)
			hit_set = set(hits)
			for y in range(1, s + 1):
				weights[x + (y,)] = on_b if y in hit_set else off_b

		table = WeightTable(level=k, sizes=sizes[:k], weights=weights)
		tables.append(table)
		covered.append(B)
		alphas.append(AlphaField(level=k, values=alpha_values))
		wb.append(table.weight_of(B))
		E.append(second_moment)
		previous = weights

	logger.debug(f'Evolved weights on sizes {list(sizes)}: Σ w_k(B_k) = {sum(wb, Fraction(0))}')
	return Simulation(
		sizes=sizes,
		schedule=schedule,
		tables=tables,
		covered=covered,
		alphas=alphas,
		wb=wb,
		E=E,
		families=families,
	)


def check_fiber_preservation(tables: Sequence[WeightTable]) -> FiberCheck:
	"""Σ_y w_k(x, y) = w_{k−1}(x) for every x, and total mass 1 at level 1"""
	if not tables:
		return FiberCheck(ok=True)
	first = tables[0]
	if first.total != 1:
		return FiberCheck(ok=False, level=1, witness=(), expected=Fraction(1), actual=first.total)
	for lower, upper in zip(tables, tables[1:]):
		fibers: dict[Point, Fraction] = defaultdict(Fraction)
		for point, w in upper.weights.items():
			fibers[point[:-1]] += w
		for x, expected in lower.weights.items():
			actual = fibers.get(x, Fraction(0))
			if actual != expected:
				return FiberCheck(ok=False, level=upper.level, witness=x, expected=expected, actual=actual)
	return FiberCheck(ok=True)


def _oracle_engine(sizes: tuple[int, ...], schedule: DeltaSchedule, C0: int) -> DistortionEngine:
	"""Engine over explicit toy sizes, exact at every level of the simulation"""
	N = max(MIN_TAIL_N, len(sizes))
	return DistortionEngine(EngineConfig(C0=C0, N=N, sizes=list(sizes), schedule=schedule, K_exact=len(sizes) + 1))


def _marginal_max(table: WeightTable, coords: tuple[int, ...]) -> Fraction:
	"""Largest w_k(A) over hyperplanes A with F(A) = coords"""
	marginal: dict[Point, Fraction] = defaultdict(Fraction)
	for point, w in table.weights.items():
		marginal[tuple(point[j - 1] for j in coords)] += w
	return max(marginal.values())


def _subsets_with_top(k: int):
	"""Coordinate sets F ⊆ {1 … k} with max F = k"""
	for mask in range(1 << (k - 1)):
		yield tuple(j + 1 for j in range(k - 1) if mask >> j & 1) + (k,)


@time_execution_sync('--check_bound_chain')
def check_bound_chain(
	simulation: Simulation,
	hyperplanes: Sequence[Hyperplane],
	schedule: Optional[DeltaSchedule] = None,
	C0: int = 0,
) -> ChainReport:
	"""Check every per-level inequality of the distortion argument against the exact weights"""
	schedule = schedule or simulation.schedule
	sizes = simulation.sizes
	report = ChainReport()
	engine = _oracle_engine(sizes, schedule, C0)
	norms = [h.norm for h in hyperplanes]
	hypothesis = all(m > C0 for m in norms)
	if not hypothesis:
		report.skipped.append(f'C0 = {C0}: some hyperplane has ‖F(A)‖ ≤ C0, threshold bounds not applicable')
	largest_C0 = min(norms) - 1 if norms else C0
	strongest = _oracle_engine(sizes, schedule, largest_C0)

	previous: dict[Point, Fraction] = {(): Fraction(1)}
	for k, table in enumerate(simulation.tables, start=1):
		s = sizes[k - 1]
		delta = schedule.value(k)

		# (a) single-point distortion
		for point, w in table.weights.items():
			cap = previous[point[:-1]] / ((1 - delta) * s)
			if w > cap:
				report.record('point', k, False, f'w_{k}{point} = {w} > {cap}')
				break
		else:
			report.record('point', k, True)

		# (b) every hyperplane with max F(A) = k, in the family or not
		for coords in _subsets_with_top(k):
			heaviest = _marginal_max(table, coords)
			nu = engine.nu(coords)
			report.record('hyperplane', k, heaviest <= nu, f'F = {coords}: max w_{k}(A) = {heaviest} > ν = {nu}')

		# (c) the covered mass against every bound that applies
		actual = simulation.wb[k - 1]
		family_sum = engine.bound_sum_hyperplanes(hyperplanes, k)
		report.record('family_sum', k, actual <= family_sum, f'w_{k}(B_{k}) = {actual} > Σν = {family_sum}')
		if delta > 0:
			moment = engine.bound_second_moment(simulation.E[k - 1], k)
			report.record('second_moment', k, actual <= moment, f'w_{k}(B_{k}) = {actual} > {moment}')
		if hypothesis:
			small = engine.bound_small_k(k)
			report.record('small_k', k, actual <= small, f'w_{k}(B_{k}) = {actual} > {small}')
			if delta > 0:
				mid = engine.bound_mid_k(k)
				direct = engine.regime.mul(engine.regime.coef_up(engine.terms(k)), engine.direct_double_sum(k))
				report.record('mid_k', k, actual <= mid, f'w_{k}(B_{k}) = {actual} > {mid}')
				report.record('direct', k, actual <= direct, f'w_{k}(B_{k}) = {actual} > {direct}')

		# (d) second moment against the pair sum at the largest threshold the family satisfies
		pair_bound = strongest.direct_double_sum(k) / (s * s)
		report.record('pair_sum', k, simulation.E[k - 1] <= pair_bound, f'E_{k - 1} = {simulation.E[k - 1]} > {pair_bound}')

		previous = table.weights

	if report.ok:
		logger.debug(f'Bound chain holds on sizes {list(sizes)}: {report.counts}')
	else:
		logger.warning(f'{len(report.violations)} bound chain violations on sizes {list(sizes)}')
	return report
