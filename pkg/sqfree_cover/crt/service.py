import logging
from math import prod
from typing import Optional, Sequence

from pydantic import ValidationError
from sympy import factorint
from sympy.ntheory.modular import crt

from sqfree_cover.covering.views import CapacityError, Congruence, CoveringSystem
from sqfree_cover.crt.views import (
	DimensionError,
	Hyperplane,
	HyperplaneError,
	NonSquarefreeError,
	QCoverResult,
)
from sqfree_cover.primes.service import get_prime_table
from sqfree_cover.settings import get_settings

logger = logging.getLogger(__name__)


def _representative(a: int, p: int) -> int:
	"""a mod p with 0 sent to p, so values live in {1, …, p}"""
	r = a % p
	return r if r else p


def make_hyperplane(n: int, fixed: dict[int, int], sizes: Optional[Sequence[int]] = None) -> Hyperplane:
	try:
		return Hyperplane(n=n, fixed=dict(fixed), sizes=tuple(sizes) if sizes is not None else None)
	except ValidationError as e:
		raise HyperplaneError(str(e.errors()[0]['msg'])) from e


def congruence_to_hyperplane(c: Congruence, n: int) -> Hyperplane:
	factors = factorint(c.modulus)
	square = [p for p, e in factors.items() if e > 1]
	if square:
		raise NonSquarefreeError(f'modulus {c.modulus} is divisible by {square[0]}²')
	table = get_prime_table(max(n, 1))
	primes = table.first(n)
	fixed = {}
	for p in factors:
		if p not in primes:
			raise DimensionError(f'prime factor {p} of {c.modulus} is beyond p_{n} = {primes[-1] if primes else "-"}')
		fixed[primes.index(p) + 1] = _representative(c.residue, p)
	return make_hyperplane(n, fixed, primes)


def system_dimension(system: CoveringSystem) -> int:
	"""Index of the largest prime dividing some modulus (0 for the trivial modulus only)"""
	largest = max((max(factorint(m)) for m in system.moduli if m > 1), default=1)
	if largest == 1:
		return 0
	table = get_prime_table(64)
	while table.largest < largest:
		table = get_prime_table(2 * table.limit_index)
	return table.index_of(largest)


def system_to_hyperplanes(system: CoveringSystem) -> tuple[list[Hyperplane], int]:
	n = max(system_dimension(system), 1)
	return [congruence_to_hyperplane(c, n) for c in system], n


def int_to_tuple(x: int, n: int) -> tuple[int, ...]:
	primes = get_prime_table(max(n, 1)).first(n)
	L = prod(primes)
	if not 1 <= x <= L:
		raise HyperplaneError(f'{x} outside [1, {L}] for dimension {n}')
	return tuple(_representative(x, p) for p in primes)


def tuple_to_int(t: Sequence[int]) -> int:
	n = len(t)
	primes = get_prime_table(max(n, 1)).first(n)
	for j, (v, p) in enumerate(zip(t, primes), start=1):
		if not 1 <= v <= p:
			raise HyperplaneError(f'component {v} at coordinate {j} outside 1..{p}')
	if n == 0:
		return 1
	x, L = crt(primes, [v % p for v, p in zip(t, primes)])
	x, L = int(x), int(L)
	return x if x else L


def are_parallel(a: Hyperplane, b: Hyperplane) -> bool:
	if a.n != b.n:
		raise DimensionError(f'dimensions differ: {a.n} vs {b.n}')
	return a.coords == b.coords


def covers_q(
	hyperplanes: Sequence[Hyperplane],
	n: int,
	sizes: Optional[Sequence[int]] = None,
	budget: Optional[int] = None,
) -> QCoverResult:
	"""Whether every tuple of Q_n lies on a hyperplane, by depth-first refinement of coordinates"""
	sizes = tuple(sizes) if sizes is not None else tuple(get_prime_table(max(n, 1)).first(n))
	if len(sizes) != n:
		raise DimensionError(f'{len(sizes)} sizes for dimension {n}')
	for h in hyperplanes:
		if h.n != n:
			raise DimensionError(f'hyperplane of dimension {h.n} in Q_{n}')
	budget = budget or get_settings().tuple_budget

	# each entry: (top coordinate, fixed map)
	planes = [(h.top or 0, h.fixed) for h in hyperplanes]
	nodes = 0

	def descend(level: int, prefix: tuple[int, ...], active: list) -> Optional[tuple[int, ...]]:
		nonlocal nodes
		if any(top < level for top, _ in active):
			return None
		if level > n or not active:
			return prefix + (1,) * (n - len(prefix))
		for v in range(1, sizes[level - 1] + 1):
			nodes += 1
			if nodes > budget:
				raise CapacityError(f'covers_q exceeded its budget of {budget} nodes in Q_{n}')
			kept = [(top, fixed) for top, fixed in active if fixed.get(level, v) == v]
			witness = descend(level + 1, prefix + (v,), kept)
			if witness is not None:
				return witness
		return None

	witness = descend(1, (), planes)
	logger.debug(f'covers_q over {len(hyperplanes)} hyperplanes in Q_{n}: {nodes} nodes')
	return QCoverResult(covered=witness is None, witness=witness, nodes_visited=nodes)
