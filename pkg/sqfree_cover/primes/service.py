import logging
import math
from fractions import Fraction
from typing import Optional

import numpy as np

from sqfree_cover.covering.views import CapacityError
from sqfree_cover.primes.views import PrimeDomainError, PrimeTable, PrimeTableError
from sqfree_cover.rounding import DirectedArithmetic, Real
from sqfree_cover.settings import get_settings
from sqfree_cover.utils import singleton, time_execution_sync

logger = logging.getLogger(__name__)

# Rosser–Schoenfeld constant in log log x + B
MERTENS_B = Fraction('0.2614972128')
MERTENS_MIN_X = 286

SEGMENT_ODD_COUNT = 1 << 18


def simple_sieve(limit: int) -> np.ndarray:
	if limit < 2:
		return np.array([], dtype=np.int64)
	is_prime = np.ones(limit + 1, dtype=bool)
	is_prime[:2] = False
	for p in range(2, math.isqrt(limit) + 1):
		if is_prime[p]:
			is_prime[p * p : limit + 1 : p] = False
	return np.flatnonzero(is_prime).astype(np.int64)


def nth_prime_upper_estimate(n: int) -> int:
	"""p_n < n (log n + log log n) for n ≥ 6"""
	if n < 6:
		return 13
	return int(n * (math.log(n) + math.log(math.log(n)))) + 1


def _segmented_primes(n: int, limit: int, segment_odd_count: int) -> np.ndarray:
	base = simple_sieve(math.isqrt(limit) + 1)
	odd_base = base[1:]
	found = [np.array([2], dtype=np.int64)]
	count = 1
	span = 2 * segment_odd_count
	low = 3
	while low <= limit and count < n:
		high = min(low + span, limit + 1)  # exclusive
		odd_count = (high - low + 1) // 2
		mask = np.ones(odd_count, dtype=bool)
		for p in odd_base:
			p = int(p)
			p2 = p * p
			if p2 >= high:
				break
			start = max(p2, ((low + p - 1) // p) * p)
			if start % 2 == 0:
				start += p
			if start >= high:
				continue
			mask[(start - low) // 2 :: p] = False
		seg = low + 2 * np.flatnonzero(mask).astype(np.int64)
		found.append(seg)
		count += len(seg)
		low = high if high % 2 == 1 else high + 1
	values = np.concatenate(found)
	if len(values) < n:
		raise PrimeTableError(f'sieve to {limit} produced {len(values)} primes, fewer than {n}')
	return values[:n]


@time_execution_sync('--build_primes')
def build_primes(n: int, segment_odd_count: int = SEGMENT_ODD_COUNT) -> PrimeTable:
	"""First n primes by an odd-only segmented sieve"""
	if n < 1:
		raise PrimeTableError(f'need at least one prime, got n={n}')
	max_index = get_settings().max_prime_index
	if n > max_index:
		raise CapacityError(f'{n} primes requested; configured ceiling is {max_index} (SQFREE_COVER_MAX_PRIME_INDEX)')
	limit = nth_prime_upper_estimate(n)
	try:
		values = _segmented_primes(n, limit, segment_odd_count)
	except MemoryError as e:
		raise CapacityError(f'out of memory while sieving {n} primes up to {limit}') from e
	logger.debug(f'Built {n} primes, largest {int(values[-1])}')
	return PrimeTable(limit_index=n, values=values)


@singleton
class PrimeCache:
	"""Process-wide table, grown on demand and never mutated in place"""

	def __init__(self):
		self.table: Optional[PrimeTable] = None

	def at_least(self, n: int) -> PrimeTable:
		if self.table is None or self.table.limit_index < n:
			size = max(n, 2 * self.table.limit_index if self.table else 64)
			size = min(size, max(n, get_settings().max_prime_index))
			self.table = build_primes(size)
		return self.table

	def covering_value(self, x: int) -> PrimeTable:
		"""A table whose largest prime is at least x"""
		table = self.at_least(64)
		while table.largest < x:
			estimate = int(1.3 * x / math.log(max(x, 3))) + 64
			table = self.at_least(max(estimate, 2 * table.limit_index))
		return table


def get_prime_table(n: int = 1) -> PrimeTable:
	return PrimeCache().at_least(n)


def nth_prime(j: int) -> int:
	return get_prime_table(j).p(j)


def prime_pi(x: int) -> int:
	return PrimeCache().covering_value(int(x)).pi(int(x))


def _ensure_mertens_domain(x: Real) -> Fraction:
	q = Fraction(x)
	if q < MERTENS_MIN_X:
		raise PrimeDomainError(f'reciprocal sum bounds need x ≥ {MERTENS_MIN_X}, got {x}')
	return q


def reciprocal_sum_bounds(x: Real, precision: Optional[int] = None) -> tuple:
	"""log log x + B ∓ 1/(2 log² x), lower rounded down and upper rounded up"""
	q = _ensure_mertens_domain(x)
	arith = DirectedArithmetic(precision or get_settings().precision)
	up, down = arith.up, arith.down

	log_dn = arith.log_down(q)
	log_up = arith.log_up(q)
	half_inv_sq_up = up.div(1, down.mul(2, down.mul(log_dn, log_dn)))

	lower = down.sub(down.add(down.log(log_dn), arith.down_of(MERTENS_B)), half_inv_sq_up)
	upper = up.add(up.add(up.log(log_up), arith.up_of(MERTENS_B)), half_inv_sq_up)
	return lower, upper


def reciprocal_sum_exact(x: int) -> Fraction:
	"""Σ_{p ≤ x} 1/p as an exact rational"""
	table = PrimeCache().covering_value(int(x))
	return sum((Fraction(1, int(p)) for p in table.values[: table.pi(int(x))]), Fraction(0))


def reciprocal_sum(x: int, precision: Optional[int] = None) -> tuple:
	"""Certified enclosure (lo, hi) of Σ_{p ≤ x} 1/p"""
	arith = DirectedArithmetic(precision or get_settings().precision)
	table = PrimeCache().covering_value(int(x))
	lo = hi = arith.down_of(0)
	for p in table.values[: table.pi(int(x))]:
		p = int(p)
		lo = arith.down.add(lo, arith.ratio_down(1, p))
		hi = arith.up.add(hi, arith.ratio_up(1, p))
	return lo, hi


def prime_count_bound(x: int, precision: Optional[int] = None):
	"""(x / log x)(1 + 3/(2 log x)), rounded down"""
	if x <= 1:
		raise PrimeDomainError(f'prime count bound needs x > 1, got {x}')
	arith = DirectedArithmetic(precision or get_settings().precision)
	up, down = arith.up, arith.down
	log_up = arith.log_up(x)
	factor = down.add(1, down.div(3, up.mul(2, log_up)))
	return down.mul(down.div(x, log_up), factor)
