import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from sqfree_cover.covering.views import (
	CapacityError,
	CoveringError,
	CoveringSystem,
	CoverVerdict,
	DivisibilityError,
)
from sqfree_cover.settings import get_settings
from sqfree_cover.utils import time_execution_sync

logger = logging.getLogger(__name__)

CHUNK = 1 << 24


def _first_uncovered(system: CoveringSystem, start: int, stop: int) -> Optional[int]:
	"""Least x in [start, stop) satisfying no congruence, or None"""
	covered = np.zeros(stop - start, dtype=bool)
	for c in system:
		offset = (c.residue - start) % c.modulus
		covered[offset :: c.modulus] = True
	holes = np.flatnonzero(~covered)
	if holes.size == 0:
		return None
	return start + int(holes[0])


def _bitmask_witness(system: CoveringSystem, workers: int) -> Optional[int]:
	L = system.lcm
	bounds = [(lo, min(lo + CHUNK, L + 1)) for lo in range(1, L + 1, CHUNK)]
	if workers <= 1 or len(bounds) == 1:
		for lo, hi in bounds:
			witness = _first_uncovered(system, lo, hi)
			if witness is not None:
				return witness
		return None
	with ThreadPoolExecutor(max_workers=workers) as pool:
		results = list(pool.map(lambda b: _first_uncovered(system, *b), bounds))
	witnesses = [w for w in results if w is not None]
	return min(witnesses) if witnesses else None


@time_execution_sync('--check_covering')
def check_covering(system: CoveringSystem, limit: Optional[int] = None, workers: int = 1) -> CoverVerdict:
	"""Decide coverage of [1, L]; the bitmask route reports the least uncovered integer, the hyperplane route the first uncovered tuple"""
	if len(system) == 0:
		raise CoveringError('cannot decide coverage of an empty system')
	limit = limit or get_settings().enumeration_limit
	L = system.lcm

	if L <= limit:
		witness = _bitmask_witness(system, workers)
		logger.debug(f'Bitmask sweep over [1, {L}] -> {"covered" if witness is None else f"witness {witness}"}')
		return CoverVerdict(covered=witness is None, witness=witness, lcm=L, method='bitmask')

	if system.is_squarefree:
		from sqfree_cover.crt.service import covers_q, system_to_hyperplanes, tuple_to_int

		hyperplanes, n = system_to_hyperplanes(system)
		result = covers_q(hyperplanes, n, budget=limit)
		witness = None if result.covered else tuple_to_int(result.witness)
		logger.debug(f'Hyperplane route in dimension {n} visited {result.nodes_visited} nodes')
		return CoverVerdict(covered=result.covered, witness=witness, lcm=L, method='hyperplane')

	raise CapacityError(f'L = {L} exceeds the enumeration limit {limit} and the moduli are not all squarefree')


def is_covering(system: CoveringSystem, limit: Optional[int] = None, workers: int = 1) -> bool:
	return check_covering(system, limit=limit, workers=workers).covered


def uncovered_residues(system: CoveringSystem, M: int, limit: Optional[int] = None) -> list[int]:
	"""Residues b mod M whose whole class avoids every congruence of the system"""
	if M < 1:
		raise DivisibilityError(f'period must be positive, got {M}')
	bad = [c.modulus for c in system if M % c.modulus != 0]
	if bad:
		raise DivisibilityError(f'moduli {bad} do not divide {M}')
	limit = limit or get_settings().enumeration_limit
	if M > limit:
		raise CapacityError(f'period {M} exceeds the enumeration limit {limit}')
	touched = np.zeros(M, dtype=bool)
	for c in system:
		touched[c.residue :: c.modulus] = True
	return [int(b) for b in np.flatnonzero(~touched)]


def min_modulus(system: CoveringSystem) -> int:
	if len(system) == 0:
		raise CoveringError('empty system has no minimum modulus')
	return min(system.moduli)
