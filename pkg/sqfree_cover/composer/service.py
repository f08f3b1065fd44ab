import logging
from math import lcm, prod
from typing import Iterable, Optional, Sequence

import numpy as np

from sqfree_cover.composer.views import (
	ClassCover,
	CollisionError,
	Composition,
	CompositionError,
	HypothesisError,
	MissingClassError,
	ShiftVerificationError,
	SmallModulusError,
)
from sqfree_cover.covering.service import check_covering, uncovered_residues
from sqfree_cover.covering.views import CapacityError, Congruence, CoveringSystem
from sqfree_cover.settings import get_settings
from sqfree_cover.utils import time_execution_sync

logger = logging.getLogger(__name__)


def head_product(system: CoveringSystem, k: int) -> int:
	if not 0 <= k <= len(system):
		raise CompositionError(f'k = {k} is outside 0 … {len(system)}')
	return prod(system.moduli[:k])


def find_untouched_class(system: CoveringSystem, k: int) -> int:
	"""Least a mod m_1⋯m_k whose class meets none of the first k congruences"""
	M = head_product(system, k)
	untouched = uncovered_residues(system.head(k), M)
	if not untouched:
		raise HypothesisError(f'the first {k} congruences already cover every class mod {M}')
	return untouched[0]


def verify_class_cover(congruences: Iterable[Congruence], b: int, M: int, limit: Optional[int] = None) -> Optional[int]:
	"""First b + tM over one full period that no congruence contains, or None"""
	congruences = list(congruences)
	period = lcm(M, *(c.modulus for c in congruences))
	steps = period // M
	limit = limit or get_settings().enumeration_limit
	if steps > limit:
		raise CapacityError(f'{steps} points of the class {b} mod {M} exceed the enumeration limit {limit}')

	t = np.arange(steps, dtype=object if period.bit_length() > 62 else np.int64)
	points = b % M + M * t
	covered = np.zeros(steps, dtype=bool)
	for c in congruences:
		covered |= (points - c.residue) % c.modulus == 0
	holes = np.flatnonzero(~covered)
	if holes.size == 0:
		return None
	return int(points[holes[0]])


def shift_tail(system: CoveringSystem, k: int, b: int) -> list[Congruence]:
	"""Tail congruences a_j − a + b mod m_j, checked to cover b mod m_1⋯m_k"""
	a = find_untouched_class(system, k)
	M = head_product(system, k)
	shifted = [Congruence(residue=c.residue - a + b, modulus=c.modulus) for c in system.congruences[k:]]
	witness = verify_class_cover(shifted, b, M)
	if witness is not None:
		raise ShiftVerificationError(
			f'shifted tail misses {witness} in the class {b % M} mod {M}; the tail does not cover the untouched class {a}'
		)
	logger.debug(f'Shifted {len(shifted)} tail congruences from class {a} to {b % M} mod {M}')
	return shifted


def _common_head(cover_classes: Sequence[ClassCover]) -> tuple[int, ...]:
	if not cover_classes:
		raise CompositionError('nothing to compose')
	head = cover_classes[0].head_moduli
	for item in cover_classes[1:]:
		if item.head_moduli != head:
			raise CompositionError(f'leading moduli {list(item.head_moduli)} differ from {list(head)}')
	return head


def _compose(cover_classes: Sequence[ClassCover], require_all: bool) -> Composition:
	head = _common_head(cover_classes)
	M = prod(head)
	targets = [item.b % M for item in cover_classes]
	if len(set(targets)) != len(targets):
		raise CompositionError(f'classes {targets} mod {M} repeat')
	missing = sorted(set(range(M)) - set(targets))
	if missing and require_all:
		raise MissingClassError(f'classes {missing} mod {M} have no covering system')

	congruences: list[Congruence] = []
	owner: dict[int, int] = {}
	m_k = head[-1] if head else 0
	for item in cover_classes:
		for c in shift_tail(item.system, item.k, item.b):
			if c.modulus <= m_k:
				raise SmallModulusError(f'modulus {c.modulus} for class {item.b % M} is not above the last leading modulus {m_k}')
			if c.modulus in owner:
				raise CollisionError(f'modulus {c.modulus} is used for class {owner[c.modulus]} and class {item.b % M}')
			owner[c.modulus] = item.b % M
			congruences.append(c)

	if not congruences:
		raise CompositionError('the composed system has no congruences')
	verdict = check_covering(CoveringSystem(congruences=congruences))
	return Composition(
		M=M,
		head_moduli=head,
		congruences=congruences,
		classes=sorted(targets),
		missing=missing,
		verdict=verdict,
	)


@time_execution_sync('--compose_disjoint')
def compose_disjoint(cover_classes: Sequence[ClassCover]) -> Composition:
	"""One system with distinct moduli from covers of every class modulo the shared head product"""
	return _compose(cover_classes, require_all=True)


def compose_partial(cover_classes: Sequence[ClassCover]) -> Composition:
	"""Like compose_disjoint, but missing classes leave a non-covering verdict instead of raising"""
	composition = _compose(cover_classes, require_all=False)
	if composition.missing:
		logger.info(f'Classes {composition.missing} mod {composition.M} are uncovered; witness {composition.witness}')
	return composition
