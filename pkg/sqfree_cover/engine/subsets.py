import logging
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Optional, Sequence

import numpy as np

from sqfree_cover.engine.arithmetic import IndexTerms

logger = logging.getLogger(__name__)

# masks wider than this go through object arrays
INT64_MASK_BITS = 62


class _TooMany(Exception):
	pass


def enumerate_small_sets(sizes: Sequence[int], T: int, limit: int) -> Optional[list[int]]:
	"""Bitmasks over positions of `sizes` (ascending) whose product of sizes is ≤ T.

	Returns None once more than `limit` sets are found.
	"""
	if T < 1:
		return []
	found: list[int] = []

	def walk(start: int, product: int, mask: int) -> None:
		found.append(mask)
		if len(found) > limit:
			raise _TooMany
		for i in range(start, len(sizes)):
			extended = product * sizes[i]
			if extended > T:
				break
			walk(i + 1, extended, mask | (1 << i))

	try:
		walk(0, 1, 0)
	except _TooMany:
		return None
	return found


def pair_union_counts(masks: Sequence[int], width: int) -> dict[int, int]:
	"""Number of ordered pairs (F1, F2) of the given masks with each union F1 ∪ F2"""
	if not masks:
		return {}
	dtype = np.int64 if width <= INT64_MASK_BITS else object
	m = np.asarray(masks, dtype=dtype)
	unions = (m[:, None] | m[None, :]).ravel()
	values, counts = np.unique(unions, return_counts=True)
	return {int(v): int(c) for v, c in zip(values.tolist(), counts.tolist())}


class MaskProducts:
	"""∏_{i ∈ mask} factors[i], memoised on the mask with its lowest bit removed"""

	def __init__(self, factors: Sequence[Fraction]):
		self.factors = list(factors)
		self._memo: dict[int, Fraction] = {0: Fraction(1)}

	def __call__(self, mask: int) -> Fraction:
		value = self._memo.get(mask)
		if value is None:
			low = (mask & -mask).bit_length() - 1
			value = self(mask & (mask - 1)) * self.factors[low]
			self._memo[mask] = value
		return value


@dataclass(frozen=True)
class SmallSetSums:
	"""Exact sums over the sets J with ‖J‖ ≤ T among the candidate indices"""

	threshold: int
	indices: tuple[int, ...]
	count: int
	nu_sum: Fraction
	ratio_sum: Fraction
	U: Fraction

	@classmethod
	def empty(cls, threshold: int) -> 'SmallSetSums':
		return cls(threshold, (), 0, Fraction(0), Fraction(0), Fraction(0))


def small_set_sums(candidates: Sequence[IndexTerms], T: int, limit: int) -> Optional[SmallSetSums]:
	"""Σ ν(J), Σ ∏ 2ν_j/(1+ν_j) and the pair sum U over small sets, or None past `limit` sets"""
	ordered = sorted(candidates, key=lambda t: (t.size, t.j))
	masks = enumerate_small_sets([t.size for t in ordered], T, limit)
	if masks is None:
		return None
	if not masks:
		return SmallSetSums.empty(T)

	nu = MaskProducts([t.nu() for t in ordered])
	ratio = MaskProducts([t.two_ratio() for t in ordered])
	nu_sum = sum((nu(m) for m in masks), Fraction(0))
	ratio_sum = sum((ratio(m) for m in masks), Fraction(0))
	U = sum((count * nu(union) for union, count in pair_union_counts(masks, len(ordered)).items()), Fraction(0))
	return SmallSetSums(
		threshold=T,
		indices=tuple(t.j for t in ordered),
		count=len(masks),
		nu_sum=nu_sum,
		ratio_sum=ratio_sum,
		U=U,
	)


def _zeta(values: np.ndarray, n: int, sign: int = 1) -> np.ndarray:
	"""Subset-sum transform over n-bit masks (sign=-1 inverts it)"""
	out = values.copy()
	for i in range(n):
		view = out.reshape(-1, 2, 1 << i)
		view[:, 1, :] += sign * view[:, 0, :]
	return out


def direct_double_sum(terms: Sequence[IndexTerms], T: int) -> Fraction:
	"""Σ ν(F1 ∪ F2) over pairs of subsets of `terms` with both norms > T.

	Pairs are counted per union with a subset-sum transform; each union's weight
	ν(J)·D is an integer for D = ∏ (b_j − a_j)|S_j|.
	"""
	n = len(terms)
	full = 1 << n
	D = prod(t.base for t in terms)
	norms = [1] * full
	weights = [D] * full
	for mask in range(1, full):
		low = (mask & -mask).bit_length() - 1
		prev = mask & (mask - 1)
		t = terms[low]
		norms[mask] = norms[prev] * t.size
		weights[mask] = weights[prev] // t.base * t.delta.denominator

	large = np.fromiter((norm > T for norm in norms), dtype=np.int64, count=full)
	below = _zeta(large, n)
	unions = _zeta(below * below, n, sign=-1)
	total = sum(int(c) * w for c, w in zip(unions.tolist(), weights) if c)
	return Fraction(total, D)
