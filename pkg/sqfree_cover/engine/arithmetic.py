"""Per-index factors of the distortion bounds, exact or rounded outward.

With δ = a/b and s = |S_j| every quantity is a ratio of small integers:

	ν_j           = b / ((b − a) s)
	1 + ν_j       = ((b − a) s + b) / ((b − a) s)
	1 + 3ν_j      = ((b − a) s + 3b) / ((b − a) s)
	2ν_j/(1 + ν_j) = 2b / ((b − a) s + b)
	1/(4δ(1 − δ)s²) = b² / (4a(b − a)) · 1/s²
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from gmpy2 import mpfr

from sqfree_cover.rounding import DirectedArithmetic

Value = Union[Fraction, mpfr]


@dataclass(frozen=True)
class IndexTerms:
	j: int
	size: int
	delta: Fraction

	@property
	def _ab(self) -> tuple[int, int]:
		return self.delta.numerator, self.delta.denominator

	@property
	def base(self) -> int:
		"""(b − a) s, the common denominator"""
		a, b = self._ab
		return (b - a) * self.size

	def nu(self) -> Fraction:
		return Fraction(self._ab[1], self.base)

	def m_factor(self) -> Fraction:
		return Fraction(self.base + 3 * self._ab[1], self.base)

	def p_factor(self) -> Fraction:
		return Fraction(self.base + self._ab[1], self.base)

	def two_ratio(self) -> Fraction:
		b = self._ab[1]
		return Fraction(2 * b, self.base + b)

	def coef(self) -> Fraction:
		a, b = self._ab
		if a == 0:
			raise ZeroDivisionError(f'δ_{self.j} = 0 has no second-moment coefficient')
		return Fraction(b * b, 4 * a * (b - a) * self.size * self.size)


class Regime:
	"""Exact rationals below `K_exact`, directed MPFR from there on"""

	def __init__(self, K_exact: int, precision: int):
		self.K_exact = K_exact
		self.arith = DirectedArithmetic(precision)

	def exact_at(self, j: int) -> bool:
		return j < self.K_exact

	def nu_up(self, t: IndexTerms) -> Value:
		if self.exact_at(t.j):
			return t.nu()
		return self._ratio(t.delta.denominator, t.base, upward=True)

	def m_factor_up(self, t: IndexTerms) -> Value:
		if self.exact_at(t.j):
			return t.m_factor()
		return self._ratio(t.base + 3 * t.delta.denominator, t.base, upward=True)

	def p_factor_up(self, t: IndexTerms) -> Value:
		if self.exact_at(t.j):
			return t.p_factor()
		return self._ratio(t.base + t.delta.denominator, t.base, upward=True)

	def p_factor_down(self, t: IndexTerms) -> Value:
		if self.exact_at(t.j):
			return t.p_factor()
		return self._ratio(t.base + t.delta.denominator, t.base, upward=False)

	def coef_up(self, t: IndexTerms) -> Value:
		if self.exact_at(t.j):
			return t.coef()
		a, b = t.delta.numerator, t.delta.denominator
		up = self.arith.up
		return up.mul(self._ratio(b * b, 4 * a * (b - a), upward=True), self._ratio(1, t.size * t.size, upward=True))

	def _ratio(self, n: int, d: int, upward: bool) -> mpfr:
		try:
			return self.arith.ratio_up(n, d) if upward else self.arith.ratio_down(n, d)
		except OverflowError:
			# operands wider than the mantissa: round the exact quotient instead
			q = Fraction(n, d)
			return self.arith.up_of(q) if upward else self.arith.down_of(q)

	# mixed operations: exact when both operands are rationals

	def add(self, x: Value, y: Value, upward: bool = True) -> Value:
		if isinstance(x, Fraction) and isinstance(y, Fraction):
			return x + y
		ctx = self.arith.up if upward else self.arith.down
		return ctx.add(self._lift(x, upward), self._lift(y, upward))

	def sub(self, x: Value, y: Value, upward: bool = True) -> Value:
		"""x − y; y is lifted in the opposite direction"""
		if isinstance(x, Fraction) and isinstance(y, Fraction):
			return x - y
		ctx = self.arith.up if upward else self.arith.down
		return ctx.sub(self._lift(x, upward), self._lift(y, not upward))

	def mul(self, x: Value, y: Value, upward: bool = True) -> Value:
		"""Product of non-negative operands"""
		if isinstance(x, Fraction) and isinstance(y, Fraction):
			return x * y
		ctx = self.arith.up if upward else self.arith.down
		return ctx.mul(self._lift(x, upward), self._lift(y, upward))

	def _lift(self, x: Value, upward: bool) -> mpfr:
		if isinstance(x, Fraction):
			return self.arith.up_of(x) if upward else self.arith.down_of(x)
		return x


def is_exact(x: Value) -> bool:
	return isinstance(x, Fraction)
