"""Directed rounding on top of MPFR contexts.

Every helper returns an `mpfr` that is a lower (``*_down``) or upper (``*_up``) bound of the exact
value. Integer operands must be exactly representable at the working precision.
"""

from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpfr

Real = Union[int, Fraction, mpfr]


class DirectedArithmetic:
	def __init__(self, precision: int = 64):
		if precision < 60:
			raise ValueError(f'precision must be at least 60 bits, got {precision}')
		self.precision = precision
		self.up = gmpy2.context(precision=precision, round=gmpy2.RoundUp)
		self.down = gmpy2.context(precision=precision, round=gmpy2.RoundDown)

	def _exact_int(self, n: int) -> int:
		if abs(n).bit_length() > self.precision:
			raise OverflowError(f'integer operand with {abs(n).bit_length()} bits exceeds {self.precision}-bit precision')
		return n

	def ratio_up(self, n: int, d: int) -> mpfr:
		return self.up.div(self._exact_int(n), self._exact_int(d))

	def ratio_down(self, n: int, d: int) -> mpfr:
		return self.down.div(self._exact_int(n), self._exact_int(d))

	def _scaled(self, q: Fraction, upward: bool) -> mpfr:
		n, d = q.numerator, q.denominator
		if n == 0:
			return mpfr(0)
		if n < 0:
			# negate inside the context so the working precision is kept
			ctx = self.up if upward else self.down
			return ctx.sub(0, self._scaled(-q, not upward))
		# q ≈ t / 2**s with t holding `precision - 1` bits
		s = self.precision - 1 - (n.bit_length() - d.bit_length())
		if s >= 0:
			t, rem = divmod(n << s, d)
		else:
			t, rem = divmod(n, d << -s)
		if upward and rem:
			t += 1
		ctx = self.up if upward else self.down
		if s >= 0:
			return ctx.div(t, 1 << s)
		return ctx.mul(t, 1 << -s)

	def up_of(self, x: Real) -> mpfr:
		if isinstance(x, mpfr):
			return x
		return self._scaled(Fraction(x), upward=True)

	def down_of(self, x: Real) -> mpfr:
		if isinstance(x, mpfr):
			return x
		return self._scaled(Fraction(x), upward=False)

	def log_up(self, x: Real) -> mpfr:
		return self.up.log(self.up_of(x))

	def log_down(self, x: Real) -> mpfr:
		return self.down.log(self.down_of(x))

	def exp_up(self, x: mpfr) -> mpfr:
		return self.up.exp(x)


def to_fraction(x: Real) -> Fraction:
	"""Exact rational value of an int, Fraction or mpfr"""
	if isinstance(x, Fraction):
		return x
	if isinstance(x, int):
		return Fraction(x)
	n, d = x.as_integer_ratio()
	return Fraction(int(n), int(d))
