import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Iterable, Optional, Sequence

from sqfree_cover.covering.views import CapacityError
from sqfree_cover.crt.views import Hyperplane
from sqfree_cover.engine.arithmetic import IndexTerms, Regime, Value, is_exact
from sqfree_cover.engine.subsets import SmallSetSums, small_set_sums
from sqfree_cover.engine.subsets import direct_double_sum as _direct_double_sum
from sqfree_cover.engine.views import (
	MIN_TAIL_N,
	BoundReport,
	ConfigurationError,
	EngineConfig,
	Formula,
	KBound,
	SegmentTotal,
)
from sqfree_cover.primes.service import get_prime_table, nth_prime, prime_pi
from sqfree_cover.rounding import to_fraction
from sqfree_cover.utils import time_execution_sync

logger = logging.getLogger(__name__)

TWO = Fraction(2)
# largest k − 1 the pair-union transform is allowed to enumerate
DIRECT_MAX = 16
EXACT_SMALL_SET_LIMIT = 1 << 16


@dataclass
class _Prefixes:
	"""M(k−1) = ∏(1 + 3ν_j) rounded up and P(1, k−1) = ∏(1 + ν_j) rounded both ways"""

	M: Value = Fraction(1)
	P_up: Value = Fraction(1)
	P_down: Value = Fraction(1)


@dataclass
class _SmallEntry:
	sums: SmallSetSums
	relaxed: bool
	lifted: Optional[tuple] = None


@dataclass
class _ScanResult:
	subtotals: dict[int, Value] = field(default_factory=dict)
	rows: list[KBound] = field(default_factory=list)
	relaxed: list[int] = field(default_factory=list)
	relaxed_count: int = 0
	end: _Prefixes = field(default_factory=_Prefixes)

	def merged(self, later: '_ScanResult', regime: Regime) -> '_ScanResult':
		subtotals = dict(self.subtotals)
		for start, value in later.subtotals.items():
			subtotals[start] = regime.add(subtotals[start], value) if start in subtotals else value
		return _ScanResult(
			subtotals=subtotals,
			rows=self.rows + later.rows,
			relaxed=self.relaxed + later.relaxed,
			relaxed_count=self.relaxed_count + later.relaxed_count,
			end=later.end,
		)


def _less(x: Value, y: Value) -> bool:
	return to_fraction(x) < to_fraction(y)


class DistortionEngine:
	"""Certified upper bounds on w_k(B_k) under ‖F(A)‖ > C0 for one configuration"""

	def __init__(self, config: EngineConfig):
		self.config = config
		self.regime = Regime(config.K_exact, config.precision)
		self._primes = get_prime_table(config.N).values
		self._r_cache: dict[int, int] = {}
		self._small_cache: dict[tuple[int, int], _SmallEntry] = {}

	# per-index data

	def size(self, j: int) -> int:
		explicit = self.config.sizes.explicit
		if j <= len(explicit):
			return explicit[j - 1]
		if j <= self.config.N:
			return int(self._primes[j - 1])
		return nth_prime(j)

	def terms(self, j: int) -> IndexTerms:
		return IndexTerms(j, self.size(j), self.config.schedule.value(j))

	def threshold(self, k: int) -> int:
		"""⌊C0/|S_k|⌋: ‖J‖ > C0/|S_k| iff ‖J‖ > threshold for integer norms"""
		return self.config.C0 // self.size(k)

	def nu(self, J: Iterable[int]) -> Value:
		value: Value = Fraction(1)
		for j in J:
			value = self.regime.mul(value, self.regime.nu_up(self.terms(j)))
		return value

	def prefixes(self, k: int) -> _Prefixes:
		"""Running products over j = 1 … k−1"""
		pre = _Prefixes()
		for j in range(1, k):
			pre = self._advance(pre, self.terms(j))
		return pre

	def _advance(self, pre: _Prefixes, t: IndexTerms) -> _Prefixes:
		regime = self.regime
		return _Prefixes(
			M=regime.mul(pre.M, regime.m_factor_up(t)),
			P_up=regime.mul(pre.P_up, regime.p_factor_up(t)),
			P_down=regime.mul(pre.P_down, regime.p_factor_down(t), upward=False),
		)

	# thresholds and small sets

	def compute_r(self, k: int) -> int:
		"""Least r with |S_t|·|S_k| > C0 for every t ≥ r"""
		T = self.threshold(k)
		r = self._r_cache.get(T)
		if r is None:
			explicit = self.config.sizes.explicit
			last = max((t for t, s in enumerate(explicit, start=1) if s <= T), default=0)
			if T >= 2:
				below = prime_pi(T)
				if below > len(explicit):
					last = below
			r = last + 1
			self._r_cache[T] = r
		return r

	def _small(self, k: int) -> tuple[_SmallEntry, int]:
		T = self.threshold(k)
		r = self.compute_r(k)
		last = min(k - 1, r - 1)
		key = (T, last)
		entry = self._small_cache.get(key)
		if entry is None:
			entry = self._build_small(T, last)
			self._small_cache[key] = entry
		return entry, r

	def _build_small(self, T: int, last: int) -> _SmallEntry:
		limit = self.config.max_small_sets
		candidates = [self.terms(j) for j in range(1, last + 1) if self.size(j) <= T]
		sums = small_set_sums(candidates, T, limit)
		if sums is not None:
			return _SmallEntry(sums, relaxed=False)

		relaxed = 1 << (T.bit_length() - 1)
		if relaxed == T:
			relaxed >>= 1
		while True:
			sums = small_set_sums([t for t in candidates if t.size <= relaxed], relaxed, limit)
			if sums is not None:
				break
			relaxed >>= 1
		logger.debug(f'More than {limit} small sets at threshold {T}; relaxed to {relaxed} ({sums.count} sets)')
		return _SmallEntry(sums, relaxed=True)

	def _lifted(self, entry: _SmallEntry) -> tuple:
		"""(Σν down, Σ ratio down, U up) as MPFR values"""
		if entry.lifted is None:
			arith = self.regime.arith
			s = entry.sums
			entry.lifted = (arith.down_of(s.nu_sum), arith.down_of(s.ratio_sum), arith.up_of(s.U))
		return entry.lifted

	def _sums_for(self, k: int, entry: _SmallEntry) -> tuple:
		if self.regime.exact_at(k):
			s = entry.sums
			return s.nu_sum, s.ratio_sum, s.U
		return self._lifted(entry)

	def compute_U_V(self, k: int, r: Optional[int] = None) -> tuple[Fraction, Fraction]:
		"""The two double sums over subsets of {1 … r−1}, exact.

		r is capped at k so the sums stay inside {1 … k−1}; r = 1 gives (1, 0) when
		C0 ≥ |S_k| and (0, 0) otherwise.
		"""
		r = min(r or self.compute_r(k), k)
		T = self.threshold(k)
		candidates = [self.terms(j) for j in range(1, r) if self.size(j) <= T]
		limit = max(self.config.max_small_sets, EXACT_SMALL_SET_LIMIT)
		sums = small_set_sums(candidates, T, limit)
		if sums is None:
			raise CapacityError(f'more than {limit} small sets below threshold {T} at k = {k}')
		prefix = Fraction(1)
		for j in range(1, r):
			prefix *= self.terms(j).p_factor()
		total = prefix * sums.ratio_sum
		return sums.U, total - sums.U

	def direct_double_sum(self, k: int) -> Fraction:
		if k - 1 > DIRECT_MAX:
			raise CapacityError(f'direct double sum over 2^{k - 1} subsets exceeds the 2^{DIRECT_MAX} ceiling')
		return _direct_double_sum([self.terms(j) for j in range(1, k)], self.threshold(k))

	# routes

	def _small_value(self, t: IndexTerms, P_up: Value, entry: _SmallEntry) -> Value:
		regime = self.regime
		nu_sum, _, _ = self._sums_for(t.j, entry)
		return regime.mul(regime.nu_up(t), regime.sub(P_up, nu_sum))

	def _mid_value(self, t: IndexTerms, M: Value, P_down: Value, entry: _SmallEntry) -> Value:
		regime = self.regime
		if entry.sums.count == 0:
			bracket = M
		else:
			_, ratio_sum, U = self._sums_for(t.j, entry)
			subtracted = regime.mul(regime.mul(TWO, P_down, upward=False), ratio_sum, upward=False)
			bracket = regime.add(regime.sub(M, subtracted), U)
		return regime.mul(regime.coef_up(t), bracket)

	def _direct_value(self, t: IndexTerms) -> Value:
		return self.regime.mul(self.regime.coef_up(t), self.direct_double_sum(t.j))

	def bound_small_k(self, k: int) -> Value:
		entry, _ = self._small(k)
		return self._small_value(self.terms(k), self.prefixes(k).P_up, entry)

	def bound_mid_k(self, k: int) -> Value:
		t = self.terms(k)
		if t.delta == 0:
			raise ConfigurationError(f'δ_{k} = 0: the second-moment route needs δ_k > 0, use the small-k route')
		entry, _ = self._small(k)
		pre = self.prefixes(k)
		return self._mid_value(t, pre.M, pre.P_down, entry)

	def bound_at(self, t: IndexTerms, pre: _Prefixes) -> tuple[Value, Formula, int, Optional[int]]:
		"""Least applicable bound at k = t.j with its route, r and any relaxed threshold"""
		cfg = self.config
		entry, r = self._small(t.j)
		relaxed_C0 = (entry.sums.threshold + 1) * t.size - 1 if entry.relaxed else None
		if t.delta == 0:
			return self._small_value(t, pre.P_up, entry), 'small', r, relaxed_C0

		value, formula = self._mid_value(t, pre.M, pre.P_down, entry), 'mid'
		if t.j - 1 <= cfg.direct_limit:
			direct = self._direct_value(t)
			if _less(direct, value):
				value, formula, relaxed_C0 = direct, 'direct', None
		if cfg.compare_small_route:
			small = self._small_value(t, pre.P_up, entry)
			if _less(small, value):
				value, formula = small, 'small'
		return value, formula, r, relaxed_C0

	def bound_sum_hyperplanes(self, hyperplanes: Sequence[Hyperplane], k: int) -> Value:
		"""Σ ν(F(A)) over the hyperplanes whose largest fixed coordinate is k"""
		total: Value = Fraction(0)
		for h in hyperplanes:
			if h.top == k:
				total = self.regime.add(total, self.nu(sorted(h.coords)))
		return total

	def bound_second_moment(self, E: Fraction, k: int) -> Value:
		"""E / (4δ_k(1 − δ_k))"""
		delta = self.config.schedule.value(k)
		if delta == 0:
			raise ConfigurationError(f'δ_{k} = 0: the second-moment bound needs δ_k > 0')
		return Fraction(E) / (4 * delta * (1 - delta))

	# tail and full certificate

	def check_tail_hypotheses(self) -> None:
		cfg = self.config
		if cfg.N < MIN_TAIL_N:
			raise ConfigurationError(f'tail bound needs N ≥ {MIN_TAIL_N}, got {cfg.N}')
		if len(cfg.sizes.explicit) > cfg.N:
			raise ConfigurationError(f'|S_j| must be the j-th prime beyond N = {cfg.N}')
		if not cfg.schedule.is_half_beyond(cfg.N):
			raise ConfigurationError(f'δ_j must equal 1/2 for every j > N = {cfg.N}; truncate the schedule at N')

	def bound_tail(self, M0: Value) -> Value:
		"""(2c₂M₀e^{6c₁}/p_N)(L⁵ + 5L⁴ + 20L³ + 60L² + 120L + 120) with L = log p_N"""
		self.check_tail_hypotheses()
		arith = self.regime.arith
		up, down = arith.up, arith.down
		p = nth_prime(self.config.N)
		L_lo, L_hi = arith.log_down(p), arith.log_up(p)

		c1 = up.sub(up.div(1, down.mul(L_lo, L_lo)), down.log(L_lo))
		c2 = up.add(1, up.div(3, down.mul(2, L_lo)))
		growth = up.exp(up.mul(6, c1))
		poly = up.add(L_hi, 5)
		for coefficient in (20, 60, 120, 120):
			poly = up.add(up.mul(poly, L_hi), coefficient)

		lead = up.div(up.mul(up.mul(2, c2), up.mul(arith.up_of(M0), growth)), p)
		return up.mul(lead, poly)

	def range_products(self, first: int, last: int) -> _Prefixes:
		pre = _Prefixes()
		for seg_first, seg_last, delta in self.config.schedule.segments(self.config.N):
			for k in range(max(seg_first, first), min(seg_last, last) + 1):
				pre = self._advance(pre, IndexTerms(k, self.size(k), delta))
		return pre

	def scan(self, first: int, last: int, start: _Prefixes) -> _ScanResult:
		"""Bounds for k = first … last given the running products at first − 1"""
		cfg = self.config
		regime = self.regime
		result = _ScanResult()
		pre = start
		for seg_first, seg_last, delta in cfg.schedule.segments(cfg.N):
			lo, hi = max(seg_first, first), min(seg_last, last)
			if lo > hi:
				continue
			subtotal: Value = Fraction(0)
			for k in range(lo, hi + 1):
				t = IndexTerms(k, self.size(k), delta)
				value, formula, r, relaxed_C0 = self.bound_at(t, pre)
				subtotal = regime.add(subtotal, value)
				if k <= cfg.detail_limit:
					result.rows.append(
						KBound(k=k, value=to_fraction(value), formula=formula, exact=is_exact(value), r=r, relaxed_C0=relaxed_C0)
					)
				if relaxed_C0 is not None:
					result.relaxed_count += 1
					if len(result.relaxed) < cfg.detail_limit:
						result.relaxed.append(k)
				pre = self._advance(pre, t)
			result.subtotals[seg_first] = subtotal
			logger.debug(f'Segment {lo}..{hi} (δ = {delta}): subtotal ≤ {float(to_fraction(subtotal)):.12f}')
		result.end = pre
		return result

	def _scan_parallel(self, first: int, last: int, start: _Prefixes) -> _ScanResult:
		cfg = self.config
		step = ceil((last - first + 1) / cfg.workers)
		chunks = [(lo, min(lo + step - 1, last)) for lo in range(first, last + 1, step)]
		configs = [cfg] * len(chunks)
		with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
			products = list(pool.map(_chunk_products, configs, chunks))
			starts = []
			pre = start
			for product in products:
				starts.append(pre)
				pre = _Prefixes(
					M=self.regime.mul(pre.M, product.M),
					P_up=self.regime.mul(pre.P_up, product.P_up),
					P_down=self.regime.mul(pre.P_down, product.P_down, upward=False),
				)
			parts = list(pool.map(_chunk_scan, configs, chunks, starts))
		logger.debug(f'Scanned {first}..{last} in {len(chunks)} chunks over {cfg.workers} workers')
		merged = parts[0]
		for part in parts[1:]:
			merged = merged.merged(part, self.regime)
		return merged

	@time_execution_sync('--run_certificate')
	def run_certificate(self) -> BoundReport:
		cfg = self.config
		regime = self.regime
		self.check_tail_hypotheses()

		exact_last = min(cfg.K_exact - 1, cfg.N)
		if cfg.workers > 1 and cfg.N - exact_last > cfg.workers:
			scan = self.scan(1, exact_last, _Prefixes()).merged(
				self._scan_parallel(exact_last + 1, cfg.N, self.prefixes(exact_last + 1)), regime
			)
		else:
			scan = self.scan(1, cfg.N, _Prefixes())

		M0 = scan.end.M
		tail = self.bound_tail(M0)

		head_last = cfg.schedule.head_length
		if head_last is None or head_last > cfg.N:
			head_last = cfg.N
		head_sum: Value = Fraction(0)
		mid_sum: Value = Fraction(0)
		segments = []
		for seg_first, seg_last, delta in cfg.schedule.segments(cfg.N):
			subtotal = scan.subtotals[seg_first]
			segments.append(SegmentTotal(first=seg_first, last=seg_last, delta=delta, subtotal=to_fraction(subtotal)))
			if seg_last <= head_last:
				head_sum = regime.add(head_sum, subtotal)
			else:
				mid_sum = regime.add(mid_sum, subtotal)

		total = regime.add(regime.add(head_sum, mid_sum), tail)
		verdict = to_fraction(total) < 1
		logger.result(
			f'C0 = {cfg.C0}, N = {cfg.N}: head ≤ {float(to_fraction(head_sum)):.12f}, '
			f'mid ≤ {float(to_fraction(mid_sum)):.12f}, tail ≤ {float(to_fraction(tail)):.12e}, '
			f'total ≤ {float(to_fraction(total)):.12f} -> {"certified" if verdict else "no certificate"}'
		)
		if scan.relaxed_count:
			logger.warning(f'{scan.relaxed_count} indices used a relaxed threshold (more than {cfg.max_small_sets} small sets)')

		return BoundReport(
			per_k=scan.rows,
			head_sum=to_fraction(head_sum),
			head_exact=is_exact(head_sum),
			head_last=head_last,
			mid_sum=to_fraction(mid_sum),
			tail=to_fraction(tail),
			total=to_fraction(total),
			verdict=verdict,
			segments=segments,
			M0=to_fraction(M0),
			relaxed=scan.relaxed,
			relaxed_count=scan.relaxed_count,
			config=cfg.to_document(),
			schedule=cfg.schedule.to_document(),
		)


def _chunk_products(config: EngineConfig, bounds: tuple[int, int]) -> _Prefixes:
	return DistortionEngine(config).range_products(*bounds)


def _chunk_scan(config: EngineConfig, bounds: tuple[int, int], start: _Prefixes) -> _ScanResult:
	return DistortionEngine(config).scan(*bounds, start)


def nu(J: Iterable[int], config: EngineConfig) -> Value:
	return DistortionEngine(config).nu(J)


def bound_small_k(k: int, config: EngineConfig) -> Value:
	return DistortionEngine(config).bound_small_k(k)


def compute_r(k: int, config: EngineConfig) -> int:
	return DistortionEngine(config).compute_r(k)


def compute_U_V(k: int, r: Optional[int], config: EngineConfig) -> tuple[Fraction, Fraction]:
	return DistortionEngine(config).compute_U_V(k, r)


def direct_double_sum(k: int, config: EngineConfig) -> Fraction:
	return DistortionEngine(config).direct_double_sum(k)


def bound_mid_k(k: int, config: EngineConfig) -> Value:
	return DistortionEngine(config).bound_mid_k(k)


def bound_sum_hyperplanes(hyperplanes: Sequence[Hyperplane], k: int, config: EngineConfig) -> Value:
	return DistortionEngine(config).bound_sum_hyperplanes(hyperplanes, k)


def bound_second_moment(E: Fraction, k: int, config: EngineConfig) -> Value:
	return DistortionEngine(config).bound_second_moment(E, k)


def bound_tail(config: EngineConfig, M0: Value) -> Value:
	return DistortionEngine(config).bound_tail(M0)


def run_certificate(config: EngineConfig) -> BoundReport:
	return DistortionEngine(config).run_certificate()


def search_threshold(config: EngineConfig, lo: int, hi: int) -> Optional[int]:
	"""Least C0 in [lo, hi] whose certificate holds, assuming the verdict is monotone in C0"""
	if lo > hi:
		return None

	def holds(C0: int) -> bool:
		return run_certificate(config.with_C0(C0)).verdict

	if not holds(hi):
		logger.info(f'No certificate at C0 = {hi}; nothing to search in [{lo}, {hi}]')
		return None
	while lo < hi:
		mid = (lo + hi) // 2
		if holds(mid):
			hi = mid
		else:
			lo = mid + 1
	return lo
