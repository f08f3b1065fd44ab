import json
import random
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

from sqfree_cover.crt.views import Hyperplane
from sqfree_cover.engine.schedule import DeltaSchedule
from sqfree_cover.oracle.views import OracleError, OracleFixture


def random_family(rng: random.Random, sizes: Sequence[int], count: int) -> list[Hyperplane]:
	"""`count` hyperplanes with distinct fixed-coordinate sets, so no two are parallel"""
	n = len(sizes)
	available = (1 << n) - 1
	if count > available:
		raise OracleError(f'only {available} non-parallel hyperplanes exist in dimension {n}, asked for {count}')
	masks = rng.sample(range(1, available + 1), count)
	family = []
	for mask in masks:
		fixed = {j: rng.randint(1, sizes[j - 1]) for j in range(1, n + 1) if mask >> (j - 1) & 1}
		family.append(Hyperplane(n=n, fixed=fixed, sizes=tuple(sizes)))
	return family


def random_dyadic_schedule(rng: random.Random, n: int, denominator: int = 16) -> DeltaSchedule:
	"""One breakpoint per index with δ_j ∈ {0, 1/d, …, 1/2}"""
	return DeltaSchedule(breakpoints=[(j, Fraction(rng.randint(0, denominator // 2), denominator)) for j in range(1, n + 1)])


def random_fixture(rng: random.Random, sizes: Sequence[int], count: int, C0: int = 0) -> OracleFixture:
	family = random_family(rng, sizes, count)
	return OracleFixture(
		sizes=tuple(sizes),
		schedule=random_dyadic_schedule(rng, len(sizes)),
		C0=C0,
		hyperplanes=[dict(h.fixed) for h in family],
	)


def load_fixture(path: Union[str, Path]) -> OracleFixture:
	return OracleFixture.model_validate(json.loads(Path(path).read_text(encoding='utf-8')))


def dump_fixture(fixture: OracleFixture, path: Union[str, Path]) -> None:
	path = Path(path)
	path.parent.mkdir(parents=True, exist_ok=True)
	document = {
		'sizes': list(fixture.sizes),
		'schedule': fixture.schedule.to_document(),
		'C0': fixture.C0,
		'hyperplanes': [{str(j): v for j, v in sorted(h.items())} for h in fixture.hyperplanes],
	}
	path.write_text(json.dumps(document, indent=2), encoding='utf-8')
