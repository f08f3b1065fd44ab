import random
from itertools import product
from math import prod
from pathlib import Path

import pytest
from sympy import divisors

from sqfree_cover.covering.formats import load_system
from sqfree_cover.covering.service import is_covering
from sqfree_cover.covering.views import CapacityError, Congruence, CoveringSystem
from sqfree_cover.crt.service import (
	are_parallel,
	congruence_to_hyperplane,
	covers_q,
	int_to_tuple,
	make_hyperplane,
	system_to_hyperplanes,
	tuple_to_int,
)
from sqfree_cover.crt.views import CoordSet, DimensionError, Hyperplane, HyperplaneError, NonSquarefreeError

DATA = Path(__file__).resolve().parents[1] / 'sqfree_cover' / 'data'


@pytest.fixture
def erdos() -> CoveringSystem:
	return load_system(DATA / 'erdos_210.txt')


@pytest.mark.parametrize(
	'residue, modulus, fixed',
	[
		(0, 2, {1: 2}),
		(104, 105, {2: 2, 3: 4, 4: 6}),
		(0, 1, {}),
		(23, 30, {1: 1, 2: 2, 3: 3}),
		(4, 35, {3: 4, 4: 4}),
	],
)
def test_congruence_to_hyperplane(residue, modulus, fixed):
	h = congruence_to_hyperplane(Congruence(residue=residue, modulus=modulus), 4)
	assert h.fixed == fixed
	assert h.sizes == (2, 3, 5, 7)
	assert h.norm == modulus


def test_non_squarefree_and_out_of_dimension_moduli():
	with pytest.raises(NonSquarefreeError):
		congruence_to_hyperplane(Congruence(residue=1, modulus=12), 4)
	with pytest.raises(DimensionError):
		congruence_to_hyperplane(Congruence(residue=0, modulus=11), 4)


def test_hyperplane_shape():
	h = make_hyperplane(4, {2: 3, 4: 1})
	assert h.coords == frozenset({2, 4})
	assert h.top == 4
	assert h.norm == 21
	assert h.contains((1, 3, 5, 1))
	assert not h.contains((1, 2, 5, 1))
	assert make_hyperplane(4, {}).top is None
	with pytest.raises(HyperplaneError):
		make_hyperplane(2, {3: 1})
	with pytest.raises(HyperplaneError):
		make_hyperplane(2, {2: 4})


def test_coord_set_norm():
	sizes = (2, 3, 5, 7)
	assert CoordSet.of().norm(lambda j: sizes[j - 1]) == 1
	assert CoordSet.of(1, 3).norm(lambda j: sizes[j - 1]) == 10
	assert list(CoordSet.of(3, 1)) == [1, 3]


def test_every_erdos_modulus_is_its_hyperplane_norm(erdos: CoveringSystem):
	hyperplanes, n = system_to_hyperplanes(erdos)
	assert n == 4
	assert [h.norm for h in hyperplanes] == list(erdos.moduli)
	for a, b in zip(hyperplanes, hyperplanes[1:]):
		assert not are_parallel(a, b)


def test_tuple_examples():
	assert int_to_tuple(77, 4) == (1, 2, 2, 7)
	assert int_to_tuple(210, 4) == (2, 3, 5, 7)
	assert tuple_to_int((1, 2, 2, 7)) == 77
	assert tuple_to_int((2, 3, 5, 7)) == 210
	assert tuple_to_int(()) == 1


def test_tuple_ranges():
	with pytest.raises(HyperplaneError):
		int_to_tuple(0, 4)
	with pytest.raises(HyperplaneError):
		int_to_tuple(211, 4)
	with pytest.raises(HyperplaneError):
		tuple_to_int((3, 1))


def test_round_trip_up_to_2310():
	assert all(tuple_to_int(int_to_tuple(x, 5)) == x for x in range(1, 2311))


@pytest.mark.parametrize('n', range(1, 5))
def test_tuple_bijection_exhaustive(n):
	primes = (2, 3, 5, 7)[:n]
	images = {tuple_to_int(t) for t in product(*(range(1, p + 1) for p in primes))}
	assert images == set(range(1, prod(primes) + 1))


def test_parallel_requires_same_dimension():
	a = make_hyperplane(3, {1: 1})
	assert are_parallel(a, make_hyperplane(3, {1: 2}))
	assert not are_parallel(a, make_hyperplane(3, {2: 1}))
	with pytest.raises(DimensionError):
		are_parallel(a, make_hyperplane(2, {1: 1}))


def test_erdos_hyperplanes_cover_q(erdos: CoveringSystem):
	hyperplanes, n = system_to_hyperplanes(erdos)
	result = covers_q(hyperplanes, n)
	assert result.covered
	assert result.witness is None
	assert result.nodes_visited > 0


def test_erdos_without_last_congruence_has_a_witness(erdos: CoveringSystem):
	hyperplanes, n = system_to_hyperplanes(erdos.without(13))
	result = covers_q(hyperplanes, n)
	assert not result.covered
	assert result.witness == (1, 2, 4, 6)
	assert tuple_to_int(result.witness) == 209


def test_empty_family_leaves_a_witness():
	assert covers_q([], 1).witness == (1,)


def test_full_space_covers():
	assert covers_q([Hyperplane(n=2, fixed={})], 2).covered


def test_node_budget(erdos: CoveringSystem):
	hyperplanes, n = system_to_hyperplanes(erdos)
	with pytest.raises(CapacityError):
		covers_q(hyperplanes, n, budget=5)


@pytest.mark.parametrize('seed', range(100))
def test_covers_q_agrees_with_the_integer_sweep(seed):
	rng = random.Random(seed)
	moduli = [d for d in divisors(2310) if d > 1]
	system = CoveringSystem.from_pairs(
		[(rng.randrange(m), m) for m in (rng.choice(moduli) for _ in range(rng.randint(1, 14)))]
	)
	hyperplanes, n = system_to_hyperplanes(system)
	result = covers_q(hyperplanes, n)
	assert result.covered == is_covering(system)
	if not result.covered:
		x = tuple_to_int(result.witness)
		assert not any(c.contains(x) for c in system)
