import random
from pathlib import Path

import pytest

from sqfree_cover.composer.service import (
	compose_disjoint,
	compose_partial,
	find_untouched_class,
	head_product,
	shift_tail,
	verify_class_cover,
)
from sqfree_cover.composer.views import (
	ClassCover,
	CollisionError,
	CompositionError,
	CompositionSpec,
	HypothesisError,
	MissingClassError,
	ShiftVerificationError,
	SmallModulusError,
)
from sqfree_cover.covering.formats import load_system
from sqfree_cover.covering.service import is_covering
from sqfree_cover.covering.views import Congruence, CoveringSystem

DATA = Path(__file__).resolve().parents[1] / 'sqfree_cover' / 'data'


@pytest.fixture
def erdos() -> CoveringSystem:
	return load_system(DATA / 'erdos_210.txt')


@pytest.fixture
def toy() -> CompositionSpec:
	return CompositionSpec.model_validate_json((DATA / 'compose_toy.json').read_text(encoding='utf-8'))


def _pairs(congruences):
	return [(c.residue, c.modulus) for c in congruences]


def test_head_product_and_untouched_class(erdos: CoveringSystem):
	assert head_product(erdos, 0) == 1
	assert head_product(erdos, 2) == 6
	assert find_untouched_class(erdos, 2) == 1
	assert find_untouched_class(erdos, 0) == 0
	with pytest.raises(CompositionError):
		head_product(erdos, 15)


def test_untouched_class_needs_an_uncovered_head():
	with pytest.raises(HypothesisError):
		find_untouched_class(CoveringSystem.from_pairs([(0, 2), (1, 2)]), 2)


def test_shift_to_the_untouched_class_is_the_identity(erdos: CoveringSystem):
	assert _pairs(shift_tail(erdos, 2, 1)) == _pairs(erdos.congruences[2:])


def test_erdos_tail_moved_to_class_five(erdos: CoveringSystem):
	shifted = shift_tail(erdos, 2, 5)
	assert _pairs(shifted)[:3] == [(4, 5), (5, 6), (4, 7)]
	assert verify_class_cover(shifted, 5, 6) is None


@pytest.mark.parametrize('b', range(6))
def test_mod24_tail_reaches_every_class(b):
	system = load_system(DATA / 'mod24.txt')
	shifted = shift_tail(system, 2, b)
	assert [c.modulus for c in shifted] == [4, 8, 12, 24]
	assert verify_class_cover(shifted, b, 6) is None


def test_tail_missing_the_untouched_class_fails_for_every_target():
	system = CoveringSystem.from_pairs([(0, 2), (0, 3), (5, 6)])
	for b in range(6):
		with pytest.raises(ShiftVerificationError):
			shift_tail(system, 2, b)


@pytest.mark.parametrize('seed', range(12))
def test_translated_erdos_systems_shift_everywhere(seed):
	rng = random.Random(seed)
	c = rng.randrange(210)
	base = load_system(DATA / 'erdos_210.txt')
	system = CoveringSystem.from_pairs([(x.residue + c, x.modulus) for x in base])
	a = find_untouched_class(system, 2)
	assert a == min((1 + c) % 6, (5 + c) % 6)
	for b in range(6):
		shifted = shift_tail(system, 2, b)
		assert verify_class_cover(shifted, b, 6) is None
		assert all(s.residue == (t.residue - a + b) % t.modulus for s, t in zip(shifted, system.congruences[2:]))


def test_class_cover_iff_the_original_tail_covers(erdos: CoveringSystem):
	"""Shifting preserves whether the tail covers its class, in both directions"""
	a = find_untouched_class(erdos, 2)
	for drop in range(2, len(erdos)):
		broken = erdos.without(drop)
		covers = verify_class_cover(broken.congruences[2:], a, 6) is None
		for b in range(6):
			if covers:
				assert verify_class_cover(shift_tail(broken, 2, b), b, 6) is None
			else:
				with pytest.raises(ShiftVerificationError):
					shift_tail(broken, 2, b)


def test_verify_class_cover_examples():
	assert verify_class_cover([Congruence(residue=1, modulus=2)], 1, 2) is None
	assert verify_class_cover([], 4, 6) == 4
	assert verify_class_cover([Congruence(residue=0, modulus=4)], 0, 2) == 2


def test_toy_composition(toy: CompositionSpec):
	composition = compose_disjoint(toy.classes)
	assert composition.M == 6
	assert composition.head_moduli == (2, 3)
	assert composition.classes == [0, 1, 2, 3, 4, 5]
	assert composition.missing == []
	assert composition.covered
	assert composition.system.is_distinct
	assert composition.system.lcm == 166320
	assert len(composition.congruences) == 128
	assert composition.m_k == 3
	assert composition.tails_above_head
	assert min(c.modulus for c in composition.congruences) == 4
	assert is_covering(composition.system)
	assert _pairs(composition.congruences)[:4] == [(0, 6), (1, 4), (7, 12), (2, 9)]


@pytest.mark.parametrize('b', range(6))
def test_toy_tails_cover_their_class(toy: CompositionSpec, b):
	item = toy.classes[b]
	assert verify_class_cover(shift_tail(item.system, item.k, item.b), b, 6) is None


def test_tail_moduli_must_exceed_the_last_leading_modulus():
	classes = [
		ClassCover(system=[(0, 2), (0, 3), (1, 6)], k=2, b=0),
		ClassCover(system=[(0, 2), (0, 3), (1, 2)], k=2, b=1),
	]
	with pytest.raises(SmallModulusError) as e:
		compose_partial(classes)
	assert 'modulus 2' in str(e.value)
	with pytest.raises(SmallModulusError):
		compose_partial([ClassCover(system=[(0, 2), (0, 3), (1, 3), (1, 6)], k=2, b=1)])


def test_every_class_is_required(toy: CompositionSpec):
	with pytest.raises(MissingClassError):
		compose_disjoint(toy.classes[1:])


def test_partial_composition_reports_the_gap(toy: CompositionSpec):
	composition = compose_partial(toy.classes[1:])
	assert composition.missing == [0]
	assert not composition.covered
	assert composition.witness == 6


def test_shared_modulus_is_a_collision():
	spec = CompositionSpec.model_validate_json((DATA / 'compose_collision.json').read_text(encoding='utf-8'))
	with pytest.raises(CollisionError) as e:
		compose_disjoint(spec.classes)
	assert 'modulus 6' in str(e.value)


def test_heads_must_agree(toy: CompositionSpec):
	other = ClassCover(system=[(0, 2), (0, 5), (1, 2)], k=2, b=1)
	with pytest.raises(CompositionError):
		compose_disjoint([toy.classes[0], other])


def test_repeated_classes(toy: CompositionSpec):
	repeated = toy.classes[0].model_copy(update={'b': 6})
	with pytest.raises(CompositionError):
		compose_disjoint([*toy.classes, repeated])
	with pytest.raises(CompositionError):
		compose_disjoint([])
