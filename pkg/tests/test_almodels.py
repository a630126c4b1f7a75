from __future__ import annotations

import cmath
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iiaffine.affine import TierError, compose
from iiaffine.almodels import (
    ALTransition,
    EnhancedALModel,
    FibreLoop,
    OutsideDomainError,
    bohr_sommerfeld_set,
    bs_flip_witness,
    bs_status,
    compose_transitions,
    holonomy,
    holonomy_numeric,
    holonomy_phase,
    is_bohr_sommerfeld,
    is_enhanced_isomorphism,
    is_symplectomorphism,
    random_transition,
    transported_phases,
)
from iiaffine.linalg import ShapeError
from iiaffine.quotient import Polytope, QuotientPresentation, builtin_presentation, integral_points

h = Fraction(1, 2)
WIDE = EnhancedALModel(Polytope.box([-5, -5], [5, 5], half_open=False))
LINE = EnhancedALModel(Polytope.box([-5], [5], half_open=False))


def test_symplectomorphism_examples():
    assert is_symplectomorphism(ALTransition.identity(2))
    assert not is_symplectomorphism(ALTransition.from_lists([[1, 0], [0, 1]], [0, 0], [[0, 1], [0, 0]]))
    assert is_symplectomorphism(ALTransition.from_lists([[1, 1], [0, 1]], [h, 7], c=[Fraction(1, 3), 0]))
    assert not is_symplectomorphism(ALTransition.from_lists([[2, 0], [0, 1]], [0, 0]))
    with pytest.raises(ShapeError):
        ALTransition.from_lists([[1, 0], [0, 1]], [0])


def test_enhanced_isomorphism_examples():
    assert is_enhanced_isomorphism(ALTransition.identity(2))
    assert not is_enhanced_isomorphism(ALTransition.from_lists([[1, 0], [0, 1]], [h, 0]))
    assert is_enhanced_isomorphism(ALTransition.from_lists([[-1, 0], [0, 1]], [0, 1]))


def test_holonomy_examples():
    assert holonomy(WIDE, FibreLoop((Fraction(2, 7), 3), (0, 0))) == 1
    assert holonomy(LINE, FibreLoop((h,), (1,))) == -1
    x = (Fraction(1, 3), Fraction(1, 4))
    assert holonomy_phase(x, (1, 2)) == Fraction(5, 6)
    assert cmath.isclose(holonomy(WIDE, FibreLoop(x, (1, 2))), cmath.exp(5j * cmath.pi / 3), abs_tol=1e-15)
    with pytest.raises(OutsideDomainError):
        holonomy(LINE, FibreLoop((6,), (1,)))


def test_holonomy_numeric_examples():
    assert holonomy_numeric(WIDE, FibreLoop((h, 1), (0, 0))) == 1
    assert abs(holonomy_numeric(LINE, FibreLoop((h,), (1,)), 10_000) + 1) < 1e-8


def test_holonomy_numeric_agrees_with_exact_formula():
    rng = random.Random(0)
    for _ in range(20):
        n = rng.randint(1, 3)
        model = EnhancedALModel(Polytope.box([-3] * n, [3] * n, half_open=False))
        loop = FibreLoop(tuple(Fraction(rng.randint(-30, 30), rng.randint(10, 12)) for _ in range(n)),
                         tuple(rng.randint(-3, 3) for _ in range(n)))
        assert abs(holonomy(model, loop) - holonomy_numeric(model, loop)) < 1e-8


def test_bohr_sommerfeld_examples():
    assert is_bohr_sommerfeld(WIDE, (0, 0))
    assert not is_bohr_sommerfeld(WIDE, (h, 0))
    assert is_bohr_sommerfeld(WIDE, (2, -3))
    with pytest.raises(OutsideDomainError):
        is_bohr_sommerfeld(WIDE, (9, 0))


def test_bohr_sommerfeld_set_examples():
    t2 = builtin_presentation("torus-2", 3)
    assert bohr_sommerfeld_set(t2) == integral_points(t2)
    assert len(bohr_sommerfeld_set(t2)) == 9
    assert bohr_sommerfeld_set(builtin_presentation("klein", 1)).sorted() == [(0, 0)]
    assert bohr_sommerfeld_set(builtin_presentation("torus-1", 5)).sorted() == [(k,) for k in range(5)]


def test_bohr_sommerfeld_set_needs_integral_integral_structure():
    from iiaffine.affine import AffineMap
    q = QuotientPresentation(1, (AffineMap.translation_by([h]),), Polytope.box([0], [h]), "half")
    with pytest.raises(TierError):
        bohr_sommerfeld_set(q)


small_q = st.fractions(min_value=-4, max_value=4, max_denominator=12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.lists(small_q, min_size=n, max_size=n),
    st.lists(st.integers(-5, 5), min_size=n, max_size=n),
    st.lists(st.integers(-5, 5), min_size=n, max_size=n))))
def test_holonomy_is_a_homomorphism(data):
    x, m1, m2 = data
    m12 = [a + b for a, b in zip(m1, m2)]
    assert holonomy_phase(x, m12) == (holonomy_phase(x, m1) + holonomy_phase(x, m2)) % 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_bohr_sommerfeld_status_is_chart_independent(seed, n):
    rng = random.Random(seed)
    tr = random_transition(n, rng, symplectic=True, integral_b=True)
    assert is_enhanced_isomorphism(tr)
    x = tuple(Fraction(rng.randint(-8, 8), rng.choice([1, 2, 3])) for _ in range(n))
    assert bs_status(x) == bs_status(tr.base(x))
    assert transported_phases(tr, x) == tuple(holonomy_phase(x, [int(i == j) for i in range(n)]) for j in range(n))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_non_integral_translation_has_a_witness(seed, n):
    rng = random.Random(seed)
    tr = random_transition(n, rng, symplectic=True, integral_b=False)
    assert not is_enhanced_isomorphism(tr)
    x, xp = bs_flip_witness(tr)
    assert xp == tr.base(x)
    assert bs_status(x) != bs_status(xp)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_enhanced_isomorphisms_compose(seed, n):
    rng = random.Random(seed)
    f = random_transition(n, rng, symplectic=True, integral_b=True)
    g = random_transition(n, rng, symplectic=True, integral_b=True)
    fg = compose_transitions(f, g)
    assert is_enhanced_isomorphism(fg)
    assert fg.base == compose(f.base, g.base)


def test_witness_for_half_shift():
    tr = ALTransition.from_lists([[1, 0], [0, 1]], [h, 0])
    assert bs_flip_witness(tr) == ((0, 0), (h, 0))
    assert bs_flip_witness(ALTransition.identity(2)) is None
