from __future__ import annotations

from fractions import Fraction

import pytest

from iiaffine.almodels import EnhancedALModel
from iiaffine.dualbundle import (
    AFFINE_LATTICE,
    PREQUANTIZATION,
    ZERO_SECTION,
    BundleSection,
    NonOrientableError,
    NonTransverseError,
    SectionKind,
    TorusBundleChart,
    intersection_number,
    local_sign,
    prequantization_section_check,
    section_coincidence_points,
)
from iiaffine.linalg import RMatrix
from iiaffine.quotient import Polytope, builtin_presentation, integral_points, volume

BUILTINS = ["torus-1", "torus-2", "torus-3", "klein", "kodaira-thurston"]
ORIENTABLE = ["torus-1", "torus-2", "torus-3", "kodaira-thurston"]
SECTIONS = [ZERO_SECTION, AFFINE_LATTICE, PREQUANTIZATION]


def setup(name, k=1):
    q = builtin_presentation(name, k)
    return q, TorusBundleChart.over(q)


def test_section_data():
    assert ZERO_SECTION.S(2) == RMatrix.zeros(2)
    assert AFFINE_LATTICE.S(2) == RMatrix.identity(2).scale(-1)
    assert PREQUANTIZATION.S(3) == RMatrix.identity(3)
    assert all(s.v(2) == (0, 0) for s in SECTIONS)
    assert AFFINE_LATTICE.fibre_value((Fraction(1, 3),)) == (Fraction(2, 3),)


def test_coincidence_examples():
    q, chart = setup("torus-2", 3)
    with pytest.raises(NonTransverseError):
        section_coincidence_points(ZERO_SECTION, ZERO_SECTION, chart, q)
    assert len(section_coincidence_points(AFFINE_LATTICE, ZERO_SECTION, chart, q)) == 9
    q1, c1 = setup("torus-1")
    pts = section_coincidence_points(PREQUANTIZATION, AFFINE_LATTICE, c1, q1)
    assert pts.sorted() == [(0,), (Fraction(1, 2),)]


def test_parallel_sections_with_fractional_offset_miss():
    q, chart = setup("torus-2")
    shifted = BundleSection(SectionKind.ZERO, (Fraction(1, 2), 0))
    assert len(section_coincidence_points(shifted, ZERO_SECTION, chart, q)) == 0


def test_intersection_examples():
    q, chart = setup("torus-2", 3)
    assert intersection_number(AFFINE_LATTICE, ZERO_SECTION, chart, q) == 9
    q, chart = setup("torus-1", 5)
    assert intersection_number(AFFINE_LATTICE, ZERO_SECTION, chart, q) == -5
    q, chart = setup("kodaira-thurston")
    assert intersection_number(AFFINE_LATTICE, ZERO_SECTION, chart, q) == -1


def test_intersection_refuses_non_orientable_base():
    q, chart = setup("klein")
    with pytest.raises(NonOrientableError):
        intersection_number(AFFINE_LATTICE, ZERO_SECTION, chart, q)
    assert len(section_coincidence_points(AFFINE_LATTICE, ZERO_SECTION, chart, q)) == 1


def test_local_sign_is_a_determinant():
    for n in (1, 2, 3):
        assert local_sign(AFFINE_LATTICE, ZERO_SECTION, n) == (-1) ** n
        assert local_sign(PREQUANTIZATION, ZERO_SECTION, n) == 1
        assert local_sign(AFFINE_LATTICE, PREQUANTIZATION, n) == (-1) ** n


@pytest.mark.parametrize("name", ORIENTABLE)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_swapping_sections(name, k):
    # Signs come from det(S_a - S_b), so a swap multiplies by det(-I) = (-1)^n.
    q, chart = setup(name, k)
    n = q.dim
    for a in SECTIONS:
        for b in SECTIONS:
            if a is b:
                continue
            assert intersection_number(a, b, chart, q) == (-1) ** n * intersection_number(b, a, chart, q)


@pytest.mark.parametrize("name", BUILTINS)
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_coincidences_are_integral_points(name, k):
    q, chart = setup(name, k)
    assert section_coincidence_points(AFFINE_LATTICE, ZERO_SECTION, chart, q) == integral_points(q)
    if q.orientable:
        assert (-1) ** q.dim * intersection_number(AFFINE_LATTICE, ZERO_SECTION, chart, q) == volume(q.domain)


def test_prequantization_section_examples():
    assert ZERO_SECTION.fibre_value((0,)) == PREQUANTIZATION.fibre_value((0,)) == (0,)
    third = (Fraction(1, 3),)
    assert PREQUANTIZATION.fibre_value(third) == tuple((-y) % 1 for y in AFFINE_LATTICE.fibre_value(third))
    model = EnhancedALModel(builtin_presentation("torus-2", 1).domain)
    assert prequantization_section_check(model)
    assert prequantization_section_check(EnhancedALModel(Polytope.box([-2, 0, 0], [1, 3, 1])), samples=50, seed=4)
