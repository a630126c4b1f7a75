from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from iiaffine.linalg import RMatrix

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def rational_matrices(draw, n: int | None = None):
    n = n or draw(st.integers(1, 4))
    return RMatrix([[draw(rationals) for _ in range(n)] for _ in range(n)])


@st.composite
def gl_n_z_words(draw, n: int | None = None):
    """Products of elementary row operations and sign flips."""
    n = n or draw(st.integers(1, 4))
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(draw(st.integers(0, 8))):
        i = draw(st.integers(0, n - 1))
        if n > 1 and draw(st.booleans()):
            j = draw(st.integers(0, n - 1).filter(lambda j: j != i))
            k = draw(st.sampled_from([-2, -1, 1, 2]))
            rows[i] = [a + k * b for a, b in zip(rows[i], rows[j])]
        else:
            rows[i] = [-a for a in rows[i]]
    return RMatrix(rows)


@st.composite
def rational_vectors(draw, n: int):
    return tuple(draw(rationals) for _ in range(n))


@pytest.fixture
def rng():
    return random.Random(0)


def F(s) -> Fraction:
    return Fraction(s)
