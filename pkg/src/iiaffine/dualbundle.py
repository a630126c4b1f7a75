"""The Lie torus bundle TB / Lambda and its affine-family sections.

In adapted coordinates (x, y mod 1) the sections used here are
x -> (x, [S x + v]) with S a multiple of the identity:

* zero section        S = 0
* affine lattice      S = -I   (x, [-x])
* prequantization     S = +I   (x, [x]), read off from holonomy

Charts are oriented so that (x_1..x_n, y_1..y_n) is positive.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .affine import DEFAULT_WORD_BOUND, AffineTier
from .almodels import EnhancedALModel, holonomy_phase
from .linalg import RMatrix, RVector, ShapeError, det, is_integral, vector, zero_vector
from .quotient import LatticePointSet, Polytope, QuotientPresentation, canonical_representatives


class NonTransverseError(ValueError):
    """The two sections coincide along an open set."""


class NonOrientableError(ValueError):
    """Signed counts need an orientable base."""


class SectionKind(enum.Enum):
    ZERO = "Zero"
    AFFINE_LATTICE = "AffineLattice"
    PREQUANTIZATION = "Prequantization"


_SLOPE = {SectionKind.ZERO: 0, SectionKind.AFFINE_LATTICE: -1, SectionKind.PREQUANTIZATION: 1}


@dataclass(frozen=True)
class BundleSection:
    kind: SectionKind
    offset: RVector | None = None

    @property
    def slope(self) -> int:
        return _SLOPE[self.kind]

    def S(self, n: int) -> RMatrix:
        return RMatrix.identity(n).scale(self.slope)

    def v(self, n: int) -> RVector:
        return vector(self.offset) if self.offset is not None else zero_vector(n)

    def fibre_value(self, x: Sequence) -> RVector:
        """[S x + v] in [0, 1)^n."""
        x = vector(x)
        v = self.v(len(x))
        return tuple((self.slope * a + b) % 1 for a, b in zip(x, v))


ZERO_SECTION = BundleSection(SectionKind.ZERO)
AFFINE_LATTICE = BundleSection(SectionKind.AFFINE_LATTICE)
PREQUANTIZATION = BundleSection(SectionKind.PREQUANTIZATION)


@dataclass(frozen=True)
class TorusBundleChart:
    base_domain: Polytope

    @property
    def dim(self) -> int:
        return self.base_domain.dim

    @classmethod
    def over(cls, q: QuotientPresentation) -> TorusBundleChart:
        return cls(q.domain)


def _difference(a: BundleSection, b: BundleSection, n: int) -> tuple[int, RVector]:
    dv = tuple(x - y for x, y in zip(a.v(n), b.v(n)))
    return a.slope - b.slope, dv


def section_coincidence_points(a: BundleSection, b: BundleSection, chart: TorusBundleChart,
                               q: QuotientPresentation, word_bound: int = DEFAULT_WORD_BOUND) -> LatticePointSet:
    """Points of B over which the two sections agree.

    Solves (S_a - S_b) x + (v_a - v_b) in Z^n on the half-open domain, then
    collapses group orbits.
    """
    n = chart.dim
    if q.dim != n or q.domain != chart.base_domain:
        raise ShapeError("chart does not match the presentation's domain")
    q.require_tier(AffineTier.INTEGRAL_INTEGRAL_AFFINE)
    c, dv = _difference(a, b, n)
    if c == 0:
        if is_integral(dv):
            raise NonTransverseError(f"{a.kind.value} and {b.kind.value} coincide")
        return LatticePointSet(frozenset())
    # x = (m - dv) / c for integer vectors m
    lo, hi = chart.base_domain.bounding_box()
    ranges = []
    for i in range(n):
        ends = sorted((c * lo[i] + dv[i], c * hi[i] + dv[i]))
        ranges.append(range(ends[0].__floor__(), ends[1].__ceil__() + 1))
    found = []
    for m in itertools.product(*ranges):
        x = tuple((Fraction(mi) - di) / c for mi, di in zip(m, dv))
        if chart.base_domain.contains(x):
            found.append(x)
    return canonical_representatives(q, found, word_bound)


def local_sign(a: BundleSection, b: BundleSection, n: int) -> int:
    """sign det(S_a - S_b), the common sign of every intersection of the pair."""
    c, _ = _difference(a, b, n)
    if c == 0:
        raise NonTransverseError(f"{a.kind.value} and {b.kind.value} are not transverse")
    return 1 if det(RMatrix.identity(n).scale(c)) > 0 else -1


def intersection_number(a: BundleSection, b: BundleSection, chart: TorusBundleChart,
                        q: QuotientPresentation, word_bound: int = DEFAULT_WORD_BOUND) -> int:
    """Signed count: local sign times the number of coincidence points.

    For (affine lattice, zero) this is (-1)^n |B_Z|. Swapping the arguments
    multiplies by (-1)^n, the graded symmetry of middle-dimensional cycles.
    """
    if not q.orientable:
        raise NonOrientableError(f"{q.label or 'presentation'} is not orientable")
    sign = local_sign(a, b, chart.dim)
    return sign * len(section_coincidence_points(a, b, chart, q, word_bound))


def prequantization_section_check(model: EnhancedALModel, samples: int = 100, seed: int = 0,
                                  denominator: int = 60) -> bool:
    """The holonomy section s_L(x) = (x, [hol phases]) is minus the affine lattice.

    Checked exactly at ``samples`` random rational basepoints of the chart
    domain, plus the vertices.
    """
    rng = random.Random(seed)
    lo, hi = model.omega_domain.bounding_box()
    n = model.dim
    points = list(model.omega_domain.vertices)
    while len(points) < samples + len(model.omega_domain.vertices):
        x = tuple(Fraction(rng.randint((l * denominator).__floor__(), (h * denominator).__ceil__()), denominator)
                  for l, h in zip(lo, hi))
        if model.omega_domain.contains_closure(x):
            points.append(x)
    for x in points:
        s_l = tuple(holonomy_phase(x, [int(i == k) for i in range(n)]) for k in range(n))
        neg_aff = tuple((-y) % 1 for y in AFFINE_LATTICE.fibre_value(x))
        if s_l != neg_aff or s_l != PREQUANTIZATION.fibre_value(x):
            return False
    return True
