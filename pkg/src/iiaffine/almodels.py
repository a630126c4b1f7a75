"""Action-angle chart models Omega x T^n with the prequantum line bundle.

The line bundle is trivial with covariant derivative d - 2 pi i sum x_j dt_j.
Holonomy phases are kept as exact rationals mod 1; complex values appear
only at the interface.
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .affine import DEFAULT_WORD_BOUND, AffineMap, AffineTier
from .linalg import RMatrix, RVector, ShapeError, dot, inverse, is_gl_n_z, is_integral, vector, zero_vector
from .quotient import LatticePointSet, Polytope, QuotientPresentation, canonical_representatives, grid_points


class OutsideDomainError(ValueError):
    """A basepoint lies outside the chart's base domain."""


@dataclass(frozen=True)
class ALTransition:
    """x' = A x + b,  t' = A^{-T} t + G x + c  (mod Z^n)."""

    A: RMatrix
    b: RVector
    G: RMatrix
    c: RVector

    def __post_init__(self):
        n = self.A.rows
        if not self.A.is_square or self.G.shape != (n, n) or len(self.b) != n or len(self.c) != n:
            raise ShapeError("transition blocks have inconsistent sizes")
        object.__setattr__(self, "b", vector(self.b))
        object.__setattr__(self, "c", vector(self.c))

    @classmethod
    def from_lists(cls, A, b, G=None, c=None) -> ALTransition:
        A = RMatrix(A)
        n = A.rows
        return cls(A, vector(b), RMatrix(G) if G is not None else RMatrix.zeros(n),
                   vector(c) if c is not None else zero_vector(n))

    @classmethod
    def identity(cls, n: int) -> ALTransition:
        return cls(RMatrix.identity(n), zero_vector(n), RMatrix.zeros(n), zero_vector(n))

    @property
    def dim(self) -> int:
        return self.A.rows

    @property
    def base(self) -> AffineMap:
        return AffineMap(self.A, self.b)


def compose_transitions(second: ALTransition, first: ALTransition) -> ALTransition:
    """The transition ``second`` after ``first``."""
    a2_inv_t = inverse(second.A).T
    A = second.A @ first.A
    b = tuple(x + y for x, y in zip(second.A.apply(first.b), second.b))
    G = a2_inv_t @ first.G + second.G @ first.A
    c = tuple(x + y + z for x, y, z in zip(a2_inv_t.apply(first.c), second.G.apply(first.b), second.c))
    return ALTransition(A, b, G, c)


def is_symplectomorphism(tr: ALTransition) -> bool:
    """Fibre-preserving symplectomorphism test within the affine family:
    A in GL_n(Z) and A^T G symmetric."""
    if tr.G.shape != tr.A.shape:
        raise ShapeError("G and A differ in shape")
    return is_gl_n_z(tr.A) and (tr.A.T @ tr.G).is_symmetric()


def is_enhanced_isomorphism(tr: ALTransition) -> bool:
    return is_symplectomorphism(tr) and is_integral(tr.b)


@dataclass(frozen=True)
class EnhancedALModel:
    omega_domain: Polytope

    @property
    def dim(self) -> int:
        return self.omega_domain.dim

    def require_inside(self, x: Sequence) -> RVector:
        x = vector(x)
        if len(x) != self.dim:
            raise ShapeError(f"basepoint of dimension {len(x)} in a {self.dim}-dimensional chart")
        if not self.omega_domain.contains_closure(x):
            raise OutsideDomainError(f"basepoint {tuple(map(str, x))} lies outside the chart domain")
        return x


@dataclass(frozen=True)
class FibreLoop:
    """Loop in the fibre over ``basepoint`` with homology class sum m_k [gamma_k]."""

    basepoint: RVector
    winding: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "basepoint", vector(self.basepoint))
        object.__setattr__(self, "winding", tuple(int(m) for m in self.winding))
        if len(self.basepoint) != len(self.winding):
            raise ShapeError("winding and basepoint dimensions differ")


def holonomy_phase(x: Sequence, m: Sequence[int]) -> Fraction:
    """<m, x> mod 1, in [0, 1)."""
    if len(x) != len(m):
        raise ShapeError("winding and basepoint dimensions differ")
    return dot(vector(m), vector(x)) % 1


def phase_to_complex(phase: Fraction) -> complex:
    exact = {Fraction(0): 1 + 0j, Fraction(1, 4): 1j, Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}
    phase = Fraction(phase) % 1
    if phase in exact:
        return exact[phase]
    return cmath.exp(2j * cmath.pi * float(phase))


def holonomy(model: EnhancedALModel, loop: FibreLoop) -> complex:
    """exp(2 pi i <m, x>)."""
    x = model.require_inside(loop.basepoint)
    return phase_to_complex(holonomy_phase(x, loop.winding))


def holonomy_numeric(model: EnhancedALModel, loop: FibreLoop, steps: int = 10_000) -> complex:
    """RK4 for the horizontal lift along t(s) = s m, s in [0, 1].

    Horizontality for d - 2 pi i sum x_j dt_j reads dz/ds = 2 pi i sum x_j t_j'(s) z.
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    x = [float(v) for v in model.require_inside(loop.basepoint)]
    m = loop.winding
    if not any(m):
        return 1 + 0j

    # t(s) = s m has constant velocity m, so the right-hand side is rate * z
    rate = 2j * cmath.pi * sum(xj * mj for xj, mj in zip(x, m))
    h = 1.0 / steps
    z = 1 + 0j
    for _ in range(steps):
        k1 = rate * z
        k2 = rate * (z + h / 2 * k1)
        k3 = rate * (z + h / 2 * k2)
        k4 = rate * (z + h * k3)
        z += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return z


def bs_status(x: Sequence) -> bool:
    """Trivial holonomy around every generating loop gamma_1, ..., gamma_n."""
    n = len(x)
    return all(holonomy_phase(x, [int(i == k) for i in range(n)]) == 0 for k in range(n))


def is_bohr_sommerfeld(model: EnhancedALModel, x: Sequence) -> bool:
    return bs_status(model.require_inside(x))


def transported_phases(tr: ALTransition, x: Sequence) -> tuple[Fraction, ...]:
    """Holonomy phases of gamma_j over x, computed in the target chart.

    gamma_j maps to sum_k (A^-1)_{jk} gamma'_k over x' = Ax + b.
    """
    x = vector(x)
    a_inv = inverse(tr.A)
    xp = tr.base(x)
    return tuple(holonomy_phase(xp, a_inv.row(j)) for j in range(tr.dim))


def bs_flip_witness(tr: ALTransition) -> tuple[RVector, RVector] | None:
    """A fibre whose Bohr-Sommerfeld status changes across the chart change.

    Any integral x is Bohr-Sommerfeld, while its image Ax + b is not once b
    has a non-integral entry. Returns (x, x') or None if b is integral.
    """
    if is_integral(tr.b):
        return None
    x = zero_vector(tr.dim)
    xp = tr.base(x)
    assert bs_status(x) and not bs_status(xp)
    return x, xp


def bohr_sommerfeld_set(q: QuotientPresentation, word_bound: int = DEFAULT_WORD_BOUND,
                        grid_denominator: int = 2) -> LatticePointSet:
    """Bohr-Sommerfeld fibres of the prequantized fibration over B.

    The fundamental domain is one enhanced chart. Candidates are the points
    of a (1/grid_denominator)-grid, so fibres with non-trivial holonomy are
    examined and rejected; survivors are collapsed by the group action.
    """
    q.require_tier(AffineTier.INTEGRAL_INTEGRAL_AFFINE)
    model = EnhancedALModel(q.domain)
    fibres = [x for x in grid_points(q.domain, grid_denominator) if is_bohr_sommerfeld(model, x)]
    return canonical_representatives(q, fibres, word_bound)


def random_transition(n: int, rng: random.Random, symplectic: bool | None = None,
                      integral_b: bool | None = None, unimodular: bool = True) -> ALTransition:
    """Random transition with A a word in elementary GL_n(Z) generators."""
    A = RMatrix.identity(n)
    for _ in range(rng.randint(0, 6)):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        rows = A.tolist()
        if n > 1 and rng.random() < 0.6:
            k = rng.choice([-2, -1, 1, 2])
            rows[i] = [a + k * b for a, b in zip(rows[i], rows[j])]
        else:
            rows[i] = [-a for a in rows[i]]
        A = RMatrix(rows)
    if not unimodular:
        A = A @ RMatrix.diagonal([rng.choice([2, 3, Fraction(1, 2)])] + [1] * (n - 1))
    if symplectic is None:
        symplectic = rng.random() < 0.5
    if integral_b is None:
        integral_b = rng.random() < 0.5
    S = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            S[i][j] = S[j][i] = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
    if symplectic:
        G = inverse(A).T @ RMatrix(S)
    else:
        G = RMatrix(S)
        rows = G.tolist()
        i, j = (0, 1) if n > 1 else (0, 0)
        rows[i][j] += 1
        G = RMatrix(rows)
        if (A.T @ G).is_symmetric():
            G = G + RMatrix([[int(r == 0 and col == n - 1) for col in range(n)] for r in range(n)])
    if integral_b:
        b = [rng.randint(-3, 3) for _ in range(n)]
    else:
        b = [Fraction(rng.randint(-6, 6), 2) for _ in range(n)]
        b[rng.randrange(n)] = Fraction(2 * rng.randint(-3, 3) + 1, 2)
    c = [Fraction(rng.randint(-4, 4), rng.randint(1, 4)) for _ in range(n)]
    return ALTransition(A, vector(b), G, vector(c))
