"""Affine maps x -> Ax + b of R^n, their lattice tier, and bounded orbits."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .linalg import (
    RMatrix,
    RVector,
    ShapeError,
    SingularMatrixError,
    det,
    inverse,
    is_gl_n_z,
    is_integral,
    vadd,
    vector,
    zero_vector,
)

DEFAULT_WORD_BOUND = 8


class AffineTier(enum.IntEnum):
    """Lattice-compatibility level of an affine map; larger is stricter."""

    AFFINE = 0
    INTEGRAL_AFFINE = 1
    INTEGRAL_INTEGRAL_AFFINE = 2

    @property
    def label(self) -> str:
        return {0: "Affine", 1: "IntegralAffine", 2: "IntegralIntegralAffine"}[self.value]


class TierError(ValueError):
    """A map does not reach the tier an operation requires."""


@dataclass(frozen=True)
class AffineMap:
    linear: RMatrix
    translation: RVector

    def __post_init__(self):
        if not self.linear.is_square:
            raise ShapeError("linear part must be square")
        if len(self.translation) != self.linear.rows:
            raise ShapeError("translation length does not match linear part")
        object.__setattr__(self, "translation", vector(self.translation))
        if det(self.linear) == 0:
            raise SingularMatrixError("linear part is singular")

    @classmethod
    def from_lists(cls, A: Sequence[Sequence], b: Sequence) -> AffineMap:
        return cls(RMatrix(A), vector(b))

    @classmethod
    def identity(cls, n: int) -> AffineMap:
        return cls(RMatrix.identity(n), zero_vector(n))

    @classmethod
    def translation_by(cls, b: Sequence) -> AffineMap:
        b = vector(b)
        return cls(RMatrix.identity(len(b)), b)

    @property
    def dim(self) -> int:
        return self.linear.rows

    def __call__(self, x: Sequence) -> RVector:
        return apply(self, x)


def apply(m: AffineMap, x: Sequence) -> RVector:
    if len(x) != m.dim:
        raise ShapeError(f"point of dimension {len(x)} for map of dimension {m.dim}")
    return vadd(m.linear.apply(vector(x)), m.translation)


def compose(f: AffineMap, g: AffineMap) -> AffineMap:
    """The map x -> f(g(x))."""
    if f.dim != g.dim:
        raise ShapeError(f"cannot compose maps of dimension {f.dim} and {g.dim}")
    return AffineMap(f.linear @ g.linear, vadd(f.linear.apply(g.translation), f.translation))


def invert(m: AffineMap) -> AffineMap:
    a_inv = inverse(m.linear)
    return AffineMap(a_inv, tuple(-e for e in a_inv.apply(m.translation)))


def classify(m: AffineMap) -> AffineTier:
    if not is_gl_n_z(m.linear):
        return AffineTier.AFFINE
    if is_integral(m.translation):
        return AffineTier.INTEGRAL_INTEGRAL_AFFINE
    return AffineTier.INTEGRAL_AFFINE


def _generator_closure(gens: Sequence[AffineMap]) -> list[AffineMap]:
    out = []
    for g in gens:
        out.append(g)
        out.append(invert(g))
    return out


_INT64_SAFE = 1 << 40


def _integer_ops(maps: Sequence[AffineMap], denom: int) -> list[tuple[np.ndarray, np.ndarray]]:
    ops = []
    for m in maps:
        a = np.array([[int(e) for e in m.linear.row(i)] for i in range(m.dim)], dtype=np.int64)
        b = np.array([int(e * denom) for e in m.translation], dtype=np.int64)
        ops.append((a.T.copy(), b))
    return ops


def orbit_scaled(gens: Sequence[AffineMap], seed: Sequence, word_bound: int) -> tuple[int, np.ndarray]:
    """Bounded orbit as integer vectors over a common denominator.

    Returns ``(D, points)`` with ``points`` an integer array whose rows p
    stand for p/D. Breadth-first over points: the level at which a point
    first appears is the shortest word reaching it, so the search is exact
    for the bound.
    """
    seed = vector(seed)
    if word_bound < 0:
        raise ValueError("word_bound must be non-negative")
    n = len(seed)
    for g in gens:
        if g.dim != n:
            raise ShapeError(f"generator of dimension {g.dim} acting on point of dimension {n}")
        if classify(g) < AffineTier.INTEGRAL_AFFINE:
            raise TierError("orbit enumeration needs integral affine generators")
    maps = _generator_closure(gens)
    denom = lcm(1, *(e.denominator for e in seed), *(e.denominator for m in maps for e in m.translation))
    start = [int(e * denom) for e in seed]
    dtype = np.int64 if max(map(abs, start), default=0) < _INT64_SAFE else object
    points = np.array([start], dtype=dtype)
    if not maps or word_bound == 0:
        return denom, points
    ops = _integer_ops(maps, denom)
    step = max(int(np.abs(b).max(initial=0)) + 1 for _, b in ops)
    seen = {tuple(start)}
    chunks = [points]
    frontier = points
    for _ in range(word_bound):
        if dtype is not object and int(np.abs(frontier).max()) * n * 2 + step >= _INT64_SAFE:
            dtype = object
            frontier = frontier.astype(object)
        cand = np.concatenate([frontier @ a.astype(dtype) + b.astype(dtype) for a, b in ops])
        fresh = []
        for row in cand.tolist():
            t = tuple(row)
            if t not in seen:
                seen.add(t)
                fresh.append(row)
        if not fresh:
            break
        frontier = np.array(fresh, dtype=dtype)
        chunks.append(frontier)
    return denom, np.concatenate([c.astype(dtype) for c in chunks])


def orbit_reps(gens: Sequence[AffineMap], seed: Sequence, word_bound: int = DEFAULT_WORD_BOUND) -> set:
    """All images of ``seed`` under words of length <= word_bound in the
    generators and their inverses, deduplicated exactly."""
    denom, pts = orbit_scaled(gens, seed, word_bound)
    return {tuple(Fraction(c, denom) for c in row) for row in pts.tolist()}
