"""Exact rational vectors and matrices.

Vectors are plain tuples of :class:`fractions.Fraction` so they hash and
compare exactly; matrices are immutable :class:`RMatrix` values.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence, Union

Rational = Fraction
RVector = tuple  # tuple[Fraction, ...]

Number = Union[int, Fraction, str]


class ShapeError(ValueError):
    """Operand dimensions do not agree."""


class SingularMatrixError(ZeroDivisionError):
    """Matrix has zero determinant."""


def Q(value: Number) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(value)


def vector(entries: Iterable[Number]) -> RVector:
    return tuple(Q(e) for e in entries)


def zero_vector(n: int) -> RVector:
    return (Fraction(0),) * n


def is_integral(v: Iterable[Fraction]) -> bool:
    return all(Fraction(e).denominator == 1 for e in v)


def vadd(a: RVector, b: RVector) -> RVector:
    if len(a) != len(b):
        raise ShapeError(f"vector lengths {len(a)} and {len(b)} differ")
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: RVector, b: RVector) -> RVector:
    if len(a) != len(b):
        raise ShapeError(f"vector lengths {len(a)} and {len(b)} differ")
    return tuple(x - y for x, y in zip(a, b))


def vscale(c: Number, a: RVector) -> RVector:
    c = Q(c)
    return tuple(c * x for x in a)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    if len(a) != len(b):
        raise ShapeError(f"vector lengths {len(a)} and {len(b)} differ")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


class RMatrix:
    """Immutable exact rational matrix, stored row-major."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: Iterable[Iterable[Number]]):
        data = [tuple(Q(e) for e in row) for row in rows]
        nrows = len(data)
        ncols = len(data[0]) if data else 0
        if any(len(r) != ncols for r in data):
            raise ShapeError("ragged matrix rows")
        object.__setattr__(self, "rows", nrows)
        object.__setattr__(self, "cols", ncols)
        object.__setattr__(self, "entries", tuple(e for r in data for e in r))

    def __setattr__(self, name, value):
        raise AttributeError("RMatrix is immutable")

    @classmethod
    def identity(cls, n: int) -> RMatrix:
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> RMatrix:
        cols = rows if cols is None else cols
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def diagonal(cls, diag: Sequence[Number]) -> RMatrix:
        n = len(diag)
        return cls([[diag[i] if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> RVector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> RVector:
        return self.entries[j::self.cols]

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def T(self) -> RMatrix:
        return RMatrix([self.column(j) for j in range(self.cols)])

    def is_integral(self) -> bool:
        return is_integral(self.entries)

    def is_symmetric(self) -> bool:
        return self.is_square and self == self.T

    def apply(self, v: Sequence[Fraction]) -> RVector:
        if len(v) != self.cols:
            raise ShapeError(f"matrix has {self.cols} columns, vector has {len(v)} entries")
        return tuple(dot(self.row(i), v) for i in range(self.rows))

    def __matmul__(self, other):
        if isinstance(other, RMatrix):
            return matmul(self, other)
        return self.apply(other)

    def __add__(self, other: RMatrix) -> RMatrix:
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return RMatrix([vadd(self.row(i), other.row(i)) for i in range(self.rows)])

    def __sub__(self, other: RMatrix) -> RMatrix:
        if self.shape != other.shape:
            raise ShapeError(f"cannot subtract {self.shape} and {other.shape}")
        return RMatrix([vsub(self.row(i), other.row(i)) for i in range(self.rows)])

    def __neg__(self) -> RMatrix:
        return RMatrix([vscale(-1, self.row(i)) for i in range(self.rows)])

    def scale(self, c: Number) -> RMatrix:
        return RMatrix([vscale(c, self.row(i)) for i in range(self.rows)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, RMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(e) for e in self.row(i)) for i in range(self.rows))
        return f"RMatrix([{body}])"


def matmul(a: RMatrix, b: RMatrix) -> RMatrix:
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    cols = [b.column(j) for j in range(b.cols)]
    return RMatrix([[dot(a.row(i), c) for c in cols] for i in range(a.rows)])


def _bareiss_det(m: list[list[int]]) -> int:
    # Fraction-free elimination; every division below is exact.
    n = len(m)
    m = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def det(a: RMatrix) -> Fraction:
    """Exact determinant by Bareiss elimination on the row-scaled integer matrix."""
    if not a.is_square:
        raise ShapeError(f"determinant of non-square {a.shape} matrix")
    n = a.rows
    if n == 0:
        return Fraction(1)
    scales = []
    rows = []
    for i in range(n):
        row = a.row(i)
        s = lcm(*(e.denominator for e in row))
        scales.append(s)
        rows.append([int(e * s) for e in row])
    denom = 1
    for s in scales:
        denom *= s
    return Fraction(_bareiss_det(rows), denom)


def inverse(a: RMatrix) -> RMatrix:
    """Exact inverse by Gauss-Jordan elimination over the rationals."""
    if not a.is_square:
        raise ShapeError(f"inverse of non-square {a.shape} matrix")
    n = a.rows
    aug = [list(a.row(i)) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [e / p for e in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return RMatrix([row[n:] for row in aug])


def is_gl_n_z(a: RMatrix) -> bool:
    """True iff ``a`` is an integer matrix with determinant +1 or -1."""
    if not a.is_square:
        raise ShapeError(f"GL_n(Z) membership of non-square {a.shape} matrix")
    return a.is_integral() and det(a) in (1, -1)


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, len(m)):
            if m[i][col] != 0:
                f = m[i][col] / m[r][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[RVector]:
    """Basis of the right kernel of a rational matrix given by rows."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][col]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(tuple(v))
    return basis


def format_rational(q: Fraction) -> str:
    """Serialize as ``"p/q"`` (or ``"p"`` when integral)."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, bool) or isinstance(s, float):
        raise ValueError(f"not an exact rational: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise ValueError(f"not an exact rational: {s!r}")
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {s!r}") from exc
