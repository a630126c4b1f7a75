"""Quotients B = R^n / Gamma given by generators and a fundamental polytope.

Fundamental domains are half-open polytopes: every facet carries a flag
saying whether it belongs to the domain. Builtin boxes are closed on their
lower faces and open on their upper faces, so each orbit meets the domain
exactly once and boundary lattice points are counted once.
"""

from __future__ import annotations

import itertools
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, gcd, lcm, sqrt
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np

from .affine import (
    DEFAULT_WORD_BOUND,
    AffineMap,
    AffineTier,
    TierError,
    classify,
    orbit_scaled,
)
from .linalg import (
    RMatrix,
    RVector,
    ShapeError,
    det,
    dot,
    format_rational,
    nullspace,
    parse_rational,
    rank,
    vector,
    vsub,
)


class DegeneratePolytopeError(ValueError):
    """The vertices do not span a full-dimensional polytope."""


class PresentationFormatError(ValueError):
    """A presentation document does not follow the JSON schema."""


@dataclass(frozen=True)
class Halfspace:
    """``normal . x <= offset`` (or ``<`` when the facet is open).

    Normals are outward and primitive integer vectors, which makes the facet
    list canonical and lets it be sorted deterministically.
    """

    normal: tuple[int, ...]
    offset: Fraction
    closed: bool = True

    def admits(self, x: Sequence) -> bool:
        v = sum(a * c for a, c in zip(self.normal, x))
        return v <= self.offset if self.closed else v < self.offset

    def on_boundary(self, x: Sequence) -> bool:
        return sum(a * c for a, c in zip(self.normal, x)) == self.offset


def _primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = lcm(*(Fraction(e).denominator for e in v))
    ints = [int(e * den) for e in v]
    g = 0
    for e in ints:
        g = gcd(g, e)
    return tuple(e // g for e in ints)


def _affine_rank(points: Sequence[RVector]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    return rank([vsub(p, base) for p in points[1:]])


def _is_axis_box(verts: Sequence[RVector]) -> tuple[RVector, RVector] | None:
    n = len(verts[0])
    lo = tuple(min(v[i] for v in verts) for i in range(n))
    hi = tuple(max(v[i] for v in verts) for i in range(n))
    if any(l == h for l, h in zip(lo, hi)):
        return None
    corners = set(itertools.product(*zip(lo, hi)))
    if len(verts) == 2 ** n and set(verts) == corners:
        return lo, hi
    return None


def _hull_facets(verts: Sequence[RVector]) -> list[tuple[tuple[int, ...], Fraction]]:
    n = len(verts[0])
    found = {}
    for combo in itertools.combinations(range(len(verts)), n):
        pts = [verts[i] for i in combo]
        diffs = [vsub(p, pts[0]) for p in pts[1:]]
        ker = nullspace(diffs, n)
        if len(ker) != 1:
            continue
        normal = _primitive(ker[0])
        offset = dot(normal, pts[0])
        vals = [dot(normal, v) for v in verts]
        if all(v <= offset for v in vals):
            pass
        elif all(v >= offset for v in vals):
            normal = tuple(-a for a in normal)
            offset = -offset
        else:
            continue
        found[(normal, offset)] = None
    return sorted(found)


class Polytope:
    """Full-dimensional convex polytope in V-representation.

    The H-representation is derived: outward primitive normals, sorted by
    ``(normal, offset)``. ``open_facets`` indexes into that sorted list.
    """

    def __init__(self, vertices: Iterable[Sequence], open_facets: Iterable[int] = ()):
        verts = []
        for v in vertices:
            v = vector(v)
            if v not in verts:
                verts.append(v)
        if not verts:
            raise DegeneratePolytopeError("polytope needs vertices")
        n = len(verts[0])
        if any(len(v) != n for v in verts):
            raise ShapeError("vertices of mixed dimension")
        if n == 0 or _affine_rank(verts) != n:
            raise DegeneratePolytopeError("vertices do not span a full-dimensional polytope")
        self.dim = n
        self.vertices: tuple[RVector, ...] = tuple(verts)
        box = _is_axis_box(verts)
        if box is not None:
            lo, hi = box
            raw = []
            for i in range(n):
                e = tuple(int(i == j) for j in range(n))
                raw.append((tuple(-c for c in e), -lo[i]))
                raw.append((e, hi[i]))
            raw.sort()
        else:
            raw = _hull_facets(verts)
        open_set = set(open_facets)
        if any(not 0 <= k < len(raw) for k in open_set):
            raise ValueError(f"open facet index out of range 0..{len(raw) - 1}")
        self.halfspaces: tuple[Halfspace, ...] = tuple(
            Halfspace(normal, offset, k not in open_set) for k, (normal, offset) in enumerate(raw)
        )
        self.open_facets: tuple[int, ...] = tuple(sorted(open_set))

    @classmethod
    def box(cls, lo: Sequence, hi: Sequence, half_open: bool = True) -> Polytope:
        """Axis box; with ``half_open`` the upper faces are excluded."""
        lo, hi = vector(lo), vector(hi)
        verts = list(itertools.product(*zip(lo, hi)))
        n = len(lo)
        # sorted facet order puts the n lower faces first, then the n upper ones
        return cls(verts, range(n, 2 * n) if half_open else ())

    @classmethod
    def simplex(cls, vertices: Iterable[Sequence]) -> Polytope:
        return cls(vertices)

    def contains(self, x: Sequence) -> bool:
        """Membership in the half-open polytope."""
        return all(h.admits(x) for h in self.halfspaces)

    def contains_closure(self, x: Sequence) -> bool:
        return all(dot(h.normal, x) <= h.offset for h in self.halfspaces)

    def contains_scaled(self, p: Sequence[int], denom: int) -> bool:
        """Membership of the point p/denom, using integer arithmetic."""
        for h in self.halfspaces:
            v = sum(a * c for a, c in zip(h.normal, p))
            bound = h.offset * denom
            if v > bound or (v == bound and not h.closed):
                return False
        return True

    def contains_scaled_many(self, pts: np.ndarray, denom: int) -> np.ndarray:
        """Row-wise membership of the points pts/denom (integer arrays)."""
        mask = np.ones(len(pts), dtype=bool)
        for h in self.halfspaces:
            # normal.p <= offset*denom, cleared of the offset's denominator
            lhs = (pts @ np.array(h.normal, dtype=pts.dtype)) * h.offset.denominator
            rhs = h.offset.numerator * denom
            mask &= (lhs <= rhs) if h.closed else (lhs < rhs)
        return mask

    def bounding_box(self) -> tuple[RVector, RVector]:
        lo = tuple(min(v[i] for v in self.vertices) for i in range(self.dim))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(self.dim))
        return lo, hi

    def facet_vertex_sets(self) -> list[frozenset[int]]:
        return [
            frozenset(i for i, v in enumerate(self.vertices) if h.on_boundary(v))
            for h in self.halfspaces
        ]

    def transformed(self, m: AffineMap) -> Polytope:
        """Image under an affine map; facet flags are not carried over."""
        return Polytope([m(v) for v in self.vertices])

    def triangulation(self) -> list[tuple[int, ...]]:
        """Pulling triangulation: cone from vertices[0] over the faces not containing it, recursively."""
        facets = self.facet_vertex_sets()
        verts = self.vertices

        @lru_cache(maxsize=None)
        def tri(face: frozenset, d: int) -> tuple[tuple[int, ...], ...]:
            if d == 0:
                return ((min(face),),)
            apex = min(face)
            subfaces = set()
            for f in facets:
                g = face & f
                if g != face and len(g) >= d and _affine_rank([verts[i] for i in sorted(g)]) == d - 1:
                    subfaces.add(g)
            out = []
            for g in sorted(subfaces, key=sorted):
                if apex in g:
                    continue
                out.extend((apex,) + s for s in tri(g, d - 1))
            return tuple(out)

        return list(tri(frozenset(range(len(verts))), self.dim))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polytope):
            return NotImplemented
        return self.vertices == other.vertices and self.halfspaces == other.halfspaces

    def __hash__(self) -> int:
        return hash((self.vertices, self.halfspaces))

    def __repr__(self) -> str:
        return f"Polytope(dim={self.dim}, vertices={len(self.vertices)}, open_facets={list(self.open_facets)})"


def volume(p: Polytope) -> Fraction:
    """Exact Lebesgue volume: sum of |det|/n! over a fan triangulation."""
    total = Fraction(0)
    v = p.vertices
    for simplex in p.triangulation():
        apex = v[simplex[0]]
        edges = RMatrix([vsub(v[i], apex) for i in simplex[1:]])
        total += abs(det(edges))
    return total / factorial(p.dim)


@dataclass(frozen=True)
class QuotientPresentation:
    dim: int
    generators: tuple[AffineMap, ...]
    domain: Polytope
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.domain.dim != self.dim:
            raise ShapeError(f"domain of dimension {self.domain.dim} in a {self.dim}-dimensional presentation")
        for g in self.generators:
            if g.dim != self.dim:
                raise ShapeError(f"generator of dimension {g.dim} in a {self.dim}-dimensional presentation")

    def tiers(self) -> list[AffineTier]:
        return [classify(g) for g in self.generators]

    def require_tier(self, tier: AffineTier = AffineTier.INTEGRAL_INTEGRAL_AFFINE) -> None:
        for i, t in enumerate(self.tiers()):
            if t < tier:
                raise TierError(f"generator {i}: tier: {t.label}, expected {tier.label}")

    @property
    def orientable(self) -> bool:
        return all(det(g.linear) > 0 for g in self.generators)


BUILTIN_NAMES = ("torus-<n>", "klein", "kodaira-thurston")


def builtin_presentation(name: str, scale: int = 1) -> QuotientPresentation:
    """The standard quotient examples with their translation step set to ``scale``.

    ``torus-n``: x_j -> x_j + scale for every j, domain [0, scale)^n.
    ``klein``: x_1 -> x_1 + scale and (x_1, x_2) -> (-x_1, x_2 + 1), domain [0, scale) x [0, 1).
    ``kodaira-thurston``: (x_1, x_2, x_3) -> (x_1 + x_2, x_2, x_3 + 1),
    x_1 -> x_1 + 1 and x_2 -> x_2 + scale, domain [0, 1) x [0, scale) x [0, 1).
    Only x_2 is scaled there: the commutator of the first two generators is
    x_1 -> x_1 + 1, so x_1 cannot take a coarser step.
    """
    if not isinstance(scale, int) or scale < 1:
        raise ValueError("scale must be a positive integer")
    s = scale
    if name.startswith("torus-"):
        try:
            n = int(name[len("torus-"):])
        except ValueError:
            raise ValueError(f"unknown builtin {name!r}") from None
        if n < 1:
            raise ValueError("torus dimension must be at least 1")
        gens = [AffineMap.translation_by([s if i == j else 0 for i in range(n)]) for j in range(n)]
        return QuotientPresentation(n, gens, Polytope.box([0] * n, [s] * n), f"{name} scale {s}")
    if name == "klein":
        gens = [
            AffineMap.translation_by([s, 0]),
            AffineMap.from_lists([[-1, 0], [0, 1]], [0, 1]),
        ]
        return QuotientPresentation(2, gens, Polytope.box([0, 0], [s, 1]), f"klein scale {s}")
    if name == "kodaira-thurston":
        gens = [
            AffineMap.from_lists([[1, 1, 0], [0, 1, 0], [0, 0, 1]], [0, 0, 1]),
            AffineMap.translation_by([1, 0, 0]),
            AffineMap.translation_by([0, s, 0]),
        ]
        return QuotientPresentation(3, gens, Polytope.box([0, 0, 0], [1, s, 1]), f"kodaira-thurston scale {s}")
    raise ValueError(f"unknown builtin {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")


@dataclass(frozen=True)
class LatticePointSet:
    """Canonical orbit representatives (lexicographically least in the domain)."""

    points: frozenset

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(sorted(self.points))

    def __contains__(self, x) -> bool:
        return vector(x) in self.points

    def sorted(self) -> list[RVector]:
        return sorted(self.points)


def canonical_representatives(q: QuotientPresentation, points: Iterable[Sequence], word_bound: int) -> LatticePointSet:
    """Collapse domain points lying in a common bounded orbit to one representative."""
    assigned: dict[RVector, RVector] = {}
    for p in sorted(vector(x) for x in points):
        if p in assigned:
            continue
        denom, orbit = orbit_scaled(q.generators, p, word_bound)
        inside = orbit[q.domain.contains_scaled_many(orbit, denom)]
        members = [tuple(Fraction(c, denom) for c in o) for o in inside.tolist()]
        rep = min(members)
        for m in members:
            assigned.setdefault(m, rep)
        assigned[p] = rep
    return LatticePointSet(frozenset(assigned.values()))


def grid_points(p: Polytope, denominator: int = 1) -> list[RVector]:
    """Points of (1/denominator) Z^n inside the half-open polytope."""
    lo, hi = p.bounding_box()
    ranges = []
    for l, h in zip(lo, hi):
        a = -((-l * denominator).__floor__())  # ceil
        b = (h * denominator).__floor__()
        ranges.append(range(a, b + 1))
    out = []
    for c in itertools.product(*ranges):
        if p.contains_scaled(c, denominator):
            out.append(tuple(Fraction(k, denominator) for k in c))
    return out


def integral_points(q: QuotientPresentation, word_bound: int = DEFAULT_WORD_BOUND) -> LatticePointSet:
    """Integral points of B: integer points of the domain, one per orbit."""
    q.require_tier(AffineTier.INTEGRAL_INTEGRAL_AFFINE)
    return canonical_representatives(q, grid_points(q.domain, 1), word_bound)


@dataclass
class TilingReport:
    samples: int
    word_bound: int
    failures: list = field(default_factory=list)  # (point, number of orbit members in the domain)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def double_covered(self) -> list:
        return [f for f in self.failures if f[1] > 1]

    @property
    def uncovered(self) -> list:
        return [f for f in self.failures if f[1] == 0]

    def summary(self) -> str:
        if self.ok:
            return f"tiling: {self.samples} samples, no failures"
        return (
            f"tiling: {len(self.failures)} of {self.samples} samples failed "
            f"({len(self.double_covered)} double coverage, {len(self.uncovered)} uncovered within word bound {self.word_bound})"
        )


SAMPLE_DENOMINATOR = 997


def validate_tiling(q: QuotientPresentation, samples: int = 256, word_bound: int = DEFAULT_WORD_BOUND, seed: int = 0) -> TilingReport:
    """Check that sampled orbits meet the half-open domain exactly once.

    Points are drawn on a fine rational grid in the box with the domain's
    bounding-box centre and twice its side lengths.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    q.require_tier(AffineTier.INTEGRAL_AFFINE)
    rng = random.Random(seed)
    lo, hi = q.domain.bounding_box()
    report = TilingReport(samples, word_bound)
    d = SAMPLE_DENOMINATOR
    for _ in range(samples):
        x = []
        for l, h in zip(lo, hi):
            width = h - l
            a = ((l - width / 2) * d).__floor__()
            b = ((h + width / 2) * d).__ceil__()
            x.append(Fraction(rng.randrange(a, b), d))
        denom, orbit = orbit_scaled(q.generators, x, word_bound)
        hits = int(q.domain.contains_scaled_many(orbit, denom).sum())
        if hits != 1:
            report.failures.append((tuple(x), hits))
    return report


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    low: float
    high: float
    hits: int
    samples: int

    def contains(self, value) -> bool:
        return self.low <= float(value) <= self.high


_Z99 = NormalDist().inv_cdf(0.995)


def _wilson(hits: int, n: int, z: float) -> tuple[float, float]:
    p = hits / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z / denom * sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    low = 0.0 if hits == 0 else max(0.0, centre - half)
    high = 1.0 if hits == n else min(1.0, centre + half)
    return low, high


def monte_carlo_volume(
    p: Polytope, samples: int = 10**6, seed: int = 0, threads: int = 1, chunk_size: int = 1 << 17
) -> MonteCarloEstimate:
    """Hit-or-miss volume over the bounding box with a 99% Wilson interval.

    Chunk k draws from a generator seeded with (seed, k), so the result does
    not depend on ``threads``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    lo, hi = p.bounding_box()
    lo_f = np.array([float(v) for v in lo])
    hi_f = np.array([float(v) for v in hi])
    normals = np.array([h.normal for h in p.halfspaces], dtype=float)
    offsets = np.array([float(h.offset) for h in p.halfspaces])
    box_vol = float(np.prod(hi_f - lo_f))
    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)

    def run(k: int) -> int:
        rng = np.random.default_rng([seed, k])
        pts = lo_f + (hi_f - lo_f) * rng.random((sizes[k], p.dim))
        return int(np.all(pts @ normals.T <= offsets, axis=1).sum())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(run, range(len(sizes))))
    else:
        hits = sum(run(k) for k in range(len(sizes)))
    a, b = _wilson(hits, samples, _Z99)
    return MonteCarloEstimate(box_vol * hits / samples, box_vol * a, box_vol * b, hits, samples)


def _matrix_to_json(rows) -> list:
    return [[format_rational(e) for e in row] for row in rows]


def presentation_to_dict(q: QuotientPresentation) -> dict:
    return {
        "dim": q.dim,
        "label": q.label,
        "generators": [
            {"A": _matrix_to_json(g.linear.tolist()), "b": [format_rational(e) for e in g.translation]}
            for g in q.generators
        ],
        "domain": {
            "vertices": _matrix_to_json(q.domain.vertices),
            "open_facets": list(q.domain.open_facets),
        },
    }


def presentation_from_dict(doc: dict) -> QuotientPresentation:
    try:
        n = doc["dim"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise PresentationFormatError("dim must be a positive integer")
        gens = []
        for g in doc.get("generators", []):
            A = [[parse_rational(e) for e in row] for row in g["A"]]
            b = [parse_rational(e) for e in g["b"]]
            gens.append(AffineMap(RMatrix(A), vector(b)))
        dom = doc["domain"]
        verts = [[parse_rational(e) for e in v] for v in dom["vertices"]]
        poly = Polytope(verts, dom.get("open_facets", []))
        return QuotientPresentation(n, gens, poly, str(doc.get("label", "")))
    except PresentationFormatError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise PresentationFormatError(f"invalid presentation: {exc}") from exc


def dumps_presentation(q: QuotientPresentation) -> str:
    return json.dumps(presentation_to_dict(q), indent=2)


def loads_presentation(text: str) -> QuotientPresentation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PresentationFormatError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise PresentationFormatError("presentation must be a JSON object")
    return presentation_from_dict(doc)


def load_presentation(path) -> QuotientPresentation:
    with open(path) as fh:
        return loads_presentation(fh.read())
