"""Exact differential forms on products of open domains and tori.

Coordinates are numbered base first, then fibre. A coefficient term is

    amp * tau**p * prod(z_j ** a_j) * exp(2*pi*i * <k, z>)

with ``amp`` a Gaussian rational and ``tau`` the formal symbol standing for
2*pi*i (transcendental, so comparing tau-polynomials coefficientwise is
faithful). Polynomial factors are only allowed in non-periodic coordinates;
Fourier modes are allowed anywhere.

Text grammar (exact round trip via :func:`format_form` / :func:`parse_form`)::

    form    := "0" | term (" + " term)*
    term    := factors [" " leg ("^" leg)*]
    factors := factor ("*" factor)*
    factor  := rational | "(" rational ("+"|"-") rational "i)" | "tau" ["^" int]
             | var ["^" int] | "e(" ints "|" ints ")"
    leg     := "d" var
    var     := "x" index | "t" index | "y" index        (1-based)

``e(k_base|k_fibre)`` lists every frequency. A term with no legs is a 0-form.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .linalg import RMatrix, inverse


class FormError(ValueError):
    pass


class AmbientMismatchError(FormError):
    pass


class PreconditionError(FormError):
    pass


# --- Gaussian rationals -----------------------------------------------------


class GQ:
    """Exact Gaussian rational re + im*i."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def of(cls, value) -> GQ:
        if isinstance(value, GQ):
            return value
        if isinstance(value, complex):
            raise TypeError("complex floats are not exact")
        return cls(value)

    def __add__(self, other):
        o = GQ.of(other)
        return GQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GQ.of(other)
        return GQ(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return GQ(-self.re, -self.im)

    def __mul__(self, other):
        o = GQ.of(other)
        return GQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self) -> GQ:
        return GQ(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if not isinstance(other, GQ):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"GQ({self.re}, {self.im})"


I_UNIT = GQ(0, 1)


def root_of_unity(phase: Fraction) -> GQ:
    """exp(2*pi*i*phase) when it is a Gaussian rational (phase in Z/4)."""
    q = Fraction(phase) * 4
    if q.denominator != 1:
        raise FormError(f"exp(2 pi i * {phase}) is not a Gaussian rational")
    return (GQ(1), GQ(0, 1), GQ(-1), GQ(0, -1))[q.numerator % 4]


# --- ambients ---------------------------------------------------------------


@dataclass(frozen=True)
class Ambient:
    """``n_base`` base coordinates (periodic or not) times ``n_fibre`` angles."""

    n_base: int
    n_fibre: int
    base_periodic: bool = False
    fibre_symbol: str = "t"

    @property
    def n(self) -> int:
        return self.n_base + self.n_fibre

    def periodic(self, j: int) -> bool:
        return j >= self.n_base or self.base_periodic

    def name(self, j: int) -> str:
        if j < self.n_base:
            return f"x{j + 1}"
        return f"{self.fibre_symbol}{j - self.n_base + 1}"

    @property
    def fibre(self) -> tuple[int, ...]:
        return tuple(range(self.n_base, self.n))

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(range(self.n_base))

    def base_ambient(self) -> Ambient:
        return Ambient(self.n_base, 0, self.base_periodic, self.fibre_symbol)


def chart(n: int) -> Ambient:
    """Omega x T^n with coordinates (x, t)."""
    return Ambient(n, n, False, "t")


def dual_torus_bundle(n: int) -> Ambient:
    """T^n x T^n with coordinates (x, y), the torus bundle over B = R^n/Z^n."""
    return Ambient(n, n, True, "y")


def base_torus(n: int) -> Ambient:
    return Ambient(n, 0, True, "y")


POINT = Ambient(0, 0, True, "y")


# --- forms ------------------------------------------------------------------

# key: (legs, poly exponents, frequencies, tau power)
Key = tuple


def merge_legs(a: Sequence[int], b: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign and sorted legs of dz_a ^ dz_b; sign 0 when a leg repeats."""
    if set(a) & set(b):
        return 0, ()
    seq = list(a) + list(b)
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return (-1) ** inversions, tuple(sorted(seq))


class Form:
    """Finite sum of coefficient terms times sorted coordinate differentials."""

    __slots__ = ("ambient", "terms")

    def __init__(self, ambient: Ambient, terms: Mapping[Key, object] | None = None):
        self.ambient = ambient
        clean = {}
        for key, amp in (terms or {}).items():
            amp = GQ.of(amp)
            if amp:
                self._check_key(key)
                clean[key] = amp
        self.terms: dict[Key, GQ] = clean

    def _check_key(self, key: Key) -> None:
        legs, poly, freq, _ = key
        amb = self.ambient
        if len(poly) != amb.n or len(freq) != amb.n:
            raise FormError("term arity does not match ambient")
        if list(legs) != sorted(set(legs)) or any(not 0 <= j < amb.n for j in legs):
            raise FormError(f"legs {legs} are not strictly increasing coordinate indices")
        for j in range(amb.n):
            if poly[j] and amb.periodic(j):
                raise FormError(f"polynomial dependence on periodic coordinate {amb.name(j)}")
            if poly[j] < 0:
                raise FormError("negative exponent")

    # construction helpers
    @classmethod
    def zero(cls, ambient: Ambient) -> Form:
        return cls(ambient)

    @classmethod
    def term(cls, ambient: Ambient, amp=1, legs: Iterable[int] = (), poly: Mapping[int, int] | None = None,
             freq: Mapping[int, int] | Sequence[int] | None = None, tau: int = 0) -> Form:
        n = ambient.n
        p = [0] * n
        for j, e in (poly or {}).items():
            p[j] = e
        if freq is None:
            f = [0] * n
        elif isinstance(freq, Mapping):
            f = [0] * n
            for j, k in freq.items():
                f[j] = k
        else:
            f = list(freq)
        legs = list(legs)
        if len(set(legs)) != len(legs):
            return cls(ambient)
        sign, sorted_legs = merge_legs(legs, [])
        return cls(ambient, {(sorted_legs, tuple(p), tuple(f), tau): GQ.of(amp) * sign})

    @classmethod
    def constant(cls, ambient: Ambient, value=1) -> Form:
        return cls.term(ambient, value)

    @classmethod
    def dz(cls, ambient: Ambient, *legs: int) -> Form:
        return cls.term(ambient, 1, legs)

    # algebra
    def _same(self, other: Form) -> None:
        if not isinstance(other, Form):
            raise TypeError("expected a Form")
        if other.ambient != self.ambient:
            raise AmbientMismatchError(f"{self.ambient} vs {other.ambient}")

    def __add__(self, other: Form) -> Form:
        self._same(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, GQ()) + v
        return Form(self.ambient, out)

    def __neg__(self) -> Form:
        return Form(self.ambient, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: Form) -> Form:
        return self + (-other)

    def scale(self, c) -> Form:
        c = GQ.of(c)
        return Form(self.ambient, {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, c) -> Form:
        return self.scale(c)

    def __xor__(self, other: Form) -> Form:
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.ambient == other.ambient and self.terms == other.terms

    def __hash__(self):
        return hash((self.ambient, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degrees(self) -> set[int]:
        return {len(k[0]) for k in self.terms}

    @property
    def degree(self) -> int | None:
        degs = self.degrees
        if len(degs) > 1:
            raise FormError("inhomogeneous form")
        return next(iter(degs)) if degs else None

    def is_invariant(self) -> bool:
        return average(self) == self

    def is_closed(self) -> bool:
        return d(self).is_zero()

    def is_real(self) -> bool:
        """Conjugate symmetry: conj(amp_k) = amp_{-k}, with conj(tau) = -tau."""
        for (legs, poly, freq, tau), amp in self.terms.items():
            mirror = (legs, poly, tuple(-f for f in freq), tau)
            if self.terms.get(mirror, GQ()) != amp.conj() * (-1) ** tau:
                return False
        return True

    def to_number(self):
        """Value of a tau-free scalar (0-form on the point)."""
        if self.ambient.n:
            raise FormError("not a scalar")
        if any(k[3] for k in self.terms):
            raise FormError("scalar involves 2*pi*i")
        amp = self.terms.get(((), (), (), 0), GQ())
        return amp.re if amp.im == 0 else amp

    def __str__(self) -> str:
        return format_form(self)

    def __repr__(self) -> str:
        return f"Form({format_form(self)!r})"


def _mul_keys(k1: Key, k2: Key) -> tuple[int, Key] | None:
    sign, legs = merge_legs(k1[0], k2[0])
    if not sign:
        return None
    poly = tuple(a + b for a, b in zip(k1[1], k2[1]))
    freq = tuple(a + b for a, b in zip(k1[2], k2[2]))
    return sign, (legs, poly, freq, k1[3] + k2[3])


def wedge(f: Form, g: Form) -> Form:
    f._same(g)
    out: dict[Key, GQ] = {}
    for k1, a1 in f.terms.items():
        for k2, a2 in g.terms.items():
            r = _mul_keys(k1, k2)
            if r is None:
                continue
            sign, key = r
            out[key] = out.get(key, GQ()) + a1 * a2 * sign
    return Form(f.ambient, out)


def d(f: Form) -> Form:
    """Exterior derivative, term by term."""
    out: dict[Key, GQ] = {}
    amb = f.ambient
    for (legs, poly, freq, tau), amp in f.terms.items():
        for j in range(amb.n):
            pieces = []
            if poly[j]:
                p = list(poly)
                p[j] -= 1
                pieces.append(((tuple(p), freq, tau), amp * poly[j]))
            if freq[j]:
                pieces.append(((poly, freq, tau + 1), amp * freq[j]))
            if not pieces:
                continue
            sign, new_legs = merge_legs((j,), legs)
            if not sign:
                continue
            for (p, fr, ta), a in pieces:
                key = (new_legs, p, fr, ta)
                out[key] = out.get(key, GQ()) + a * sign
    return Form(amb, out)


def average(f: Form) -> Form:
    """Average over translations of the fibre torus: keep fibre-frequency-0 terms."""
    fib = f.ambient.fibre
    return Form(f.ambient, {k: v for k, v in f.terms.items() if not any(k[2][j] for j in fib)})


def integrate_fibre(f: Form) -> Form:
    """Integrate over the whole fibre torus, oriented after the base."""
    amb = f.ambient
    fib = set(amb.fibre)
    nb = amb.n_base
    out: dict[Key, GQ] = {}
    for (legs, poly, freq, tau), amp in f.terms.items():
        if not fib <= set(legs) or any(freq[j] for j in fib):
            continue
        key = (tuple(j for j in legs if j < nb), poly[:nb], freq[:nb], tau)
        out[key] = out.get(key, GQ()) + amp
    return Form(amb.base_ambient(), out)


def dy_n(n: int, ambient: Ambient | None = None) -> Form:
    """The top fibre form dy_1 ^ ... ^ dy_n."""
    if n < 1:
        raise ValueError("n must be positive")
    amb = ambient or dual_torus_bundle(n)
    if amb.n_fibre != n:
        raise AmbientMismatchError("ambient fibre dimension differs from n")
    return Form.dz(amb, *amb.fibre)


def symplectic_form(n: int, ambient: Ambient | None = None) -> Form:
    """sum_j dx_j ^ dt_j."""
    amb = ambient or chart(n)
    out = Form.zero(amb)
    for j in range(n):
        out = out + Form.dz(amb, j, amb.n_base + j)
    return out


def connection_form(n: int) -> Form:
    """-sum_j x_j dt_j, the 1-form of the connection d - 2 pi i sum x_j dt_j."""
    amb = chart(n)
    out = Form.zero(amb)
    for j in range(n):
        out = out + Form.term(amb, -1, [n + j], poly={j: 1})
    return out


# --- pullbacks --------------------------------------------------------------


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def pullback_affine(f: Form, target: Ambient, M: Sequence[Sequence], w: Sequence | None = None) -> Form:
    """Pull back along z = M u + w, where z are the coordinates of ``f.ambient``
    and u those of ``target`` (M has one row per source coordinate)."""
    src = f.ambient
    M = [[Fraction(e) for e in row] for row in M]
    w = [Fraction(e) for e in (w if w is not None else [0] * src.n)]
    if len(M) != src.n or any(len(row) != target.n for row in M) or len(w) != src.n:
        raise AmbientMismatchError("substitution matrix does not match the ambients")
    nt = target.n
    zero_e = (0,) * nt
    linear = []
    for s in range(src.n):
        poly = {zero_e: w[s]} if w[s] else {}
        for t in range(nt):
            if M[s][t]:
                e = [0] * nt
                e[t] = 1
                poly[tuple(e)] = M[s][t]
        linear.append(poly)

    out: dict[Key, GQ] = {}
    for (legs, poly, freq, tau), amp in f.terms.items():
        diff = {(): Fraction(1)}
        for s in legs:
            nxt: dict = {}
            for L, c in diff.items():
                for t in range(nt):
                    if not M[s][t] or t in L:
                        continue
                    sign = (-1) ** sum(1 for x in L if x > t)
                    key = tuple(sorted(L + (t,)))
                    nxt[key] = nxt.get(key, 0) + c * M[s][t] * sign
            diff = {k: v for k, v in nxt.items() if v}
        if not diff:
            continue
        new_freq = []
        for t in range(nt):
            v = sum((freq[s] * M[s][t] for s in range(src.n)), Fraction(0))
            if v.denominator != 1:
                raise FormError("pulled-back Fourier mode is not integral")
            new_freq.append(int(v))
        phase = root_of_unity(sum((freq[s] * w[s] for s in range(src.n)), Fraction(0)))
        coeff = {zero_e: Fraction(1)}
        for s in range(src.n):
            for _ in range(poly[s]):
                coeff = _poly_mul(coeff, linear[s])
        for e, c in coeff.items():
            if any(e[t] and target.periodic(t) for t in range(nt)):
                raise FormError("pullback creates polynomial dependence on a periodic coordinate")
            for L, dc in diff.items():
                key = (L, e, tuple(new_freq), tau)
                out[key] = out.get(key, GQ()) + amp * phase * (c * dc)
    return Form(target, out)


def pullback_section(alpha: Form, S: RMatrix | Sequence[Sequence], n: int | None = None,
                     v: Sequence | None = None) -> Form:
    """Pull back along the section x -> (x, S x + v) to the base."""
    amb = alpha.ambient
    n = amb.n_base if n is None else n
    if amb.n_base != n or amb.n_fibre != n:
        raise AmbientMismatchError("section pullback needs an n + n ambient")
    S = S.tolist() if isinstance(S, RMatrix) else [list(r) for r in S]
    M = [[int(i == j) for j in range(n)] for i in range(n)] + [list(r) for r in S]
    w = [0] * n + list(v if v is not None else [0] * n)
    return pullback_affine(alpha, amb.base_ambient(), M, w)


def pullback_fibre_linear(alpha: Form, A: RMatrix) -> Form:
    """Pull back along (x, y) -> (x, A y)."""
    amb = alpha.ambient
    nb, nf = amb.n_base, amb.n_fibre
    M = [[int(i == j) for j in range(amb.n)] for i in range(nb)]
    for i in range(nf):
        M.append([0] * nb + list(A.row(i)))
    return pullback_affine(alpha, amb, M)


def _transition_matrix(tr) -> tuple[list[list[Fraction]], list[Fraction]]:
    n = tr.A.rows
    a_inv_t = inverse(tr.A).T
    M = [list(tr.A.row(i)) + [Fraction(0)] * n for i in range(n)]
    M += [list(tr.G.row(i)) + list(a_inv_t.row(i)) for i in range(n)]
    return M, list(tr.b) + list(tr.c)


def transition_pullback(alpha: Form, tr) -> Form:
    """Pull back a form on the target chart along (x, t) -> (Ax + b, A^{-T} t + Gx + c)."""
    M, w = _transition_matrix(tr)
    return pullback_affine(alpha, alpha.ambient, M, w)


def transition_pullback_symplectic(tr) -> Form:
    """Pullback of sum dx'_j ^ dt'_j along a chart transition."""
    n = tr.A.rows
    return transition_pullback(symplectic_form(n), tr)


def transition_preserves_torus(tr) -> bool:
    """Whether the angle characters exp(2 pi i t'_j) pull back to characters,
    in both directions, i.e. the map descends to the torus factor.

    Only the angle-to-angle block matters: the shear G and the translations
    contribute modes and constant phases in the non-periodic base, which are
    always allowed, so they are dropped before pulling back.
    """
    n = tr.A.rows
    amb = chart(n)
    M, _ = _transition_matrix(tr)
    inv = inverse(RMatrix(M)).tolist()
    try:
        for rows in (M, inv):
            fibre_only = [row if i < n else [Fraction(0)] * n + row[n:] for i, row in enumerate(rows)]
            for j in range(n):
                pullback_affine(Form.term(amb, 1, freq={n + j: 1}), amb, fibre_only)
    except FormError:
        return False
    return True


# --- integration ------------------------------------------------------------


@dataclass(frozen=True)
class Cycle:
    """Coordinate subtorus: ``indices`` run over [0, 1], the rest sit at ``basepoint``."""

    indices: tuple[int, ...]
    basepoint: tuple[Fraction, ...]

    @property
    def dim(self) -> int:
        return len(self.indices)


def _scalar(out: dict) -> Form:
    return Form(POINT, {((), (), (), tau): amp for tau, amp in out.items()})


def period(f: Form, cycle: Cycle) -> Form:
    """Integral of ``f`` over a coordinate subtorus, as an exact scalar."""
    amb = f.ambient
    idx = tuple(sorted(cycle.indices))
    if any(not amb.periodic(j) for j in idx):
        raise FormError("cycles run along periodic coordinates only")
    if len(cycle.basepoint) != amb.n:
        raise FormError("basepoint has the wrong length")
    out: dict[int, GQ] = {}
    for (legs, poly, freq, tau), amp in f.terms.items():
        if legs != idx or any(freq[j] for j in idx):
            continue
        value = amp
        phase = Fraction(0)
        for j in range(amb.n):
            if j in idx:
                continue
            value = value * Fraction(cycle.basepoint[j]) ** poly[j]
            phase += freq[j] * Fraction(cycle.basepoint[j])
        value = value * root_of_unity(phase)
        out[tau] = out.get(tau, GQ()) + value
    return _scalar(out)


def integrate(f: Form, box: Sequence[tuple] | None = None) -> Form:
    """Integral of the top-degree part over the ambient (oriented by coordinate
    order). Non-periodic coordinates need bounds from ``box``."""
    amb = f.ambient
    top = tuple(range(amb.n))
    out: dict[int, GQ] = {}
    for (legs, poly, freq, tau), amp in f.terms.items():
        if legs != top or any(freq):
            continue
        value = amp
        for j in range(amb.n):
            if amb.periodic(j):
                continue
            if box is None:
                raise FormError(f"integration over {amb.name(j)} needs bounds")
            lo, hi = (Fraction(e) for e in box[j])
            p = poly[j]
            value = value * ((hi ** (p + 1) - lo ** (p + 1)) / (p + 1))
        out[tau] = out.get(tau, GQ()) + value
    return _scalar(out)


def coordinate_cycles(amb: Ambient, k: int, basepoint: Sequence | None = None) -> list[Cycle]:
    per = [j for j in range(amb.n) if amb.periodic(j)]
    bp = tuple(Fraction(e) for e in (basepoint if basepoint is not None else [0] * amb.n))
    return [Cycle(c, bp) for c in combinations(per, k)]


def periods_agree(alpha: Form, beta: Form, basepoints: Iterable[Sequence]) -> bool:
    """Equal periods over every coordinate subtorus of alpha's degree."""
    k = alpha.degree
    if k is None:
        k = beta.degree or 0
    for bp in basepoints:
        for cyc in coordinate_cycles(alpha.ambient, k, bp):
            if period(alpha, cyc) != period(beta, cyc):
                return False
    return True


@dataclass(frozen=True)
class PairingResult:
    lhs: Form
    rhs: Form

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.equal))


def poincare_pairing_check(alpha: Form, n: int) -> PairingResult:
    """Integral of alpha over the zero section against the integral of alpha ^ dy_n."""
    amb = dual_torus_bundle(n)
    if alpha.ambient != amb:
        raise AmbientMismatchError("alpha must live on T^n x T^n")
    if not alpha.is_closed():
        raise PreconditionError("alpha is not closed")
    if not alpha.is_invariant():
        raise PreconditionError("alpha is not invariant; average it first")
    zero = [[0] * n for _ in range(n)]
    lhs = integrate(pullback_section(alpha, zero, n))
    rhs = integrate(wedge(alpha, dy_n(n, amb)))
    return PairingResult(lhs, rhs)


# --- text format ------------------------------------------------------------


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_amp(a: GQ) -> str:
    if a.im == 0:
        return _fmt_q(a.re)
    sign = "+" if a.im >= 0 else "-"
    return f"({_fmt_q(a.re)}{sign}{_fmt_q(abs(a.im))}i)"


def _fmt_term(amb: Ambient, key: Key, amp: GQ) -> str:
    legs, poly, freq, tau = key
    factors = []
    if tau:
        factors.append("tau" if tau == 1 else f"tau^{tau}")
    for j, e in enumerate(poly):
        if e:
            factors.append(amb.name(j) if e == 1 else f"{amb.name(j)}^{e}")
    if any(freq):
        nb = amb.n_base
        factors.append("e(" + ",".join(map(str, freq[:nb])) + "|" + ",".join(map(str, freq[nb:])) + ")")
    if amp != 1 or not factors:
        factors.insert(0, _fmt_amp(amp))
    text = "*".join(factors)
    if legs:
        text += " " + "^".join("d" + amb.name(j) for j in legs)
    return text


def format_form(f: Form) -> str:
    if not f.terms:
        return "0"
    return " + ".join(_fmt_term(f.ambient, k, f.terms[k]) for k in sorted(f.terms))


_RAT = r"-?\d+(?:/\d+)?"
_COMPLEX_RE = re.compile(rf"^\(({_RAT})([+-])(\d+(?:/\d+)?)i\)$")
_RAT_RE = re.compile(rf"^{_RAT}$")
_POW_RE = re.compile(r"^([a-z]+)(\d*)(?:\^(\d+))?$")
_EXP_RE = re.compile(r"^e\(([-\d,]*)\|([-\d,]*)\)$")


def _var_index(amb: Ambient, letter: str, num: str) -> int:
    if not num:
        raise FormError(f"variable {letter!r} needs an index")
    k = int(num) - 1
    if letter == "x" and 0 <= k < amb.n_base:
        return k
    if letter == amb.fibre_symbol and 0 <= k < amb.n_fibre:
        return amb.n_base + k
    raise FormError(f"unknown variable {letter}{num}")


def _split_terms(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and text.startswith(" + ", i):
            parts.append("".join(cur))
            cur = []
            i += 3
            continue
        cur.append(ch)
        i += 1
    parts.append("".join(cur))
    return parts


def parse_form(text: str, ambient: Ambient) -> Form:
    text = text.strip()
    if text == "0":
        return Form.zero(ambient)
    total: dict[Key, GQ] = {}
    n = ambient.n
    for chunk in _split_terms(text):
        chunk = chunk.strip()
        if " " in chunk:
            coeff_text, legs_text = chunk.split(" ", 1)
        elif chunk.startswith("d") and not chunk.startswith("d("):
            coeff_text, legs_text = "", chunk
        else:
            coeff_text, legs_text = chunk, ""
        amp = GQ(1)
        poly = [0] * n
        freq = [0] * n
        tau = 0
        for fac in filter(None, coeff_text.split("*")):
            if _RAT_RE.match(fac):
                amp = amp * Fraction(fac)
                continue
            m = _COMPLEX_RE.match(fac)
            if m:
                im = Fraction(m.group(3)) * (1 if m.group(2) == "+" else -1)
                amp = amp * GQ(Fraction(m.group(1)), im)
                continue
            m = _EXP_RE.match(fac)
            if m:
                ks = [int(v) for part in m.groups() for v in part.split(",") if v != ""]
                if len(ks) != n or len([v for v in m.group(1).split(",") if v]) != ambient.n_base:
                    raise FormError(f"frequency vector {fac!r} has the wrong length")
                freq = [a + b for a, b in zip(freq, ks)]
                continue
            m = _POW_RE.match(fac)
            if m:
                name, num, power = m.groups()
                power = int(power) if power else 1
                if name == "tau" and not num:
                    tau += power
                    continue
                poly[_var_index(ambient, name, num)] += power
                continue
            raise FormError(f"cannot parse factor {fac!r}")
        legs = []
        for leg in filter(None, legs_text.split("^")):
            m = re.match(r"^d([a-z])(\d+)$", leg)
            if not m:
                raise FormError(f"cannot parse differential {leg!r}")
            legs.append(_var_index(ambient, *m.groups()))
        piece = Form.term(ambient, amp, legs, dict(enumerate(poly)), freq, tau)
        for k, v in piece.terms.items():
            total[k] = total.get(k, GQ()) + v
    return Form(ambient, total)


# --- random forms -----------------------------------------------------------


def _random_amp(rng: random.Random) -> GQ:
    re_ = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    im = Fraction(rng.randint(-3, 3), rng.randint(1, 3)) if rng.random() < 0.5 else Fraction(0)
    if not re_ and not im:
        re_ = Fraction(1)
    return GQ(re_, im)


def random_form(amb: Ambient, degree: int, rng: random.Random, max_terms: int = 6,
                max_poly_degree: int = 2, max_freq: int = 2, base_modes: bool | None = None) -> Form:
    """Random k-form: polynomial degree <= 2 in free coordinates, modes in
    [-2, 2] on angle coordinates, at most six terms."""
    if base_modes is None:
        base_modes = amb.base_periodic
    out = Form.zero(amb)
    if degree > amb.n or degree < 0:
        return out
    free = [j for j in range(amb.n) if not amb.periodic(j)]
    moded = [j for j in range(amb.n) if j >= amb.n_base or base_modes]
    for _ in range(rng.randint(1, max_terms)):
        legs = sorted(rng.sample(range(amb.n), degree))
        poly = {}
        for _ in range(rng.randint(0, max_poly_degree)):
            if free:
                j = rng.choice(free)
                poly[j] = poly.get(j, 0) + 1
        freq = {j: rng.randint(-max_freq, max_freq) for j in moded if rng.random() < 0.5}
        out = out + Form.term(amb, _random_amp(rng), legs, poly, freq)
    return out


def random_closed_form(amb: Ambient, degree: int, rng: random.Random) -> Form:
    """d(random) plus random constant-coefficient forms (closed and invariant)."""
    out = d(random_form(amb, degree - 1, rng)) if degree >= 1 else Form.zero(amb)
    for legs in combinations(range(amb.n), degree):
        if rng.random() < 0.4:
            out = out + Form.term(amb, _random_amp(rng), legs)
    return out
