"""Seeded property suites for the symbolic forms layer."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import forms as F


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _basepoints(amb: F.Ambient, rng: random.Random, count: int = 2) -> list[tuple]:
    out = [tuple([0] * amb.n)]
    for _ in range(count - 1):
        out.append(tuple(Fraction(rng.choice([0, 1, 2, 3]), 4) if amb.periodic(j)
                         else Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for j in range(amb.n)))
    return out


def run_forms_suites(n_max: int = 3, seed: int = 0, random_forms: int = 500, closed_forms: int = 100,
                     stop_early: bool = True) -> list[SuiteResult]:
    """d o d = 0, averaging commutes with d, Leibniz, idempotent averaging,
    period preservation under averaging, and the zero-section pairing."""
    rng = random.Random(seed)
    dims = list(range(1, n_max + 1))
    ambients = [amb for n in dims for amb in (F.chart(n), F.dual_torus_bundle(n))]
    dd = SuiteResult("d(d(f)) = 0")
    avd = SuiteResult("average(d(f)) = d(average(f))")
    idem = SuiteResult("average is idempotent")
    leib = SuiteResult("d(f^g) = df^g + (-1)^deg f f^dg")
    per = SuiteResult("periods of closed forms survive averaging")
    pd = SuiteResult("integral over zero section = integral of alpha ^ dy^n")
    suites = [dd, avd, idem, leib, per, pd]

    def fail(s: SuiteResult, f: F.Form) -> bool:
        s.failures.append(f"[{f.ambient.n_base}+{f.ambient.n_fibre}] {F.format_form(f)}")
        return stop_early

    for i in range(random_forms):
        amb = ambients[i % len(ambients)]
        f = F.random_form(amb, rng.randint(0, amb.n), rng)
        dd.cases += 1
        if not F.d(F.d(f)).is_zero() and fail(dd, f):
            break
        avd.cases += 1
        if F.average(F.d(f)) != F.d(F.average(f)) and fail(avd, f):
            break
        idem.cases += 1
        a = F.average(f)
        if (F.average(a) != a or not a.is_invariant()) and fail(idem, f):
            break
        g = F.random_form(amb, rng.randint(0, amb.n), rng)
        k = f.degree or 0
        leib.cases += 1
        lhs = F.d(F.wedge(f, g))
        rhs = F.wedge(F.d(f), g) + F.wedge(f, F.d(g)).scale((-1) ** k)
        if lhs != rhs and fail(leib, f):
            break

    for i in range(closed_forms):
        n = dims[i % len(dims)]
        amb = F.dual_torus_bundle(n) if i % 2 == 0 else F.chart(n)
        k = rng.randint(1, amb.n) if amb.base_periodic else rng.randint(1, n)
        alpha = F.random_closed_form(amb, k, rng)
        per.cases += 1
        if not alpha.is_closed() or not F.periods_agree(alpha, F.average(alpha), _basepoints(amb, rng)):
            if fail(per, alpha):
                break

        tor = F.dual_torus_bundle(n)
        beta = F.average(F.random_closed_form(tor, n, rng))
        pd.cases += 1
        if not F.poincare_pairing_check(beta, n).equal and fail(pd, beta):
            break
    return suites
