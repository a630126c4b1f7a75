"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line. Run with ``pytest tests/test_acceptance.py -v``
or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import random
import sys
import time
from fractions import Fraction

import pytest

from iiaffine import cli
from iiaffine import forms as F
from iiaffine.affine import AffineMap
from iiaffine.almodels import (
    ALTransition,
    EnhancedALModel,
    FibreLoop,
    bohr_sommerfeld_set,
    bs_flip_witness,
    bs_status,
    holonomy,
    holonomy_numeric,
    is_enhanced_isomorphism,
    is_symplectomorphism,
    random_transition,
)
from iiaffine.dualbundle import AFFINE_LATTICE, ZERO_SECTION, TorusBundleChart, intersection_number
from iiaffine.linalg import is_integral
from iiaffine.quotient import (
    Polytope,
    QuotientPresentation,
    builtin_presentation,
    dumps_presentation,
    integral_points,
    monte_carlo_volume,
    validate_tiling,
    volume,
)
from iiaffine.riemann_roch import riemann_roch_number
from iiaffine.selftest import run_forms_suites

BUILTINS = ["torus-1", "torus-2", "torus-3", "klein", "kodaira-thurston"]
ORIENTABLE = [b for b in BUILTINS if b != "klein"]
SCALES = [1, 2, 3, 4]


def expected_count(name: str, k: int) -> int:
    return k ** int(name.split("-")[1]) if name.startswith("torus") else k


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line past pytest's output capture."""

    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}: {detail}")

    return emit


def test_criterion_1_volume_equals_integral_points(report):
    t0 = time.perf_counter()
    bad = []
    for name in BUILTINS:
        for k in SCALES:
            q = builtin_presentation(name, k)
            vol, count = volume(q.domain), len(integral_points(q))
            if not (vol == count == expected_count(name, k)):
                bad.append((name, k, vol, count))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 10
    report(1, "vol(B) = |B_Z|", ok, f"{len(BUILTINS) * len(SCALES)} cases, {len(bad)} mismatches, {elapsed:.2f}s (< 10s)")
    assert not bad
    assert elapsed < 10


def test_criterion_2_riemann_roch_equals_bohr_sommerfeld_count(report):
    t0 = time.perf_counter()
    bad = []
    for name in BUILTINS:
        for k in SCALES:
            q = builtin_presentation(name, k)
            bs = bohr_sommerfeld_set(q)
            bz = integral_points(q)
            if riemann_roch_number(q) != len(bs) or bs.points != bz.points:
                bad.append((name, k))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 10
    report(2, "RR = |BS| and BS = B_Z", ok, f"{len(BUILTINS) * len(SCALES)} cases, {len(bad)} mismatches, {elapsed:.2f}s (< 10s)")
    assert not bad
    assert elapsed < 10


def test_criterion_3_intersection_identity(report):
    bad = []
    for name in ORIENTABLE:
        for k in SCALES:
            q = builtin_presentation(name, k)
            signed = intersection_number(AFFINE_LATTICE, ZERO_SECTION, TorusBundleChart.over(q), q)
            if (-1) ** q.dim * signed != volume(q.domain):
                bad.append((name, k, signed))
    report(3, "(-1)^n [AffineLattice].[Zero] = vol(B)", not bad,
           f"{len(ORIENTABLE) * len(SCALES)} orientable cases, {len(bad)} mismatches")
    assert not bad


def test_criterion_4_holonomy_against_rk4(report):
    rng = random.Random(0)
    cases = []
    for _ in range(100):
        n = rng.randint(1, 3)
        dens = [rng.randint(1, 12) for _ in range(n)]
        x = tuple(Fraction(rng.randint(-2 * q, 2 * q), q) for q in dens)
        m = tuple(rng.randint(-2, 2) for _ in range(n))
        cases.append((x, m))
    t0 = time.perf_counter()
    worst = 0.0
    for x, m in cases:
        model = EnhancedALModel(Polytope.box([-2] * len(x), [2] * len(x), half_open=False))
        loop = FibreLoop(x, m)
        worst = max(worst, abs(holonomy(model, loop) - holonomy_numeric(model, loop, 10_000)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 5
    report(4, "holonomy vs RK4", ok, f"100 pairs, max error {worst:.1e} (< 1e-8), {elapsed:.2f}s (< 5s)")
    assert worst < 1e-8
    assert elapsed < 5


def test_criterion_5_transition_classification(report):
    rng = random.Random(0)
    disagreements, wrong_rejections, missing_witness = 0, 0, 0
    tally = {"symplectic": 0, "enhanced": 0, "rejected": 0}
    for i in range(200):
        n = 2 + i % 2
        tr = random_transition(n, rng, unimodular=rng.random() < 0.8)
        oracle = (F.transition_pullback_symplectic(tr) == F.symplectic_form(n)
                  and F.transition_preserves_torus(tr))
        symp = is_symplectomorphism(tr)
        disagreements += symp != oracle
        if not symp:
            continue
        tally["symplectic"] += 1
        enhanced = is_enhanced_isomorphism(tr)
        if enhanced == (not is_integral(tr.b)):
            wrong_rejections += 1
        if enhanced:
            tally["enhanced"] += 1
            continue
        tally["rejected"] += 1
        witness = bs_flip_witness(tr)
        if witness is None or witness[1] != tr.base(witness[0]) or bs_status(witness[0]) == bs_status(witness[1]):
            missing_witness += 1
    ok = not (disagreements or wrong_rejections or missing_witness) and tally["enhanced"] and tally["rejected"]
    report(5, "transition classification", bool(ok),
           f"200 transitions, {disagreements} oracle disagreements, {tally['symplectic']} symplectic "
           f"({tally['enhanced']} enhanced, {tally['rejected']} rejected), {wrong_rejections} wrong rejections, "
           f"{missing_witness} missing witnesses")
    assert disagreements == 0
    assert wrong_rejections == 0 and missing_witness == 0
    assert tally["enhanced"] and tally["rejected"]


def test_criterion_6_forms_suites(report):
    t0 = time.perf_counter()
    suites = run_forms_suites(n_max=3, seed=0, random_forms=500, closed_forms=100, stop_early=False)
    elapsed = time.perf_counter() - t0
    ok = all(s.ok for s in suites) and elapsed < 60
    counts = ", ".join(f"{s.name} {s.cases - len(s.failures)}/{s.cases}" for s in suites)
    report(6, "forms identities", ok, f"{counts}; {elapsed:.2f}s (< 60s)")
    by_name = {s.name: s for s in suites}
    assert by_name["d(d(f)) = 0"].cases == 500
    assert by_name["average(d(f)) = d(average(f))"].cases == 500
    assert by_name["periods of closed forms survive averaging"].cases == 100
    assert by_name["integral over zero section = integral of alpha ^ dy^n"].cases == 100
    assert all(s.ok for s in suites), [s.failures for s in suites if not s.ok]
    assert elapsed < 60


def test_criterion_7_monte_carlo_coverage(report):
    shapes = {
        "simplex": Polytope.simplex([(0, 0), (1, 0), (0, 1)]),
        "octahedron": Polytope([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]),
    }
    covered = {}
    for name, p in shapes.items():
        exact = volume(p)
        covered[name] = sum(monte_carlo_volume(p, samples=10**6, seed=s).contains(exact) for s in range(100))
    ok = all(c >= 97 for c in covered.values())
    detail = ", ".join(f"{name} {c}/100" for name, c in covered.items())
    report(7, "Monte Carlo 99% interval", ok, f"10^6 samples, exact volume covered: {detail} (>= 97)")
    assert ok, covered


def test_criterion_8_negative_controls(tmp_path, report, capsys):
    gens = (AffineMap.translation_by([1, 0]), AffineMap.translation_by([0, 1]))
    broken = QuotientPresentation(2, gens, Polytope.box([0, 0], [2, 1]), "broken")
    tiling = validate_tiling(broken)
    path = tmp_path / "broken.json"
    path.write_text(dumps_presentation(broken))
    exit_code = cli.main(["validate", "--input", str(path), "--format", "json"])
    capsys.readouterr()

    tr = ALTransition.from_lists([[1, 0], [0, 1]], [Fraction(1, 2), 0])
    witness = bs_flip_witness(tr)
    flips = witness is not None and bs_status(witness[0]) and not bs_status(witness[1])
    ok = not tiling.ok and exit_code == 1 and flips and not is_enhanced_isomorphism(tr)
    detail = (f"broken tiling: {len(tiling.failures)} failures, validate exit {exit_code}; "
              f"b = (1/2, 0): fibre {tuple(map(str, witness[0]))} -> {tuple(map(str, witness[1]))} flips BS status")
    report(8, "negative controls", ok, detail)
    assert not tiling.ok and tiling.double_covered
    assert exit_code == 1
    assert flips


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
