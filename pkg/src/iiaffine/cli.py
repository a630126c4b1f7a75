"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import forms
from .affine import DEFAULT_WORD_BOUND, AffineTier, TierError
from .almodels import EnhancedALModel, FibreLoop, bohr_sommerfeld_set, holonomy, holonomy_numeric, holonomy_phase
from .dualbundle import (
    AFFINE_LATTICE,
    PREQUANTIZATION,
    ZERO_SECTION,
    NonTransverseError,
    TorusBundleChart,
    intersection_number,
    local_sign,
    section_coincidence_points,
)
from .linalg import format_rational, parse_rational
from .quotient import (
    Polytope,
    PresentationFormatError,
    QuotientPresentation,
    builtin_presentation,
    integral_points,
    load_presentation,
    monte_carlo_volume,
    validate_tiling,
    volume,
)
from .riemann_roch import verify_all
from .selftest import run_forms_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SECTIONS = {"zero": ZERO_SECTION, "affinelattice": AFFINE_LATTICE, "prequantization": PREQUANTIZATION}


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _load(args) -> QuotientPresentation:
    if (args.builtin is None) == (args.input is None):
        raise UsageError("give exactly one of --builtin or --input")
    if args.builtin is not None:
        try:
            return builtin_presentation(args.builtin, args.scale)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    try:
        return load_presentation(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from exc


def _points_json(points) -> list:
    return [[format_rational(c) for c in p] for p in points]


def _points_text(points) -> str:
    return "\n".join("  (" + ", ".join(format_rational(c) for c in p) + ")" for p in points)


def _rationals(text: str) -> list[Fraction]:
    try:
        return [parse_rational(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_validate(args) -> int:
    q = _load(args)
    problems = []
    tiers = q.tiers()
    for i, t in enumerate(tiers):
        if t < AffineTier.INTEGRAL_INTEGRAL_AFFINE:
            problems.append(f"generator {i}: tier: {t.label}, expected {AffineTier.INTEGRAL_INTEGRAL_AFFINE.label}")
    tiling = None
    if all(t >= AffineTier.INTEGRAL_AFFINE for t in tiers):
        tiling = validate_tiling(q, args.samples, args.word_bound, args.seed)
        if not tiling.ok:
            problems.append(tiling.summary())
            for point, hits in tiling.failures[:5]:
                problems.append(f"  orbit of ({', '.join(map(format_rational, point))}) meets the domain {hits} times")
    payload = {
        "label": q.label,
        "tiers": [t.label for t in tiers],
        "tiling_samples": args.samples,
        "tiling_failures": len(tiling.failures) if tiling else None,
        "problems": problems,
        "valid": not problems,
    }
    text = "\n".join([f"{q.label}: {'valid' if not problems else 'INVALID'}"] + problems)
    _emit(args, payload, text)
    return EXIT_OK if not problems else EXIT_FAIL


def cmd_verify(args) -> int:
    q = _load(args)
    report = verify_all(q, args.word_bound, args.mc_samples, args.seed, threads=args.threads)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(args, report.to_dict(), report.human())
    return EXIT_OK if report.all_passed else EXIT_FAIL


def cmd_volume(args) -> int:
    q = _load(args)
    vol = volume(q.domain)
    payload = {"label": q.label, "volume": format_rational(vol)}
    text = f"vol({q.label}) = {format_rational(vol)}"
    ok = True
    if args.mc_samples > 0:
        est = monte_carlo_volume(q.domain, args.mc_samples, args.seed, args.threads)
        ok = est.contains(vol)
        payload["monte_carlo"] = {"estimate": est.estimate, "low": est.low, "high": est.high, "contains_exact": ok}
        text += f"\nMonte Carlo: {est.estimate:.6f}  99% [{est.low:.6f}, {est.high:.6f}]"
    _emit(args, payload, text)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lattice(args) -> int:
    q = _load(args)
    pts = integral_points(q, args.word_bound).sorted()
    _emit(args, {"label": q.label, "count": len(pts), "points": _points_json(pts)},
          f"|B_Z| = {len(pts)}\n{_points_text(pts)}")
    return EXIT_OK


def cmd_bs(args) -> int:
    q = _load(args)
    pts = bohr_sommerfeld_set(q, args.word_bound).sorted()
    _emit(args, {"label": q.label, "count": len(pts), "points": _points_json(pts)},
          f"|BS| = {len(pts)}\n{_points_text(pts)}")
    return EXIT_OK


def cmd_holonomy(args) -> int:
    x = _rationals(args.x)
    m = _rationals(args.m)
    if len(x) != len(m):
        raise UsageError(f"--x has {len(x)} entries, --m has {len(m)}")
    if any(v.denominator != 1 for v in m):
        raise UsageError("--m must be integers")
    m = [int(v) for v in m]
    model = EnhancedALModel(Polytope.box([v - 1 for v in x], [v + 1 for v in x], half_open=False))
    loop = FibreLoop(tuple(x), tuple(m))
    phase = holonomy_phase(x, m)
    value = holonomy(model, loop)
    text = f"exp(2πi·{format_rational(phase)}) = {_fmt_complex(value)}"
    payload = {"phase": format_rational(phase), "value": [value.real, value.imag]}
    code = EXIT_OK
    if args.numeric:
        num = holonomy_numeric(model, loop, args.steps)
        err = abs(num - value)
        payload["numeric"] = {"value": [num.real, num.imag], "error": err, "steps": args.steps}
        text += f"\nRK4 ({args.steps} steps): {_fmt_complex(num)}  |error| = {err:.2e}"
        if err >= 1e-8:
            code = EXIT_FAIL
    _emit(args, payload, text)
    return code


def _fmt_complex(z: complex) -> str:
    re = 0.0 if abs(z.real) < 5e-16 else z.real
    im = 0.0 if abs(z.imag) < 5e-16 else z.imag
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return f"{im:g}i"
    return f"{re:.12g}{'+' if im >= 0 else '-'}{abs(im):.12g}i"


def cmd_intersect(args) -> int:
    q = _load(args)
    try:
        a, b = (SECTIONS[s.strip().lower()] for s in args.sections.split(","))
    except (KeyError, ValueError):
        raise UsageError(f"--sections expects two of {', '.join(SECTIONS)}") from None
    chart = TorusBundleChart.over(q)
    try:
        pts = section_coincidence_points(a, b, chart, q, args.word_bound).sorted()
    except NonTransverseError as exc:
        _emit(args, {"error": str(exc)}, f"error: {exc}")
        return EXIT_FAIL
    payload = {"label": q.label, "sections": [a.kind.value, b.kind.value], "count": len(pts),
               "points": _points_json(pts), "orientable": q.orientable}
    text = f"{a.kind.value} n {b.kind.value}: {len(pts)} points\n{_points_text(pts)}"
    if q.orientable:
        signed = intersection_number(a, b, chart, q, args.word_bound)
        payload["signed"] = signed
        payload["local_sign"] = local_sign(a, b, q.dim)
        text += f"\nintersection number = {signed}"
    else:
        payload["signed"] = None
        text += "\nbase not orientable: unsigned count only"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_forms_selftest(args) -> int:
    if args.quick:
        suites = run_forms_suites(n_max=1, seed=args.seed, random_forms=100, closed_forms=20)
    else:
        suites = run_forms_suites(n_max=args.n, seed=args.seed)
    ok = all(s.ok for s in suites)
    payload = {"seed": args.seed, "ok": ok,
               "suites": [{"name": s.name, "cases": s.cases, "counterexamples": s.failures} for s in suites]}
    lines = []
    for s in suites:
        lines.append(f"{'PASS' if s.ok else 'FAIL'}  {s.name}  ({s.cases} cases)")
        lines.extend(f"      counterexample: {c}" for c in s.failures)
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json"), default="human")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--builtin", help="torus-<n>, klein or kodaira-thurston")
    source.add_argument("--scale", type=int, default=1)
    source.add_argument("--input", help="presentation JSON file")
    source.add_argument("--word-bound", type=int, default=DEFAULT_WORD_BOUND)
    source.add_argument("--mc-samples", type=int, default=10**6)

    parser = argparse.ArgumentParser(prog="iiaffine", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("validate", parents=[common, source], help="tier and tiling checks")
    p.add_argument("--samples", type=int, default=256)
    p.set_defaults(func=cmd_validate)
    sub.add_parser("verify", parents=[common, source], help="full RR = |BS| report").set_defaults(func=cmd_verify)
    sub.add_parser("volume", parents=[common, source], help="exact volume").set_defaults(func=cmd_volume)
    sub.add_parser("lattice", parents=[common, source], help="integral points").set_defaults(func=cmd_lattice)
    sub.add_parser("bs", parents=[common, source], help="Bohr-Sommerfeld fibres").set_defaults(func=cmd_bs)
    p = sub.add_parser("intersect", parents=[common, source], help="section coincidences and signs")
    p.add_argument("--sections", default="AffineLattice,Zero")
    p.set_defaults(func=cmd_intersect)
    p = sub.add_parser("holonomy", parents=[common], help="fibre holonomy exp(2 pi i <m, x>)")
    p.add_argument("--x", required=True, help="comma-separated rationals")
    p.add_argument("--m", required=True, help="comma-separated integers")
    p.add_argument("--numeric", action="store_true", help="cross-check with RK4 transport")
    p.add_argument("--steps", type=int, default=10_000)
    p.set_defaults(func=cmd_holonomy)
    p = sub.add_parser("forms-selftest", parents=[common], help="symbolic identity suites")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--quick", action="store_true", help="n = 1, small suites")
    p.set_defaults(func=cmd_forms_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, PresentationFormatError, forms.FormError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TierError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
