"""The chain RR(M) = vol(M) = vol(B) = |B_Z| = |BS| for a quotient presentation."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .affine import DEFAULT_WORD_BOUND, AffineTier
from .almodels import bohr_sommerfeld_set
from .dualbundle import AFFINE_LATTICE, ZERO_SECTION, TorusBundleChart, intersection_number, section_coincidence_points
from .linalg import format_rational, parse_rational
from .quotient import QuotientPresentation, integral_points, monte_carlo_volume, validate_tiling, volume

RR_LABEL = "RR (via trivial Todd class: RR = vol(M) = vol(B))"
FOOTER = (
    "Independence of the count from the choice of fibration, line bundle and "
    "magnetic term is covered by bs_equals_lattice: BS is determined by the "
    "integral-integral affine structure alone."
)
PASS_KEYS = ("downstairs", "bs_equals_lattice", "upstairs", "intersection")


def riemann_roch_number(q: QuotientPresentation) -> Fraction:
    """Symplectic volume of M, which equals vol(B) since the fibres have unit volume."""
    q.require_tier(AffineTier.INTEGRAL_AFFINE)
    return volume(q.domain)


@dataclass
class VerificationReport:
    label: str
    n: int
    vol_B: Fraction
    count_BZ: int
    count_BS: int
    rr: Fraction
    intersection_signed: int | None
    coincidence_count: int
    orientable: bool
    passes: dict[str, bool]
    word_bound: int
    seed: int
    monte_carlo: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    rr_label: str = RR_LABEL
    footer: str = FOOTER

    @property
    def all_passed(self) -> bool:
        return all(self.passes[k] for k in PASS_KEYS)

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "label": self.label,
            "n": self.n,
            "vol_B": format_rational(self.vol_B),
            "count_BZ": self.count_BZ,
            "count_BS": self.count_BS,
            "rr": format_rational(self.rr),
            "rr_label": self.rr_label,
            "intersection_signed": self.intersection_signed,
            "coincidence_count": self.coincidence_count,
            "orientable": self.orientable,
            "passes": {k: self.passes[k] for k in PASS_KEYS},
            "all_passed": self.all_passed,
            "word_bound": self.word_bound,
            "seed": self.seed,
            "monte_carlo": dict(self.monte_carlo),
            "warnings": list(self.warnings),
            "footer": self.footer,
        }
        if timings:
            out["timings"] = dict(self.timings)
        return out

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> VerificationReport:
        return cls(
            label=doc["label"],
            n=doc["n"],
            vol_B=parse_rational(doc["vol_B"]),
            count_BZ=doc["count_BZ"],
            count_BS=doc["count_BS"],
            rr=parse_rational(doc["rr"]),
            intersection_signed=doc["intersection_signed"],
            coincidence_count=doc["coincidence_count"],
            orientable=doc["orientable"],
            passes=dict(doc["passes"]),
            word_bound=doc["word_bound"],
            seed=doc["seed"],
            monte_carlo=dict(doc.get("monte_carlo", {})),
            warnings=list(doc.get("warnings", [])),
            timings=dict(doc.get("timings", {})),
            rr_label=doc.get("rr_label", RR_LABEL),
            footer=doc.get("footer", FOOTER),
        )

    def human(self) -> str:
        lines = [
            f"{self.label} (n = {self.n})",
            f"  vol(B)              = {format_rational(self.vol_B)}",
            f"  |B_Z|               = {self.count_BZ}",
            f"  |BS|                = {self.count_BS}",
            f"  {self.rr_label} = {format_rational(self.rr)}",
        ]
        if self.intersection_signed is not None:
            lines.append(f"  [AffineLattice].[Zero] = {self.intersection_signed}  (signed)")
        else:
            lines.append(f"  |AffineLattice n Zero| = {self.coincidence_count}  (unsigned; base not orientable)")
        if self.monte_carlo:
            mc = self.monte_carlo
            lines.append(f"  Monte Carlo vol     = {mc['estimate']:.6f}  99% [{mc['low']:.6f}, {mc['high']:.6f}]")
        for k in PASS_KEYS:
            lines.append(f"  {'PASS' if self.passes[k] else 'FAIL'}  {k}")
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines)


def verify_all(q: QuotientPresentation, word_bound: int = DEFAULT_WORD_BOUND, mc_samples: int = 10**6,
               seed: int = 0, tiling_samples: int = 128, threads: int = 1) -> VerificationReport:
    """Compute every quantity in the chain and the identities between them."""
    q.require_tier(AffineTier.INTEGRAL_INTEGRAL_AFFINE)
    timings: dict[str, float] = {}
    warnings: list[str] = []

    def timed(name, fn, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        timings[name] = time.perf_counter() - t0
        return out

    tiling = timed("tiling", validate_tiling, q, tiling_samples, word_bound, seed)
    if not tiling.ok:
        warnings.append(tiling.summary())
    vol_b = timed("volume", volume, q.domain)
    mc = {}
    if mc_samples > 0:
        est = timed("monte_carlo", monte_carlo_volume, q.domain, mc_samples, seed, threads)
        mc = {"estimate": est.estimate, "low": est.low, "high": est.high,
              "samples": est.samples, "contains_exact": est.contains(vol_b)}
        if not est.contains(vol_b):
            warnings.append("exact volume outside the Monte Carlo 99% interval")
    bz = timed("integral_points", integral_points, q, word_bound)
    bs = timed("bohr_sommerfeld", bohr_sommerfeld_set, q, word_bound)
    rr = timed("riemann_roch", riemann_roch_number, q)
    assert rr == vol_b

    chart = TorusBundleChart.over(q)
    coincide = timed("coincidence", section_coincidence_points, AFFINE_LATTICE, ZERO_SECTION, chart, q, word_bound)
    n = q.dim
    if q.orientable:
        signed = timed("intersection", intersection_number, AFFINE_LATTICE, ZERO_SECTION, chart, q, word_bound)
        intersection_ok = (-1) ** n * signed == vol_b
    else:
        signed = None
        intersection_ok = len(coincide) == vol_b
        warnings.append("base is not orientable: intersection reported as an unsigned count")

    passes = {
        "downstairs": vol_b == len(bz),
        "bs_equals_lattice": bs.points == bz.points,
        "upstairs": rr == len(bs),
        "intersection": intersection_ok,
    }
    return VerificationReport(
        label=q.label, n=n, vol_B=vol_b, count_BZ=len(bz), count_BS=len(bs), rr=rr,
        intersection_signed=signed, coincidence_count=len(coincide), orientable=q.orientable,
        passes=passes, word_bound=word_bound, seed=seed, monte_carlo=mc, warnings=warnings, timings=timings,
    )
