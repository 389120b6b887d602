"""Orbits of rational maps on the sphere and numerical evidence about basins.

Convergence tests
-----------------
* attracting and superattracting fixed points: chordal distance below
  ``conv_tol`` for ``conv_hits`` consecutive iterates;
* parabolic fixed points (multiplier a q-th root of unity): the orbit is
  within ``parabolic_radius`` and its distance to the point has decreased
  against the iterate ``q`` steps back for ``parabolic_window``
  consecutive steps. Parabolic orbits converge only polynomially, so they
  get ``parabolic_budget`` iterations instead of ``budget``.

An orbit landing within ``preimage_tol`` of a parabolic point is reported
as a preimage of it, which is not part of its basin. An orbit reaching
infinity exactly (through a pole) is reported as such; infinity is a
repelling fixed point of every ``C_p``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernel as K
from .chebyshev import INF, RationalMap, build_chebyshev, chordal, critical_points, is_infinite
from .config import DEFAULTS, Defaults
from .fixed_points import (
    ATTRACTING,
    RATIONALLY_INDIFFERENT,
    SUPERATTRACTING,
    find_fixed_points,
    root_of_unity_order,
)
from .poly import Polynomial

OUTCOMES = {
    K.CONVERGED: "converged",
    K.PARABOLIC: "parabolic-converged",
    K.PREIMAGE: "preimage-of-parabolic",
    K.INFINITY: "landed-at-infinity",
    K.UNDECIDED: "undecided",
}

PARABOLIC = "parabolic"


@dataclass(frozen=True)
class Attractor:
    id: int
    location: complex
    kind: str  # superattracting | attracting | parabolic
    multiplier: complex
    order: int = 1  # q for a parabolic point with multiplier a primitive q-th root of unity
    extraneous: bool = False


@dataclass(frozen=True)
class AttractorSet:
    attractors: tuple[Attractor, ...]

    def __len__(self) -> int:
        return len(self.attractors)

    def __iter__(self):
        return iter(self.attractors)

    def __getitem__(self, i: int) -> Attractor:
        return self.attractors[i]

    @property
    def has_parabolic(self) -> bool:
        return any(a.kind == PARABOLIC for a in self.attractors)

    @classmethod
    def from_fixed_points(cls, records) -> "AttractorSet":
        found = []
        for r in records:
            if is_infinite(r.location):
                continue
            if r.modulus_class in (SUPERATTRACTING, ATTRACTING):
                found.append((r.location, r.modulus_class, r.multiplier, 1, r.extraneous))
            elif r.modulus_class == RATIONALLY_INDIFFERENT:
                found.append((r.location, PARABOLIC, r.multiplier, root_of_unity_order(r.multiplier), r.extraneous))
        found.sort(key=lambda t: (round(t[0].real, 9), round(t[0].imag, 9)))
        return cls(tuple(Attractor(i, *t) for i, t in enumerate(found)))

    @classmethod
    def for_polynomial(cls, p: Polynomial) -> "AttractorSet":
        return cls.from_fixed_points(find_fixed_points(p))

    def nearest(self, z: complex, tol: float = 1e-6) -> int | None:
        for a in self.attractors:
            if chordal(z, a.location) <= tol:
                return a.id
        return None

    def conjugation_map(self) -> dict[int, int]:
        """Attractor id -> id of the complex-conjugate attractor (real maps)."""
        out = {}
        for a in self.attractors:
            j = self.nearest(a.location.conjugate())
            if j is None:
                raise ValueError("attractor set is not closed under conjugation")
            out[a.id] = j
        return out

    def to_list(self) -> list[dict]:
        return [{"id": a.id, "location": [a.location.real, a.location.imag], "kind": a.kind,
                 "multiplier": [a.multiplier.real, a.multiplier.imag], "order": a.order,
                 "extraneous": a.extraneous}
                for a in self.attractors]


@dataclass(frozen=True)
class OrbitTrace:
    start: complex
    points: tuple[complex, ...]
    outcome: str
    attractor: int | None
    iterations_used: int
    stride: int = 1

    def to_dict(self) -> dict:
        return {"start": _pt(self.start), "outcome": self.outcome, "attractor": self.attractor,
                "iterations_used": self.iterations_used}


def _pt(z: complex):
    return "inf" if is_infinite(z) else [z.real, z.imag]


@dataclass(frozen=True)
class KernelArgs:
    """Everything the compiled orbit loop needs, as flat arrays and scalars."""

    num: np.ndarray
    den: np.ndarray
    inf_image: complex
    inf_image_inf: bool
    att_loc: np.ndarray
    att_para: np.ndarray
    att_q: np.ndarray
    conv_tol: float
    conv_hits: int
    budget: int
    para_budget: int
    para_radius: float
    para_window: int
    preimage_tol: float
    inf_patience: int
    big: float

    @classmethod
    def build(cls, R: RationalMap, attractors: AttractorSet, budget: int | None = None,
              parabolic_budget: int | None = None, config: Defaults = DEFAULTS) -> "KernelArgs":
        n, d = R.num.degree, R.den.degree
        if n > d:
            inf_image, inf_inf = 0j, True
        elif n == d:
            inf_image, inf_inf = complex(R.num.lead / R.den.lead), False
        else:
            inf_image, inf_inf = 0j, False
        return cls(
            num=np.ascontiguousarray(R.num.coeffs, dtype=np.complex128),
            den=np.ascontiguousarray(R.den.coeffs, dtype=np.complex128),
            inf_image=inf_image, inf_image_inf=inf_inf,
            att_loc=np.array([a.location for a in attractors], dtype=np.complex128),
            att_para=np.array([a.kind == PARABOLIC for a in attractors], dtype=np.bool_),
            att_q=np.array([max(1, a.order) for a in attractors], dtype=np.int64),
            conv_tol=config.conv_tol, conv_hits=config.conv_hits,
            budget=config.budget if budget is None else budget,
            para_budget=config.parabolic_budget if parabolic_budget is None else parabolic_budget,
            para_radius=config.parabolic_radius, para_window=config.parabolic_window,
            preimage_tol=config.preimage_tol, inf_patience=config.infinity_patience,
            big=config.infinity_chart,
        )

    def tail(self) -> tuple:
        return (self.num, self.den, self.inf_image, self.inf_image_inf, self.att_loc, self.att_para, self.att_q,
                self.conv_tol, self.conv_hits, self.budget, self.para_budget, self.para_radius,
                self.para_window, self.preimage_tol, self.inf_patience, self.big)


def iterate(R: RationalMap, z0: complex, attractors: AttractorSet, budget: int | None = None,
            parabolic_budget: int | None = None, trace_size: int = 256) -> OrbitTrace:
    """Follow the orbit of ``z0`` until it is classified or the budget runs out."""
    args = KernelArgs.build(R, attractors, budget, parabolic_budget)
    trace = np.zeros(trace_size, dtype=np.complex128)
    zinf = is_infinite(z0)
    code, att, its, ntrace, stride = K.orbit(0j if zinf else complex(z0), zinf, args.num, args.den,
                                             *args.tail()[2:], trace)
    return OrbitTrace(complex(z0), tuple(complex(z) for z in trace[:ntrace]), OUTCOMES[code],
                      None if att < 0 else int(att), int(its), int(stride))


def classify_points(R: RationalMap, points: np.ndarray, attractors: AttractorSet, budget: int | None = None,
                    parabolic_budget: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Outcome codes, attractor ids and iteration counts for a flat array of finite points."""
    args = KernelArgs.build(R, attractors, budget, parabolic_budget)
    pts = np.ascontiguousarray(points, dtype=np.complex128).ravel()
    code = np.empty(pts.size, dtype=np.int8)
    att = np.empty(pts.size, dtype=np.int16)
    its = np.empty(pts.size, dtype=np.int32)
    K.orbit_block(pts, *args.tail(), code, att, its)
    return code, att, its


def classify_points_parallel(R: RationalMap, points: np.ndarray, attractors: AttractorSet, budget: int | None = None,
                             parabolic_budget: int | None = None, workers: int = 1,
                             chunk: int = 4096) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """:func:`classify_points` over fixed-size chunks on a thread pool; results do not depend on ``workers``."""
    pts = np.ascontiguousarray(points, dtype=np.complex128).ravel()
    if workers <= 1 or pts.size <= chunk:
        return classify_points(R, pts, attractors, budget, parabolic_budget)
    args = KernelArgs.build(R, attractors, budget, parabolic_budget)
    code = np.empty(pts.size, dtype=np.int8)
    att = np.empty(pts.size, dtype=np.int16)
    its = np.empty(pts.size, dtype=np.int32)

    def work(lo: int) -> None:
        hi = min(lo + chunk, pts.size)
        K.orbit_block(pts[lo:hi], *args.tail(), code[lo:hi], att[lo:hi], its[lo:hi])

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(work, range(0, pts.size, chunk)))
    return code, att, its


# --------------------------------------------------------------------------
# probes

PASS = "PASS"
FAIL = "FAIL"


@dataclass
class ProbeReport:
    name: str
    verdict: str
    details: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "summary": self.summary, "details": self.details}


def _setup(p: Polynomial | RationalMap, attractors: AttractorSet | None = None):
    if isinstance(p, RationalMap):
        if attractors is None:
            raise ValueError("an attractor set is required when passing a rational map")
        return p, attractors
    R = build_chebyshev(p)
    return R, AttractorSet.for_polynomial(p) if attractors is None else attractors


def critical_orbit_audit(p: Polynomial | RationalMap, attractors: AttractorSet | None = None,
                         parabolic_budget: int | None = None) -> ProbeReport:
    """Follow every critical point; PASS when each lands on an attractor or a marked Julia point."""
    R, A = _setup(p, attractors)
    details = []
    ok = True
    for c, mult in critical_points(R):
        tr = iterate(R, c, A, parabolic_budget=parabolic_budget)
        if tr.outcome in ("converged", "parabolic-converged"):
            status = "attractor"
        elif tr.outcome in ("landed-at-infinity", "preimage-of-parabolic"):
            status = "marked-julia-point"
        else:
            status = "undecided"
            ok = False
        details.append({"critical_point": _pt(c), "multiplicity": mult, "outcome": tr.outcome,
                        "attractor": tr.attractor, "iterations": tr.iterations_used, "status": status})
    total = sum(d["multiplicity"] for d in details)
    return ProbeReport("critical_orbit_audit", PASS if ok else FAIL, details,
                       {"critical_points": len(details), "with_multiplicity": total,
                        "expected_with_multiplicity": 2 * R.degree - 2})


def unboundedness_probe(p: Polynomial | RationalMap, attractor: complex, ray_samples: int = 32,
                        attractors: AttractorSet | None = None) -> ProbeReport:
    """Sample the real ray to the left of a real attractor; PASS when every sample converges to it."""
    R, A = _setup(p, attractors)
    target = A.nearest(attractor)
    if target is None:
        raise ValueError(f"{attractor} is not in the attractor set")
    a = A[target].location.real
    decades = [-(10.0 ** k) for k in range(1, 9) if -(10.0 ** k) < a]
    ray = list(a - np.logspace(-2, 8, ray_samples))
    xs = np.array(sorted(set(decades + ray)))
    details = []
    ok = True
    for x in xs:
        tr = iterate(R, complex(x), A)
        hit = tr.attractor == target and tr.outcome in ("converged", "parabolic-converged")
        real_path = [z.real for z in tr.points if not is_infinite(z)]
        # compare only until rounding noise at the attractor takes over
        near = [i for i, u in enumerate(real_path) if abs(u - a) <= 1e-9 * max(1.0, abs(a))]
        real_path = real_path[: near[0] + 1] if near else real_path
        monotone = all(u <= v for u, v in zip(real_path, real_path[1:])) if x < a else None
        ok &= hit
        details.append({"x": float(x), "converged": bool(hit), "outcome": tr.outcome,
                        "iterations": tr.iterations_used, "monotone_increasing": monotone})
    mono = [d["monotone_increasing"] for d in details if d["monotone_increasing"] is not None]
    return ProbeReport("unboundedness_probe", PASS if ok else FAIL, details,
                       {"attractor": _pt(A[target].location), "samples": len(details),
                        "converged": sum(d["converged"] for d in details),
                        "monotone_fraction": float(np.mean(mono)) if mono else None})


def pole_boundary_probe(p: Polynomial | RationalMap, attractor: complex,
                        eps_list: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
                        poles: Sequence[complex] | None = None, samples: int = 64,
                        attractors: AttractorSet | None = None) -> ProbeReport:
    """Fraction of points on small circles about each pole that converge to ``attractor``.

    A pole passes when that fraction lies strictly between 0 and 1 on the
    smallest circle, i.e. the pole sits on the basin boundary. PASS needs
    at least one pole and every probed pole passing.
    """
    R, A = _setup(p, attractors)
    target = A.nearest(attractor)
    if target is None:
        raise ValueError(f"{attractor} is not in the attractor set")
    if poles is None:
        poles = [rc.location for rc in R.poles] if R.poles else []
    eps_list = sorted(eps_list, reverse=True)
    angles = np.exp(2j * np.pi * (np.arange(samples) + 0.5) / samples)
    details = []
    for q in poles:
        fractions = []
        for eps in eps_list:
            code, att, _ = classify_points(R, q + eps * angles, A)
            fractions.append(float(np.mean(att == target)))
        passed = 0.0 < fractions[-1] < 1.0
        details.append({"pole": _pt(complex(q)), "eps": list(eps_list), "fractions": fractions, "passed": passed})
    ok = bool(details) and all(d["passed"] for d in details)
    return ProbeReport("pole_boundary_probe", PASS if ok else FAIL, details,
                       {"attractor": _pt(A[target].location), "poles_probed": len(details)})


def left_ray_attractor(p: Polynomial | RationalMap, attractors: AttractorSet | None = None,
                       x: float = -1e4) -> complex | None:
    """The attractor whose basin contains a far point on the negative real axis."""
    R, A = _setup(p, attractors)
    tr = iterate(R, complex(x), A)
    return None if tr.attractor is None else A[tr.attractor].location


def connectivity_evidence(p: Polynomial, parabolic_budget: int | None = None) -> dict:
    """Aggregate the probes into EVIDENCE-CONSISTENT or INCONCLUSIVE; this is never a proof."""
    R, A = _setup(p)
    crit = critical_orbit_audit(R, A, parabolic_budget)
    reports = [crit]
    target = left_ray_attractor(R, A) if p.has_real_coefficients() else None
    if target is not None:
        reports.append(unboundedness_probe(R, target, attractors=A))
        pole = pole_boundary_probe(R, target, attractors=A)
        # the basin boundary needs to contain at least one pole
        pole_ok = any(d["passed"] for d in pole.details)
        pole = replace(pole, verdict=PASS if pole_ok else FAIL)
        reports.append(pole)
    consistent = target is not None and all(r.passed for r in reports)
    return {
        "verdict": "EVIDENCE-CONSISTENT" if consistent else "INCONCLUSIVE",
        "attractors": A.to_list(),
        "attractor_count": len(A),
        "probe_attractor": None if target is None else _pt(target),
        "reports": [r.to_dict() for r in reports],
    }
