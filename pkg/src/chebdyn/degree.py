"""Root/critical structure counts and the exact degree of ``C_p``.

The counts are ``m, n, r`` (distinct simple, double and higher-multiplicity
roots), ``s`` (distinct special critical points: critical points ``c``
with ``p(c) != 0`` and ``p''(c) = 0``) and ``B`` (their total
multiplicity as roots of ``p'``). The predicted degree is
``3(m+n+r) - 2 - B + s``.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .chebyshev import build_chebyshev, build_L
from .config import DEFAULTS
from .errors import AmbiguousClassification, ChebdynError
from .poly import Polynomial, RootCluster, roots


@dataclass
class DegreeBreakdown:
    degree_p: int
    m: int
    n: int
    r: int
    s: int
    B: int
    predicted: int
    actual: int
    agrees: bool
    predicted_L: int
    actual_L: int
    reduction_residual: float = 0.0


def _band(value: float, scale: float) -> str:
    if value <= 0.1 * scale:
        return "zero"
    if value >= 10 * scale:
        return "nonzero"
    return "ambiguous"


def special_critical_points(p: Polynomial, tol: float | None = None) -> list[RootCluster]:
    """Critical points ``c`` with ``p(c) != 0`` and ``p''(c) = 0``.

    Each is returned with its multiplicity as a root of ``p'``. Both
    values are compared with ``tol * |lead| * max(1, |c|)**deg``; one
    within a factor 10 of that threshold raises
    :class:`AmbiguousClassification`.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    if p.degree < 2:
        raise ValueError("need degree >= 2")
    d2 = p.derivative(2)
    out = []
    for rc in roots(p.derivative(), tol):
        c = rc.location
        scale = tol * abs(p.lead) * max(1.0, abs(c)) ** p.degree
        pc = _band(abs(p(c)), scale)
        p2 = _band(abs(d2(c)), scale) if d2.degree >= 1 else "nonzero"
        if "ambiguous" in (pc, p2):
            raise AmbiguousClassification(f"critical point {c:.6g}: |p|={abs(p(c)):.3g}, |p''|={abs(d2(c)):.3g}")
        if pc == "nonzero" and p2 == "zero":
            out.append(rc)
    return out


def root_counts(p: Polynomial, tol: float | None = None) -> tuple[int, int, int]:
    mults = [rc.multiplicity for rc in roots(p, tol)]
    return mults.count(1), mults.count(2), sum(1 for k in mults if k > 2)


def predicted_degree(p: Polynomial, tol: float | None = None) -> DegreeBreakdown:
    """Fill the counts, evaluate the degree formula and compare with the built map."""
    tol = DEFAULTS.root_tol if tol is None else tol
    m, n, r = root_counts(p, tol)
    special = special_critical_points(p, tol)
    s = len(special)
    B = sum(rc.multiplicity for rc in special)
    C = build_chebyshev(p, tol)
    L = build_L(p, tol)
    predicted = 3 * (m + n + r) - 2 - B + s
    return DegreeBreakdown(
        degree_p=p.degree, m=m, n=n, r=r, s=s, B=B,
        predicted=predicted, actual=C.degree, agrees=predicted == C.degree,
        predicted_L=2 * (m + n + r) - 2 - B + s, actual_L=L.degree,
        reduction_residual=C.reduction_residual,
    )


# --------------------------------------------------------------------------
# corpus with known structure

GaussQ = tuple[Fraction, Fraction]


def _gmul(a: GaussQ, b: GaussQ) -> GaussQ:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gadd(a: GaussQ, b: GaussQ) -> GaussQ:
    return (a[0] + b[0], a[1] + b[1])


def _pmul(p: list[GaussQ], q: list[GaussQ]) -> list[GaussQ]:
    out = [(Fraction(0), Fraction(0))] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = _gadd(out[i + j], _gmul(a, b))
    return out


def _from_roots(spec: Sequence[tuple[GaussQ, int]], lead: int = 1) -> list[GaussQ]:
    out = [(Fraction(lead), Fraction(0))]
    for root, k in spec:
        for _ in range(k):
            out = _pmul(out, [(-root[0], -root[1]), (Fraction(1), Fraction(0))])
    return out


def _integrate(dp: list[GaussQ], const: GaussQ) -> list[GaussQ]:
    return [const] + [(a[0] / (i + 1), a[1] / (i + 1)) for i, a in enumerate(dp)]


def _peval(p: list[GaussQ], z: GaussQ) -> GaussQ:
    acc = (Fraction(0), Fraction(0))
    for a in reversed(p):
        acc = _gadd(_gmul(acc, z), a)
    return acc


def _to_poly(p: list[GaussQ]) -> Polynomial:
    return Polynomial([complex(float(a), float(b)) for a, b in p])


@dataclass
class CorpusEntry:
    """A polynomial with exactly known root and critical structure."""

    family: str
    exact: list[GaussQ]
    truth: dict
    poly: Polynomial = field(init=False)

    def __post_init__(self):
        self.poly = _to_poly(self.exact)

    @property
    def truth_degree(self) -> int:
        t = self.truth
        return 3 * (t["m"] + t["n"] + t["r"]) - 2 - t["B"] + t["s"]


def _grid_point(rng, denom: int = 4, span: int = 8) -> GaussQ:
    re = Fraction(int(rng.integers(-span, span + 1)), denom) + Fraction(int(rng.integers(-20, 21)), 97 * denom)
    im = Fraction(int(rng.integers(-span, span + 1)), denom) + Fraction(int(rng.integers(-20, 21)), 89 * denom)
    return (re, im)


def _separated(rng, count: int, min_sep: float = 0.5) -> list[GaussQ]:
    pts: list[GaussQ] = []
    while len(pts) < count:
        z = _grid_point(rng)
        zc = complex(float(z[0]), float(z[1]))
        if all(abs(zc - complex(float(w[0]), float(w[1]))) >= min_sep for w in pts):
            pts.append(z)
    return pts


def _composition(rng, total: int, parts: int, min_part: int = 1) -> list[int]:
    while True:
        cuts = sorted(rng.choice(np.arange(1, total), size=parts - 1, replace=False)) if parts > 1 else []
        sizes = np.diff([0, *cuts, total]).tolist()
        if min(sizes) >= min_part:
            return [int(x) for x in sizes]


def _gabs(z: GaussQ) -> float:
    return abs(complex(float(z[0]), float(z[1])))


def _family_roots(rng) -> CorpusEntry:
    d = int(rng.integers(2, 7))
    k = int(rng.integers(2, d + 1))
    mults = _composition(rng, d, k)
    pts = _separated(rng, k)
    exact = _from_roots(list(zip(pts, mults)))
    truth = dict(m=mults.count(1), n=mults.count(2), r=sum(1 for x in mults if x > 2), s=0, B=0)
    return CorpusEntry("roots", exact, truth)


def _family_special(rng) -> CorpusEntry:
    d = int(rng.integers(3, 7))
    while True:
        k = int(rng.integers(1, d - 1))
        bs = _composition(rng, d - 1, k)
        if max(bs) >= 2:
            break
    cps = _separated(rng, k)
    dp = _from_roots(list(zip(cps, bs)), lead=d)
    while True:
        const = _grid_point(rng, denom=2, span=12)
        p = _integrate(dp, const)
        vals = [_gabs(_peval(p, c)) for c in cps]
        scales = [1.0 + _gabs(c) ** d for c in cps]
        if all(v >= 0.05 * s for v, s in zip(vals, scales)):
            break
    truth = dict(m=d, n=0, r=0, s=sum(1 for b in bs if b >= 2), B=sum(b for b in bs if b >= 2))
    return CorpusEntry("special", p, truth)


def _family_unicritical(rng) -> CorpusEntry:
    d = int(rng.integers(2, 7))
    a, b = _separated(rng, 2)
    if b == (0, 0):
        b = (Fraction(1), Fraction(0))
    p = _from_roots([(a, d)])
    p[0] = _gadd(p[0], b)
    s, B = (1, d - 1) if d >= 3 else (0, 0)
    return CorpusEntry("unicritical", p, dict(m=d, n=0, r=0, s=s, B=B))


def _family_pair(rng) -> CorpusEntry:
    d = int(rng.integers(2, 7))
    m1 = int(rng.integers(1, d))
    a, b = _separated(rng, 2)
    mults = [m1, d - m1]
    p = _from_roots([(a, m1), (b, d - m1)])
    truth = dict(m=mults.count(1), n=mults.count(2), r=sum(1 for x in mults if x > 2), s=0, B=0)
    return CorpusEntry("pair", p, truth)


def _family_mixed(rng) -> CorpusEntry:
    # p' = d (z-a)^(k-1) (z-c)^b prod(z-e_j); constant chosen so p(a) = 0
    options = [(4, 2, 2), (5, 2, 2), (5, 3, 2), (5, 2, 3), (6, 2, 2), (6, 3, 2), (6, 2, 3), (6, 4, 2), (6, 3, 3), (6, 2, 4)]
    d, k, b = options[int(rng.integers(len(options)))]
    extra = d - 1 - (k - 1) - b
    while True:
        pts = _separated(rng, 2 + extra)
        a, c, es = pts[0], pts[1], pts[2:]
        dp = _from_roots([(a, k - 1), (c, b)] + [(e, 1) for e in es], lead=d)
        p0 = _integrate(dp, (Fraction(0), Fraction(0)))
        pa = _peval(p0, a)
        p = _integrate(dp, (-pa[0], -pa[1]))
        others = [c, *es]
        vals = [_gabs(_peval(p, w)) for w in others]
        scales = [1.0 + _gabs(w) ** d for w in others]
        if all(v >= 0.05 * s for v, s in zip(vals, scales)):
            break
    truth = dict(m=d - k, n=int(k == 2), r=int(k > 2), s=int(b >= 2), B=b if b >= 2 else 0)
    return CorpusEntry("mixed", p, truth)


_FAMILIES = [("roots", 0.4, _family_roots), ("special", 0.2, _family_special),
             ("unicritical", 0.1, _family_unicritical), ("pair", 0.15, _family_pair),
             ("mixed", 0.15, _family_mixed)]


def make_corpus(size: int = 200, seed: int = 0, families: Sequence[str] | None = None) -> list[CorpusEntry]:
    """Deterministic corpus of polynomials of degree 2-6 with exact ground truth."""
    rng = np.random.default_rng(seed)
    chosen = [f for f in _FAMILIES if families is None or f[0] in families]
    weights = np.array([w for _, w, _ in chosen])
    counts = np.floor(weights / weights.sum() * size).astype(int)
    counts[0] += size - counts.sum()
    out = []
    for (_, _, make), cnt in zip(chosen, counts):
        out.extend(make(rng) for _ in range(cnt))
    return out


# --------------------------------------------------------------------------
# audit


@dataclass
class AuditEntry:
    index: int
    status: str  # ok | disagree | ambiguous | error
    breakdown: DegreeBreakdown | None = None
    message: str = ""
    family: str = ""
    truth_matches: bool | None = None

    def to_dict(self) -> dict:
        out = {"index": self.index, "status": self.status, "family": self.family, "message": self.message,
               "truth_matches": self.truth_matches}
        if self.breakdown is not None:
            out.update(asdict(self.breakdown))
        return out


@dataclass
class DegreeAuditReport:
    entries: list[AuditEntry]
    degree_five: int = 0
    three_roots_below_six: int = 0

    @property
    def disagreements(self) -> list[AuditEntry]:
        return [e for e in self.entries if e.status == "disagree"]

    @property
    def ambiguous(self) -> list[AuditEntry]:
        return [e for e in self.entries if e.status == "ambiguous"]

    @property
    def passed(self) -> bool:
        return (not self.disagreements and self.degree_five == 0 and self.three_roots_below_six == 0
                and not any(e.status == "error" for e in self.entries))

    def summary(self) -> dict:
        return {
            "count": len(self.entries),
            "disagreements": len(self.disagreements),
            "ambiguous": len(self.ambiguous),
            "errors": sum(e.status == "error" for e in self.entries),
            "degree_five": self.degree_five,
            "three_roots_below_six": self.three_roots_below_six,
            "passed": self.passed,
        }

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e.to_dict()) for e in self.entries) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "m", "n", "r", "s", "B", "predicted", "actual", "agrees"])
        for e in self.entries:
            b = e.breakdown
            if b is not None:
                w.writerow([b.degree_p, b.m, b.n, b.r, b.s, b.B, b.predicted, b.actual, b.agrees])
        return buf.getvalue()


def _audit_one(args) -> AuditEntry:
    index, item, tol = args
    poly = item.poly if isinstance(item, CorpusEntry) else item
    family = item.family if isinstance(item, CorpusEntry) else ""
    try:
        b = predicted_degree(poly, tol)
    except AmbiguousClassification as exc:
        return AuditEntry(index, "ambiguous", message=str(exc), family=family)
    except ChebdynError as exc:
        return AuditEntry(index, "error", message=f"{type(exc).__name__}: {exc}", family=family)
    status = "ok" if b.agrees and b.predicted_L == b.actual_L else "disagree"
    msg = "" if status == "ok" else f"residual {b.reduction_residual:.3g}"
    matches = None
    if isinstance(item, CorpusEntry):
        matches = all(getattr(b, key) == val for key, val in item.truth.items())
    return AuditEntry(index, status, b, msg, family, matches)


def degree_audit(corpus: Sequence[CorpusEntry | Polynomial], tol: float | None = None, workers: int = 1) -> DegreeAuditReport:
    """Run :func:`predicted_degree` over a corpus and check the corollary facts."""
    tol = DEFAULTS.root_tol if tol is None else tol
    jobs = [(i, item, tol) for i, item in enumerate(corpus)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_audit_one, jobs))
    else:
        entries = [_audit_one(j) for j in jobs]
    five = sum(1 for e in entries if e.breakdown is not None and e.breakdown.actual == 5)
    below_six = sum(1 for e in entries if e.breakdown is not None
                    and e.breakdown.m + e.breakdown.n + e.breakdown.r >= 3 and e.breakdown.actual < 6)
    return DegreeAuditReport(entries, five, below_six)
