"""Fixed points of ``C_p``: location, multiplier, multiplicity and type.

Roots of ``p`` are fixed with multiplier ``(k-1)(2k-1)/(2k^2)``, infinity
is a repelling fixed point with multiplier ``2d^2/(2d^2-3d+1)``, and every
other (extraneous) fixed point solves ``L_p(z) = -2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chebyshev import INF, apply, build_chebyshev, build_chebyshev_derivative, build_L, is_infinite
from .config import DEFAULTS
from .poly import Polynomial, RootCluster, roots

SUPERATTRACTING = "superattracting"
ATTRACTING = "attracting"
REPELLING = "repelling"
RATIONALLY_INDIFFERENT = "rationally-indifferent"
IRRATIONALLY_INDIFFERENT = "irrationally-indifferent"


@dataclass(frozen=True)
class FixedPointRecord:
    location: complex
    multiplier: complex
    modulus_class: str
    extraneous: bool
    multiplicity: int
    root_multiplicity: int | None = None
    diagnostic: str = ""

    def to_dict(self) -> dict:
        loc = "inf" if is_infinite(self.location) else [self.location.real, self.location.imag]
        return {
            "location": loc,
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "modulus": abs(self.multiplier),
            "class": self.modulus_class,
            "extraneous": self.extraneous,
            "multiplicity": self.multiplicity,
            "root_multiplicity": self.root_multiplicity,
            "diagnostic": self.diagnostic,
        }


def multiplier_formula_root(k: int) -> float:
    if k < 1:
        raise ValueError("root multiplicity must be >= 1")
    return float(Fraction((k - 1) * (2 * k - 1), 2 * k * k))


def multiplier_formula_infinity(d: int) -> float:
    if d < 2:
        raise ValueError("degree must be >= 2")
    return float(Fraction(2 * d * d, 2 * d * d - 3 * d + 1))


def root_of_unity_order(w: complex, tol: float | None = None, max_order: int | None = None) -> int | None:
    """Smallest ``q <= max_order`` with ``w`` within ``tol`` of a primitive q-th root of unity."""
    tol = DEFAULTS.root_of_unity_tol if tol is None else tol
    max_order = DEFAULTS.root_of_unity_max_order if max_order is None else max_order
    if abs(w) == 0:
        return None
    turn = (cmath.phase(w) / (2 * math.pi)) % 1.0
    frac = Fraction(turn).limit_denominator(max_order)
    if abs(w - cmath.exp(2j * math.pi * float(frac))) <= tol:
        return frac.denominator
    return None


def classify_multiplier(w: complex, band: float | None = None) -> str:
    band = DEFAULTS.indifferent_band if band is None else band
    a = abs(w)
    if a < DEFAULTS.superattracting_tol:
        return SUPERATTRACTING
    if a < 1 - band:
        return ATTRACTING
    if a > 1 + band:
        return REPELLING
    return RATIONALLY_INDIFFERENT if root_of_unity_order(w) is not None else IRRATIONALLY_INDIFFERENT


def _match(clusters, z: complex, rel: float = 1e-6) -> RootCluster | None:
    for rc in clusters:
        if abs(rc.location - z) <= rel * max(1.0, abs(z)):
            return rc
    return None


def _newton_on_map(R, a: complex, b: complex, z0: complex, reach: float) -> complex:
    """Newton on ``R(z) - (a z + b)``, evaluated from the factored forms of ``R``."""
    z = z0
    with np.errstate(all="ignore"):
        for _ in range(80):
            g = complex(R(z)) - (a * z + b)
            dg = complex(R.quotient_rule_derivative(z)) - a
            if not (cmath.isfinite(g) and cmath.isfinite(dg)) or dg == 0:
                break
            step = g / dg
            z -= step
            if abs(step) <= 4 * np.finfo(float).eps * max(abs(z), 1.0):
                break
    if not cmath.isfinite(z) or abs(z - z0) > reach * max(1.0, abs(z0)):
        return z0
    return z


def _refine_multiple(dR, z0: complex, reach: float) -> complex:
    """Secant on ``R'(z) = 1``, whose solution is simpler than the multiple fixed point itself."""
    f = lambda z: complex(apply(dR, z)) - 1
    x0, x1 = z0, z0 + reach * 1e-2 * max(1.0, abs(z0))
    f0, f1 = f(x0), f(x1)
    for _ in range(60):
        if f1 == f0 or not cmath.isfinite(f1):
            break
        x0, x1, f0 = x1, x1 - f1 * (x1 - x0) / (f1 - f0), f1
        f1 = f(x1)
        if abs(x1 - x0) <= 4 * np.finfo(float).eps * max(abs(x1), 1.0):
            break
    if not cmath.isfinite(x1) or abs(x1 - z0) > reach * max(1.0, abs(z0)) or abs(f1) > abs(f(z0)):
        return z0
    return x1


def solve_affine(R, a: complex, b: complex, tol: float | None = None) -> list[RootCluster]:
    """Clustered finite solutions of ``R(z) = a z + b``, i.e. roots of ``num - (a z + b) den``.

    The expanded equation is ill conditioned when its roots sit far from
    the origin relative to their spacing, so its raw roots are only
    starting points: each is refined by Newton on the map itself and the
    refined points are then clustered. A k-fold solution resolves to about
    ``tol**(1/2)`` under Newton, which fixes the merge radius.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    eq = R.num - Polynomial([b, a]) * R.den
    if eq.degree < 1:
        return []
    raw = [rc.location for rc in roots(eq, 0.0) for _ in range(rc.multiplicity)]
    pts = [_newton_on_map(R, a, b, z, reach=1e-2) for z in raw]
    radius = math.sqrt(tol)
    groups: list[list[complex]] = []
    for z in pts:
        hit = [g for g in groups if min(abs(z - w) for w in g) <= radius * max(1.0, abs(z))]
        merged = [z] + [w for g in hit for w in g]
        groups = [g for g in groups if g not in hit] + [merged]
    out = []
    for g in groups:
        c = complex(np.mean(g))
        residual = float(max(abs(complex(R(w)) - (a * w + b)) for w in g))
        out.append(RootCluster(c, len(g), residual))
    out.sort(key=lambda rc: (round(rc.location.real, 9), round(rc.location.imag, 9)))
    return out


def find_fixed_points(p: Polynomial, tol: float | None = None) -> list[FixedPointRecord]:
    """All fixed points of ``C_p`` on the sphere, finite ones first, infinity last."""
    tol = DEFAULTS.root_tol if tol is None else tol
    C = build_chebyshev(p, tol)
    dC = build_chebyshev_derivative(p, tol)
    proots = roots(p, tol)
    out = []
    for rc in solve_affine(C, 1.0, 0.0, tol):
        z = rc.location
        if rc.multiplicity >= 2:
            z = _refine_multiple(dC, z, math.sqrt(tol))
        w = complex(apply(dC, z))
        root = _match(proots, z)
        diag = ""
        near_one = abs(w - 1) <= DEFAULTS.multiple_fixed_tol
        if (rc.multiplicity >= 2) != near_one:
            diag = f"multiplicity {rc.multiplicity} but |multiplier - 1| = {abs(w - 1):.3g}"
        out.append(FixedPointRecord(
            location=z, multiplier=w, modulus_class=classify_multiplier(w),
            extraneous=root is None, multiplicity=rc.multiplicity,
            root_multiplicity=None if root is None else root.multiplicity, diagnostic=diag,
        ))
    w_inf = complex(C.multiplier_at_infinity())
    out.append(FixedPointRecord(INF, w_inf, classify_multiplier(w_inf), False, 1))
    return out


def extraneous_via_L(p: Polynomial, tol: float | None = None) -> list[complex]:
    """Finite solutions of ``L_p = -2`` that are not roots of ``p``, repeated by multiplicity."""
    tol = DEFAULTS.root_tol if tol is None else tol
    proots = roots(p, tol)
    out = []
    for rc in solve_affine(build_L(p, tol), 0.0, -2.0, tol):
        if _match(proots, rc.location) is None:
            out.extend([rc.location] * rc.multiplicity)
    return out


def format_table(records: list[FixedPointRecord]) -> str:
    """Aligned plain-text table of fixed-point records."""
    head = ["location", "multiplier", "|mult|", "class", "extr", "mult", "root_k"]
    rows = []
    for r in records:
        loc = "inf" if is_infinite(r.location) else f"{r.location.real:+.10f}{r.location.imag:+.10f}j"
        rows.append([
            loc, f"{r.multiplier.real:+.10f}{r.multiplier.imag:+.10f}j", f"{abs(r.multiplier):.10f}",
            r.modulus_class, "yes" if r.extraneous else "no", str(r.multiplicity),
            "" if r.root_multiplicity is None else str(r.root_multiplicity),
        ])
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(head)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows)
    return "\n".join(lines) + "\n"
