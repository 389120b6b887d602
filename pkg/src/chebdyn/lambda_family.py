"""Cubic Chebyshev maps parametrised by the multiplier of an extraneous fixed point.

Every cubic whose Chebyshev map has an extraneous fixed point of
multiplier ``lam`` is affinely conjugate to ``p_lam = z^3 + 3z + psi(lam)``
with

    psi(lam) = (3 lam^2 - 39 lam + 124) / ((5 - lam) sqrt(5 - lam)),

principal square root. That fixed point is ``-1/sqrt(5 - lam)``.
"""

from __future__ import annotations

import cmath
import csv
import functools
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chebyshev import RationalMap, apply, build_chebyshev, build_L
from .errors import ChebdynError, ForbiddenLambda
from .poly import Polynomial, bisect_real, roots

SQRT5 = math.sqrt(5.0)


def _sqrt5m(lam: complex) -> complex:
    # complex(5) - lam keeps a +0.0 imaginary part for real lam > 5,
    # so cmath.sqrt lands on the upper half of the branch cut
    return cmath.sqrt(complex(5.0) - lam)


def psi(lam: complex) -> complex:
    """``(3 lam^2 - 39 lam + 124) / ((5 - lam) sqrt(5 - lam))``."""
    if lam == 5 or lam == 6:
        raise ForbiddenLambda(f"lambda = {lam} is excluded from the family")
    s = _sqrt5m(lam)
    return (3 * lam * lam - 39 * lam + 124) / ((5 - lam) * s)


def psi_real(lam: float) -> float:
    return psi(lam).real


def p_lambda(lam: complex) -> Polynomial:
    return Polynomial([psi(lam), 3, 0, 1])


def closed_form_map(psi_value: complex) -> RationalMap:
    """``(5z^7 + 6z^5 - 5 psi z^4 - 3z^3 - 12 psi z^2 - psi^2 z - 3 psi) / (9 (z^2+1)^3)``."""
    s = psi_value
    num = Polynomial([-3 * s, -s * s, -12 * s, -3, -5 * s, 6, 0, 5])
    den = 9 * Polynomial([1, 0, 1]) ** 3
    return RationalMap(num, den, reduced=True, lead_ratio=5 / 9)


def closed_form_derivative(psi_value: complex) -> RationalMap:
    """``p^2 (5z^2 - 1) / (9 (z^2+1)^4)``."""
    p = Polynomial([psi_value, 3, 0, 1])
    return RationalMap(p * p * Polynomial([-1, 0, 5]), 9 * Polynomial([1, 0, 1]) ** 4, reduced=True)


def extraneous_cubic(lam: complex) -> Polynomial:
    """``q`` with ``4z^4 + 9z^2 + psi z + 3 = (z + 1/s) q(z)``, ``s = sqrt(5 - lam)``."""
    s = _sqrt5m(lam)
    return Polynomial([3 * s, (49 - 9 * lam) / (5 - lam), -4 / s, 4])


def extraneous_quartic(lam: complex) -> list[complex]:
    """The four roots of ``4z^4 + 9z^2 + psi z + 3``, repeated by multiplicity."""
    quartic = Polynomial([3, psi(lam), 9, 0, 4])
    s = _sqrt5m(lam)
    z0 = -1 / s
    if abs(quartic(z0)) > 1e-10 * float(quartic.abs_scale(abs(z0))):
        raise ChebdynError(f"-1/sqrt(5-lam) is not a root of the extraneous quartic (residual {abs(quartic(z0)):.3g})")
    out = []
    for rc in roots(quartic):
        out.extend([rc.location] * rc.multiplicity)
    return out


@dataclass(frozen=True)
class BoundCheck:
    name: str
    passed: bool
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "values", {k: _plain(v) for k, v in self.values.items()})

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "values": self.values}


@dataclass
class LambdaFamilyRecord:
    lam: complex
    psi: complex
    p_lambda: Polynomial
    c_lambda: RationalMap
    distinguished_extraneous: complex
    other_extraneous: list[complex]
    real_root: float | None
    alpha_lambda: float | None
    bound_checks: list[BoundCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.bound_checks)

    def to_dict(self) -> dict:
        cx = lambda z: [z.real, z.imag]  # noqa: E731
        return {
            "lambda": cx(complex(self.lam)),
            "psi": cx(self.psi),
            "p_lambda": self.p_lambda.to_json(),
            "c_lambda": self.c_lambda.to_json(),
            "distinguished_extraneous": cx(self.distinguished_extraneous),
            "other_extraneous": [cx(z) for z in self.other_extraneous],
            "real_root": self.real_root,
            "alpha_lambda": self.alpha_lambda,
            "bound_checks": [c.to_dict() for c in self.bound_checks],
            "passed": self.passed,
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _sample_points(n: int = 100, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = 3.0 * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def _is_real(lam: complex) -> bool:
    return complex(lam).imag == 0 and complex(lam).real < 5


def real_root(lam: float) -> float:
    """The real root of ``p_lam`` by bisection on ``[-2, -1]``."""
    s = psi_real(lam)
    return float(bisect_real(lambda x: x ** 3 + 3 * x + s, -2.0, -1.0))


def alpha_lambda(lam: float) -> float:
    """The real root of the cubic ``q`` (``p_lam``'s other real extraneous point)."""
    q = extraneous_cubic(lam)
    c = q.coeffs.real
    f = lambda x: ((c[3] * x + c[2]) * x + c[1]) * x + c[0]  # noqa: E731
    bound = 1.0 + float(np.max(np.abs(c[:3]))) / abs(c[3])
    return float(bisect_real(f, -bound, bound))


def _nonreal_pair(lam: float, alpha: float) -> complex:
    # q = 4 (z - alpha)(z^2 + b z + c); return the root with positive imaginary part
    q = extraneous_cubic(lam).coeffs.real
    a3, a2, a1 = q[3], q[2], q[1]
    b = a2 / a3 + alpha
    c = a1 / a3 + alpha * b
    return complex(-b / 2, math.sqrt(max(4 * c - b * b, 0.0)) / 2)


def lemma_bound_audit(lam: float) -> list[BoundCheck]:
    """Numeric checks of the real-parameter bounds for ``lam`` in ``[-1, 1]``."""
    if not -1.0 <= lam <= 1.0:
        raise ValueError("the bound audit covers -1 <= lambda <= 1")
    s = math.sqrt(5.0 - lam)
    ps = psi_real(lam)
    C = closed_form_map(ps)
    dC = closed_form_derivative(ps)
    Cr = lambda x: float(np.real(C(complex(x))))  # noqa: E731
    checks = []

    r = real_root(lam)
    checks.append(BoundCheck("r_lambda_bracket", -2 < r < -1, {"r_lambda": r}))

    alpha = alpha_lambda(lam)
    if lam < 1:
        ok = -2 / s < alpha < -1 / s
    else:
        ok = abs(alpha + 0.5) <= 1e-10
    checks.append(BoundCheck("alpha_lambda_bracket", ok, {"alpha_lambda": alpha, "lower": -2 / s, "upper": -1 / s}))

    v = Cr(1 / SQRT5)
    checks.append(BoundCheck("critical_value_bound", v < r and v < -7.449, {"C(1/sqrt5)": v, "r_lambda": r}))

    g = lambda x: Cr(x) - r  # noqa: E731
    lo, hi = -1 / SQRT5, 0.0
    if g(lo) * g(hi) < 0:
        x0 = bisect_real(g, lo, hi)
        ok = lo < x0 < hi and abs(g(x0)) <= 1e-9 * max(1.0, abs(r))
    else:
        x0, ok = None, False
    checks.append(BoundCheck("preimage_x0", ok, {"x0": x0}))

    ok = r < -3 / s < -2 / s < alpha
    checks.append(BoundCheck("ordering_chain", ok, {"r_lambda": r, "-3/s": -3 / s, "-2/s": -2 / s, "alpha_lambda": alpha}))

    zeta = _nonreal_pair(lam, alpha)
    mod2 = abs(zeta) ** 2
    mult = abs(complex(apply(dC, zeta)))
    product = alpha * mod2 + 3 * s / 4
    ok = 1.5 < mod2 < 4.5 and mult > 13 / 3 and abs(product) <= 1e-10 * s
    checks.append(BoundCheck("nonreal_extraneous_bounds", ok, {
        "zeta": [zeta.real, zeta.imag], "|zeta|^2": mod2, "|multiplier|": mult,
        "|5 - 1/zeta^2|": abs(5 - 1 / zeta ** 2), "product_residual": product,
    }))
    return checks


def c_lambda(lam: complex) -> LambdaFamilyRecord:
    """Build ``C_lam`` two ways, locate its extraneous fixed points and run the checks."""
    ps = psi(lam)
    p = p_lambda(lam)
    closed = closed_form_map(ps)
    built = build_chebyshev(p)
    z = _sample_points()
    a, b = closed(z), built(z)
    rel = float(np.max(np.abs(a - b) / np.abs(a)))
    checks = [
        BoundCheck("closed_form_agrees", rel <= 1e-9, {"max_rel_diff": rel}),
        BoundCheck("degree_seven", built.degree == 7, {"degree": built.degree}),
    ]
    s = _sqrt5m(lam)
    z0 = -1 / s
    L0 = complex(apply(build_L(p), z0))
    w0 = complex(apply(closed_form_derivative(ps), z0))
    checks.append(BoundCheck("L_equals_minus_two", abs(L0 + 2) <= 1e-10, {"L": [L0.real, L0.imag]}))
    checks.append(BoundCheck("multiplier_equals_lambda", abs(w0 - lam) <= 1e-9, {"multiplier": [w0.real, w0.imag]}))

    quartic = extraneous_quartic(lam)
    others = list(quartic)
    others.pop(int(np.argmin([abs(x - z0) for x in others])))

    rr = al = None
    if _is_real(lam):
        lam_r = complex(lam).real
        if -1.0 <= lam_r <= 1.0:
            rr, al = real_root(lam_r), alpha_lambda(lam_r)
            checks.extend(lemma_bound_audit(lam_r))
        else:
            real = [x.location.real for x in roots(p) if abs(x.location.imag) <= 1e-12]
            rr = real[0] if len(real) == 1 else None
    return LambdaFamilyRecord(lam, ps, p, built, z0, others, rr, al, checks)


@functools.cache
def delta() -> float:
    """``delta > 1`` with ``psi(delta) = psi(-1)``."""
    return _twin(-1.0)


def _twin(lam: float) -> float:
    if lam == 1.0:
        return 1.0
    target = psi_real(lam)
    return float(bisect_real(lambda x: psi_real(x) - target, 1.0, 5.0 - 1e-9, xtol=1e-15))


def twin_lambda(lam: float) -> float:
    """The ``lam' in (1, delta]`` with ``psi(lam') = psi(lam)``; both give the same map."""
    if not -1.0 <= lam <= 1.0:
        raise ValueError("twin_lambda needs -1 <= lambda <= 1")
    t = _twin(lam)
    a = closed_form_map(psi(lam))
    b = closed_form_map(psi(t))
    if not (a.num.allclose(b.num, 1e-9) and a.den.allclose(b.den, 1e-9)):
        raise ChebdynError(f"maps for {lam} and its twin {t} differ")
    return t


SWEEP_COLUMNS = ["lambda", "psi", "r_lambda", "alpha_lambda", "r_lambda_bracket", "alpha_lambda_bracket",
                 "critical_value_bound", "preimage_x0", "ordering_chain", "nonreal_extraneous_bounds"]


def sweep_rows(grid: Sequence[float], workers: int = 1) -> list[dict]:
    def row(lam: float) -> dict:
        lam = float(lam)
        checks = lemma_bound_audit(lam)
        out = {"lambda": lam, "psi": psi_real(lam), "r_lambda": real_root(lam), "alpha_lambda": alpha_lambda(lam)}
        out.update({c.name: c.passed for c in checks})
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(row, grid))
    return [row(x) for x in grid]


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
