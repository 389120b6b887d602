"""Chebyshev and Chebyshev-Halley iteration maps as reduced rational maps.

A :class:`RationalMap` is built from an unreduced numerator and a
factored denominator. Common factors are found by matching the
denominator's root clusters against the numerator's order of vanishing.
The reduced denominator is rebuilt from the surviving poles, and the
reduced numerator is interpolated from values computed through the
root clusters of ``p``; the map keeps that factored form for accurate
evaluation near its zeros and poles.

Points of the Riemann sphere are plain Python complex numbers, with
``INF`` (``complex(inf, 0)``) standing for the point at infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULTS
from .errors import DegenerateInput, Indeterminate
from .poly import (
    Polynomial,
    RootCluster,
    deflate,
    merge_clusters,
    roots,
    vanishing_order,
)

INF = complex(math.inf, 0.0)
_EPS = np.finfo(float).eps

SpherePoint = complex


def is_infinite(z: complex) -> bool:
    return cmath.isinf(z)


def chordal(z: complex, w: complex) -> float:
    """Chordal (spherical) distance on the Riemann sphere, at most 2."""
    zi, wi = is_infinite(z), is_infinite(w)
    if zi and wi:
        return 0.0
    if zi:
        return 2.0 / math.sqrt(1.0 + abs(w) ** 2)
    if wi:
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


@dataclass(frozen=True)
class RationalMap:
    """``num / den`` acting on the Riemann sphere.

    ``lead_ratio`` is the ratio of leading coefficients of the unreduced
    form when the builder supplied one; for Chebyshev maps it fixes the
    multiplier at infinity independently of the reduction.
    """

    num: Polynomial
    den: Polynomial
    reduced: bool = False
    lead_ratio: complex | None = None
    reduction_residual: float = 0.0
    poles: tuple[RootCluster, ...] = field(default=(), compare=False)
    num_form: "FactoredNumerator | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.den.is_zero:
            raise DegenerateInput("denominator is the zero polynomial")

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def _factored_den(self) -> bool:
        return bool(self.poles) and sum(rc.multiplicity for rc in self.poles) == self.den.degree

    def den_value(self, z):
        """``den(z)``, from the pole factors when the denominator was built from them.

        Expanded coefficients lose relative accuracy next to a high-order
        pole; the product form does not.
        """
        if not self._factored_den():
            return self.den(z)
        z = np.asarray(z, dtype=complex)
        out = np.full_like(z, self.den.lead)
        for rc in self.poles:
            out = out * (z - rc.location) ** rc.multiplicity
        return out

    def num_and_derivative(self, z):
        """``num(z)`` and ``num'(z)``.

        With a :class:`FactoredNumerator` attached, each point takes
        whichever of the factored and the coefficient evaluation has the
        smaller rounding bound; the coefficient form loses relative
        accuracy where the numerator is small compared with its terms.
        """
        z = np.asarray(z, dtype=complex)
        F, dF = self.num(z), self.num.derivative()(z)
        if self.num_form is None:
            return F, dF
        r = np.abs(z)
        eF = self.num.abs_scale(r)
        edF = self.num.derivative().abs_scale(r)
        G, dG, eG, edG = self.num_form.evaluate(z)
        pick = eG < eF
        pick_d = edG < edF
        return np.where(pick, G, F), np.where(pick_d, dG, dF)

    def num_value(self, z):
        return self.num_and_derivative(z)[0] if self.num_form is not None else self.num(z)

    def __call__(self, z):
        """Plain finite evaluation ``num(z)/den(z)`` (vectorised, no chart logic)."""
        return self.num_value(z) / self.den_value(z)

    def quotient_rule_derivative(self, z):
        """``(F'G - FG')/G**2`` evaluated at finite ``z``."""
        F, dF = self.num_and_derivative(z)
        G = self.den
        if not self._factored_den():
            g = G(z)
            return (dF * g - F * G.derivative()(z)) / (g * g)
        z = np.asarray(z, dtype=complex)
        g = self.den_value(z)
        log_dg = sum(rc.multiplicity / (z - rc.location) for rc in self.poles)
        return (dF - F * log_dg) / g

    def value_at_infinity(self) -> complex:
        dn, dd = self.num.degree, self.den.degree
        if dn > dd:
            return INF
        if dn < dd:
            return 0j
        return self.num.lead / self.den.lead

    def multiplier_at_infinity(self) -> complex:
        """Multiplier of the fixed point at infinity when ``deg num = deg den + 1``.

        Uses the stored unreduced leading ratio when present.
        """
        if self.num.degree != self.den.degree + 1:
            raise ValueError("infinity is not a fixed point with finite multiplier")
        ratio = self.lead_ratio if self.lead_ratio is not None else self.num.lead / self.den.lead
        return 1.0 / ratio

    def has_real_coefficients(self, tol: float = 1e-12) -> bool:
        return self.num.has_real_coefficients(tol) and self.den.has_real_coefficients(tol)

    def normalized(self) -> "RationalMap":
        """Same map with a monic denominator."""
        lead = self.den.lead
        form = None if self.num_form is None else self.num_form.scaled(1 / lead)
        return RationalMap(self.num / lead, self.den / lead, self.reduced, self.lead_ratio,
                           self.reduction_residual, self.poles, form)

    def to_json(self) -> dict:
        lr = self.lead_ratio
        return {
            "num": self.num.to_json(),
            "den": self.den.to_json(),
            "degree": self.degree,
            "lead_ratio": None if lr is None else [float(lr.real), float(lr.imag)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RationalMap":
        lr = data.get("lead_ratio")
        num = Polynomial.from_json(data["num"])
        den = Polynomial.from_json(data["den"])
        return cls(num, den, reduced=True, lead_ratio=None if lr is None else complex(*lr))


# A numerator kept as a sum of products of derivatives of p:
# [(coef, (k1, k2, ...)), ...] with k = derivative order and Z for the factor z.
Z = -1
Terms = Sequence[tuple[complex, Sequence[int]]]


def expand_terms(p: Polynomial, terms: Terms) -> Polynomial:
    z = Polynomial.identity()
    out = Polynomial([0])
    for coef, keys in terms:
        prod = Polynomial([coef])
        for k in keys:
            prod = prod * (z if k == Z else p.derivative(k))
        out = out + prod
    return out


def local_p_series(p: Polynomial, c: complex, crit_mult: int, is_root: bool) -> np.ndarray:
    """Taylor coefficients of ``p`` about ``c`` with the structural zeros imposed.

    ``c`` is a root of ``p'`` of multiplicity ``crit_mult`` (0 if not
    critical), and a root of ``p`` when ``is_root``. A computed ``c``
    carries a small error, which otherwise shows up as tiny nonzero
    values in exactly these coefficients.
    """
    t = p.taylor(c).copy()
    t[1 : crit_mult + 1] = 0
    if is_root:
        t[0] = 0
    return t


def _series_of(t: np.ndarray, key: int, c: complex) -> np.ndarray:
    if key == Z:
        return np.array([c, 1], dtype=complex)
    if key == 0:
        return t
    i = np.arange(t.size - key)
    fall = np.ones(i.size)
    for j in range(key):
        fall *= i + key - j
    return t[key:] * fall


def terms_order(t: np.ndarray, c: complex, terms: Terms, max_order: int, tol: float | None = None) -> int:
    """Order of vanishing at ``c`` of a sum of products, from a local series of ``p``."""
    tol = DEFAULTS.order_tol if tol is None else tol
    K = max_order + 1
    acc = np.zeros(K, dtype=complex)
    scale = np.zeros(K)
    for coef, keys in terms:
        tp = np.array([coef], dtype=complex)
        sp = np.array([abs(coef)])
        for k in keys:
            f = _series_of(t, k, c)
            if f.size == 0:  # derivative of order above deg p
                break
            tp = np.convolve(tp, f)[:K]
            sp = np.convolve(sp, np.abs(f))[:K]
        else:
            acc[: tp.size] += tp
            scale[: sp.size] += sp
    for j in range(K):
        if abs(acc[j]) > tol * scale[j]:
            return j
    return max_order


def _structured_order(p: Polynomial, terms: Terms, tol: float):
    crit = roots(p.derivative(), tol) if p.degree >= 2 else []
    proots = roots(p, tol)

    def near(a: complex, b: complex) -> bool:
        return abs(a - b) <= 1e-6 * max(1.0, abs(a))

    def order(c: complex, max_order: int) -> int:
        b = next((rc.multiplicity for rc in crit if near(rc.location, c)), 0)
        is_root = any(near(rc.location, c) for rc in proots)
        return terms_order(local_p_series(p, c, b, is_root), c, terms, max_order, tol=DEFAULTS.order_tol)

    return order


def reduce_map(
    num: Polynomial,
    den: Polynomial,
    den_clusters: Sequence[RootCluster] | None = None,
    lead_ratio: complex | None = None,
    tol: float | None = None,
    order_fn=None,
    num_eval=None,
    num_scale=None,
    num_form=None,
) -> RationalMap:
    """Cancel common roots of ``num`` and ``den``.

    ``den_clusters`` are the root clusters of ``den``; they are computed
    when omitted, but builders pass them from the factored form because
    high powers such as ``p'**3`` cluster badly when expanded first.
    ``order_fn(c, max_order)`` replaces the generic vanishing-order test
    of ``num`` when the builder knows the structure of ``num``, and
    ``num_eval(z)`` evaluates ``num`` accurately (e.g. from its factors);
    when given, the reduced numerator is interpolated from it instead of
    being taken from the deflated coefficients. ``num_form(cancelled)``
    returns a :class:`FactoredNumerator` for the reduced numerator.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    if den_clusters is None:
        den_clusters = roots(den, tol) if den.degree >= 1 else []
    residual = 0.0
    poles = []
    cancelled = []
    for rc in den_clusters:
        if num.is_zero:
            o = rc.multiplicity
        elif order_fn is not None:
            o = order_fn(rc.location, rc.multiplicity)
        else:
            o = vanishing_order(num, rc.location, rc.multiplicity)
        if o:
            num, r1 = deflate(num, rc.location, o)
            residual = max(residual, r1)
            cancelled.append((rc.location, o))
        if rc.multiplicity - o > 0:
            poles.append(RootCluster(rc.location, rc.multiplicity - o, rc.residual))
    # rebuilding the denominator from its clusters avoids repeated deflation
    red_den = Polynomial([den.lead])
    for rc in poles:
        red_den = red_den * Polynomial.from_roots([(rc.location, rc.multiplicity)])
    if num_eval is not None and cancelled and num.degree >= 1:
        num = _interpolate_quotient(num_eval, cancelled, num.degree, num_scale)
    form = None if num_form is None else num_form(tuple(cancelled))
    return RationalMap(num, red_den, True, lead_ratio, residual, tuple(poles), form)


def _interpolate_quotient(num_eval, cancelled, degree: int, num_scale=None) -> Polynomial:
    """Coefficients of ``num_eval(z) / prod (z - c)**o`` by sampling on circles.

    A single circle gives low-order coefficients with absolute error near
    ``eps * max|q|`` on it, which is poor when the circle is large. Each
    admissible radius (kept clear of every cancelled point) yields a full
    coefficient set; coefficient ``k`` is taken from the radius with the
    smallest propagated error bound divided by ``rho**k``.
    """
    n = degree + 1
    mags = [abs(c) for c, _ in cancelled]
    radii = [r for r in 2.0 ** (np.arange(-12, 25) / 2.0)
             if all(abs(r - m) >= 0.1 * max(r, m) for m in mags)]
    base = 1.5 * max(1.0, *mags)
    if not radii:
        radii = [base]
    roots_of_unity = np.exp(2j * np.pi * np.arange(n) / n)
    best = np.zeros(n, dtype=complex)
    best_err = np.full(n, np.inf)
    k = np.arange(n)
    for rho in radii:
        w = rho * roots_of_unity
        vals = np.asarray(num_eval(w), dtype=complex)
        scale = np.abs(vals) if num_scale is None else np.asarray(num_scale(w), dtype=float)
        for c, o in cancelled:
            d = (w - c) ** o
            vals = vals / d
            scale = scale / np.abs(d)
        if not np.all(np.isfinite(vals)):
            continue
        coeffs = np.fft.fft(vals) / n / rho**k
        err = (np.max(scale) + np.max(np.abs(vals))) / rho**k
        better = err < best_err
        best[better] = coeffs[better]
        best_err[better] = err[better]
    return Polynomial(best)


def critical_clusters(p: Polynomial, tol: float | None = None) -> list[RootCluster]:
    """Root clusters of ``p'`` derived from the root clusters of ``p``.

    With ``p = lead * prod (z - c_i)**m_i`` one has
    ``p' = lead * prod (z - c_i)**(m_i - 1) * sum_i m_i prod_{j != i} (z - c_j)``,
    so the critical points are the multiple roots plus the roots of a
    small well-conditioned polynomial. This keeps them consistent with the
    clustered form of ``p`` that the builders evaluate, where roots of the
    expanded ``p'`` would carry the rounding of the expanded coefficients.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    rc = roots(p, tol)
    out = [RootCluster(c.location, c.multiplicity - 1, c.residual) for c in rc if c.multiplicity > 1]
    q = Polynomial([0])
    for i, ci in enumerate(rc):
        term = Polynomial([ci.multiplicity])
        for j, cj in enumerate(rc):
            if j != i:
                term = term * Polynomial([-cj.location, 1])
        q = q + term
    if q.degree >= 1:
        out.extend(roots(q, tol))
    return merge_clusters(out, tol)


def _factored_clusters(factors: Sequence[tuple[Sequence[RootCluster], int]], tol: float) -> list[RootCluster]:
    out: list[RootCluster] = []
    for clusters, e in factors:
        out.extend(RootCluster(rc.location, rc.multiplicity * e, rc.residual) for rc in clusters)
    return merge_clusters(out, tol)


def _check_input(p: Polynomial, tol: float) -> None:
    if p.degree < 2:
        raise DegenerateInput("Chebyshev map needs degree >= 2; for linear p it is a linear polynomial")
    if p.is_monomial() or len(roots(p, tol)) < 2:
        raise DegenerateInput("Chebyshev map of a (shifted) monomial is a linear polynomial")


def factored_derivatives(clusters: Sequence[RootCluster], lead: complex, z, order: int) -> list[np.ndarray]:
    """``p, p', ..., p^(order)`` at ``z`` for ``p = lead * prod (z - c)**m``.

    Leibniz's rule over the factors, whose derivatives are exact
    monomials. Unlike Horner on expanded coefficients this keeps a
    multiple root exactly multiple, so maps built from it match the
    multiplicity structure that clustering decided on, and unlike
    logarithmic derivatives it does not cancel next to a root.
    """
    z = np.asarray(z, dtype=complex)
    acc = [np.full_like(z, lead)] + [np.zeros_like(z) for _ in range(order)]
    for rc in clusters:
        d, m = z - rc.location, rc.multiplicity
        fac = [math.perm(m, j) * d ** (m - j) if j <= m else np.zeros_like(z) for j in range(order + 1)]
        acc = [sum(math.comb(k, j) * acc[j] * fac[k - j] for j in range(k + 1)) for k in range(order + 1)]
    return acc


def eval_terms(p: Polynomial, terms: Terms, z, clusters: Sequence[RootCluster] | None = None,
               absolute: bool = False) -> np.ndarray:
    """Evaluate a sum of products of derivatives of ``p`` factor by factor.

    With ``clusters`` (the root clusters of ``p``) the derivatives come
    from the factored form instead of the coefficients. ``absolute`` sums
    the magnitudes of the terms instead, which is the rounding scale of
    the plain sum.
    """
    z = np.asarray(z, dtype=complex)
    cache = {}
    if clusters is not None:
        top = max((k for _, keys in terms for k in keys), default=0)
        cache = dict(enumerate(factored_derivatives(clusters, p.lead, z, max(top, 0))))
    out = np.zeros_like(z)
    for coef, keys in terms:
        prod = np.full_like(z, coef)
        for k in keys:
            if k not in cache:
                cache[k] = z if k == Z else p.derivative(k)(z)
            prod = prod * cache[k]
        out = out + (np.abs(prod) if absolute else prod)
    return out.real if absolute else out


def derivative_terms(terms: Terms) -> list[tuple[complex, tuple[int, ...]]]:
    """Terms of the derivative of a term sum, by the product rule."""
    out = []
    for coef, keys in terms:
        for i, k in enumerate(keys):
            rest = tuple(keys[:i]) + tuple(keys[i + 1:])
            out.append((coef, rest) if k == Z else (coef, rest + (k + 1,)))
    return out


@dataclass(frozen=True)
class FactoredNumerator:
    """A reduced numerator ``factor * N / prod (z - c)**o`` with ``N`` a term sum.

    ``N`` is evaluated through the root clusters of ``p``, so its relative
    accuracy follows the sizes of the individual terms rather than the
    expanded coefficients.
    """

    p: Polynomial
    terms: tuple
    clusters: tuple[RootCluster, ...]
    cancelled: tuple[tuple[complex, int], ...]
    factor: complex = 1.0

    def scaled(self, s: complex) -> "FactoredNumerator":
        return FactoredNumerator(self.p, self.terms, self.clusters, self.cancelled, self.factor * s)

    def evaluate(self, z):
        """``(F, F', bound F, bound F')`` at ``z``; bounds are infinite where undefined."""
        z = np.asarray(z, dtype=complex)
        dterms = derivative_terms(self.terms)
        N = eval_terms(self.p, self.terms, z, self.clusters)
        sN = eval_terms(self.p, self.terms, z, self.clusters, absolute=True)
        dN = eval_terms(self.p, dterms, z, self.clusters)
        sdN = eval_terms(self.p, dterms, z, self.clusters, absolute=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            prod = np.ones_like(z)
            S = np.zeros_like(z)
            aS = np.zeros(z.shape)
            for c, o in self.cancelled:
                prod = prod * (z - c) ** o
                S = S + o / (z - c)
                aS = aS + o / np.abs(z - c)
            F = self.factor * N / prod
            dF = self.factor * (dN - N * S) / prod
            scale = abs(self.factor) / np.abs(prod)
            eF = sN * scale
            edF = (sdN + sN * aS) * scale
        bad = ~(np.isfinite(F) & np.isfinite(dF) & np.isfinite(eF) & np.isfinite(edF))
        eF = np.where(bad, np.inf, eF)
        edF = np.where(bad, np.inf, edF)
        return F, dF, eF, edF


def _build(p: Polynomial, terms: Terms, den: Polynomial, factors, tol: float, with_lead: bool) -> RationalMap:
    num = expand_terms(p, terms)
    clusters = tuple(roots(p, tol))
    return reduce_map(num, den, _factored_clusters(factors, tol),
                      lead_ratio=num.lead / den.lead if with_lead else None,
                      tol=tol, order_fn=_structured_order(p, terms, tol),
                      num_eval=lambda z: eval_terms(p, terms, z, clusters),
                      num_scale=lambda z: eval_terms(p, terms, z, clusters, absolute=True),
                      num_form=lambda cancelled: FactoredNumerator(p, tuple(terms), clusters, cancelled))


def build_L(p: Polynomial, tol: float | None = None) -> RationalMap:
    """``L_p = p p'' / p'**2``, reduced."""
    tol = DEFAULTS.root_tol if tol is None else tol
    _check_input(p, tol)
    d1 = p.derivative()
    return _build(p, [(1, (0, 2))], d1 * d1, [(critical_clusters(p, tol), 2)], tol, False)


CHEBYSHEV_TERMS: Terms = [(2, (Z, 1, 1, 1)), (-2, (0, 1, 1)), (-1, (0, 0, 2))]


def unreduced_chebyshev(p: Polynomial) -> tuple[Polynomial, Polynomial]:
    """``(2 z p'^3 - 2 p p'^2 - p^2 p'', 2 p'^3)``."""
    d1 = p.derivative()
    return expand_terms(p, CHEBYSHEV_TERMS), 2 * (d1 * d1 * d1)


def build_chebyshev(p: Polynomial, tol: float | None = None) -> RationalMap:
    """Reduced Chebyshev map ``C_p(z) = z - (1 + L_p/2) p/p'``."""
    tol = DEFAULTS.root_tol if tol is None else tol
    _check_input(p, tol)
    d1 = p.derivative()
    return _build(p, CHEBYSHEV_TERMS, 2 * (d1 * d1 * d1), [(critical_clusters(p, tol), 3)], tol, True)


def build_halley(p: Polynomial, sigma: complex, tol: float | None = None) -> RationalMap:
    """Chebyshev-Halley map of order ``sigma``; ``sigma = 0`` gives ``C_p``."""
    tol = DEFAULTS.root_tol if tol is None else tol
    _check_input(p, tol)
    if sigma == 0:
        return build_chebyshev(p, tol)
    d1, d2 = p.derivative(), p.derivative(2)
    g = d1 * d1 - sigma * (p * d2)
    # 2 z p' g - p (2 g + p p'') written out in derivatives of p
    terms = [(2, (Z, 1, 1, 1)), (-2 * sigma, (Z, 1, 0, 2)), (-2, (0, 1, 1)), (2 * sigma - 1, (0, 0, 2))]
    factors = [(critical_clusters(p, tol), 1), (roots(g, tol) if g.degree >= 1 else [], 1)]
    return _build(p, terms, 2 * (d1 * g), factors, tol, True)


def build_chebyshev_derivative(p: Polynomial, tol: float | None = None) -> RationalMap:
    """``C_p' = (L_p**2 / 2)(3 - L_{p'}) = p**2 (3 p''**2 - p' p''') / (2 p'**4)``, reduced."""
    tol = DEFAULTS.root_tol if tol is None else tol
    _check_input(p, tol)
    d1 = p.derivative()
    return _build(p, [(3, (0, 0, 2, 2)), (-1, (0, 0, 1, 3))], 2 * (d1 ** 4),
                  [(critical_clusters(p, tol), 4)], tol, False)


def cubic_chebyshev(a: complex, b: complex) -> RationalMap:
    """Closed form of ``C_p`` for ``p = z^3 + a z + b``."""
    num = Polynomial([-a * a * b, -3 * b * b, -12 * a * b, -a * a, -15 * b, 6 * a, 0, 15])
    den = Polynomial([a, 0, 3]) ** 3
    return RationalMap(num, den, reduced=True, lead_ratio=15 / 27)


def cubic_chebyshev_derivative(a: complex, b: complex) -> RationalMap:
    """Closed form of ``C_p'`` for ``p = z^3 + a z + b``."""
    p = Polynomial([b, a, 0, 1])
    num = 3 * (p * p) * Polynomial([-a, 0, 15])
    den = Polynomial([a, 0, 3]) ** 4
    return RationalMap(num, den, reduced=True)


# --------------------------------------------------------------------------
# evaluation on the sphere


def apply(R: RationalMap, z: SpherePoint) -> SpherePoint:
    """Evaluate ``R`` at a point of the Riemann sphere.

    Poles map to ``INF``; ``INF`` maps by leading terms; ``|z| > 1e8`` is
    evaluated in the chart ``w = 1/z``.
    """
    if is_infinite(z):
        return R.value_at_infinity()
    dn, dd = R.num.degree, R.den.degree
    if abs(z) > DEFAULTS.infinity_chart:
        w = 1.0 / z
        n_rev = Polynomial(R.num.coeffs[::-1])(w)
        d_rev = Polynomial(R.den.coeffs[::-1])(w)
        # R(1/w) = w**(dd - dn) * n_rev / d_rev
        e = dd - dn
        if e < 0:
            bottom = d_rev * w ** (-e)
            return INF if bottom == 0 else n_rev / bottom
        if d_rev == 0:
            return INF
        return n_rev * w**e / d_rev
    N, D = complex(R.num_value(z)), complex(R.den_value(z))
    sN = float(R.num.abs_scale(abs(z)))
    sD = float(R.den.abs_scale(abs(z)))
    if abs(N) <= 16 * _EPS * sN and abs(D) <= 16 * _EPS * sD:
        raise Indeterminate(f"numerator and denominator both vanish at {z}")
    if abs(D) <= DEFAULTS.pole_chart_rel * abs(N):
        return INF
    return N / D


def _order_after(t: np.ndarray, s: np.ndarray, start: int, tol: float) -> int:
    for j in range(start, t.size):
        if abs(t[j]) > tol * s[j]:
            return j
    return t.size


def local_degree(R: RationalMap, z0: SpherePoint, tol: float | None = None) -> int:
    """Local degree of ``R`` at ``z0`` (reciprocal charts at poles and infinity)."""
    tol = DEFAULTS.order_tol if tol is None else tol
    num, den = R.num, R.den
    if is_infinite(z0):
        dn, dd = num.degree, den.degree
        if dn != dd:
            return abs(dn - dd)
        w = num.lead / den.lead
        n = max(dn, dd)
        nr = Polynomial(num.coeffs[::-1])
        dr = Polynomial(np.pad(den.coeffs[::-1], (0, n + 1 - den.coeffs.size)))
        t = nr.taylor(0) - w * dr.taylor(0)
        s = nr.taylor_scale(0) + abs(w) * dr.taylor_scale(0)
        return _order_after(t, s, 1, tol)
    w0 = apply(R, z0)
    if is_infinite(w0):
        return max(1, vanishing_order(den, z0, None, tol))
    t = num.taylor(z0)
    td = den.taylor(z0)
    n = max(t.size, td.size)
    t = np.pad(t, (0, n - t.size)) - w0 * np.pad(td, (0, n - td.size))
    s_full = np.zeros(n)
    s_full[: num.coeffs.size] += num.taylor_scale(z0)
    s_full[: den.coeffs.size] += abs(w0) * den.taylor_scale(z0)
    return _order_after(t, s_full, 1, tol)


def critical_points(R: RationalMap, dR: RationalMap | None = None, tol: float | None = None) -> list[tuple[SpherePoint, int]]:
    """Critical points of ``R`` with multiplicities (local degree minus one).

    Finite non-pole critical points are the roots of the numerator of the
    reduced derivative map ``dR``; multiple poles and a critical infinity
    are added from local degrees.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    out: list[tuple[SpherePoint, int]] = []
    if dR is not None and dR.num.degree >= 1:
        for rc in roots(dR.num, tol):
            out.append((rc.location, rc.multiplicity))
    elif dR is None:
        F, G = R.num, R.den
        w = F.derivative() * G - F * G.derivative()
        if w.degree >= 1:
            for rc in roots(w, tol):
                if vanishing_order(G, rc.location, 1) == 0:
                    out.append((rc.location, rc.multiplicity))
    for pc in R.poles:
        if pc.multiplicity >= 2:
            out.append((pc.location, pc.multiplicity - 1))
    ld = local_degree(R, INF)
    if ld >= 2:
        out.append((INF, ld - 1))
    return out
