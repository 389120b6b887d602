"""Complex polynomial arithmetic, root finding and affine normalisation.

Coefficients are stored in ascending degree order as a read-only
``complex128`` array. Root finding uses Aberth-Ehrlich simultaneous
iteration followed by multiplicity-aware clustering: nearby
approximations are merged when the merged centre, polished by Newton's
method on the matching derivative, is a numerical root of the right
order.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULTS
from .errors import DegenerateInput, NonConvergence

_EPS = np.finfo(float).eps


@functools.cache
def _binom(n: int) -> np.ndarray:
    out = np.array([[math.comb(i, j) for i in range(n)] for j in range(n)], dtype=float)
    out.setflags(write=False)
    return out


class Polynomial:
    """Immutable polynomial with complex coefficients, ascending order.

    Trailing (high-order) exact zeros are trimmed on construction. The
    zero polynomial is stored as ``[0]`` and reports ``degree == -1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex] | np.ndarray):
        c = np.array(coeffs, dtype=complex).ravel()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1].copy() if nz.size else np.zeros(1, dtype=complex)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # construction helpers
    @classmethod
    def from_roots(cls, roots: Iterable[tuple[complex, int]], lead: complex = 1.0) -> "Polynomial":
        """Expand ``lead * prod (z - r)**k`` for ``(r, k)`` pairs."""
        c = np.array([lead], dtype=complex)
        for r, k in roots:
            for _ in range(int(k)):
                c = np.convolve(c, np.array([-r, 1.0], dtype=complex))
        return cls(c)

    @classmethod
    def identity(cls) -> "Polynomial":
        return cls([0.0, 1.0])

    @classmethod
    def constant(cls, value: complex) -> "Polynomial":
        return cls([value])

    # basic properties
    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else self.coeffs.size - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def is_monomial(self) -> bool:
        """True for ``c * z**k`` (including constants)."""
        return np.count_nonzero(self.coeffs) <= 1

    def has_real_coefficients(self, tol: float = 0.0) -> bool:
        scale = max(np.abs(self.coeffs).max(), 1e-300)
        return bool(np.all(np.abs(self.coeffs.imag) <= tol * scale))

    # evaluation
    def __call__(self, z):
        c = self.coeffs
        acc = np.zeros_like(np.asarray(z, dtype=complex)) + c[-1]
        for a in c[-2::-1]:
            acc = acc * z + a
        if np.ndim(acc) == 0:
            return complex(acc)
        return acc

    def abs_scale(self, r):
        """Horner of ``|a_i|`` at ``r >= 0``: the rounding scale of ``p(z)``, ``|z| = r``."""
        c = np.abs(self.coeffs)
        acc = np.zeros_like(np.asarray(r, dtype=float)) + c[-1]
        for a in c[-2::-1]:
            acc = acc * r + a
        return acc

    # arithmetic
    def derivative(self, order: int = 1) -> "Polynomial":
        c = self.coeffs
        for _ in range(order):
            if c.size <= 1:
                return Polynomial([0.0])
            c = c[1:] * np.arange(1, c.size)
        return Polynomial(c)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n, dtype=complex)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        return Polynomial(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial([1.0])
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, scalar: complex):
        return Polynomial(self.coeffs / scalar)

    def conjugate(self) -> "Polynomial":
        return Polynomial(np.conj(self.coeffs))

    def allclose(self, other: "Polynomial", rtol: float = 1e-10) -> bool:
        """Coefficient-wise comparison relative to the larger coefficient norm."""
        a, b = self.coeffs, _as_poly(other).coeffs
        n = max(a.size, b.size)
        a = np.pad(a, (0, n - a.size))
        b = np.pad(b, (0, n - b.size))
        scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
        return bool(np.abs(a - b).max() <= rtol * scale)

    # Taylor expansion
    def taylor(self, c: complex) -> np.ndarray:
        """Coefficients ``t_j`` with ``p(z) = sum t_j (z - c)**j``."""
        n = self.coeffs.size
        i = np.arange(n)
        binom = _binom(i.size)  # binom[j, i] = C(i, j)
        powers = np.zeros((n, n), dtype=complex)
        expo = i[None, :] - i[:, None]
        mask = expo >= 0
        powers[mask] = np.power(complex(c), expo[mask])
        return (binom * powers) @ self.coeffs

    def taylor_scale(self, c: complex) -> np.ndarray:
        """Rounding scale of each Taylor coefficient.

        The Taylor sum taken with absolute values, where every coefficient
        magnitude is raised by the largest one: computed coefficients carry
        noise relative to the largest, not to themselves.
        """
        n = self.coeffs.size
        i = np.arange(n)
        binom = _binom(i.size)
        expo = i[None, :] - i[:, None]
        powers = np.where(expo >= 0, np.power(abs(c), np.maximum(expo, 0)), 0.0)
        mags = np.abs(self.coeffs)
        return (binom * powers) @ (mags + mags.max())

    def compose_affine(self, alpha: complex, beta: complex) -> "Polynomial":
        """Return ``p(alpha*z + beta)``."""
        t = self.taylor(beta)
        return Polynomial(t * np.power(complex(alpha), np.arange(t.size)))

    # serialisation
    def to_json(self) -> list[list[float]]:
        return [[float(c.real), float(c.imag)] for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence) -> "Polynomial":
        out = []
        for item in data:
            if isinstance(item, (list, tuple)):
                re, im = (list(item) + [0.0])[:2]
                out.append(complex(float(re), float(im)))
            else:
                out.append(complex(item))
        return cls(out)

    def __repr__(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if c != 0:
                terms.append(f"({c.real:.6g}{c.imag:+.6g}j)z^{k}")
        return "Polynomial(" + (" + ".join(terms) or "0") + ")"


def _as_poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial([x])


@dataclass(frozen=True)
class AffineMap:
    """``T(z) = alpha*z + beta`` with ``alpha != 0``."""

    alpha: complex
    beta: complex = 0.0

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("affine map needs alpha != 0")

    def __call__(self, z):
        return self.alpha * z + self.beta

    def inverse(self) -> "AffineMap":
        return AffineMap(1.0 / self.alpha, -self.beta / self.alpha)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """``self o other``."""
        return AffineMap(self.alpha * other.alpha, self.alpha * other.beta + self.beta)

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(1.0, 0.0)


@dataclass(frozen=True)
class RootCluster:
    location: complex
    multiplicity: int
    residual: float = 0.0


def evaluate(p: Polynomial, z):
    """Horner evaluation of ``p`` at ``z``."""
    return p(z)


def derivative(p: Polynomial) -> Polynomial:
    return p.derivative()


# --------------------------------------------------------------------------
# root finding


def _initial_guesses(a: np.ndarray) -> np.ndarray:
    # a: monic, ascending, degree n >= 1
    n = a.size - 1
    centre = -a[n - 1] / n
    shifted = Polynomial(a).taylor(centre)
    mags = [abs(shifted[n - k]) ** (1.0 / k) for k in range(1, n + 1) if shifted[n - k] != 0]
    radius = max(mags) if mags else 1.0
    radius = radius if radius > 0 else 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return centre + radius * np.exp(1j * angles)


def _aberth(p: Polynomial, sweeps: int) -> tuple[np.ndarray, int]:
    a = p.coeffs / p.coeffs[-1]
    n = a.size - 1
    if n == 1:
        return np.array([-a[0]]), 0
    mon = Polynomial(a)
    dmon = mon.derivative()
    z = _initial_guesses(a)
    done = np.zeros(n, dtype=bool)
    used = sweeps
    for sweep in range(sweeps):
        pz = mon(z)
        dpz = dmon(z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = dpz / pz
            w = 1.0 / (ratio - s)
        w = np.where((pz == 0) | done | ~np.isfinite(w), 0.0, w)
        z = z - w
        small_step = np.abs(w) <= 4 * _EPS * np.maximum(np.abs(z), 1e-300)
        small_res = np.abs(mon(z)) <= 4 * _EPS * mon.abs_scale(np.abs(z))
        done |= small_step | small_res
        if done.all():
            used = sweep + 1
            break
    return z, used


def _newton_polish(p: Polynomial, c0: complex, k: int, radius: float) -> complex:
    """Newton on ``p^(k-1)``, whose root is simple at a k-fold root of ``p``."""
    q = p.derivative(k - 1)
    dq = q.derivative()
    c = complex(c0)
    if q.degree == 1:
        c = complex(-q.coeffs[0] / q.coeffs[1])
        return c if abs(c - c0) <= radius else complex(c0)
    for _ in range(60):
        d = dq(c)
        if d == 0:
            break
        step = q(c) / d
        c -= step
        if abs(step) <= 2 * _EPS * max(abs(c), 1e-300):
            break
    if not np.isfinite(c) or abs(c - c0) > radius:
        return complex(c0)
    return c


def is_numerical_root(p: Polynomial, c: complex, k: int, tol: float) -> bool:
    """True when ``c`` is a root of order at least ``k`` within relative ``tol``."""
    t = p.taylor(c)[:k]
    s = p.taylor_scale(c)[:k]
    return bool(np.all(np.abs(t) <= tol * s))


def vanishing_order(p: Polynomial, c: complex, max_order: int | None = None, tol: float | None = None) -> int:
    """Order of the zero of ``p`` at ``c``: first Taylor coefficient above ``tol`` times its rounding scale."""
    tol = DEFAULTS.order_tol if tol is None else tol
    t = p.taylor(c)
    s = p.taylor_scale(c)
    limit = t.size if max_order is None else min(max_order, t.size)
    for j in range(limit):
        if abs(t[j]) > tol * s[j]:
            return j
    return limit


def _sort_key(z: complex):
    return (round(z.real, 9), round(z.imag, 9))


def _cluster(p: Polynomial, raw: np.ndarray, tol: float) -> list[RootCluster]:
    n = raw.size
    members: list[list[int]] = [[i] for i in range(n)]
    centres: list[complex] = [complex(z) for z in raw]

    # exact-coincidence pass at the requested radius
    merged = True
    while merged:
        merged = False
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                zi, zj = centres[i], centres[j]
                if abs(zi - zj) <= tol * max(1.0, abs(zi), abs(zj)):
                    members[i] += members.pop(j)
                    pts = raw[members[i]]
                    centres.pop(j)
                    centres[i] = complex(pts.mean())
                    merged = True
                    break
            if merged:
                break

    # a k-fold root scatters Aberth approximations over roughly eps**(1/k)
    loose = 0.05
    rejected: set[frozenset] = set()
    while True:
        best = None
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                key = frozenset((tuple(members[i]), tuple(members[j])))
                if key in rejected:
                    continue
                d = abs(centres[i] - centres[j])
                if d <= loose * max(1.0, abs(centres[i])) and (best is None or d < best[0]):
                    best = (d, i, j, key)
        if best is None:
            break
        _, i, j, key = best
        idx = members[i] + members[j]
        k = len(idx)
        mean = complex(raw[idx].mean())
        spread = float(np.abs(raw[idx] - mean).max())
        c = _newton_polish(p, mean, k, radius=max(4 * spread, tol))
        if is_numerical_root(p, c, k, tol):
            members[i] = idx
            centres[i] = c
            members.pop(j)
            centres.pop(j)
        else:
            rejected.add(key)

    out = []
    for idx, c in zip(members, centres):
        k = len(idx)
        spread = float(np.abs(raw[idx] - c).max())
        c = _newton_polish(p, c, k, radius=max(4 * spread, 1e-6 * max(1.0, abs(c))))
        residual = float(np.abs(p(raw[idx])).max())
        out.append(RootCluster(complex(c), k, residual))
    out.sort(key=lambda rc: _sort_key(rc.location))
    return out


def roots(p: Polynomial, tol: float | None = None, sweeps: int | None = None) -> list[RootCluster]:
    """Root clusters of ``p`` with multiplicities summing to ``deg p``.

    Raises
    ------
    DegenerateInput
        If ``deg p < 1``.
    NonConvergence
        If some approximation still has relative backward error above the
        residual tolerance after ``sweeps`` Aberth sweeps.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    sweeps = DEFAULTS.root_sweeps if sweeps is None else sweeps
    if p.degree < 1:
        raise DegenerateInput("root finding needs degree >= 1")
    return list(_roots_cached(p.coeffs.tobytes(), float(tol), int(sweeps)))


@functools.lru_cache(maxsize=4096)
def _roots_cached(key: bytes, tol: float, sweeps: int) -> tuple[RootCluster, ...]:
    c = np.frombuffer(key, dtype=complex)
    zero_mult = int(np.flatnonzero(c)[0])
    out: list[RootCluster] = []
    if zero_mult:
        out.append(RootCluster(0j, zero_mult, 0.0))
        c = c[zero_mult:]
    if c.size > 1:
        q = Polynomial(c)
        raw, _ = _aberth(q, sweeps)
        back = np.abs(q(raw)) / np.maximum(q.abs_scale(np.abs(raw)), 1e-300)
        if not np.all(np.isfinite(raw)) or back.max() > DEFAULTS.residual_tol:
            raise NonConvergence(f"Aberth iteration left backward error {back.max():.3g}")
        out.extend(_cluster(q, raw, tol))
    out.sort(key=lambda rc: _sort_key(rc.location))
    return tuple(out)


def reconstruct(clusters: Sequence[RootCluster], lead: complex) -> Polynomial:
    return Polynomial.from_roots(((rc.location, rc.multiplicity) for rc in clusters), lead)


# --------------------------------------------------------------------------
# normalisation and common roots


def principal_root(w: complex, d: int) -> complex:
    """d-th root with argument in (-pi/d, pi/d]."""
    return cmath.exp(cmath.log(complex(w)) / d) if w != 0 else 0j


def normalize_monic_centered(p: Polynomial) -> tuple[Polynomial, AffineMap]:
    """Return ``(q, T)`` with ``q = (p o T) / (a_d alpha**d)`` monic and centred."""
    d = p.degree
    if d < 2:
        raise DegenerateInput("normalisation needs degree >= 2")
    ad, ad1 = p.coeffs[d], p.coeffs[d - 1]
    alpha = principal_root(1.0 / ad, d)
    beta = -ad1 / (d * ad)
    T = AffineMap(alpha, complex(beta))
    q = p.compose_affine(T.alpha, T.beta) / (ad * alpha**d)
    return q, T


def deflate(p: Polynomial, c: complex, k: int = 1) -> tuple[Polynomial, float]:
    """Divide ``p`` by ``(z - c)**k`` by synthetic division.

    Returns the quotient and the largest discarded remainder relative to
    the rounding scale of ``p`` at ``c``.
    """
    coeffs = p.coeffs.copy()
    scale = max(float(p.taylor_scale(c)[0]), 1e-300)
    worst = 0.0
    for _ in range(k):
        n = coeffs.size - 1
        if n < 1:
            break
        q = np.zeros(n, dtype=complex)
        acc = coeffs[-1]
        for i in range(n - 1, -1, -1):
            q[i] = acc
            acc = coeffs[i] + acc * c
        worst = max(worst, abs(acc) / scale)
        coeffs = q
    return Polynomial(coeffs), worst


def gcd_roots(
    pnum: Polynomial,
    pden: Polynomial,
    tol: float | None = None,
    den_clusters: Sequence[RootCluster] | None = None,
) -> list[RootCluster]:
    """Common roots of two polynomials with the smaller multiplicity.

    The lower-degree polynomial is factored (or ``den_clusters`` is used
    for ``pden`` when supplied); each of its clusters is then matched
    against the other polynomial by the order of vanishing there.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    if pnum.is_zero or pden.is_zero:
        raise DegenerateInput("gcd_roots needs nonzero polynomials")
    if den_clusters is not None:
        factored, other = list(den_clusters), pnum
    else:
        small, other = (pden, pnum) if pden.degree <= pnum.degree else (pnum, pden)
        if small.degree < 1:
            return []
        factored = roots(small, tol)
    out = []
    for rc in factored:
        o = vanishing_order(other, rc.location, rc.multiplicity)
        if o > 0:
            out.append(RootCluster(rc.location, o, float(abs(other(rc.location)))))
    return out


def merge_clusters(clusters: Iterable[RootCluster], tol: float | None = None) -> list[RootCluster]:
    """Merge clusters whose locations coincide within ``tol`` (relative), summing multiplicities."""
    tol = DEFAULTS.root_tol if tol is None else tol
    out: list[RootCluster] = []
    for rc in clusters:
        for i, o in enumerate(out):
            if abs(o.location - rc.location) <= 1e2 * tol * max(1.0, abs(o.location)):
                out[i] = RootCluster(o.location, o.multiplicity + rc.multiplicity, max(o.residual, rc.residual))
                break
        else:
            out.append(rc)
    out.sort(key=lambda rc: _sort_key(rc.location))
    return out


def bisect_real(f, lo: float, hi: float, xtol: float = 1e-15, maxiter: int = 200) -> float:
    """Plain bisection for a sign change of ``f`` on ``[lo, hi]``."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("no sign change on bracket")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= xtol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)
