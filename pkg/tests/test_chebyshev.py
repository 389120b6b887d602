import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chebdyn.chebyshev import (
    INF,
    RationalMap,
    apply,
    build_chebyshev,
    build_chebyshev_derivative,
    build_halley,
    build_L,
    critical_points,
    is_infinite,
    local_degree,
)
from chebdyn.errors import DegenerateInput, Indeterminate
from chebdyn.poly import AffineMap, Polynomial, roots
from oracles import (
    exact_chebyshev,
    exact_halley,
    mp_chebyshev_derivative,
    mp_chebyshev_value,
    normalized_coeffs,
    spherical,
    sym_poly_from_roots,
)

from conftest import cx_close

Z3 = Polynomial([-1, 0, 0, 1])
DOUBLE = Polynomial.from_roots([(1, 2), (-2, 1)])
RNG = np.random.default_rng(1234)


def sample_points(n=100, radius=3.0, rng=RNG):
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def monic(R: RationalMap):
    return R.num.coeffs / R.den.lead, R.den.coeffs / R.den.lead


def assert_map_equals(R: RationalMap, num, den, rtol=1e-10):
    """Coefficient-wise equality after scaling both denominators to be monic."""
    n1, d1 = monic(R)
    num, den = np.asarray(num, dtype=complex), np.asarray(den, dtype=complex)
    n2, d2 = num / den[-1], den / den[-1]
    assert n1.size == n2.size and d1.size == d2.size
    scale = max(np.max(np.abs(n2)), np.max(np.abs(d2)))
    assert np.max(np.abs(n1 - n2)) <= rtol * scale
    assert np.max(np.abs(d1 - d2)) <= rtol * scale


def random_structured_spec(rng, max_deg=6):
    """Root spec ``[(root, multiplicity), ...]`` and leading coefficient."""
    while True:
        k = rng.integers(1, 4)
        locs = np.round(rng.normal(size=k) * 2 + 1j * rng.normal(size=k) * 2, 1)
        mults = rng.integers(1, 4, size=k)
        if sum(mults) > max_deg or sum(mults) < 2 or len(set(locs)) < 2:
            continue
        return [(complex(r), int(m)) for r, m in zip(locs, mults)], complex(rng.normal(), rng.normal())


def random_structured_poly(rng, max_deg=6):
    spec, lead = random_structured_spec(rng, max_deg)
    return Polynomial.from_roots(spec, lead=lead)


class TestBuildL:
    def test_depressed_cubic(self):
        a, b = 2.0 - 1j, 0.5 + 3j
        p = Polynomial([b, a, 0, 1])
        L = build_L(p)
        for w in sample_points(20):
            expected = p(w) * 6 * w / (3 * w * w + a) ** 2
            assert abs(L(w) - expected) <= 1e-10 * abs(expected)

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
    def test_value_at_multiple_root(self, k):
        p = Polynomial.from_roots([(0.5, k), (-1.5 + 1j, 1)])
        assert abs(apply(build_L(p), 0.5) - (k - 1) / k) < 1e-9

    def test_pole_at_critical_point(self):
        assert is_infinite(apply(build_L(Polynomial([-1, 0, 1])), 0))


class TestBuildChebyshev:
    def test_z3_minus_1(self):
        R = build_chebyshev(Z3)
        assert R.degree == 6
        assert_map_equals(R, [-1, 0, 0, 5, 0, 0, 5], [0, 0, 0, 0, 0, 9])

    def test_double_root(self):
        R = build_chebyshev(DOUBLE)
        assert R.degree == 4
        assert_map_equals(R, [6, 22, 24, 15, 5], 9 * np.array([1, 3, 3, 1]))

    @given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5))
    def test_depressed_cubic_closed_form(self, ar, ai, br, bi):
        a, b = complex(ar, ai), complex(br, bi)
        if a == 0 or 4 * a**3 + 27 * b**2 == 0:
            return  # unicritical or repeated root: the closed form is not reduced there
        R = build_chebyshev(Polynomial([b, a, 0, 1]))
        num = [-a * a * b, -3 * b * b, -12 * a * b, -a * a, -15 * b, 6 * a, 0, 15]
        den = np.convolve(np.convolve([a, 0, 3], [a, 0, 3]), [a, 0, 3])
        assert_map_equals(R, num, den, rtol=1e-9)

    @pytest.mark.parametrize("p", [Polynomial([0, 0, 1]), Polynomial([2, 3]), Polynomial([5]),
                                   Polynomial.from_roots([(1 + 1j, 4)], 3)])
    def test_degenerate(self, p):
        with pytest.raises(DegenerateInput):
            build_chebyshev(p)

    def test_lead_ratio_kept(self):
        for d in range(2, 7):
            p = Polynomial.from_roots([(k + 0.5j, 1) for k in range(d)])
            R = build_chebyshev(p)
            assert abs(R.lead_ratio - (2 * d**3 - 3 * d**2 + d) / (2 * d**3)) < 1e-12

    @pytest.mark.parametrize("spec", [
        [(1, 2), (-2, 1)], [(0, 2), (1, 1)], [(1, 3), ("1/2+I", 2)], [(0, 1), (1, 1), ("-1/2", 1)],
        [("I", 2), ("-I", 2), (2, 1)], [(1, 1), (-1, 1), ("I", 1), ("-I", 1)],
    ])
    def test_against_sympy_reduction(self, spec):
        P = sym_poly_from_roots(spec)
        num, den = exact_chebyshev(P)
        n_exact, d_exact = normalized_coeffs(num, den)
        p = Polynomial([complex(c) for c in reversed([complex(x) for x in P.all_coeffs()])])
        R = build_chebyshev(p)
        assert R.degree == max(num.degree(), den.degree())
        assert_map_equals(R, n_exact, d_exact, rtol=1e-8)

    def test_monomial_factor_open_question(self):
        # z^2 (z - 1): 0 is a root, high-order cancellation there
        p = Polynomial.from_roots([(0, 2), (1, 1)])
        R = build_chebyshev(p)
        for w in sample_points(30):
            ref = complex(mp_chebyshev_value(list(p.coeffs), w))
            assert abs(R(w) - ref) <= 1e-9 * max(1.0, abs(ref))


class TestDerivative:
    def test_depressed_cubic(self):
        a, b = 1.5, -2 + 0.5j
        p = Polynomial([b, a, 0, 1])
        dC = build_chebyshev_derivative(p)
        for w in sample_points(30):
            expected = 3 * p(w) ** 2 * (15 * w * w - a) / (3 * w * w + a) ** 4
            assert abs(dC(w) - expected) <= 1e-9 * abs(expected)

    def test_zero_at_simple_roots(self):
        p = Polynomial.from_roots([(1, 1), (-1 + 2j, 1), (3, 1), (0.5j, 2)])
        dC = build_chebyshev_derivative(p)
        for r in (1, -1 + 2j, 3):
            assert abs(apply(dC, r)) < 1e-9

    def test_lambda_family_form(self):
        psi = 11.0
        p = Polynomial([psi, 3, 0, 1])
        dC = build_chebyshev_derivative(p)
        for w in sample_points(30):
            expected = p(w) ** 2 * (5 * w * w - 1) / (9 * (w * w + 1) ** 4)
            assert abs(dC(w) - expected) <= 1e-9 * abs(expected)

    def test_quotient_rule_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            p = random_structured_poly(rng)
            R, dR = build_chebyshev(p), build_chebyshev_derivative(p)
            w = sample_points(100, rng=rng)
            a, b = R.quotient_rule_derivative(w), dR(w)
            assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)) < 1e-9

    def test_against_high_precision(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            spec, lead = random_structured_spec(rng)
            dR = build_chebyshev_derivative(Polynomial.from_roots(spec, lead=lead))
            w = sample_points(40, rng=rng)
            expected = np.array(mp_chebyshev_derivative(spec, lead, w))
            assert np.max(np.abs(dR(w) - expected) / np.abs(expected)) < 1e-9


class TestHalley:
    def test_sigma_zero_is_chebyshev(self):
        for p in (Z3, DOUBLE, Polynomial([11, 3, 0, 1])):
            H, C = build_halley(p, 0), build_chebyshev(p)
            n1, d1 = monic(H)
            n2, d2 = monic(C)
            assert np.allclose(n1, n2, rtol=1e-10, atol=0) and np.allclose(d1, d2, rtol=1e-10, atol=0)

    def test_halley_quadratic(self):
        P = sym_poly_from_roots([(1, 1), (-1, 1)])
        num, den = exact_halley(P, "1/2")
        n_exact, d_exact = normalized_coeffs(num, den)
        H = build_halley(Polynomial([-1, 0, 1]), 0.5)
        assert H.degree == 3
        assert_map_equals(H, n_exact, d_exact)

    @pytest.mark.parametrize("sigma", [0.25, 1.0, 2 - 1j])
    def test_against_sympy(self, sigma):
        P = sym_poly_from_roots([(1, 2), ("-1/2+I", 1), (2, 1)])
        num, den = exact_halley(P, sigma)
        n_exact, d_exact = normalized_coeffs(num, den)
        p = Polynomial([complex(x) for x in reversed(P.all_coeffs())])
        H = build_halley(p, sigma)
        assert H.degree == max(num.degree(), den.degree())
        assert_map_equals(H, n_exact, d_exact, rtol=1e-8)


def conjugacy_error(p: Polynomial, T: AffineMap, sigma, pts) -> float:
    H = build_halley(p, sigma)
    G = build_halley(p.compose_affine(T.alpha, T.beta), sigma)
    Tinv = T.inverse()
    return max(spherical(T(apply(G, Tinv(w))) if not is_infinite(apply(G, Tinv(w))) else INF, apply(H, w))
               for w in pts)


class TestScaling:
    @pytest.mark.parametrize("sigma", [0, 0.5, 1 + 1j])
    def test_conjugacy_identity(self, sigma):
        rng = np.random.default_rng(11)
        p = random_structured_poly(rng)
        T = AffineMap(complex(0.7, -1.1), complex(2, 0.5))
        assert conjugacy_error(p, T, sigma, sample_points(100, rng=rng)) < 1e-8


class TestApply:
    def test_pole_at_zero(self):
        assert is_infinite(apply(build_chebyshev(Z3), 0))

    def test_infinity_fixed(self):
        assert is_infinite(apply(build_chebyshev(Z3), INF))

    def test_root_fixed(self):
        assert abs(apply(build_chebyshev(Z3), 1) - 1) < 1e-14

    def test_reciprocal_chart(self):
        R = build_chebyshev(DOUBLE)
        w = 1e9 + 3e8j
        assert abs(apply(R, w) / (5 * w / 9) - 1) < 1e-8

    def test_indeterminate(self):
        R = RationalMap(Polynomial([-1, 1]), Polynomial([-1, 1]))
        with pytest.raises(Indeterminate):
            apply(R, 1.0)

    def test_json_roundtrip(self):
        R = build_chebyshev(DOUBLE)
        S = RationalMap.from_json(R.to_json())
        assert S.num.allclose(R.num, 0) and S.den.allclose(R.den, 0) and S.lead_ratio == R.lead_ratio


class TestLocalDegree:
    def test_simple_root_third_order(self):
        assert local_degree(build_chebyshev(Z3), 1) == 3

    def test_generic_point(self):
        assert local_degree(build_chebyshev(Z3), 0.3 + 0.7j) == 1

    def test_pole_of_order_five(self):
        assert local_degree(build_chebyshev(Z3), 0) == 5

    def test_infinity(self):
        assert local_degree(build_chebyshev(Z3), INF) == 1

    def test_critical_count_riemann_hurwitz(self):
        for p in (Z3, DOUBLE, Polynomial([11, 3, 0, 1])):
            R = build_chebyshev(p)
            total = sum(m for _, m in critical_points(R, build_chebyshev_derivative(p)))
            assert total == 2 * R.degree - 2


class TestProperties:
    def test_roots_are_fixed(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            p = random_structured_poly(rng)
            R = build_chebyshev(p)
            for rc in roots(p):
                w = apply(R, rc.location)
                assert abs(w - rc.location) <= 1e-9 * max(1.0, abs(rc.location))

    @given(st.integers(0, 10_000))
    def test_scaling_theorem_random(self, seed):
        rng = np.random.default_rng(seed)
        p = random_structured_poly(rng)
        alpha = complex(*rng.uniform(-2, 2, 2))
        if abs(alpha) < 0.2:
            alpha = 1 + alpha
        T = AffineMap(alpha, complex(*rng.uniform(-2, 2, 2)))
        assert conjugacy_error(p, T, 0, sample_points(100, rng=rng)) < 1e-8

    @given(st.integers(0, 10_000))
    def test_derivative_identity_random(self, seed):
        rng = np.random.default_rng(seed)
        p = random_structured_poly(rng)
        R, dR = build_chebyshev(p), build_chebyshev_derivative(p)
        w = sample_points(100, rng=rng)
        a, b = R.quotient_rule_derivative(w), dR(w)
        assert np.max(np.abs(a - b) / np.abs(a)) < 1e-9

    @given(st.integers(0, 10_000))
    def test_halley_zero_is_chebyshev(self, seed):
        p = random_structured_poly(np.random.default_rng(seed))
        n1, d1 = monic(build_halley(p, 0))
        n2, d2 = monic(build_chebyshev(p))
        assert cx_close(n1, n2) and cx_close(d1, d2)

    def test_degree_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = random_structured_poly(rng)
            assert 1 <= build_chebyshev(p).degree <= 3 * p.degree - 2
            assert math.isfinite(build_chebyshev(p).reduction_residual)
