import cmath
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from chebdyn.errors import DegenerateInput, NonConvergence
from chebdyn.poly import (
    AffineMap,
    Polynomial,
    derivative,
    evaluate,
    gcd_roots,
    normalize_monic_centered,
    principal_root,
    reconstruct,
    roots,
)
from oracles import mp_real_root_bisect, z as Z

from conftest import cx_close

CUBIC_11 = Polynomial([11, 3, 0, 1])
DOUBLE = Polynomial.from_roots([(1, 2), (-2, 1)])


class TestPolynomialType:
    def test_trailing_zeros_trimmed(self):
        p = Polynomial([1, 2, 0, 0])
        assert p.degree == 1 and p.lead == 2

    def test_zero_polynomial_flagged(self):
        p = Polynomial([0, 0])
        assert p.is_zero and p.degree == -1

    def test_immutable(self):
        p = Polynomial([1, 2])
        with pytest.raises(AttributeError):
            p.coeffs = np.array([3])
        with pytest.raises(ValueError):
            p.coeffs[0] = 5

    def test_json_roundtrip(self):
        p = Polynomial([1 + 2j, -3, 0.5j])
        assert Polynomial.from_json(p.to_json()).allclose(p, 0)

    def test_from_roots_expands(self):
        assert DOUBLE.allclose(Polynomial([2, -3, 0, 1]), 0)

    def test_roots_reject_constant(self):
        with pytest.raises(DegenerateInput):
            roots(Polynomial([3]))


class TestEval:
    def test_constant_term(self):
        assert evaluate(CUBIC_11, 0) == 11

    def test_known_root(self):
        assert evaluate(Polynomial([-1, 0, 0, 1]), 1) == 0

    def test_double_root_example(self):
        assert evaluate(DOUBLE, -2) == 0

    def test_vectorised(self):
        assert np.allclose(CUBIC_11(np.array([0, 1, -1])), [11, 15, 7])


class TestDerivative:
    def test_depressed_cubic(self):
        a, b = 2 - 1j, 5
        assert derivative(Polynomial([b, a, 0, 1])).allclose(Polynomial([a, 0, 3]), 0)

    def test_constant_gives_zero(self):
        assert derivative(Polynomial([7])).is_zero

    def test_second_derivative(self):
        assert CUBIC_11.derivative(2).allclose(Polynomial([0, 6]), 0)

    @given(st.lists(st.integers(-50, 50), min_size=1, max_size=9),
           st.lists(st.integers(-50, 50), min_size=1, max_size=9))
    def test_linear_exactly(self, a, b):
        p, q = Polynomial(a), Polynomial(b)
        lhs = derivative(p + q)
        rhs = derivative(p) + derivative(q)
        assert np.array_equal(lhs.coeffs, rhs.coeffs)


class TestRoots:
    def test_double_root(self):
        rc = roots(DOUBLE)
        got = sorted((round(r.location.real, 9), r.multiplicity) for r in rc)
        assert got == [(-2.0, 1), (1.0, 2)]

    def test_cube_roots_of_unity(self):
        rc = roots(Polynomial([-1, 0, 0, 1]))
        assert [r.multiplicity for r in rc] == [1, 1, 1]
        expected = [cmath.exp(2j * math.pi * k / 3) for k in range(3)]
        for e in expected:
            assert min(abs(r.location - e) for r in rc) < 1e-12

    def test_real_root_of_cubic_against_bisection(self):
        oracle = float(mp_real_root_bisect(lambda x: x**3 + 3 * x + 11, -2, -1))
        rc = roots(CUBIC_11)
        real = [r for r in rc if abs(r.location.imag) < 1e-12]
        pair = [r for r in rc if abs(r.location.imag) >= 1e-12]
        assert len(real) == 1 and -2 < real[0].location.real < -1
        assert abs(real[0].location.real - oracle) < 1e-12
        assert len(pair) == 2 and abs(pair[0].location - pair[1].location.conjugate()) < 1e-12

    def test_high_multiplicity(self):
        p = Polynomial.from_roots([(0.5 + 0.5j, 4), (-1, 2)])
        rc = roots(p)
        assert sorted(r.multiplicity for r in rc) == [2, 4]

    def test_zero_root_split_off(self):
        p = Polynomial.from_roots([(0, 3), (2, 1)])
        rc = roots(p)
        assert {(round(r.location.real, 9), r.multiplicity) for r in rc} == {(0.0, 3), (2.0, 1)}

    def test_nonconvergence_on_tiny_budget(self):
        p = Polynomial.from_roots([(k + 0.3j * k, 1) for k in range(1, 9)])
        with pytest.raises(NonConvergence):
            roots(p, sweeps=1)

    @given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(1, 3)),
                    min_size=1, max_size=4, unique_by=lambda t: (t[0], t[1])),
           st.integers(1, 5))
    def test_reconstruction_and_multiplicity_sum(self, spec, lead):
        spec = [(complex(a, b) / 2, k) for a, b, k in spec]
        if sum(k for _, k in spec) > 8:
            spec = spec[:2]
        p = Polynomial.from_roots(spec, lead)
        if p.degree < 1:
            return
        rc = roots(p)
        assert sum(r.multiplicity for r in rc) == p.degree
        q = reconstruct(rc, p.lead)
        scale = np.max(np.abs(p.coeffs))
        assert np.max(np.abs(q.coeffs - p.coeffs)) <= 1e-6 * scale

    @given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                    min_size=3, max_size=9))
    def test_random_coefficients(self, coeffs):
        p = Polynomial(coeffs)
        if p.degree < 1 or abs(p.lead) < 1e-3:
            return
        rc = roots(p)
        assert sum(r.multiplicity for r in rc) == p.degree
        q = reconstruct(rc, p.lead)
        assert np.max(np.abs(q.coeffs - p.coeffs)) <= 1e-6 * max(1.0, np.max(np.abs(p.coeffs)))


class TestAffine:
    @given(st.complex_numbers(min_magnitude=1e-2, max_magnitude=1e2, allow_nan=False, allow_infinity=False),
           st.complex_numbers(max_magnitude=1e2, allow_nan=False, allow_infinity=False))
    def test_inverse(self, a, b):
        T = AffineMap(a, b)
        I = T.compose(T.inverse())
        for w in (0.3, -2 + 1j, 7j):
            assert abs(I(w) - w) <= 1e-12 * max(1.0, abs(w)) * max(1.0, abs(b) / abs(a))

    def test_rejects_zero_alpha(self):
        with pytest.raises(ValueError):
            AffineMap(0, 1)


class TestNormalize:
    def test_already_normalized(self):
        q, T = normalize_monic_centered(CUBIC_11)
        assert q.allclose(CUBIC_11, 1e-14)
        assert T.alpha == 1 and T.beta == 0

    def test_scaled_cubic_against_expansion(self):
        p = Polynomial([0, 0, 6, 2])  # 2z^3 + 6z^2
        q, T = normalize_monic_centered(p)
        assert abs(T.alpha**3 - 0.5) < 1e-14 and abs(T.beta + 1) < 1e-14
        assert abs(cmath.phase(T.alpha)) <= math.pi / 3
        # sympy: (p o T)/(2 alpha^3) with alpha^3 = 1/2, beta = -1
        a = sp.Rational(1, 2) ** sp.Rational(1, 3)
        expr = sp.expand((2 * (a * Z - 1) ** 3 + 6 * (a * Z - 1) ** 2) / (2 * a**3))
        exact = [complex(sp.N(expr.coeff(Z, k))) for k in range(4)]
        assert cx_close(q.coeffs, exact, atol=1e-12)
        assert abs(q.coeffs[2]) < 1e-10

    def test_translated_unicritical(self):
        a, beta = 0.7 - 0.2j, 2.0 * cmath.exp(0.4j)
        p = Polynomial.from_roots([(a, 3)]) + beta
        q, _ = normalize_monic_centered(p)
        assert np.allclose(q.coeffs[1:], [0, 0, 1], atol=1e-12)
        assert abs(abs(q.coeffs[0]) - abs(beta)) < 1e-12

    def test_principal_root_branch(self):
        for w in (-1, 1j, -8, 3 - 4j):
            for d in (2, 3, 5):
                r = principal_root(w, d)
                assert abs(r**d - w) < 1e-12 * abs(w)
                assert -math.pi / d < cmath.phase(r) <= math.pi / d + 1e-15

    @given(st.lists(st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False),
                    min_size=3, max_size=7),
           st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
    def test_invariants(self, body, lead):
        p = Polynomial(list(body) + [lead])
        q, _ = normalize_monic_centered(p)
        assert abs(q.lead - 1) < 1e-12
        assert abs(q.coeffs[q.degree - 1]) < 1e-10 * max(1.0, np.max(np.abs(p.coeffs)) / abs(lead))


class TestGcdRoots:
    def test_coprime(self):
        assert gcd_roots(Polynomial([-1, 1]), Polynomial([1, 1])) == []

    def test_shared_simple_root(self):
        common = gcd_roots(Polynomial([-1, 0, 1]), Polynomial.from_roots([(1, 2)]))
        assert len(common) == 1
        assert abs(common[0].location - 1) < 1e-9 and common[0].multiplicity == 1

    def test_unreduced_chebyshev_of_z3_minus_1(self):
        from chebdyn.chebyshev import unreduced_chebyshev

        num, den = unreduced_chebyshev(Polynomial([-1, 0, 0, 1]))
        common = gcd_roots(num, den)
        cancelled = sum(r.multiplicity for r in common)
        assert max(num.degree - cancelled, den.degree - cancelled) == 6

    def test_rejects_zero(self):
        with pytest.raises(DegenerateInput):
            gcd_roots(Polynomial([0]), Polynomial([1, 1]))
