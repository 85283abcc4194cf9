"""Tests for the sparse exact-rational polynomial core."""

import random
from fractions import Fraction

import pytest

from jetdiff.poly import (
    SparsePolynomial,
    base_var,
    jet_var,
    mono_degree,
    mono_from_pairs,
    mono_mul,
    mono_pow,
    mono_sort_key,
    param_var,
    poly_sum,
)

from helpers import random_poly, rational

X = base_var(1)
Y = base_var(2)


def var(v):
    return SparsePolynomial.variable(v)


def test_zero_and_constants():
    z = SparsePolynomial.zero()
    assert z.is_zero()
    assert not z
    assert str(z) == "0"
    three = SparsePolynomial.constant(3)
    assert three.is_constant()
    assert three.constant_value() == 3
    assert (var(X) - var(X)).is_zero()
    assert SparsePolynomial.constant(Fraction(2, 4)).constant_value() == Fraction(1, 2)


def test_product_difference_of_squares():
    x = var(X)
    one = SparsePolynomial.constant(1)
    assert (x + one) * (x - one) == x ** 2 - one


def test_binomial_coefficients():
    x, y = var(X), var(Y)
    cube = (x + y) ** 3
    assert cube.coefficient(mono_from_pairs([(X, 2), (Y, 1)])) == 3
    assert cube.coefficient(mono_from_pairs([(X, 3)])) == 1
    assert cube.coefficient(mono_from_pairs([(X, 1), (Y, 1)])) == 0
    assert cube.total_degree() == 3


def test_pow_matches_repeated_multiplication():
    rng = random.Random(101)
    p = random_poly(rng, [X, Y], terms=3, max_exp=2)
    q = SparsePolynomial.constant(1)
    for n in range(5):
        assert p ** n == q
        q = q * p


def test_pow_rejects_negative_exponent():
    with pytest.raises(ValueError):
        var(X) ** -1


def test_ring_axioms_randomized():
    rng = random.Random(7)
    vars_ = [X, Y, jet_var(1, 1), jet_var(2, 2)]
    for _ in range(25):
        p = random_poly(rng, vars_, terms=3)
        q = random_poly(rng, vars_, terms=3)
        r = random_poly(rng, vars_, terms=3)
        assert p + q == q + p
        assert p * q == q * p
        assert (p + q) + r == p + (q + r)
        assert (p * q) * r == p * (q * r)
        assert p * (q + r) == p * q + p * r
        assert p - p == SparsePolynomial.zero()
        assert p * SparsePolynomial.zero() == SparsePolynomial.zero()


def test_scalar_coercion_both_sides():
    x = var(X)
    assert 2 * x == x * 2
    assert 1 + x == x + 1
    assert 3 - x == -(x - 3)
    assert Fraction(1, 2) * (x + x) == x


def test_substitute_swap_is_involutive():
    x, y = var(X), var(Y)
    p = x ** 2 + 2 * y
    swap = {X: y, Y: x}
    assert p.substitute(swap) == y ** 2 + 2 * x
    assert p.substitute(swap).substitute(swap) == p


def test_substitute_is_simultaneous():
    # x -> y, y -> x must not turn everything into x.
    x, y = var(X), var(Y)
    p = x * y ** 2
    assert p.substitute({X: y, Y: x}) == y * x ** 2


def test_substitute_composition_law():
    # Substituting in two stages agrees with substituting the composite,
    # for bindings whose values involve only later-stage variables.
    rng = random.Random(23)
    f1, f2 = jet_var(1, 1), jet_var(2, 1)
    a1, a2 = param_var(1), param_var(2)
    for _ in range(10):
        p = random_poly(rng, [f1, f2], terms=3)
        sigma = {
            f1: random_poly(rng, [X, Y], terms=2),
            f2: random_poly(rng, [X, Y], terms=2),
        }
        tau = {
            X: random_poly(rng, [a1, a2], terms=2),
            Y: random_poly(rng, [a1, a2], terms=2),
        }
        composite = {v: s.substitute(tau) for v, s in sigma.items()}
        assert p.substitute(sigma).substitute(tau) == p.substitute(composite)


def test_substitute_constants_matches_evaluate():
    rng = random.Random(31)
    for _ in range(10):
        p = random_poly(rng, [X, Y], terms=4)
        vals = {X: rational(rng), Y: rational(rng)}
        subbed = p.substitute({v: SparsePolynomial.constant(c) for v, c in vals.items()})
        assert subbed.is_constant()
        assert subbed.constant_value() == p.evaluate(vals)


def test_collect_reconstructs_polynomial():
    rng = random.Random(43)
    f1 = jet_var(1, 1)
    f2 = jet_var(1, 2)
    for _ in range(10):
        p = random_poly(rng, [f1, f2, X], terms=5)
        grouped = p.collect([f1, f2])
        rebuilt = SparsePolynomial.zero()
        for mono, cofactor in grouped.items():
            for v in cofactor.variables():
                assert v not in (f1, f2)
            rebuilt = rebuilt + SparsePolynomial.monomial(mono) * cofactor
        assert rebuilt == p


def test_derivative_power_rule():
    x = var(X)
    assert (x ** 5).derivative(X) == 5 * x ** 4
    assert SparsePolynomial.constant(7).derivative(X).is_zero()
    assert var(Y).derivative(X).is_zero()


def test_derivative_product_rule_randomized():
    rng = random.Random(59)
    for _ in range(10):
        p = random_poly(rng, [X, Y], terms=3)
        q = random_poly(rng, [X, Y], terms=3)
        lhs = (p * q).derivative(X)
        rhs = p.derivative(X) * q + p * q.derivative(X)
        assert lhs == rhs


def test_monomial_helpers():
    m1 = mono_from_pairs([(X, 1), (Y, 2)])
    m2 = mono_from_pairs([(Y, 1)])
    assert mono_mul(m1, m2) == mono_from_pairs([(X, 1), (Y, 3)])
    assert mono_pow(m2, 4) == mono_from_pairs([(Y, 4)])
    assert mono_degree(m1) == 3
    assert mono_degree(()) == 0


def test_canonical_term_order():
    # Graded lexicographic, highest degree first: x^2, x*y, y^2, x, 1.
    x, y = var(X), var(Y)
    p = 1 + x + y ** 2 + x * y + x ** 2
    monos = [m for m, _ in p.sorted_terms()]
    assert monos == sorted(monos, key=mono_sort_key)
    degrees = [mono_degree(m) for m in monos]
    assert degrees == sorted(degrees, reverse=True)
    assert monos[0] == mono_from_pairs([(X, 2)])
    assert monos[-1] == ()


def test_string_rendering():
    f1p = var(jet_var(1, 1))
    f2p = var(jet_var(2, 1))
    f1pp = var(jet_var(1, 2))
    f2pp = var(jet_var(2, 2))
    wronskian = f1p * f2pp - f2p * f1pp
    assert str(wronskian) == "f1'*f2'' - f2'*f1''"
    assert str(f1p ** 3 + Fraction(2, 3) * f2p ** 3) == "f1'^3 + 2/3*f2'^3"
    assert str(-var(X) + 1) == "-z1 + 1"
    assert str(var(param_var(2)) * 2) == "2*a2"


def test_poly_sum_matches_loop():
    rng = random.Random(61)
    polys = [random_poly(rng, [X, Y], terms=2) for _ in range(6)]
    total = SparsePolynomial.zero()
    for p in polys:
        total = total + p
    assert poly_sum(polys) == total
    assert poly_sum([]).is_zero()
