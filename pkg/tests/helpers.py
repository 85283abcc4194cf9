"""Shared constructors for the test suite.

Everything here is driven by an explicit random.Random instance passed in
by the caller, so each test file controls its own seed and the suite stays
deterministic.
"""

from fractions import Fraction

from jetdiff.jets import JetPoint, JetSpec, ReparamJet, TargetMap
from jetdiff.linalg import dense_rank
from jetdiff.poly import SparsePolynomial, base_var


def rational(rng, lo=-5, hi=5, max_den=3):
    """A random Fraction with numerator in [lo, hi] and denominator in [1, max_den]."""
    return Fraction(rng.randint(lo, hi), rng.randint(1, max_den))


def nonzero_rational(rng, lo=-5, hi=5, max_den=3):
    while True:
        q = rational(rng, lo, hi, max_den)
        if q:
            return q


def random_poly(rng, variables, terms=4, max_exp=3, lo=-5, hi=5):
    """A random sparse polynomial in the given variables (possibly zero)."""
    p = SparsePolynomial.zero()
    for _ in range(terms):
        mono = SparsePolynomial.constant(1)
        for v in rng.sample(list(variables), k=rng.randint(1, min(2, len(variables)))):
            mono = mono * SparsePolynomial.variable(v) ** rng.randint(1, max_exp)
        p = p + mono * rational(rng, lo, hi)
    return p


def random_reparam(rng, order):
    coeffs = [nonzero_rational(rng)] + [rational(rng) for _ in range(order - 1)]
    return ReparamJet(order, coeffs)


def random_jet(rng, spec):
    entries = [
        [rational(rng) for _ in range(spec.rank)] for _ in range(spec.order)
    ]
    return JetPoint(spec, entries)


def random_invertible(rng, n, lo=-4, hi=4, max_den=2):
    """A random n-by-n matrix of Fractions with full rank."""
    while True:
        rows = [[rational(rng, lo, hi, max_den) for _ in range(n)] for _ in range(n)]
        if dense_rank(rows) == n:
            return rows


def random_target_map(rng, rank, order, degree=2, points=((0, 0),)):
    """A random polynomial coordinate change whose Jacobian is invertible.

    The Jacobian is checked at every point in `points`; candidates failing
    the check are resampled.  Components have degree at most `degree`.
    """
    zs = [base_var(j) for j in range(1, rank + 1)]
    while True:
        comps = []
        for _ in range(rank):
            p = SparsePolynomial.zero()
            for z in zs:
                p = p + SparsePolynomial.variable(z) * rational(rng, -3, 3, 1)
            if degree >= 2:
                for a in range(rank):
                    for b in range(a, rank):
                        q = SparsePolynomial.variable(zs[a]) * SparsePolynomial.variable(zs[b])
                        p = p + q * rational(rng, -2, 2, 1)
            if degree >= 3:
                for z in zs:
                    p = p + SparsePolynomial.variable(z) ** 3 * rational(rng, -2, 2, 1)
            comps.append(p)
        psi = TargetMap(rank, order, comps, truncate=False)
        if all(dense_rank(psi.jacobian(pt)) == rank for pt in points):
            return psi
