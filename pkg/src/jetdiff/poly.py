"""Exact sparse multivariate polynomials over the rationals.

Everything downstream (jet actions, constraint systems, transition matrices)
is built on the arithmetic in this module, so the conventions here are the
load-bearing ones.

Three kinds of variables occur:

    base coordinates   z1, z2, ...    coordinates on the target chart
    jet variables      fj with i primes, the raw i-th derivative of curve
                       component j at 0 (not the Taylor coefficient)
    formal parameters  a1, a2, ...    coefficients of a formal
                       reparametrization t -> a1*t + a2*t^2 + ...

The global variable order is: base coordinates by component, then jet
variables by (derivative order, component), then parameters by index.
Monomials are compared gradedly (total degree first) and then
lexicographically in that variable order, with larger powers of earlier
variables winning.  "Canonical order" always means decreasing in this
comparison; every printed term sequence, matrix column order and golden
file uses it, which is what makes serialized output byte-stable.

Representation: a polynomial holds a dict mapping monomials to nonzero
Fraction coefficients.  A monomial is a tuple of (variable, exponent)
pairs sorted by variable, every exponent positive; the empty tuple is the
constant monomial.  Coefficients are `fractions.Fraction`, so all results
are exact and already in lowest terms.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, NamedTuple, Tuple, Union

Rational = Fraction

# variable kinds, in global sort order
BASE = 0
JET = 1
PARAM = 2

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Variable(NamedTuple):
    """A variable token.

    The field order (kind, order, comp) is chosen so that plain tuple
    comparison implements the global variable order directly.
    """

    kind: int
    order: int  # derivative order for JET, parameter index for PARAM, 0 for BASE
    comp: int   # component index for BASE and JET, 0 for PARAM

    @property
    def name(self) -> str:
        if self.kind == BASE:
            return f"z{self.comp}"
        if self.kind == JET:
            return f"f{self.comp}" + "'" * self.order
        return f"a{self.order}"


def base_var(comp: int) -> Variable:
    if comp < 1:
        raise ValueError(f"base coordinate index must be >= 1, got {comp}")
    return Variable(BASE, 0, comp)


def jet_var(comp: int, order: int) -> Variable:
    """The jet variable for derivative `order` of curve component `comp`."""
    if comp < 1 or order < 1:
        raise ValueError(f"jet variable needs comp >= 1 and order >= 1, got ({comp}, {order})")
    return Variable(JET, order, comp)


def param_var(index: int) -> Variable:
    """Formal reparametrization coefficient a_index (index >= 1)."""
    if index < 1:
        raise ValueError(f"parameter index must be >= 1, got {index}")
    return Variable(PARAM, index, 0)


# A monomial: ((variable, exponent), ...) sorted by variable, exponents > 0.
Monomial = Tuple[Tuple[Variable, int], ...]

MONO_ONE: Monomial = ()


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    """Merge two sorted monomials, adding exponents of shared variables."""
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def mono_pow(m: Monomial, n: int) -> Monomial:
    if n == 0:
        return MONO_ONE
    return tuple((v, e * n) for v, e in m)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_sort_key(m: Monomial):
    """Sort key such that ascending order is the canonical decreasing order.

    Total degree first; ties broken lexicographically with larger powers of
    earlier variables first.  Negating exponents makes plain tuple
    comparison do the lex part.
    """
    return (-mono_degree(m), tuple((v, -e) for v, e in m))


def mono_from_pairs(pairs: Iterable[Tuple[Variable, int]]) -> Monomial:
    """Build a canonical monomial from unordered (variable, exponent) pairs."""
    acc: Dict[Variable, int] = {}
    for v, e in pairs:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted((v, e) for v, e in acc.items() if e))


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    parts = []
    for v, e in m:
        parts.append(v.name if e == 1 else f"{v.name}^{e}")
    return "*".join(parts)


Scalar = Union[int, Fraction]
PolyLike = Union["SparsePolynomial", int, Fraction]


class SparsePolynomial:
    """A sparse polynomial with Fraction coefficients.

    The term dict is treated as immutable after construction; arithmetic
    always returns fresh objects.  The constructor trusts its input to be
    canonical (no zero coefficients, monomials sorted), which all internal
    call sites guarantee; external code should use the classmethods.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Monomial, Fraction]):
        self.terms = terms

    # ---- constructors ----

    @classmethod
    def zero(cls) -> "SparsePolynomial":
        return cls({})

    @classmethod
    def constant(cls, value: Scalar) -> "SparsePolynomial":
        c = Fraction(value)
        return cls({MONO_ONE: c} if c else {})

    @classmethod
    def variable(cls, v: Variable) -> "SparsePolynomial":
        return cls({((v, 1),): _ONE})

    @classmethod
    def monomial(cls, m: Monomial, coeff: Scalar = 1) -> "SparsePolynomial":
        c = Fraction(coeff)
        return cls({m: c} if c else {})

    # ---- predicates and views ----

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and MONO_ONE in self.terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial, raising otherwise."""
        if not self.terms:
            return _ZERO
        if self.is_constant():
            return self.terms[MONO_ONE]
        raise ValueError(f"polynomial is not constant: {self}")

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(m, _ZERO)

    def variables(self) -> frozenset:
        out = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return frozenset(out)

    def total_degree(self) -> int:
        """Total degree; 0 for the zero polynomial by convention."""
        if not self.terms:
            return 0
        return max(mono_degree(m) for m in self.terms)

    def sorted_terms(self):
        """Terms in canonical decreasing monomial order."""
        return sorted(self.terms.items(), key=lambda kv: mono_sort_key(kv[0]))

    # ---- arithmetic ----

    @staticmethod
    def _coerce(other: PolyLike):
        if isinstance(other, SparsePolynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return SparsePolynomial.constant(other)
        return None

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __ne__(self, other) -> bool:
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __add__(self, other: PolyLike) -> "SparsePolynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not o.terms:
            return self
        if not self.terms:
            return o
        out = dict(self.terms)
        for m, c in o.terms.items():
            s = out.get(m, _ZERO) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return SparsePolynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "SparsePolynomial":
        return SparsePolynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: PolyLike) -> "SparsePolynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: PolyLike) -> "SparsePolynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other: PolyLike) -> "SparsePolynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self.terms or not o.terms:
            return SparsePolynomial({})
        # scalar fast path
        if o.is_constant():
            c = o.terms[MONO_ONE]
            return SparsePolynomial({m: v * c for m, v in self.terms.items()})
        if self.is_constant():
            c = self.terms[MONO_ONE]
            return SparsePolynomial({m: v * c for m, v in o.terms.items()})
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = mono_mul(m1, m2)
                s = out.get(m, _ZERO) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return SparsePolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "SparsePolynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"polynomial power must be a nonnegative integer, got {n!r}")
        result = SparsePolynomial.constant(1)
        square = self
        while n:
            if n & 1:
                result = result * square
            n >>= 1
            if n:
                square = square * square
        return result

    # ---- structural operations ----

    def substitute(self, bindings: Mapping[Variable, PolyLike]) -> "SparsePolynomial":
        """Simultaneously replace variables by polynomials (or scalars).

        Unbound variables pass through unchanged.  The replacement is
        simultaneous: {x -> y, y -> x} swaps.
        """
        if not bindings or not self.terms:
            return self
        bound = {v: self._coerce(val) for v, val in bindings.items()}
        pow_cache: Dict[Tuple[Variable, int], SparsePolynomial] = {}
        total = SparsePolynomial({})
        for mono, coeff in self.terms.items():
            passthrough = []
            factor = None
            for v, e in mono:
                if v in bound:
                    p = pow_cache.get((v, e))
                    if p is None:
                        p = bound[v] ** e
                        pow_cache[(v, e)] = p
                    factor = p if factor is None else factor * p
                else:
                    passthrough.append((v, e))
            term = SparsePolynomial({tuple(passthrough): coeff})
            if factor is not None:
                term = term * factor
            total = total + term
        return total

    def derivative(self, v: Variable) -> "SparsePolynomial":
        """Formal partial derivative with respect to `v`."""
        out: Dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms.items():
            for idx, (w, e) in enumerate(mono):
                if w == v:
                    if e == 1:
                        new = mono[:idx] + mono[idx + 1:]
                    else:
                        new = mono[:idx] + ((w, e - 1),) + mono[idx + 1:]
                    s = out.get(new, _ZERO) + coeff * e
                    if s:
                        out[new] = s
                    else:
                        out.pop(new, None)
                    break
        return SparsePolynomial(out)

    def collect(self, variables: Iterable[Variable]) -> Dict[Monomial, "SparsePolynomial"]:
        """Group terms by their monomial in `variables`.

        Returns a dict from monomials (in the collected variables only) to
        the cofactor polynomials in the remaining variables.  Summing
        key * value over the result reconstructs the polynomial.
        """
        vset = frozenset(variables)
        out: Dict[Monomial, SparsePolynomial] = {}
        for mono, coeff in self.terms.items():
            inside = tuple((v, e) for v, e in mono if v in vset)
            outside = tuple((v, e) for v, e in mono if v not in vset)
            bucket = out.get(inside)
            if bucket is None:
                out[inside] = SparsePolynomial({outside: coeff})
            else:
                out[inside] = bucket + SparsePolynomial({outside: coeff})
        return {m: p for m, p in out.items() if p}

    def evaluate(self, values: Mapping[Variable, Scalar]) -> Fraction:
        """Fully evaluate at rational values; raises if variables remain."""
        return self.substitute(values).constant_value()

    # ---- display ----

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        chunks = []
        for i, (mono, coeff) in enumerate(self.sorted_terms()):
            mag = coeff if coeff > 0 else -coeff
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono_str(mono)
            else:
                body = f"{mag}*{mono_str(mono)}"
            if i == 0:
                chunks.append(body if coeff > 0 else f"-{body}")
            else:
                chunks.append(f" + {body}" if coeff > 0 else f" - {body}")
        return "".join(chunks)

    def __repr__(self) -> str:
        return f"SparsePolynomial({self})"


# Polynomials in jet variables (optionally with parameters and base
# coordinates mixed in) are the values the rest of the package passes around.
JetPolynomial = SparsePolynomial


def poly_sum(items: Iterable[PolyLike]) -> SparsePolynomial:
    total = SparsePolynomial.zero()
    for item in items:
        total = total + item
    return total
