"""Text grammar for polynomials, coordinate changes and reparametrizations.

One small recursive-descent parser serves three surface syntaxes:

    jet polynomials       "f1'*f2'' - f2'*f1''", "f1'^3 + 2/3*f2'^3"
    coordinate changes    "w1 = z1; w2 = z2 + z1^2"
    reparametrizations    "t + t^2", "2t - t^3"

Operators are +, -, *, ^ and parentheses; rational literals are written
p/q (the slash only joins two integer literals, there is no general
division).  Juxtaposition multiplies, so "2t" works.  The printed form of
any polynomial in this package re-parses to the same polynomial.

Errors carry 1-based line and column positions.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from .jets import JetSpec, ReparamJet, TargetMap
from .poly import SparsePolynomial, Variable, base_var, jet_var, param_var

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+)
  | (?P<ident>[A-Za-z]+\d*'*)
  | (?P<op>[-+*^=;()/,])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    """Syntax or validation error with a 1-based source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class _Token:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind: str, text: str, line: int, column: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# An identifier resolver turns an identifier token into a polynomial; each
# surface syntax installs its own (jet variables, base coordinates, or t).
Resolver = Callable[[_Token], SparsePolynomial]


class _Parser:
    def __init__(self, tokens: List[_Token], resolver: Resolver):
        self.tokens = tokens
        self.pos = 0
        self.resolver = resolver

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok.text or 'end of input'!r}", tok.line, tok.column)
        return self.advance()

    def parse_sum(self) -> SparsePolynomial:
        tok = self.peek()
        negate = False
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            negate = tok.text == "-"
        total = self.parse_product()
        if negate:
            total = -total
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.advance()
                term = self.parse_product()
                total = total + (-term if tok.text == "-" else term)
            else:
                return total

    def parse_product(self) -> SparsePolynomial:
        total = self.parse_power()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text == "*":
                self.advance()
                total = total * self.parse_power()
            elif tok.kind in ("number", "ident") or (tok.kind == "op" and tok.text == "("):
                # juxtaposition: "2t", "3(x + y)"
                total = total * self.parse_power()
            else:
                return total

    def parse_power(self) -> SparsePolynomial:
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exp_tok = self.expect("number")
            return base ** int(exp_tok.text)
        return base

    def parse_atom(self) -> SparsePolynomial:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "/":
                self.advance()
                den = self.expect("number")
                if int(den.text) == 0:
                    raise ParseError("zero denominator", den.line, den.column)
                return SparsePolynomial.constant(Fraction(int(tok.text), int(den.text)))
            return SparsePolynomial.constant(int(tok.text))
        if tok.kind == "ident":
            self.advance()
            return self.resolver(tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.parse_sum()
            self.expect("op", ")")
            return inner
        raise ParseError(
            f"expected a term, found {tok.text or 'end of input'!r}", tok.line, tok.column
        )

    def parse_full(self) -> SparsePolynomial:
        result = self.parse_sum()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected trailing {tok.text!r}", tok.line, tok.column)
        return result


_IDENT_RE = re.compile(r"([A-Za-z]+)(\d*)('*)$")


def _split_ident(tok: _Token) -> Tuple[str, Optional[int], int]:
    m = _IDENT_RE.match(tok.text)
    letters, digits, primes = m.group(1), m.group(2), m.group(3)
    return letters, (int(digits) if digits else None), len(primes)


def _jet_resolver(spec: JetSpec) -> Resolver:
    def resolve(tok: _Token) -> SparsePolynomial:
        letters, index, primes = _split_ident(tok)
        if letters == "f":
            if index is None or index < 1 or index > spec.rank:
                raise ParseError(
                    f"component index of {tok.text!r} must be 1..{spec.rank}",
                    tok.line,
                    tok.column,
                )
            if primes == 0:
                raise ParseError(
                    f"{tok.text!r} has no derivative primes; jet variables are f{index}', f{index}'', ...",
                    tok.line,
                    tok.column,
                )
            if primes > spec.order:
                raise ParseError(
                    f"derivative order {primes} of {tok.text!r} exceeds the jet order {spec.order}",
                    tok.line,
                    tok.column,
                )
            return SparsePolynomial.variable(jet_var(index, primes))
        if letters == "z":
            if primes:
                raise ParseError(
                    f"base coordinate {tok.text!r} cannot carry primes", tok.line, tok.column
                )
            if index is None or index < 1 or index > spec.rank:
                raise ParseError(
                    f"coordinate index of {tok.text!r} must be 1..{spec.rank}",
                    tok.line,
                    tok.column,
                )
            return SparsePolynomial.variable(base_var(index))
        if letters == "a":
            if primes:
                raise ParseError(
                    f"parameter {tok.text!r} cannot carry primes", tok.line, tok.column
                )
            if index is None or index < 1:
                raise ParseError(
                    f"parameter index of {tok.text!r} must be >= 1", tok.line, tok.column
                )
            return SparsePolynomial.variable(param_var(index))
        raise ParseError(f"unknown variable {tok.text!r}", tok.line, tok.column)

    return resolve


def _base_resolver(rank: int) -> Resolver:
    def resolve(tok: _Token) -> SparsePolynomial:
        letters, index, primes = _split_ident(tok)
        if letters != "z" or primes:
            raise ParseError(
                f"only base coordinates z1..z{rank} may appear here, found {tok.text!r}",
                tok.line,
                tok.column,
            )
        if index is None or index < 1 or index > rank:
            raise ParseError(
                f"coordinate index of {tok.text!r} must be 1..{rank}", tok.line, tok.column
            )
        return SparsePolynomial.variable(base_var(index))

    return resolve


def _t_resolver(tok: _Token) -> SparsePolynomial:
    letters, index, primes = _split_ident(tok)
    if letters != "t" or index is not None or primes:
        raise ParseError(
            f"only the parameter t may appear here, found {tok.text!r}", tok.line, tok.column
        )
    # reuse base component 1 as the series variable; extracted immediately
    return SparsePolynomial.variable(base_var(1))


def parse_polynomial(text: str, spec: JetSpec) -> SparsePolynomial:
    """Parse a jet polynomial against a shape.

    Base coordinates z1..zr and formal parameters a1, a2, ... may appear
    alongside the jet variables, so every printed polynomial re-parses.
    """
    parser = _Parser(_tokenize(text), _jet_resolver(spec))
    return parser.parse_full()


def parse_map(text: str, rank: int, order: int, truncate: bool = True) -> TargetMap:
    """Parse "w1 = ...; w2 = ..." into a TargetMap.

    Every component w1..w<rank> must be assigned exactly once; components
    are truncated beyond total degree order+1 (the jets extracted at the
    expansion origin cannot see higher terms).  Pass truncate=False for
    chart-level consumers that evaluate derivatives away from the origin.
    """
    tokens = _tokenize(text)
    components: dict = {}
    pos = 0
    while tokens[pos].kind != "eof":
        tok = tokens[pos]
        if tok.kind != "ident":
            raise ParseError(
                f"expected a component w1..w{rank}, found {tok.text or 'end of input'!r}",
                tok.line,
                tok.column,
            )
        letters, index, primes = _split_ident(tok)
        if letters != "w" or primes or index is None or index < 1 or index > rank:
            raise ParseError(
                f"expected a component w1..w{rank}, found {tok.text!r}", tok.line, tok.column
            )
        if index in components:
            raise ParseError(f"component w{index} assigned twice", tok.line, tok.column)
        pos += 1
        eq = tokens[pos]
        if eq.kind != "op" or eq.text != "=":
            raise ParseError(f"expected '=' after w{index}", eq.line, eq.column)
        pos += 1
        # find the end of this component: the next ';' at depth 0, or eof
        end = pos
        depth = 0
        while tokens[end].kind != "eof":
            t = tokens[end]
            if t.kind == "op" and t.text == "(":
                depth += 1
            elif t.kind == "op" and t.text == ")":
                depth -= 1
            elif t.kind == "op" and t.text == ";" and depth == 0:
                break
            end += 1
        sub = tokens[pos:end] + [tokens[-1]]
        parser = _Parser(sub, _base_resolver(rank))
        components[index] = parser.parse_sum()
        tail = parser.peek()
        if tail.kind != "eof":
            raise ParseError(f"unexpected trailing {tail.text!r}", tail.line, tail.column)
        pos = end
        if tokens[pos].kind != "eof":
            pos += 1  # skip the ';'
    missing = [j for j in range(1, rank + 1) if j not in components]
    if missing:
        raise ParseError(
            "missing component" + ("s" if len(missing) > 1 else "") + " "
            + ", ".join(f"w{j}" for j in missing),
            tokens[-1].line,
            tokens[-1].column,
        )
    return TargetMap(rank, order, [components[j] for j in range(1, rank + 1)], truncate=truncate)


def parse_reparam(text: str, order: int) -> ReparamJet:
    """Parse a reparametrization like "t + t^2" or "2t - t^3".

    The expression must be a polynomial in t with zero constant term,
    nonzero linear coefficient, and degree at most the jet order.
    """
    parser = _Parser(_tokenize(text), _t_resolver)
    poly = parser.parse_full()
    coeffs = [Fraction(0)] * order
    for mono, coeff in poly.terms.items():
        if not mono:
            raise ParseError("reparametrization must have zero constant term", 1, 1)
        (v, e), = mono  # single-variable monomials only; resolver guarantees it
        if e > order:
            raise ParseError(
                f"degree {e} exceeds the jet order {order}", 1, 1
            )
        coeffs[e - 1] = coeff
    if coeffs[0] == 0:
        raise ParseError("linear coefficient a1 must be nonzero", 1, 1)
    return ReparamJet(order, coeffs)
