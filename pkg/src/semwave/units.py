"""Dimensional analysis over the base units semantic inertia [m], distance [x], time [t].

Exponents are exact rationals, so every identity check is tolerance-free.

>>> check_identity("q^2", "E/x").holds
True
>>> dimension_of("charge")
Dimension(m=1/2, x=1/2, t=-1)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Union

from .errors import InvalidParameterError, UnknownQuantityError

Rational = Union[int, Fraction, str]


@dataclass(frozen=True)
class Dimension:
    m: Fraction = Fraction(0)
    x: Fraction = Fraction(0)
    t: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("m", "x", "t"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @property
    def exponents(self) -> tuple:
        return (self.m, self.x, self.t)

    def __mul__(self, other: "Dimension") -> "Dimension":
        return Dimension(self.m + other.m, self.x + other.x, self.t + other.t)

    def __truediv__(self, other: "Dimension") -> "Dimension":
        return Dimension(self.m - other.m, self.x - other.x, self.t - other.t)

    def __pow__(self, r: Rational) -> "Dimension":
        r = Fraction(r)
        return Dimension(self.m * r, self.x * r, self.t * r)

    def is_dimensionless(self) -> bool:
        return self == DIMENSIONLESS

    def __repr__(self) -> str:
        return f"Dimension(m={self.m}, x={self.x}, t={self.t})"

    def __str__(self) -> str:
        parts = [f"{b}^{e}" if e != 1 else b for b, e in zip("mxt", self.exponents) if e != 0]
        return "*".join(parts) or "1"


def dim_mul(a: Dimension, b: Dimension) -> Dimension:
    return a * b


def dim_div(a: Dimension, b: Dimension) -> Dimension:
    return a / b


def dim_pow(a: Dimension, r: Rational) -> Dimension:
    return a ** r


DIMENSIONLESS = Dimension()
MASS = Dimension(m=1)
LENGTH = Dimension(x=1)
TIME = Dimension(t=1)

CATALOG = {
    "mass": MASS,
    "length": LENGTH,
    "time": TIME,
    "velocity": Dimension(0, 1, -1),
    "energy": Dimension(1, 2, -2),
    "hbar": Dimension(1, 2, -1),
    "charge": Dimension(Fraction(1, 2), Fraction(1, 2), -1),
    "gauge_field": Dimension(Fraction(-1, 2), Fraction(-3, 2), 1),
    "momentum": Dimension(1, 1, -1),
    "action": Dimension(1, 2, -1),
    "frequency": Dimension(0, 0, -1),
}

ALIASES = {
    "m": "mass",
    "x": "length",
    "t": "time",
    "v": "velocity",
    "E": "energy",
    "q": "charge",
    "A": "gauge_field",
    "p": "momentum",
    "S": "action",
    "omega": "frequency",
}


def derive_catalog() -> dict:
    """Rebuild every catalog entry from [m], [x], [t] along the semantic-units chain."""
    velocity = LENGTH / TIME
    energy = MASS * velocity ** 2
    hbar = energy * TIME
    # [q][A] = [d_x] with [D_i] = sqrt(E/x^3) gives [q]/[x] = sqrt(E/x^3), hence [q]^2 = E/x
    charge = LENGTH * (energy / LENGTH ** 3) ** Fraction(1, 2)
    gauge_field = DIMENSIONLESS / (charge * LENGTH)
    return {
        "mass": MASS,
        "length": LENGTH,
        "time": TIME,
        "velocity": velocity,
        "energy": energy,
        "hbar": hbar,
        "charge": charge,
        "gauge_field": gauge_field,
        "momentum": MASS * velocity,
        "action": energy * TIME,
        "frequency": DIMENSIONLESS / TIME,
    }


def dimension_of(name: str) -> Dimension:
    key = ALIASES.get(name, name)
    try:
        return CATALOG[key]
    except KeyError:
        raise UnknownQuantityError(f"unknown quantity {name!r}; known: {sorted(CATALOG)}") from None


# -- expression grammar ------------------------------------------------------
# expr   := term (('*' | '/') term)*
# term   := factor ('^' power)?
# factor := NAME | INT | '(' expr ')' | 'sqrt' '(' expr ')'
# power  := ['-'] INT ['/' INT] | '(' ['-'] INT ['/' INT] ')'

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[*/^()\-]))")


def _tokenize(text: str) -> list:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise InvalidParameterError(f"unexpected character {text[pos]!r} at position {pos} in {text!r}")
        out.append((mt.lastgroup, mt.group(mt.lastgroup)))
        pos = mt.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            want = value or "more input"
            raise InvalidParameterError(f"expected {want!r} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> Dimension:
        result = self.expr()
        if self.peek()[0] is not None:
            raise InvalidParameterError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return result

    def expr(self) -> Dimension:
        value = self.term()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.term()
            value = value * rhs if op == "*" else value / rhs
        return value

    def term(self) -> Dimension:
        base = self.factor()
        if self.peek()[1] == "^":
            self.take("^")
            base = base ** self.power()
        return base

    def factor(self) -> Dimension:
        kind, value = self.peek()
        if kind == "num":
            self.take()
            return DIMENSIONLESS
        if kind == "name" and value == "sqrt":
            self.take()
            self.take("(")
            inner = self.expr()
            self.take(")")
            return inner ** Fraction(1, 2)
        if kind == "name":
            self.take()
            return dimension_of(value)
        if value == "(":
            self.take("(")
            inner = self.expr()
            self.take(")")
            return inner
        raise InvalidParameterError(f"unexpected {value!r} in {self.text!r}")

    def power(self) -> Fraction:
        wrapped = self.peek()[1] == "("
        if wrapped:
            self.take("(")
        sign = 1
        if self.peek()[1] == "-":
            self.take("-")
            sign = -1
        kind, num = self.take()
        if kind != "num":
            raise InvalidParameterError(f"exponent must be a rational literal in {self.text!r}")
        value = Fraction(int(num))
        if self.peek()[1] == "/" and self.peek(1)[0] == "num":
            self.take("/")
            value /= int(self.take()[1])
        if wrapped:
            self.take(")")
        return sign * value


def parse_dimension(expression: Union[str, Dimension]) -> Dimension:
    if isinstance(expression, Dimension):
        return expression
    return _Parser(expression).parse()


class IdentityCheck(NamedTuple):
    holds: bool
    lhs: Dimension
    rhs: Dimension
    difference: Dimension  # lhs / rhs; dimensionless iff the identity holds

    def __bool__(self) -> bool:
        return self.holds

    def describe(self) -> str:
        if self.holds:
            return f"PASS  [{self.lhs}] = [{self.rhs}]"
        delta = ", ".join(str(e) for e in self.difference.exponents)
        return f"FAIL  [{self.lhs}] != [{self.rhs}]  exponent delta (m, x, t) = ({delta})"


def check_identity(lhs, rhs) -> IdentityCheck:
    a, b = parse_dimension(lhs), parse_dimension(rhs)
    diff = a / b
    return IdentityCheck(diff.is_dimensionless(), a, b, diff)


def check_identity_string(identity: str) -> IdentityCheck:
    """Check an identity written as ``"lhs = rhs"``, e.g. ``"q^2 = E/x"``."""
    if identity.count("=") != 1:
        raise InvalidParameterError(f"identity needs exactly one '=': {identity!r}")
    lhs, rhs = identity.split("=")
    return check_identity(lhs, rhs)


def check_equation_terms(terms: Iterable) -> bool:
    """True iff all additive terms share one dimension."""
    dims = [parse_dimension(t) for t in terms]
    if len(dims) < 2:
        raise InvalidParameterError("need at least two terms to compare")
    return all(dim == dims[0] for dim in dims[1:])


# -- N-dimensional field-theory mode -------------------------------------------


def field_theory_dimensions(n_space: int = 3) -> dict:
    """Dimensions of the gauged field-theory quantities in ``n_space`` spatial dimensions.

    Follows the printed chain: psi dimensionless, [D_i] = sqrt(E / x^N),
    [q] = [x][D_i], [A] = 1/([q][x]).  The catalog's charge is the N = 3 case.
    """
    if int(n_space) != n_space or n_space < 1:
        raise InvalidParameterError(f"n_space must be a positive integer, got {n_space}")
    energy = CATALOG["energy"]
    energy_density = energy / LENGTH ** n_space
    cov = energy_density ** Fraction(1, 2)
    charge = LENGTH * cov
    gauge_field = DIMENSIONLESS / (charge * LENGTH)
    field_strength = gauge_field / LENGTH
    return {
        "energy_density": energy_density,
        "covariant_derivative": cov,
        "charge": charge,
        "gauge_field": gauge_field,
        "field_strength": field_strength,
        "field_term": field_strength ** 2 / charge ** 2,
    }


def lagrangian_matter_terms(n_space: int = 1) -> dict:
    """Matter terms of the Lagrangian density with |psi|^2 a probability density ([psi] = x^(-N/2)).

    The cubic coupling gamma is assigned the dimension that makes its term
    match; the remaining three terms are fixed by hbar, m, and E.
    """
    psi2 = LENGTH ** (-n_space)
    hbar, mass, energy = CATALOG["hbar"], CATALOG["mass"], CATALOG["energy"]
    gamma = energy * LENGTH ** n_space
    return {
        "time_derivative": hbar / TIME * psi2,
        "kinetic": hbar ** 2 / (mass * LENGTH ** 2) * psi2,
        "potential": energy * psi2,
        "cubic": gamma * psi2 ** 2,
    }


def catalog_table() -> str:
    lines = [f"{'quantity':<12} {'m':>6} {'x':>6} {'t':>6}"]
    for name, dim in CATALOG.items():
        lines.append(f"{name:<12} " + " ".join(f"{str(e):>6}" for e in dim.exponents))
    return "\n".join(lines)
