"""Exact arithmetic substrate: GF(p) elements and arbitrary-precision rationals.

Every probability in this package is a ``fractions.Fraction`` (arbitrary
precision, always in lowest terms with positive denominator); nothing is
ever rounded.  Field elements carry their modulus so that mixing two
fields is a hard error instead of a silent bug.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import PreconditionError, SpaceMismatchError

MAX_MODULUS = 1 << 16

_RATIONAL_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


def is_prime(n: int) -> bool:
    """Trial-division primality test, adequate for desk-scale moduli."""
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PrimeField:
    """The prime field GF(p) for a prime p < 2**16."""

    def __init__(self, p: int):
        if not isinstance(p, int) or not is_prime(p):
            raise PreconditionError("modulus_not_prime", f"modulus {p} is not prime")
        if p >= MAX_MODULUS:
            raise PreconditionError(
                "modulus_too_large", f"modulus {p} exceeds the 2**16 desk-scale limit"
            )
        self.p = p

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(value % self.p, self)

    def element(self, value: int) -> FieldElement:
        """Strict constructor: ``value`` must already lie in [0, p)."""
        if not 0 <= value < self.p:
            raise PreconditionError(
                "value_out_of_range", f"{value} not in [0, {self.p})"
            )
        return FieldElement(value, self)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))

    def __repr__(self) -> str:
        return f"GF({self.p})"


class FieldElement:
    """An element of GF(p); immutable, with operator-based arithmetic."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, val):  # pragma: no cover - guard only
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise SpaceMismatchError(
                    f"mixed moduli {self.field.p} and {other.field.p}"
                )
            return other
        if isinstance(other, int):
            return self.field(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement((self.value + other.value) % self.field.p, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement((self.value - other.value) % self.field.p, self.field)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement((self.value * other.value) % self.field.p, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement((-self.value) % self.field.p, self.field)

    def inv(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("inversion of zero in GF(p)")
        return FieldElement(pow(self.value, self.field.p - 2, self.field.p), self.field)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inv() ** (-exponent)
        return FieldElement(pow(self.value, exponent, self.field.p), self.field)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field.p, self.value))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value}"


def parse_rational(text: str) -> Fraction:
    """Parse ``"num/den"`` (or a bare decimal integer) into a Fraction.

    Rejects anything else, in particular decimal points: exactness must
    survive every file format.
    """
    if isinstance(text, int):
        return Fraction(text)
    m = _RATIONAL_RE.match(text.strip())
    if m is None:
        raise PreconditionError("malformed_rational", f"cannot parse {text!r} as num/den")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(value: Fraction) -> str:
    """Render a Fraction as ``"num/den"`` in lowest terms, denominator always shown."""
    f = Fraction(value)
    return f"{f.numerator}/{f.denominator}"


def check_probability(value: Fraction, what: str = "probability") -> Fraction:
    """Assert 0 <= value <= 1 and return it."""
    if not 0 <= value <= 1:
        raise PreconditionError("probability_out_of_range", f"{what} = {value} not in [0, 1]")
    return value
