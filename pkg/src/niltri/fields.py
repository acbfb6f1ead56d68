"""Exact arithmetic over the ground fields: F_p (p an odd prime), Q, and Q(i).

Every scalar is represented canonically (least residue in [0, p) for prime
fields, reduced fractions for Q, pairs of reduced fractions for Q(i)), so
equal elements compare and hash identically.  This is what lets matrices
over these fields serve as dictionary keys during orbit enumeration.

Characteristic 2 is excluded throughout: division by 2 is pervasive in the
triangular-operation calculus.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction


class FieldError(ValueError):
    """Mixed-field operation, invalid field construction, or bad scalar text."""


def _is_odd_prime(p):
    if p < 3 or p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _rat_sqrt(x):
    """Exact square root of a Fraction if it exists in Q, else None."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


class FieldElement:
    """Immutable scalar over a fixed field, with exact canonical value.

    Arithmetic with elements of a different field raises FieldError; there
    is no implicit coercion between fields.
    """

    __slots__ = ("field", "value")

    def __init__(self, field, value):
        self.field = field
        self.value = value

    def _check(self, other):
        if not isinstance(other, FieldElement):
            raise FieldError(f"expected a FieldElement, got {other!r}")
        if other.field != self.field:
            raise FieldError(f"field mismatch: {self.field} vs {other.field}")

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field._add(self.value, other.value))

    def __sub__(self, other):
        self._check(other)
        return FieldElement(
            self.field, self.field._add(self.value, self.field._neg(other.value))
        )

    def __mul__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field._mul(self.value, other.value))

    def __truediv__(self, other):
        self._check(other)
        return FieldElement(
            self.field, self.field._mul(self.value, self.field._inv(other.value))
        )

    def __neg__(self):
        return FieldElement(self.field, self.field._neg(self.value))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise FieldError("only nonnegative integer powers are supported")
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inv(self):
        """Multiplicative inverse; raises ZeroDivisionError on zero."""
        return FieldElement(self.field, self.field._inv(self.value))

    def half(self):
        """x / 2, always defined since char(F) != 2."""
        return self * self.field.inv2

    def double(self):
        return self + self

    def is_zero(self):
        return self.value == self.field.zero.value

    def is_square(self):
        """Return (True, witness) with witness * witness == self, or (False, None)."""
        ok, w = self.field._is_square(self.value)
        return (True, FieldElement(self.field, w)) if ok else (False, None)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and self.field == other.field
            and self.value == other.value
        )

    def __hash__(self):
        return hash((self.field, self.value))

    def __repr__(self):
        return f"{self.field.name}:{self.field.render(self)}"

    def __str__(self):
        return self.field.render(self)


class Field:
    """Common interface of the three ground fields."""

    name = "?"
    is_finite = False

    def of(self, x):
        """Coerce an int (or pass through a FieldElement of this field)."""
        if isinstance(x, FieldElement):
            if x.field != self:
                raise FieldError(f"element of {x.field} is not in {self}")
            return x
        if isinstance(x, int):
            return FieldElement(self, self._of_int(x))
        raise FieldError(f"cannot coerce {x!r} into {self}")

    def parse(self, text):
        return FieldElement(self, self._parse(text.strip()))

    def render(self, x):
        if isinstance(x, FieldElement):
            x = x.value
        return self._render(x)

    def elements(self):
        raise FieldError(f"{self} is infinite; cannot enumerate its elements")

    def units(self):
        raise FieldError(f"{self} is infinite; cannot enumerate its units")

    def __eq__(self, other):
        return type(self) is type(other) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return self.name


class PrimeField(Field):
    """F_p for an odd prime p, residues kept in [0, p)."""

    is_finite = True

    def __init__(self, p):
        if not _is_odd_prime(p):
            raise FieldError(f"prime fields require an odd prime, got {p}")
        self.p = p
        self.name = f"f{p}"
        self.zero = FieldElement(self, 0)
        self.one = FieldElement(self, 1)
        self.inv2 = FieldElement(self, (p + 1) // 2)

    def order(self):
        return self.p

    def _of_int(self, x):
        return x % self.p

    def _add(self, a, b):
        return (a + b) % self.p

    def _mul(self, a, b):
        return (a * b) % self.p

    def _neg(self, a):
        return (-a) % self.p

    def _inv(self, a):
        if a == 0:
            raise ZeroDivisionError(f"inversion of zero in {self.name}")
        return pow(a, self.p - 2, self.p)

    def _is_square(self, a):
        if a == 0:
            return True, 0
        if pow(a, (self.p - 1) // 2, self.p) != 1:
            return False, None
        return True, self._sqrt(a)

    def _sqrt(self, a):
        """Tonelli-Shanks; caller guarantees a is a nonzero residue."""
        p = self.p
        if p % 4 == 3:
            return pow(a, (p + 1) // 4, p)
        # p = m * 2^e + 1 with m odd
        m, e = p - 1, 0
        while m % 2 == 0:
            m //= 2
            e += 1
        z = 2
        while pow(z, (p - 1) // 2, p) != p - 1:
            z += 1
        c = pow(z, m, p)
        t = pow(a, m, p)
        r = pow(a, (m + 1) // 2, p)
        while t != 1:
            t2, i = t, 0
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (e - i - 1), p)
            r = r * b % p
            c = b * b % p
            t = t * c % p
            e = i
        return r

    def _parse(self, text):
        try:
            if "/" in text:
                num, den = text.split("/")
                return self._mul(int(num) % self.p, self._inv(int(den) % self.p))
            return int(text) % self.p
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"bad {self.name} scalar {text!r}: {exc}") from None

    def _render(self, a):
        return str(a)

    def elements(self):
        return [FieldElement(self, a) for a in range(self.p)]

    def units(self):
        return [FieldElement(self, a) for a in range(1, self.p)]


class Rationals(Field):
    """The rational numbers, via fractions.Fraction."""

    name = "q"

    def __init__(self):
        self.zero = FieldElement(self, Fraction(0))
        self.one = FieldElement(self, Fraction(1))
        self.inv2 = FieldElement(self, Fraction(1, 2))

    def _of_int(self, x):
        return Fraction(x)

    def _add(self, a, b):
        return a + b

    def _mul(self, a, b):
        return a * b

    def _neg(self, a):
        return -a

    def _inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inversion of zero in Q")
        return 1 / a

    def _is_square(self, a):
        r = _rat_sqrt(a)
        return (True, r) if r is not None else (False, None)

    def _parse(self, text):
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"bad rational {text!r}: {exc}") from None

    def _render(self, a):
        return str(a)


_RAT = r"[+-]?\d+(?:/\d+)?"
_GAUSS_RE = re.compile(rf"^({_RAT})?(([+-]|^)(\d+(?:/\d+)?)?i)?$")


class GaussianRationals(Field):
    """Q(i): pairs (re, im) of reduced fractions, exact complex arithmetic.

    This field stands in for C in the region-based n=4 classification: the
    disk-membership tests there reduce to comparisons of rational squared
    moduli, which are exact here and would be unreliable in floating point.
    """

    name = "qi"

    def __init__(self):
        self.zero = FieldElement(self, (Fraction(0), Fraction(0)))
        self.one = FieldElement(self, (Fraction(1), Fraction(0)))
        self.i = FieldElement(self, (Fraction(0), Fraction(1)))
        self.inv2 = FieldElement(self, (Fraction(1, 2), Fraction(0)))

    def make(self, re, im=0):
        return FieldElement(self, (Fraction(re), Fraction(im)))

    def _of_int(self, x):
        return (Fraction(x), Fraction(0))

    def _add(self, a, b):
        return (a[0] + b[0], a[1] + b[1])

    def _mul(self, a, b):
        return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])

    def _neg(self, a):
        return (-a[0], -a[1])

    def _inv(self, a):
        n = a[0] * a[0] + a[1] * a[1]
        if n == 0:
            raise ZeroDivisionError("inversion of zero in Q(i)")
        return (a[0] / n, -a[1] / n)

    def _is_square(self, a):
        # w = x + yi solves w^2 = a iff x^2 = (re + |a|)/2 and y = im / (2x),
        # with |a| the rational square root of the norm.  Both conditions are
        # exact rational square tests.
        re, im = a
        if re == 0 and im == 0:
            return True, (Fraction(0), Fraction(0))
        m = _rat_sqrt(re * re + im * im)
        if m is None:
            return False, None
        t = (re + m) / 2
        if t == 0:
            # then im = 0 and re <= 0: a pure negative real, root is y*i
            y = _rat_sqrt(-re)
            if y is None:
                return False, None
            return True, (Fraction(0), y)
        x = _rat_sqrt(t)
        if x is None:
            return False, None
        y = im / (2 * x)
        return True, (x, y)

    def _parse(self, text):
        m = _GAUSS_RE.match(text.replace(" ", ""))
        if not m or (m.group(1) is None and m.group(2) is None):
            raise FieldError(f"bad Q(i) scalar {text!r}")
        re_part, im_part = m.group(1), m.group(2)
        try:
            re = Fraction(re_part) if re_part else Fraction(0)
            if im_part is None:
                im = Fraction(0)
            else:
                sign = -1 if im_part.startswith("-") else 1
                body = im_part.lstrip("+-")[:-1]  # strip sign and trailing i
                im = sign * (Fraction(body) if body else Fraction(1))
            return (re, im)
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"bad Q(i) scalar {text!r}: {exc}") from None

    def _render(self, a):
        re, im = a
        if im == 0:
            return str(re)
        if im == 1:
            itxt = "i"
        elif im == -1:
            itxt = "-i"
        else:
            itxt = f"{im}i"
        if re == 0:
            return itxt
        return f"{re}{itxt}" if itxt.startswith("-") else f"{re}+{itxt}"

    @staticmethod
    def re(x):
        return x.value[0]

    @staticmethod
    def im(x):
        return x.value[1]


_CACHE = {}


def prime_field(p):
    key = ("p", p)
    if key not in _CACHE:
        _CACHE[key] = PrimeField(p)
    return _CACHE[key]


def rationals():
    if "q" not in _CACHE:
        _CACHE["q"] = Rationals()
    return _CACHE["q"]


def gaussian_rationals():
    if "qi" not in _CACHE:
        _CACHE["qi"] = GaussianRationals()
    return _CACHE["qi"]


def field_by_name(name):
    """Resolve a CLI field tag: 'f3', 'f5', ..., 'q', or 'qi'."""
    name = name.strip().lower()
    if name == "q":
        return rationals()
    if name == "qi":
        return gaussian_rationals()
    if name.startswith("f"):
        try:
            return prime_field(int(name[1:]))
        except ValueError:
            pass
    raise FieldError(f"unknown field {name!r} (expected f<odd prime>, q, or qi)")
