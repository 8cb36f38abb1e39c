"""Exact complex rationals (Gaussian rationals) backed by gmpy2.mpq."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

__all__ = ["CRational", "as_crational", "ZERO", "ONE", "I"]

_Q0 = mpq(0)


def _new(re, im):
    z = object.__new__(CRational)
    z.re = re
    z.im = im
    return z


def _to_mpq(x):
    if isinstance(x, type(_Q0)):
        return x
    if isinstance(x, bool):
        return mpq(int(x))
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Rational):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        f = Fraction(x.strip())
        return mpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


class CRational:
    """An exact complex number ``re + im*i`` with rational parts.

    Instances are immutable and hashable; real values hash and compare
    equal to the matching ``int`` / ``Fraction``.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, CRational):
            if im:
                raise TypeError("cannot combine a CRational real part with an imaginary part")
            self.re, self.im = re.re, re.im
            return
        if isinstance(re, complex):
            raise TypeError("floating complex values are not exact; pass rational parts")
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def from_quad(cls, quad) -> "CRational":
        """Build from ``[re_num, re_den, im_num, im_den]``."""
        if len(quad) != 4:
            raise ValueError(f"rational quadruple needs 4 integers, got {quad!r}")
        rn, rd, in_, id_ = (int(v) for v in quad)
        if rd == 0 or id_ == 0:
            raise ValueError(f"zero denominator in {quad!r}")
        return _new(mpq(rn, rd), mpq(in_, id_))

    def to_quad(self) -> list[int]:
        return [int(self.re.numerator), int(self.re.denominator),
                int(self.im.numerator), int(self.im.denominator)]

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, CRational):
            try:
                other = as_crational(other)
            except TypeError:
                return NotImplemented
        return _new(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, CRational):
            try:
                other = as_crational(other)
            except TypeError:
                return NotImplemented
        return _new(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        try:
            other = as_crational(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if not isinstance(other, CRational):
            try:
                other = as_crational(other)
            except TypeError:
                return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return _new(a * c, _Q0)
        return _new(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, CRational):
            try:
                other = as_crational(other)
            except TypeError:
                return NotImplemented
        c, d = other.re, other.im
        den = c * c + d * d
        if not den:
            raise ZeroDivisionError("division by zero complex rational")
        a, b = self.re, self.im
        return _new((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        try:
            other = as_crational(other)
        except TypeError:
            return NotImplemented
        return other / self

    def __neg__(self):
        return _new(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ONE / (self ** (-n))
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "CRational":
        return _new(self.re, -self.im)

    def abs2(self):
        """Squared modulus, an exact rational."""
        return self.re * self.re + self.im * self.im

    # -- predicates / conversions --------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def __eq__(self, other):
        if isinstance(other, CRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, complex):
            return complex(self) == other
        try:
            other = as_crational(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def real_fraction(self) -> Fraction:
        return Fraction(int(self.re.numerator), int(self.re.denominator))

    def imag_fraction(self) -> Fraction:
        return Fraction(int(self.im.numerator), int(self.im.denominator))

    def __repr__(self):
        return f"CRational({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __reduce__(self):
        return (CRational.from_quad, (self.to_quad(),))


def as_crational(x) -> CRational:
    """Coerce ints, Fractions, mpq values and rational strings to `CRational`."""
    if isinstance(x, CRational):
        return x
    if isinstance(x, (list, tuple)) and len(x) == 4:
        return CRational.from_quad(x)
    return _new(_to_mpq(x), _Q0)


ZERO = _new(mpq(0), mpq(0))
ONE = _new(mpq(1), mpq(0))
I = _new(mpq(0), mpq(1))
