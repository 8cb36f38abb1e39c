"""Exact univariate and bivariate polynomials over Q, and resultants."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["UnivarRatPoly", "BivarPoly", "resultant", "discriminant"]


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating coefficients are not exact")
    return Fraction(x)


class UnivarRatPoly:
    """c_0 + c_1 x + ... + c_n x^n with Fraction coefficients (low to high)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [_q(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def x(cls) -> "UnivarRatPoly":
        return cls([0, 1])

    @classmethod
    def const(cls, c) -> "UnivarRatPoly":
        return cls([c])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, k) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return UnivarRatPoly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return UnivarRatPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return UnivarRatPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UnivarRatPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = UnivarRatPoly([1])
        for _ in range(n):
            out = out * self
        return out

    def __divmod__(self, other):
        other = _as_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        lead = other.leading
        for k in range(len(q) - 1, -1, -1):
            c = rem[k + other.degree] / lead
            q[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return UnivarRatPoly(q), UnivarRatPoly(rem)

    def exact_div(self, other) -> "UnivarRatPoly":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    def __eq__(self, other):
        try:
            other = _as_poly(other)
        except TypeError:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        acc = 0 if not isinstance(x, Fraction) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, Fraction) else float(c))
        return acc

    def derivative(self) -> "UnivarRatPoly":
        return UnivarRatPoly(k * c for k, c in enumerate(self.coeffs) if k)

    def monic(self) -> "UnivarRatPoly":
        return UnivarRatPoly(c / self.leading for c in self.coeffs)

    def ratio_to(self, other: "UnivarRatPoly") -> Fraction | None:
        """The scalar s with self == s * other, or None."""
        other = _as_poly(other)
        if other.is_zero() or self.degree != other.degree:
            return None
        s = self.leading / other.leading
        return s if self == other * s else None

    def roots(self) -> np.ndarray:
        """All complex roots (companion-matrix eigenvalues)."""
        if self.degree < 1:
            return np.array([], dtype=complex)
        return np.roots([float(c) for c in reversed(self.coeffs)]).astype(complex)

    def real_roots(self, tol: float = 1e-9) -> list[float]:
        return sorted(float(r.real) for r in self.roots() if abs(r.imag) <= tol * max(1.0, abs(r)))

    def __repr__(self):
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c:
                terms.append(f"{c}" + ("" if k == 0 else "*x" if k == 1 else f"*x^{k}"))
        return "UnivarRatPoly(" + (" + ".join(terms) or "0") + ")"


def _as_poly(x) -> UnivarRatPoly:
    if isinstance(x, UnivarRatPoly):
        return x
    return UnivarRatPoly([x])


class BivarPoly:
    """Sum of c * x^i * y^j, stored as ``{(i, j): Fraction}`` without zeros.

    ``names`` records what x and y stand for, e.g. ``("G", "w")``.
    """

    __slots__ = ("terms", "names")

    def __init__(self, terms: Mapping[tuple[int, int], object], names: tuple[str, str] = ("x", "y")):
        t = {}
        for (i, j), c in terms.items():
            c = _q(c)
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            if c:
                t[(int(i), int(j))] = t.get((int(i), int(j)), Fraction(0)) + c
        self.terms = {k: v for k, v in sorted(t.items()) if v}
        self.names = tuple(names)

    def degree(self, var: int = 0) -> int:
        return max((k[var] for k in self.terms), default=-1)

    def total_degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def coeff(self, i: int) -> UnivarRatPoly:
        """Coefficient of x^i as a polynomial in y."""
        deg = max((j for (a, j) in self.terms if a == i), default=-1)
        return UnivarRatPoly(self.terms.get((i, j), 0) for j in range(deg + 1))

    def coeffs_in_first(self) -> list[UnivarRatPoly]:
        """[p_0(y), ..., p_n(y)] with self = sum p_i(y) x^i."""
        return [self.coeff(i) for i in range(self.degree(0) + 1)]

    @classmethod
    def from_coeffs_in_first(cls, polys: Sequence[UnivarRatPoly], names=("x", "y")) -> "BivarPoly":
        t = {}
        for i, p in enumerate(polys):
            for j, c in enumerate(p.coeffs):
                if c:
                    t[(i, j)] = c
        return cls(t, names)

    def derivative(self, var: int = 0) -> "BivarPoly":
        t = {}
        for (i, j), c in self.terms.items():
            e = (i, j)[var]
            if e:
                key = (i - 1, j) if var == 0 else (i, j - 1)
                t[key] = c * e
        return BivarPoly(t, self.names)

    def __add__(self, other: "BivarPoly") -> "BivarPoly":
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, Fraction(0)) + v
        return BivarPoly(t, self.names)

    def __neg__(self):
        return BivarPoly({k: -v for k, v in self.terms.items()}, self.names)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, BivarPoly):
            c = _q(other)
            return BivarPoly({k: v * c for k, v in self.terms.items()}, self.names)
        t: dict = {}
        for (i, j), a in self.terms.items():
            for (k, l), b in other.terms.items():
                t[(i + k, j + l)] = t.get((i + k, j + l), Fraction(0)) + a * b
        return BivarPoly(t, self.names)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __call__(self, x, y):
        acc = 0
        for (i, j), c in self.terms.items():
            acc = acc + float(c) * x ** i * y ** j if not isinstance(x, Fraction) else acc + c * x ** i * y ** j
        return acc

    def __repr__(self):
        x, y = self.names
        parts = [f"{c}*{x}^{i}*{y}^{j}" for (i, j), c in sorted(self.terms.items(), reverse=True)]
        return "BivarPoly(" + (" + ".join(parts) or "0") + ")"


def _det_bareiss(M: list[list[UnivarRatPoly]]) -> UnivarRatPoly:
    """Fraction-free (Bareiss) determinant of a square matrix over Q[y]."""
    n = len(M)
    A = [row[:] for row in M]
    sign = 1
    prev = UnivarRatPoly([1])
    for k in range(n - 1):
        if A[k][k].is_zero():
            for r in range(k + 1, n):
                if not A[r][k].is_zero():
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return UnivarRatPoly()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]).exact_div(prev)
        prev = A[k][k]
    det = A[n - 1][n - 1]
    return det if sign > 0 else -det


def resultant(P: BivarPoly, Q: BivarPoly) -> UnivarRatPoly:
    """Res_x(P, Q) as a polynomial in y, from the Sylvester matrix."""
    p = P.coeffs_in_first()[::-1]   # highest power first
    q = Q.coeffs_in_first()[::-1]
    m, n = len(p) - 1, len(q) - 1
    if m < 0 or n < 0:
        return UnivarRatPoly()
    size = m + n
    if size == 0:
        return UnivarRatPoly([1])
    zero = UnivarRatPoly()
    rows = []
    for r in range(n):
        rows.append([zero] * r + p + [zero] * (size - r - m - 1))
    for r in range(m):
        rows.append([zero] * r + q + [zero] * (size - r - n - 1))
    return _det_bareiss(rows)


def discriminant(P: BivarPoly) -> UnivarRatPoly:
    """disc_x(P) = (-1)^{n(n-1)/2} Res_x(P, dP/dx) / lead_x(P)."""
    n = P.degree(0)
    res = resultant(P, P.derivative(0))
    lead = P.coeff(n)
    out = res.exact_div(lead)
    return out if (n * (n - 1) // 2) % 2 == 0 else -out
