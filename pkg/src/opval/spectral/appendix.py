"""Exact part of the C (+) C example: scalar series, the h quartic, the G curve,
its discriminant and the operator norm.

Everything here is rational arithmetic; floats appear only when roots of the
discriminant factor are located.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._poly import BivarPoly, UnivarRatPoly, discriminant

__all__ = [
    "ComponentSeries",
    "appendix_component_series",
    "hpoly",
    "h_quartic_residual",
    "verify_h_quartic",
    "h_to_G_curve",
    "exact_discriminant",
    "DISCRIMINANT_FACTOR",
    "NORM_POLYNOMIAL",
    "DiscriminantReport",
    "discriminant_roots",
    "operator_norm",
    "eliminate_h",
]

# 16w^4 - 160w^3 + 540w^2 - 680w + 27
DISCRIMINANT_FACTOR = UnivarRatPoly([27, -680, 540, -160, 16])
# the same quartic in x^2
NORM_POLYNOMIAL = UnivarRatPoly([27, 0, -680, 0, 540, 0, -160, 0, 16])


@dataclass(frozen=True)
class ComponentSeries:
    """Truncated solutions f1, f2, g1, g2 and h = (f1 + f2)/2, coefficients of z^0..z^N."""

    f1: tuple
    f2: tuple
    g1: tuple
    g2: tuple
    h: tuple

    def __iter__(self):
        return iter((self.f1, self.f2, self.g1, self.g2, self.h))


def _conv_at(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> Fraction:
    return sum((a[k] * b[n - k] for k in range(n + 1)), Fraction(0))


def appendix_component_series(N: int) -> ComponentSeries:
    """Solve, coefficient by coefficient,

        f1 = 1 + z (g1/2) f1          g1 = 1 + z ((f1 + f2)/2) g1
        f2 = 1 + z (g1/2 + g2) f2     g2 = 1 + z f2 g2

    The z^n coefficient of every right-hand side only involves orders < n.
    """
    if not isinstance(N, int) or N < 0:
        raise ValueError(f"order must be a non-negative integer, got {N!r}")
    one = Fraction(1)
    f1, f2, g1, g2 = [one], [one], [one], [one]
    for n in range(1, N + 1):
        m = n - 1
        half_g1 = [x / 2 for x in g1]
        mix = [x / 2 + y for x, y in zip(g1, g2)]
        avg_f = [(x + y) / 2 for x, y in zip(f1, f2)]
        f1n = _conv_at(half_g1, f1, m)
        f2n = _conv_at(mix, f2, m)
        g1n = _conv_at(avg_f, g1, m)
        g2n = _conv_at(f2, g2, m)
        f1.append(f1n)
        f2.append(f2n)
        g1.append(g1n)
        g2.append(g2n)
    h = [(x + y) / 2 for x, y in zip(f1, f2)]
    return ComponentSeries(tuple(f1), tuple(f2), tuple(g1), tuple(g2), tuple(h))


def hpoly() -> BivarPoly:
    """8z^3h^4 - 20z^2h^3 + 8z(z+2)h^2 + (z^2 - 12z - 4)h + 4, keyed (deg h, deg z)."""
    return BivarPoly({(4, 3): 8, (3, 2): -20, (2, 2): 8, (2, 1): 16,
                      (1, 2): 1, (1, 1): -12, (1, 0): -4, (0, 0): 4}, names=("h", "z"))


def _series_mul(a, b, N):
    out = [Fraction(0)] * (N + 1)
    for i, x in enumerate(a[:N + 1]):
        if x:
            for j in range(N + 1 - i):
                out[i + j] += x * b[j]
    return out


def h_quartic_residual(h: Sequence, N: int) -> list[Fraction]:
    """Coefficients z^0..z^N of hpoly(z, h(z)) for a truncated series h."""
    h = [Fraction(x) for x in h][:N + 1]
    h += [Fraction(0)] * (N + 1 - len(h))
    powers = [[Fraction(1)] + [Fraction(0)] * N]
    for _ in range(4):
        powers.append(_series_mul(powers[-1], h, N))
    out = [Fraction(0)] * (N + 1)
    for (i, j), c in hpoly().terms.items():
        for n in range(j, N + 1):
            out[n] += c * powers[i][n - j]
    return out


def verify_h_quartic(N: int, h: Sequence | None = None) -> bool:
    """True iff the truncated h annihilates the quartic through z^N."""
    if not isinstance(N, int) or N < 0:
        raise ValueError(f"order must be a non-negative integer, got {N!r}")
    if h is None:
        h = appendix_component_series(N).h
    return all(c == 0 for c in h_quartic_residual(h, N))


def h_to_G_curve() -> BivarPoly:
    """Put h = wG and z = 1/w into the h quartic and clear denominators.

    A term c z^a h^b becomes c w^(b-a) G^b; multiplying by w^s with s the
    largest a - b makes every exponent non-negative.  Sign is normalized so
    the leading G coefficient has positive leading w coefficient.
    """
    P = hpoly()
    shift = max(a - b for (b, a) in P.terms)
    terms = {(b, b - a + shift): c for (b, a), c in P.terms.items()}
    out = BivarPoly(terms, names=("G", "w"))
    if out.coeff(out.degree(0)).leading < 0:
        out = -out
    return out


def exact_discriminant() -> UnivarRatPoly:
    """disc_G of the G curve as an exact polynomial in w."""
    return discriminant(h_to_G_curve())


@dataclass(frozen=True)
class DiscriminantReport:
    discriminant: UnivarRatPoly
    scalar: Fraction | None      # disc == scalar * (-64 w^4 * factor), or None
    matches: bool
    real_roots: tuple
    complex_roots: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "discriminant": [str(c) for c in self.discriminant.coeffs],
            "matches_expected_form": self.matches,
            "scalar": None if self.scalar is None else str(self.scalar),
            "real_roots": list(self.real_roots),
            "complex_roots": [[z.real, z.imag] for z in self.complex_roots],
        }


def discriminant_roots() -> DiscriminantReport:
    """Exact discriminant, comparison with -64 w^4 (16w^4 - 160w^3 + 540w^2 - 680w + 27),
    and the roots of that quartic factor."""
    disc = exact_discriminant()
    w4 = UnivarRatPoly([0, 0, 0, 0, 1])
    expected = w4 * DISCRIMINANT_FACTOR * (-64)
    scalar = disc.ratio_to(expected)
    roots = DISCRIMINANT_FACTOR.roots()
    real = tuple(float(_polish_real(DISCRIMINANT_FACTOR, float(r.real))) for r in roots if abs(r.imag) < 1e-9)
    cplx = tuple(sorted((complex(r) for r in roots if abs(r.imag) >= 1e-9), key=lambda z: z.imag))
    return DiscriminantReport(disc, scalar, scalar is not None, tuple(sorted(real)), cplx)


def _polish_real(p: UnivarRatPoly, x: float, steps: int = 8) -> float:
    dp = p.derivative()
    for _ in range(steps):
        d = dp(x)
        if d == 0:
            break
        x -= p(x) / d
    return x


def operator_norm() -> float:
    """||a|| = sqrt of the largest real root of the discriminant factor."""
    rep = discriminant_roots()
    top = max(rep.real_roots)
    return float(_polish_real(NORM_POLYNOMIAL, math.sqrt(top)))


def eliminate_h(check_order: int = 12) -> dict:
    """Eliminate f1, f2, g1, g2 from the four recursions plus 2h - f1 - f2.

    Returns the factors of the final resultant in (h, z), flagging the one
    annihilated by the exact h series.  Uses sympy for resultants and
    factorization; ``verify_h_quartic`` is the authoritative check.
    """
    import sympy as sp

    z, h, f1, f2, g1, g2 = sp.symbols("z h f1 f2 g1 g2")
    eqs = [
        f1 - 1 - z * g1 / 2 * f1,
        f2 - 1 - z * (g1 / 2 + g2) * f2,
        g1 - 1 - z * (f1 + f2) / 2 * g1,
        g2 - 1 - z * f2 * g2,
    ]
    # f2 = 2h - f1 reduces the system to f1, g1, g2
    eqs = [sp.expand(e.subs(f2, 2 * h - f1)) for e in eqs]
    r1 = sp.resultant(eqs[0], eqs[3], g2)
    r2 = sp.resultant(eqs[1], eqs[3], g2)
    s1 = sp.resultant(r1, eqs[2], g1)
    s2 = sp.resultant(r2, eqs[2], g1)
    final = sp.factor_list(sp.resultant(s1, s2, f1), h, z)[1]
    hs = appendix_component_series(check_order).h
    factors = []
    retained = None
    for fac, mult in final:
        poly = sp.Poly(fac, h, z)
        terms = {k: Fraction(int(sp.numer(v)), int(sp.denom(v))) for k, v in poly.as_dict().items()}
        bp = BivarPoly(terms, names=("h", "z"))
        res = _factor_residual(bp, hs, check_order)
        first_bad = next((n for n, c in enumerate(res) if c != 0), None)
        factors.append({"factor": str(fac), "multiplicity": int(mult), "first_nonzero_residual_order": first_bad})
        if first_bad is None and bp.degree(0) > 0:
            retained = bp
    if retained is not None and retained.coeff(retained.degree(0)).leading < 0:
        retained = -retained
    if retained is not None:
        lead = retained.terms.get((0, 0))
        if lead:
            retained = retained * (Fraction(4) / lead)
    return {"factors": factors, "retained": retained,
            "matches_hpoly": retained == hpoly() if retained is not None else False}


def _factor_residual(P: BivarPoly, h: Sequence, N: int) -> list[Fraction]:
    deg = P.degree(0)
    hh = list(h[:N + 1])
    powers = [[Fraction(1)] + [Fraction(0)] * N]
    for _ in range(deg):
        powers.append(_series_mul(powers[-1], hh, N))
    out = [Fraction(0)] * (N + 1)
    for (i, j), c in P.terms.items():
        for n in range(j, N + 1):
            out[n] += c * powers[i][n - j]
    return out
