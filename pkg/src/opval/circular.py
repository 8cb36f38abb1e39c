"""B-valued circular elements over B = C^d.

A circular element is determined by its two covariance maps
``eta1 = alpha_(1,2)`` (E(a b a*)) and ``eta2 = alpha_(2,1)`` (E(a* b a)).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Sequence

from ._rational import I, ONE, ZERO, CRational, as_crational
from .algebra import AlgElem, Automorphism, LinearMap, TraceFunctional, check_positive_map
from .cumulants import MapFamily, Verdict
from .rdiag import RDiagModel

__all__ = [
    "CircularModel",
    "make_nofreepolar",
    "make_dt_discretized",
    "make_scalar_circular",
    "alternating_moment",
    "SemicircularCovariance",
    "semicircular_covariance",
    "check_circular_trace",
    "induced_cumulant_family",
]


def _matrix_flat(m: LinearMap) -> tuple:
    return tuple(x for row in m.matrix for x in row)


@dataclass(frozen=True)
class CircularModel:
    eta1: LinearMap
    eta2: LinearMap
    name: str = "custom"

    def __post_init__(self):
        if self.eta1.dimension != self.eta2.dimension:
            raise ValueError("covariance maps must act on the same algebra")

    @property
    def dimension(self) -> int:
        return self.eta1.dimension

    def is_positive(self) -> bool:
        return check_positive_map(self.eta1) and check_positive_map(self.eta2)

    def to_rdiag(self, K: int = 1) -> RDiagModel:
        return RDiagModel(self.dimension, {1: _matrix_flat(self.eta1)},
                          {1: _matrix_flat(self.eta2)}, K)


def make_nofreepolar() -> CircularModel:
    """The C (+) C example whose element has no free polar decomposition."""
    h = CRational(1) / 2
    eta1 = LinearMap([[h, 0], [h, 1]])
    eta2 = LinearMap([[h, h], [0, 1]])
    return CircularModel(eta1, eta2, "nofreepolar")


def make_dt_discretized(d: int) -> CircularModel:
    """Midpoint discretization of f -> int_x^1 f(t) dt on d cells, and its flip.

    Cell i sees the cells j > i fully and half of its own cell, so
    ``eta2 = theta eta1 theta`` for the reversal theta holds exactly.
    """
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    full = CRational(1) / d
    half = CRational(1) / (2 * d)
    eta1 = LinearMap([[full if j > i else half if j == i else ZERO for j in range(d)]
                      for i in range(d)])
    eta2 = Automorphism.flip(d).conjugate_map(eta1)
    return CircularModel(eta1, eta2, f"dt:{d}")


def make_scalar_circular(c=1) -> CircularModel:
    """d = 1 circular element with E(a a*) = E(a* a) = c."""
    c = as_crational(c)
    return CircularModel(LinearMap([[c]]), LinearMap([[c]]), f"scalar-circular:{c}")


# ---------------------------------------------------------------------------
# alternating moments
# ---------------------------------------------------------------------------

def alternating_moment(model: CircularModel, pattern: str | int, args: Sequence[AlgElem]) -> AlgElem:
    """m_n^(1)(b_1..b_2n) = E(a b_1 a* b_2 ... a* b_2n) or m_n^(2) starting with a*.

    Only pair cumulants survive, so the block through the first letter pairs
    it with an a* (resp. a) at position 2k+2, giving

        m_n^(1)(b) = sum_k eta1(b_1 m_k^(2)(b_2..b_{2k+1})) b_{2k+2} m_{n-k-1}^(1)(..)
    """
    if pattern in ("start_a", 1, "a"):
        which = 1
    elif pattern in ("start_astar", 2, "a*", "astar"):
        which = 2
    else:
        raise ValueError(f"pattern must be start_a or start_astar, got {pattern!r}")
    args = tuple(args)
    if len(args) % 2:
        raise ValueError(f"alternating moments take an even number of arguments, got {len(args)}")
    d = model.dimension
    for b in args:
        if b.dimension != d:
            raise ValueError(f"argument of dimension {b.dimension}, expected {d}")
    maps = {1: model.eta1, 2: model.eta2}
    unit = AlgElem.unit(d)

    @lru_cache(maxsize=None)
    def m(w: int, lo: int, hi: int) -> AlgElem:
        # moment of the word on args[lo:hi], starting with letter w
        if lo == hi:
            return unit
        other = 3 - w
        acc = AlgElem.zero(d)
        for mid in range(lo + 1, hi, 2):
            # args[lo] .. args[mid-1] sit inside the pair, args[mid] follows it
            inner = args[lo] * m(other, lo + 1, mid) if mid > lo + 1 else args[lo]
            acc = acc + maps[w](inner) * args[mid] * m(w, mid + 1, hi)
        return acc

    return m(which, 0, len(args))


# ---------------------------------------------------------------------------
# semicircular decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SemicircularCovariance:
    """Covariances gamma_(i,j) of x_1 = (a + a*)/2, x_2 = (a - a*)/(2i)."""

    g11: LinearMap
    g12: LinearMap
    g21: LinearMap
    g22: LinearMap
    completely_positive: bool
    witness: dict | None = None

    def reconstruct(self) -> tuple[LinearMap, LinearMap]:
        """Recover (eta1, eta2) from the gammas: a = x_1 + i x_2."""
        eta1 = self.g11 + self.g22 - self.g12 * (2 * I)
        eta2 = self.g11 + self.g22 + self.g12 * (2 * I)
        return eta1, eta2


def _psd2(a: CRational, b: CRational, c: CRational) -> bool:
    """[[a, b], [conj b, c]] with real a, c is positive semidefinite."""
    return a.re >= 0 and c.re >= 0 and a.re * c.re - b.abs2() >= 0


def semicircular_covariance(model: CircularModel) -> SemicircularCovariance:
    """Covariances of the real and imaginary parts and complete positivity of
    the 2x2 block map

        eta = 1/2 (1/2 [[1, i], [-i, 1]] (x) eta1 + 1/2 [[1, -i], [i, 1]] (x) eta2).

    For commutative B the Choi matrix of eta splits into d*d independent
    2x2 Hermitian blocks, one per matrix entry (i, k).
    """
    e1, e2 = model.eta1, model.eta2
    quarter = CRational(1) / 4
    g11 = (e1 + e2) * quarter
    g12 = (e1 - e2) * (I * quarter)
    g21 = g12 * -1
    d = model.dimension
    ok, wit = True, None
    for i, k in product(range(d), repeat=2):
        x, y = e1.matrix[i][k], e2.matrix[i][k]
        if not (x.is_real() and y.is_real()):
            ok, wit = False, {"entry": [i, k], "reason": "non-real covariance entry"}
            break
        # block = 1/4 (x [[1, i], [-i, 1]] + y [[1, -i], [i, 1]])
        diag = (x + y) * quarter
        off = (x - y) * I * quarter
        if not _psd2(diag, off, diag):
            ok, wit = False, {"entry": [i, k], "block": [[str(diag), str(off)],
                                                       [str(off.conjugate()), str(diag)]]}
            break
    return SemicircularCovariance(g11, g12, g21, g11, ok, wit)


# ---------------------------------------------------------------------------
# traciality and the induced family
# ---------------------------------------------------------------------------

def check_circular_trace(model: CircularModel, tau: TraceFunctional) -> Verdict:
    """tau(eta1(b_1) b_2) == tau(b_1 eta2(b_2)) on basis pairs."""
    d = model.dimension
    if tau.dimension != d:
        raise ValueError(f"trace of dimension {tau.dimension}, model of dimension {d}")
    basis = [AlgElem.basis(d, k) for k in range(d)]
    n = 0
    for k1, k2 in product(range(d), repeat=2):
        b1, b2 = basis[k1], basis[k2]
        lhs = tau(model.eta1(b1) * b2)
        rhs = tau(b1 * model.eta2(b2))
        n += 1
        if lhs != rhs:
            return Verdict(False, {"basis_pair": [k1, k2], "lhs": str(lhs), "rhs": str(rhs)}, n)
    return Verdict(True, None, n)


def induced_cumulant_family(model: CircularModel, N: int = 8, labels=(1, 2)) -> MapFamily:
    """Cumulant family with alpha_(1,2) = eta1, alpha_(2,1) = eta2 and nothing else."""
    if N < 2:
        raise ValueError("a circular family needs max order >= 2")
    a, s = labels
    maps = {(a, s): _matrix_flat(model.eta1), (s, a): _matrix_flat(model.eta2)}
    return MapFamily(model.dimension, labels, maps, kind="cumulants", max_order=N, sparse=True)
