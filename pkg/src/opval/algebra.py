"""The commutative *-algebra B = C^d, its elements, linear maps, traces and
automorphisms.

All scalars are exact complex rationals (:class:`~opval._rational.CRational`).
Every object here is immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ._rational import ONE, ZERO, CRational, as_crational

__all__ = [
    "Algebra",
    "AlgElem",
    "LinearMap",
    "TraceFunctional",
    "Automorphism",
    "DimensionMismatch",
    "alg_arith",
    "check_positive_map",
    "apply_trace",
]


class DimensionMismatch(ValueError):
    """Operands live in algebras of different dimension."""


def _check_same(d1: int, d2: int) -> None:
    if d1 != d2:
        raise DimensionMismatch(f"dimension mismatch: {d1} vs {d2}")


@dataclass(frozen=True)
class Algebra:
    """B = C^d with coordinatewise product and conjugation."""

    dimension: int

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ValueError(f"algebra dimension must be a positive integer, got {self.dimension!r}")

    def unit(self) -> "AlgElem":
        return AlgElem.unit(self.dimension)

    def zero(self) -> "AlgElem":
        return AlgElem.zero(self.dimension)

    def basis(self) -> list["AlgElem"]:
        return [AlgElem.basis(self.dimension, k) for k in range(self.dimension)]


class AlgElem:
    """An element of C^d stored as ``d`` exact complex-rational coordinates."""

    __slots__ = ("coords", "_hash")

    def __init__(self, coords: Iterable):
        c = tuple(as_crational(x) for x in coords)
        if not c:
            raise ValueError("an algebra element needs at least one coordinate")
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _raw(cls, coords: tuple) -> "AlgElem":
        b = object.__new__(cls)
        object.__setattr__(b, "coords", coords)
        object.__setattr__(b, "_hash", None)
        return b

    def __setattr__(self, name, value):
        raise AttributeError("AlgElem is immutable")

    @classmethod
    def unit(cls, d: int) -> "AlgElem":
        return cls._raw((ONE,) * d)

    @classmethod
    def zero(cls, d: int) -> "AlgElem":
        return cls._raw((ZERO,) * d)

    @classmethod
    def basis(cls, d: int, k: int) -> "AlgElem":
        if not 0 <= k < d:
            raise IndexError(f"basis index {k} out of range for dimension {d}")
        return cls._raw(tuple(ONE if i == k else ZERO for i in range(d)))

    @classmethod
    def scalar(cls, d: int, value) -> "AlgElem":
        v = as_crational(value)
        return cls._raw((v,) * d)

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def __add__(self, other: "AlgElem") -> "AlgElem":
        if not isinstance(other, AlgElem):
            return NotImplemented
        _check_same(len(self.coords), len(other.coords))
        return AlgElem._raw(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "AlgElem") -> "AlgElem":
        if not isinstance(other, AlgElem):
            return NotImplemented
        _check_same(len(self.coords), len(other.coords))
        return AlgElem._raw(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "AlgElem":
        return AlgElem._raw(tuple(-a for a in self.coords))

    def __mul__(self, other) -> "AlgElem":
        if isinstance(other, AlgElem):
            _check_same(len(self.coords), len(other.coords))
            return AlgElem._raw(tuple(a * b for a, b in zip(self.coords, other.coords)))
        try:
            s = as_crational(other)
        except TypeError:
            return NotImplemented
        return AlgElem._raw(tuple(a * s for a in self.coords))

    def __rmul__(self, other) -> "AlgElem":
        # scalars only; AlgElem * AlgElem goes through __mul__
        return self.__mul__(other)

    def scale(self, s) -> "AlgElem":
        return self * as_crational(s)

    def star(self) -> "AlgElem":
        return AlgElem._raw(tuple(a.conjugate() for a in self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_scalar(self) -> bool:
        """True when the element is a multiple of the unit."""
        first = self.coords[0]
        return all(c == first for c in self.coords)

    def __eq__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.coords)
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return "AlgElem(" + ", ".join(str(c) for c in self.coords) + ")"

    def to_complex(self) -> list[complex]:
        return [complex(c) for c in self.coords]


class LinearMap:
    """A linear map on C^d, ``(M b)_i = sum_j M[i][j] b_j``."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: Sequence[Sequence]):
        rows = tuple(tuple(as_crational(x) for x in row) for row in matrix)
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise ValueError("a linear map needs a non-empty square matrix")
        object.__setattr__(self, "matrix", rows)

    def __setattr__(self, name, value):
        raise AttributeError("LinearMap is immutable")

    @classmethod
    def identity(cls, d: int) -> "LinearMap":
        return cls([[ONE if i == j else ZERO for j in range(d)] for i in range(d)])

    @classmethod
    def zero(cls, d: int) -> "LinearMap":
        return cls([[ZERO] * d for _ in range(d)])

    @property
    def dimension(self) -> int:
        return len(self.matrix)

    def __call__(self, b: AlgElem) -> AlgElem:
        _check_same(self.dimension, b.dimension)
        out = []
        for row in self.matrix:
            acc = ZERO
            for m, x in zip(row, b.coords):
                if m and x:
                    acc = acc + m * x
            out.append(acc)
        return AlgElem._raw(tuple(out))

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        """Composition ``self ∘ other``."""
        _check_same(self.dimension, other.dimension)
        d = self.dimension
        return LinearMap([[sum((self.matrix[i][k] * other.matrix[k][j] for k in range(d)), ZERO)
                           for j in range(d)] for i in range(d)])

    def __add__(self, other: "LinearMap") -> "LinearMap":
        _check_same(self.dimension, other.dimension)
        return LinearMap([[a + b for a, b in zip(r, s)] for r, s in zip(self.matrix, other.matrix)])

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        _check_same(self.dimension, other.dimension)
        return LinearMap([[a - b for a, b in zip(r, s)] for r, s in zip(self.matrix, other.matrix)])

    def __mul__(self, s) -> "LinearMap":
        s = as_crational(s)
        return LinearMap([[a * s for a in r] for r in self.matrix])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LinearMap):
            return NotImplemented
        return self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        rows = "; ".join(", ".join(str(x) for x in r) for r in self.matrix)
        return f"LinearMap([{rows}])"


class TraceFunctional:
    """``tau(b) = sum_i w_i b_i`` with exact rational weights."""

    __slots__ = ("weights",)

    def __init__(self, weights: Sequence):
        w = tuple(as_crational(x) for x in weights)
        if not w:
            raise ValueError("a trace needs at least one weight")
        if any(not x.is_real() for x in w):
            raise ValueError("trace weights must be real rationals")
        object.__setattr__(self, "weights", w)

    def __setattr__(self, name, value):
        raise AttributeError("TraceFunctional is immutable")

    @classmethod
    def uniform(cls, d: int) -> "TraceFunctional":
        return cls([CRational(1) / d] * d)

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def is_state(self) -> bool:
        return all(w.re >= 0 for w in self.weights) and sum(self.weights, ZERO) == 1

    def __call__(self, b: AlgElem) -> CRational:
        _check_same(self.dimension, b.dimension)
        acc = ZERO
        for w, x in zip(self.weights, b.coords):
            if w and x:
                acc = acc + w * x
        return acc

    def __repr__(self):
        return "TraceFunctional(" + ", ".join(str(w) for w in self.weights) + ")"


class Automorphism:
    """Coordinate permutation ``theta(b)_i = b_{perm[i]}`` (0-indexed).

    Every *-automorphism of the commutative algebra C^d has this form.
    """

    __slots__ = ("perm",)

    def __init__(self, perm: Sequence[int]):
        p = tuple(int(i) for i in perm)
        if sorted(p) != list(range(len(p))):
            raise ValueError(f"not a permutation of 0..{len(p) - 1}: {perm!r}")
        object.__setattr__(self, "perm", p)

    def __setattr__(self, name, value):
        raise AttributeError("Automorphism is immutable")

    @classmethod
    def identity(cls, d: int) -> "Automorphism":
        return cls(range(d))

    @classmethod
    def flip(cls, d: int) -> "Automorphism":
        """Reversal ``i -> d-1-i``; the discrete analogue of ``t -> 1-t``."""
        return cls(range(d - 1, -1, -1))

    @property
    def dimension(self) -> int:
        return len(self.perm)

    def __call__(self, b: AlgElem) -> AlgElem:
        _check_same(self.dimension, b.dimension)
        c = b.coords
        return AlgElem._raw(tuple(c[j] for j in self.perm))

    def inverse(self) -> "Automorphism":
        inv = [0] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
        return Automorphism(inv)

    def conjugate_map(self, m: LinearMap) -> LinearMap:
        """The linear map ``b -> theta(m(theta^{-1}(b)))``."""
        _check_same(self.dimension, m.dimension)
        p = self.perm
        d = len(p)
        # theta(M theta^{-1} b)_i = sum_j M[p[i]][j] b_{inv[j]} = sum_k M[p[i]][p[k]] b_k
        return LinearMap([[m.matrix[p[i]][p[k]] for k in range(d)] for i in range(d)])

    def __eq__(self, other):
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.perm == other.perm

    def __hash__(self):
        return hash(self.perm)

    def __repr__(self):
        return f"Automorphism({list(self.perm)})"


def alg_arith(op: str, *operands):
    """Dispatch ``add``, ``sub``, ``mul``, ``star`` or ``scale`` on algebra elements.

    ``scale`` takes ``(element, scalar)``; ``add`` and ``mul`` fold over any
    number of operands.
    """
    if not operands:
        raise ValueError("alg_arith needs at least one operand")
    if op == "star":
        (b,) = operands
        return b.star()
    if op == "scale":
        b, s = operands
        return b.scale(s)
    elems = list(operands)
    d = elems[0].dimension
    for e in elems[1:]:
        _check_same(d, e.dimension)
    if op == "add":
        out = elems[0]
        for e in elems[1:]:
            out = out + e
        return out
    if op == "sub":
        a, b = elems
        return a - b
    if op == "mul":
        out = elems[0]
        for e in elems[1:]:
            out = out * e
        return out
    raise ValueError(f"unknown algebra operation {op!r}")


def check_positive_map(m: LinearMap) -> bool:
    """Complete positivity of a map on commutative C^d.

    For C^d positivity and complete positivity coincide, and both reduce to
    the representing matrix being entrywise real and nonnegative.
    """
    return all(x.is_real() and x.re >= 0 for row in m.matrix for x in row)


def apply_trace(tau: TraceFunctional, b: AlgElem) -> CRational:
    return tau(b)
