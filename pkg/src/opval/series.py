"""Truncated B-valued power series and multilinear function series.

``BSeries`` is a power series in one formal variable z with coefficients in
B = C^d.  The variable z counts a-a* pairs, so ``F(b1, b2) = sum_n
E((a b1 a* b2)^n) z^n``.

``MultiSeries`` is a multilinear function series: term n is an n-linear map
``B^n -> B`` stored sparsely as ``{(i, k_1..k_n): value}``.
"""

from __future__ import annotations

from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from ._rational import ONE, ZERO, CRational, as_crational
from .algebra import AlgElem, DimensionMismatch, TraceFunctional
from .circular import CircularModel
from .cumulants import MapFamily, apply_tensor
from .rdiag import RDiagModel, alt_word

__all__ = [
    "BSeries",
    "series_arith",
    "solve_FG",
    "solve_alternating_series",
    "MultiSeries",
    "multi_compose",
    "moment_multiseries",
    "cumulant_multiseries",
    "alternating_assignment",
    "check_M_recursion",
]


# ---------------------------------------------------------------------------
# power series in z
# ---------------------------------------------------------------------------

class BSeries:
    """c_0 + c_1 z + ... + c_N z^N with c_n in C^d."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[AlgElem]):
        c = tuple(coeffs)
        if not c:
            raise ValueError("a series needs at least a constant term")
        d = c[0].dimension
        if any(x.dimension != d for x in c):
            raise DimensionMismatch("coefficients of different dimensions")
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("BSeries is immutable")

    @classmethod
    def constant(cls, b: AlgElem, N: int) -> "BSeries":
        z = AlgElem.zero(b.dimension)
        return cls((b,) + (z,) * N)

    @classmethod
    def zero(cls, d: int, N: int) -> "BSeries":
        return cls((AlgElem.zero(d),) * (N + 1))

    @classmethod
    def one(cls, d: int, N: int) -> "BSeries":
        return cls.constant(AlgElem.unit(d), N)

    @classmethod
    def z(cls, d: int, N: int) -> "BSeries":
        c = [AlgElem.zero(d)] * (N + 1)
        if N >= 1:
            c[1] = AlgElem.unit(d)
        return cls(c)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @property
    def dimension(self) -> int:
        return self.coeffs[0].dimension

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def _check(self, other: "BSeries"):
        if not isinstance(other, BSeries):
            raise TypeError("expected a BSeries")
        if other.N != self.N:
            raise ValueError(f"truncation mismatch: {self.N} vs {other.N}")
        if other.dimension != self.dimension:
            raise DimensionMismatch(f"dimension mismatch: {self.dimension} vs {other.dimension}")

    def __add__(self, other: "BSeries") -> "BSeries":
        self._check(other)
        return BSeries([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "BSeries") -> "BSeries":
        self._check(other)
        return BSeries([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return BSeries([-a for a in self.coeffs])

    def __mul__(self, other) -> "BSeries":
        if isinstance(other, AlgElem):
            return BSeries([a * other for a in self.coeffs])
        if not isinstance(other, BSeries):
            s = as_crational(other)
            return BSeries([a * s for a in self.coeffs])
        self._check(other)
        N = self.N
        d = self.dimension
        out = []
        for n in range(N + 1):
            acc = AlgElem.zero(d)
            for k in range(n + 1):
                acc = acc + self.coeffs[k] * other.coeffs[n - k]
            out.append(acc)
        return BSeries(out)

    def __rmul__(self, other):
        # B is commutative, so left and right multiplication agree
        return self.__mul__(other)

    def __eq__(self, other):
        if not isinstance(other, BSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    __hash__ = None

    def traced(self, tau: TraceFunctional) -> list[CRational]:
        return [tau(c) for c in self.coeffs]

    def __repr__(self):
        return "BSeries(" + ", ".join(repr(c) for c in self.coeffs) + ")"


def series_arith(op: str, *operands):
    """``add``, ``sub``, ``mul`` (truncated Cauchy product) or ``embed`` (b, N)."""
    if op == "embed":
        b, N = operands
        return BSeries.constant(b, N)
    if not operands:
        raise ValueError("no operands")
    out = operands[0]
    if op == "add":
        for s in operands[1:]:
            out = out + s
    elif op == "sub":
        a, b = operands
        out = a - b
    elif op == "mul":
        for s in operands[1:]:
            out = out * s
    else:
        raise ValueError(f"unknown series operation {op!r}")
    return out


# ---------------------------------------------------------------------------
# fixed-point recursions
# ---------------------------------------------------------------------------

def solve_FG(model: CircularModel, b1: AlgElem, b2: AlgElem, N: int) -> tuple[BSeries, BSeries]:
    """F(b1, b2) and G(b1, b2) for a circular element, to order z^N.

    The recursions pair up F(b1,b2) with G(b2,b1) and F(b2,b1) with G(b1,b2):

        F(x, y) = 1 + z eta1(x G(y, x)) y F(x, y)
        G(x, y) = 1 + z eta2(x F(y, x)) y G(x, y)

    and the z^n coefficient on the right only involves lower coefficients.
    """
    if N < 0:
        raise ValueError("truncation must be >= 0")
    d = model.dimension
    unit = AlgElem.unit(d)
    e1, e2 = model.eta1, model.eta2

    def pair(x, y):
        F, Gs = [unit], [unit]      # F(x, y) and G(y, x)
        for n in range(1, N + 1):
            f = g = AlgElem.zero(d)
            for k in range(n):
                f = f + e1(x * Gs[k]) * y * F[n - 1 - k]
                g = g + e2(y * F[k]) * x * Gs[n - 1 - k]
            F.append(f)
            Gs.append(g)
        return F, Gs

    F12, _ = pair(b1, b2)
    _, G12 = pair(b2, b1)
    return BSeries(F12), BSeries(G12)


def _weak_compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def solve_alternating_series(model: RDiagModel, b1: AlgElem, b2: AlgElem, N: int) -> tuple[BSeries, BSeries]:
    """F, G for an R-diagonal element from all alternating cumulants beta_l.

        F(x,y) = 1 + sum_l beta_l^(1)(x G(y,x), y F(x,y), ..., x G(y,x)) y F(x,y)

    and symmetrically for G.  beta_l contributes z^l and each inserted
    series its own degree.
    """
    if N < 0:
        raise ValueError("truncation must be >= 0")
    d = model.dimension
    unit = AlgElem.unit(d)
    zero = AlgElem.zero(d)

    def pair(x, y, first: int):
        # S[0] = first-kind series at (x, y); S[1] = other kind at (y, x)
        S = ([unit], [unit])
        mults = ((x, y), (y, x))
        for n in range(1, N + 1):
            new = []
            for side in (0, 1):
                which = first if side == 0 else 3 - first
                u, v = mults[side]
                acc = zero
                for ell in range(1, min(n, model.K) + 1):
                    tens = model.beta(which, ell)
                    if not any(tens):
                        continue
                    for ks in _weak_compositions(n - ell, 2 * ell):
                        args = []
                        for t in range(2 * ell - 1):
                            # odd slots (1-based) carry u * other-series, even slots v * own-series
                            if t % 2 == 0:
                                args.append(u * S[1 - side][ks[t]])
                            else:
                                args.append(v * S[side][ks[t]])
                        acc = acc + apply_tensor(tens, d, args) * v * S[side][ks[-1]]
                new.append(acc)
            S[0].append(new[0])
            S[1].append(new[1])
        return S

    F12, _ = pair(b1, b2, 1)
    G12, _ = pair(b1, b2, 2)
    return BSeries(F12), BSeries(G12)


# ---------------------------------------------------------------------------
# multilinear function series
# ---------------------------------------------------------------------------

def _clean(t: Mapping) -> dict:
    return {k: v for k, v in t.items() if v}


class MultiSeries:
    """Terms chi_0..chi_N; ``terms[n]`` maps ``(i, k_1..k_n)`` to the entry of chi_n."""

    __slots__ = ("dimension", "terms")

    def __init__(self, dimension: int, terms: Sequence[Mapping]):
        self.dimension = dimension
        ts = []
        for n, t in enumerate(terms):
            t = {tuple(k): as_crational(v) for k, v in t.items()}
            for k in t:
                if len(k) != n + 1 or any(not 0 <= x < dimension for x in k):
                    raise ValueError(f"bad index {k!r} for term {n}")
            ts.append(_clean(t))
        if not ts:
            raise ValueError("a multilinear function series needs a constant term")
        self.terms = tuple(ts)

    @property
    def N(self) -> int:
        return len(self.terms) - 1

    @classmethod
    def zero(cls, d: int, N: int) -> "MultiSeries":
        return cls(d, [{}] * (N + 1))

    @classmethod
    def one(cls, d: int, N: int) -> "MultiSeries":
        return cls(d, [{(i,): ONE for i in range(d)}] + [{}] * N)

    @classmethod
    def identity(cls, d: int, N: int) -> "MultiSeries":
        """I: zero except the identity map as the 1-linear term."""
        terms = [{} for _ in range(N + 1)]
        if N >= 1:
            terms[1] = {(i, i): ONE for i in range(d)}
        return cls(d, terms)

    def constant_term(self) -> AlgElem:
        return AlgElem._raw(tuple(self.terms[0].get((i,), ZERO) for i in range(self.dimension)))

    def _check(self, other: "MultiSeries"):
        if other.dimension != self.dimension:
            raise DimensionMismatch("dimension mismatch")
        if other.N != self.N:
            raise ValueError(f"truncation mismatch: {self.N} vs {other.N}")

    def __add__(self, other: "MultiSeries") -> "MultiSeries":
        self._check(other)
        out = []
        for a, b in zip(self.terms, other.terms):
            t = dict(a)
            for k, v in b.items():
                t[k] = t.get(k, ZERO) + v
            out.append(t)
        return MultiSeries(self.dimension, out)

    def __sub__(self, other: "MultiSeries") -> "MultiSeries":
        return self + other.scale(-1)

    def scale(self, s) -> "MultiSeries":
        s = as_crational(s)
        return MultiSeries(self.dimension, [{k: v * s for k, v in t.items()} for t in self.terms])

    def __mul__(self, other: "MultiSeries") -> "MultiSeries":
        """(X Psi)_n(b_1..b_n) = sum_k chi_k(b_1..b_k) psi_{n-k}(b_{k+1}..b_n)."""
        self._check(other)
        N = self.N
        out = [dict() for _ in range(N + 1)]
        for k, X in enumerate(self.terms):
            if not X:
                continue
            for m, Y in enumerate(other.terms[:N + 1 - k]):
                if not Y:
                    continue
                tgt = out[k + m]
                for kx, vx in X.items():
                    i = kx[0]
                    for ky, vy in Y.items():
                        if ky[0] != i:
                            continue
                        key = kx + ky[1:]
                        tgt[key] = tgt.get(key, ZERO) + vx * vy
        return MultiSeries(self.dimension, out)

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.dimension == other.dimension and self.terms == other.terms

    __hash__ = None

    def term_apply(self, n: int, args: Sequence[AlgElem]) -> AlgElem:
        if len(args) != n:
            raise ValueError(f"term {n} takes {n} arguments")
        acc = [ZERO] * self.dimension
        for key, v in self.terms[n].items():
            x = v
            for b, k in zip(args, key[1:]):
                x = x * b.coords[k]
                if not x:
                    break
            if x:
                acc[key[0]] = acc[key[0]] + x
        return AlgElem._raw(tuple(acc))

    def evaluate(self, v: Callable[[int, int], AlgElem]) -> list[AlgElem]:
        """The formal sum chi_0 + sum_n chi_n(v(n,1), .., v(n,n)) as its term sequence."""
        out = [self.constant_term()]
        for n in range(1, self.N + 1):
            out.append(self.term_apply(n, [v(n, j) for j in range(1, n + 1)]))
        return out

    def truncate(self, N: int) -> "MultiSeries":
        terms = list(self.terms[:N + 1]) + [{}] * max(0, N - self.N)
        return MultiSeries(self.dimension, terms)


def _compositions(n: int, p: int):
    """k(1) + .. + k(p) = n with every k(t) >= 1."""
    if p == 1:
        yield (n,)
        return
    for first in range(1, n - p + 2):
        for rest in _compositions(n - first, p - 1):
            yield (first,) + rest


def multi_compose(X: MultiSeries, f: Callable[[int, int], int] | Mapping | int,
                  Psis: Sequence[MultiSeries] | Mapping[int, MultiSeries]) -> MultiSeries:
    """X composed with the family Psi, argument j of chi_p taking Psi^(f(p, j)).

    ``f`` may be a callable, a dict keyed by (p, j), or a constant index.
    ``Psis`` is indexed from 1 when given as a sequence.
    """
    if isinstance(Psis, Mapping):
        fam = dict(Psis)
    else:
        fam = {i + 1: P for i, P in enumerate(Psis)}
    if callable(f):
        ff = f
    elif isinstance(f, Mapping):
        ff = lambda p, j: f[(p, j)]
    else:
        ff = lambda p, j, c=int(f): c
    d, N = X.dimension, X.N
    for idx, P in fam.items():
        if P.dimension != d:
            raise DimensionMismatch("dimension mismatch in composition")
        if P.terms[0]:
            raise ValueError(f"Psi^({idx}) has a nonzero constant term")
        if P.N < N:
            raise ValueError(f"Psi^({idx}) is truncated at {P.N} < {N}")
    out = [dict(X.terms[0])] + [dict() for _ in range(N)]
    for n in range(1, N + 1):
        tgt = out[n]
        for p in range(1, n + 1):
            chi = X.terms[p]
            if not chi:
                continue
            for ks in _compositions(n, p):
                parts = [fam[ff(p, j + 1)].terms[ks[j]] for j in range(p)]
                if any(not t for t in parts):
                    continue
                # contract the arguments of chi_p one at a time, left to right
                stage = [((key[0],), key[1:], v) for key, v in chi.items()]
                for t, psi in enumerate(parts):
                    by_m: dict = {}
                    for key, v in psi.items():
                        by_m.setdefault(key[0], []).append((key[1:], v))
                    nxt: dict = {}
                    for head, rest, v in stage:
                        m = rest[0]
                        for tail, w in by_m.get(m, ()):
                            k2 = (head + tail, rest[1:])
                            nxt[k2] = nxt.get(k2, ZERO) + v * w
                    stage = [(h, r, v) for (h, r), v in nxt.items() if v]
                for head, _, v in stage:
                    tgt[head] = tgt.get(head, ZERO) + v
    return MultiSeries(d, out)


# ---------------------------------------------------------------------------
# the alternating moment / cumulant series of an R-diagonal element
# ---------------------------------------------------------------------------

def moment_multiseries(momfamily: MapFamily, which: int, N: int) -> MultiSeries:
    """M^(i): constant 1 and 2n-th term m_n^(i), the alternating moment with its trailing coefficient.

    m_n^(i)(b_1..b_2n)[r] = psi_w(b_1..b_{2n-1})[r] * b_2n[r], so the tensor is
    ``psi[r, k_1..k_{2n-1}]`` on the diagonal ``k_2n = r``.
    """
    a, s = momfamily.labels[0], momfamily.labels[1]
    d = momfamily.dimension
    terms = [{(i,): ONE for i in range(d)}]
    for n in range(1, N + 1):
        if n % 2:
            terms.append({})
            continue
        half = n // 2
        word = alt_word(a, s, half) if which == 1 else alt_word(s, a, half)
        t = momfamily.tensor(word)
        term = {}
        if t is not None:
            for pos, idx in enumerate(product(range(d), repeat=n)):
                v = t[pos]
                if v:
                    term[idx + (idx[0],)] = v
        terms.append(term)
    return MultiSeries(d, terms)


def cumulant_multiseries(model: RDiagModel, which: int, N: int) -> MultiSeries:
    """A^(i): zero constant and even terms, (2l-1)-th term beta_l^(i)."""
    d = model.dimension
    terms = [{}]
    for n in range(1, N + 1):
        term = {}
        if n % 2 == 1 and (n + 1) // 2 <= model.K:
            t = model.beta(which, (n + 1) // 2)
            for pos, idx in enumerate(product(range(d), repeat=n + 1)):
                if t[pos]:
                    term[idx] = t[pos]
        terms.append(term)
    return MultiSeries(d, terms)


def alternating_assignment(b1: AlgElem, b2: AlgElem) -> Callable[[int, int], AlgElem]:
    """v(n, j) = b1 for odd j and b2 for even j."""
    return lambda n, j: b1 if j % 2 else b2


def _f_index(n: int, j: int) -> int:
    return 2 if j % 2 else 1


def _g_index(n: int, j: int) -> int:
    return 1 if j % 2 else 2


def check_M_recursion(momfamily: MapFamily, model: RDiagModel, N: int,
                      trailing: str = "IM") -> tuple[bool, bool]:
    """Check M^(i) = 1 + (A^(i) o (IM^(1), IM^(2))) T^(i) at truncation N.

    With ``trailing="IM"`` the last factor is T^(i) = I M^(i), which is what
    the alternating-moment recursion produces: its last factor is
    ``b m_k^(i)(..)``.  ``trailing="M"`` uses M^(i) itself; that version
    already fails in degree 2, where the left side is eta1(b_1) b_2 and the
    right side vanishes.
    """
    if trailing not in ("IM", "M"):
        raise ValueError("trailing must be 'IM' or 'M'")
    d = momfamily.dimension
    M1 = moment_multiseries(momfamily, 1, N)
    M2 = moment_multiseries(momfamily, 2, N)
    Id = MultiSeries.identity(d, N)
    IM = (Id * M1, Id * M2)
    T1, T2 = IM if trailing == "IM" else (M1, M2)
    one = MultiSeries.one(d, N)
    ok1 = M1 == one + multi_compose(cumulant_multiseries(model, 1, N), _f_index, IM) * T1
    ok2 = M2 == one + multi_compose(cumulant_multiseries(model, 2, N), _g_index, IM) * T2
    return ok1, ok2
