"""B-valued moment and cumulant families over B = C^d.

A multilinear map ``B^{n-1} -> B`` is stored as a dense tensor with entries
``T[i, k_1, ..., k_{n-1}]`` so that

    T(b_1, ..., b_{n-1})_i = sum_k T[i, k] * b_1[k_1] * ... * b_{n-1}[k_{n-1}].

Tensors are kept as flat row-major tuples of :class:`CRational`.  Because B
is commutative, every identity between such maps can be verified on basis
tuples, which is how all the checkers below work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from ._rational import ZERO, CRational, as_crational
from .algebra import AlgElem, DimensionMismatch, TraceFunctional
from .ncpart import Partition, interval_blocks, iter_nc

__all__ = [
    "MapFamily",
    "Verdict",
    "IncompleteFamily",
    "OrderOverflow",
    "apply_tensor",
    "words",
    "eval_nested",
    "eval_nested_all_orders",
    "moments_from_cumulants",
    "cumulants_to_moments",
    "cumulants_from_moments",
    "check_trace_condition",
    "check_moment_trace_condition",
    "check_selfadjoint",
    "cyclic_word",
]


class IncompleteFamily(KeyError):
    """A word of admissible length has no tensor in a non-sparse family."""

    def __str__(self):
        return str(self.args[0]) if self.args else "incomplete family"


class OrderOverflow(ValueError):
    """Requested word length exceeds the family's maximal order."""


@dataclass(frozen=True)
class Verdict:
    """Outcome of a checker: ``ok`` plus the first witness when it fails."""

    ok: bool
    witness: dict | None = None
    checked: int = 0

    def __bool__(self):
        return self.ok

    def __iter__(self):
        yield self.ok
        yield self.witness


# ---------------------------------------------------------------------------
# tensors
# ---------------------------------------------------------------------------

def _flatten(t, depth: int) -> list:
    if depth == 0:
        return [t]
    out = []
    for x in t:
        out.extend(_flatten(x, depth - 1))
    return out


def _to_flat(tensor, d: int, n: int) -> tuple:
    """Accept a flat sequence of d**n entries or a nested (d,)*n array.

    Leaves may be anything :func:`as_crational` takes, including
    ``[re_num, re_den, im_num, im_den]`` quadruples.
    """
    if hasattr(tensor, "tolist") and not isinstance(tensor, (list, tuple)):
        tensor = tensor.tolist()
    size = d ** n
    nested_d1 = d == 1 and n > 1 and isinstance(tensor[0], (list, tuple)) and len(tensor[0]) == 1
    if len(tensor) == size and not nested_d1:
        flat = list(tensor)
    else:
        try:
            flat = _flatten(tensor, n)
        except TypeError:
            raise ValueError(f"tensor for a word of length {n} needs {size} entries "
                             f"or a nested ({d},)*{n} array") from None
    if len(flat) != size:
        raise ValueError(f"tensor for a word of length {n} needs {size} entries, got {len(flat)}")
    return tuple(as_crational(x) for x in flat)


def apply_tensor(flat: Sequence[CRational], d: int, args: Sequence[AlgElem]) -> AlgElem:
    """Evaluate a flat tensor of order ``len(args)+1`` on algebra elements."""
    cur = list(flat)
    for b in reversed(args):
        if b.dimension != d:
            raise DimensionMismatch(f"argument of dimension {b.dimension}, expected {d}")
        c = b.coords
        nxt = []
        for base in range(0, len(cur), d):
            acc = ZERO
            for k in range(d):
                t = cur[base + k]
                if t and c[k]:
                    acc = acc + t * c[k]
            nxt.append(acc)
        cur = nxt
    return AlgElem._raw(tuple(cur))


def words(labels: Sequence, n: int) -> Iterator[tuple]:
    """All words of length n over ``labels``, lexicographic in label order."""
    return product(labels, repeat=n)


def cyclic_word(j: Sequence) -> tuple:
    """Left rotation ``(j2, ..., jn, j1)``."""
    return tuple(j[1:]) + (j[0],)


# ---------------------------------------------------------------------------
# MapFamily
# ---------------------------------------------------------------------------

class MapFamily:
    """Keyed lookup ``word -> multilinear map`` for a family of random variables.

    Parameters
    ----------
    dimension : int
        d, the dimension of B.
    labels : sequence
        The index set I. Words are tuples over it.
    maps : mapping
        ``word -> tensor``; tensors may be flat (d**n entries) or nested.
    kind : {"moments", "cumulants"}
    max_order : int, optional
        Longest word the family speaks for. Defaults to the longest key.
    sparse : bool
        If true, absent words of length <= max_order are zero maps.
        Otherwise asking for one raises :class:`IncompleteFamily`.
    """

    KINDS = ("moments", "cumulants")

    def __init__(self, dimension: int, labels: Sequence[Hashable], maps: Mapping,
                 kind: str = "cumulants", max_order: int | None = None, sparse: bool = False):
        if kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}, got {kind!r}")
        if not isinstance(dimension, int) or dimension < 1:
            raise ValueError(f"dimension must be a positive integer, got {dimension!r}")
        labels = tuple(labels)
        if not labels or len(set(labels)) != len(labels):
            raise ValueError("labels must be nonempty and distinct")
        lab = set(labels)
        table = {}
        for w, t in maps.items():
            w = tuple(w)
            if not w:
                raise ValueError("empty word")
            if any(x not in lab for x in w):
                raise ValueError(f"word {w!r} uses a label outside {labels!r}")
            table[w] = _to_flat(t, dimension, len(w))
        longest = max((len(w) for w in table), default=0)
        if max_order is None:
            max_order = longest
        elif longest > max_order:
            raise ValueError(f"word of length {longest} exceeds max_order {max_order}")
        self.dimension = dimension
        self.labels = labels
        self.kind = kind
        self.max_order = int(max_order)
        self.sparse = bool(sparse)
        self._table = table
        self._nonzero = {w for w, t in table.items() if any(t)}

    # -- lookup ---------------------------------------------------------------
    def _check_len(self, word: tuple):
        if len(word) > self.max_order:
            raise OrderOverflow(f"word of length {len(word)} exceeds max order {self.max_order}")

    def tensor(self, word: Sequence) -> tuple | None:
        """Flat tensor for ``word``, or ``None`` for a known-zero map."""
        word = tuple(word)
        t = self._table.get(word)
        if t is not None:
            return t if word in self._nonzero else None
        self._check_len(word)
        if self.sparse:
            return None
        raise IncompleteFamily(f"no {self.kind[:-1]} map for word {list(word)!r}")

    def dense(self, word: Sequence) -> tuple:
        t = self.tensor(word)
        if t is None:
            return (ZERO,) * (self.dimension ** len(tuple(word)))
        return t

    def entry(self, word: Sequence, idx: Sequence[int]) -> CRational:
        t = self.tensor(word)
        if t is None:
            return ZERO
        d = self.dimension
        pos = 0
        for k in idx:
            pos = pos * d + k
        return t[pos]

    def is_zero(self, word: Sequence) -> bool:
        return self.tensor(word) is None

    def apply(self, word: Sequence, args: Sequence[AlgElem]) -> AlgElem:
        word = tuple(word)
        if len(args) != len(word) - 1:
            raise ValueError(f"word of length {len(word)} takes {len(word) - 1} arguments, got {len(args)}")
        t = self.tensor(word)
        if t is None:
            for b in args:
                if b.dimension != self.dimension:
                    raise DimensionMismatch(f"argument of dimension {b.dimension}, expected {self.dimension}")
            return AlgElem.zero(self.dimension)
        return apply_tensor(t, self.dimension, args)

    def stored_words(self) -> list[tuple]:
        return sorted(self._table, key=lambda w: (len(w), [self.labels.index(x) for x in w]))

    def nonzero_words(self) -> list[tuple]:
        return [w for w in self.stored_words() if w in self._nonzero]

    def all_words(self, max_len: int | None = None) -> Iterator[tuple]:
        top = self.max_order if max_len is None else max_len
        for n in range(1, top + 1):
            yield from words(self.labels, n)

    def items(self):
        for w in self.stored_words():
            yield w, self._table[w]

    def with_maps(self, updates: Mapping, **kw) -> "MapFamily":
        """A copy with some tensors replaced or added."""
        maps = dict(self._table)
        maps.update({tuple(w): t for w, t in updates.items()})
        opts = dict(dimension=self.dimension, labels=self.labels, kind=self.kind,
                    max_order=max(self.max_order, max((len(tuple(w)) for w in updates), default=0)),
                    sparse=self.sparse)
        opts.update(kw)
        return MapFamily(maps=maps, **opts)

    def __eq__(self, other):
        """Equal as families: same metadata and same maps on every word up to max_order."""
        if not isinstance(other, MapFamily):
            return NotImplemented
        if (self.dimension, self.labels, self.kind, self.max_order) != (
                other.dimension, other.labels, other.kind, other.max_order):
            return False
        for w in set(self._table) | set(other._table):
            try:
                if self.dense(w) != other.dense(w):
                    return False
            except IncompleteFamily:
                return False
        return True

    __hash__ = None

    def __repr__(self):
        return (f"MapFamily(d={self.dimension}, labels={list(self.labels)}, kind={self.kind!r}, "
                f"max_order={self.max_order}, words={len(self._table)}, sparse={self.sparse})")


# ---------------------------------------------------------------------------
# nested evaluation over a noncrossing partition
# ---------------------------------------------------------------------------

def _remove_block(pi: Partition, p: int, q: int) -> Partition:
    """Restrict pi to the complement of {p..p+q-1} and renumber."""
    def ren(x):
        return x if x < p else x - q
    bl = tuple(tuple(ren(x) for x in b) for b in pi.blocks if b[0] != p)
    return Partition._trusted(pi.n - q, bl)


def _nested_split(family: MapFamily, j: tuple, pi: Partition, args: list, block: tuple):
    """Strip ``block``: return the reduced problem and the map taking its
    value to the value of the original one."""
    n = pi.n
    p, q = block[0], len(block)
    jpp = j[p - 1:p + q - 1]
    jp = j[:p - 1] + j[p + q - 1:]
    pi_p = _remove_block(pi, p, q)
    # args are 0-indexed here: b_k is args[k-1]
    if p >= 2 and p + q - 1 < n:
        inner = family.apply(jpp, args[p - 1:p + q - 2])
        mid = args[p - 2] * inner * args[p + q - 2]
        return (jp, pi_p, args[:p - 2] + [mid] + args[p + q - 1:]), None
    if p >= 2:
        tail = args[p - 2] * family.apply(jpp, args[p - 1:])
        return (jp, pi_p, args[:p - 2]), lambda v: v * tail
    head = family.apply(jpp, args[:q - 1]) * args[q - 1]
    return (jp, pi_p, args[q:]), lambda v: head * v


def _nested_step(family: MapFamily, j: tuple, pi: Partition, args: list, block: tuple, recurse):
    sub, finish = _nested_split(family, j, pi, args, block)
    val = recurse(*sub)
    return val if finish is None else finish(val)


def _prepare(family: MapFamily, j, pi: Partition, args) -> tuple[tuple, list]:
    j = tuple(j)
    if len(j) != pi.n:
        raise ValueError(f"word length {len(j)} does not match partition size {pi.n}")
    if len(args) != len(j) - 1:
        raise ValueError(f"word of length {len(j)} takes {len(j) - 1} arguments, got {len(args)}")
    if len(j) > family.max_order:
        raise OrderOverflow(f"word of length {len(j)} exceeds max order {family.max_order}")
    return j, list(args)


def eval_nested(family: MapFamily, j: Sequence, pi: Partition, args: Sequence[AlgElem],
                select: Callable[[list], int] | None = None) -> AlgElem:
    """The nested map alpha-hat_j(pi)[b_1..b_{n-1}].

    Recursively strips an interval block of pi. ``select`` picks which one
    (an index into the list of removable interval blocks); the default takes
    the first.  The result does not depend on the choice.
    """
    j, args = _prepare(family, j, pi, args)
    d = family.dimension
    zero = AlgElem.zero(d)

    # a zero block map kills the whole product
    if family.sparse and any(family.is_zero(tuple(j[x - 1] for x in b)) for b in pi.blocks):
        return zero

    def rec(j, pi, args):
        if len(pi.blocks) == 1:
            return family.apply(j, args)
        cands = [b for b in interval_blocks(pi) if len(b) < pi.n]
        k = 0 if select is None else select(cands)
        return _nested_step(family, j, pi, args, cands[k], rec)

    return rec(j, pi, args)


def eval_nested_all_orders(family: MapFamily, j: Sequence, pi: Partition,
                           args: Sequence[AlgElem], distinct: bool = False) -> list[AlgElem]:
    """Evaluate alpha-hat_j(pi) along every possible sequence of block choices.

    With ``distinct`` the values are deduplicated at every level, giving the
    set of values reached by all orders (each step is a function of the
    reduced value) without replaying identical sub-results.
    """
    j, args = _prepare(family, j, pi, args)

    def rec_all(j, pi, args):
        if len(pi.blocks) == 1:
            return [family.apply(j, args)]
        out = []
        for b in interval_blocks(pi):
            if len(b) == pi.n:
                continue
            sub, finish = _nested_split(family, j, pi, args, b)
            vals = rec_all(*sub)
            out.extend(vals if finish is None else [finish(v) for v in vals])
        if distinct:
            out = list(dict.fromkeys(out))
        return out

    return rec_all(j, pi, args)


def moments_from_cumulants(family: MapFamily, j: Sequence, args: Sequence[AlgElem]) -> AlgElem:
    """E(a_{j1} b_1 a_{j2} ... b_{n-1} a_{jn}) as the sum over NC(n) of nested maps."""
    if family.kind != "cumulants":
        raise ValueError("moments_from_cumulants needs a cumulant family")
    j = tuple(j)
    total = AlgElem.zero(family.dimension)
    for pi in iter_nc(len(j)):
        total = total + eval_nested(family, j, pi, args)
    return total


# ---------------------------------------------------------------------------
# fast tensor-level conversion
# ---------------------------------------------------------------------------
#
# Sorting NC(n) by the block V containing 1 gives
#
#   psi_j(b) = sum_V alpha_{j|V}(c_1, ..., c_{s-1}) * b_{v_s} * psi_tail
#   c_r = b_{v_r} * psi_{gap r} * b_{v_{r+1}-1}     (c_r = b_{v_r} for an empty gap)
#
# where gaps and tail are full moment maps of contiguous subwords.  In
# coordinates every factor is diagonal, so each V contributes a sum of
# products of single tensor entries over a reduced index set.  The index
# bookkeeping depends only on (d, n, V) and is cached.

@lru_cache(maxsize=None)
def _first_block_pattern(d: int, n: int, V: tuple):
    s = len(V)
    segs = []  # (first, last) positions of gaps then tail, 1-based
    for r in range(s - 1):
        if V[r + 1] - V[r] > 1:
            segs.append((V[r] + 1, V[r + 1] - 1))
    has_tail = V[-1] < n
    if has_tail:
        segs.append((V[-1] + 1, n))
    entries = []
    for idx in product(range(d), repeat=n):
        i, k = idx[0], (None,) + idx[1:]  # k[t] indexes b_t
        ok = True
        for r in range(s - 1):
            if V[r + 1] - V[r] > 1 and k[V[r]] != k[V[r + 1] - 1]:
                ok = False
                break
        if not ok or (has_tail and k[V[-1]] != i):
            continue
        a_pos = i
        for r in range(s - 1):
            a_pos = a_pos * d + k[V[r]]
        seg_pos = []
        for a, b in segs:
            # gap entry is psi_gap[m, k_a .. k_{b-1}] with m = k_{a-1}; tail uses m = i
            pos = k[a - 1]
            for t in range(a, b):
                pos = pos * d + k[t]
            seg_pos.append(pos)
        out = 0
        for x in idx:
            out = out * d + x
        entries.append((out, a_pos, tuple(seg_pos)))
    return tuple(segs), tuple(entries)


@lru_cache(maxsize=None)
def _blocks_with_one(n: int) -> tuple:
    out = []
    for r in range(n):
        for c in combinations(range(2, n + 1), r):
            out.append((1,) + c)
    return tuple(out)


def _accumulate(acc: list, d: int, n: int, V: tuple, alpha, seg_tensors) -> None:
    _, entries = _first_block_pattern(d, n, V)
    if not seg_tensors:
        for out, a, _ in entries:
            x = alpha[a]
            if x:
                acc[out] = acc[out] + x
        return
    for out, a, sp in entries:
        x = alpha[a]
        if not x:
            continue
        for t, p in zip(seg_tensors, sp):
            y = t[p]
            if not y:
                x = None
                break
            x = x * y
        if x is not None:
            acc[out] = acc[out] + x


def _term_inputs(j: tuple, n: int, V: tuple, d: int, get_alpha, get_psi):
    segs, _ = _first_block_pattern(d, n, V)
    alpha = get_alpha(tuple(j[v - 1] for v in V))
    if alpha is None:
        return None
    segt = []
    for a, b in segs:
        t = get_psi(j[a - 1:b])
        if t is None:
            return None
        segt.append(t)
    return alpha, segt


def _zero_free(t: list) -> tuple | None:
    t = tuple(t)
    return t if any(t) else None


def cumulants_to_moments(family: MapFamily, max_order: int | None = None) -> MapFamily:
    """Moment family of every word up to ``max_order`` from a cumulant family."""
    if family.kind != "cumulants":
        raise ValueError("expected a cumulant family")
    N = family.max_order if max_order is None else max_order
    if N > family.max_order:
        raise OrderOverflow(f"requested order {N} exceeds max order {family.max_order}")
    d = family.dimension
    psi: dict[tuple, tuple | None] = {}
    for n in range(1, N + 1):
        for j in words(family.labels, n):
            acc = [ZERO] * (d ** n)
            for V in _blocks_with_one(n):
                got = _term_inputs(j, n, V, d, family.tensor, psi.__getitem__)
                if got is not None:
                    _accumulate(acc, d, n, V, got[0], got[1])
            psi[j] = _zero_free(acc)
    maps = {w: t for w, t in psi.items() if t is not None}
    return MapFamily(d, family.labels, maps, kind="moments", max_order=N, sparse=True)


def cumulants_from_moments(family: MapFamily, max_order: int | None = None) -> MapFamily:
    """Invert the moment-cumulant formula word by word.

    alpha_j = psi_j - (sum over V != {1..n} of the first-block terms), which
    is the NC(n) sum with the full partition split off.
    """
    if family.kind != "moments":
        raise ValueError("expected a moment family")
    N = family.max_order if max_order is None else max_order
    if N > family.max_order:
        raise IncompleteFamily(f"moments known only to order {family.max_order}, asked for {N}")
    d = family.dimension
    alpha: dict[tuple, tuple | None] = {}
    for n in range(1, N + 1):
        full = tuple(range(1, n + 1))
        for j in words(family.labels, n):
            acc = [ZERO] * (d ** n)
            for V in _blocks_with_one(n):
                if V == full:
                    continue
                got = _term_inputs(j, n, V, d, alpha.__getitem__, family.tensor)
                if got is not None:
                    _accumulate(acc, d, n, V, got[0], got[1])
            psi_j = family.dense(j)
            alpha[j] = _zero_free([p - a for p, a in zip(psi_j, acc)])
    maps = {w: t for w, t in alpha.items() if t is not None}
    return MapFamily(d, family.labels, maps, kind="cumulants", max_order=N, sparse=True)


# ---------------------------------------------------------------------------
# traciality and self-adjointness
# ---------------------------------------------------------------------------

def _trace_check(family: MapFamily, tau: TraceFunctional, L: int) -> Verdict:
    d = family.dimension
    if tau.dimension != d:
        raise DimensionMismatch(f"trace of dimension {tau.dimension}, family of dimension {d}")
    w = tau.weights
    L = min(L, family.max_order)
    checked = 0
    for n in range(1, L + 1):
        for j in words(family.labels, n):
            cj = cyclic_word(j)
            tj, tc = family.tensor(j), family.tensor(cj)
            if tj is None and tc is None:
                checked += d ** n
                continue
            for ks in product(range(d), repeat=n):
                # tau(T_j(e_k1..e_k{n-1}) e_kn) = w_kn T_j[kn, k1..k{n-1}]
                lhs = w[ks[-1]] * family.entry(j, (ks[-1],) + ks[:-1])
                rhs = w[ks[0]] * family.entry(cj, ks)
                checked += 1
                if lhs != rhs:
                    return Verdict(False, {"word": list(j), "basis_tuple": list(ks),
                                           "lhs": str(lhs), "rhs": str(rhs)}, checked)
    return Verdict(True, None, checked)


def check_trace_condition(family: MapFamily, tau: TraceFunctional, L: int) -> Verdict:
    """tau(alpha_j(b_1..b_{n-1}) b_n) == tau(b_1 alpha_{c(j)}(b_2..b_n)) on basis tuples.

    Words are scanned by length and then lexicographically, so the witness
    is the first violation in that order.
    """
    if family.kind != "cumulants":
        raise ValueError("expected a cumulant family")
    return _trace_check(family, tau, L)


def check_moment_trace_condition(family: MapFamily, tau: TraceFunctional, L: int) -> Verdict:
    """The same cyclic identity for moment maps psi_j."""
    if family.kind != "moments":
        raise ValueError("expected a moment family")
    return _trace_check(family, tau, L)


def check_selfadjoint(family: MapFamily, s: Mapping | Callable, L: int) -> Verdict:
    """alpha_j(b_1..b_{n-1})^* == alpha_{s~(j)}(b_{n-1}^*..b_1^*) on basis tuples.

    ``s`` is an involution of the labels, given as a dict or a callable;
    s~(j) reverses j and applies s letterwise.
    """
    sf = s.__getitem__ if isinstance(s, Mapping) else s
    for x in family.labels:
        if sf(sf(x)) != x:
            raise ValueError(f"label map is not an involution at {x!r}")
    d = family.dimension
    L = min(L, family.max_order)
    checked = 0
    for n in range(1, L + 1):
        for j in words(family.labels, n):
            sj = tuple(sf(x) for x in reversed(j))
            if family.tensor(j) is None and family.tensor(sj) is None:
                checked += d ** (n - 1)
                continue
            for ks in product(range(d), repeat=n - 1):
                checked += 1
                for i in range(d):
                    lhs = family.entry(j, (i,) + ks).conjugate()
                    rhs = family.entry(sj, (i,) + ks[::-1])
                    if lhs != rhs:
                        return Verdict(False, {"word": list(j), "basis_tuple": list(ks),
                                               "coordinate": i, "lhs": str(lhs), "rhs": str(rhs)},
                                       checked)
    return Verdict(True, None, checked)
