"""Noncrossing partitions of {1..n} and star-words."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Partition",
    "NC_MAX",
    "catalan",
    "is_noncrossing",
    "iter_nc",
    "enumerate_nc",
    "max_alt_interval_partition",
    "normalize_star_word",
    "rotate_partition",
    "reflect_partition",
    "interval_blocks",
]

NC_MAX = 14


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def is_noncrossing(blocks: Sequence[Sequence[int]]) -> bool:
    """No a<b<c<d with a, c in one block and b, d in another."""
    owner = {}
    for bi, blk in enumerate(blocks):
        for x in blk:
            owner[x] = bi
    # stack test: scanning left to right, a block may only be resumed if it
    # is the innermost one still open
    last = {bi: max(blk) for bi, blk in enumerate(blocks)}
    stack: list[int] = []
    for x in sorted(owner):
        b = owner[x]
        if stack and stack[-1] == b:
            pass
        elif b in stack:
            return False
        else:
            stack.append(b)
        if x == last[b]:
            stack.pop()
    return True


class Partition:
    """A noncrossing partition of {1..n} in canonical form.

    Blocks are sorted tuples, ordered by their minimum element.
    """

    __slots__ = ("n", "blocks")

    def __init__(self, blocks: Iterable[Iterable[int]], n: int | None = None):
        bl = [tuple(sorted(int(x) for x in b)) for b in blocks]
        if any(len(b) == 0 for b in bl):
            raise ValueError("partition blocks must be nonempty")
        bl.sort()
        elems = [x for b in bl for x in b]
        if n is None:
            n = len(elems)
        if sorted(elems) != list(range(1, n + 1)):
            raise ValueError(f"blocks do not partition {{1..{n}}}: {bl!r}")
        if not is_noncrossing(bl):
            raise ValueError(f"partition is crossing: {bl!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "blocks", tuple(bl))

    @classmethod
    def _trusted(cls, n: int, blocks: tuple) -> "Partition":
        p = object.__new__(cls)
        object.__setattr__(p, "n", n)
        object.__setattr__(p, "blocks", blocks)
        return p

    def __setattr__(self, name, value):
        raise AttributeError("Partition is immutable")

    @classmethod
    def full(cls, n: int) -> "Partition":
        return cls._trusted(n, (tuple(range(1, n + 1)),))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls._trusted(n, tuple((i,) for i in range(1, n + 1)))

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.n == other.n and self.blocks == other.blocks

    def __lt__(self, other: "Partition"):
        return self.blocks < other.blocks

    def __hash__(self):
        return hash((self.n, self.blocks))

    def __repr__(self):
        inner = ",".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return "{" + inner + "}"

    def to_lists(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]

    def is_interval(self) -> bool:
        return all(b[-1] - b[0] + 1 == len(b) for b in self.blocks)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _shift(blocks: tuple, off: int) -> tuple:
    return tuple(tuple(x + off for x in b) for b in blocks)


@lru_cache(maxsize=None)
def _nc_blocks(n: int) -> tuple:
    """All NC partitions of {1..n} as block tuples, lexicographic order.

    Recursion on the block V containing 1: the gaps between consecutive
    elements of V (and the tail after V) are filled independently.  Taking
    V in increasing tuple order and the gap fillings in product order keeps
    the output sorted, because blocks of a gap all start after the element
    of V preceding it.
    """
    if n == 0:
        return ((),)
    out = []
    rest = range(2, n + 1)
    subsets = []
    for r in range(0, n):
        for c in combinations(rest, r):
            subsets.append((1,) + c)
    subsets.sort()
    for V in subsets:
        segs = []  # (offset, length) of the gaps and tail
        for a, b in zip(V, V[1:]):
            if b - a > 1:
                segs.append((a, b - a - 1))
        if V[-1] < n:
            segs.append((V[-1], n - V[-1]))
        choices = [[_shift(p, off) for p in _nc_blocks(ln)] for off, ln in segs]
        for combo in product(*choices):
            blocks = [V]
            for part in combo:
                blocks.extend(part)
            blocks.sort()
            out.append(tuple(blocks))
    out.sort()
    return tuple(out)


def iter_nc(n: int) -> Iterator[Partition]:
    if not isinstance(n, int) or not 1 <= n <= NC_MAX:
        raise ValueError(f"n must be an integer in 1..{NC_MAX}, got {n!r}")
    for blocks in _nc_blocks(n):
        yield Partition._trusted(n, blocks)


def enumerate_nc(n: int) -> list[Partition]:
    """All noncrossing partitions of {1..n}, lexicographic by canonical form."""
    return list(iter_nc(n))


# ---------------------------------------------------------------------------
# star-words
# ---------------------------------------------------------------------------

_STAR_TOKENS = {"1": 1, 1: 1, "a": 1, "*": 2, 2: 2, "a*": 2, "a_star": 2}


def normalize_star_word(eps: Iterable) -> tuple[int, ...]:
    """Map a star-word to labels 1 (for a) and 2 (for a*).

    Accepts ``1``/``"1"``/``"a"`` and ``"*"``/``2``/``"a*"``; a plain string
    such as ``"1*1*"`` is read character by character.
    """
    if isinstance(eps, str):
        eps = list(eps)
    try:
        w = tuple(_STAR_TOKENS[e] for e in eps)
    except (KeyError, TypeError):
        raise ValueError(f"not a star-word over {{1,*}}: {eps!r}") from None
    if not w:
        raise ValueError("star-word must be nonempty")
    return w


def max_alt_interval_partition(eps: Iterable) -> Partition:
    """Cut the word exactly where two adjacent symbols coincide."""
    w = normalize_star_word(eps)
    blocks, cur = [], [1]
    for i in range(1, len(w)):
        if w[i] == w[i - 1]:
            blocks.append(tuple(cur))
            cur = []
        cur.append(i + 1)
    blocks.append(tuple(cur))
    return Partition._trusted(len(w), tuple(blocks))


# ---------------------------------------------------------------------------
# symmetries
# ---------------------------------------------------------------------------

def _relabel(pi: Partition, f) -> Partition:
    bl = sorted(tuple(sorted(f(x) for x in b)) for b in pi.blocks)
    return Partition._trusted(pi.n, tuple(bl))


def rotate_partition(pi: Partition) -> Partition:
    """Cyclic left shift: 1 -> n and j -> j-1 otherwise."""
    n = pi.n
    return _relabel(pi, lambda j: n if j == 1 else j - 1)


def reflect_partition(pi: Partition) -> Partition:
    """Reflection j -> n+1-j."""
    n = pi.n
    return _relabel(pi, lambda j: n + 1 - j)


def interval_blocks(pi: Partition) -> list[tuple[int, ...]]:
    return [b for b in pi.blocks if b[-1] - b[0] + 1 == len(b)]
