"""Executable R-diagonality certificates and cumulant-side polar criteria.

Families handed to this module use their first two labels for ``a`` and
``a*`` respectively (``(1, 2)`` for the builtin models).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Mapping, Sequence

from ._rational import ONE, ZERO, CRational
from .algebra import AlgElem, Automorphism, DimensionMismatch
from .cumulants import MapFamily, OrderOverflow, Verdict, _to_flat, apply_tensor, words
from .ncpart import max_alt_interval_partition, normalize_star_word

__all__ = [
    "RDiagModel",
    "BudgetExceeded",
    "is_alternating_even",
    "alt_word",
    "check_rdiag_cumulants",
    "expect",
    "centered_alternating_expectation",
    "check_rdiag_words",
    "m2_freeness_check",
    "check_beta_symmetry",
    "check_theta_twist",
    "PolarReport",
    "check_polar_obstruction",
]


class BudgetExceeded(RuntimeError):
    """The number of products to examine exceeds the configured cap."""


def _ab(family: MapFamily) -> tuple:
    if len(family.labels) < 2:
        raise ValueError("an R-diagonality test needs labels for a and a*")
    return family.labels[0], family.labels[1]


def alt_word(start, other, k: int) -> tuple:
    """(start, other, start, other, ...) of length 2k."""
    return (start, other) * k


def is_alternating_even(j: Sequence) -> bool:
    return len(j) % 2 == 0 and all(j[t] != j[t + 1] for t in range(len(j) - 1))


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RDiagModel:
    """Alternating cumulants ``beta_k^(1)`` (word 1,2,..,1,2) and ``beta_k^(2)`` (2,1,..,2,1).

    ``betas1[k]``/``betas2[k]`` are flat tensors of order 2k; missing
    orders up to ``K`` are zero.
    """

    dimension: int
    betas1: Mapping[int, tuple]
    betas2: Mapping[int, tuple]
    K: int

    def __post_init__(self):
        d = self.dimension
        for name in ("betas1", "betas2"):
            src = getattr(self, name)
            conv = {}
            for k, t in src.items():
                k = int(k)
                if not 1 <= k <= self.K:
                    raise ValueError(f"{name}: half-order {k} outside 1..{self.K}")
                conv[k] = _to_flat(t, d, 2 * k)
            object.__setattr__(self, name, conv)

    def beta(self, which: int, k: int) -> tuple:
        src = self.betas1 if which == 1 else self.betas2
        t = src.get(k)
        return t if t is not None else (ZERO,) * (self.dimension ** (2 * k))

    def apply(self, which: int, k: int, args: Sequence[AlgElem]) -> AlgElem:
        return apply_tensor(self.beta(which, k), self.dimension, args)

    @classmethod
    def from_family(cls, family: MapFamily, K: int | None = None) -> "RDiagModel":
        a, s = _ab(family)
        if family.kind != "cumulants":
            raise ValueError("expected a cumulant family")
        K = family.max_order // 2 if K is None else K
        b1 = {k: family.dense(alt_word(a, s, k)) for k in range(1, K + 1)}
        b2 = {k: family.dense(alt_word(s, a, k)) for k in range(1, K + 1)}
        return cls(family.dimension, b1, b2, K)

    def to_family(self, max_order: int | None = None, labels=(1, 2)) -> MapFamily:
        N = 2 * self.K if max_order is None else max_order
        a, s = labels
        maps = {}
        for k in range(1, self.K + 1):
            if 2 * k > N:
                break
            maps[alt_word(a, s, k)] = self.beta(1, k)
            maps[alt_word(s, a, k)] = self.beta(2, k)
        return MapFamily(self.dimension, labels, maps, kind="cumulants", max_order=N, sparse=True)


# ---------------------------------------------------------------------------
# condition (g): only even alternating cumulants
# ---------------------------------------------------------------------------

def check_rdiag_cumulants(family: MapFamily, K: int) -> Verdict:
    """Every cumulant off the words (1,2,..,1,2), (2,1,..,2,1) must vanish, up to order 2K."""
    if family.kind != "cumulants":
        raise ValueError("expected a cumulant family")
    a, s = _ab(family)
    top = 2 * K
    if top > family.max_order:
        raise OrderOverflow(f"need cumulants to order {top}, family has {family.max_order}")
    checked = 0
    for n in range(1, top + 1):
        for j in words((a, s), n):
            checked += 1
            if not is_alternating_even(j) and not family.is_zero(j):
                return Verdict(False, {"word": list(j)}, checked)
    return Verdict(True, None, checked)


# ---------------------------------------------------------------------------
# expectations of products with interleaved coefficients
# ---------------------------------------------------------------------------

def _is_coef(x) -> bool:
    return isinstance(x, AlgElem)


def expect(momfamily: MapFamily, items: Sequence, cache: dict | None = None) -> AlgElem:
    """E of a product given as a sequence of labels and algebra elements.

    Adjacent algebra elements multiply; a missing coefficient between two
    letters is the unit.  ``E(c_0 L_1 c_1 ... L_m c_m) = c_0 psi_L(c_1..c_{m-1}) c_m``.
    """
    key = tuple(items)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    d = momfamily.dimension
    unit = AlgElem.unit(d)
    letters, coefs = [], [unit]
    for x in key:
        if _is_coef(x):
            coefs[-1] = coefs[-1] * x
        else:
            letters.append(x)
            coefs.append(unit)
    if not letters:
        out = coefs[0]
    else:
        core = momfamily.apply(tuple(letters), coefs[1:-1])
        out = coefs[0] * core * coefs[-1]
    if cache is not None:
        cache[key] = out
    return out


def _expand_centered(factors: Sequence[tuple[tuple, bool]], momfamily, cache) -> AlgElem:
    """E of prod_p (w_p - E w_p if centered else w_p), expanded into signed terms."""
    d = momfamily.dimension
    centered = [p for p, (_, c) in enumerate(factors) if c]
    means = {p: expect(momfamily, factors[p][0], cache) for p in centered}
    total = AlgElem.zero(d)
    for mask in range(1 << len(centered)):
        items: list = []
        sign = 1
        repl = set()
        for bit, p in enumerate(centered):
            if mask >> bit & 1:
                repl.add(p)
                sign = -sign
        for p, (w, _) in enumerate(factors):
            if p in repl:
                items.append(means[p])
            else:
                items.extend(w)
        v = expect(momfamily, items, cache)
        total = total + v if sign > 0 else total - v
    return total


def centered_alternating_expectation(momfamily: MapFamily, eps, coeffs: Sequence[AlgElem],
                                     cache: dict | None = None) -> AlgElem:
    """E(prod_{B in sigma(eps)} (w_B - E(w_B))) with ``w_B = prod_{j in B} a^{eps(j)} b_j``."""
    w = normalize_star_word(eps)
    if len(coeffs) != len(w):
        raise ValueError(f"need {len(w)} coefficients, got {len(coeffs)}")
    if len(w) > momfamily.max_order:
        raise OrderOverflow(f"word of length {len(w)} exceeds max order {momfamily.max_order}")
    a, s = _ab(momfamily)
    lab = {1: a, 2: s}
    sigma = max_alt_interval_partition(w)
    factors = []
    for blk in sigma.blocks:
        items = []
        for j in blk:
            items.append(lab[w[j - 1]])
            items.append(coeffs[j - 1])
        factors.append((tuple(items), True))
    return _expand_centered(factors, momfamily, {} if cache is None else cache)


# ---------------------------------------------------------------------------
# condition (b): products of P_{ij} words
# ---------------------------------------------------------------------------

_PNAME = {(1, 1): "P11", (2, 2): "P22", (1, 2): "P12", (2, 1): "P21"}


def _factor_sequences(L: int) -> Iterator[list[tuple[int, int, int]]]:
    """Sequences of (start, end, letters) with ends matching the next start, total <= L."""
    def lengths(i, j, budget):
        if i == j:
            return range(1, budget + 1, 2)      # 2k+1 letters, k >= 0
        return range(2, budget + 1, 2)          # 2k letters, k >= 1

    def rec(start, budget):
        for end in (1, 2):
            for n in lengths(start, end, budget):
                yield [(start, end, n)]
                for tail in rec(end, budget - n):
                    yield [(start, end, n)] + tail

    for i0 in (1, 2):
        yield from rec(i0, L)


def check_rdiag_words(momfamily: MapFamily, L: int) -> Verdict:
    """E(x_1 ... x_m) == 0 for x_p in P_{i_{p-1} i_p}, at most L letters in all.

    Coefficients run over basis elements; the outermost ones and the outer
    coefficients of centered factors are absorbed by bimodularity, so one
    coefficient sits in each gap between consecutive letters.
    """
    if L > momfamily.max_order:
        raise OrderOverflow(f"need moments to order {L}, family has {momfamily.max_order}")
    a, s = _ab(momfamily)
    lab = {1: a, 2: s}
    d = momfamily.dimension
    basis = [AlgElem.basis(d, k) for k in range(d)]
    cache: dict = {}
    checked = 0
    for seq in _factor_sequences(L):
        letters = []
        for start, _, n in seq:
            cur = start
            for _ in range(n):
                letters.append(cur)
                cur = 3 - cur
        total = len(letters)
        for ks in product(range(d), repeat=total - 1):
            factors = []
            pos = 0
            for start, end, n in seq:
                items = []
                for t in range(n):
                    items.append(lab[letters[pos + t]])
                    if t < n - 1:
                        items.append(basis[ks[pos + t]])
                centered = start != end
                factors.append((tuple(items), centered))
                pos += n
                if pos < total:
                    # junction coefficient between factors stays outside any centering
                    factors.append(((basis[ks[pos - 1]],), False))
            val = _expand_centered(factors, momfamily, cache)
            checked += 1
            if not val.is_zero():
                return Verdict(False, {
                    "factors": [{"type": _PNAME[(st, en)], "letters": n} for st, en, n in seq],
                    "coefficients": list(ks),
                    "value": str(val)}, checked)
    return Verdict(True, None, checked)


# ---------------------------------------------------------------------------
# condition (f): freeness of z = [[0, a], [a*, 0]] from M_2(B) over B^(2)
# ---------------------------------------------------------------------------
#
# A symbolic 2x2 matrix is a dict (row, col) -> {monomial: scalar}; a
# monomial is a normalized tuple of labels and algebra elements.

def _mono_mul(u: tuple, v: tuple) -> tuple:
    if u and v and _is_coef(u[-1]) and _is_coef(v[0]):
        return u[:-1] + (u[-1] * v[0],) + v[1:]
    return u + v


def _mat_mul(X: dict, Y: dict) -> dict:
    out: dict = {}
    for (i, k), ex in X.items():
        for (k2, j), ey in Y.items():
            if k != k2:
                continue
            tgt = out.setdefault((i, j), {})
            for mu, cx in ex.items():
                for nu, cy in ey.items():
                    m = _mono_mul(mu, nu)
                    c = tgt.get(m, ZERO) + cx * cy
                    if c:
                        tgt[m] = c
                    else:
                        tgt.pop(m, None)
    return {key: e for key, e in out.items() if e}


def _E2_entry(entry: dict, momfamily, cache) -> AlgElem:
    acc = AlgElem.zero(momfamily.dimension)
    for mono, c in entry.items():
        acc = acc + expect(momfamily, mono, cache) * c
    return acc


def _E2(X: dict, momfamily, cache) -> tuple[AlgElem, AlgElem]:
    z = AlgElem.zero(momfamily.dimension)
    return (_E2_entry(X[(0, 0)], momfamily, cache) if (0, 0) in X else z,
            _E2_entry(X[(1, 1)], momfamily, cache) if (1, 1) in X else z)


def _centered_monomials(momfamily, D: int, cache) -> list[tuple[str, dict]]:
    """E^(2)-centered monomials c_0 z c_1 ... z c_m - E^(2)(.), 1 <= m <= D."""
    a, s = _ab(momfamily)
    d = momfamily.dimension
    Z = {(0, 1): {(a,): ONE}, (1, 0): {(s,): ONE}}
    diag_basis = []
    for side in (0, 1):
        for k in range(d):
            diag_basis.append((f"{'LR'[side]}{k}", {(side, side): {(AlgElem.basis(d, k),): ONE}}))
    out = []
    for m in range(1, D + 1):
        for cs in product(range(len(diag_basis)), repeat=m - 1):
            X = Z
            for c in cs:
                X = _mat_mul(_mat_mul(X, diag_basis[c][1]), Z)
            e11, e22 = _E2(X, momfamily, cache)
            X = {k: dict(v) for k, v in X.items()}
            for idx, e in (((0, 0), e11), ((1, 1), e22)):
                if not e.is_zero():
                    tgt = X.setdefault(idx, {})
                    key = (e,)
                    c = tgt.get(key, ZERO) - ONE
                    if c:
                        tgt[key] = c
                    else:
                        tgt.pop(key)
            X = {k: v for k, v in X.items() if v}
            name = "z" + "".join(f"[{diag_basis[c][0]}]z" for c in cs)
            out.append((name, X))
    return out


def _offdiag_units(d: int) -> list[tuple[str, dict]]:
    out = []
    for k in range(d):
        out.append((f"E12*e{k}", {(0, 1): {(AlgElem.basis(d, k),): ONE}}))
        out.append((f"E21*e{k}", {(1, 0): {(AlgElem.basis(d, k),): ONE}}))
    return out


def m2_freeness_check(momfamily: MapFamily, L: int, D: int, budget: int = 2_000_000) -> Verdict:
    """E^(2) must kill every alternating product of centered z-monomials and
    off-diagonal elements of M_2(B).

    Products take the forms ``r b ... r b``, ``r b ... r``, ``b r ... r b`` and
    ``b r ... r`` with at most L factors r, each of z-degree at most D.
    """
    if L * D > momfamily.max_order:
        raise OrderOverflow(f"need moments to order {L * D}, family has {momfamily.max_order}")
    cache: dict = {}
    rs = _centered_monomials(momfamily, D, cache)
    bs = _offdiag_units(momfamily.dimension)
    # r's are indexed with their z-degree so odd-parity products can be skipped
    r_deg = []
    for name, _ in rs:
        r_deg.append(name.count("z"))

    count = 0
    for n in range(1, L + 1):
        for lead_b in (False, True):
            for trail_b in (True, False):
                kinds = []
                if lead_b:
                    kinds.append("b")
                for t in range(n):
                    kinds.append("r")
                    if t < n - 1 or trail_b:
                        kinds.append("b")
                nb = kinds.count("b")
                total = len(rs) ** n * len(bs) ** nb
                count += total
                if count > budget:
                    raise BudgetExceeded(f"more than {budget} products to check")
                res = _m2_dfs(kinds, rs, bs, r_deg, momfamily, cache)
                if res is not None:
                    names, val = res
                    return Verdict(False, {"product": names, "E2": [str(v) for v in val]}, count)
    return Verdict(True, None, count)


def _m2_dfs(kinds, rs, bs, r_deg, momfamily, cache):
    nb = kinds.count("b")

    def rec(pos, X, names, parity):
        if pos == len(kinds):
            # an odd number of off-diagonal factors leaves an off-diagonal product
            if parity % 2:
                return None
            v = _E2(X, momfamily, cache)
            if not (v[0].is_zero() and v[1].is_zero()):
                return names, v
            return None
        if kinds[pos] == "b":
            for nm, B in bs:
                r = rec(pos + 1, _mat_mul(X, B) if X is not None else B, names + [nm], parity + 1)
                if r is not None:
                    return r
        else:
            for (nm, R), deg in zip(rs, r_deg):
                r = rec(pos + 1, _mat_mul(X, R) if X is not None else R, names + [nm], parity + deg)
                if r is not None:
                    return r
        return None

    return rec(0, None, [], 0)


# ---------------------------------------------------------------------------
# polar-decomposition criteria
# ---------------------------------------------------------------------------

def check_beta_symmetry(model: RDiagModel) -> Verdict:
    """beta_k^(1) == beta_k^(2) for every k <= K."""
    for k in range(1, model.K + 1):
        if model.beta(1, k) != model.beta(2, k):
            return Verdict(False, {"k": k}, k)
    return Verdict(True, None, model.K)


def check_theta_twist(model: RDiagModel, theta: Automorphism, K: int | None = None) -> Verdict:
    """beta_k^(2)(b_1, th(b_2), b_3, ..) == th(beta_k^(1)(th(b_1), b_2, th(b_3), ..)) on basis tuples."""
    d = model.dimension
    if theta.dimension != d:
        raise DimensionMismatch(f"automorphism of dimension {theta.dimension}, model of dimension {d}")
    K = model.K if K is None else min(K, model.K)
    basis = [AlgElem.basis(d, k) for k in range(d)]
    checked = 0
    for k in range(1, K + 1):
        t1, t2 = model.beta(1, k), model.beta(2, k)
        if not any(t1) and not any(t2):
            continue
        for ks in product(range(d), repeat=2 * k - 1):
            bs = [basis[x] for x in ks]
            # positions are 1-based in the identity: even slots twisted on the left
            left = [theta(b) if (p + 1) % 2 == 0 else b for p, b in enumerate(bs)]
            right = [theta(b) if (p + 1) % 2 == 1 else b for p, b in enumerate(bs)]
            lhs = apply_tensor(t2, d, left)
            rhs = theta(apply_tensor(t1, d, right))
            checked += 1
            if lhs != rhs:
                return Verdict(False, {"k": k, "basis_tuple": list(ks),
                                       "lhs": [str(x) for x in lhs], "rhs": [str(x) for x in rhs]},
                               checked)
    return Verdict(True, None, checked)


@dataclass(frozen=True)
class PolarReport:
    status: str            # "obstructed" | "unobstructed" | "inconclusive"
    E_astar_a: AlgElem     # E(a* a), what the argument calls beta_1^(2)(1)
    E_a_astar: AlgElem     # E(a a*), beta_1^(1)(1)

    def to_dict(self) -> dict:
        return {"status": self.status,
                "E(a*a)": [str(x) for x in self.E_astar_a],
                "E(aa*)": [str(x) for x in self.E_a_astar]}


def check_polar_obstruction(momfamily: MapFamily) -> PolarReport:
    """Can a be distributed like u p with {u, u*} free from p = p*?

    If E(a*a) is a multiple of 1, such a realization forces E(aa*) = E(a*a).
    So a scalar E(a*a) different from E(aa*) is an obstruction; a non-scalar
    E(a*a) leaves the question open.
    """
    if momfamily.kind != "moments":
        raise ValueError("expected a moment family")
    a, s = _ab(momfamily)
    d = momfamily.dimension
    u = AlgElem.unit(d)
    e_sa = momfamily.apply((s, a), [u])
    e_as = momfamily.apply((a, s), [u])
    if not e_sa.is_scalar():
        status = "inconclusive"
    elif e_as != e_sa:
        status = "obstructed"
    else:
        status = "unobstructed"
    return PolarReport(status, e_sa, e_as)
