import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from opval._rational import CRational
from opval.algebra import AlgElem, LinearMap, TraceFunctional
from opval.circular import (CircularModel, induced_cumulant_family, make_dt_discretized,
                            make_nofreepolar, make_scalar_circular)
from opval.cumulants import cumulants_to_moments
from opval.rdiag import RDiagModel
from opval.series import (BSeries, MultiSeries, alternating_assignment, check_M_recursion,
                          cumulant_multiseries, moment_multiseries, multi_compose, series_arith,
                          solve_alternating_series, solve_FG)

F = Fraction


def rq(rng):
    return CRational(F(rng.randint(-3, 3), rng.randint(1, 3)), F(rng.randint(-2, 2), rng.randint(1, 2)))


def relem(rng, d):
    return AlgElem([rq(rng) for _ in range(d)])


def rand_rdiag(rng, d, K):
    b = lambda: {k: [rq(rng) for _ in range(d ** (2 * k))] for k in range(1, K + 1)}
    return RDiagModel(d, b(), b(), K)


def brute_FG(momfamily, b1, b2, N):
    d = momfamily.dimension
    F_, G_ = [AlgElem.unit(d)], [AlgElem.unit(d)]
    for n in range(1, N + 1):
        args = [b1, b2] * n
        F_.append(momfamily.apply((1, 2) * n, args[:-1]) * b2)
        G_.append(momfamily.apply((2, 1) * n, args[:-1]) * b2)
    return F_, G_


# -- BSeries arithmetic ---------------------------------------------------------------

def _coord_poly(s, r):
    z = sp.Symbol("z")
    return sum((sp.Rational(int(c.coords[r].re.numerator), int(c.coords[r].re.denominator))
                + sp.I * sp.Rational(int(c.coords[r].im.numerator), int(c.coords[r].im.denominator))) * z ** n
               for n, c in enumerate(s)), z


def _same(s, expr, z, r, N):
    want = sp.Poly(sp.expand(expr), z).all_coeffs()[::-1] if expr != 0 else []
    want = list(want) + [0] * (N + 1)
    got = _coord_poly(s, r)[0]
    got_c = sp.Poly(sp.expand(got), z).all_coeffs()[::-1] if got != 0 else []
    got_c = list(got_c) + [0] * (N + 1)
    return all(sp.simplify(got_c[n] - want[n]) == 0 for n in range(N + 1))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_series_arithmetic_coordinatewise(seed):
    rng = random.Random(seed)
    d, N = 2, 4
    a = BSeries([relem(rng, d) for _ in range(N + 1)])
    b = BSeries([relem(rng, d) for _ in range(N + 1)])
    z = sp.Symbol("z")
    for r in range(d):
        pa, pb = _coord_poly(a, r)[0], _coord_poly(b, r)[0]
        assert _same(a + b, pa + pb, z, r, N)
        assert _same(a - b, pa - pb, z, r, N)
        prod = sp.expand(pa * pb)
        trunc = sum(prod.coeff(z, n) * z ** n for n in range(N + 1))
        assert _same(a * b, trunc, z, r, N)
    assert series_arith("mul", a, b) == a * b
    assert series_arith("add", a, b, a) == a + b + a
    assert series_arith("embed", AlgElem.unit(d), N) == BSeries.one(d, N)


def test_series_errors():
    a = BSeries.one(2, 3)
    with pytest.raises(ValueError):
        a + BSeries.one(2, 4)
    with pytest.raises(Exception):
        a + BSeries.one(3, 3)
    with pytest.raises(ValueError):
        series_arith("div", a, a)


def test_z_and_trace():
    z = BSeries.z(2, 3)
    assert (z * z)[2] == AlgElem.unit(2) and (z * z)[3] == AlgElem.zero(2)
    tau = TraceFunctional.uniform(2)
    assert BSeries.one(2, 2).traced(tau) == [CRational(1), CRational(0), CRational(0)]


# -- F and G ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["nofreepolar", "dt3", "scalar", "random"])
def test_solve_FG_against_moment_brute_force(name):
    rng = random.Random(7)
    model = {"nofreepolar": make_nofreepolar(), "dt3": make_dt_discretized(3),
             "scalar": make_scalar_circular(2),
             "random": CircularModel(LinearMap([[rq(rng) for _ in range(2)] for _ in range(2)]),
                                     LinearMap([[rq(rng) for _ in range(2)] for _ in range(2)]))}[name]
    d, N = model.dimension, 4
    mom = cumulants_to_moments(induced_cumulant_family(model, 2 * N), 2 * N)
    b1, b2 = relem(rng, d), relem(rng, d)
    Fs, Gs = solve_FG(model, b1, b2, N)
    bf, bg = brute_FG(mom, b1, b2, N)
    assert list(Fs) == bf and list(Gs) == bg


def test_scalar_FG_is_catalan_generating_function():
    Fs, Gs = solve_FG(make_scalar_circular(1), AlgElem.unit(1), AlgElem.unit(1), 10)
    cat = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796]
    assert [c.coords[0] for c in Fs] == [CRational(x) for x in cat]
    assert list(Fs) == list(Gs)


@pytest.mark.parametrize("seed", range(4))
def test_alternating_series_reduces_to_circular(seed):
    rng = random.Random(seed)
    model = make_dt_discretized(2 + seed % 2) if seed % 2 else make_nofreepolar()
    b1, b2 = relem(rng, model.dimension), relem(rng, model.dimension)
    assert solve_alternating_series(model.to_rdiag(1), b1, b2, 6) == solve_FG(model, b1, b2, 6)


@pytest.mark.parametrize("seed", range(3))
def test_alternating_series_against_brute_force(seed):
    rng = random.Random(100 + seed)
    d, K, N = 2, 3, 3
    model = rand_rdiag(rng, d, K)
    mom = cumulants_to_moments(model.to_family(2 * N), 2 * N)
    b1, b2 = relem(rng, d), relem(rng, d)
    Fs, Gs = solve_alternating_series(model, b1, b2, N)
    bf, bg = brute_FG(mom, b1, b2, N)
    assert list(Fs) == bf and list(Gs) == bg


def test_negative_truncation():
    with pytest.raises(ValueError):
        solve_FG(make_nofreepolar(), AlgElem.unit(2), AlgElem.unit(2), -1)


# -- multilinear function series ----------------------------------------------------------

def rand_multi(rng, d, N, const=True, density=0.6):
    terms = []
    for n in range(N + 1):
        t = {}
        if n or const:
            for _ in range(3):
                if rng.random() < density:
                    t[tuple(rng.randrange(d) for _ in range(n + 1))] = rq(rng)
        terms.append(t)
    return MultiSeries(d, terms)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_scalar_composition_is_power_series_composition(seed):
    rng = random.Random(seed)
    N = 5
    X = rand_multi(rng, 1, N)
    P = rand_multi(rng, 1, N, const=False)
    C = multi_compose(X, 1, [P])
    t = sp.Symbol("t")
    val = lambda c: sp.Rational(int(c.re.numerator), int(c.re.denominator)) + sp.I * sp.Rational(int(c.im.numerator), int(c.im.denominator))
    coeffs = lambda S: [val(S.terms[n].get((0,) * (n + 1), CRational(0))) for n in range(N + 1)]
    x, p = coeffs(X), coeffs(P)
    psi = sum(p[k] * t ** k for k in range(N + 1))
    comp = sp.expand(sum(x[k] * psi ** k for k in range(N + 1)))
    want = [sp.expand(comp).coeff(t, n) for n in range(N + 1)]
    assert [sp.simplify(a - b) for a, b in zip(coeffs(C), want)] == [0] * (N + 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_composition_with_identity_and_products(seed):
    rng = random.Random(seed)
    d, N = 2, 4
    X = rand_multi(rng, d, N)
    Y = rand_multi(rng, d, N)
    Id = MultiSeries.identity(d, N)
    assert multi_compose(X, 1, [Id]) == X
    assert X * MultiSeries.one(d, N) == X and MultiSeries.one(d, N) * X == X
    assert (X + Y) - Y == X
    # evaluation is multiplicative on commutative coordinates
    args = [relem(rng, d) for _ in range(N)]
    v = lambda n, j: args[j - 1]
    lhs = (X * Y).evaluate(v)
    for n in range(N + 1):
        want = AlgElem.zero(d)
        for k in range(n + 1):
            want = want + X.term_apply(k, args[:k]) * Y.term_apply(n - k, args[k:n])
        assert lhs[n] == want


def test_compose_rejects_constant_term():
    d = 1
    with pytest.raises(ValueError):
        multi_compose(MultiSeries.one(d, 2), 1, [MultiSeries.one(d, 2)])
    with pytest.raises(ValueError):
        multi_compose(MultiSeries.one(d, 3), 1, [MultiSeries.identity(d, 2)])
    with pytest.raises(ValueError):
        MultiSeries(1, [{(0, 0): 1}])


def test_moment_series_evaluates_to_F():
    model = make_nofreepolar()
    rng = random.Random(5)
    N = 6
    mom = cumulants_to_moments(induced_cumulant_family(model, N), N)
    b1, b2 = relem(rng, 2), relem(rng, 2)
    vals = moment_multiseries(mom, 1, N).evaluate(alternating_assignment(b1, b2))
    Fs, _ = solve_FG(model, b1, b2, N // 2)
    assert vals[0::2] == list(Fs)
    assert all(v.is_zero() for v in vals[1::2])


@pytest.mark.parametrize("which", ["nofreepolar", "random"])
def test_M_recursion_trailing_factor(which):
    N = 6
    if which == "nofreepolar":
        model = make_nofreepolar().to_rdiag(1)
    else:
        model = rand_rdiag(random.Random(11), 2, 3)
    mom = cumulants_to_moments(model.to_family(N), N)
    assert check_M_recursion(mom, model, N, "IM") == (True, True)
    assert check_M_recursion(mom, model, N, "M") == (False, False)
    with pytest.raises(ValueError):
        check_M_recursion(mom, model, N, "MI")


def test_cumulant_series_layout():
    model = make_nofreepolar().to_rdiag(1)
    A = cumulant_multiseries(model, 1, 4)
    assert not A.terms[0] and not A.terms[2] and not A.terms[3] and not A.terms[4]
    h = CRational(F(1, 2))
    assert A.terms[1] == {(0, 0): h, (1, 0): h, (1, 1): CRational(1)}
