import random
from fractions import Fraction
from itertools import product

import pytest

from opval._rational import CRational
from opval.algebra import AlgElem, Automorphism
from opval.circular import (induced_cumulant_family, make_dt_discretized, make_nofreepolar,
                            make_scalar_circular)
from opval.cumulants import MapFamily, cumulants_to_moments, words
from opval.rdiag import (BudgetExceeded, RDiagModel, centered_alternating_expectation,
                         check_beta_symmetry, check_polar_obstruction, check_rdiag_cumulants,
                         check_rdiag_words, check_theta_twist, expect, is_alternating_even,
                         m2_freeness_check)

F = Fraction


def rq(rng):
    return CRational(F(rng.randint(-3, 3), rng.randint(1, 3)), F(rng.randint(-2, 2), rng.randint(1, 2)))


def moments_of(cum, N):
    return cumulants_to_moments(cum, N)


@pytest.fixture(scope="module")
def nofree():
    cum = induced_cumulant_family(make_nofreepolar(), 9)
    return cum, moments_of(cum, 9)


def test_alternating_even_words():
    assert is_alternating_even((1, 2))
    assert is_alternating_even((2, 1, 2, 1))
    assert not is_alternating_even((1, 2, 1))
    assert not is_alternating_even((1, 1))


def test_circular_families_pass_cumulant_test(nofree):
    assert check_rdiag_cumulants(nofree[0], 4).ok
    assert check_rdiag_cumulants(induced_cumulant_family(make_dt_discretized(3), 6), 3).ok


def test_forbidden_cumulant_reported(nofree):
    bad = nofree[0].with_maps({(1, 1): [1, 0, 0, 0]})
    v = check_rdiag_cumulants(bad, 4)
    assert not v.ok and v.witness == {"word": [1, 1]}


def test_label_swap_invariance():
    rng = random.Random(3)
    b1 = {k: [rq(rng) for _ in range(2 ** (2 * k))] for k in (1, 2)}
    b2 = {k: [rq(rng) for _ in range(2 ** (2 * k))] for k in (1, 2)}
    fam = RDiagModel(2, b1, b2, 2).to_family(4)
    swapped = RDiagModel(2, b2, b1, 2).to_family(4, labels=(2, 1))
    assert check_rdiag_cumulants(fam, 2).ok == check_rdiag_cumulants(swapped, 2).ok is True
    bad = fam.with_maps({(1, 2, 2): [1] * 8})
    bad_swapped = MapFamily(2, (2, 1), dict(bad.items()), max_order=4, sparse=True)
    assert not check_rdiag_cumulants(bad, 2).ok
    assert not check_rdiag_cumulants(bad_swapped, 2).ok


# -- expectations of centered products ------------------------------------------

def test_expect_absorbs_coefficients(nofree):
    mom = nofree[1]
    b = AlgElem([2, 3])
    c = AlgElem([5, 7])
    assert expect(mom, [b, 1, c, 2, b]) == b * mom.apply((1, 2), [c]) * b
    assert expect(mom, [b, c]) == b * c


def test_centered_expectation_two_blocks_by_hand(nofree):
    mom = nofree[1]
    rng = random.Random(1)
    bs = [AlgElem([rq(rng), rq(rng)]) for _ in range(4)]
    # eps = (1, *, *, 1): sigma = {{1,2},{3,4}}
    w1 = [1, bs[0], 2, bs[1]]
    w2 = [2, bs[2], 1, bs[3]]
    e1, e2 = expect(mom, w1), expect(mom, w2)
    hand = expect(mom, w1 + w2) - expect(mom, [e1] + w2) - expect(mom, w1 + [e2]) + e1 * e2
    assert centered_alternating_expectation(mom, (1, "*", "*", 1), bs) == hand


def test_centered_expectations_vanish_on_nofreepolar(nofree):
    mom = nofree[1]
    d = 2
    basis = [AlgElem.basis(d, k) for k in range(d)]
    cache = {}
    for n in range(1, 7):
        for eps in product((1, "*"), repeat=n):
            for ks in product(range(d), repeat=n):
                val = centered_alternating_expectation(mom, eps, [basis[k] for k in ks], cache)
                assert val.is_zero()


def test_single_alternating_block_is_zero(nofree):
    b = AlgElem([1, 2])
    assert centered_alternating_expectation(nofree[1], (1, "*"), [b, b]).is_zero()


# -- condition (b) and (f) -------------------------------------------------------------

def test_word_and_m2_certificates(nofree):
    assert check_rdiag_words(nofree[1], 6).ok
    assert m2_freeness_check(nofree[1], 3, 2).ok


def test_word_test_at_length_one():
    mom = MapFamily(2, (1, 2), {(1,): [1, 0]}, kind="moments", max_order=1, sparse=True)
    v = check_rdiag_words(mom, 1)
    assert not v.ok


def _inject(nofree, word):
    rng = random.Random(len(word))
    tensor = [CRational(rng.randint(1, 3)) for _ in range(2 ** len(word))]
    return moments_of(nofree[0].with_maps({word: tensor}), 9)


@pytest.mark.parametrize("word", [(1,), (2,), (1, 1), (2, 2), (1, 2, 1), (2, 1, 2), (2, 2, 1),
                                  (1, 1, 2, 2), (1, 2, 2, 1)])
def test_any_forbidden_cumulant_breaks_words_and_m2(nofree, word):
    bad = _inject(nofree, word)
    wv = check_rdiag_words(bad, 6)
    mv = m2_freeness_check(bad, 3, 3)
    assert not wv.ok and wv.witness
    assert not mv.ok and mv.witness


def test_m2_degree_two_cannot_see_a_astar_a(nofree):
    # degree-2 r's are diagonal and each off-diagonal b between them swaps the
    # row, so a a* is always followed by a*; the word a a* a needs z^3
    bad = _inject(nofree, (1, 2, 1))
    assert m2_freeness_check(bad, 3, 2).ok
    assert m2_freeness_check(bad, 4, 2).ok
    assert not m2_freeness_check(bad, 2, 3).ok


@pytest.mark.parametrize("seed", range(3))
def test_random_rdiagonal_models_pass_everything(seed):
    rng = random.Random(seed)
    b1 = {k: [rq(rng) for _ in range(2 ** (2 * k))] for k in (1, 2, 3)}
    b2 = {k: [rq(rng) for _ in range(2 ** (2 * k))] for k in (1, 2, 3)}
    cum = RDiagModel(2, b1, b2, 3).to_family(6)
    mom = moments_of(cum, 6)
    assert check_rdiag_cumulants(cum, 3).ok
    assert check_rdiag_words(mom, 6).ok
    assert m2_freeness_check(mom, 3, 2).ok


def test_m2_budget(nofree):
    with pytest.raises(BudgetExceeded):
        m2_freeness_check(nofree[1], 3, 2, budget=100)


# -- polar decomposition criteria ---------------------------------------------------------

def test_beta_symmetry():
    assert not check_beta_symmetry(make_nofreepolar().to_rdiag(1)).ok
    assert check_beta_symmetry(make_scalar_circular(3).to_rdiag(1)).ok
    rng = random.Random(2)
    b = {k: [rq(rng) for _ in range(2 ** (2 * k))] for k in (1, 2)}
    assert check_beta_symmetry(RDiagModel(2, b, b, 2)).ok


@pytest.mark.parametrize("seed", range(4))
def test_identity_twist_is_beta_symmetry(seed):
    rng = random.Random(seed)
    b1 = {k: [rq(rng) for _ in range(2 ** (2 * k))] for k in (1, 2)}
    b2 = b1 if seed % 2 else {k: [rq(rng) for _ in range(2 ** (2 * k))] for k in (1, 2)}
    m = RDiagModel(2, b1, b2, 2)
    assert check_theta_twist(m, Automorphism.identity(2)).ok == check_beta_symmetry(m).ok


@pytest.mark.parametrize("d", [1, 2, 3, 4, 8, 16])
def test_dt_twist(d):
    m = make_dt_discretized(d).to_rdiag(3)
    assert check_theta_twist(m, Automorphism.flip(d), 3).ok


def test_twist_fails_for_identity_on_nofreepolar():
    v = check_theta_twist(make_nofreepolar().to_rdiag(1), Automorphism.identity(2))
    assert not v.ok and v.witness["k"] == 1


def test_polar_obstruction_statuses(nofree):
    rep = check_polar_obstruction(moments_of(induced_cumulant_family(make_nofreepolar(), 2), 2))
    assert rep.status == "obstructed"
    assert rep.to_dict() == {"status": "obstructed", "E(a*a)": ["1", "1"], "E(aa*)": ["1/2", "3/2"]}
    sc = check_polar_obstruction(moments_of(induced_cumulant_family(make_scalar_circular(2), 2), 2))
    assert sc.status == "unobstructed"
    # E(a*a) = eta2(1) = (1, 2): not a multiple of 1
    fam = MapFamily(2, (1, 2), {(1, 2): [1, 0, 0, 1], (2, 1): [1, 0, 0, 2]}, max_order=2, sparse=True)
    assert check_polar_obstruction(moments_of(fam, 2)).status == "inconclusive"
