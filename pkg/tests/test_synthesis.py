import random

import numpy as np
import pytest

from sgx.errors import BadPromise, NotAMonoid, ShapeConflict, UseCommutativePath
from sgx.functions import FiniteFunction
from sgx.semigroup import (
    adjoin_identity,
    associativity_witness,
    build_free_nilpotent,
    congruence_closure,
    quotient_by_partition,
    semilattice,
)
from sgx.synthesis import (
    _cuts,
    identity_case,
    synthesize,
    synthesize_term_4nilpotent,
    synthesize_term_nilpotent_free,
)
from sgx.terms import Term, parse_term, terms_equivalent, values_at

# merges of length-3 words in FN4{a,b} that realise each identity case
CASE_MERGES = {
    2: [("abb", "bba"), ("baa", "aab")],
    3: [("abb", "bab"), ("baa", "aba")],
    4: [("bab", "bba"), ("aba", "aab")],
    5: [("abb", "bab"), ("bab", "bba"), ("baa", "aba"), ("aba", "aab")],
}


def case_monoid(case):
    F = build_free_nilpotent("ab", 4)
    if case == 1:
        return adjoin_identity(F)
    P = congruence_closure(F, [(F.index(u), F.index(v)) for u, v in CASE_MERGES[case]])
    return adjoin_identity(quotient_by_partition(F, P))


def oracle(S, text, arity=None):
    t = parse_term(text, arity)
    return FiniteFunction.from_term(S, t, cap=0).with_log(), t


@pytest.mark.parametrize("case", [1, 2, 3, 4, 5])
def test_case_monoids(case):
    M = case_monoid(case)
    assert identity_case(M) == case
    assert associativity_witness(M.table) is None
    assert not M.is_commutative()


def test_free_path_examples(fn4one):
    f, _ = oracle(fn4one, "x2 x1 x3")
    t, trace = synthesize_term_nilpotent_free(f)
    assert t.word == (2, 1, 3)
    f, _ = oracle(fn4one, "x1 x2^2")
    t, trace = synthesize_term_nilpotent_free(f)
    assert t.word == (1, 2, 2) and trace.pairwise[(1, 2)].word == (1, 2, 2)
    assert trace.exponents == (1, 2)


def test_free_path_reads_only_small_support(fn5one):
    f, hidden = oracle(fn5one, "x3 x1 x2 x1", 3)
    t, trace = synthesize_term_nilpotent_free(f, samples=500)
    assert terms_equivalent(fn5one, t, hidden)
    assert f.log.max_support["restriction"] <= 2 and f.log.max_support["verify"] <= 2
    assert set(f.log.counts) == {"restriction", "verify", "sample"}
    assert f.log.counts["sample"] == 500


def test_free_path_detects_inconsistent_pairs(fn4one):
    S = fn4one
    pair_words = {(0, 1): (1, 2), (1, 2): (2, 3), (0, 2): (3, 1)}

    def batch(tuples):
        out = []
        for row in np.asarray(tuples):
            live = [k for k in range(3) if row[k] != S.identity]
            word = pair_words.get(tuple(live), (1, 2, 3))
            out.append(values_at(S, word, row[None, :])[0])
        return np.array(out)

    f = FiniteFunction(S, 3, batch=batch)
    with pytest.raises(BadPromise):
        synthesize_term_nilpotent_free(f, samples=10)


def test_4nilpotent_examples(fn4one):
    f, _ = oracle(fn4one, "x1 x2")
    t, trace = synthesize_term_4nilpotent(f)
    assert t.word == (1, 2) and trace.case == 1
    f, hidden = oracle(fn4one, "x1 x3^2 x2")
    t, trace = synthesize_term_4nilpotent(f)
    assert terms_equivalent(fn4one, t, hidden)
    assert trace.cuts == {3: (1, 1)}


def test_commutative_input_is_refused():
    L = semilattice()
    f = FiniteFunction.from_term(L, parse_term("x1 x2"))
    with pytest.raises(UseCommutativePath):
        synthesize_term_4nilpotent(f)


def test_non_monoid_is_refused():
    F = build_free_nilpotent("ab", 3)
    f = FiniteFunction.from_term(F, parse_term("x1 x2"))
    with pytest.raises(NotAMonoid):
        synthesize(f)


def test_cut_rules():
    assert _cuts(1, ["A", "B", "C"], 3, 9) == (1, 2)
    assert _cuts(1, ["A", "A"], 2, 9) == (2, 2)
    with pytest.raises(ShapeConflict):
        _cuts(1, ["C", "A"], 2, 9)
    assert _cuts(2, ["AC", "B", "B", "AC"], 4, 9) == (1, 3)
    with pytest.raises(ShapeConflict):
        _cuts(2, ["B", "AC", "B"], 3, 9)
    assert _cuts(3, ["AB", "C"], 2, 9) == (1, 1)
    assert _cuts(4, ["A", "BC"], 2, 9) == (1, 1)
    assert _cuts(5, ["ABC"], 1, 9) == (1, 1)


def test_d3_monoid_path():
    M = adjoin_identity(build_free_nilpotent("ab", 3))
    f, hidden = oracle(M, "x2 x1 x3^2 x4^5", 4)
    t, trace = synthesize(f, samples=1000)
    assert terms_equivalent(M, t, hidden) and trace.case is None


def _random_word(rng, n, weights):
    word = []
    for v in range(1, n + 1):
        word += [v] * rng.choice(weights)
    rng.shuffle(word)
    return Term(tuple(word), n)


@pytest.mark.parametrize("case", [1, 2, 3, 4, 5])
def test_4nilpotent_random_terms(case):
    M = case_monoid(case)
    rng = random.Random(100 + case)
    for _ in range(30):
        hidden = _random_word(rng, rng.choice([2, 3, 4]), [1, 1, 2, 2, 3, 5])
        f = FiniteFunction.from_term(M, hidden)
        t, trace = synthesize_term_4nilpotent(f, samples=2000, seed=case)
        assert terms_equivalent(M, t, hidden), (hidden, t)


def test_seed_is_recorded_and_reproducible(fn4one):
    f, _ = oracle(fn4one, "x2 x1 x3")
    a = synthesize(f, samples=300, seed=11)
    b = synthesize(f, samples=300, seed=11)
    assert a[0] == b[0] and a[1].seed == 11 and a[1].verified_tuples == b[1].verified_tuples
