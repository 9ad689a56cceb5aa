from itertools import product

import numpy as np
import pytest

import oracles
from sgx.errors import InconsistentConstraints, NotAPower
from sgx.functions import FiniteFunction
from sgx.gallery import build_semilattice_counterexample, build_square_f, build_witness_terms
from sgx.minors import (
    candidate_words,
    count_candidates,
    degree_lower_bound_probe,
    depends_on,
    enumerate_imt_functions,
    exponent_vector,
    function_from_minors,
    has_imt,
    identification_minor,
    is_term_function,
    multiset_permutations,
    occurrence_options,
    variable_exponent,
)
from sgx.semigroup import NilpotentProfile, cyclic_group, semilattice, trivial
from sgx.terms import Term, parse_term, term_values, terms_equivalent


def _fn(S, text, arity=None):
    return FiniteFunction.from_term(S, parse_term(text, arity))


def test_minor_of_projection():
    L = semilattice()
    assert np.array_equal(identification_minor(_fn(L, "x1", 2), 1, 2).table, _fn(L, "x2").table)
    assert np.array_equal(identification_minor(_fn(L, "x3"), 1, 2).table, _fn(L, "x3").table)


def test_minor_matches_pointwise_definition(fn4one):
    f = _fn(fn4one, "x2 x1 x3 x1^2")
    vals = tuple(f.table.tolist())
    for i, j in [(1, 2), (1, 3), (2, 3)]:
        g = identification_minor(f, i, j)
        assert tuple(g.table.tolist()) == oracles.minor_values(vals, fn4one.order, 3, i, j)


def test_minor_oracle_path(fn4one):
    f = FiniteFunction.from_term(fn4one, parse_term("x1 x3 x2"), cap=10)
    g = identification_minor(f, 2, 3)
    assert not g.is_explicit
    assert np.array_equal(g.to_table(), term_values(fn4one, parse_term("x1 x3 x3")))


def test_minor_never_depends_on_i(fn4one):
    f = _fn(fn4one, "x1 x2 x3 x1")
    for i, j in [(1, 2), (1, 3), (2, 3)]:
        assert not depends_on(identification_minor(f, i, j), i)


def test_semilattice_counterexample_table():
    f = build_semilattice_counterexample()
    assert f(0, 0, 1) == 1 and f(0, 1, 1) == 0 and f(1, 1, 1) == 1
    assert depends_on(f, 2)
    L = semilattice()
    for (i, j), w in {(1, 2): "x3", (1, 3): "x3", (2, 3): "x1"}.items():
        assert np.array_equal(identification_minor(f, i, j).table, term_values(L, parse_term(w, 3)))


def test_depends_on_examples():
    L = semilattice()
    assert not depends_on(_fn(L, "x1", 2), 2)
    const = FiniteFunction(L, 2, table=np.zeros(4, dtype=int))
    assert not any(depends_on(const, k) for k in (1, 2))


def test_variable_exponents(fn4one, square):
    assert exponent_vector(_fn(fn4one, "x1^2 x2")) == (2, 1)
    assert exponent_vector(build_square_f(4, square)) == (2, 2, 2, 2)
    assert variable_exponent(_fn(fn4one, "x1", 2), 2) == 0


def test_not_a_power(fn4one):
    f = _fn(fn4one, "x1 x2")
    table = f.table.copy()
    # send a |-> b on the first coordinate's restriction: no power does that
    a, b, one = fn4one.index("a"), fn4one.index("b"), fn4one.identity
    table[np.ravel_multi_index((a, one), f.shape)] = b
    g = FiniteFunction(fn4one, 2, table=table)
    with pytest.raises(NotAPower):
        variable_exponent(g, 1)
    res = is_term_function(g, "pruned")
    assert not res and res.reason


def test_multiset_permutations_match_itertools():
    got = list(multiset_permutations({1: 2, 2: 1, 3: 2}))
    want = sorted(oracles.distinct_arrangements((1, 1, 2, 3, 3)))
    assert got == want


def test_candidate_words_length_lex_and_counted():
    opts = occurrence_options((1, 5, 0), NilpotentProfile(5, 3))
    assert opts == [[1], [3, 4, 5], [0]]
    words = list(candidate_words(opts))
    assert len(words) == count_candidates(opts) == 4 + 5 + 6
    assert words == sorted(words, key=lambda w: (len(w), w))
    assert occurrence_options((2, 7), NilpotentProfile(5, 4)) == [[2], [4]]


def test_term_membership_examples(square):
    L = semilattice()
    res = is_term_function(_fn(L, "x1 x2"), "closure")
    assert str(res.term) == "x1 x2"
    f = build_semilattice_counterexample()
    res = is_term_function(f, "closure")
    assert not res and res.candidates == 7
    assert not is_term_function(f, "pruned")
    g = build_square_f(4, square)
    res = is_term_function(g, "pruned")
    assert not res and res.candidates == 2520


def test_has_imt_examples(square):
    rep = has_imt(build_semilattice_counterexample(), "closure")
    assert rep.holds and {k: str(t) for k, t in rep.witnesses.items()} == {(1, 2): "x3", (1, 3): "x3", (2, 3): "x1"}
    L = semilattice()
    assert has_imt(_fn(L, "x1", 4)).holds
    f = build_square_f(4, square)
    rep = has_imt(f, "pruned")
    assert rep.holds and len(rep.witnesses) == 6
    for (i, j), t in rep.witnesses.items():
        assert terms_equivalent(square, t, build_witness_terms(4, i, j)[2])


def test_has_imt_reports_failing_pair(fn4one):
    f = _fn(fn4one, "x1 x2 x3")
    table = f.table.copy()
    a = fn4one.index("a")
    table[np.ravel_multi_index((a, a, a), f.shape)] = fn4one.index("b")
    rep = has_imt(FiniteFunction(fn4one, 3, table=table), "closure")
    assert not rep.holds and rep.failing == (1, 2)


@pytest.mark.parametrize("text", ["x1", "x2 x1", "x1 x2 x1", "x1^3 x2", "x2 x1^4", "x1 x3 x2", "x3^2 x1", "x2 x2 x3 x1"])
def test_pruned_and_closure_agree_on_words(fn4one, text):
    f = _fn(fn4one, text, 3 if "x3" in text else 2)
    a, b = is_term_function(f, "pruned"), is_term_function(f, "closure")
    assert a and b and terms_equivalent(fn4one, a.term, b.term)


def test_pruned_and_closure_agree_on_perturbed(fn4one):
    rng = np.random.default_rng(7)
    for _ in range(20):
        f = _fn(fn4one, "x2 x1 x2")
        table = f.table.copy()
        k = rng.integers(len(table))
        table[k] = (table[k] + 1 + rng.integers(fn4one.order - 1)) % fn4one.order
        g = FiniteFunction(fn4one, 2, table=table)
        try:
            pruned = bool(is_term_function(g, "pruned"))
        except NotAPower:
            pruned = False
        assert pruned == bool(is_term_function(g, "closure"))


def test_function_from_minors_inconsistent():
    L = semilattice()
    minors = {(1, 2): term_values(L, parse_term("x3")), (1, 3): term_values(L, parse_term("x1", 3))}
    with pytest.raises(InconsistentConstraints):
        function_from_minors(L, 3, minors)


def test_enumeration_matches_brute_force():
    L = semilattice()
    words = oracles.word_functions([[0, 0], [0, 1]], 3, 4)
    brute = {tuple(v) for v in oracles.imt_filter([[0, 0], [0, 1]], 3, words)}
    streamed = list(enumerate_imt_functions(L, 3))
    assert {tuple(f.table.tolist()) for f, _ in streamed} == brute
    assert len(streamed) == len(brute) == 27
    assert tuple(build_semilattice_counterexample().table.tolist()) in brute
    assert words <= brute
    for f, _ in streamed:
        assert has_imt(f, "closure").holds
    assert len(list(enumerate_imt_functions(trivial(), 2))) == 1


def test_enumeration_needs_large_arity():
    with pytest.raises(ValueError):
        next(enumerate_imt_functions(semilattice(), 2))


def test_probe_semilattice_and_trivial():
    rep = degree_lower_bound_probe(semilattice(), 3)
    assert rep.lower_bound == 3 and rep.arities[3]["bad"] == 20
    rep = degree_lower_bound_probe(trivial(), 4)
    assert rep.lower_bound is None


def test_probe_two_element_group_matches_oracle():
    # the oracle counts 16 IMT functions at arity 3 of which 8 are not words,
    # and 16 IMT functions at arity 4, all of them words
    Z = [[0, 1], [1, 0]]
    words = oracles.word_functions(Z, 3, 6)
    assert sum(v not in words for v in oracles.imt_filter(Z, 3, words)) == 8
    rep = degree_lower_bound_probe(cyclic_group(2), 4)
    assert rep.arities[3]["imt_functions"] == 16 and rep.arities[3]["bad"] == 8
    assert rep.arities[4]["imt_functions"] == 16 and rep.arities[4]["bad"] == 0
    assert rep.lower_bound == 3


def test_group_counterexample_is_not_affine():
    # f(x,y,z) with f12 = f13 = x2 and f23 = x1 on Z2
    Z = cyclic_group(2)
    minors = {(1, 2): term_values(Z, Term((2,), 3)), (1, 3): term_values(Z, Term((2,), 3)), (2, 3): term_values(Z, Term((1,), 3))}
    f = function_from_minors(Z, 3, minors)
    assert has_imt(f, "closure").holds and not is_term_function(f, "closure")
    affine = {tuple((c0 + a * x + b * y + c * z) % 2 for x, y, z in product(range(2), repeat=3)) for c0, a, b, c in product(range(2), repeat=4)}
    assert tuple(f.table.tolist()) not in affine


def test_majority_is_a_bad_function_on_z2():
    # every minor of majority is a projection, yet it is not affine over GF(2)
    S = cyclic_group(2)
    table = np.array([(a & b) ^ (a & c) ^ (b & c) for a in (0, 1) for b in (0, 1) for c in (0, 1)])
    f = FiniteFunction(S, 3, table=table)
    assert has_imt(f).holds
    assert is_term_function(f).term is None
