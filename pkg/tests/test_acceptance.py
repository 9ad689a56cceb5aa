"""Acceptance criteria 1-8, each at its stated tolerance and time budget.

Every test records one PASS/FAIL line; the lines are echoed as they happen
and again in the terminal summary.  Standalone: ``python3 tests/test_acceptance.py``.
"""
import json
import random
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import suites  # noqa: E402
from sgx.cli import main as cli  # noqa: E402
from sgx.functions import FiniteFunction  # noqa: E402
from sgx.gallery import (  # noqa: E402
    THETA_CLASSES,
    build_square_monoid,
    verify_identities,
    verify_propagation_example,
    verify_semilattice,
    verify_square,
)
from sgx.io import load_semigroup  # noqa: E402
from sgx.minors import degree_lower_bound_probe  # noqa: E402
from sgx.semigroup import (  # noqa: E402
    Partition,
    adjoin_identity,
    associativity_witness,
    build_free_nilpotent,
    congruence_witness,
    cyclic_group,
    find_isomorphism,
    from_table,
    ideal_witness,
    is_isomorphism,
    nilpotency_profile,
    rees_quotient,
    semilattice,
    zero_direct_union,
)
from sgx.synthesis import synthesize_term_4nilpotent, synthesize_term_nilpotent_free  # noqa: E402
from sgx.terms import Term, terms_equivalent  # noqa: E402

RESULTS: dict[int, str] = {}


@contextmanager
def criterion(num, title, budget, capsys=None):
    """Run a block, time it, record PASS only if it finishes cleanly in budget."""
    start = time.perf_counter()
    detail = {}
    ok = False
    try:
        yield detail
        ok = True
    finally:
        secs = time.perf_counter() - start
        if ok and secs >= budget:
            ok = False
            detail["over_budget"] = True
        extra = " ".join(f"{k}={v}" for k, v in detail.items())
        line = f"criterion {num} {'PASS' if ok else 'FAIL'} {title} ({secs:.2f}s, budget {budget}s) {extra}".rstrip()
        RESULTS[num] = line
        if capsys is not None:
            with capsys.disabled():
                print("\n" + line)
        else:
            print(line)
    assert secs < budget, f"criterion {num} took {secs:.1f}s, budget {budget}s"


def test_criterion_1_square_monoid(tmp_path, capsys):
    with criterion(1, "30-element monoid build", 5, capsys) as info:
        out = tmp_path / "square.sg.json"
        code = cli(["build", "fn", "--alphabet", "ab", "--d", "5", "--merge", "abab=baba", "--merge", "aabb=bbaa",
                    "--adjoin-one", "-o", str(out)])
        assert code == 0
        S = load_semigroup(out)
        info["order"] = S.order
        assert S.order == 30
        # exhaustive congruence audit of θ on FN5{a,b}
        F = build_free_nilpotent("ab", 5)
        theta = Partition.from_classes(F.order, [[F.index(w) for w in cls] for cls in THETA_CLASSES])
        assert congruence_witness(F, theta) is None
        assert associativity_witness(S.table) is None
        p = nilpotency_profile(S, exclude_identity=True)
        info["profile"] = f"d={p.d},c={p.c}"
        assert (p.d, p.c) == (5, 5)
        assert find_isomorphism(S, build_square_monoid()) is not None


def test_criterion_2_identities(capsys):
    with criterion(2, "identities hold on S, fail on (FN5)^1 at (a,b)", 1, capsys) as info:
        rep = verify_identities()
        info["holds"] = all(rep.stats["holds"].values())
        assert rep.passed, rep.to_json()
        assert all(w == ["a", "b"] for w in rep.stats["free_witness"].values())


def test_criterion_3_square_function(tmp_path, capsys):
    with criterion(3, "f at arity 4: minors and non-term search", 60, capsys) as info:
        out = tmp_path / "r4.json"
        assert cli(["verify", "square", "--arity", "4", "-o", str(out)]) == 0
        s = json.loads(out.read_text())["stats"]
        assert s["minors_verified"] == 6 and s["minor_tuples_each"] == 30**4 == 810000
        assert s["candidates_checked"] == s["candidate_space"] == 2520 and s["matches"] == 0
        pinned = verify_square(4, rotation=True)
        assert pinned.passed and pinned.stats["rotation_invariant"]
        info["words"] = s["candidates_checked"]
        info["pinned_words"] = pinned.stats["candidates_checked"]
    with criterion("3b", "f at arity 5: slice, 10^6 samples, 113400 words", 15 * 60, capsys) as info:
        rep = verify_square(5, samples=10**6)
        s = rep.stats
        assert rep.passed, rep.to_json()
        assert s["minors_verified"] == 10 and s["sample_tuples"] == 10**6
        assert s["candidates_checked"] == 113400 and s["matches"] == 0
        info["slice"] = s["slice_tuples"]


def test_criterion_4_semilattice(capsys):
    with criterion(4, "semilattice counterexample", 1, capsys) as info:
        rep = verify_semilattice()
        s = rep.stats
        assert rep.passed, rep.to_json()
        assert s["imt"] and not s["is_term"]
        assert s["minor_witnesses"] == {"1,2": "x3", "1,3": "x3", "2,3": "x1"}
        assert s["closure_size"] == 7 and s["functions_scanned"] == 256
        assert s["brute_force_imt"] == s["enumerated_imt"]
        info["imt_functions"] = s["enumerated_imt"]


def test_criterion_5_degree_probe(capsys):
    with criterion(5, "degree probe", 30, capsys) as info:
        L = degree_lower_bound_probe(semilattice(), 3)
        info["semilattice_bound"] = L.lower_bound
        assert L.lower_bound == 3
        trivial = degree_lower_bound_probe(from_table(["1"], [[0]], "T1"), 4)
        info["trivial_bad"] = sum(r["bad"] for r in trivial.arities.values())
        assert trivial.lower_bound is None
        Z2 = degree_lower_bound_probe(cyclic_group(2), 4)
        info["Z2_bad_by_arity"] = {n: r["bad"] for n, r in Z2.arities.items()}
        # the stated expectation; it fails at arity 3 because majority is IMT but not affine
        assert Z2.lower_bound is None, f"Z2 has bad IMT functions: {info['Z2_bad_by_arity']}"


def _free_hidden_terms(rng, count):
    for m in range(count):
        d = (3, 4, 5)[m % 3]
        n = (3, 4, 5)[(m // 3) % 3]
        length = rng.randint(1, d - 1)
        yield d, Term(tuple(rng.randint(1, n) for _ in range(length)), n)


def _4nil_hidden_term(rng):
    n = rng.randint(2, 5)
    word = []
    for v in range(1, n + 1):
        word += [v] * rng.choice([1, 1, 2, 2, 3, 4, 5])
    rng.shuffle(word)
    return Term(tuple(word), n)


def test_criterion_6_synthesis(capsys):
    with criterion(6, "term synthesis oracle equivalence", 300, capsys) as info:
        rng = random.Random(6)
        monoids = {d: adjoin_identity(build_free_nilpotent("ab", d)) for d in (3, 4, 5)}
        free_ok = 0
        for d, hidden in _free_hidden_terms(rng, 225):
            M = monoids[d]
            f = FiniteFunction.from_term(M, hidden, cap=0).with_log()
            t, _ = synthesize_term_nilpotent_free(f, samples=500, seed=d)
            assert terms_equivalent(M, t, hidden), (d, hidden, t)
            for tag in ("restriction", "verify"):
                assert f.log.max_support.get(tag, 0) <= 2, (tag, f.log.max_support)
            assert set(f.log.counts) <= {"restriction", "verify", "sample"}
            free_ok += 1
        M = monoids[4]
        nil_ok = 0
        for _ in range(120):
            hidden = _4nil_hidden_term(rng)
            f = FiniteFunction.from_term(M, hidden)
            t, _ = synthesize_term_4nilpotent(f, samples=1000, seed=4)
            assert terms_equivalent(M, t, hidden), (hidden, t)
            nil_ok += 1
        info["free"] = f"{free_ok}/225"
        info["4nil"] = f"{nil_ok}/120"


def test_criterion_7_constructions(capsys):
    with criterion(7, "construction algebra", 10, capsys) as info:
        rng = random.Random(7)
        F5 = build_free_nilpotent("ab", 5)
        laws = 0
        for S in (F5, adjoin_identity(F5), build_square_monoid(), adjoin_identity(build_free_nilpotent("abc", 3))):
            for _ in range(10):
                gens = rng.sample(range(S.order), rng.randint(1, 3))
                ideal = {S.mul(S.mul(a, g), b) for g in gens for a in range(S.order) for b in range(S.order)} | set(gens)
                if ideal_witness(S, ideal) is not None:
                    continue
                R = rees_quotient(S, ideal)
                assert R.order == S.order - len(ideal) + 1
                laws += 1
        long_words = [x for x in range(F5.order) if x == F5.zero or len(F5.labels[x]) >= 3]
        R = rees_quotient(F5, long_words)
        F3 = build_free_nilpotent("ab", 3)
        assert R.order == 7
        iso = find_isomorphism(R, F3)
        assert iso is not None and is_isomorphism(R, F3, iso)
        pairs = [(semilattice(), F3), (F5, adjoin_identity(F3)), (build_square_monoid(), adjoin_identity(F5))]
        for S, T in pairs:
            U = zero_direct_union(S, T)
            assert U.order == (S.order + (S.zero is None)) + (T.order + (T.zero is None)) - 1
            assert associativity_witness(U.table) is None
        rep = verify_propagation_example()
        assert rep.passed, rep.to_json()
        info["rees_laws"] = laws


def test_criterion_8_property_suites(capsys):
    with criterion(8, "property suites", 30, capsys) as info:
        FN4_1 = adjoin_identity(build_free_nilpotent("ab", 4))
        FN5_1 = adjoin_identity(build_free_nilpotent("ab", 5))
        info["minor_of_word"] = suites.minor_of_word_is_word(FN4_1, cases=500)
        info["projection"] = suites.projection_commutes_with_evaluation(FN5_1, cases=500)
        info["closure_pairs"] = sum(suites.closure_is_idempotent(S, n) for S, n in
                                    [(semilattice(), 3), (FN4_1, 2), (build_free_nilpotent("a", 3), 3)])
        info["dags"] = suites.linear_extensions_respect_dags(1000)
        info["cyclic"] = suites.cycles_are_detected(1000)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
