"""Named objects and end-to-end checks.

* The 30-element monoid (FN5{a,b}/θ)¹ with θ merging {abab, baba} and
  {aabb, bbaa}, its IMT function f of arity n >= 4 and the words r_ij that
  induce each minor of f.
* The ternary function on the 2-element semilattice fixed by
  f12 = f13 = x3, f23 = x1.
* The 0-direct union of the 30-element monoid with (FN5{a,b})¹.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from itertools import combinations
from math import factorial

import numpy as np

from .errors import ArityTooSmall
from .functions import FiniteFunction, support_tuples
from .minors import (
    enumerate_imt_functions,
    exponent_vector,
    first_matching_word,
    function_from_minors,
    has_imt,
    identification_minor,
    is_term_function,
    multiset_permutations,
)
from .semigroup import (
    FiniteSemigroup,
    Partition,
    adjoin_identity,
    build_free_nilpotent,
    find_isomorphism,
    identity_witness,
    ideal_witness,
    is_embedding,
    is_isomorphism,
    nilpotency_profile,
    quotient_by_partition,
    rees_quotient,
    s_zero,
    semilattice,
    subsemigroup_closure,
    zero_union_parts,
)
from .terms import Term, parse_term, term_values, values_at, word_function_closure

DEFAULT_SEED = 20240607


@dataclass
class GalleryReport:
    check: str
    status: str
    stats: dict = field(default_factory=dict)
    witness: dict | None = None
    seed: int = DEFAULT_SEED

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"check": self.check, "status": self.status, "stats": self.stats, "witness": self.witness, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, Term):
        return str(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serializable: {type(x)}")


# --- the 30-element monoid --------------------------------------------------

THETA_CLASSES = (("abab", "baba"), ("aabb", "bbaa"))


def build_square_monoid() -> FiniteSemigroup:
    """(FN5{a,b}/θ)¹; the partition is audited as a congruence on the way."""
    fn5 = build_free_nilpotent("ab", 5)
    classes = [[fn5.index(w) for w in cls] for cls in THETA_CLASSES]
    Q = quotient_by_partition(fn5, Partition.from_classes(fn5.order, classes))
    S = adjoin_identity(Q)
    S.name = "(FN5{a,b}/θ)^1"
    return S


def _plus(i, k, n):
    return (i - 1 + k) % n + 1


def g_term(n: int, i: int, j: int) -> Term:
    """The word g_ij of length 2ℓ, ℓ = ((j - i) mod n) + 1, indices mod n on 1..n."""
    if i == j:
        return Term((i, i), n)
    ell = (j - i) % n + 1
    pos = [0] * (2 * ell + 1)
    pos[1] = pos[3] = i
    for k in range(1, ell - 1):
        pos[2 * k] = pos[2 * k + 3] = _plus(i, k, n)
    pos[2 * ell - 2] = pos[2 * ell] = j
    return Term(tuple(pos[1:]), n)


def build_witness_terms(n: int, i: int, j: int) -> tuple[Term, Term, Term]:
    """(g_ij, h, r) for 1 <= i < j <= n; r = x_j^4 h induces the minor f_ij."""
    if not 1 <= i < j <= n:
        raise ValueError(f"need 1 <= i < j <= {n}")
    if (i, j) == (1, n):
        h = g_term(n, 2, n - 1)
    elif j == i + 1:
        h = g_term(n, _plus(j, 1, n), _plus(i, -1, n))
    else:
        h = g_term(n, _plus(j, 1, n), _plus(i, -1, n)) * g_term(n, i + 1, j - 1)
    r = Term((j,) * 4, n) * h
    return g_term(n, i, j), h, r


class _SquareRule:
    """Pointwise definition of f on tuples of S^n."""

    def __init__(self, S: FiniteSemigroup, n: int):
        self.S, self.n = S, n
        t = S.table.astype(np.int64)
        self.t = t
        self.one = S.identity
        self.zero = S.zero

    def square_pair(self, x, y, adjacent):
        t = self.t
        if adjacent:
            xy = t[x, y]
            return t[xy, xy]
        return t[t[x, x], t[y, y]]

    def __call__(self, tuples: np.ndarray) -> np.ndarray:
        tuples = np.asarray(tuples, dtype=np.int64)
        n, one = self.n, self.one
        ne = tuples != one
        support = ne.sum(axis=1)
        out = np.full(len(tuples), self.zero, dtype=np.int64)
        out[support == 0] = one
        single = np.flatnonzero(support == 1)
        if single.size:
            x = tuples[single, np.argmax(ne[single], axis=1)]
            out[single] = self.t[x, x]
        pair = np.flatnonzero(support == 2)
        if pair.size:
            cols = np.argsort(~ne[pair], axis=1, kind="stable")[:, :2]
            i, j = cols[:, 0], cols[:, 1]
            x = tuples[pair, i]
            y = tuples[pair, j]
            adjacent = (j == i + 1) | ((i == 0) & (j == n - 1))
            out[pair] = np.where(adjacent, self.square_pair(x, y, True), self.square_pair(x, y, False))
        return out


def build_square_f(n: int, S: FiniteSemigroup | None = None, explicit: bool | None = None) -> FiniteFunction:
    """f: 0 on three or more non-identity arguments; on support {i<j}
    (x_i x_j)² when j = i+1 or (i,j) = (1,n), else x_i² x_j²; x² on one
    argument; 1 at the all-identity tuple.  Table-backed for n <= 5."""
    if n < 4:
        raise ArityTooSmall(f"f needs arity at least 4, got {n}")
    S = S or build_square_monoid()
    rule = _SquareRule(S, n)
    explicit = n <= 5 if explicit is None else explicit
    if not explicit:
        return FiniteFunction(S, n, oracle=lambda a: int(rule(np.array([a]))[0]), batch=rule, name=f"f{n}")

    s, one = S.order, S.identity
    weights = [s ** (n - 1 - k) for k in range(n)]
    base = one * sum(weights)
    table = np.full(s**n, S.zero, dtype=np.uint8)
    table[base] = one
    others = np.array(S.non_identity())
    delta = others - one
    t = rule.t
    for k in range(n):
        table[base + delta * weights[k]] = t[others, others]
    for i, j in combinations(range(n), 2):
        idx = base + delta[:, None] * weights[i] + delta[None, :] * weights[j]
        x, y = np.meshgrid(others, others, indexing="ij")
        adjacent = j == i + 1 or (i, j) == (0, n - 1)
        table[idx.ravel()] = rule.square_pair(x, y, adjacent).ravel()
    return FiniteFunction(S, n, table=table, name=f"f{n}")


def two_occurrence_words(n: int, first: int | None = None):
    """Words with every variable exactly twice; optionally pinned to start with x{first}."""
    counts = {k: 2 for k in range(1, n + 1)}
    if first is None:
        yield from multiset_permutations(counts)
        return
    counts[first] -= 1
    for w in multiset_permutations(counts):
        yield (first,) + w


def two_occurrence_count(n: int, pinned: bool = False) -> int:
    if pinned:
        return factorial(2 * n - 1) // 2 ** (n - 1)
    return factorial(2 * n) // 2**n


def verify_square(n: int = 4, *, samples: int = 10**6, seed: int = DEFAULT_SEED, rotation: bool = False) -> GalleryReport:
    """(a) every minor f_ij equals r_ij; (b) no word induces f.

    For n = 4 the minors are compared on all |S|^4 tuples.  Otherwise they are
    compared on every tuple with at most three non-identity coordinates (beyond
    that both sides are 0) plus a seeded random sample.  The word search covers
    every word with each variable twice; with ``rotation`` only words starting
    with x2 are scanned, which suffices because f is invariant under cyclic
    rotation of its arguments (checked).
    """
    start = time.perf_counter()
    S = build_square_monoid()
    f = build_square_f(n, S)
    stats: dict = {"arity": n, "order": S.order}
    witness = None

    exhaustive = n == 4
    if not exhaustive:
        rng = np.random.default_rng(seed)
        probe = np.concatenate([support_tuples(S, n, 3), rng.integers(0, S.order, size=(samples, n))])
        stats["slice_tuples"] = int(len(probe) - samples)
        stats["sample_tuples"] = samples
    minors_ok = 0
    for i, j in combinations(range(1, n + 1), 2):
        _, _, r = build_witness_terms(n, i, j)
        if exhaustive:
            got = identification_minor(f, i, j).table
            want = term_values(S, r)
            bad = np.flatnonzero(got != want)
            if bad.size:
                witness = {"minor": [i, j], "tuple": list(np.unravel_index(bad[0], f.shape))}
                break
        else:
            moved = probe.copy()
            moved[:, i - 1] = moved[:, j - 1]
            got = f.values_at(moved)
            want = values_at(S, r.word, probe)
            bad = np.flatnonzero(got != want)
            if bad.size:
                witness = {"minor": [i, j], "tuple": probe[bad[0]].tolist()}
                break
        minors_ok += 1
    stats["minors_verified"] = minors_ok
    stats["minor_tuples_each"] = S.order**n if exhaustive else int(len(probe))

    exps = exponent_vector(f)
    stats["exponents"] = list(exps)
    exps_ok = exps == (2,) * n
    rotation_ok = True
    if f.is_explicit:
        arr = f.table.reshape(f.shape)
        rotation_ok = bool(np.array_equal(np.moveaxis(arr, -1, 0), arr))
    stats["rotation_invariant"] = rotation_ok

    probe2 = support_tuples(S, n, 2)
    words = two_occurrence_words(n, first=2 if rotation else None)
    table = f.table if f.is_explicit else None
    found, examined = first_matching_word(S, words, n, probe2, f.values_at(probe2), table)
    stats["candidate_space"] = two_occurrence_count(n)
    stats["candidates_checked"] = examined
    stats["rotation_pinned"] = rotation
    stats["matches"] = 0 if found is None else 1
    if found is not None and witness is None:
        witness = {"inducing_word": str(Term(found, n))}
    stats["seconds"] = round(time.perf_counter() - start, 3)

    ok = minors_ok == n * (n - 1) // 2 and exps_ok and rotation_ok and found is None
    if not ok and witness is None:
        witness = {"exponents": list(exps), "rotation_invariant": rotation_ok}
    return GalleryReport(f"square-n{n}", "pass" if ok else "fail", stats, witness, seed)


# --- the semilattice example -----------------------------------------------

SEMILATTICE_MINORS = {(1, 2): "x3", (1, 3): "x3", (2, 3): "x1"}


def build_semilattice_counterexample() -> FiniteFunction:
    S = semilattice()
    minors = {pair: term_values(S, parse_term(w, 3)) for pair, w in SEMILATTICE_MINORS.items()}
    return function_from_minors(S, 3, minors, name="f_sl")


def _naive_minor(values, order, n, i, j):
    out = []
    for idx in range(order**n):
        a = list(np.unravel_index(idx, (order,) * n))
        a[i - 1] = a[j - 1]
        out.append(values[int(np.ravel_multi_index(a, (order,) * n))])
    return np.array(out)


def brute_force_imt_tables(S: FiniteSemigroup, n: int) -> set[bytes]:
    """Every n-ary function whose minors are word functions, by exhaustion."""
    from itertools import product

    cl = word_function_closure(S, n)
    cells = S.order**n
    out = set()
    for values in product(range(S.order), repeat=cells):
        if all(_naive_minor(values, S.order, n, i, j) in cl for i, j in combinations(range(1, n + 1), 2)):
            out.add(np.array(values, dtype=np.uint8).tobytes())
    return out


def verify_semilattice() -> GalleryReport:
    start = time.perf_counter()
    S = semilattice()
    f = build_semilattice_counterexample()
    imt = has_imt(f, "closure")
    witnesses = {f"{i},{j}": str(t) for (i, j), t in imt.witnesses.items()}
    expected = {f"{i},{j}": w for (i, j), w in SEMILATTICE_MINORS.items()}
    membership = is_term_function(f, "closure")
    brute = brute_force_imt_tables(S, 3)
    streamed = {g.table.tobytes() for g, _ in enumerate_imt_functions(S, 3)}
    stats = {
        "table": f.table.tolist(),
        "imt": imt.holds,
        "minor_witnesses": witnesses,
        "is_term": bool(membership),
        "closure_size": membership.candidates,
        "functions_scanned": S.order ** (S.order**3),
        "brute_force_imt": len(brute),
        "enumerated_imt": len(streamed),
        "seconds": 0.0,
    }
    ok = imt.holds and witnesses == expected and not membership and brute == streamed
    stats["seconds"] = round(time.perf_counter() - start, 3)
    witness = None if ok else {"brute_only": len(brute - streamed), "stream_only": len(streamed - brute)}
    return GalleryReport("semilattice", "pass" if ok else "fail", stats, witness)


# --- 0-direct union ----------------------------------------------------------

def verify_propagation_example() -> GalleryReport:
    """S = (FN5{a,b}/θ)¹, T = (FN5{a,b})¹: S is both a subsemigroup and a
    Rees quotient of S ∪₀ T."""
    start = time.perf_counter()
    S = build_square_monoid()
    T = adjoin_identity(build_free_nilpotent("ab", 5))
    S0, T0 = s_zero(S), s_zero(T)
    parts = zero_union_parts(S, T)
    U = parts.semigroup
    stats: dict = {"S0": S0.order, "T0": T0.order, "union": U.order}
    checks = {}
    checks["order_law"] = U.order == S0.order + T0.order - 1
    ideal = sorted(set(parts.right))
    checks["T_ideal"] = ideal_witness(U, ideal) is None
    R = rees_quotient(U, ideal)
    stats["rees_quotient"] = R.order
    iso = find_isomorphism(R, S0)
    checks["rees_iso_S0"] = iso is not None and is_isomorphism(R, S0, iso)
    left = list(parts.left)
    checks["S_embeds"] = is_embedding(S0, U, left) and subsemigroup_closure(U, left) == frozenset(left)
    checks["T_embeds"] = is_embedding(T0, U, list(parts.right))
    stats["checks"] = checks
    stats["seconds"] = round(time.perf_counter() - start, 3)
    ok = all(checks.values())
    witness = None if ok else {k: v for k, v in checks.items() if not v}
    return GalleryReport("propagation", "pass" if ok else "fail", stats, witness)


# --- identities --------------------------------------------------------------

IDENTITIES = (("x1 x2 x1 x2", "x2 x1 x2 x1"), ("x1^2 x2^2", "x2^2 x1^2"))


def verify_identities() -> GalleryReport:
    """Both identities hold on the 30-element monoid and fail on (FN5{a,b})¹."""
    S = build_square_monoid()
    F = adjoin_identity(build_free_nilpotent("ab", 5))
    stats = {"holds": {}, "free_witness": {}}
    ok = True
    for lhs, rhs in IDENTITIES:
        key = f"{lhs} = {rhs}"
        s, t = parse_term(lhs, 2), parse_term(rhs, 2)
        held = identity_witness(S, s, t) is None
        w = identity_witness(F, s, t)
        stats["holds"][key] = held
        stats["free_witness"][key] = None if w is None else [F.labels[x] for x in w]
        ok &= held and w is not None and [F.labels[x] for x in w] == ["a", "b"]
    return GalleryReport("identities", "pass" if ok else "fail", stats, None if ok else stats)


def square_monoid_report() -> dict:
    S = build_square_monoid()
    return {"order": S.order, "profile": asdict(nilpotency_profile(S, exclude_identity=True))}


CHECKS = {
    "square": verify_square,
    "semilattice": verify_semilattice,
    "propagation": verify_propagation_example,
    "identities": verify_identities,
}
