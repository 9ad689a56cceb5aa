"""Identification minors, dependence, variable exponents, and term membership."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator

import numpy as np

from .errors import InconsistentConstraints, NotAMonoid, NotAPower
from .functions import FiniteFunction, all_tuples, support_tuples
from .semigroup import MAX_CELLS, FiniteSemigroup, index_dtype, nilpotency_profile
from .terms import Term, check_cells, word_function_closure, word_values


def identification_minor(f: FiniteFunction, i: int, j: int) -> FiniteFunction:
    """f_ij: the i-th argument replaced by the j-th (1-based, i < j)."""
    n = f.arity
    if n < 2:
        raise ValueError("identification minors need arity at least 2")
    if not 1 <= i < j <= n:
        raise ValueError(f"need 1 <= i < j <= {n}, got ({i}, {j})")
    name = f"{f.name}_{i}{j}"
    if f.is_explicit:
        arr = f.table.reshape(f.shape)
        diag = np.diagonal(arr, axis1=i - 1, axis2=j - 1)
        # remaining axes keep their order; the diagonal axis sits at j's slot
        g = np.moveaxis(diag, -1, j - 2)
        g = np.broadcast_to(np.expand_dims(g, i - 1), f.shape)
        return FiniteFunction(f.universe, n, table=np.ascontiguousarray(g).ravel(), name=name)

    def oracle(args):
        args = list(args)
        args[i - 1] = args[j - 1]
        return f.at(args)

    def batch(tuples):
        tuples = np.array(tuples, dtype=np.int64)
        tuples[:, i - 1] = tuples[:, j - 1]
        return f.values_at(tuples)

    return FiniteFunction(f.universe, n, oracle=oracle, batch=batch, name=name)


def depends_on(f: FiniteFunction, k: int, cap: int = MAX_CELLS) -> bool:
    """True iff two tuples differing only at coordinate k get different values."""
    arr = f.to_table(cap).reshape(f.shape)
    return bool(np.any(arr != arr.take([0], axis=k - 1)))


def unary_restriction(f: FiniteFunction, k: int, tag: str = "restriction") -> np.ndarray:
    """Values of f(1,..,x,..,1) with x at coordinate k, for every x in S."""
    S = f.universe
    if S.identity is None:
        raise NotAMonoid(f"{S.name} has no identity")
    tuples = np.full((S.order, f.arity), S.identity, dtype=np.int64)
    tuples[:, k - 1] = np.arange(S.order)
    return f.values_at(tuples, tag=tag)


def power_maps(S: FiniteSemigroup) -> list[np.ndarray]:
    """[x -> x^1, x -> x^2, ...] up to the first repeated map."""
    maps = [np.arange(S.order)]
    t = S.table.astype(np.int64)
    seen = {maps[0].tobytes()}
    while True:
        nxt = t[maps[-1], np.arange(S.order)]
        key = nxt.tobytes()
        if key in seen:
            return maps
        seen.add(key)
        maps.append(nxt)


def exponent_of(S: FiniteSemigroup, restriction: np.ndarray, k: int = 0) -> int:
    """Least e with x^e inducing ``restriction``; 0 for the constant identity."""
    if S.identity is None:
        raise NotAMonoid(f"{S.name} has no identity")
    restriction = np.asarray(restriction)
    if np.all(restriction == S.identity):
        return 0
    for e, p in enumerate(power_maps(S), start=1):
        if np.array_equal(p, restriction):
            return e
    raise NotAPower(k)


def variable_exponent(f: FiniteFunction, k: int) -> int:
    return exponent_of(f.universe, unary_restriction(f, k), k)


def exponent_vector(f: FiniteFunction) -> tuple[int, ...]:
    return tuple(variable_exponent(f, k) for k in range(1, f.arity + 1))


@dataclass
class TermSearch:
    """Outcome of a term-membership test; truthy iff a witness was found."""

    term: Term | None
    candidates: int
    strategy: str
    reason: str = ""

    def __bool__(self):
        return self.term is not None


def multiset_permutations(counts: dict[int, int]) -> Iterator[tuple[int, ...]]:
    """All words with the given letter multiplicities, in lexicographic order."""
    letters = sorted(k for k, c in counts.items() if c > 0)
    remaining = {k: counts[k] for k in letters}
    total = sum(remaining.values())
    word: list[int] = []

    def rec():
        if len(word) == total:
            yield tuple(word)
            return
        for k in letters:
            if remaining[k]:
                remaining[k] -= 1
                word.append(k)
                yield from rec()
                word.pop()
                remaining[k] += 1

    yield from rec()


def occurrence_options(exponents, profile) -> list[list[int]]:
    """Allowed occurrence counts per variable for a word inducing f.

    A variable with exponent below c occurs exactly that often.  Otherwise any
    count in c..d works, and when c >= d-1 all of them induce the same
    function, so c alone is enough.
    """
    d, c = profile.d, profile.c
    out = []
    for e in exponents:
        if e < c:
            out.append([e])
        elif c >= d - 1:
            out.append([c])
        else:
            out.append(list(range(c, d + 1)))
    return out


def candidate_words(options: list[list[int]]) -> Iterator[tuple[int, ...]]:
    """Words meeting per-variable occurrence options, in length-lex order."""
    by_length: dict[int, list[dict[int, int]]] = {}
    for combo in product(*options):
        counts = {k + 1: c for k, c in enumerate(combo)}
        by_length.setdefault(sum(combo), []).append(counts)
    for length in sorted(by_length):
        if length == 0:
            continue
        yield from heapq.merge(*(multiset_permutations(c) for c in by_length[length]))


def count_candidates(options: list[list[int]]) -> int:
    from math import factorial

    total = 0
    for combo in product(*options):
        if sum(combo):
            m = factorial(sum(combo))
            for c in combo:
                m //= factorial(c)
            total += m
    return total


def first_matching_word(S, words, arity, probe, probe_values, table=None, chunk=None):
    """Scan words in order; return (word, examined) for the first one inducing the target.

    Words are screened in batches on a thin slice of ``probe``, then on all of
    it, and survivors are confirmed against the full ``table`` when one is
    given.  ``word`` is None when nothing matches, and ``examined`` then counts
    every candidate.
    """
    t = S.table.astype(np.int64)
    probe = np.asarray(probe, dtype=np.int64)
    target = np.asarray(probe_values, dtype=np.int64)
    step = max(1, len(probe) // 256)
    thin, thin_target = probe[::step], target[::step]
    if chunk is None:
        chunk = max(64, 2**21 // max(1, len(thin)))

    def screen(W, tuples, expected):
        acc = tuples[:, W[:, 0]]
        for col in range(1, W.shape[1]):
            acc = t[acc, tuples[:, W[:, col]]]
        return np.all(acc == expected[:, None], axis=0)

    def flush(batch, offset):
        for L in sorted({len(w) for w in batch}):
            idx = [k for k, w in enumerate(batch) if len(w) == L]
            W = np.array([batch[k] for k in idx], dtype=np.int64) - 1
            for pos in np.flatnonzero(screen(W, thin, thin_target)):
                k = idx[pos]
                w = batch[k]
                if not screen(W[pos:pos + 1], probe, target)[0]:
                    continue
                if table is None or np.array_equal(word_values(S, w, arity), table):
                    return w, offset + k + 1
        return None

    seen = 0
    batch: list[tuple[int, ...]] = []
    for w in words:
        batch.append(w)
        if len(batch) >= chunk:
            hit = flush(batch, seen)
            if hit:
                return hit
            seen += len(batch)
            batch = []
    if batch:
        hit = flush(batch, seen)
        if hit:
            return hit
        seen += len(batch)
    return None, seen


def is_term_function(f: FiniteFunction, strategy: str = "auto", cap: int = MAX_CELLS) -> TermSearch:
    """Decide whether f is induced by a word.

    ``closure`` looks f up among all word functions of the same arity and
    returns the length-lex least witness.  ``pruned`` (nilpotent monoids only)
    derives occurrence counts from the variable exponents and scans only the
    words with those counts.  ``auto`` picks pruned on nilpotent monoids.
    """
    S = f.universe
    if strategy == "auto":
        strategy = "pruned" if _pruned_applicable(S) else "closure"
    if strategy == "closure":
        table = f.to_table(cap)
        cl = word_function_closure(S, f.arity, cap=cap)
        return TermSearch(cl.witness(table), len(cl), "closure")
    if strategy != "pruned":
        raise ValueError(f"unknown strategy {strategy!r}")

    profile = nilpotency_profile(S, exclude_identity=True)
    if S.identity is None or profile.d is None or profile.c is None:
        raise ValueError("pruned strategy needs a monoid whose non-identity part is nilpotent")
    table = f.to_table(cap)
    try:
        exps = exponent_vector(f)
    except NotAPower as exc:
        return TermSearch(None, 0, "pruned", reason=str(exc))
    options = occurrence_options(exps, profile)
    total = count_candidates(options)
    if total == 0:
        return TermSearch(None, 0, "pruned", reason="constant identity is not a word function")
    probe = support_tuples(S, f.arity, min(2, f.arity))
    probe_values = f.values_at(probe)
    word, examined = first_matching_word(S, candidate_words(options), f.arity, probe, probe_values, table)
    if word is None:
        return TermSearch(None, examined, "pruned", reason=f"no word among {examined} candidates")
    return TermSearch(Term(word, f.arity), examined, "pruned")


def _pruned_applicable(S: FiniteSemigroup) -> bool:
    if S.identity is None or S.order < 2:
        return False
    p = nilpotency_profile(S, exclude_identity=True)
    return p.d is not None and p.c is not None


@dataclass
class IMTReport:
    holds: bool
    witnesses: dict[tuple[int, int], Term] = field(default_factory=dict)
    failing: tuple[int, int] | None = None
    searches: dict[tuple[int, int], TermSearch] = field(default_factory=dict)

    def __bool__(self):
        return self.holds


def has_imt(f: FiniteFunction, strategy: str = "auto", cap: int = MAX_CELLS) -> IMTReport:
    """Check that every identification minor of f is a term function."""
    report = IMTReport(True)
    for i, j in combinations(range(1, f.arity + 1), 2):
        res = is_term_function(identification_minor(f, i, j), strategy, cap)
        report.searches[(i, j)] = res
        if not res:
            report.holds = False
            report.failing = (i, j)
            return report
        report.witnesses[(i, j)] = res.term
    return report


def diagonal_indices(order: int, arity: int, i: int, j: int) -> np.ndarray:
    """Flat indices of all tuples with a_i == a_j."""
    grid = np.indices((order,) * arity).reshape(arity, -1)
    return np.flatnonzero(grid[i - 1] == grid[j - 1])


def function_from_minors(S: FiniteSemigroup, arity: int, minors: dict, name: str = "f") -> FiniteFunction:
    """The unique f with f_ij = minors[(i, j)], found by propagating values.

    Each minor is a value table (or FiniteFunction).  A tuple with a_i = a_j
    must satisfy f(a) = f_ij(a).  Raises InconsistentConstraints when two minors
    disagree on a tuple or some tuple is left undetermined.
    """
    cells = check_cells(S.order, arity)
    values = np.full(cells, -1, dtype=np.int64)
    grid = all_tuples(S.order, arity)
    for (i, j), g in sorted(minors.items()):
        g = g.to_table() if isinstance(g, FiniteFunction) else np.asarray(g)
        idx = diagonal_indices(S.order, arity, i, j)
        new = g[idx].astype(np.int64)
        old = values[idx]
        clash = (old != -1) & (old != new)
        if clash.any():
            k = idx[np.argmax(clash)]
            raise InconsistentConstraints(f"minors disagree at {tuple(int(v) for v in grid[k])}")
        values[idx] = new
    if (values == -1).any():
        k = int(np.argmax(values == -1))
        raise InconsistentConstraints(f"no minor determines f at {tuple(int(v) for v in grid[k])}")
    return FiniteFunction(S, arity, table=values, name=name)


def enumerate_imt_functions(S: FiniteSemigroup, n: int, cap: int = MAX_CELLS):
    """Yield (f, witnesses) for every n-ary function with IMT, each once.

    Needs n > |S| so that every tuple repeats a coordinate and f is fixed by
    its minors.  Minor slots are filled by backtracking over word functions
    that do not depend on the replaced coordinate, rejecting as soon as two
    slots disagree on a shared tuple.
    """
    if n <= S.order:
        raise ValueError(f"need arity n > |S| = {S.order}")
    cells = check_cells(S.order, n, cap)
    cl = word_function_closure(S, n, cap=cap)
    members = list(zip(cl.tables, cl.members.values()))
    slots = list(combinations(range(1, n + 1), 2))
    shape = (S.order,) * n
    options = []
    for i, j in slots:
        opts = []
        for tab, term in members:
            arr = tab.reshape(shape)
            if np.all(arr == arr.take([0], axis=i - 1)):
                opts.append((tab.astype(np.int64), term))
        options.append(opts)
    diags = [diagonal_indices(S.order, n, i, j) for i, j in slots]
    values = np.full(cells, -1, dtype=np.int64)
    chosen: list[Term] = []
    seen: set[bytes] = set()

    def rec(k):
        if k == len(slots):
            tab = values.astype(index_dtype(S.order))
            key = tab.tobytes()
            if key not in seen:
                seen.add(key)
                yield FiniteFunction(S, n, table=tab.copy(), name=f"imt{len(seen)}"), dict(zip(slots, chosen))
            return
        idx = diags[k]
        old = values[idx]
        for tab, term in options[k]:
            new = tab[idx]
            if np.any((old != -1) & (old != new)):
                continue
            values[idx] = new
            chosen.append(term)
            yield from rec(k + 1)
            chosen.pop()
            values[idx] = old

    yield from rec(0)


@dataclass
class ProbeReport:
    universe: str
    order: int
    arities: dict[int, dict] = field(default_factory=dict)

    @property
    def lower_bound(self) -> int | None:
        bad = [n for n, row in self.arities.items() if row["bad"]]
        return max(bad) if bad else None


def degree_lower_bound_probe(S: FiniteSemigroup, max_arity: int, cap: int = MAX_CELLS) -> ProbeReport:
    """For |S| < n <= max_arity, look for IMT functions that are not term functions.

    A bad function at arity n shows the degree is at least n.  No upper
    bound is ever claimed.
    """
    if max_arity <= S.order:
        raise ValueError(f"max_arity must exceed |S| = {S.order}")
    report = ProbeReport(S.name, S.order)
    for n in range(S.order + 1, max_arity + 1):
        cl = word_function_closure(S, n, cap=cap)
        total = 0
        bad = 0
        example = None
        for f, witnesses in enumerate_imt_functions(S, n, cap):
            total += 1
            if f.table not in cl:
                bad += 1
                if example is None:
                    example = {"table": f.table.tolist(), "minors": {f"{i},{j}": str(t) for (i, j), t in witnesses.items()}}
        report.arities[n] = {"imt_functions": total, "bad": bad, "example": example, "word_functions": len(cl)}
    return report
