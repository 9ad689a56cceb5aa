"""Recover a term from a function known (promised) to have IMT.

Both procedures read only tuples with at most two non-identity coordinates,
then check the produced term on those tuples plus a seeded random sample.

* :func:`synthesize_term_nilpotent_free` works over (FN_d A)^1.  Each pair of
  variables whose exponents sum below d has a unique two-variable word; the
  left-to-right order of occurrences in those words is merged into one digraph
  whose linear extension is the answer.
* :func:`synthesize_term_4nilpotent` works over noncommutative monoids whose
  non-identity part is 3- or 4-nilpotent.  Exponent-1 variables are ordered
  pairwise, exponent-2 variables are slotted in from the shape of their
  two-variable words, and higher exponents become trailing powers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .digraph import OccurrenceDigraph, linear_extension
from .errors import BadPromise, CycleFound, NotAMonoid, RestrictionNotInduced, ShapeConflict, UseCommutativePath
from .functions import FiniteFunction, support_tuples
from .minors import exponent_of, multiset_permutations, unary_restriction
from .semigroup import FiniteSemigroup, nilpotency_profile
from .terms import Term, terms_equivalent, values_at

DEFAULT_SEED = 20240607
DEFAULT_SAMPLES = 100_000


@dataclass
class SynthesisTrace:
    exponents: tuple[int, ...]
    pairwise: dict[tuple[int, int], Term] = field(default_factory=dict)
    digraph: OccurrenceDigraph | None = None
    term: Term | None = None
    case: int | None = None
    cuts: dict[int, tuple[int, int]] = field(default_factory=dict)
    ambiguous: list[tuple[int, int]] = field(default_factory=list)
    verified_tuples: int = 0
    seed: int | None = None


def _monoid_profile(S: FiniteSemigroup):
    if S.identity is None:
        raise NotAMonoid(f"{S.name} has no identity")
    return nilpotency_profile(S, exclude_identity=True)


def _pair_tuples(S: FiniteSemigroup, arity: int, i: int, j: int) -> np.ndarray:
    """All tuples that are the identity outside coordinates i and j."""
    grid = np.indices((S.order, S.order)).reshape(2, -1).T
    rows = np.full((len(grid), arity), S.identity, dtype=np.int64)
    rows[:, i - 1] = grid[:, 0]
    rows[:, j - 1] = grid[:, 1]
    return rows


def _matching_words(S, f, i, j, words):
    """Words (over variables i, j) that induce f restricted to coordinates i, j."""
    tuples = _pair_tuples(S, f.arity, i, j)
    target = f.values_at(tuples, tag="restriction")
    return [w for w in words if np.array_equal(values_at(S, w, tuples), target)]


def _exponents(f: FiniteFunction) -> tuple[int, ...]:
    S = f.universe
    return tuple(exponent_of(S, unary_restriction(f, k), k) for k in range(1, f.arity + 1))


def verify_term(f: FiniteFunction, t: Term, samples: int, seed: int):
    """Compare t with f on every tuple of support <= 2 and on random tuples.

    Returns (number of tuples checked, first mismatching tuple or None).
    """
    S = f.universe
    blocks = [support_tuples(S, f.arity, min(2, f.arity))]
    if samples:
        rng = np.random.default_rng(seed)
        blocks.append(rng.integers(0, S.order, size=(samples, f.arity)))
    checked = 0
    for tag, tuples in zip(("verify", "sample"), blocks):
        got = values_at(S, t.word, tuples)
        want = f.values_at(tuples, tag=tag)
        bad = np.flatnonzero(got != want)
        checked += len(tuples)
        if bad.size:
            return checked, tuple(int(v) for v in tuples[bad[0]])
    return checked, None


def synthesize_term_nilpotent_free(f: FiniteFunction, *, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED):
    """Term inducing an IMT function on (FN_d A)^1, with its trace.

    Variables the function ignores (exponent 0) do not occur in the result.
    """
    S = f.universe
    profile = _monoid_profile(S)
    d = profile.d
    if d is None:
        raise BadPromise(f"{S.name} minus its identity is not nilpotent")
    n = f.arity
    exps = _exponents(f)
    trace = _trace(exps, seed)

    edges = set()
    for i, j in combinations(range(1, n + 1), 2):
        ei, ej = exps[i - 1], exps[j - 1]
        if not ei or not ej or ei + ej >= d:
            continue
        words = multiset_permutations({i: ei, j: ej})
        found = _matching_words(S, f, i, j, words)
        if not found:
            raise RestrictionNotInduced(f"no word with {ei} x{i} and {ej} x{j} induces the ({i},{j}) restriction")
        if len(found) > 1:
            trace.ambiguous.append((i, j))
        h = found[0]
        trace.pairwise[(i, j)] = Term(h, n)
        occ = _label_occurrences(h)
        for p, q in combinations(range(len(h)), 2):
            if h[p] != h[q]:
                edges.add((occ[p], occ[q]))

    G = OccurrenceDigraph.for_exponents(exps, edges)
    trace.digraph = G
    try:
        order = linear_extension(G)
    except CycleFound as exc:
        raise BadPromise(f"pairwise words are inconsistent, cycle {exc.cycle}") from exc
    if not order:
        raise BadPromise("function is constant identity; no nonempty word induces it")
    t = Term(tuple(v for v, _ in order), n)
    return _finish(f, t, trace, samples, seed)


def _label_occurrences(word):
    counts: dict[int, int] = {}
    out = []
    for v in word:
        counts[v] = counts.get(v, 0) + 1
        out.append((v, counts[v]))
    return out


def _trace(exps, seed):
    return SynthesisTrace(exponents=exps, seed=seed)


def _finish(f, t, trace, samples, seed):
    trace.term = t
    checked, bad = verify_term(f, t, samples, seed)
    trace.verified_tuples = checked
    if bad is not None:
        raise BadPromise(f"synthesized {t} disagrees with f at {bad}")
    return t, trace


SHAPES = ("A", "B", "C")  # x_i x_m^2, x_m x_i x_m, x_m^2 x_i


def shape_words(i: int, m: int):
    return {"A": (i, m, m), "B": (m, i, m), "C": (m, m, i)}


def identity_case(S: FiniteSemigroup) -> int:
    """Which of xy², yxy, y²x coincide as binary term functions on S.

    1: pairwise distinct; 2: xy² ≈ y²x only; 3: xy² ≈ yxy only;
    4: yxy ≈ y²x only; 5: all three equal.
    """
    a, b, c = Term((1, 2, 2), 2), Term((2, 1, 2), 2), Term((2, 2, 1), 2)
    ab, ac, bc = terms_equivalent(S, a, b), terms_equivalent(S, a, c), terms_equivalent(S, b, c)
    if ab and ac:
        return 5
    if ac:
        return 2
    if ab:
        return 3
    if bc:
        return 4
    return 1


def _cuts(case: int, labels: list[str], r: int, m: int) -> tuple[int, int]:
    """Cut points (alpha, beta): x_m goes after position alpha and after beta.

    ``labels`` lists, along the order of exponent-1 variables, which shapes
    induce their two-variable restriction with x_m (joined, e.g. "AC").
    """
    def conflict():
        return ShapeConflict(f"x{m}: shapes {labels} are not monotone for case {case}")

    if case == 5:
        return r, r
    if case == 1:
        seq = "".join(labels)
        if len(seq) != r or list(seq) != sorted(seq):
            raise conflict()
        alpha = seq.count("A")
        return alpha, alpha + seq.count("B")
    if case == 2:
        inner = [p for p, lab in enumerate(labels) if "B" in lab]
        if not inner:
            return r, r
        lo, hi = inner[0], inner[-1]
        if inner != list(range(lo, hi + 1)):
            raise conflict()
        return lo, hi + 1
    if case == 3:
        tail = [p for p, lab in enumerate(labels) if lab == "C"]
        if tail != list(range(r - len(tail), r)):
            raise conflict()
        return r - len(tail), r - len(tail)
    if case == 4:
        head = [p for p, lab in enumerate(labels) if lab == "A"]
        if head != list(range(len(head))):
            raise conflict()
        return len(head), len(head)
    raise ValueError(f"unknown case {case}")


def synthesize_term_4nilpotent(f: FiniteFunction, *, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED):
    """Term inducing an IMT function on a noncommutative 4-nilpotent monoid.

    Raises UseCommutativePath on commutative monoids, where a different
    argument applies.
    """
    S = f.universe
    profile = _monoid_profile(S)
    if S.is_commutative():
        raise UseCommutativePath(f"{S.name} is commutative")
    d = profile.d
    if d is None or d > 4:
        raise BadPromise(f"{S.name} minus its identity is not 4-nilpotent (d={d})")
    n = f.arity
    exps = _exponents(f)
    trace = _trace(exps, seed)
    singles = [k for k in range(1, n + 1) if exps[k - 1] == 1]
    doubles = [k for k in range(1, n + 1) if exps[k - 1] == 2]
    higher = [k for k in range(1, n + 1) if exps[k - 1] >= 3]

    edges = set()
    for i, j in combinations(singles, 2):
        found = _matching_words(S, f, i, j, [(i, j), (j, i)])
        if not found:
            raise RestrictionNotInduced(f"neither x{i}x{j} nor x{j}x{i} induces the ({i},{j}) restriction")
        if len(found) > 1:
            trace.ambiguous.append((i, j))
        first, second = found[0]
        trace.pairwise[(i, j)] = Term(found[0], n)
        edges.add(((first, 1), (second, 1)))
    G = OccurrenceDigraph(tuple((k, 1) for k in singles), frozenset(edges))
    trace.digraph = G
    try:
        order = [v for v, _ in linear_extension(G)]
    except CycleFound as exc:
        raise BadPromise(f"order of exponent-1 variables has a cycle {exc.cycle}") from exc

    if d <= 3:
        middle = order + [k for k in doubles for _ in range(2)]
    else:
        case = identity_case(S)
        trace.case = case
        r = len(order)
        gaps: list[list[int]] = [[] for _ in range(r + 1)]
        for m in doubles:
            labels = []
            if case != 5:
                for i in order:
                    shapes = shape_words(i, m)
                    found = _matching_words(S, f, min(i, m), max(i, m), list(shapes.values()))
                    lab = "".join(s for s in SHAPES if shapes[s] in found)
                    if not lab:
                        raise RestrictionNotInduced(f"no shape x{i}x{m}², x{m}x{i}x{m}, x{m}²x{i} fits ({i},{m})")
                    trace.pairwise[(min(i, m), max(i, m))] = Term(shapes[lab[0]], n)
                    labels.append(lab)
            alpha, beta = _cuts(case, labels, r, m)
            trace.cuts[m] = (alpha, beta)
            gaps[alpha].append(m)
            gaps[beta].append(m)
        middle = []
        for p in range(r + 1):
            middle.extend(sorted(gaps[p]))
            if p < r:
                middle.append(order[p])
    word = middle + [k for k in higher for _ in range(exps[k - 1])]
    if not word:
        raise BadPromise("function is constant identity; no nonempty word induces it")
    return _finish(f, Term(tuple(word), n), trace, samples, seed)


def synthesize(f: FiniteFunction, **kwargs):
    """Pick the procedure by profile: 4-nilpotent path when d <= 4."""
    profile = _monoid_profile(f.universe)
    if profile.d is not None and profile.d <= 4:
        return synthesize_term_4nilpotent(f, **kwargs)
    return synthesize_term_nilpotent_free(f, **kwargs)
