"""Finite semigroups given by Cayley tables, and the constructions built on them.

Elements are dense indices ``0..order-1``; ``labels[i]`` names element ``i``.
Every constructor in this module returns a fully validated
:class:`FiniteSemigroup` (associativity audited, identity and zero detected).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateLabel,
    NotACongruence,
    NotAnIdeal,
    NotAssociative,
    SizeOverflow,
)

MAX_ORDER = 4096
MAX_CELLS = 2**26


def index_dtype(order: int):
    return np.uint8 if order <= 256 else np.uint16


class FiniteSemigroup:
    """An immutable finite semigroup.

    ``table[x, y]`` is the index of the product ``x*y``.  ``rows`` holds the
    same data as nested tuples for fast scalar lookups.
    """

    __slots__ = ("name", "labels", "table", "rows", "identity", "zero", "_index", "_key")

    def __init__(self, labels, table, name="S", *, check=True, max_order=MAX_ORDER):
        labels = tuple(str(x) for x in labels)
        arr = np.asarray(table, dtype=np.int64)
        n = len(labels)
        if n == 0:
            raise ValueError("a semigroup needs at least one element")
        if n > max_order:
            raise SizeOverflow(f"order {n} exceeds cap {max_order}")
        if arr.shape != (n, n):
            raise ValueError(f"table shape {arr.shape} does not match {n} labels")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("table entries out of range")
        if len(set(labels)) != n:
            seen = set()
            dup = next(x for x in labels if x in seen or seen.add(x))
            raise DuplicateLabel(f"label {dup!r} occurs more than once")
        arr = arr.astype(index_dtype(n))
        arr.setflags(write=False)
        self.name = name
        self.labels = labels
        self.table = arr
        self.rows = tuple(tuple(int(v) for v in row) for row in arr)
        self._index = {lab: i for i, lab in enumerate(labels)}
        if check:
            witness = associativity_witness(arr)
            if witness is not None:
                raise NotAssociative(witness)
        self.identity = _find_identity(arr)
        self.zero = _find_zero(arr)
        self._key = None

    @property
    def order(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"FiniteSemigroup(name={self.name!r}, order={self.order})"

    def key(self) -> bytes:
        """Content fingerprint: equal keys mean identical tables (labels ignored)."""
        if self._key is None:
            self._key = self.order.to_bytes(4, "little") + self.table.astype(np.uint16).tobytes()
        return self._key

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSemigroup)
            and self.labels == other.labels
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash((self.labels, self.key()))

    def index(self, label: str) -> int:
        return self._index[label]

    def mul(self, x: int, y: int) -> int:
        return self.rows[x][y]

    def product(self, elements: Iterable[int]) -> int:
        it = iter(elements)
        acc = next(it)
        rows = self.rows
        for e in it:
            acc = rows[acc][e]
        return acc

    def power(self, x: int, e: int) -> int:
        if e < 1:
            raise ValueError("exponent must be positive")
        return self.product([x] * e)

    @property
    def is_monoid(self) -> bool:
        return self.identity is not None

    def is_commutative(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def non_identity(self) -> list[int]:
        return [x for x in range(self.order) if x != self.identity]


def associativity_witness(table) -> tuple[int, int, int] | None:
    """Lexicographically least triple violating associativity, or None."""
    t = np.asarray(table, dtype=np.int64)
    n = t.shape[0]
    # (xy)z and x(yz) for a whole x-row at a time keeps memory at n^2
    for x in range(n):
        left = t[t[x]]            # left[y, z] = (x y) z
        right = t[x][t]           # right[y, z] = x (y z)
        bad = np.argwhere(left != right)
        if bad.size:
            y, z = bad[0]
            return (x, int(y), int(z))
    return None


def _find_identity(t: np.ndarray):
    ar = np.arange(t.shape[0])
    for e in range(t.shape[0]):
        if np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar):
            return e
    return None


def _find_zero(t: np.ndarray):
    for z in range(t.shape[0]):
        if np.all(t[z] == z) and np.all(t[:, z] == z):
            return z
    return None


def _fresh_label(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    label = base
    while label in taken:
        label += "'"
    return label


def from_table(labels: Sequence[str], table, name: str = "S", **kwargs) -> FiniteSemigroup:
    return FiniteSemigroup(labels, table, name, **kwargs)


def build_free_nilpotent(alphabet: Sequence[str], d: int, *, max_order=MAX_ORDER) -> FiniteSemigroup:
    """The free d-nilpotent semigroup FN_d(A).

    Elements are the words of length < d plus a zero.  The zero comes first,
    then words ordered by length and then lexicographically (letters ordered as
    given in ``alphabet``).
    """
    alphabet = [str(a) for a in alphabet]
    if not alphabet:
        raise ValueError("alphabet must be nonempty")
    if len(set(alphabet)) != len(alphabet):
        raise DuplicateLabel("alphabet letters must be distinct")
    if d < 1:
        raise ValueError("d must be at least 1")
    total = 1 + sum(len(alphabet) ** k for k in range(1, d))
    if total > max_order:
        raise SizeOverflow(f"FN_{d} over {len(alphabet)} letters has {total} elements (cap {max_order})")

    words: list[tuple[int, ...]] = []
    for length in range(1, d):
        words.extend(cartesian(range(len(alphabet)), repeat=length))
    index = {w: i + 1 for i, w in enumerate(words)}
    table = np.zeros((total, total), dtype=np.int64)
    for u in words:
        iu = index[u]
        for v in words:
            if len(u) + len(v) < d:
                table[iu, index[v]] = index[u + v]
    labels = ["0"] + ["".join(alphabet[k] for k in w) for w in words]
    if "0" in labels[1:]:
        raise DuplicateLabel("alphabet must not produce the zero label '0'")
    name = f"FN{d}{{{','.join(alphabet)}}}"
    # concatenation is associative by construction
    return FiniteSemigroup(labels, table, name, check=False, max_order=max_order)


@dataclass(frozen=True)
class NilpotentProfile:
    """``d``: least d with all d-fold products equal; ``c``: least c with x^c = 0
    for every non-identity x.  Either is None when undefined."""

    d: int | None
    c: int | None

    @property
    def nilpotent(self) -> bool:
        return self.d is not None


def nilpotency_profile(S: FiniteSemigroup, exclude_identity: bool = False) -> NilpotentProfile:
    """Nilpotency degree and zero-exponent of S, or of S minus its identity.

    With ``exclude_identity`` the computation runs on S∖{1}, which is how the
    profile of a nilpotent monoid is meant; if S∖{1} is not a subsemigroup the
    degree is reported as None.
    """
    if exclude_identity and S.identity is not None:
        universe = S.non_identity()
    else:
        universe = list(range(S.order))
    if not universe:
        return NilpotentProfile(1, 1)

    t = S.table
    u = np.array(universe)
    d = None
    level = set(universe)
    closed = all(int(v) in level for v in t[np.ix_(u, u)].ravel())
    if closed:
        k = 1
        while k <= len(universe) + 1:
            if len(level) == 1:
                d = k
                break
            level = set(t[np.ix_(np.fromiter(level, dtype=np.int64), u)].ravel().tolist())
            k += 1

    c = None
    z = S.zero
    base = S.non_identity()
    if z is not None:
        powers = list(base)
        for k in range(1, len(base) + 2):
            if all(p == z for p in powers):
                c = k
                break
            powers = [S.rows[p][x] for p, x in zip(powers, base)]
    return NilpotentProfile(d, c)


def adjoin_identity(S: FiniteSemigroup, reuse_identity: bool = False) -> FiniteSemigroup:
    """S¹: a fresh identity appended as the last index."""
    if reuse_identity and S.identity is not None:
        return S
    n = S.order
    table = np.empty((n + 1, n + 1), dtype=np.int64)
    table[:n, :n] = S.table
    table[n, :] = np.arange(n + 1)
    table[:, n] = np.arange(n + 1)
    labels = list(S.labels) + [_fresh_label("1", S.labels)]
    return FiniteSemigroup(labels, table, f"({S.name})^1", check=False)


def adjoin_zero(S: FiniteSemigroup) -> FiniteSemigroup:
    """S ⊔ {0}: a fresh zero placed at index 0; old element i moves to i+1."""
    n = S.order
    table = np.zeros((n + 1, n + 1), dtype=np.int64)
    table[1:, 1:] = S.table.astype(np.int64) + 1
    labels = [_fresh_label("0", S.labels)] + list(S.labels)
    return FiniteSemigroup(labels, table, f"({S.name})+0", check=False)


def s_zero(S: FiniteSemigroup) -> FiniteSemigroup:
    return S if S.zero is not None else adjoin_zero(S)


def direct_product(S: FiniteSemigroup, T: FiniteSemigroup, *, max_order=MAX_ORDER) -> FiniteSemigroup:
    m, n = S.order, T.order
    if m * n > max_order:
        raise SizeOverflow(f"product order {m * n} exceeds cap {max_order}")
    s = S.table.astype(np.int64)
    t = T.table.astype(np.int64)
    # (s1,t1)(s2,t2) at index s*n + t
    table = (s[:, None, :, None] * n + t[None, :, None, :]).reshape(m * n, m * n)
    labels = [f"({a},{b})" for a in S.labels for b in T.labels]
    return FiniteSemigroup(labels, table, f"{S.name}x{T.name}", check=False, max_order=max_order)


@dataclass(frozen=True)
class ZeroUnion:
    """S ∪₀ T together with the embeddings of S⁰ and T⁰ into it."""

    semigroup: FiniteSemigroup
    left: tuple[int, ...]
    right: tuple[int, ...]


def zero_union_parts(S: FiniteSemigroup, T: FiniteSemigroup) -> ZeroUnion:
    S0, T0 = s_zero(S), s_zero(T)
    zs, zt = S0.zero, T0.zero
    left = [0] * S0.order
    right = [0] * T0.order
    labels = ["0"]
    nxt = 1
    for x in range(S0.order):
        if x != zs:
            left[x] = nxt
            labels.append(S0.labels[x])
            nxt += 1
    taken = set(labels)
    for x in range(T0.order):
        if x != zt:
            right[x] = nxt
            lab = _fresh_label(T0.labels[x], taken)
            taken.add(lab)
            labels.append(lab)
            nxt += 1
    if labels.count("0") > 1:
        labels = [labels[0]] + [_fresh_label(l, {"0"}) if l == "0" else l for l in labels[1:]]
    table = np.zeros((nxt, nxt), dtype=np.int64)
    for comp, emb in ((S0, left), (T0, right)):
        e = np.array(emb)
        table[np.ix_(e, e)] = e[comp.table.astype(np.int64)]
    U = FiniteSemigroup(labels, table, f"{S.name}U0{T.name}", check=False)
    return ZeroUnion(U, tuple(left), tuple(right))


def zero_direct_union(S: FiniteSemigroup, T: FiniteSemigroup) -> FiniteSemigroup:
    """S ∪₀ T on S⁰ ∪ T⁰ with a shared zero and all cross products zero.

    Layout: zero at 0, then the nonzero elements of S⁰, then those of T⁰.
    """
    return zero_union_parts(S, T).semigroup


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = set()
        for b in self.blocks:
            if not b:
                raise ValueError("empty block")
            for x in b:
                if x in seen:
                    raise ValueError(f"element {x} occurs in two blocks")
                seen.add(x)
        if seen != set(range(len(seen))):
            raise ValueError("blocks do not cover 0..n-1")

    @classmethod
    def from_classes(cls, order: int, classes: Iterable[Iterable[int]]) -> "Partition":
        """Given classes plus implicit singletons for every unmentioned element."""
        blocks = [tuple(sorted(set(c))) for c in classes]
        covered = {x for b in blocks for x in b}
        blocks += [(x,) for x in range(order) if x not in covered]
        return cls(tuple(sorted(blocks)))

    @classmethod
    def from_class_map(cls, class_of: Sequence[int]) -> "Partition":
        groups: dict[int, list[int]] = {}
        for x, c in enumerate(class_of):
            groups.setdefault(c, []).append(x)
        return cls(tuple(sorted(tuple(g) for g in groups.values())))

    @property
    def order(self) -> int:
        return sum(len(b) for b in self.blocks)

    def class_map(self) -> list[int]:
        """Block number of each element, blocks numbered by least member."""
        out = [0] * self.order
        for k, b in enumerate(sorted(self.blocks)):
            for x in b:
                out[x] = k
        return out


def congruence_witness(S: FiniteSemigroup, P: Partition):
    """First (x, y, x', y') with x~x', y~y' but xy !~ x'y', or None."""
    cls = P.class_map()
    seen: dict[tuple[int, int], tuple[int, int]] = {}
    rows = S.rows
    for x in range(S.order):
        cx = cls[x]
        for y in range(S.order):
            key = (cx, cls[y])
            first = seen.get(key)
            if first is None:
                seen[key] = (x, y)
            elif cls[rows[first[0]][first[1]]] != cls[rows[x][y]]:
                return (first[0], first[1], x, y)
    return None


def quotient_by_partition(S: FiniteSemigroup, P: Partition) -> FiniteSemigroup:
    """S/θ for a congruence θ; blocks ordered and labeled by their least member."""
    if P.order != S.order:
        raise ValueError("partition does not match the semigroup order")
    witness = congruence_witness(S, P)
    if witness is not None:
        raise NotACongruence(witness)
    blocks = sorted(P.blocks)
    cls = P.class_map()
    reps = [b[0] for b in blocks]
    k = len(blocks)
    table = np.empty((k, k), dtype=np.int64)
    for i, x in enumerate(reps):
        for j, y in enumerate(reps):
            table[i, j] = cls[S.rows[x][y]]
    labels = [S.labels[r] for r in reps]
    # a quotient of an associative table by a congruence is associative
    return FiniteSemigroup(labels, table, f"{S.name}/θ", check=False)


def congruence_closure(S: FiniteSemigroup, pairs: Iterable[tuple[int, int]]) -> Partition:
    """Least congruence on S containing the given pairs (union-find)."""
    parent = list(range(S.order))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pending = list(pairs)
    rows = S.rows
    elems = range(S.order)
    while pending:
        x, y = pending.pop()
        rx, ry = find(x), find(y)
        if rx == ry:
            continue
        parent[max(rx, ry)] = min(rx, ry)
        for s in elems:
            pending.append((rows[x][s], rows[y][s]))
            pending.append((rows[s][x], rows[s][y]))
    return Partition.from_class_map([find(x) for x in elems])


def ideal_witness(S: FiniteSemigroup, ideal: Iterable[int]):
    members = set(ideal)
    for x in sorted(members):
        for s in range(S.order):
            if S.rows[x][s] not in members:
                return (x, s, "right")
            if S.rows[s][x] not in members:
                return (x, s, "left")
    return None


def rees_quotient(S: FiniteSemigroup, ideal: Iterable[int]) -> FiniteSemigroup:
    """Collapse the ideal I to a single zero; order becomes |S| - |I| + 1."""
    members = sorted(set(ideal))
    if not members:
        raise NotAnIdeal("ideal must be nonempty")
    witness = ideal_witness(S, members)
    if witness is not None:
        raise NotAnIdeal(witness)
    return quotient_by_partition(S, Partition.from_classes(S.order, [members]))


def subsemigroup_closure(S: FiniteSemigroup, generators: Iterable[int]) -> frozenset[int]:
    found = set(generators)
    if not found:
        raise ValueError("generating set must be nonempty")
    frontier = list(found)
    rows = S.rows
    while frontier:
        new = []
        for x in frontier:
            for y in list(found):
                for p in (rows[x][y], rows[y][x]):
                    if p not in found:
                        found.add(p)
                        new.append(p)
        frontier = new
    return frozenset(found)


def restrict(S: FiniteSemigroup, elements: Sequence[int], name=None) -> FiniteSemigroup:
    """The subsemigroup on ``elements`` (kept in the given order)."""
    pos = {x: i for i, x in enumerate(elements)}
    k = len(elements)
    table = np.empty((k, k), dtype=np.int64)
    for i, x in enumerate(elements):
        for j, y in enumerate(elements):
            p = S.rows[x][y]
            if p not in pos:
                raise ValueError(f"elements not closed: {S.labels[x]}*{S.labels[y]} = {S.labels[p]}")
            table[i, j] = pos[p]
    return FiniteSemigroup([S.labels[x] for x in elements], table, name or f"{S.name}|sub", check=False)


def satisfies_identity(S: FiniteSemigroup, lhs, rhs) -> bool:
    from .terms import terms_equivalent

    return terms_equivalent(S, lhs, rhs)


def identity_witness(S: FiniteSemigroup, lhs, rhs):
    """Least tuple on which the identity lhs ≈ rhs fails, or None."""
    from .terms import inequivalence_witness

    return inequivalence_witness(S, lhs, rhs)


# --- isomorphism -----------------------------------------------------------

def generating_set(S: FiniteSemigroup) -> list[int]:
    """A small irredundant generating set, found greedily then pruned."""
    gens: list[int] = []
    covered: frozenset[int] = frozenset()
    for x in range(S.order):
        if x not in covered:
            gens.append(x)
            covered = subsemigroup_closure(S, gens)
    for g in list(gens):
        rest = [h for h in gens if h != g]
        if rest and len(subsemigroup_closure(S, rest)) == S.order:
            gens = rest
    return gens


def _invariant(S: FiniteSemigroup, x: int):
    powers = [x]
    while True:
        p = S.rows[powers[-1]][x]
        if p in powers:
            tail = powers.index(p)
            break
        powers.append(p)
    left = sum(1 for y in range(S.order) if S.rows[x][y] == x)
    right = sum(1 for y in range(S.order) if S.rows[y][x] == x)
    return (len(powers), tail, x == S.identity, x == S.zero, left, right)


def _extend(S, T, gens, images):
    phi = {g: h for g, h in zip(gens, images)}
    for g, h in zip(gens, images):
        if phi.get(g, h) != h:
            return None
    frontier = list(phi)
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                for p, q in ((S.rows[x][g], T.rows[phi[x]][phi[g]]), (S.rows[g][x], T.rows[phi[g]][phi[x]])):
                    prev = phi.get(p)
                    if prev is None:
                        phi[p] = q
                        new.append(p)
                    elif prev != q:
                        return None
        frontier = new
    return phi


def find_isomorphism(S: FiniteSemigroup, T: FiniteSemigroup) -> list[int] | None:
    """A bijection phi with phi(xy) = phi(x)phi(y), or None.

    Searches over images of a generating set of S, then checks the full table.
    """
    if S.order != T.order:
        return None
    gens = generating_set(S)
    inv_t: dict[tuple, list[int]] = {}
    for y in range(T.order):
        inv_t.setdefault(_invariant(T, y), []).append(y)
    options = [inv_t.get(_invariant(S, g), []) for g in gens]

    def search(k, chosen):
        if k == len(gens):
            phi = _extend(S, T, gens, chosen)
            if phi is None or len(phi) != S.order or len(set(phi.values())) != S.order:
                return None
            mapping = [phi[x] for x in range(S.order)]
            m = np.array(mapping)
            if np.array_equal(m[S.table.astype(np.int64)], T.table[np.ix_(m, m)]):
                return mapping
            return None
        for y in options[k]:
            if y in chosen:
                continue
            found = search(k + 1, chosen + [y])
            if found is not None:
                return found
        return None

    return search(0, [])


def is_isomorphism(S: FiniteSemigroup, T: FiniteSemigroup, mapping: Sequence[int]) -> bool:
    if len(mapping) != S.order or sorted(mapping) != list(range(T.order)):
        return False
    m = np.array(mapping)
    return bool(np.array_equal(m[S.table.astype(np.int64)], T.table[np.ix_(m, m)]))


def is_embedding(S: FiniteSemigroup, T: FiniteSemigroup, mapping: Sequence[int]) -> bool:
    """Injective homomorphism S -> T."""
    if len(set(mapping)) != S.order:
        return False
    m = np.array(mapping)
    return bool(np.array_equal(m[S.table.astype(np.int64)], T.table[np.ix_(m, m)]))


def semilattice() -> FiniteSemigroup:
    """The 2-element semilattice {0, 1} with 0·1 = 1·0 = 0."""
    return FiniteSemigroup(["0", "1"], [[0, 0], [0, 1]], "SL2")


def cyclic_group(n: int) -> FiniteSemigroup:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    labels = ["1"] + [f"g{k}" if k > 1 else "g" for k in range(1, n)]
    return FiniteSemigroup(labels, table, f"Z{n}")


def trivial() -> FiniteSemigroup:
    return FiniteSemigroup(["e"], [[0]], "1")
