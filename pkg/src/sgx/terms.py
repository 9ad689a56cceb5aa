"""Semigroup terms (nonempty words over x1..xn) and the functions they induce."""
from __future__ import annotations

import os
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ArityMismatch, MemoryBudgetExceeded, SizeOverflow
from .semigroup import MAX_CELLS, FiniteSemigroup, index_dtype

DEFAULT_MEM_BUDGET = 2 * 1024**3


@dataclass(frozen=True)
class Term:
    """A word in the variables x1..x{arity}; variables are 1-based."""

    word: tuple[int, ...]
    arity: int

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(v) for v in self.word))
        if not self.word:
            raise ValueError("terms are nonempty words")
        if min(self.word) < 1 or max(self.word) > self.arity:
            raise ValueError(f"variable index out of range 1..{self.arity}: {self.word}")

    @classmethod
    def of(cls, *word: int, arity: int | None = None) -> "Term":
        return cls(tuple(word), arity if arity is not None else max(word))

    def __len__(self):
        return len(self.word)

    def __str__(self):
        return format_term(self)

    def __mul__(self, other: "Term") -> "Term":
        return Term(self.word + other.word, max(self.arity, other.arity))

    def sort_key(self):
        return (len(self.word), self.word)

    def with_arity(self, arity: int) -> "Term":
        return Term(self.word, arity)


def format_term(t: Term) -> str:
    parts = []
    i = 0
    w = t.word
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        k = j - i
        parts.append(f"x{w[i]}" if k == 1 else f"x{w[i]}^{k}")
        i = j
    return " ".join(parts)


_TOKEN = re.compile(r"x(\d+)(?:\^(\d+))?")


def parse_term(text: str, arity: int | None = None) -> Term:
    """Parse ``"x2 x1 x3^2"``; whitespace is ignored."""
    s = "".join(text.split())
    if not s:
        raise ValueError("empty term")
    word: list[int] = []
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise ValueError(f"cannot parse term {text!r} at position {pos}")
        var = int(m.group(1))
        power = int(m.group(2)) if m.group(2) is not None else 1
        if var < 1:
            raise ValueError("variables are numbered from x1")
        if power < 1:
            raise ValueError("powers must be positive")
        word.extend([var] * power)
        pos = m.end()
    return Term(tuple(word), arity if arity is not None else max(word))


def occurrence_vector(t: Term) -> tuple[int, ...]:
    counts = Counter(t.word)
    return tuple(counts.get(k, 0) for k in range(1, t.arity + 1))


def project_term(t: Term, keep: Iterable[int]) -> Term | None:
    """Delete every variable outside ``keep``; None when nothing is left.

    On a monoid the None result stands for the constant-identity function.
    """
    keep = set(keep)
    word = tuple(v for v in t.word if v in keep)
    return Term(word, t.arity) if word else None


def substitute(t: Term, old: int, new: int) -> Term:
    """Replace every occurrence of x{old} by x{new}."""
    return Term(tuple(new if v == old else v for v in t.word), t.arity)


def eval_term(S: FiniteSemigroup, t: Term, args: Sequence[int]) -> int:
    if len(args) != t.arity:
        raise ArityMismatch(f"term has arity {t.arity}, got {len(args)} arguments")
    rows = S.rows
    acc = args[t.word[0] - 1]
    for v in t.word[1:]:
        acc = rows[acc][args[v - 1]]
    return acc


def check_cells(order: int, arity: int, cap: int = MAX_CELLS) -> int:
    cells = order**arity
    if cells > cap:
        raise SizeOverflow(f"{order}^{arity} = {cells} tuples exceeds cap {cap}")
    return cells


def word_values(S: FiniteSemigroup, word: Sequence[int], arity: int, cap: int = MAX_CELLS) -> np.ndarray:
    """Value table of a word over all of S^arity, lexicographic tuple order."""
    s = S.order
    check_cells(s, arity, cap)
    flat = S.table.ravel().astype(np.int64)

    def coord(v):
        shape = [1] * arity
        shape[v - 1] = s
        return np.arange(s).reshape(shape)

    acc = coord(word[0])
    for v in word[1:]:
        acc = flat[acc * s + coord(v)]
    full = np.broadcast_to(acc, (s,) * arity) if arity else acc
    return np.ascontiguousarray(full, dtype=index_dtype(s)).ravel()


def term_values(S: FiniteSemigroup, t: Term, cap: int = MAX_CELLS) -> np.ndarray:
    return word_values(S, t.word, t.arity, cap)


def values_at(S: FiniteSemigroup, word: Sequence[int], tuples: np.ndarray) -> np.ndarray:
    """Evaluate a word on each row of an (m, n) array of argument tuples."""
    tuples = np.asarray(tuples, dtype=np.int64)
    t = S.table.astype(np.int64)
    acc = tuples[:, word[0] - 1]
    for v in word[1:]:
        acc = t[acc, tuples[:, v - 1]]
    return acc


def inequivalence_witness(S: FiniteSemigroup, s: Term, t: Term) -> tuple[int, ...] | None:
    """Lexicographically least tuple where s and t differ, or None."""
    if s.arity != t.arity:
        raise ArityMismatch(f"arities differ: {s.arity} vs {t.arity}")
    diff = term_values(S, s) != term_values(S, t)
    if not diff.any():
        return None
    idx = int(np.argmax(diff))
    return tuple(int(v) for v in np.unravel_index(idx, (S.order,) * s.arity))


def terms_equivalent(S: FiniteSemigroup, s: Term, t: Term) -> bool:
    return inequivalence_witness(S, s, t) is None


def term_to_function(S: FiniteSemigroup, t: Term, cap: int = MAX_CELLS):
    """Explicit table when |S|^n fits the cap, otherwise an evaluating oracle."""
    from .functions import FiniteFunction

    return FiniteFunction.from_term(S, t, cap=cap)


def memory_budget() -> int:
    env = os.environ.get("SGX_MEM_BUDGET")
    return int(env) if env else DEFAULT_MEM_BUDGET


class WordClosure:
    """All n-ary word functions of S, each keyed by its full value table.

    ``members`` maps table bytes to the length-lex least word inducing it.
    """

    def __init__(self, universe: FiniteSemigroup, arity: int, members: dict[bytes, Term], tables: list[np.ndarray]):
        self.universe = universe
        self.arity = arity
        self.members = members
        self.tables = tables

    def __len__(self):
        return len(self.members)

    def __contains__(self, table) -> bool:
        return _key(table, self.universe.order) in self.members

    def witness(self, table) -> Term | None:
        return self.members.get(_key(table, self.universe.order))

    def terms(self) -> list[Term]:
        return list(self.members.values())


def _key(table, order) -> bytes:
    return np.ascontiguousarray(table, dtype=index_dtype(order)).tobytes()


_closure_cache: dict[tuple[bytes, int], WordClosure] = {}


def word_function_closure(S: FiniteSemigroup, n: int, *, budget: int | None = None, cap: int = MAX_CELLS) -> WordClosure:
    """Closure of the n projections under pointwise product.

    Breadth-first by word length, extending the least representative of every
    function by one variable on the right, so the first word reaching a
    function is its length-lex least witness.
    """
    cache_key = (S.key(), n)
    if cache_key in _closure_cache:
        return _closure_cache[cache_key]
    s = S.order
    cells = check_cells(s, n, cap)
    budget = memory_budget() if budget is None else budget
    itemsize = np.dtype(index_dtype(s)).itemsize
    flat = S.table.ravel().astype(np.int64)
    projections = [word_values(S, (k,), n, cap) for k in range(1, n + 1)]

    members: dict[bytes, Term] = {}
    tables: list[np.ndarray] = []

    def admit(word, tab):
        key = tab.tobytes()
        if key in members:
            return False
        if (len(tables) + 1) * cells * itemsize > budget:
            raise MemoryBudgetExceeded(f"closure exceeds memory budget of {budget} bytes")
        members[key] = Term(word, n)
        tables.append(tab)
        return True

    level = []
    for k, p in enumerate(projections, start=1):
        if admit((k,), p):
            level.append(((k,), p))
    while level:
        nxt = []
        for word, tab in level:
            base = tab.astype(np.int64) * s
            for k, p in enumerate(projections, start=1):
                new = flat[base + p].astype(tab.dtype)
                if admit(word + (k,), new):
                    nxt.append((word + (k,), new))
        level = nxt
    result = WordClosure(S, n, members, tables)
    _closure_cache[cache_key] = result
    return result
