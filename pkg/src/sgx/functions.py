"""Finitary functions on a finite semigroup, table-backed or oracle-backed.

Tuples are indexed lexicographically with the first coordinate most
significant, matching ``numpy.ravel_multi_index`` in C order.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ArityMismatch, FormatError, SizeOverflow
from .semigroup import MAX_CELLS, FiniteSemigroup, index_dtype
from .terms import Term, check_cells, term_values, values_at

SGFN_MAGIC = b"SGFN"
SGFN_VERSION = 1


@dataclass
class QueryLog:
    """Counts oracle queries, split by tag, with the largest support seen."""

    counts: dict = field(default_factory=dict)
    max_support: dict = field(default_factory=dict)

    def record(self, tag: str, supports: np.ndarray):
        self.counts[tag] = self.counts.get(tag, 0) + int(supports.size)
        if supports.size:
            self.max_support[tag] = max(self.max_support.get(tag, 0), int(supports.max()))

    @property
    def total(self) -> int:
        return sum(self.counts.values())


class FiniteFunction:
    def __init__(
        self,
        universe: FiniteSemigroup,
        arity: int,
        table: np.ndarray | None = None,
        oracle: Callable[[tuple[int, ...]], int] | None = None,
        batch: Callable[[np.ndarray], np.ndarray] | None = None,
        name: str = "f",
    ):
        if (table is None) == (oracle is None and batch is None):
            raise ValueError("give exactly one of table or oracle")
        if arity < 1:
            raise ValueError("arity must be positive")
        self.universe = universe
        self.arity = arity
        self.name = name
        self.log: QueryLog | None = None
        if table is not None:
            table = np.ascontiguousarray(table, dtype=index_dtype(universe.order)).ravel()
            if table.size != universe.order**arity:
                raise ValueError(f"table has {table.size} entries, expected {universe.order}^{arity}")
            table.setflags(write=False)
        self.table = table
        self._oracle = oracle
        self._batch = batch

    def __repr__(self):
        kind = "table" if self.is_explicit else "oracle"
        return f"FiniteFunction({self.name}, arity={self.arity}, {kind}, |S|={self.universe.order})"

    @property
    def is_explicit(self) -> bool:
        return self.table is not None

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.universe.order,) * self.arity

    @classmethod
    def from_term(cls, S: FiniteSemigroup, t: Term, cap: int = MAX_CELLS) -> "FiniteFunction":
        if S.order**t.arity <= cap:
            return cls(S, t.arity, table=term_values(S, t, cap), name=str(t))
        from .terms import eval_term

        return cls(
            S,
            t.arity,
            oracle=lambda args: eval_term(S, t, args),
            batch=lambda tuples: values_at(S, t.word, tuples),
            name=str(t),
        )

    @classmethod
    def from_callable(cls, S: FiniteSemigroup, arity: int, fn, batch=None, name="f") -> "FiniteFunction":
        return cls(S, arity, oracle=fn, batch=batch, name=name)

    def with_log(self) -> "FiniteFunction":
        """A view of this function that records every query it answers."""
        g = FiniteFunction.__new__(FiniteFunction)
        g.__dict__.update(self.__dict__)
        g.log = QueryLog()
        return g

    def _record(self, tag, tuples):
        if self.log is not None:
            ident = self.universe.identity
            arr = np.asarray(tuples).reshape(-1, self.arity)
            self.log.record(tag, (arr != ident).sum(axis=1) if ident is not None else np.full(len(arr), self.arity))

    def at(self, args: Sequence[int], tag: str = "query") -> int:
        if len(args) != self.arity:
            raise ArityMismatch(f"{self.name} has arity {self.arity}, got {len(args)} arguments")
        self._record(tag, np.asarray(args))
        if self.table is not None:
            return int(self.table[np.ravel_multi_index(tuple(args), self.shape)])
        if self._oracle is not None:
            return int(self._oracle(tuple(int(a) for a in args)))
        return int(self._batch(np.asarray([args]))[0])

    def __call__(self, *args: int) -> int:
        return self.at(args)

    def values_at(self, tuples: np.ndarray, tag: str = "query") -> np.ndarray:
        tuples = np.asarray(tuples, dtype=np.int64).reshape(-1, self.arity)
        self._record(tag, tuples)
        if self.table is not None:
            idx = np.ravel_multi_index(tuple(tuples.T), self.shape)
            return self.table[idx].astype(np.int64)
        if self._batch is not None:
            return np.asarray(self._batch(tuples), dtype=np.int64)
        return np.array([self._oracle(tuple(int(a) for a in row)) for row in tuples], dtype=np.int64)

    def to_table(self, cap: int = MAX_CELLS) -> np.ndarray:
        if self.table is not None:
            return self.table
        check_cells(self.universe.order, self.arity, cap)
        tuples = all_tuples(self.universe.order, self.arity)
        return self.values_at(tuples, tag="full").astype(index_dtype(self.universe.order))

    def materialize(self, cap: int = MAX_CELLS) -> "FiniteFunction":
        if self.is_explicit:
            return self
        return FiniteFunction(self.universe, self.arity, table=self.to_table(cap), name=self.name)

    def same_as(self, other: "FiniteFunction") -> bool:
        return self.arity == other.arity and np.array_equal(self.to_table(), other.to_table())


def all_tuples(order: int, arity: int) -> np.ndarray:
    """Every tuple of S^arity as rows, in lexicographic order."""
    return np.indices((order,) * arity).reshape(arity, -1).T


def support_tuples(S: FiniteSemigroup, arity: int, max_support: int, positions=None) -> np.ndarray:
    """All tuples with at most ``max_support`` non-identity coordinates.

    With ``positions`` the non-identity coordinates are drawn from that set.
    """
    from itertools import combinations

    one = S.identity
    if one is None:
        raise ValueError("support tuples need a monoid")
    others = np.array(S.non_identity(), dtype=np.int64)
    positions = list(range(arity)) if positions is None else [p - 1 for p in positions]
    blocks = [np.full((1, arity), one, dtype=np.int64)]
    for k in range(1, max_support + 1):
        for pos in combinations(positions, k):
            grid = np.indices((len(others),) * k).reshape(k, -1).T
            rows = np.full((len(grid), arity), one, dtype=np.int64)
            rows[:, list(pos)] = others[grid]
            blocks.append(rows)
    return np.concatenate(blocks)


def write_sgfn(path, f: FiniteFunction) -> None:
    table = f.to_table()
    header = SGFN_MAGIC + struct.pack("<BBHI", SGFN_VERSION, 0, f.arity, f.universe.order)
    Path(path).write_bytes(header + table.astype("<u2").tobytes())


def read_sgfn(path, universe: FiniteSemigroup) -> FiniteFunction:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != SGFN_MAGIC:
        raise FormatError(f"{path}: not an SGFN file")
    version, _pad, arity, order = struct.unpack("<BBHI", data[4:12])
    if version != SGFN_VERSION:
        raise FormatError(f"{path}: unsupported SGFN version {version}")
    if order != universe.order:
        raise FormatError(f"{path}: universe order {order} does not match semigroup order {universe.order}")
    try:
        cells = check_cells(order, arity)
    except SizeOverflow as exc:
        raise FormatError(str(exc)) from exc
    body = data[12:]
    if len(body) != 2 * cells:
        raise FormatError(f"{path}: expected {cells} values, found {len(body) // 2}")
    values = np.frombuffer(body, dtype="<u2")
    if values.size and values.max() >= order:
        raise FormatError(f"{path}: value out of range")
    return FiniteFunction(universe, arity, table=values, name=Path(path).stem)
