"""Finite state spaces, support digraphs and the order-d lift.

Every graph-like object here exposes the same small surface used by the
numerical modules: ``n_states``, ``n_edges``, ``edge_src`` and ``edge_dst``
(integer arrays listing the edges in canonical order).  For a
:class:`LiftedSpace` the canonical edge order coincides with the
lexicographic order of ``(d+1)``-tuples, so a dependence table over
``X^(d+1)`` flattened in C order is directly a per-edge vector.
"""
from __future__ import annotations

import os
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import InputError, ResourceError

DEFAULT_STATE_CAP = 10**6
STATE_CAP_ENV = "MINMARKOV_STATE_CAP"


def state_cap() -> int:
    """Resource cap on the number of lifted states (env override honoured)."""
    raw = os.environ.get(STATE_CAP_ENV)
    if raw is None or raw == "":
        return DEFAULT_STATE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"{STATE_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise InputError(f"{STATE_CAP_ENV} must be positive, got {cap}")
    return cap


@dataclass(frozen=True)
class StateSpace:
    """Ordered, labelled finite state space; index ``i`` encodes ``labels[i]``."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if len(labels) < 2:
            raise InputError("a state space needs at least 2 states")
        if len(set(labels)) != len(labels):
            raise InputError("state labels must be unique")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def integers(cls, N: int) -> "StateSpace":
        """The integer state space ``{0, 1, ..., N}``."""
        if int(N) < 1:
            raise InputError(f"N must be >= 1, got {N}")
        return cls(tuple(str(i) for i in range(int(N) + 1)))

    @property
    def m(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise InputError(f"unknown state label {label!r}") from None

    def values(self) -> np.ndarray:
        """Numeric value attached to each state: its integer code."""
        return np.arange(self.m, dtype=float)


@dataclass(frozen=True)
class Digraph:
    """Directed support graph on a :class:`StateSpace`.

    Edges are stored sorted lexicographically by ``(src, dst)``.
    """

    base: StateSpace
    edges: tuple = field(default=())

    def __post_init__(self):
        m = self.base.m
        pairs = sorted({(int(x), int(y)) for x, y in self.edges})
        for x, y in pairs:
            if not (0 <= x < m and 0 <= y < m):
                raise InputError(f"edge {(x, y)} out of range for {m} states")
        if not pairs:
            raise InputError("a digraph needs at least one edge")
        object.__setattr__(self, "edges", tuple(pairs))
        arr = np.asarray(pairs, dtype=np.int64)
        object.__setattr__(self, "_src", arr[:, 0].copy())
        object.__setattr__(self, "_dst", arr[:, 1].copy())

    @classmethod
    def complete(cls, base: StateSpace) -> "Digraph":
        m = base.m
        return cls(base, tuple((x, y) for x in range(m) for y in range(m)))

    @property
    def n_states(self) -> int:
        return self.base.m

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_src(self) -> np.ndarray:
        return self._src

    @property
    def edge_dst(self) -> np.ndarray:
        return self._dst


class LiftedSpace:
    """The order-``d`` lift: states are ``d``-tuples of base indices in
    lexicographic order, with an edge ``u -> v`` iff ``u[1:] == v[:-1]``.

    Edges are generated arithmetically: edge ``e`` is the ``(d+1)``-tuple of
    rank ``e``, going from state ``e // m`` to state ``e % m**d``.

    Parameters
    ----------
    base : StateSpace
    order : int
        Tuple length ``d >= 1``.  ``d = 1`` gives the complete digraph.
    cap : int, optional
        Maximum number of lifted states; defaults to :func:`state_cap`.
    """

    def __init__(self, base: StateSpace, order: int, cap: int | None = None):
        order = int(order)
        if order < 1:
            raise InputError(f"order must be >= 1, got {order}")
        cap = state_cap() if cap is None else int(cap)
        m = base.m
        # compare in Python ints, no overflow
        if m**order > cap:
            raise ResourceError(
                f"lifted space has {m}**{order} = {m**order} states, above the cap {cap}"
            )
        self.base = base
        self.order = order
        self.m = m
        self._n = m**order
        e = np.arange(self._n * m, dtype=np.int64)
        self._src = e // m
        self._dst = e % self._n
        if __debug__ and self._n <= 10**5:
            assert is_strongly_connected(self)

    def __repr__(self):
        return f"LiftedSpace(m={self.m}, order={self.order})"

    def __eq__(self, other):
        return (
            isinstance(other, LiftedSpace)
            and self.base == other.base
            and self.order == other.order
        )

    def __hash__(self):
        return hash((self.base, self.order))

    @property
    def n_states(self) -> int:
        return self._n

    @property
    def n_edges(self) -> int:
        return self._n * self.m

    @property
    def edge_src(self) -> np.ndarray:
        return self._src

    @property
    def edge_dst(self) -> np.ndarray:
        return self._dst

    @property
    def shape(self) -> tuple:
        return (self.m,) * self.order

    def encode(self, tup: Sequence[int]) -> int:
        if len(tup) != self.order:
            raise InputError(f"tuple length {len(tup)} != order {self.order}")
        idx = 0
        for t in tup:
            t = int(t)
            if not 0 <= t < self.m:
                raise InputError(f"index {t} out of range 0..{self.m - 1}")
            idx = idx * self.m + t
        return idx

    def decode(self, index: int) -> tuple:
        index = int(index)
        if not 0 <= index < self._n:
            raise InputError(f"lifted index {index} out of range 0..{self._n - 1}")
        out = []
        for _ in range(self.order):
            index, t = divmod(index, self.m)
            out.append(t)
        return tuple(reversed(out))

    def states(self) -> np.ndarray:
        """All lifted states as an ``(m**d, d)`` integer array."""
        return np.stack(np.unravel_index(np.arange(self._n), self.shape), axis=1)

    def successors(self, index: int) -> np.ndarray:
        tail = int(index) % (self._n // self.m)
        return tail * self.m + np.arange(self.m)

    def last_symbol(self) -> np.ndarray:
        """Last coordinate of each lifted state."""
        return np.arange(self._n) % self.m

    def first_symbol(self) -> np.ndarray:
        return np.arange(self._n) // (self._n // self.m)


def lift(base: StateSpace, d: int, cap: int | None = None) -> LiftedSpace:
    """Order-``d`` lift of ``base`` (see :class:`LiftedSpace`)."""
    return LiftedSpace(base, d, cap=cap)


def adjacency(g) -> csr_matrix:
    n = g.n_states
    data = np.ones(g.n_edges, dtype=np.int8)
    return csr_matrix((data, (g.edge_src, g.edge_dst)), shape=(n, n))


@lru_cache(maxsize=128)
def is_strongly_connected(g) -> bool:
    """True iff every ordered pair of vertices is joined by a directed path.

    Graphs are immutable and hashable, so the answer is cached per graph.
    """
    if g.n_states == 1:
        return True
    n_comp, _ = connected_components(adjacency(g), directed=True, connection="strong")
    return n_comp == 1


def require_strongly_connected(g) -> None:
    if not is_strongly_connected(g):
        raise InputError("support digraph is not strongly connected")

