"""Vectorized forcing and truth tables over a whole extension system.

A formula with free symbols ``s_1 < ... < s_m`` (slots first, then bound
variables by depth) gets one boolean array of shape ``(nodes, U, ..., U)``
where ``U`` is the largest universe in the system.  Entry ``[n, i_1, ...]``
is the value at node ``n`` with ``s_j`` read as element ``i_j``.  Positions
past a node's own universe are padding: they are never used as witnesses
and never reached by edge transport from a real element, so their contents
are irrelevant.

The negation clause becomes one gather over all edges followed by a
per-source OR; every other clause is elementwise.
"""

from __future__ import annotations

import itertools
import threading
from functools import lru_cache

import numpy as np

from .logic.syntax import (
    And, Atom, Const, Eq, Not, Or, Slot, Var, var_rank,
)


def _axis_key(sym):
    if type(sym) is Slot:
        return (0, sym.index)
    return (1,) + var_rank(sym.name)


@lru_cache(maxsize=None)
def injective_mask(u: int, j: int, width: int) -> np.ndarray:
    """Boolean array over ``range(width)**j`` marking injective tuples below ``u``."""
    mask = np.zeros((width,) * j, dtype=bool)
    for tup in itertools.permutations(range(u), j):
        mask[tup] = True
    mask.setflags(write=False)
    return mask


class TableEngine:
    """Memoized forcing/truth tables for one immutable system.

    The memo dictionaries are the only mutable state.  Entries are computed
    from immutable inputs, so a racing recomputation stores an identical
    array; the lock only keeps the dictionaries themselves consistent.
    """

    def __init__(self, system):
        self.system = system
        nodes = system.nodes
        self.n = len(nodes)
        self.pos = {s.id: i for i, s in enumerate(nodes)}
        self.sizes = [len(s.universe) for s in nodes]
        self.U = max(self.sizes, default=1)
        U, N = self.U, self.n
        self.valid = np.zeros((N, U), dtype=bool)
        for i, u in enumerate(self.sizes):
            self.valid[i, :u] = True
        sig = system.signature
        self.rel = {}
        for name, arity in sig.relations:
            arr = np.zeros((N,) + (U,) * arity, dtype=bool)
            for i, s in enumerate(nodes):
                for tup in s.relations[name]:
                    arr[(i,) + tuple(s.index[x] for x in tup)] = True
            self.rel[name] = arr
        self.const = {c: np.array([s.index[s.constants[c]] for s in nodes], dtype=np.intp)
                      for c in sig.constants}
        edges = sorted(system.edges, key=lambda e: (self.pos[e.source], e.index, e.target))
        self.edge_order = edges
        self.E = len(edges)
        self.e_src = np.array([self.pos[e.source] for e in edges], dtype=np.intp)
        self.e_tgt = np.array([self.pos[e.target] for e in edges], dtype=np.intp)
        self.e_map = np.zeros((self.E, U), dtype=np.intp)
        for k, e in enumerate(edges):
            tgt = system.node(e.target)
            for a, b in enumerate(e.images):
                self.e_map[k, a] = tgt.index[b]
        counts = np.bincount(self.e_src, minlength=N)
        self.has_edges = counts > 0
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        self.starts = starts[self.has_edges]
        self._axes: dict = {}
        self._force: dict = {}
        self._truth: dict = {}
        self._edge_inj: dict = {}
        self._node_inj: dict = {}
        self.generic_cache: dict = {}
        self._lock = threading.Lock()

    # -- axes ---------------------------------------------------------------

    def axes(self, f) -> tuple:
        got = self._axes.get(f)
        if got is not None:
            return got
        t = type(f)
        if t is Atom or t is Eq:
            args = f.args if t is Atom else (f.left, f.right)
            syms = {a for a in args if type(a) is Var or type(a) is Slot}
        elif t is Not:
            syms = set(self.axes(f.body))
        elif t is And or t is Or:
            syms = set(self.axes(f.left)) | set(self.axes(f.right))
        else:
            syms = set(self.axes(f.body)) - {Var(f.var)}
        got = tuple(sorted(syms, key=_axis_key))
        self._axes[f] = got
        return got

    def _align(self, arr, src, dst):
        shape = (self.n,) + tuple(self.U if a in src else 1 for a in dst)
        return arr.reshape(shape)

    # -- base cases -------------------------------------------------------

    def _index(self, term, axes):
        m = len(axes)
        if type(term) is Const:
            return self.const[term.name].reshape((self.n,) + (1,) * m)
        k = axes.index(term)
        shape = [1] * (m + 1)
        shape[k + 1] = self.U
        return np.arange(self.U).reshape(shape)

    def _base(self, f):
        axes = self.axes(f)
        full = (self.n,) + (self.U,) * len(axes)
        if type(f) is Atom:
            node = np.arange(self.n).reshape((self.n,) + (1,) * len(axes))
            idx = (node,) + tuple(self._index(a, axes) for a in f.args)
            out = self.rel[f.rel][idx]
        else:
            out = self._index(f.left, axes) == self._index(f.right, axes)
        return np.ascontiguousarray(np.broadcast_to(out, full))

    # -- recursion --------------------------------------------------------

    def forcing(self, f) -> np.ndarray:
        got = self._force.get(f)
        if got is None:
            got = self._compute(f, self.forcing, self._forced_negation)
            with self._lock:
                got = self._force.setdefault(f, got)
        return got

    def truth(self, f) -> np.ndarray:
        got = self._truth.get(f)
        if got is None:
            if type(f) is Atom or type(f) is Eq:
                got = self.forcing(f)
            else:
                got = self._compute(f, self.truth, lambda g: ~self.truth(g.body))
            with self._lock:
                got = self._truth.setdefault(f, got)
        return got

    def _compute(self, f, rec, negation):
        t = type(f)
        if t is Atom or t is Eq:
            return self._base(f)
        if t is Not:
            return negation(f)
        axes = self.axes(f)
        if t is And or t is Or:
            a = self._align(rec(f.left), self.axes(f.left), axes)
            b = self._align(rec(f.right), self.axes(f.right), axes)
            return np.logical_and(a, b) if t is And else np.logical_or(a, b)
        body = rec(f.body)
        baxes = self.axes(f.body)
        v = Var(f.var)
        if v not in baxes:
            return body
        k = baxes.index(v)
        shape = [self.n] + [1] * len(baxes)
        shape[k + 1] = self.U
        return np.logical_and(body, self.valid.reshape(shape)).any(axis=k + 1)

    def transported(self, arr: np.ndarray) -> np.ndarray:
        """``out[e, i...] = arr[target(e), map_e(i)...]`` for every edge ``e``."""
        m = arr.ndim - 1
        idx = [self.e_tgt.reshape((self.E,) + (1,) * m)]
        for k in range(m):
            shape = [self.E] + [1] * m
            shape[k + 1] = self.U
            idx.append(self.e_map.reshape(shape))
        return arr[tuple(idx)]

    def edge_injective(self, j: int) -> np.ndarray:
        """Injective-tuple masks stacked per edge, sized by each edge's source."""
        got = self._edge_inj.get(j)
        if got is None:
            got = np.stack([injective_mask(self.sizes[p], j, self.U) for p in self.e_src]) \
                if self.E else np.zeros((0,) + (self.U,) * j, dtype=bool)
            with self._lock:
                self._edge_inj[j] = got
        return got

    def node_injective(self, j: int) -> np.ndarray:
        """Injective-tuple masks stacked per node, in node order."""
        got = self._node_inj.get(j)
        if got is None:
            got = np.stack([injective_mask(u, j, self.U) for u in self.sizes]) \
                if self.n else np.zeros((0,) + (self.U,) * j, dtype=bool)
            with self._lock:
                self._node_inj[j] = got
        return got

    def _forced_negation(self, f):
        body = self.forcing(f.body)
        m = body.ndim - 1
        out = np.ones((self.n,) + (self.U,) * m, dtype=bool)
        if self.E:
            hit = np.logical_or.reduceat(self.transported(body), self.starts, axis=0)
            out[self.has_edges] = ~hit
        return out

    def clear(self) -> None:
        with self._lock:
            self._force.clear()
            self._truth.clear()
            self._axes.clear()
            self._edge_inj.clear()
            self._node_inj.clear()
            self.generic_cache.clear()

    # -- point queries ----------------------------------------------------

    def lookup(self, table: np.ndarray, node_id: str, elems) -> bool:
        node = self.system.node(node_id)
        return bool(table[(self.pos[node_id],) + tuple(node.index[e] for e in elems)])
