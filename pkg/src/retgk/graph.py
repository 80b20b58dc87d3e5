"""Weighted undirected graphs with optional node labels and attributes.

Nodes are 0-based here. Edges are stored once per undirected pair as
``(i, j, w)`` with ``i <= j``; a pair with ``i == j`` is a self-loop. A CSR
adjacency (both directions, self-loops once) is built on construction and
used for degree sums, walks and mat-vecs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidGraph, InvalidPermutation, ZeroDegreeNode

__all__ = [
    "Graph",
    "GraphDataset",
    "degree_vector",
    "volume",
    "apply_self_loops",
    "permute",
    "transition_matvec",
    "dense_adjacency",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable weighted undirected graph.

    Parameters
    ----------
    node_count : int
        Number of nodes ``n``.
    edges : sequence of (i, j, w)
        Undirected edges with 0-based endpoints and positive weights. Each
        unordered pair may appear at most once.
    labels : sequence, optional
        One discrete symbol per node.
    attrs : array-like, optional
        ``n x d`` matrix of continuous node attributes.
    """

    node_count: int
    edges: Sequence = ()
    labels: Optional[tuple] = None
    attrs: Optional[np.ndarray] = None
    _src: np.ndarray = field(init=False, repr=False)
    _dst: np.ndarray = field(init=False, repr=False)
    _w: np.ndarray = field(init=False, repr=False)
    rows: np.ndarray = field(init=False, repr=False)
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.node_count)
        if n < 1:
            raise InvalidGraph("a graph needs at least one node")
        object.__setattr__(self, "node_count", n)

        e = list(self.edges)
        src = np.array([int(t[0]) for t in e], dtype=np.int64)
        dst = np.array([int(t[1]) for t in e], dtype=np.int64)
        w = np.array([float(t[2]) if len(t) > 2 else 1.0 for t in e], dtype=float)
        if len(e):
            if src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n:
                raise InvalidGraph(f"edge endpoint outside [0, {n})")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise InvalidGraph("edge weights must be finite and strictly positive")
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        if len(lo) > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if dup.any():
                k = int(np.argmax(dup))
                raise InvalidGraph(f"duplicate edge ({lo[k]}, {hi[k]})")
        object.__setattr__(self, "_src", lo)
        object.__setattr__(self, "_dst", hi)
        object.__setattr__(self, "_w", w)
        object.__setattr__(self, "edges", tuple(zip(lo.tolist(), hi.tolist(), w.tolist())))

        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != n:
                raise InvalidGraph(f"expected {n} node labels, got {len(labels)}")
            object.__setattr__(self, "labels", labels)
        if self.attrs is not None:
            attrs = np.asarray(self.attrs, dtype=float)
            if attrs.ndim == 1:
                attrs = attrs[:, None]
            if attrs.ndim != 2 or attrs.shape[0] != n:
                raise InvalidGraph(f"attribute matrix must have {n} rows")
            attrs = attrs.copy()
            attrs.setflags(write=False)
            object.__setattr__(self, "attrs", attrs)

        # CSR over both directions; self-loops contribute a single entry.
        # Rows are ordered by weight so that degree sums do not depend on
        # node numbering.
        loop = lo == hi
        rows = np.concatenate([lo, hi[~loop]])
        cols = np.concatenate([hi, lo[~loop]])
        vals = np.concatenate([w, w[~loop]])
        order = np.lexsort((cols, vals, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        for name, arr in (("rows", rows), ("indptr", indptr), ("indices", cols), ("weights", vals)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def edge_count(self) -> int:
        return len(self._w)

    @property
    def has_self_loop(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[self._src[self._src == self._dst]] = True
        return out

    def edge_arrays(self):
        """Return the canonical ``(i, j, w)`` arrays with ``i <= j``."""
        return self._src, self._dst, self._w

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.n != other.n or self.labels != other.labels:
            return False
        if (self.attrs is None) != (other.attrs is None):
            return False
        if self.attrs is not None and not np.array_equal(self.attrs, other.attrs):
            return False
        return (
            np.array_equal(self._src, other._src)
            and np.array_equal(self._dst, other._dst)
            and np.array_equal(self._w, other._w)
        )

    __hash__ = None


@dataclass(frozen=True)
class GraphDataset:
    graphs: tuple
    class_labels: np.ndarray
    label_alphabet: tuple = ()
    name: str = ""

    def __post_init__(self):
        graphs = tuple(self.graphs)
        y = np.asarray(self.class_labels, dtype=np.int64)
        if len(graphs) != len(y):
            raise InvalidGraph(f"{len(graphs)} graphs but {len(y)} class labels")
        alphabet = tuple(self.label_alphabet)
        if alphabet:
            known = set(alphabet)
            for k, g in enumerate(graphs):
                if g.labels is not None and not known.issuperset(g.labels):
                    raise InvalidGraph(f"graph {k} has labels outside the alphabet")
        y.setflags(write=False)
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "class_labels", y)
        object.__setattr__(self, "label_alphabet", alphabet)

    def __len__(self):
        return len(self.graphs)

    @property
    def has_labels(self) -> bool:
        return bool(self.graphs) and all(g.labels is not None for g in self.graphs)

    @property
    def has_attrs(self) -> bool:
        return bool(self.graphs) and all(g.attrs is not None for g in self.graphs)

    def with_graphs(self, graphs) -> "GraphDataset":
        return GraphDataset(tuple(graphs), self.class_labels, self.label_alphabet, self.name)


def degree_vector(g: Graph) -> np.ndarray:
    """Weighted degree of every node; self-loop weight counts once."""
    deg = np.bincount(g.rows, weights=g.weights, minlength=g.n)
    if np.any(deg <= 0):
        raise ZeroDegreeNode(int(np.argmax(deg <= 0)))
    return deg


def volume(g: Graph) -> float:
    return math.fsum(degree_vector(g))


def apply_self_loops(g: Graph, policy: str = "isolated", weight: float = 1.0) -> Graph:
    """Add self-loops of ``weight`` to isolated nodes or to every node.

    ``policy`` is ``"isolated"`` (zero-degree nodes only) or ``"all"`` (every
    node without a self-loop). Nodes that already carry a self-loop are left
    alone, which makes both policies idempotent.
    """
    if policy in ("isolated", "isolated-only"):
        target = g.indptr[1:] == g.indptr[:-1]
    elif policy in ("all", "all-nodes"):
        target = ~g.has_self_loop
    else:
        raise ValueError(f"unknown self-loop policy {policy!r}")
    if weight <= 0:
        raise ValueError("self-loop weight must be positive")
    if not target.any():
        return g
    new = [(int(i), int(i), float(weight)) for i in np.flatnonzero(target)]
    return Graph(g.n, list(g.edges) + new, g.labels, g.attrs)


def permute(g: Graph, tau) -> Graph:
    """Relabel node ``i`` as ``tau[i]``, moving labels and attributes along."""
    tau = np.asarray(tau, dtype=np.int64)
    if tau.shape != (g.n,) or not np.array_equal(np.sort(tau), np.arange(g.n)):
        raise InvalidPermutation(f"not a permutation of 0..{g.n - 1}")
    src, dst, w = g.edge_arrays()
    edges = zip(tau[src].tolist(), tau[dst].tolist(), w.tolist())
    inv = np.argsort(tau)
    labels = None if g.labels is None else tuple(g.labels[k] for k in inv)
    attrs = None if g.attrs is None else g.attrs[inv]
    return Graph(g.n, list(edges), labels, attrs)


def transition_matvec(g: Graph, v) -> np.ndarray:
    """Compute ``D^-1 A v`` in O(|E|) without forming a dense matrix."""
    v = np.asarray(v, dtype=float)
    if v.shape != (g.n,):
        raise ValueError(f"vector must have length {g.n}")
    deg = degree_vector(g)
    sums = np.bincount(g.rows, weights=g.weights * v[g.indices], minlength=g.n)
    return sums / deg


def dense_adjacency(g: Graph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    src, dst, w = g.edge_arrays()
    a[src, dst] = w
    a[dst, src] = w
    return a
