"""Exact kernel mean embeddings of graphs (RetGK-I).

A graph is the empirical distribution of its node triples
``(rpf_row, label, attrs)``. Inner products of mean embeddings are block
means of node-kernel matrices; the MMD is the distance between embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .errors import DegenerateDistances, DimensionMismatch, MissingAttribute, NegativeRadicand
from .kernels import NodeKernelSpec, pairwise_kernel

__all__ = [
    "GraphSetRep",
    "GraphKernelParams",
    "cross_kernel_matrix",
    "mmd",
    "embedding_inner_products",
    "mmd_from_inner",
    "exp_kernel",
    "poly_kernel",
    "retgk1_gram",
]

_RADICAND_SLACK = 1e-10


@dataclass(frozen=True)
class GraphSetRep:
    """Node-set view of one graph: RPF rows plus optional labels/attributes."""

    rpf: np.ndarray
    labels: Optional[np.ndarray] = None
    attrs: Optional[np.ndarray] = None

    def __post_init__(self):
        rpf = np.atleast_2d(np.asarray(self.rpf, dtype=float))
        object.__setattr__(self, "rpf", rpf)
        n = rpf.shape[0]
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise DimensionMismatch(f"expected {n} labels")
            object.__setattr__(self, "labels", labels)
        if self.attrs is not None:
            attrs = np.asarray(self.attrs, dtype=float)
            if attrs.ndim == 1:
                attrs = attrs[:, None]
            if attrs.shape[0] != n:
                raise DimensionMismatch(f"expected {n} attribute rows")
            object.__setattr__(self, "attrs", attrs)

    @property
    def n(self) -> int:
        return self.rpf.shape[0]


@dataclass(frozen=True)
class GraphKernelParams:
    """Graph-level kernel on embeddings.

    ``form="k1"``: ``(c + <m_G, m_H>)^d``. ``form="k2"``:
    ``exp(-gamma * ||m_G - m_H||^p)``; ``gamma=None`` means the inverse of
    the median pairwise distance raised to ``p``.
    """

    form: str = "k2"
    c: float = 0.0
    d: int = 1
    gamma: Optional[float] = None
    p: float = 1.0

    def __post_init__(self):
        if self.form not in ("k1", "k2"):
            raise ValueError(f"unknown graph kernel form {self.form!r}")
        if self.form == "k1" and (self.c < 0 or self.d < 1 or int(self.d) != self.d):
            raise ValueError("k1 needs c >= 0 and integer d >= 1")
        if self.form == "k2":
            if not 0 < self.p <= 2:
                raise ValueError("k2 needs 0 < p <= 2")
            if self.gamma is not None and not self.gamma > 0:
                raise ValueError("gamma must be positive")


def _check_components(spec: NodeKernelSpec, rep: GraphSetRep):
    if spec.kd is not None and rep.labels is None:
        raise MissingAttribute("node kernel expects discrete labels")
    if spec.kc is not None and rep.attrs is None:
        raise MissingAttribute("node kernel expects continuous attributes")


def _node_kernel_block(spec: NodeKernelSpec, p, q, a=None, b=None, x=None, y=None):
    k = pairwise_kernel(spec.k0, p, q)
    if spec.kd is not None:
        k *= pairwise_kernel(spec.kd, a, b)
    if spec.kc is not None:
        k *= pairwise_kernel(spec.kc, x, y)
    return k


def cross_kernel_matrix(spec: NodeKernelSpec, g: GraphSetRep, h: GraphSetRep) -> np.ndarray:
    _check_components(spec, g)
    _check_components(spec, h)
    return _node_kernel_block(spec, g.rpf, h.rpf, g.labels, h.labels, g.attrs, h.attrs)


def mmd(spec: NodeKernelSpec, g: GraphSetRep, h: GraphSetRep) -> float:
    """Maximum mean discrepancy between the node distributions of two graphs."""
    sq = (
        cross_kernel_matrix(spec, g, g).mean()
        + cross_kernel_matrix(spec, h, h).mean()
        - 2.0 * cross_kernel_matrix(spec, g, h).mean()
    )
    return float(_safe_sqrt(np.array(sq)))


def _safe_sqrt(sq: np.ndarray) -> np.ndarray:
    if sq.size and sq.min() < -_RADICAND_SLACK:
        raise NegativeRadicand(f"squared MMD {sq.min():.3e} is negative")
    return np.sqrt(np.maximum(sq, 0.0))


def embedding_inner_products(
    reps: Sequence[GraphSetRep], spec: NodeKernelSpec, chunk: int = 2048
) -> np.ndarray:
    """Matrix of ``<m_G, m_H>`` over all graph pairs.

    All nodes are stacked and the node kernel is evaluated in row chunks;
    each chunk is reduced to graph-level means through a sparse averaging
    matrix, so memory stays at ``chunk x total_nodes``. The upper triangle
    is mirrored to make the result exactly symmetric.
    """
    for r in reps:
        _check_components(spec, r)
    sizes = np.array([r.n for r in reps])
    owner = np.repeat(np.arange(len(reps)), sizes)
    total = int(sizes.sum())
    avg = sparse.csr_matrix(
        (1.0 / sizes[owner], (np.arange(total), owner)), shape=(total, len(reps))
    )
    p = np.vstack([r.rpf for r in reps])
    a = np.concatenate([r.labels for r in reps]) if spec.kd is not None else None
    x = np.vstack([r.attrs for r in reps]) if spec.kc is not None else None

    inner = np.zeros((len(reps), len(reps)))
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        k = _node_kernel_block(
            spec,
            p[lo:hi],
            p,
            None if a is None else a[lo:hi],
            a,
            None if x is None else x[lo:hi],
            x,
        )
        per_graph = (avg.T @ k.T).T  # (chunk, N)
        inner += avg[lo:hi].T @ per_graph
    return np.triu(inner) + np.triu(inner, 1).T


def mmd_from_inner(inner: np.ndarray) -> np.ndarray:
    diag = np.diagonal(inner)
    sq = diag[:, None] + diag[None, :] - 2.0 * inner
    np.fill_diagonal(sq, 0.0)
    return _safe_sqrt(sq)


def exp_kernel(dist: np.ndarray, p: float = 1.0, gamma: Optional[float] = None):
    """``exp(-gamma * dist^p)`` with the median rule when ``gamma`` is None.

    Returns the Gram matrix and the bandwidth actually used.
    """
    if gamma is None:
        iu = np.triu_indices(len(dist), 1)
        if not len(iu[0]):
            gamma = 1.0
        else:
            med = float(np.median(dist[iu]))
            if med <= 0:
                raise DegenerateDistances("median pairwise embedding distance is zero")
            gamma = 1.0 / med**p
    gram = np.exp(-gamma * dist**p)
    np.fill_diagonal(gram, 1.0)
    return gram, float(gamma)


def poly_kernel(inner: np.ndarray, c: float = 0.0, d: int = 1) -> np.ndarray:
    return (c + inner) ** int(d)


def retgk1_gram(
    reps: Sequence[GraphSetRep], spec: NodeKernelSpec, params: GraphKernelParams
) -> np.ndarray:
    inner = embedding_inner_products(reps, spec)
    if params.form == "k1":
        return poly_kernel(inner, params.c, params.d)
    gram, _ = exp_kernel(mmd_from_inner(inner), params.p, params.gamma)
    return gram
