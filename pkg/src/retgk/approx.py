"""Explicit approximate embeddings of graphs (RetGK-II).

Each node domain gets an explicit feature map: random Fourier features for
vector domains and one-hot vectors for discrete labels. A graph embeds as
the node average of Kronecker products of its per-node feature vectors, so
kernel values reduce to Euclidean inner products and distances between
fixed-length vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DimensionMismatch, EmbeddingTooLarge, MissingAttribute, UnknownSymbol
from .exact import GraphKernelParams, GraphSetRep, exp_kernel, poly_kernel

__all__ = [
    "RffMap",
    "OneHotMap",
    "EmbeddingMaps",
    "rff_sample",
    "rff_apply",
    "one_hot",
    "tensor_embed_graph",
    "embed_all",
    "retgk2_gram",
    "MAX_EMBED_DIM",
]

MAX_EMBED_DIM = 10_000_000


@dataclass(frozen=True, eq=False)
class RffMap:
    """Random Fourier feature map ``x -> sqrt(2/D) cos(W x + b)``."""

    frequencies: np.ndarray  # (D, d)
    offsets: np.ndarray  # (D,)
    gamma: float
    kernel: str = "gaussian-rbf"

    @property
    def dim_in(self) -> int:
        return self.frequencies.shape[1]

    @property
    def dim_out(self) -> int:
        return self.frequencies.shape[0]

    def __call__(self, x):
        return rff_apply(self, x)


def rff_sample(
    dim_in: int, dim_out: int, gamma: float, seed=0, kernel: str = "gaussian-rbf"
) -> RffMap:
    """Draw a feature map whose inner products estimate an RBF kernel.

    For ``gaussian-rbf`` (``exp(-gamma ||x-y||^2)``) frequencies are normal
    with per-coordinate variance ``2 gamma``. For ``laplacian-rbf``
    (``exp(-gamma ||x-y||)``) they follow the multivariate Cauchy law with
    scale ``gamma``.
    """
    if dim_in < 1 or dim_out < 1:
        raise ValueError("dimensions must be >= 1")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim_out, dim_in))
    if kernel == "gaussian-rbf":
        w = np.sqrt(2.0 * gamma) * z
    elif kernel == "laplacian-rbf":
        w = gamma * z / np.abs(rng.standard_normal((dim_out, 1)))
    else:
        raise ValueError(f"no random Fourier features for {kernel!r}")
    b = rng.uniform(0.0, 2.0 * np.pi, dim_out)
    w.setflags(write=False)
    b.setflags(write=False)
    return RffMap(w, b, float(gamma), kernel)


def rff_apply(fmap: RffMap, x) -> np.ndarray:
    """Apply ``fmap`` to one vector or to the rows of a matrix."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    x2 = np.atleast_2d(x.reshape(1, -1) if single else x)
    if x2.shape[1] != fmap.dim_in:
        raise DimensionMismatch(f"expected dimension {fmap.dim_in}, got {x2.shape[1]}")
    out = np.sqrt(2.0 / fmap.dim_out) * np.cos(x2 @ fmap.frequencies.T + fmap.offsets)
    return out[0] if single else out


@dataclass(frozen=True)
class OneHotMap:
    alphabet: tuple

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "_index", {s: k for k, s in enumerate(self.alphabet)})

    @property
    def dim_out(self) -> int:
        return len(self.alphabet)

    def __call__(self, symbols) -> np.ndarray:
        symbols = np.asarray(symbols, dtype=object).ravel()
        out = np.zeros((len(symbols), self.dim_out))
        for row, s in enumerate(symbols.tolist()):
            try:
                out[row, self._index[s]] = 1.0
            except KeyError:
                raise UnknownSymbol(s) from None
        return out


def one_hot(symbol, alphabet) -> np.ndarray:
    return OneHotMap(tuple(alphabet))([symbol])[0]


@dataclass(frozen=True)
class EmbeddingMaps:
    """Feature maps for the structural, label and attribute factors."""

    structural: RffMap
    labels: Optional[OneHotMap] = None
    attrs: Optional[RffMap] = None

    @property
    def dims(self) -> tuple:
        return tuple(m.dim_out for m in (self.structural, self.labels, self.attrs) if m is not None)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))


def _factors(rep: GraphSetRep, maps: EmbeddingMaps):
    out = [rff_apply(maps.structural, rep.rpf)]
    if maps.labels is not None:
        if rep.labels is None:
            raise MissingAttribute("embedding expects discrete labels")
        out.append(maps.labels(rep.labels))
    if maps.attrs is not None:
        if rep.attrs is None:
            raise MissingAttribute("embedding expects continuous attributes")
        out.append(rff_apply(maps.attrs, rep.attrs))
    return out


def tensor_embed_graph(
    rep: GraphSetRep, maps: EmbeddingMaps, max_dim: int = MAX_EMBED_DIM
) -> np.ndarray:
    """Vectorised mean over nodes of the Kronecker product of node features.

    Kronecker order follows the factor order (structural, labels, attrs), so
    entry ``(a, b, c)`` sits at ``(a * D1 + b) * D2 + c``.
    """
    if maps.total_dim > max_dim:
        raise EmbeddingTooLarge(
            f"embedding dimension {maps.total_dim} exceeds {max_dim}; "
            "lower the feature-map dimensions"
        )
    fs = _factors(rep, maps)
    if len(fs) == 1:
        emb = fs[0].sum(axis=0)
    elif len(fs) == 2:
        emb = (fs[0].T @ fs[1]).ravel()
    else:
        emb = np.einsum("ia,ib,ic->abc", *fs, optimize=True).ravel()
    return emb / rep.n


def embed_all(reps: Sequence[GraphSetRep], maps: EmbeddingMaps) -> np.ndarray:
    if not reps:
        return np.zeros((0, maps.total_dim))
    return np.vstack([tensor_embed_graph(r, maps) for r in reps])


def retgk2_gram(embeddings, params: GraphKernelParams) -> np.ndarray:
    x = np.asarray(embeddings, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch("embeddings must share one dimension")
    if params.form == "k1":
        inner = x @ x.T
        return poly_kernel(np.triu(inner) + np.triu(inner, 1).T, params.c, params.d)
    dist = squareform(pdist(x)) if len(x) > 1 else np.zeros((len(x), len(x)))
    gram, _ = exp_kernel(dist, params.p, params.gamma)
    return gram
