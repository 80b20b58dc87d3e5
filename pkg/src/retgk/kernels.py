"""Base kernels on node attribute domains and bandwidth heuristics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DegenerateDistances, DimensionMismatch, MissingAttribute

__all__ = [
    "KernelSpec",
    "NodeKernelSpec",
    "eval_kernel",
    "pairwise_kernel",
    "node_kernel",
    "median_heuristic",
    "gamma_c_rule",
    "FRANK_GAMMA_C",
]

KINDS = ("gaussian-rbf", "laplacian-rbf", "polynomial", "delta")

# bandwidth recommended for the FRANK continuous attributes
FRANK_GAMMA_C = float(np.sqrt(0.0073))


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    gamma: float = 1.0
    c: float = 0.0
    d: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind.endswith("rbf") and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.kind == "polynomial" and (self.c < 0 or int(self.d) != self.d or self.d < 1):
            raise ValueError("polynomial kernel needs c >= 0 and integer d >= 1")


@dataclass(frozen=True)
class NodeKernelSpec:
    """Tensor-product node kernel: ``k0(p, q) * kd(a, b) * kc(x, y)``.

    ``k0`` acts on return-probability vectors; ``kd`` (always delta) on
    discrete labels and ``kc`` on continuous attributes, each only when set.
    """

    k0: KernelSpec
    kd: Optional[KernelSpec] = None
    kc: Optional[KernelSpec] = None

    def __post_init__(self):
        if self.kd is not None and self.kd.kind != "delta":
            raise ValueError("the discrete-label kernel must be a delta kernel")
        if self.k0.kind == "delta" or (self.kc is not None and self.kc.kind == "delta"):
            raise ValueError("structural and continuous domains need a vector kernel")


def _vec(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def eval_kernel(spec: KernelSpec, x, y) -> float:
    if spec.kind == "delta":
        return 1.0 if x == y else 0.0
    x, y = _vec(x), _vec(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"{x.shape} vs {y.shape}")
    if spec.kind == "polynomial":
        return float((spec.c + x @ y) ** spec.d)
    dist = np.sqrt(np.sum((x - y) ** 2))
    if spec.kind == "laplacian-rbf":
        return float(np.exp(-spec.gamma * dist))
    return float(np.exp(-spec.gamma * dist * dist))


def pairwise_kernel(spec: KernelSpec, xs, ys) -> np.ndarray:
    """Kernel matrix between two point sets (rows), vectorised."""
    if spec.kind == "delta":
        xs, ys = np.asarray(xs), np.asarray(ys)
        return (xs[:, None] == ys[None, :]).astype(float)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if xs.shape[1] != ys.shape[1]:
        raise DimensionMismatch(f"dimension {xs.shape[1]} vs {ys.shape[1]}")
    if spec.kind == "polynomial":
        return (spec.c + xs @ ys.T) ** spec.d
    if spec.kind == "laplacian-rbf":
        return np.exp(-spec.gamma * cdist(xs, ys))
    return np.exp(-spec.gamma * cdist(xs, ys, "sqeuclidean"))


def node_kernel(spec: NodeKernelSpec, u, v) -> float:
    """Kernel between two nodes given as ``(rpf_row, label, attrs)`` triples."""
    p, a, x = u
    q, b, y = v
    val = eval_kernel(spec.k0, p, q)
    if spec.kd is not None:
        if a is None or b is None:
            raise MissingAttribute("node kernel expects discrete labels")
        val *= eval_kernel(spec.kd, a, b)
    if spec.kc is not None:
        if x is None or y is None:
            raise MissingAttribute("node kernel expects continuous attributes")
        val *= eval_kernel(spec.kc, x, y)
    return val


def median_heuristic(
    points, metric: str = "euclidean", sample_cap: int = 100_000, seed: int = 0
) -> float:
    """Inverse median pairwise distance.

    With more than ``sample_cap`` pairs the median is taken over
    ``sample_cap`` pairs drawn uniformly (with replacement) from all
    unordered pairs of distinct points.
    """
    if metric not in ("euclidean", "sqeuclidean", "squared-euclidean"):
        raise ValueError(f"unknown metric {metric!r}")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    if n < 2:
        raise DegenerateDistances("need at least two points")
    squared = metric != "euclidean"
    if n * (n - 1) // 2 <= sample_cap:
        dist = pdist(pts, "sqeuclidean" if squared else "euclidean")
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, sample_cap)
        j = rng.integers(0, n - 1, sample_cap)
        j = j + (j >= i)
        diff = pts[i] - pts[j]
        dist = np.einsum("ij,ij->i", diff, diff)
        if not squared:
            dist = np.sqrt(dist)
    med = float(np.median(dist))
    if med <= 0:
        raise DegenerateDistances("median pairwise distance is zero")
    return 1.0 / med


def gamma_c_rule(attr_dim: int) -> float:
    if attr_dim < 1:
        raise ValueError("attribute dimension must be >= 1")
    return 1.0 / np.sqrt(attr_dim)
