"""Return probabilities of random walks.

Row ``i`` of every RPF matrix is ``[P^1(i,i), ..., P^S(i,i)]`` with
``P = D^-1 A``. Three routes compute it:

* :func:`rpf_exact` diagonalises the symmetric ``B = D^-1/2 A D^-1/2``, so
  ``P^s(i,i) = sum_k lambda_k^s u_k(i)^2`` in O(n^3 + S n^2);
* :func:`rpf_bruteforce` takes dense matrix powers of ``P`` (test oracle);
* :func:`rpf_monte_carlo` simulates ``M`` walks per node.

Matrices are plain ``(n, S)`` float arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EigenFailure
from .graph import Graph, degree_vector, dense_adjacency

__all__ = [
    "EigenSystem",
    "RpfConfig",
    "spectrum",
    "rpf_exact",
    "rpf_bruteforce",
    "rpf_monte_carlo",
    "compute_rpf",
    "walk_stream",
]

_CLAMP_SLACK = 1e-10
_RESIDUAL_TOL = 1e-8
# walks are simulated in node blocks of this size, one RNG stream per block
MC_BLOCK = 1024


class EigenSystem(NamedTuple):
    """Eigenpairs of ``B``, ordered by decreasing ``|lambda|``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class RpfConfig:
    steps: int = 50
    method: str = "spectral"
    mc_trials: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.mc_trials < 1:
            raise ValueError("mc_trials must be >= 1")
        if self.method not in ("spectral", "brute-force", "monte-carlo"):
            raise ValueError(f"unknown RPF method {self.method!r}")


def _symmetric_walk_matrix(g: Graph) -> np.ndarray:
    d = 1.0 / np.sqrt(degree_vector(g))
    return d[:, None] * dense_adjacency(g) * d[None, :]


def spectrum(g: Graph) -> EigenSystem:
    b = _symmetric_walk_matrix(g)
    try:
        lam, u = np.linalg.eigh(b)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    order = np.argsort(-np.abs(lam), kind="stable")
    lam, u = lam[order], u[:, order]

    scale = max(np.linalg.norm(b, 2), 1.0)
    resid = np.linalg.norm(b @ u - u * lam, axis=0)
    if resid.max(initial=0.0) > _RESIDUAL_TOL * scale:
        raise EigenFailure(f"eigenpair residual {resid.max():.3e} exceeds tolerance")
    if np.abs(u.T @ u - np.eye(g.n)).max() > _RESIDUAL_TOL:
        raise EigenFailure("eigenvectors are not orthonormal")
    if np.abs(lam).max() > 1.0 + _RESIDUAL_TOL:
        raise EigenFailure("eigenvalue outside [-1, 1]")
    return EigenSystem(np.clip(lam, -1.0, 1.0), u)


def _clamp(r: np.ndarray) -> np.ndarray:
    if r.size and (r.min() < -_CLAMP_SLACK or r.max() > 1.0 + _CLAMP_SLACK):
        raise EigenFailure(
            f"return probability {r.min():.3e}..{r.max():.3e} outside [0, 1]"
        )
    return np.clip(r, 0.0, 1.0)


def rpf_exact(g: Graph, steps: int = 50) -> np.ndarray:
    """Return probabilities for ``s = 1..steps`` via the spectrum of ``B``."""
    lam, u = spectrum(g)
    v = u * u
    powers = lam[:, None] ** np.arange(1, steps + 1)[None, :]
    return _clamp(v @ powers)


def rpf_bruteforce(g: Graph, steps: int = 50) -> np.ndarray:
    deg = degree_vector(g)
    p = dense_adjacency(g) / deg[:, None]
    out = np.empty((g.n, steps))
    ps = p.copy()
    for s in range(steps):
        if s:
            ps = ps @ p
        out[:, s] = np.diagonal(ps)
    return out


def walk_stream(seed: int, graph_index: int, block: int) -> np.random.Generator:
    """Independent RNG stream for one block of start nodes of one graph."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(graph_index), int(block)))
    return np.random.default_rng(ss)


def rpf_monte_carlo(
    g: Graph, steps: int = 50, trials: int = 200, seed: int = 0, graph_index: int = 0
) -> np.ndarray:
    """Estimate return probabilities from ``trials`` simulated walks per node.

    Walkers move to a neighbour with probability proportional to edge weight,
    sampled by inverting per-node cumulative weights. Start nodes are split
    into fixed blocks of ``MC_BLOCK``, each with its own stream from
    :func:`walk_stream`, so the result depends only on ``seed`` and
    ``graph_index``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    deg = degree_vector(g)
    # row r's cumulative weights shifted by r: one global sorted array
    row_of = np.repeat(np.arange(g.n), np.diff(g.indptr))
    run = np.cumsum(g.weights)
    start = np.concatenate([[0.0], run])[g.indptr[:-1]]
    cum = (run - start[row_of]) / deg[row_of] + row_of
    last = g.indptr[1:] - 1
    cum[last] = row_of[last] + 1.0

    out = np.empty((g.n, steps))
    for block, lo in enumerate(range(0, g.n, MC_BLOCK)):
        hi = min(lo + MC_BLOCK, g.n)
        rng = walk_stream(seed, graph_index, block)
        origin = np.repeat(np.arange(lo, hi), trials)
        pos = origin.copy()
        for s in range(steps):
            u = rng.random(pos.size)
            k = np.searchsorted(cum, pos + u, side="right")
            k = np.minimum(k, last[pos])
            pos = g.indices[k]
            hits = (pos == origin).reshape(hi - lo, trials)
            out[lo:hi, s] = hits.sum(axis=1) / trials
    return out


def compute_rpf(g: Graph, config: RpfConfig, graph_index: int = 0) -> np.ndarray:
    if config.method == "spectral":
        return rpf_exact(g, config.steps)
    if config.method == "brute-force":
        return rpf_bruteforce(g, config.steps)
    return rpf_monte_carlo(g, config.steps, config.mc_trials, config.seed, graph_index)
