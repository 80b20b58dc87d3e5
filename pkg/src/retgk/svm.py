"""Soft-margin SVM on precomputed kernels, one-vs-one multiclass, and the
repeated stratified cross-validation protocol.

The binary solver is SMO on the dual

    min_a  1/2 a^T Q a - 1^T a,   Q = (y y^T) * K,   0 <= a <= C,   y^T a = 0

with maximal-violating-pair working-set selection and stopping when the
KKT gap ``m(a) - M(a)`` drops below ``tol``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from sklearn.model_selection import StratifiedKFold

from .errors import DimensionMismatch, FoldTooSmall, NotConverged

__all__ = [
    "BinarySvm",
    "SvmModel",
    "CvConfig",
    "CvResult",
    "solve_binary",
    "train_svm_precomputed",
    "predict",
    "decision_values",
    "repair_gram",
    "check_folds",
    "cross_validate",
    "C_GRID",
]

log = logging.getLogger(__name__)

C_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3)
MAX_ITER = 10_000_000
_TAU = 1e-12


@dataclass(frozen=True)
class BinarySvm:
    """One binary problem; ``support`` indexes rows of the training set."""

    positive: int
    negative: int
    support: np.ndarray
    dual_coef: np.ndarray  # alpha_t * y_t for the support vectors
    bias: float
    alpha: np.ndarray = field(repr=False)
    iterations: int = 0


@dataclass(frozen=True)
class SvmModel:
    classes: np.ndarray
    machines: tuple
    n_train: int
    C: float


def solve_binary(k: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
                 max_iter: int = MAX_ITER, debug: bool = False):
    """Solve one binary dual; returns ``(alpha, bias, iterations)``.

    ``y`` holds +1/-1. With ``debug`` set the dual objective is evaluated at
    every step and an ``AssertionError`` is raised if it ever gets worse.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    q = (y[:, None] * y[None, :]) * k
    qd = np.diagonal(q).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    obj = 0.0

    for it in range(max_iter):
        at_upper = alpha >= C
        at_lower = alpha <= 0
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        score = -y * grad
        s_up = np.where(up, score, -np.inf)
        s_low = np.where(low, score, np.inf)
        i = int(np.argmax(s_up))
        j = int(np.argmin(s_low))
        if s_up[i] - s_low[j] < tol:
            break

        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(qd[i] + qd[j] + 2.0 * q[i, j], _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(qd[i] + qd[j] - 2.0 * q[i, j], _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += q[:, i] * (ai - old_i) + q[:, j] * (aj - old_j)

        if debug:
            new_obj = 0.5 * alpha @ (grad - 1.0)
            assert new_obj <= obj + 1e-12 * max(1.0, abs(obj)), "dual objective increased"
            obj = new_obj
    else:
        raise NotConverged(f"SMO did not converge in {max_iter} iterations")

    free = (alpha > 0) & (alpha < C)
    yg = y * grad
    if free.any():
        rho = float(yg[free].mean())
    else:
        ub, lb = np.inf, -np.inf
        for sel, upper in (((alpha >= C) & pos, False), ((alpha <= 0) & ~pos, False),
                           ((alpha >= C) & ~pos, True), ((alpha <= 0) & pos, True)):
            if sel.any():
                if upper:
                    ub = min(ub, yg[sel].min())
                else:
                    lb = max(lb, yg[sel].max())
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else (
            ub if np.isfinite(ub) else lb)
    return alpha, -rho, it


def train_svm_precomputed(gram, labels, C: float = 1.0, tol: float = 1e-3,
                          debug: bool = False) -> SvmModel:
    """Train one-vs-one binary SVMs on a precomputed training Gram matrix."""
    k = np.asarray(gram, dtype=float)
    y = np.asarray(labels)
    if k.shape != (len(y), len(y)):
        raise DimensionMismatch(f"Gram {k.shape} does not match {len(y)} labels")
    classes = np.unique(y)
    if len(classes) == 1:
        warnings.warn("training labels contain a single class; predicting it everywhere")
    machines = []
    for a in range(len(classes)):
        for b in range(a + 1, len(classes)):
            idx = np.flatnonzero((y == classes[a]) | (y == classes[b]))
            yy = np.where(y[idx] == classes[a], 1.0, -1.0)
            alpha, bias, its = solve_binary(k[np.ix_(idx, idx)], yy, C, tol, debug=debug)
            sv = alpha > 0
            machines.append(BinarySvm(a, b, idx[sv], (alpha * yy)[sv], bias, alpha, its))
    return SvmModel(classes, tuple(machines), len(y), float(C))


def decision_values(model: SvmModel, kernel_rows) -> np.ndarray:
    """Decision value of every binary machine, shape ``(n_test, n_machines)``."""
    kr = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
    if kr.shape[1] != model.n_train:
        raise DimensionMismatch(
            f"kernel rows have {kr.shape[1]} columns, model expects {model.n_train}"
        )
    out = np.empty((kr.shape[0], len(model.machines)))
    for m, mach in enumerate(model.machines):
        out[:, m] = kr[:, mach.support] @ mach.dual_coef + mach.bias
    return out


def predict(model: SvmModel, kernel_rows) -> np.ndarray:
    """One-vs-one majority vote; ties go to the lowest class index."""
    kr = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
    if len(model.classes) == 1:
        if kr.shape[1] != model.n_train:
            raise DimensionMismatch("kernel rows do not match the training set")
        return np.full(kr.shape[0], model.classes[0])
    dec = decision_values(model, kr)
    votes = np.zeros((kr.shape[0], len(model.classes)), dtype=np.int64)
    rows = np.arange(kr.shape[0])
    for m, mach in enumerate(model.machines):
        winner = np.where(dec[:, m] > 0, mach.positive, mach.negative)
        np.add.at(votes, (rows, winner), 1)
    return model.classes[np.argmax(votes, axis=1)]


def repair_gram(gram, rel_tol: float = 1e-6):
    """Add a small diagonal ridge when ``gram`` has negative eigenvalues.

    Returns ``(gram, ridge)``. The ridge is ``1e-8 * trace / N`` and is only
    applied when the smallest eigenvalue is negative; eigenvalues below
    ``-rel_tol * max`` are logged as a warning.
    """
    k = np.asarray(gram, dtype=float)
    ev = np.linalg.eigvalsh(k)
    if ev[0] >= 0:
        return k, 0.0
    if ev[0] < -rel_tol * max(ev[-1], 0.0):
        log.warning("Gram matrix is indefinite: min eigenvalue %.3e, max %.3e", ev[0], ev[-1])
    ridge = 1e-8 * np.trace(k) / len(k)
    return k + ridge * np.eye(len(k)), float(ridge)


@dataclass(frozen=True)
class CvConfig:
    folds: int = 10
    repeats: int = 10
    c_grid: Sequence[float] = C_GRID
    seed: int = 0
    inner_folds: int = 3

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not len(self.c_grid):
            raise ValueError("C grid is empty")
        object.__setattr__(self, "c_grid", tuple(sorted(float(c) for c in self.c_grid)))


@dataclass(frozen=True)
class CvResult:
    mean: float
    std: float
    per_repeat: np.ndarray
    chosen: tuple  # (gram key, C) picked in every outer fold, in run order


def _accuracy(k, y, train, test, C):
    model = train_svm_precomputed(k[np.ix_(train, train)], y[train], C)
    return float(np.mean(predict(model, k[np.ix_(test, train)]) == y[test]))


def _select(grams, y, train, config, rng_seed):
    """Pick (gram key, C) on ``train`` by inner stratified CV."""
    _, counts = np.unique(y[train], return_counts=True)
    inner = min(config.inner_folds, int(counts.min())) if len(counts) > 1 else 0
    best, best_score = None, -np.inf
    for key, k in grams.items():
        for C in config.c_grid:
            if inner >= 2:
                skf = StratifiedKFold(inner, shuffle=True, random_state=rng_seed)
                scores = [
                    _accuracy(k, y, train[tr], train[te], C)
                    for tr, te in skf.split(train, y[train])
                ]
                score = float(np.mean(scores))
            else:
                score = _accuracy(k, y, train, train, C)
            if score > best_score:
                best, best_score = (key, C), score
    return best


def check_folds(labels, folds: int) -> None:
    """Raise ``FoldTooSmall`` unless every fold can hold every class."""
    _, counts = np.unique(np.asarray(labels), return_counts=True)
    if len(counts) < 2:
        raise FoldTooSmall("labels contain a single class; nothing to cross-validate")
    if counts.min() < folds:
        raise FoldTooSmall(f"smallest class has {counts.min()} members, fewer than {folds} folds")


def cross_validate(grams, labels, config: Optional[CvConfig] = None) -> CvResult:
    """Repeated stratified k-fold accuracy with nested hyperparameter choice.

    ``grams`` is one Gram matrix or a mapping from a hyperparameter value
    (e.g. ``p``) to a Gram matrix; the inner CV chooses among all of them
    and the C grid. Reported ``std`` is the sample standard deviation of
    the per-repeat accuracies.
    """
    config = config or CvConfig()
    if not isinstance(grams, Mapping):
        grams = {None: grams}
    y = np.asarray(labels)
    n = len(y)
    for k in grams.values():
        if np.shape(k) != (n, n):
            raise DimensionMismatch(f"Gram {np.shape(k)} does not match {n} labels")
    grams = {key: np.asarray(k, dtype=float) for key, k in grams.items()}
    check_folds(y, config.folds)

    seeds = np.random.SeedSequence(config.seed).generate_state(2 * config.repeats)
    accs, chosen = [], []
    for r in range(config.repeats):
        skf = StratifiedKFold(config.folds, shuffle=True, random_state=int(seeds[2 * r]))
        correct = 0
        for train, test in skf.split(np.zeros(n), y):
            key, C = _select(grams, y, train, config, int(seeds[2 * r + 1]))
            chosen.append((key, C))
            correct += _accuracy(grams[key], y, train, test, C) * len(test)
        accs.append(correct / n)
    accs = np.array(accs)
    std = float(accs.std(ddof=1)) if len(accs) > 1 else 0.0
    return CvResult(float(accs.mean()), std, accs, tuple(chosen))
