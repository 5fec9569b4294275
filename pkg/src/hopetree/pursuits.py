"""Reference greedy pursuits: OMP, SP, gOMP and MMP (depth- and breadth-first)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import AllPathsDegenerate, ConfigError, RankDeficient
from .linalg import (
    ProjectionPath,
    as_array,
    _vector,
    embed,
    least_squares_on_support,
    top_l_indices,
)

#: early-exit tolerance relative to ||y|| when none is given
DEFAULT_REL_TOL = 1e-6


@dataclass(frozen=True)
class PursuitConfig:
    sparsity_k: int
    gomp_indices_per_iter: int = 3
    mmp_expansion_l: int = 2
    mmp_max_candidates: int = 30
    residual_tolerance: float | None = None  # absolute; None means 1e-6 * ||y||

    def check(self, m: int) -> None:
        if not 1 <= self.sparsity_k <= m:
            raise ConfigError(f"sparsity_k={self.sparsity_k} must lie in [1, m={m}]")
        if self.gomp_indices_per_iter < 1:
            raise ConfigError("gomp_indices_per_iter must be >= 1")
        if self.mmp_expansion_l < 1:
            raise ConfigError("mmp_expansion_l must be >= 1")
        if self.mmp_max_candidates < 1:
            raise ConfigError("mmp_max_candidates must be >= 1")
        if self.residual_tolerance is not None and self.residual_tolerance < 0:
            raise ConfigError("residual_tolerance must be non-negative")

    def tolerance(self, y: np.ndarray) -> float:
        if self.residual_tolerance is not None:
            return self.residual_tolerance
        return DEFAULT_REL_TOL * float(np.linalg.norm(y))


@dataclass
class RecoveryResult:
    """Output of any recovery routine.

    ``x_hat`` is zero off ``support`` and ``residual_norm`` is
    ``||y - phi @ x_hat||``.
    """

    x_hat: np.ndarray
    support: tuple[int, ...]
    residual_norm: float
    iterations: int = 0
    candidates_examined: int = 0
    info: dict = field(default_factory=dict)


def finish(a: np.ndarray, y: np.ndarray, support, iterations: int = 0,
           candidates: int = 0, coeffs=None, **info) -> RecoveryResult:
    support = tuple(int(j) for j in support)
    if coeffs is None:
        coeffs = least_squares_on_support(a, y, support)
    x_hat = embed(coeffs, support, a.shape[1])
    res = float(np.linalg.norm(y - a @ x_hat))
    return RecoveryResult(x_hat, support, res, iterations, candidates, dict(info))


def _setup(phi, y, cfg):
    a = as_array(phi)
    y = _vector(y, a.shape[0], "y")
    cfg.check(a.shape[0])
    return a, y, cfg.tolerance(y)


def omp(phi, y, cfg: PursuitConfig) -> RecoveryResult:
    """Orthogonal matching pursuit: one best-correlated column per iteration."""
    a, y, tol = _setup(phi, y, cfg)
    path = ProjectionPath(a, y, capacity=cfg.sparsity_k)
    iterations = 0
    while len(path) < cfg.sparsity_k and path.residual_norm > tol:
        j = top_l_indices(path.scores(), 1, path.support)[0]
        path.extend(j)
        iterations += 1
    return finish(a, y, path.support, iterations)


def gomp(phi, y, cfg: PursuitConfig) -> RecoveryResult:
    """Generalized OMP: ``gomp_indices_per_iter`` columns per iteration.

    Stops once the residual drops to the tolerance or
    ``min(K * indices_per_iter, m)`` columns are selected.
    """
    a, y, tol = _setup(phi, y, cfg)
    s = cfg.gomp_indices_per_iter
    limit = min(cfg.sparsity_k * s, a.shape[0], a.shape[1])
    path = ProjectionPath(a, y, capacity=limit)
    iterations = 0
    while len(path) < limit and path.residual_norm > tol:
        picks = top_l_indices(path.scores(), min(s, limit - len(path)), path.support)
        for j in picks:
            path.extend(j)
        iterations += 1
    return finish(a, y, path.support, iterations)


def sp(phi, y, cfg: PursuitConfig) -> RecoveryResult:
    """Subspace pursuit (Dai and Milenkovic).

    Expands the current K-support by K fresh top-correlation columns,
    fits on the union, prunes back to the K largest coefficients and
    refits. Stops when the residual stops decreasing, falls below the
    tolerance, or after K iterations.
    """
    a, y, tol = _setup(phi, y, cfg)
    m, n = a.shape
    k = cfg.sparsity_k
    if 2 * k > m:
        warnings.warn(f"subspace pursuit with 2K={2 * k} > m={m}; expansion is truncated",
                      stacklevel=2)
    if np.linalg.norm(y) <= tol:
        return finish(a, y, ())

    support = top_l_indices(a.T @ y, k)
    coeffs = least_squares_on_support(a, y, support)
    r = y - a[:, support] @ coeffs
    rnorm = float(np.linalg.norm(r))
    iterations = 0
    while iterations < k and rnorm > tol:
        iterations += 1
        extra = top_l_indices(a.T @ r, min(k, m - k, n - k), support)
        merged = support + extra
        wide = least_squares_on_support(a, y, merged)
        keep = top_l_indices(wide, k)
        cand = [merged[i] for i in keep]
        cand_coeffs = least_squares_on_support(a, y, cand)
        cand_r = y - a[:, cand] @ cand_coeffs
        cand_norm = float(np.linalg.norm(cand_r))
        if cand_norm >= rnorm:
            break
        support, coeffs, r, rnorm = cand, cand_coeffs, cand_r, cand_norm
    return finish(a, y, support, iterations, coeffs=coeffs)


def layer_orders(candidate: int, l: int, depth: int) -> list[int]:
    """Decode a 1-based candidate number into 1-based child ranks per layer.

    ``candidate - 1`` is written in base ``l`` with the first layer as the
    least significant digit, so candidate 1 is the all-greedy path.
    """
    temp = candidate - 1
    orders = []
    for _ in range(depth):
        orders.append(temp % l + 1)
        temp //= l
    return orders


def grow_path(root: ProjectionPath, orders, l: int, tol: float) -> ProjectionPath:
    """Extend a copy of ``root`` by one column per entry of ``orders``.

    At each layer the ``l`` best unused columns are ranked by
    correlation with the path's residual and the ``orders[k]``-th is
    appended. Growth stops early once the residual reaches ``tol``.
    """
    path = root.copy(extra=len(orders))
    n = path.a.shape[1]
    for c in orders:
        if path.residual_norm <= tol:
            break
        avail = n - len(path)
        width = min(l, avail)
        if width < 1:
            break
        picks = top_l_indices(path.scores(), width, path.support)
        path.extend(picks[min(c, width) - 1])
    return path


def mmp(phi, y, cfg: PursuitConfig,
        strategy: Literal["depth_first", "breadth_first"] = "depth_first") -> RecoveryResult:
    """Multipath matching pursuit.

    Every node of a depth-K tree spawns ``mmp_expansion_l`` children from
    the top correlations of its own residual; the K-support with the
    smallest residual wins. ``depth_first`` enumerates complete paths in
    modulo order up to ``mmp_max_candidates`` paths. ``breadth_first``
    grows all paths a layer at a time, keeping the best
    ``mmp_max_candidates // L`` distinct supports per layer so that no
    more than ``mmp_max_candidates`` leaves are ever compared (L itself is
    capped at the budget).
    """
    a, y, tol = _setup(phi, y, cfg)
    if strategy == "depth_first":
        return _mmp_dfs(a, y, cfg, tol)
    if strategy == "breadth_first":
        return _mmp_bfs(a, y, cfg, tol)
    raise ConfigError(f"unknown MMP strategy {strategy!r}")


def _mmp_dfs(a, y, cfg, tol):
    k, l = cfg.sparsity_k, cfg.mmp_expansion_l
    root = ProjectionPath(a, y, capacity=k)
    total = l ** k if k * np.log2(max(l, 1)) < 62 else None
    budget = cfg.mmp_max_candidates if total is None else min(cfg.mmp_max_candidates, total)
    best, best_norm, examined = None, np.inf, 0
    for cand in range(1, budget + 1):
        examined += 1
        try:
            path = grow_path(root, layer_orders(cand, l, k), l, tol)
        except RankDeficient:
            continue
        rn = path.residual_norm
        if rn < best_norm:
            best, best_norm = path, rn
        if best_norm <= tol:
            break
    if best is None:
        raise AllPathsDegenerate("every MMP path was rank deficient")
    return finish(a, y, best.support, k, examined)


def _mmp_bfs(a, y, cfg, tol):
    k = cfg.sparsity_k
    l = min(cfg.mmp_expansion_l, cfg.mmp_max_candidates)
    width = max(1, cfg.mmp_max_candidates // l)
    n = a.shape[1]
    frontier = [ProjectionPath(a, y, capacity=k)]
    examined = 0
    for depth in range(k):
        children: dict[frozenset, ProjectionPath] = {}
        for path in frontier:
            if path.residual_norm <= tol:
                children.setdefault(frozenset(path.support), path)
                continue
            picks = top_l_indices(path.scores(), min(l, n - len(path)), path.support)
            for j in picks:
                key = frozenset(path.support) | {j}
                if key in children:
                    continue
                child = path.copy(extra=1)
                try:
                    child.extend(j)
                except RankDeficient:
                    continue
                children[key] = child
        if not children:
            raise AllPathsDegenerate("every MMP path was rank deficient")
        ranked = sorted(children.values(),
                        key=lambda p: (p.residual_norm, sorted(p.support)))
        examined = len(ranked)
        if ranked[0].residual_norm <= tol or depth == k - 1:
            frontier = ranked[:1]
            break
        frontier = ranked[:width]
    return finish(a, y, frontier[0].support, k, examined)
