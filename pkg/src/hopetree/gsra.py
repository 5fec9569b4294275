"""Hope-tree greedy sparse recovery.

Three stages:

1. pre-selection, the intersection of the OMP and SP supports;
2. hope-tree search, which grows the support by the best of up to
   ``max_candidates`` depth-``N`` paths per driver iteration, each path
   choosing among the ``L`` best correlated columns at every layer;
3. rectification, a subspace-pursuit style expand/prune loop whose
   expansion width shrinks geometrically (``T <- floor(alpha * T)``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllPathsDegenerate,
    ConfigError,
    DimensionMismatch,
    DriverStalled,
    HopeTreeError,
    RankDeficient,
)
from .linalg import (
    ProjectionPath,
    _vector,
    as_array,
    least_squares_on_support,
    top_l_indices,
)
from .pursuits import (
    DEFAULT_REL_TOL,
    PursuitConfig,
    RecoveryResult,
    finish,
    grow_path,
    layer_orders,
    omp,
    sp,
)

__all__ = [
    "GsraConfig",
    "depth_bound",
    "preselect",
    "create_hope_tree",
    "rectify_support",
    "subspace_schedule",
    "gsra_recover",
    "layer_orders",
]


def depth_bound(phi, k: int) -> int:
    """Largest search depth ``N`` with ``N < min(k, sqrt(m))``, at least 1.

    ``phi`` may be a matrix or the row count ``m`` itself.
    """
    m = phi if isinstance(phi, (int, np.integer)) else as_array(phi).shape[0]
    return max(1, min(int(k) - 1, math.isqrt(int(m) - 1)))


@dataclass(frozen=True)
class GsraConfig:
    """Parameters of :func:`gsra_recover`.

    ``stop_threshold`` is absolute; ``None`` means ``1e-6 * ||y||``.
    ``max_driver_iterations=None`` means K. ``allow_deep_search`` lifts the
    depth cap from :func:`depth_bound` to K, for noisy measurements.
    """

    sparsity_k: int
    path_l: int = 2
    search_depth: int = 7
    max_candidates: int = 30
    stop_threshold: float | None = None
    alpha: float = 0.5
    max_driver_iterations: int | None = None
    allow_deep_search: bool = False

    def check(self, m: int) -> None:
        k = self.sparsity_k
        if not 1 <= k <= m:
            raise ConfigError(f"sparsity_k={k} must lie in [1, m={m}]")
        if not 1 <= self.path_l <= k:
            raise ConfigError(
                f"path_l={self.path_l} must satisfy 1 <= L <= K={k} "
                "(each node spawns at most K children)")
        cap = k if self.allow_deep_search else depth_bound(m, k)
        if not 1 <= self.search_depth <= cap:
            raise ConfigError(
                f"search_depth={self.search_depth} exceeds the bound {cap} "
                f"({'K' if self.allow_deep_search else 'N < min(K, sqrt(m))'})")
        if self.max_candidates < 1:
            raise ConfigError("max_candidates must be >= 1")
        if self.search_depth * math.log2(self.path_l) < 62 and \
                self.max_candidates > self.path_l ** self.search_depth:
            raise ConfigError(
                f"max_candidates={self.max_candidates} exceeds L^N="
                f"{self.path_l ** self.search_depth}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha={self.alpha} must lie in (0, 1)")
        if self.stop_threshold is not None and self.stop_threshold < 0:
            raise ConfigError("stop_threshold must be non-negative")
        if self.max_driver_iterations is not None and self.max_driver_iterations < 1:
            raise ConfigError("max_driver_iterations must be >= 1")

    def threshold(self, y: np.ndarray) -> float:
        if self.stop_threshold is not None:
            return self.stop_threshold
        return DEFAULT_REL_TOL * float(np.linalg.norm(y))

    @property
    def driver_iterations(self) -> int:
        return self.max_driver_iterations or self.sparsity_k


def preselect(phi, y, cfg: GsraConfig) -> tuple[int, ...]:
    """Columns chosen by both OMP and SP at sparsity K, in OMP order."""
    a = as_array(phi)
    y = _vector(y, a.shape[0], "y")
    pcfg = PursuitConfig(sparsity_k=cfg.sparsity_k, residual_tolerance=cfg.threshold(y))
    j_omp = omp(a, y, pcfg).support
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            j_sp = set(sp(a, y, pcfg).support)
    except HopeTreeError as exc:
        warnings.warn(f"subspace pursuit failed during pre-selection ({exc}); "
                      "starting from an empty support", stacklevel=2)
        j_sp = set()
    return tuple(j for j in j_omp if j in j_sp)


def _search_tree(root: ProjectionPath, cfg: GsraConfig, tol: float):
    """Best extension of ``root``; returns (path, residual norm, candidates tried)."""
    a = root.a
    depth = min(cfg.search_depth, a.shape[0] - len(root), a.shape[1] - len(root))
    if depth < 1:
        raise AllPathsDegenerate("no room left to extend the support")
    l = cfg.path_l
    budget = cfg.max_candidates
    if depth * math.log2(l) < 62:
        budget = min(budget, l ** depth)
    best, rho, examined = None, np.inf, 0
    cand = 0
    while cand < budget and rho > tol:
        cand += 1
        examined += 1
        try:
            path = grow_path(root, layer_orders(cand, l, depth), l, tol)
        except RankDeficient:
            continue
        rn = path.residual_norm
        if rn < rho:
            best, rho = path, rn
    if best is None:
        raise AllPathsDegenerate(f"all {examined} hope-tree candidates were rank deficient")
    return best, rho, examined


def create_hope_tree(phi, y, r, root_support, cfg: GsraConfig):
    """Search one hope-tree grown from ``root_support``.

    Candidates ``1..min(max_candidates, L^N)`` are decoded into per-layer
    child ranks by :func:`layer_orders` and grown in that order; the path
    with the smallest final residual wins and the search stops early once
    that residual reaches the stop threshold.

    Returns
    -------
    supp : tuple of int
        Columns the winning path added beyond ``root_support``.
    rho : float
        Residual norm of the winning path.
    """
    a = as_array(phi)
    y = _vector(y, a.shape[0], "y")
    r = _vector(r, a.shape[0], "r")
    root = ProjectionPath.from_support(a, y, root_support)
    if not np.allclose(root.residual, r, rtol=1e-8, atol=1e-8 * max(1.0, np.linalg.norm(y))):
        raise DimensionMismatch("residual is inconsistent with root_support")
    best, rho, _ = _search_tree(root, cfg, cfg.threshold(y))
    return tuple(best.support[len(root):]), rho


def subspace_schedule(k: int, alpha: float) -> list[int]:
    """Expansion widths used by rectification: K, floor(alpha K), ... while > 0."""
    out = []
    t = int(k)
    while t >= 1:
        out.append(t)
        t = int(math.floor(alpha * t))
    return out


def _full_rank_subset(a, y, indices):
    path = ProjectionPath(a, y)
    for j in indices:
        try:
            path.extend(j)
        except RankDeficient:
            pass
    return path.support


def _rectify(a, y, lam, r, cfg: GsraConfig):
    m, n = a.shape
    k = cfg.sparsity_k
    support = list(lam)
    coeffs = None
    rounds = 0
    for t in subspace_schedule(k, cfg.alpha):
        rounds += 1
        room = min(m, n) - len(support)
        add = top_l_indices(a.T @ r, t, support) if t <= room else []
        merged = support + add
        try:
            wide = least_squares_on_support(a, y, merged)
        except RankDeficient:
            merged = _full_rank_subset(a, y, merged)
            wide = least_squares_on_support(a, y, merged)
        keep = top_l_indices(wide, min(k, len(merged)))
        support = [merged[i] for i in keep]
        coeffs = least_squares_on_support(a, y, support)
        r = y - a[:, support] @ coeffs
    return support, coeffs, rounds


def rectify_support(phi, y, lam, r, cfg: GsraConfig):
    """Repair a candidate support with a shrinking expand/prune loop.

    Each round adds the ``T`` columns best correlated with the current
    residual, fits on the union, keeps the K largest coefficients and
    refits; ``T`` runs through :func:`subspace_schedule`. Returns
    ``(x_hat, S)`` with ``x_hat`` zero off ``S``.
    """
    a = as_array(phi)
    y = _vector(y, a.shape[0], "y")
    r = _vector(r, a.shape[0], "r")
    support, coeffs, _ = _rectify(a, y, list(lam), r, cfg)
    x_hat = np.zeros(a.shape[1])
    x_hat[support] = coeffs
    return x_hat, tuple(support)


def _greedy_fallback(path: ProjectionPath) -> ProjectionPath:
    """Extend by the best-ranked column that keeps full rank."""
    order = top_l_indices(path.scores(), path.a.shape[1] - len(path), path.support)
    for j in order:
        trial = path.copy(extra=1)
        try:
            trial.extend(j)
        except (RankDeficient, HopeTreeError):
            continue
        return trial
    raise DriverStalled("no column can extend the support")


def gsra_recover(phi, y, cfg: GsraConfig) -> RecoveryResult:
    """Recover a K-sparse ``x`` from ``y = phi @ x`` by hope-tree search.

    The support starts as the OMP/SP intersection. While it holds fewer
    than K columns and the residual exceeds the stop threshold, a
    hope-tree is searched from the current support and its best path is
    adopted wholesale, so the next tree is rooted at that path's last
    column. Rectification then prunes and repairs the result to exactly K
    columns.
    """
    a = as_array(phi)
    m, n = a.shape
    y = _vector(y, m, "y")
    cfg.check(m)
    if not np.any(y):
        return RecoveryResult(np.zeros(n), (), 0.0, 0, 0, {"preselected": 0})
    tol = cfg.threshold(y)

    lam = preselect(a, y, cfg)
    path = ProjectionPath.from_support(a, y, lam)
    iterations = 0
    examined = 0
    while len(path) < cfg.sparsity_k and path.residual_norm > tol \
            and iterations < cfg.driver_iterations:
        iterations += 1
        try:
            best, _, tried = _search_tree(path, cfg, tol)
            examined += tried
        except AllPathsDegenerate:
            best = None
        if best is None or len(best) == len(path):
            best = _greedy_fallback(path)
        path = best

    support, coeffs, rounds = _rectify(a, y, list(path.support), path.residual, cfg)
    return finish(a, y, support, iterations, examined, coeffs=coeffs,
                  preselected=len(lam), driver_support=len(path), rectify_rounds=rounds)
