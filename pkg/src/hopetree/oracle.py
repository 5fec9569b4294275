"""Exhaustive l0 solver for tiny instances, used as ground truth in tests."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import InstanceTooLarge, RankDeficient
from .linalg import _vector, as_array, least_squares_on_support

MAX_N = 24
MAX_K = 4


def l0_solve(phi, y, k_max: int, tol: float = 1e-8):
    """Sparsest support whose least-squares residual is at most ``tol * ||y||``.

    Supports are enumerated by increasing size and lexicographically within
    a size. If nothing of size ``<= k_max`` qualifies, the minimum-residual
    support of size ``k_max`` is returned instead.

    Returns
    -------
    (support, coeffs) : tuple of int, ndarray
    """
    a = as_array(phi)
    m, n = a.shape
    y = _vector(y, m, "y")
    if n > MAX_N or k_max > MAX_K:
        raise InstanceTooLarge(f"oracle limited to n <= {MAX_N}, k_max <= {MAX_K}")
    k_max = min(k_max, m)
    target = tol * np.linalg.norm(y)
    if np.linalg.norm(y) <= target:
        return (), np.zeros(0)
    best = None
    for size in range(1, k_max + 1):
        for s in combinations(range(n), size):
            try:
                c = least_squares_on_support(a, y, s)
            except RankDeficient:
                continue
            res = np.linalg.norm(y - a[:, s] @ c)
            if res <= target:
                return s, c
            if size == k_max and (best is None or res < best[0]):
                best = (res, s, c)
    if best is None:
        return (), np.zeros(0)
    return best[1], best[2]
