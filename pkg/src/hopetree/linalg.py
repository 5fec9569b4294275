"""Dense kernels shared by every pursuit.

Least-squares fits go through an orthogonal factorization of the column
submatrix; normal equations are never formed.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotEnoughCandidates, RankDeficient, SupportTooLarge

#: relative singular-value threshold below which a column submatrix is rank deficient
RANK_TOL = 1e-10


class SensingMatrix:
    """Immutable underdetermined measurement matrix.

    Parameters
    ----------
    entries : array_like, shape (m, n)
        Real matrix with ``m < n``.
    normalize_columns : bool
        Scale every column to unit l2 norm.
    """

    __slots__ = ("a", "column_norms")

    def __init__(self, entries, normalize_columns: bool = False):
        a = np.array(entries, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatch(f"sensing matrix must be 2-d, got shape {a.shape}")
        m, n = a.shape
        if m < 1 or m >= n:
            raise DimensionMismatch(f"sensing matrix must satisfy 0 < m < n, got {m}x{n}")
        if not np.all(np.isfinite(a)):
            raise ValueError("sensing matrix has non-finite entries")
        norms = np.linalg.norm(a, axis=0)
        if normalize_columns:
            if np.any(norms == 0):
                raise ValueError("cannot normalize a zero column")
            a /= norms
            norms = np.linalg.norm(a, axis=0)
        a.setflags(write=False)
        norms.setflags(write=False)
        self.a = a
        self.column_norms = norms

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self):
        return self.a.shape

    def __array__(self, dtype=None, copy=None):
        return self.a if dtype is None else self.a.astype(dtype)

    def __repr__(self):
        return f"SensingMatrix({self.m}x{self.n})"


def as_array(phi) -> np.ndarray:
    """Return the dense array behind ``phi`` without copying."""
    if isinstance(phi, SensingMatrix):
        return phi.a
    a = np.asarray(phi, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _vector(v, length: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (length,):
        raise DimensionMismatch(f"{name} must have shape ({length},), got {v.shape}")
    return v


def _indices(s: Iterable[int], n: int) -> np.ndarray:
    idx = np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"support index out of range [0, {n})")
    return idx


def least_squares_on_support(phi, y, s: Sequence[int]) -> np.ndarray:
    """Coefficients ``c`` minimizing ``||y - phi[:, s] c||_2``.

    An empty support gives an empty coefficient vector.

    Raises
    ------
    SupportTooLarge
        If ``len(s) > m``.
    RankDeficient
        If the smallest singular value of ``phi[:, s]`` is below
        ``RANK_TOL`` times the largest.
    """
    a = as_array(phi)
    m, n = a.shape
    y = _vector(y, m, "y")
    idx = _indices(s, n)
    if idx.size == 0:
        return np.zeros(0)
    if idx.size > m:
        raise SupportTooLarge(f"support of size {idx.size} exceeds m={m}")
    if np.unique(idx).size != idx.size:
        raise RankDeficient("support contains duplicate indices")
    q, r = np.linalg.qr(a[:, idx])
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[0] == 0 or sv[-1] <= RANK_TOL * sv[0]:
        raise RankDeficient(f"column submatrix of size {idx.size} is rank deficient")
    return solve_triangular(r, q.T @ y)


def residual(phi, y, s: Sequence[int], coeffs) -> np.ndarray:
    """``y - phi[:, s] @ coeffs``."""
    a = as_array(phi)
    m, n = a.shape
    y = _vector(y, m, "y")
    idx = _indices(s, n)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (idx.size,):
        raise DimensionMismatch(f"{coeffs.size} coefficients for a support of size {idx.size}")
    if idx.size == 0:
        return y.copy()
    return y - a[:, idx] @ coeffs


def correlation_scores(phi, r) -> np.ndarray:
    """Inner product of every column with ``r``, i.e. ``phi.T @ r``."""
    a = as_array(phi)
    r = _vector(r, a.shape[0], "r")
    return a.T @ r


def top_l_indices(scores, l: int, exclude: Iterable[int] = ()) -> list[int]:
    """Indices of the ``l`` largest ``|scores|`` outside ``exclude``.

    Ordered by decreasing magnitude; equal magnitudes go to the smaller index.
    """
    mag = np.abs(np.asarray(scores, dtype=float))
    n = mag.size
    excl = _indices(sorted(set(exclude)), n)
    if l < 0 or l > n - excl.size:
        raise NotEnoughCandidates(f"asked for {l} indices, only {n - excl.size} available")
    if l == 0:
        return []
    key = -mag
    key[excl] = np.inf
    order = np.argsort(key, kind="stable")
    return [int(i) for i in order[:l]]


def embed(coeffs, s: Sequence[int], n: int) -> np.ndarray:
    """Scatter support coefficients into a length-``n`` vector."""
    x = np.zeros(n)
    if len(s):
        x[np.asarray(s, dtype=np.intp)] = coeffs
    return x


class ProjectionPath:
    """Growing column set with an orthonormal basis and the running residual.

    Appending a column costs ``O(m * |support|)`` via Gram-Schmidt with one
    reorthogonalization pass, which keeps tree searches cheap. The residual
    always equals ``y`` minus its projection onto the selected columns.
    """

    __slots__ = ("a", "y", "support", "_q", "residual")

    def __init__(self, a: np.ndarray, y: np.ndarray, capacity: int | None = None):
        self.a = a
        self.y = y
        m = a.shape[0]
        cap = m if capacity is None else min(capacity, m)
        self.support: list[int] = []
        self._q = np.empty((m, cap))
        self.residual = y.copy()

    @classmethod
    def from_support(cls, phi, y, support: Sequence[int], capacity: int | None = None):
        a = as_array(phi)
        path = cls(a, _vector(y, a.shape[0], "y"), capacity)
        for j in support:
            path.extend(int(j))
        return path

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual))

    def __len__(self):
        return len(self.support)

    def __contains__(self, j):
        return j in self.support

    def copy(self, extra: int = 0) -> "ProjectionPath":
        k = len(self.support)
        new = ProjectionPath.__new__(ProjectionPath)
        new.a = self.a
        new.y = self.y
        new.support = list(self.support)
        cap = min(max(self._q.shape[1], k + extra), self.a.shape[0])
        new._q = np.empty((self.a.shape[0], cap))
        new._q[:, :k] = self._q[:, :k]
        new.residual = self.residual.copy()
        return new

    def extend(self, j: int) -> None:
        """Append column ``j``; raises RankDeficient if it is (numerically) dependent."""
        k = len(self.support)
        m = self.a.shape[0]
        if k >= m:
            raise SupportTooLarge(f"support already holds m={m} columns")
        if k == self._q.shape[1]:
            grown = np.empty((m, min(m, 2 * k + 1)))
            grown[:, :k] = self._q[:, :k]
            self._q = grown
        col = self.a[:, j]
        cnorm = np.linalg.norm(col)
        v = col.copy()
        if k:
            q = self._q[:, :k]
            v -= q @ (q.T @ v)
            v -= q @ (q.T @ v)
        vnorm = np.linalg.norm(v)
        if cnorm == 0 or vnorm <= RANK_TOL * cnorm:
            raise RankDeficient(f"column {j} is dependent on the current support")
        v /= vnorm
        self._q[:, k] = v
        self.support.append(j)
        self.residual -= v * (v @ self.residual)

    def scores(self) -> np.ndarray:
        return self.a.T @ self.residual

    def solve(self) -> np.ndarray:
        """Least-squares coefficients on the current support."""
        return least_squares_on_support(self.a, self.y, self.support)
