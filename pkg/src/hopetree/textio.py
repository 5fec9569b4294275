"""Plain-text fixture format.

A matrix is a line ``m n`` followed by ``m`` rows of ``n`` values; a vector
is a line ``n`` followed by one value per line.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .linalg import as_array


def _open(f, mode):
    if isinstance(f, (str, Path)):
        return open(f, mode), True
    return f, False


def write_matrix(f, a) -> None:
    a = as_array(a)
    fh, own = _open(f, "w")
    try:
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for row in a:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    finally:
        if own:
            fh.close()


def read_matrix(f) -> np.ndarray:
    fh, own = _open(f, "r")
    try:
        m, n = (int(t) for t in fh.readline().split())
        rows = [np.array(fh.readline().split(), dtype=float) for _ in range(m)]
    finally:
        if own:
            fh.close()
    a = np.array(rows, dtype=float).reshape(m, n)
    return a


def write_vector(f, v) -> None:
    v = np.asarray(v, dtype=float).ravel()
    fh, own = _open(f, "w")
    try:
        fh.write(f"{v.size}\n")
        for x in v:
            fh.write(repr(float(x)) + "\n")
    finally:
        if own:
            fh.close()


def read_vector(f) -> np.ndarray:
    fh, own = _open(f, "r")
    try:
        n = int(fh.readline().strip())
        vals = [float(fh.readline()) for _ in range(n)]
    finally:
        if own:
            fh.close()
    return np.array(vals, dtype=float)


def dump_fixture(directory, phi, x, y) -> dict[str, Path]:
    """Write ``phi.txt``, ``x.txt`` and ``y.txt`` for one instance."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"phi": out / "phi.txt", "x": out / "x.txt", "y": out / "y.txt"}
    write_matrix(paths["phi"], phi)
    write_vector(paths["x"], getattr(x, "x", x))
    write_vector(paths["y"], y)
    return paths
