"""Scoring of recovery runs: exact recovery, SRER and empirical SMNR."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

EXACT_TOL = 1e-4


def _xhat(result) -> np.ndarray:
    return np.asarray(getattr(result, "x_hat", result), dtype=float)


def exact_recovery(x_true, result, tol: float = EXACT_TOL) -> bool:
    """``||x - x_hat|| <= tol * ||x||``; ``result`` may be a RecoveryResult or a vector."""
    x = np.asarray(getattr(x_true, "x", x_true), dtype=float)
    xh = _xhat(result)
    if x.shape != xh.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {xh.shape}")
    return bool(np.linalg.norm(x - xh) <= tol * np.linalg.norm(x))


def _db(num: float, den: float) -> float:
    if den == 0.0:
        return float("inf")
    return float(10.0 * np.log10(num / den))


def srer(pairs: Iterable, mode: str = "energy") -> float:
    """Signal-to-reconstruction-error ratio in dB over a batch of ``(x, x_hat)``.

    ``mode="energy"`` averages energies before taking the log;
    ``mode="db"`` averages per-pair dB values. A perfect batch gives ``inf``.
    """
    sig, err = [], []
    for x, xh in pairs:
        x = np.asarray(getattr(x, "x", x), dtype=float)
        xh = _xhat(xh)
        sig.append(float(x @ x))
        d = x - xh
        err.append(float(d @ d))
    if not sig:
        raise ValueError("srer needs a non-empty batch")
    if mode == "energy":
        return _db(sum(sig), sum(err))
    if mode == "db":
        return float(np.mean([_db(s, e) for s, e in zip(sig, err)]))
    raise ValueError(f"unknown SRER mode {mode!r}")


def empirical_smnr(pairs: Iterable) -> float:
    """``10 log10(sum ||x||^2 / sum ||w||^2)`` over a batch of ``(x, w)``."""
    sx = sw = 0.0
    count = 0
    for x, w in pairs:
        x = np.asarray(getattr(x, "x", x), dtype=float)
        w = np.asarray(w, dtype=float)
        sx += float(x @ x)
        sw += float(w @ w)
        count += 1
    if not count:
        raise ValueError("empirical_smnr needs a non-empty batch")
    return _db(sx, sw)


@dataclass
class TrialRecord:
    algorithm: str
    protocol: str
    m: int
    n: int
    k: int
    phi: float | None
    trial: int
    seed: int
    exact: bool
    srer_db: float | None
    wall_ms: float
    candidates: int
    failed: bool = False
