"""Seeded generation of benchmark instances.

Every draw comes from numpy's counter-based Philox generator keyed by a
``SeedSequence([seed, stream])``; matrices, signals and noise use separate
streams so one trial seed reproduces all three.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ZeroSignal
from .linalg import SensingMatrix

RNG_NAME = f"numpy-{np.__version__}/Philox4x64-10"

STREAM_MATRIX = 0
STREAM_SIGNAL = 1
STREAM_NOISE = 2

SignalKind = Literal["gaussian_nonzeros", "zero_one"]

#: theoretical per-nonzero power used when calibrating noise
NONZERO_POWER = {"gaussian_nonzeros": 1.0, "zero_one": 1.0}


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def derive_seed(master_seed: int, point: int, trial: int) -> int:
    """Per-trial seed: the master seed XOR (sweep point, trial) packed into 64 bits."""
    return (int(master_seed) ^ ((int(point) << 32) | int(trial))) & 0xFFFFFFFFFFFFFFFF


def gen_sensing_matrix(m: int, n: int, normalize_columns: bool = False, seed: int = 0) -> SensingMatrix:
    """i.i.d. standard normal ``m x n`` matrix, optionally with unit-norm columns."""
    rng = make_rng(seed, STREAM_MATRIX)
    return SensingMatrix(rng.standard_normal((m, n)), normalize_columns=normalize_columns)


@dataclass(frozen=True)
class SignalModel:
    kind: SignalKind
    n: int
    k: int

    def __post_init__(self):
        if self.kind not in NONZERO_POWER:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"need 0 <= k <= n, got k={self.k}, n={self.n}")


@dataclass(frozen=True)
class SparseSignal:
    x: np.ndarray
    support: tuple[int, ...]
    kind: SignalKind = "gaussian_nonzeros"

    @property
    def k(self) -> int:
        return len(self.support)

    @property
    def n(self) -> int:
        return self.x.size


def gen_sparse_signal(model: SignalModel, seed: int = 0) -> SparseSignal:
    """Uniformly random K-subset support with N(0, 1) or unit nonzeros."""
    rng = make_rng(seed, STREAM_SIGNAL)
    support = np.sort(rng.choice(model.n, size=model.k, replace=False))
    x = np.zeros(model.n)
    if model.kind == "gaussian_nonzeros":
        x[support] = rng.standard_normal(model.k)
    else:
        x[support] = 1.0
    return SparseSignal(x, tuple(int(j) for j in support), model.kind)


@dataclass(frozen=True)
class NoiseModel:
    """Measurement noise calibrated so that ``K s2 / (m w2)`` hits ``smnr_db``."""

    smnr_db: float
    k: int
    m: int
    sigma_s_sq: float = 1.0

    @property
    def sigma_w_sq(self) -> float:
        if np.isinf(self.smnr_db) and self.smnr_db > 0:
            return 0.0
        return self.k * self.sigma_s_sq / (self.m * 10.0 ** (self.smnr_db / 10.0))


def gen_noise_for_smnr(x: SparseSignal, m: int, smnr_db: float, seed: int = 0,
                       sigma_s_sq: float | None = None) -> np.ndarray:
    """Gaussian measurement noise of length ``m`` at the requested SMNR.

    ``smnr_db=inf`` gives the noiseless limit (a zero vector).
    """
    if x.k == 0 or not np.any(x.x):
        raise ZeroSignal("cannot calibrate noise against a zero signal")
    power = NONZERO_POWER[x.kind] if sigma_s_sq is None else sigma_s_sq
    var = NoiseModel(smnr_db, x.k, m, power).sigma_w_sq
    if var == 0.0:
        return np.zeros(m)
    rng = make_rng(seed, STREAM_NOISE)
    return rng.normal(0.0, np.sqrt(var), size=m)
