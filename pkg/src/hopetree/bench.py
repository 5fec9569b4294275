"""Monte-Carlo benchmark harness.

Three protocols are supported:

``gaussian_sweep`` / ``zero_one_sweep``
    Noiseless recovery over a range of sparsity levels; reports the
    exact-recovery frequency and solve time per (algorithm, K).
``noisy_srer``
    Fixed K, unit-norm-column matrices and measurement noise at a given
    SMNR over a list of sampling rates; reports SRER per (algorithm, rate).

Configurations are INI files. Example::

    [experiment]
    protocol = gaussian_sweep
    k = 20-50:5
    trials = 100
    seed = 7

    [algorithms]
    roster = omp, gomp, mmp_dfs, mmp_bfs, gsra

    [gsra]
    search_depth = 7
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, HopeTreeError
from .gsra import GsraConfig, depth_bound, gsra_recover
from .instances import (
    NONZERO_POWER,
    RNG_NAME,
    SignalModel,
    derive_seed,
    gen_noise_for_smnr,
    gen_sensing_matrix,
    gen_sparse_signal,
)
from .metrics import EXACT_TOL, TrialRecord, exact_recovery, srer
from .pursuits import PursuitConfig, gomp, mmp, omp, sp

log = logging.getLogger(__name__)

PROTOCOLS = ("gaussian_sweep", "zero_one_sweep", "noisy_srer")
ALGORITHMS = ("omp", "sp", "gomp", "mmp_dfs", "mmp_bfs", "gsra")

CSV_HEADER = ("algorithm", "protocol", "m", "n", "k", "phi", "trial", "seed",
              "exact", "srer_db", "wall_ms", "candidates")

FULL_SCALE_TRIALS = 1000
FULL_SCALE_MATRICES = 100

_PROTOCOL_DEFAULTS = {
    "gaussian_sweep": dict(m=128, n=256, k=list(range(1, 61)), trials=100),
    "zero_one_sweep": dict(m=128, n=256, k=list(range(1, 51)), trials=100),
    "noisy_srer": dict(m=None, n=500, k=[20], trials=200),
}

_SECTIONS = {
    "experiment": {
        "protocol": str, "m": int, "n": int, "k": "ints", "trials": int, "seed": int,
        "output_dir": str, "sampling_rates": "floats", "smnr_db": float,
        "realizations_per_matrix": int, "srer_mean_mode": str,
    },
    "algorithms": {"roster": "names"},
    "gsra": {
        "path_l": int, "search_depth": int, "max_candidates": int, "alpha": float,
        "stop_threshold": float, "max_driver_iterations": int, "allow_deep_search": bool,
    },
    "gomp": {"indices_per_iter": int},
    "mmp": {"expansion_l": int, "max_candidates": int},
    "oracle": {"m": int, "n": int, "k": int, "trials": int, "seed": int, "min_agreement": float},
}


@dataclass(frozen=True)
class OracleSpec:
    m: int = 10
    n: int = 16
    k: int = 2
    trials: int = 200
    seed: int = 2016
    min_agreement: float = 0.95


@dataclass
class ExperimentSpec:
    protocol: str = "gaussian_sweep"
    m: int | None = 128
    n: int = 256
    k_range: list[int] = field(default_factory=lambda: list(range(1, 61)))
    trials: int = 100
    master_seed: int = 2016
    output_dir: str | None = None
    algorithms: list[str] = field(default_factory=lambda: ["omp", "gomp", "mmp_dfs", "mmp_bfs", "gsra"])
    sampling_rates: list[float] = field(default_factory=lambda: [0.15, 0.16, 0.17, 0.18, 0.19, 0.20])
    smnr_db: float = 20.0
    realizations_per_matrix: int = 10
    srer_mean_mode: str = "energy"
    gsra: GsraConfig = field(default_factory=lambda: GsraConfig(sparsity_k=1, path_l=2, search_depth=7))
    gomp_indices_per_iter: int = 3
    mmp_expansion_l: int = 2
    mmp_max_candidates: int = 30
    oracle: OracleSpec = field(default_factory=OracleSpec)

    @property
    def noisy(self) -> bool:
        return self.protocol == "noisy_srer"

    @property
    def signal_kind(self) -> str:
        return "zero_one" if self.protocol == "zero_one_sweep" else "gaussian_nonzeros"

    def points(self) -> list[tuple[int, int, float | None]]:
        """Sweep points as (m, k, sampling rate)."""
        if self.noisy:
            k = self.k_range[0]
            return [(measurements_for_rate(r, self.n), k, r) for r in self.sampling_rates]
        return [(self.m, k, None) for k in self.k_range]

    def with_overrides(self, trials=None, seed=None, out=None, full_scale=False,
                       srer_mean_mode=None) -> "ExperimentSpec":
        spec = replace(self)
        if full_scale:
            spec.trials = FULL_SCALE_TRIALS if not spec.noisy else \
                FULL_SCALE_MATRICES * spec.realizations_per_matrix
        if trials is not None:
            spec.trials = trials
        if seed is not None:
            spec.master_seed = seed
        if out is not None:
            spec.output_dir = str(out)
        if srer_mean_mode is not None:
            spec.srer_mean_mode = srer_mean_mode
        spec.check()
        return spec

    def check(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"experiment.protocol: unknown protocol {self.protocol!r}")
        if self.trials < 0:
            raise ConfigError("experiment.trials: must be >= 0")
        if not self.k_range:
            raise ConfigError("experiment.k: empty sparsity range")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ConfigError(f"algorithms.roster: unknown algorithm {name!r}")
        if self.srer_mean_mode not in ("energy", "db"):
            raise ConfigError(f"experiment.srer_mean_mode: {self.srer_mean_mode!r} is not energy|db")
        if self.noisy:
            if len(self.k_range) != 1:
                raise ConfigError("experiment.k: noisy_srer takes a single sparsity level")
            if not self.sampling_rates or not all(0 < r < 1 for r in self.sampling_rates):
                raise ConfigError("experiment.sampling_rates: need rates in (0, 1)")
            if self.realizations_per_matrix < 1:
                raise ConfigError("experiment.realizations_per_matrix: must be >= 1")
        elif self.m is None or not 0 < self.m < self.n:
            raise ConfigError(f"experiment.m: need 0 < m < n, got m={self.m}, n={self.n}")
        for m, k, _ in self.points():
            if not 1 <= k <= m:
                raise ConfigError(f"experiment.k: sparsity {k} outside [1, m={m}]")
        g = self.gsra
        if g.path_l < 1 or g.path_l > max(self.k_range):
            raise ConfigError(
                f"gsra.path_l: L={g.path_l} must satisfy L <= K (largest K here is "
                f"{max(self.k_range)}); each node keeps at most K best-correlated children")
        if g.search_depth < 1 or g.max_candidates < 1:
            raise ConfigError("gsra.search_depth / gsra.max_candidates: must be >= 1")
        if not 0 < g.alpha < 1:
            raise ConfigError(f"gsra.alpha: {g.alpha} must lie in (0, 1)")
        if self.gomp_indices_per_iter < 1:
            raise ConfigError("gomp.indices_per_iter: must be >= 1")
        if self.mmp_expansion_l < 1 or self.mmp_max_candidates < 1:
            raise ConfigError("mmp.expansion_l / mmp.max_candidates: must be >= 1")


def measurements_for_rate(rate: float, n: int) -> int:
    return int(round(rate * n))


def _parse_ints(text: str) -> list[int]:
    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            span, _, step = part.partition(":")
            lo, hi = span.split("-")
            out.extend(range(int(lo), int(hi) + 1, int(step or 1)))
        else:
            out.append(int(part))
    return out


def _convert(section: str, key: str, raw: str, kind, parser: configparser.ConfigParser):
    try:
        if kind == "ints":
            return _parse_ints(raw)
        if kind == "floats":
            return [float(t) for t in raw.replace(" ", "").split(",") if t]
        if kind == "names":
            return [t.strip().lower() for t in raw.split(",") if t.strip()]
        if kind is bool:
            return parser.getboolean(section, key)
        return kind(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} ({exc})") from None


def validate_spec(text: str) -> ExperimentSpec:
    """Parse an INI experiment description, fill defaults and validate it."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        allowed = _SECTIONS[section]
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in allowed:
                raise ConfigError(f"{section}: unknown key {key!r}")
            values[section][key] = _convert(section, key, raw, allowed[key], parser)

    ex = values.get("experiment", {})
    protocol = ex.get("protocol", "gaussian_sweep")
    if protocol not in PROTOCOLS:
        raise ConfigError(f"experiment.protocol: unknown protocol {protocol!r}")
    defaults = _PROTOCOL_DEFAULTS[protocol]
    noisy = protocol == "noisy_srer"

    g = values.get("gsra", {})
    gsra_cfg = GsraConfig(
        sparsity_k=1,
        path_l=g.get("path_l", 2),
        search_depth=g.get("search_depth", 16 if noisy else 7),
        max_candidates=g.get("max_candidates", 30),
        stop_threshold=g.get("stop_threshold"),
        alpha=g.get("alpha", 0.5),
        max_driver_iterations=g.get("max_driver_iterations"),
        allow_deep_search=g.get("allow_deep_search", noisy),
    )
    o = values.get("oracle", {})
    spec = ExperimentSpec(
        protocol=protocol,
        m=ex.get("m", defaults["m"]),
        n=ex.get("n", defaults["n"]),
        k_range=ex.get("k", defaults["k"]),
        trials=ex.get("trials", defaults["trials"]),
        master_seed=ex.get("seed", 2016),
        output_dir=ex.get("output_dir"),
        algorithms=values.get("algorithms", {}).get("roster", list(ExperimentSpec().algorithms)),
        sampling_rates=ex.get("sampling_rates", [0.15, 0.16, 0.17, 0.18, 0.19, 0.20]),
        smnr_db=ex.get("smnr_db", 20.0),
        realizations_per_matrix=ex.get("realizations_per_matrix", 10),
        srer_mean_mode=ex.get("srer_mean_mode", "energy"),
        gsra=gsra_cfg,
        gomp_indices_per_iter=values.get("gomp", {}).get("indices_per_iter", 3),
        mmp_expansion_l=values.get("mmp", {}).get("expansion_l", 2),
        mmp_max_candidates=values.get("mmp", {}).get("max_candidates", 30),
        oracle=OracleSpec(**o),
    )
    spec.check()
    return spec


def gsra_config_for(spec: ExperimentSpec, m: int, k: int) -> GsraConfig:
    """The roster's GSRA settings clamped to what is valid at (m, K).

    L is capped at K, the depth at the admissible bound, and the candidate
    budget at L^N; at the sweep points of interest nothing is clamped.
    """
    g = spec.gsra
    l = min(g.path_l, k)
    cap = k if g.allow_deep_search else depth_bound(m, k)
    depth = max(1, min(g.search_depth, cap))
    budget = min(g.max_candidates, l ** depth) if depth * math.log2(max(l, 1)) < 62 else g.max_candidates
    return replace(g, sparsity_k=k, path_l=l, search_depth=depth, max_candidates=budget)


def make_solver(name: str, spec: ExperimentSpec, m: int, k: int) -> Callable:
    pcfg = PursuitConfig(sparsity_k=k, gomp_indices_per_iter=spec.gomp_indices_per_iter,
                         mmp_expansion_l=spec.mmp_expansion_l,
                         mmp_max_candidates=spec.mmp_max_candidates)
    if name == "omp":
        return lambda a, y: omp(a, y, pcfg)
    if name == "sp":
        return lambda a, y: sp(a, y, pcfg)
    if name == "gomp":
        return lambda a, y: gomp(a, y, pcfg)
    if name == "mmp_dfs":
        return lambda a, y: mmp(a, y, pcfg, "depth_first")
    if name == "mmp_bfs":
        return lambda a, y: mmp(a, y, pcfg, "breadth_first")
    if name == "gsra":
        gcfg = gsra_config_for(spec, m, k)
        return lambda a, y: gsra_recover(a, y, gcfg)
    raise ConfigError(f"unknown algorithm {name!r}")


def _instances(spec: ExperimentSpec, point: int, m: int, k: int):
    """Yield (trial, seed, matrix, signal, y) for one sweep point."""
    model = SignalModel(spec.signal_kind, spec.n, k)
    if not spec.noisy:
        for t in range(spec.trials):
            seed = derive_seed(spec.master_seed, point, t)
            a = gen_sensing_matrix(m, spec.n, False, seed)
            x = gen_sparse_signal(model, seed)
            yield t, seed, a, x, a.a @ x.x
        return
    per = spec.realizations_per_matrix
    a = None
    for t in range(spec.trials):
        if t % per == 0:
            a = gen_sensing_matrix(m, spec.n, True, derive_seed(spec.master_seed, point, t // per))
        seed = derive_seed(spec.master_seed, point, t)
        x = gen_sparse_signal(model, seed)
        w = gen_noise_for_smnr(x, m, spec.smnr_db, seed, NONZERO_POWER[model.kind])
        yield t, seed, a, x, a.a @ x.x + w


@dataclass
class ExperimentOutcome:
    spec: ExperimentSpec
    records: list[TrialRecord]
    aggregate: list[dict]


def run_experiment(spec: ExperimentSpec, progress: Callable[[str], None] | None = None) -> ExperimentOutcome:
    """Run every (sweep point, trial, algorithm) and aggregate the results.

    Instances are shared across the roster so all algorithms see the same
    problems. Records come back ordered by (algorithm, sweep point, trial).
    """
    spec.check()
    records: list[TrialRecord] = []
    pairs: dict[tuple[str, int], list] = {}
    for point, (m, k, rate) in enumerate(spec.points()):
        solvers = {name: make_solver(name, spec, m, k) for name in spec.algorithms}
        for t, seed, a, x, y in _instances(spec, point, m, k):
            for name, solve in solvers.items():
                failed = False
                start = time.perf_counter_ns()
                try:
                    result = solve(a, y)
                    x_hat, cands = result.x_hat, result.candidates_examined
                except HopeTreeError as exc:
                    log.warning("%s failed on point %d trial %d: %s", name, point, t, exc)
                    x_hat, cands, failed = np.zeros(spec.n), 0, True
                wall_ms = (time.perf_counter_ns() - start) / 1e6
                err = float(np.sum((x.x - x_hat) ** 2))
                trial_srer = None
                if spec.noisy:
                    trial_srer = math.inf if err == 0 else 10 * math.log10(float(x.x @ x.x) / err)
                    pairs.setdefault((name, point), []).append((x.x, x_hat))
                records.append(TrialRecord(
                    algorithm=name, protocol=spec.protocol, m=m, n=spec.n, k=k,
                    phi=None if rate is None else m / spec.n, trial=t, seed=seed,
                    exact=(not failed) and exact_recovery(x.x, x_hat), srer_db=trial_srer,
                    wall_ms=wall_ms, candidates=int(cands), failed=failed))
        if progress:
            progress(f"point {point + 1}/{len(spec.points())} (m={m}, k={k}) done")
    # generation order is (point, trial, algorithm); a stable sort on the
    # algorithm alone gives (algorithm, point, trial)
    order = {name: i for i, name in enumerate(spec.algorithms)}
    records.sort(key=lambda r: order[r.algorithm])
    return ExperimentOutcome(spec, records, aggregate(spec, records, pairs))


def aggregate(spec: ExperimentSpec, records: list[TrialRecord], pairs=None) -> list[dict]:
    """Per (algorithm, sweep point) summary rows."""
    groups: dict[tuple[str, int], list[TrialRecord]] = {}
    points = spec.points()
    index = {(m, k): i for i, (m, k, _) in enumerate(points)}
    for r in records:
        groups.setdefault((r.algorithm, index[(r.m, r.k)]), []).append(r)
    rows = []
    for name in spec.algorithms:
        for i, (m, k, rate) in enumerate(points):
            recs = groups.get((name, i), [])
            if not recs:
                continue
            times = np.array([r.wall_ms for r in recs])
            row = {
                "algorithm": name, "protocol": spec.protocol, "m": m, "n": spec.n, "k": k,
                "phi": None if rate is None else m / spec.n,
                "trials": len(recs),
                "frequency": sum(r.exact for r in recs) / len(recs),
                "mean_ms": float(times.mean()), "median_ms": float(np.median(times)),
                "failures": sum(r.failed for r in recs),
                "srer_db": None,
            }
            if spec.noisy:
                if pairs and (name, i) in pairs:
                    row["srer_db"] = srer(pairs[(name, i)], spec.srer_mean_mode)
                else:
                    vals = [r.srer_db for r in recs]
                    row["srer_db"] = float(np.mean(vals))
            rows.append(row)
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def trial_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.algorithm, r.protocol, r.m, r.n, r.k, _fmt(r.phi), r.trial, r.seed,
                    _fmt(r.exact), _fmt(r.srer_db), f"{r.wall_ms:.3f}", r.candidates])
    return buf.getvalue()


AGGREGATE_HEADER = ("algorithm", "protocol", "m", "n", "k", "phi", "trials", "frequency",
                    "srer_db", "mean_ms", "median_ms", "failures")


def aggregate_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_HEADER)
    for row in rows:
        w.writerow([_fmt(row[c]) if c not in ("mean_ms", "median_ms") else f"{row[c]:.3f}"
                    for c in AGGREGATE_HEADER])
    return buf.getvalue()


def emit_plot_data(rows: list[dict], out_dir, algorithms=None, metrics=None) -> list[Path]:
    """Write one two-column ``x y`` series file per (metric, algorithm).

    ``x`` is K for sweeps and the sampling rate for the noisy protocol.
    Values are written with ``repr`` so they read back exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if algorithms is None:
        algorithms = list(dict.fromkeys(r["algorithm"] for r in rows))
    if metrics is None:
        noisy = any(r.get("srer_db") is not None for r in rows)
        metrics = ["srer_db", "mean_ms"] if noisy else ["frequency", "mean_ms"]
    paths = []
    for metric in metrics:
        for name in algorithms:
            path = out / f"{metric}__{name}.dat"
            lines = ["x y"]
            for r in rows:
                if r["algorithm"] != name:
                    continue
                x = r["phi"] if r.get("phi") is not None else r["k"]
                lines.append(f"{x!r} {float(r[metric])!r}")
            path.write_text("\n".join(lines) + "\n")
            paths.append(path)
    return paths


def read_plot_data(path) -> list[tuple[float, float]]:
    lines = Path(path).read_text().splitlines()[1:]
    return [tuple(float(t) for t in ln.split()) for ln in lines if ln.strip()]


def metadata(spec: ExperimentSpec) -> dict:
    meta = {
        "protocol": spec.protocol,
        "master_seed": spec.master_seed,
        "rng": RNG_NAME,
        "trials": spec.trials,
        "roster": spec.algorithms,
        "gsra": asdict(spec.gsra) | {"sparsity_k": "per sweep point"},
        "gomp_indices_per_iter": spec.gomp_indices_per_iter,
        "mmp": {"expansion_l": spec.mmp_expansion_l, "max_candidates": spec.mmp_max_candidates,
                "note": "MMP budget chosen to match GSRA's candidate budget; not stated for the baselines"},
        "exact_tolerance": EXACT_TOL,
        "srer_mean_mode": spec.srer_mean_mode,
        "versions": {"hopetree": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
    }
    if spec.noisy:
        meta["smnr_db"] = spec.smnr_db
        meta["realizations_per_matrix"] = spec.realizations_per_matrix
        meta["sampling_rates"] = spec.sampling_rates
    return meta


def write_outputs(outcome: ExperimentOutcome, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trials": out / "trials.csv",
        "aggregate": out / "aggregate.csv",
        "metadata": out / "metadata.json",
    }
    paths["trials"].write_text(trial_csv(outcome.records))
    paths["aggregate"].write_text(aggregate_csv(outcome.aggregate))
    paths["metadata"].write_text(json.dumps(metadata(outcome.spec), indent=2, sort_keys=True) + "\n")
    emit_plot_data(outcome.aggregate, out / "plots", algorithms=outcome.spec.algorithms)
    return paths
