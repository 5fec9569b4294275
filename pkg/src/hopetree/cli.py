"""Command-line entry point: ``hopetree run`` and ``hopetree oracle-check``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import run_experiment, validate_spec, write_outputs
from .errors import ConfigError
from .gsra import GsraConfig, depth_bound, gsra_recover
from .instances import SignalModel, derive_seed, gen_sensing_matrix, gen_sparse_signal
from .oracle import l0_solve
from .pursuits import PursuitConfig, omp

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK_FAILED = 3


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return validate_spec(text)


def cmd_run(args) -> int:
    spec = _load(args.config).with_overrides(
        trials=args.trials, seed=args.seed, out=args.out, full_scale=args.full_scale,
        srer_mean_mode=args.srer_mean_mode)
    out = Path(spec.output_dir or "results")
    outcome = run_experiment(spec, progress=lambda msg: print(msg, file=sys.stderr))
    paths = write_outputs(outcome, out)
    for row in outcome.aggregate:
        x = f"phi={row['phi']:.2f}" if row["phi"] is not None else f"K={row['k']}"
        val = f"srer={row['srer_db']:.2f} dB" if row["srer_db"] is not None \
            else f"freq={row['frequency']:.2f}"
        print(f"{row['algorithm']:8s} {x:10s} {val}  mean={row['mean_ms']:.2f} ms")
    print(f"wrote {paths['trials']} and {paths['aggregate']}")
    return EXIT_OK


def oracle_agreement(m: int, n: int, k: int, trials: int, seed: int) -> dict[str, float]:
    """Fraction of noiseless planted instances where each solver matches l0_solve."""
    gcfg = GsraConfig(sparsity_k=k, path_l=min(2, k), search_depth=depth_bound(m, k),
                      max_candidates=min(30, min(2, k) ** depth_bound(m, k)))
    pcfg = PursuitConfig(sparsity_k=k)
    hits = {"gsra": 0, "omp": 0}
    for t in range(trials):
        s = derive_seed(seed, 0, t)
        a = gen_sensing_matrix(m, n, False, s)
        x = gen_sparse_signal(SignalModel("gaussian_nonzeros", n, k), s)
        y = a.a @ x.x
        truth = set(l0_solve(a, y, k)[0])
        hits["gsra"] += set(np.flatnonzero(gsra_recover(a, y, gcfg).x_hat)) == truth
        hits["omp"] += set(np.flatnonzero(omp(a, y, pcfg).x_hat)) == truth
    return {name: h / trials if trials else 1.0 for name, h in hits.items()}


def cmd_oracle_check(args) -> int:
    o = _load(args.config).oracle
    rates = oracle_agreement(o.m, o.n, o.k, o.trials, o.seed)
    for name, rate in rates.items():
        print(f"{name}: support matches l0 oracle in {rate:.3f} of {o.trials} instances")
    ok = rates["gsra"] >= o.min_agreement
    print(("PASS" if ok else "FAIL") + f" gsra agreement >= {o.min_agreement}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hopetree", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark sweep")
    run.add_argument("--config", required=True)
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--full-scale", action="store_true",
                     help="1000 trials per point (1000 realizations for noisy_srer)")
    run.add_argument("--srer-mean-mode", choices=("energy", "db"))
    run.set_defaults(func=cmd_run)

    chk = sub.add_parser("oracle-check", help="compare against the brute-force l0 oracle")
    chk.add_argument("--config", required=True)
    chk.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
