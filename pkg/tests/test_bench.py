import csv
import io
import json

import pytest

from hopetree import ConfigError
from hopetree.bench import (
    CSV_HEADER,
    emit_plot_data,
    gsra_config_for,
    read_plot_data,
    run_experiment,
    trial_csv,
    validate_spec,
    write_outputs,
)
from hopetree.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, main

SMALL = """
[experiment]
protocol = gaussian_sweep
m = 24
n = 48
k = 2, 4-6
trials = 4
seed = 11

[algorithms]
roster = omp, sp, gomp, mmp_dfs, mmp_bfs, gsra

[gsra]
search_depth = 2
"""

NOISY = """
[experiment]
protocol = noisy_srer
n = 100
k = 5
sampling_rates = 0.3, 0.4
trials = 6
realizations_per_matrix = 3

[algorithms]
roster = omp, gsra

[gsra]
search_depth = 4
"""


def _non_timing(text):
    rows = list(csv.reader(io.StringIO(text)))
    i = rows[0].index("wall_ms")
    return [r[:i] + r[i + 1:] for r in rows]


class TestValidate:
    def test_minimal(self):
        spec = validate_spec("[experiment]\nprotocol = gaussian_sweep\n")
        assert (spec.m, spec.n, spec.trials) == (128, 256, 100)
        assert spec.k_range == list(range(1, 61))
        assert spec.gsra.path_l == 2 and spec.gsra.search_depth == 7
        assert spec.gsra.max_candidates == 30
        assert spec.algorithms == ["omp", "gomp", "mmp_dfs", "mmp_bfs", "gsra"]

    def test_empty_text_defaults(self):
        assert validate_spec("").protocol == "gaussian_sweep"

    def test_noisy_defaults(self):
        spec = validate_spec("[experiment]\nprotocol = noisy_srer\n")
        assert spec.n == 500 and spec.k_range == [20]
        assert spec.gsra.search_depth == 16 and spec.gsra.allow_deep_search
        assert [m for m, _, _ in spec.points()] == [75, 80, 85, 90, 95, 100]
        assert spec.trials == 200

    def test_zero_one_defaults(self):
        assert validate_spec("[experiment]\nprotocol = zero_one_sweep\n").k_range == list(range(1, 51))

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="bogus_key"):
            validate_spec("[experiment]\nbogus_key = 1\n")

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="cosamp"):
            validate_spec("[cosamp]\nk = 1\n")

    def test_l_above_k(self):
        with pytest.raises(ConfigError, match="L <= K"):
            validate_spec("[experiment]\nk = 3\n[gsra]\npath_l = 5\n")

    def test_k_out_of_range(self):
        with pytest.raises(ConfigError, match="sparsity"):
            validate_spec("[experiment]\nm = 10\nn = 20\nk = 11\n")

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="trials"):
            validate_spec("[experiment]\ntrials = many\n")

    def test_unknown_algorithm(self):
        with pytest.raises(ConfigError, match="cosamp"):
            validate_spec("[algorithms]\nroster = omp, cosamp\n")

    def test_k_ranges(self):
        assert validate_spec("[experiment]\nk = 20-50:5\n").k_range == [20, 25, 30, 35, 40, 45, 50]

    def test_gsra_clamped_at_small_k(self):
        spec = validate_spec("")
        g = gsra_config_for(spec, 128, 1)
        assert (g.path_l, g.search_depth, g.max_candidates) == (1, 1, 1)
        g = gsra_config_for(spec, 128, 50)
        assert (g.path_l, g.search_depth, g.max_candidates) == (2, 7, 30)
        g.check(128)


class TestRun:
    def test_zero_trials_header_only(self):
        spec = validate_spec(SMALL).with_overrides(trials=0)
        out = run_experiment(spec)
        assert out.records == [] and out.aggregate == []
        assert trial_csv(out.records) == ",".join(CSV_HEADER) + "\n"

    def test_rows_and_order(self):
        spec = validate_spec(SMALL)
        out = run_experiment(spec)
        assert len(out.records) == 6 * 4 * 4
        keys = [(spec.algorithms.index(r.algorithm), spec.k_range.index(r.k), r.trial)
                for r in out.records]
        assert keys == sorted(keys)
        for row in out.aggregate:
            assert 0.0 <= row["frequency"] <= 1.0
            assert row["mean_ms"] > 0
            assert row["srer_db"] is None
        assert all(r.srer_db is None for r in out.records)

    def test_instances_shared_across_roster(self):
        out = run_experiment(validate_spec(SMALL))
        seeds = {}
        for r in out.records:
            seeds.setdefault(r.algorithm, []).append(r.seed)
        assert len({tuple(v) for v in seeds.values()}) == 1

    def test_byte_stable(self):
        spec = validate_spec(SMALL)
        a = trial_csv(run_experiment(spec).records)
        b = trial_csv(run_experiment(spec).records)
        assert _non_timing(a) == _non_timing(b)
        c = trial_csv(run_experiment(spec.with_overrides(seed=12)).records)
        assert _non_timing(a) != _non_timing(c)

    def test_noisy(self):
        spec = validate_spec(NOISY)
        out = run_experiment(spec)
        assert all(r.srer_db is not None for r in out.records)
        assert {row["phi"] for row in out.aggregate} == {0.3, 0.4}
        assert all(row["srer_db"] is not None for row in out.aggregate)

    def test_noisy_db_mode_differs(self):
        spec = validate_spec(NOISY)
        energy = run_experiment(spec).aggregate
        db = run_experiment(spec.with_overrides(srer_mean_mode="db")).aggregate
        assert [r["srer_db"] for r in energy] != [r["srer_db"] for r in db]


class TestPlotData:
    def test_round_trip(self, tmp_path):
        out = run_experiment(validate_spec(SMALL))
        paths = emit_plot_data(out.aggregate, tmp_path, algorithms=out.spec.algorithms)
        assert len(paths) == 2 * 6
        for row in out.aggregate:
            series = dict(read_plot_data(tmp_path / f"frequency__{row['algorithm']}.dat"))
            assert series[float(row["k"])] == row["frequency"]
            series = dict(read_plot_data(tmp_path / f"mean_ms__{row['algorithm']}.dat"))
            assert series[float(row["k"])] == row["mean_ms"]

    def test_empty_is_header_only(self, tmp_path):
        paths = emit_plot_data([], tmp_path, algorithms=["omp", "gsra"])
        assert len(paths) == 4
        for p in paths:
            assert p.read_text() == "x y\n"

    def test_write_outputs(self, tmp_path):
        out = run_experiment(validate_spec(NOISY))
        paths = write_outputs(out, tmp_path)
        meta = json.loads(paths["metadata"].read_text())
        assert meta["rng"].endswith("Philox4x64-10")
        assert meta["gsra"]["search_depth"] == 4
        assert "note" in meta["mmp"]
        assert (tmp_path / "plots" / "srer_db__gsra.dat").exists()
        header = paths["aggregate"].read_text().splitlines()[0]
        assert header.startswith("algorithm,protocol")


class TestCLI:
    def test_run(self, tmp_path, capsys):
        cfg = tmp_path / "small.ini"
        cfg.write_text(SMALL)
        rc = main(["run", "--config", str(cfg), "--trials", "2", "--out", str(tmp_path / "o")])
        assert rc == EXIT_OK
        rows = (tmp_path / "o" / "trials.csv").read_text().splitlines()
        assert rows[0] == ",".join(CSV_HEADER)
        assert len(rows) == 1 + 6 * 4 * 2
        assert "gsra" in capsys.readouterr().out

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[experiment]\nfoo = 1\n")
        assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
        assert "foo" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.ini")]) == EXIT_CONFIG

    def test_oracle_check(self, tmp_path, capsys):
        cfg = tmp_path / "o.ini"
        cfg.write_text("[oracle]\ntrials = 20\nmin_agreement = 0.5\n")
        assert main(["oracle-check", "--config", str(cfg)]) == EXIT_OK
        cfg.write_text("[oracle]\ntrials = 20\nk = 4\nmin_agreement = 1.01\n")
        assert main(["oracle-check", "--config", str(cfg)]) == EXIT_CHECK_FAILED
        assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("name", ["gaussian_sweep", "zero_one_sweep", "noisy_srer", "oracle"])
def test_shipped_configs_validate(name):
    from pathlib import Path

    text = (Path(__file__).parent.parent / "configs" / f"{name}.ini").read_text()
    spec = validate_spec(text)
    if name == "noisy_srer":
        assert spec.gsra.search_depth == 16
