import json
import subprocess
import sys

import pytest

from rwrs.cli import EXIT_IO, EXIT_USAGE, read_csv_manifest, read_csv_rows, run
from rwrs.experiments import ExperimentConfig, run_range_experiment


def small_range(tmp_path, name="r.csv", *extra):
    out = tmp_path / name
    code = run(["range", "--n", "2000", "--trials", "25", "--seed", "3", "--reference-trials", "50",
                "--out", str(out), *extra])
    return code, out


class TestRange:
    def test_header_and_rows(self, tmp_path):
        code, out = small_range(tmp_path)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "# tool=rwrs 0.1.0" and lines[1] == "# subcommand=range"
        assert lines[2].startswith("# config_digest=") and lines[3] == "# seed=3"
        cols, rows = read_csv_rows(out)
        assert cols == ["trial", "sample"] and len(rows) == 25
        assert [int(r[0]) for r in rows] == list(range(25))

    def test_samples_match_library(self, tmp_path):
        _, out = small_range(tmp_path)
        _, rows = read_csv_rows(out)
        lib = run_range_experiment(ExperimentConfig(n_grid=(2000,), trials=25, master_seed=3))
        assert [float(r[1]) for r in rows] == lib.by_trial.tolist()

    def test_byte_identical_rerun(self, tmp_path):
        _, a = small_range(tmp_path, "a.csv")
        _, b = small_range(tmp_path, "b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_summary_json(self, tmp_path):
        _, out = small_range(tmp_path)
        summary = json.loads(out.with_suffix(".json").read_text())
        man = read_csv_manifest(out)
        assert summary["config_digest"] == man.config_digest and summary["seed"] == 3
        assert summary["n_samples"] == 25 and 0 <= summary["ks_vs_reference"] <= 1
        assert summary["manifest"]["outputs"] == [str(out), str(out.with_suffix(".json"))]

    def test_manifest_round_trip(self, tmp_path):
        _, out = small_range(tmp_path)
        man = read_csv_manifest(out)
        assert man.subcommand == "range" and man.master_seed == 3 and man.tool_version == "0.1.0"
        c = man.config
        cfg = ExperimentConfig(kind=c["kind"], family=c["family"], laziness=c["laziness"], alpha=c["alpha"],
                               zero_mass=c["zero_mass"], probs=tuple(c["probs"]), n_grid=tuple(c["n_grid"]),
                               trials=c["trials"], epsilons=tuple(c["epsilons"]), master_seed=c["master_seed"])
        again = tmp_path / "again.csv"
        args = ["range", "--n", str(cfg.n_grid[0]), "--trials", str(cfg.trials), "--seed", str(cfg.master_seed),
                "--reference-trials", str(c["reference_trials"]), "--out", str(again)]
        assert run(args) == 0
        assert read_csv_manifest(again).config_digest == man.config_digest
        assert read_csv_rows(again) == read_csv_rows(out)


class TestErrors:
    def test_alpha_out_of_range(self, tmp_path):
        assert run(["range", "--alpha", "1.0", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
        assert not (tmp_path / "x.csv").exists()

    def test_unknown_flag(self, capsys):
        assert run(["range", "--bogus", "1"]) == EXIT_USAGE

    def test_unknown_subcommand(self):
        assert run(["nope"]) == EXIT_USAGE

    def test_bad_value(self, tmp_path):
        assert run(["range", "--trials", "many", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE

    def test_family_alpha_conflict(self, tmp_path):
        assert run(["range", "--family", "lazy", "--alpha", "1.5", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE

    def test_unwritable_output(self, tmp_path):
        target = tmp_path / "missing" / "x.csv"
        assert run(["range", "--n", "100", "--trials", "3", "--reference-trials", "3", "--out", str(target)]) == EXIT_IO

    def test_missing_config(self, tmp_path):
        assert run(["range", "--config", str(tmp_path / "none.cfg")]) == EXIT_IO

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("colour = blue\n")
        assert run(["range", "--config", str(cfg)]) == EXIT_USAGE


class TestConfigFile:
    def test_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# a comment\ntrials = 7\nn = 500\nseed = 11  # trailing note\nreference-trials = 5\n")
        out = tmp_path / "c.csv"
        assert run(["range", "--config", str(cfg), "--trials", "4", "--out", str(out)]) == 0
        man = read_csv_manifest(out)
        assert man.config["trials"] == 4 and man.config["n_grid"] == [500] and man.master_seed == 11
        assert len(read_csv_rows(out)[1]) == 4


class TestSubcommands:
    def test_complexity(self, tmp_path):
        out = tmp_path / "c.csv"
        assert run(["complexity", "--n", "3000", "--trials", "5", "--epsilons", "0.1,0.5",
                    "--probs", "0.8,0.2", "--out", str(out)]) == 0
        cols, rows = read_csv_rows(out)
        assert cols == ["trial", "epsilon", "range_size", "log2_phi", "scaled", "sandwich_lo"]
        assert len(rows) == 10 and {r[1] for r in rows} == {"0.1", "0.5"}

    def test_localtime(self, tmp_path):
        out = tmp_path / "l.csv"
        assert run(["localtime", "--n", "3000", "--trials", "6", "--interval=-0.3:-0.1,0.1:0.3",
                    "--out", str(out)]) == 0
        assert len(read_csv_rows(out)[1]) == 6

    def test_edim(self, tmp_path):
        out = tmp_path / "e.csv"
        assert run(["edim", "--n-grid", "1000,3000,10000,30000", "--trials", "20", "--epsilon", "0.1",
                    "--out", str(out)]) == 0
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["target"] == 0.5 and 0.3 < summary["slope"] < 0.7
        assert read_csv_rows(out)[0] == ["n", "median_log2_phi"]

    def test_reference_pareto(self, tmp_path):
        out = tmp_path / "ref.csv"
        assert run(["reference", "--alpha", "1.5", "--steps", "2000", "--trials", "8", "--out", str(out)]) == 0
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["reference"] == "stable-self-consistency" and summary["n_samples"] == 8

    def test_lemma4(self, tmp_path):
        out = tmp_path / "k.csv"
        assert run(["lemma4", "--n", "2000", "--trials", "20", "--kappa", "4", "--out", str(out)]) == 0
        cols, rows = read_csv_rows(out)
        assert cols == ["class", "size", "theta", "frequency"]
        assert sum(int(r[1]) for r in rows) == 20

    def test_smalltest(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run(["smalltest", "--instances", "8", "--out", str(out), "--summary", str(tmp_path / "s.json")]) == 0
        summary = json.loads((tmp_path / "s.json").read_text())
        assert summary["failures"] == 0
        assert all(r[2] == "1" for r in read_csv_rows(out)[1])


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "rwrs.cli", "range", "--n", "500", "--trials", "3", "--reference-trials", "3",
         "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
    bad = subprocess.run([sys.executable, "-m", "rwrs.cli", "range", "--alpha", "1.0"], capture_output=True, text=True)
    assert bad.returncode == 2 and "alpha" in bad.stderr


@pytest.mark.parametrize("sub", ["range", "complexity", "localtime", "edim", "reference", "lemma4", "smalltest"])
def test_help(sub, capsys):
    assert run([sub, "--help"]) == 0
    assert "--config" in capsys.readouterr().out
