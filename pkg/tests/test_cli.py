import json

import numpy as np
import pytest

from segvote import LabeledDataset, save_dataset
from segvote.cli import main
from segvote.models import derive_rng


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _write_corpus(tmp_path, name="corpus.segf", m=8, d=12, K=2, fmt="segf"):
    rng = derive_rng(100)
    ds = LabeledDataset(
        rng.normal(size=(m * K, d)), np.repeat(np.arange(K), m)
    )
    path = tmp_path / name
    save_dataset(ds, path, fmt=fmt)
    return path


class TestHelp:
    def test_group_help(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0
        for sub in ("simulate", "rate", "regimes", "sweep-nu", "bench", "split"):
            assert sub in out

    def test_subcommand_help_shows_defaults(self, capsys):
        code, out, _ = run(capsys, "simulate", "--help")
        assert code == 0
        assert "--trials" in out and "default" in out


SIM_ARGS = [
    "simulate", "--model", "b", "--d", "60", "--l", "6", "--p", "0.1",
    "--amp", "5", "--rule", "segmented", "--c", "10", "--trials", "50",
    "--seed", "3",
]


class TestSimulate:
    def test_config_echo_precedes_results(self, capsys):
        code, out, _ = run(capsys, *SIM_ARGS)
        assert code == 0
        docs = out.split('{\n  "config"')
        assert out.startswith('{\n  "config"')
        first = json.loads('{\n  "config"' + docs[1])
        assert first["config"]["subcommand"] == "simulate"
        assert first["config"]["trials"] == 50
        full = json.loads('{\n  "config"' + docs[2])
        assert set(full["results"]) == {
            "successes", "trials", "point_estimate", "ci_low", "ci_high",
        }

    def test_rerun_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(capsys, *SIM_ARGS, "--out", str(a))[0] == 0
        assert run(capsys, *SIM_ARGS, "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_threads_do_not_change_output(self, capsys, tmp_path):
        a, b = tmp_path / "t1.json", tmp_path / "t2.json"
        assert run(capsys, *SIM_ARGS, "--threads", "1", "--out", str(a))[0] == 0
        assert run(capsys, *SIM_ARGS, "--threads", "2", "--out", str(b))[0] == 0
        a_doc, b_doc = json.loads(a.read_text()), json.loads(b.read_text())
        assert a_doc["results"] == b_doc["results"]

    def test_csv_results(self, capsys, tmp_path):
        out_path = tmp_path / "est.csv"
        code, _, _ = run(capsys, *SIM_ARGS, "--format", "csv", "--out", str(out_path))
        assert code == 0
        assert out_path.read_text().startswith("successes,trials,")


class TestRate:
    def test_small_grid(self, capsys, tmp_path):
        out_path = tmp_path / "rate.json"
        code, _, _ = run(
            capsys, "rate", "--rho", "0.4", "--d-grid", "10:30:10",
            "--trials", "2000", "--seed", "1", "--out", str(out_path),
        )
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["config"]["d_grid"] == [10, 20, 30]
        assert len(doc["results"]["points"]) == 3
        assert doc["results"]["slope"] > 0

    def test_bad_grid(self, capsys):
        code, _, err = run(capsys, "rate", "--rho", "0.3", "--d-grid", "10-20")
        assert code == 1
        assert "start:stop:step" in err


class TestRegimes:
    ARGS = [
        "regimes", "--model", "b", "--d", "60", "--l", "6", "--p", "0.1",
        "--amp", "5", "--trials", "40", "--seed", "2",
    ]

    def test_report(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        assert code == 0
        assert '"verdicts"' in out

    def test_assert_flag_exit_code(self, capsys):
        # tiny d with heavy noise cannot satisfy all three verdicts
        code, _, err = run(capsys, *self.ARGS, "--assert")
        assert code == 3
        assert "verdicts failed" in err

    def test_model_a_rejected(self, capsys):
        code, _, _ = run(capsys, "regimes", "--model", "a", "--trials", "5")
        assert code == 1


class TestSweepNu:
    def test_runs(self, capsys, tmp_path):
        out_path = tmp_path / "nu.json"
        code, _, _ = run(
            capsys, "sweep-nu", "--model", "b", "--d", "60", "--l", "6",
            "--p", "0.1", "--amp", "5", "--nu-grid", "1,2", "--trials", "30",
            "--out", str(out_path),
        )
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert set(doc["results"]["estimates"]) == {
            "euclidean", "coordinate", "segmented",
        }
        assert doc["config"]["nu_grid"] == [1, 2]


class TestBenchAndSplit:
    def test_split_then_bench(self, capsys, tmp_path):
        corpus = _write_corpus(tmp_path)
        train, test = tmp_path / "train.segf", tmp_path / "test.segf"
        code, out, _ = run(
            capsys, "split", "--input", str(corpus), "--test-fraction", "0.25",
            "--seed", "1", "--train-out", str(train), "--test-out", str(test),
        )
        assert code == 0
        assert '"train_count": 12' in out and '"test_count": 4' in out

        result = tmp_path / "bench.csv"
        code, _, _ = run(
            capsys, "bench", "--train", str(train), "--test", str(test),
            "--segments", "1,3,12", "--k", "1,3", "--seed", "0",
            "--out", str(result),
        )
        assert code == 0
        lines = result.read_text().splitlines()
        assert lines[0] == "dataset,c,k,accuracy"
        assert len(lines) == 1 + 3 * 2

    def test_bench_csv_round_trip_source(self, capsys, tmp_path):
        corpus = _write_corpus(tmp_path, name="corpus.csv", fmt="csv")
        result = tmp_path / "bench.csv"
        code, _, _ = run(
            capsys, "bench", "--train", str(corpus), "--test", str(corpus),
            "--segments", "1", "--k", "1", "--out", str(result),
        )
        assert code == 0
        assert result.read_text().splitlines()[1].endswith(",1,1,1")


class TestExitCodes:
    def test_usage_error(self, capsys):
        code, _, _ = run(capsys, "simulate", "--model", "z")
        assert code == 1

    def test_config_error(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--model", "a", "--d", "10", "--rho", "0.9",
            "--rule", "euclid", "--trials", "5",
        )
        assert code == 1
        assert "rho" in err

    def test_io_error_empty_input(self, capsys, tmp_path):
        empty = tmp_path / "empty.segf"
        empty.write_bytes(b"")
        code, _, err = run(
            capsys, "bench", "--train", str(empty), "--test", str(empty),
        )
        assert code == 2
        assert "io error" in err

    def test_io_error_corrupt_input(self, capsys, tmp_path):
        bad = tmp_path / "bad.segf"
        bad.write_bytes(b"SEGF\x01")
        code, _, _ = run(capsys, "bench", "--train", str(bad), "--test", str(bad))
        assert code == 2

    def test_io_error_unwritable_output(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, *SIM_ARGS, "--out", str(tmp_path / "missing" / "x.json")
        )
        assert code == 2
