"""Command-line surface: flags, exit codes, and a full run through main()."""

import json

import pytest

from fluentnet.cli import build_parser, main
from synth_fixtures import make_corpus


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    make_corpus(root / "clean", n_subjects=2, files_per_subject=2,
                words_per_file=10, seed=4)
    config = {
        "seed": 11,
        "clean_dir": str(root / "clean"),
        "out_dir": str(root / "out"),
        "dtypes": ["S"],
        "split": "kfold",
        "folds": 2,
        "synthesis": {"window_s": 1.0, "insert_prob": 1.0, "quotas": {"S": 2}},
        "stft": {"n_bins": 64},
        "model": {"width_scale": 0.0625, "hidden": 16, "dropout": 0.0,
                  "input_frames": 98, "input_bins": 64, "dtype": "float32"},
        "train": {"lr": 0.001, "epochs": 1, "batch_size": 8},
    }
    path = root / "config.json"
    path.write_text(json.dumps(config))
    return {"root": root, "config": str(path)}


class TestParsing:
    def test_help_exits_zero_listing_flags(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for command in ("synthesize", "featurize", "train", "evaluate",
                        "gradcheck", "stats"):
            assert command in out

    def test_subcommand_help_lists_flags(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["synthesize", "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for flag in ("--config", "--seed", "--out-dir", "--prob", "--quota"):
            assert flag in out
        with pytest.raises(SystemExit):
            main(["train", "--help"])
        out = capsys.readouterr().out
        for flag in ("--dtype", "--width-scale"):
            assert flag in out

    def test_parser_covers_all_commands(self):
        parser = build_parser()
        args = parser.parse_args(["train", "--dtype", "S", "--width-scale", "0.5"])
        assert args.command == "train"
        assert args.dtype == "S"
        assert args.width_scale == 0.5

    def test_missing_command_is_usage_error(self, capsys):
        assert main([]) == 1
        assert "usage error" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["synthesize", "--bogus"]) == 1

    def test_bad_dtype_is_usage_error(self):
        assert main(["train", "--dtype", "XX"]) == 1

    def test_bad_quota_is_usage_error(self, capsys):
        assert main(["synthesize", "--quota", "S=two"]) == 1
        assert main(["synthesize", "--quota", "nope"]) == 1
        assert main(["synthesize", "--quota", "XX=2"]) == 1

    def test_missing_config_file_is_usage_error(self, capsys):
        assert main(["train", "--config", "/no/such.json"]) == 1

    def test_missing_corpus_is_data_error(self, tmp_path, capsys):
        assert main(["stats", "--out-dir", str(tmp_path)]) == 2
        assert "data error" in capsys.readouterr().err


class TestEndToEnd:
    def test_full_run(self, workdir, capsys):
        cfg = workdir["config"]
        assert main(["synthesize", "--config", cfg]) == 0
        assert main(["featurize", "--config", cfg]) == 0
        assert main(["train", "--config", cfg]) == 0
        assert main(["evaluate", "--config", cfg]) == 0
        assert main(["stats", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "MR %" in out and "Acc %" in out
        report_dir = workdir["root"] / "out" / "report"
        for name in ("report.csv", "summary.csv", "roc_S.csv"):
            assert (report_dir / name).exists()

    def test_synthesize_flag_overrides(self, workdir, tmp_path, capsys):
        out_dir = str(tmp_path / "o")
        code = main(["synthesize", "--config", workdir["config"],
                     "--out-dir", out_dir, "--prob", "0", "--seed", "3"])
        assert code == 0
        manifest = (tmp_path / "o" / "stutter" / "manifest.csv").read_text()
        rows = manifest.splitlines()[1:]
        assert len(rows) == 4
        assert all(row.endswith(",0") for row in rows)

    def test_gradcheck_runs_clean(self, capsys):
        assert main(["gradcheck", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "max_rel_err" in out
        assert "FAIL" not in out
