"""Command-line behaviour and exit codes."""
from __future__ import annotations

from pathlib import Path

import pytest

from src.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, main, resolve_config


def _config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.env"
    path.write_text(text, encoding="utf-8")
    return path


def test_usage_error_exits_with_one(capsys):
    with pytest.raises(SystemExit) as info:
        main(["estimate"])

    assert info.value.code == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["smooth-everything"])

    assert info.value.code == EXIT_USAGE


def test_simulate_writes_one_row_per_observation(tmp_path, capsys):
    config = _config(tmp_path, "n=2\np=1\nt=3\nseed=5\n")
    out = tmp_path / "sim"

    code = main(["simulate", "--config", str(config), "--out", str(out)])

    assert code == EXIT_OK
    lines = (out / "data.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config_hash=") and lines[0].endswith("seed=5")
    assert lines[1] == "subject,var,u,y"
    assert len(lines) == 2 + 6
    assert str(out / "data.csv") in capsys.readouterr().out


def test_simulate_is_reproducible(tmp_path):
    config = _config(tmp_path, "n=5\np=2\nt=4\n")

    main(["simulate", "--config", str(config), "--out", str(tmp_path / "a"), "--truth"])
    main(["simulate", "--config", str(config), "--out", str(tmp_path / "b"), "--truth"])

    for name in ("data.csv", "manifest.txt", "truth.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_header_only_dataset_exits_with_two(tmp_path, capsys):
    dataset = tmp_path / "empty.csv"
    dataset.write_text("subject,var,u,y\n", encoding="utf-8")

    code = main(["estimate", str(dataset), "--out", str(tmp_path / "est")])

    assert code == EXIT_FAILURE
    assert "no observations" in capsys.readouterr().err


def test_malformed_dataset_reports_the_line(tmp_path, capsys):
    dataset = tmp_path / "bad.csv"
    dataset.write_text("subject,var,u,y\n0,0,0.5,1.0\n0,0,oops,1.0\n", encoding="utf-8")

    code = main(["estimate", str(dataset), "--out", str(tmp_path / "est")])

    assert code == EXIT_FAILURE
    assert f"{dataset}:3:" in capsys.readouterr().err


def test_binned_bandwidth_below_grid_minimum_exits_with_two(tmp_path, capsys):
    config = _config(tmp_path, "n=20\np=1\nt=5\n")
    main(["simulate", "--config", str(config), "--out", str(tmp_path / "sim")])

    code = main(
        [
            "estimate",
            str(tmp_path / "sim" / "data.csv"),
            "--binned",
            "--grid",
            "100",
            "--h-mean",
            "0.01",
            "--out",
            str(tmp_path / "est"),
        ]
    )

    assert code == EXIT_FAILURE
    assert "bin" in capsys.readouterr().err


def test_estimate_writes_curves_surfaces_and_failures(tmp_path):
    config = _config(tmp_path, "n=40\np=2\nt=10\nbin_count=21\n")
    main(["simulate", "--config", str(config), "--out", str(tmp_path / "sim")])

    code = main(
        [
            "estimate",
            str(tmp_path / "sim" / "data.csv"),
            "--config",
            str(config),
            "--pair",
            "0,1",
            "--out",
            str(tmp_path / "est"),
        ]
    )

    assert code == EXIT_OK
    names = sorted(p.name for p in (tmp_path / "est").iterdir())
    assert names == [
        "cov_0_1.csv",
        "cov_0_1.grid.csv",
        "failures.txt",
        "mean_0.csv",
        "mean_1.csv",
    ]
    surface = (tmp_path / "est" / "cov_0_1.csv").read_text(encoding="utf-8").splitlines()
    assert len(surface) == 1 + 21
    assert len(surface[1].split(",")) == 21


def test_pair_out_of_range_exits_with_two(tmp_path):
    config = _config(tmp_path, "n=10\np=1\nt=4\n")
    main(["simulate", "--config", str(config), "--out", str(tmp_path / "sim")])

    code = main(
        [
            "estimate",
            str(tmp_path / "sim" / "data.csv"),
            "--pair",
            "0,3",
            "--out",
            str(tmp_path / "est"),
        ]
    )

    assert code == EXIT_FAILURE


def test_bad_pair_syntax_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["estimate", str(tmp_path / "x.csv"), "--pair", "0;1"])

    assert info.value.code == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--grid", "1"],
        ["sweep", "--grid", "many"],
        ["simulate", "--threads", "0"],
        ["verify", "--threads", "0"],
    ],
)
def test_out_of_range_counts_are_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)

    assert info.value.code == EXIT_USAGE
    err = capsys.readouterr().err
    assert "must be at least" in err or "expected an integer" in err


def test_command_line_overrides_config(tmp_path):
    config = _config(tmp_path, "binned=false\nbin_count=50\n")
    args = build_parser().parse_args(
        ["sweep", "--config", str(config), "--binned", "--grid", "30", "--threads", "4"]
    )

    cfg = resolve_config(args)

    assert cfg.binned and cfg.bin_count == 30 and cfg.threads == 4


def test_unknown_config_key_exits_with_two(tmp_path, capsys):
    config = _config(tmp_path, "nn=3\n")

    code = main(["simulate", "--config", str(config), "--out", str(tmp_path / "sim")])

    assert code == EXIT_FAILURE
    assert "unknown config key" in capsys.readouterr().err
