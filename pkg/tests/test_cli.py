"""
Tests for the command-line surface.
To run these tests:
    pytest -xvs tests/test_cli.py
"""
import json

import pytest

from benchmark.cli import EXIT_CONFIG, EXIT_OK, build_parser, cli_main


class TestSolveCommand:
    """Tests for `solve`."""

    def test_unknown_problem(self):
        """Test that an unknown problem is a configuration error."""
        assert cli_main(["solve", "--method", "fo", "--problem", "nosuch"]) == EXIT_CONFIG

    def test_missing_problem(self):
        """Test that argparse failures map to the configuration exit code."""
        assert cli_main(["solve"]) == EXIT_CONFIG

    def test_bad_m(self):
        """Test that an invalid m token is rejected."""
        assert cli_main(["solve", "-p", "rosenbrock", "--m", "0"]) == EXIT_CONFIG

    def test_bad_eps(self):
        """Test that a non-positive eps is rejected."""
        assert cli_main(["solve", "-p", "rosenbrock", "--eps", "-1"]) == EXIT_CONFIG

    def test_solve_prints_report(self, capsys):
        """Test a successful first-order run on a small synthetic problem."""
        code = cli_main(["solve", "--method", "fo", "-p", "synthetic2", "--m", "1"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["termination"] == "solution_found"
        assert payload["m"] == 1
        assert "trace" not in payload

    def test_solve_with_trace(self, capsys):
        """Test that --trace adds the flattened inner trace."""
        code = cli_main(["solve", "--method", "zo", "-p", "synthetic2", "--m", "n", "--trace",
                         "--budget", "300"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["method"] == "zo"
        assert payload["trace"]
        assert {"k", "ell", "t", "sigma", "h", "F"} <= set(payload["trace"][0])


class TestBenchCommand:
    """Tests for `bench`."""

    def test_bench_writes_files(self, tmp_path, capsys):
        """Test a small sweep through the CLI."""
        code = cli_main(["bench", "--methods", "fo", "--m", "1,n", "-p", "synthetic2",
                         "--out", str(tmp_path), "--budget", "500"])
        assert code == EXIT_OK
        printed = capsys.readouterr().out.split()
        assert str(tmp_path / "summary.tsv") in printed
        assert (tmp_path / "summary.tsv").exists()
        assert (tmp_path / "config.json").exists()
        assert (tmp_path / "traces").is_dir()

    @pytest.mark.parametrize("argv", [
        ["bench", "--methods", "xx"],
        ["bench", "--m", "0"],
        ["bench", "-p", "nosuch"],
        ["bench", "--jobs", "0"],
    ])
    def test_bench_configuration_errors(self, argv, tmp_path):
        """Test that invalid sweeps exit with the configuration code."""
        assert cli_main(argv + ["--out", str(tmp_path)]) == EXIT_CONFIG

    def test_parser_defaults(self):
        """Test the documented defaults."""
        args = build_parser().parse_args(["bench"])
        assert args.methods == "fo"
        assert args.m == "1,n,2n"
        assert args.problem == "all"
        assert args.eps == 1e-4
        assert args.trace is True
        assert args.jobs is None

    def test_no_trace_skips_trace_files(self, tmp_path):
        """Test that --no-trace writes only the summary, profile and config files."""
        code = cli_main(["bench", "--methods", "fo", "--m", "1", "-p", "synthetic2",
                         "--out", str(tmp_path), "--budget", "300", "--no-trace"])
        assert code == EXIT_OK
        assert (tmp_path / "summary.tsv").exists()
        assert not (tmp_path / "traces").exists()

    def test_explicit_trace_flag(self, tmp_path):
        """Test that --trace is accepted and writes the trace files."""
        code = cli_main(["bench", "--methods", "fo", "--m", "1", "-p", "synthetic2",
                         "--out", str(tmp_path), "--budget", "300", "--trace"])
        assert code == EXIT_OK
        assert (tmp_path / "traces" / "synthetic_s0_n2__fo_m1.csv").exists()

    def test_bad_jobs_environment(self, tmp_path, monkeypatch):
        """Test that a non-integer CNM_JOBS is a configuration error, not a crash."""
        monkeypatch.setenv("CNM_JOBS", "many")
        assert cli_main(["bench", "-p", "synthetic2", "--out", str(tmp_path)]) == EXIT_CONFIG
        assert not (tmp_path / "summary.tsv").exists()
