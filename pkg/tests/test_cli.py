import json
import subprocess
import sys

import pytest

from homsim import cli
from homsim.config import DEFAULT_SEED, RunConfig
from homsim.experiments import ExperimentReport

FAST = ["--n-pairs", "2000", "--tau-steps", "9"]


def run_main(tmp_path, name, *argv):
    out = tmp_path / name
    code = cli.main([*argv, "--output", str(out)])
    return code, out.read_bytes()


class TestParse:
    def test_scan_flags(self):
        cfg = cli.parse_args("scan --sigma 1 --tau-max 4 --tau-steps 65 --n-pairs 100000 --seed 7".split())
        assert cfg == RunConfig(sigma=1.0, tau_max=4.0, tau_steps=65, n_pairs=100_000, seed=7)

    def test_odd_pairs(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.parse_args(["scan", "--n-pairs", "3"])
        assert exc.value.code == 2
        assert "n-pairs must be even" in capsys.readouterr().err

    def test_one_line_per_invalid_flag(self, capsys):
        assert cli.main(["scan", "--n-pairs", "3", "--sigma", "-2", "--tau-steps", "1"]) == 2
        lines = capsys.readouterr().err.strip().splitlines()
        assert len(lines) == 3

    def test_ratios(self):
        cfg = cli.parse_args(["sweep-bandwidth", "--ratios", "1,0.75,0.5,0.25"])
        assert cfg.ratios == (1.0, 0.75, 0.5, 0.25)
        assert cfg.command == "sweep-bandwidth"

    @pytest.mark.parametrize("argv", [
        ["scan", "--bogus"], ["scan", "--ratios", "1"], ["frobnicate"],
        ["sweep-bandwidth", "--ratios", "a,b"], ["scan", "--model", "laser"],
        ["sweep-bandwidth", "--ratios", "1,1.5"],
    ])
    def test_usage_errors(self, argv):
        assert cli.main(argv) == 2

    def test_default_seed(self):
        assert cli.parse_args(["scan"]).seed == DEFAULT_SEED


class TestOutput:
    def test_csv_schema(self, tmp_path):
        code, data = run_main(tmp_path, "a.csv", "scan", "--analytic", "--tau-steps", "5")
        assert code == 0
        lines = data.decode().split("\n")
        assert lines[0] == "tau,coincidence,std_error,model,bandwidth_ratio"
        assert lines[1] == "0,0,0,coherence-analytic,1"
        assert b"\r" not in data

    def test_seventeen_digits(self, tmp_path):
        _, data = run_main(tmp_path, "a.csv", "scan", "--analytic", "--tau-max", "1", "--tau-steps", "2")
        row = data.decode().splitlines()[2].split(",")
        assert float(row[1]) == pytest.approx(0.43233235838169365, abs=0)

    def test_json_round_trip(self, tmp_path):
        code, data = run_main(tmp_path, "a.json", "contrast", "--format", "json", *FAST)
        assert code == 0
        report = ExperimentReport.from_dict(json.loads(data))
        assert report.passed and len(report.curves) == 2
        assert cli.render_json(report).encode() == data

    def test_env_output(self, tmp_path, monkeypatch):
        path = tmp_path / "env.csv"
        monkeypatch.setenv(cli.OUTPUT_ENV, str(path))
        assert cli.main(["scan", "--analytic", "--tau-steps", "3"]) == 0
        assert path.read_text().startswith("tau,")

    def test_stdout(self, capsys):
        assert cli.main(["scan", "--analytic", "--tau-steps", "3"]) == 0
        out = capsys.readouterr()
        assert out.out.startswith("tau,coincidence")
        assert "PASS zero_delay" in out.err

    def test_detuning_map_table(self, tmp_path):
        code, data = run_main(tmp_path, "m.csv", "detuning-map", "--tau-steps", "3")
        assert code == 0
        lines = data.decode().splitlines()
        assert lines[0] == "delta_f,tau,coincidence,weight"
        assert len(lines) == 1 + 3 * 121


class TestExitCodes:
    def test_compare(self, tmp_path, capsys):
        code, _ = run_main(tmp_path, "c.csv", "compare")
        assert code == 0
        assert "PASS max_pointwise_gap" in capsys.readouterr().err

    def test_witness_degenerate(self, tmp_path):
        code, _ = run_main(tmp_path, "w.csv", "witness", "--center-split", "0")
        assert code == 0

    def test_witness_split_fails(self, tmp_path):
        code, _ = run_main(tmp_path, "w.csv", "witness", "--center-split", "3")
        assert code == 1

    def test_scan_fock(self, tmp_path):
        code, data = run_main(tmp_path, "f.csv", "scan", "--model", "fock", "--tau-steps", "5")
        assert code == 0
        assert data.decode().splitlines()[1].endswith(",fock,1")

    def test_library_error_is_usage(self, capsys):
        assert cli.main(["compare", "--mean-offset", "1"]) == 2
        assert "mean_offset = 0" in capsys.readouterr().err

    def test_mismatch_exit_one(self, tmp_path, monkeypatch):
        from homsim import experiments

        monkeypatch.setattr(experiments.fock, "fit_dip_rate", lambda t, v: (1.0, 0.5))
        assert cli.main(["compare", "--output", str(tmp_path / "x.csv")]) == 1


SUBCOMMANDS = [
    ["scan", *FAST],
    ["scan", "--model", "coherence-unshifted", *FAST],
    ["scan", "--model", "fock", *FAST],
    ["sweep-bandwidth", *FAST],
    ["contrast", *FAST],
    ["fringe", "--mean-offset", "3", *FAST],
    ["witness", "--tau-steps", "9"],
    ["compare", "--tau-steps", "9"],
    ["born-rule", *FAST],
    ["detuning-map", "--tau-steps", "3"],
]


@pytest.mark.parametrize("fmt", ["csv", "json"])
@pytest.mark.parametrize("argv", SUBCOMMANDS, ids=lambda a: "-".join(a[:3]))
def test_byte_determinism(tmp_path, argv, fmt):
    _, a = run_main(tmp_path, "a", *argv, "--format", fmt)
    _, b = run_main(tmp_path, "b", *argv, "--format", fmt)
    assert a == b and len(a) > 0


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "homsim", "scan", "--analytic", "--tau-steps", "3", "--output", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("tau,")
