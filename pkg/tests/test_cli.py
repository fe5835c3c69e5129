import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from khmgof.cli import EXIT_CODES, RunConfig, main
from khmgof.datafiles import CriticalTable, write_sample_csv
from khmgof.errors import ConfigurationError
from khmgof.harness import ExperimentConfig, sample_model
from khmgof.paths import read_path_tsv
from khmgof.regression import Sample
from khmgof.supstats import TestReport


def _csv(tmp_path, n, seed=0, name="s.csv"):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 2, n)
    f = tmp_path / name
    write_sample_csv(f, Sample(x, np.exp(x) + rng.standard_normal(n)))
    return f


def _reports(text):
    blocks = [b for b in text.split("\n\n") if "statistic=" in b]
    return [dict(line.split("=", 1) for line in b.splitlines() if "=" in line and not line.startswith("#"))
            for b in blocks]


def test_small_sample_refused(tmp_path, capsys):
    f = _csv(tmp_path, 3)
    assert main(["test", "--input", str(f), "--out", str(tmp_path / "o")]) == EXIT_CODES["domain"]
    assert "at least 10" in capsys.readouterr().err


def test_bad_family_is_parse_error(tmp_path, capsys):
    f = _csv(tmp_path, 30)
    assert main(["test", "--input", str(f), "--family", "t:0", "--out", str(tmp_path)]) == EXIT_CODES["parse"]
    assert main(["diagnose", "--family", "t:0"]) == EXIT_CODES["parse"]


def test_csv_error_reports_line(tmp_path, capsys):
    f = tmp_path / "bad.csv"
    f.write_text("x,y\n1,2\nfoo,3\n")
    assert main(["test", "--input", str(f), "--out", str(tmp_path)]) == EXIT_CODES["parse"]
    assert "line 3" in capsys.readouterr().err
    assert main(["test", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == EXIT_CODES["parse"]


def test_run_config_invariants():
    with pytest.raises(ConfigurationError):
        RunConfig("test")
    with pytest.raises(ConfigurationError):
        RunConfig("simulate", n=10)
    with pytest.raises(ConfigurationError):
        RunConfig("diagnose", level=1.0)


def test_test_command_outputs(tmp_path, capsys):
    f = _csv(tmp_path, 60)
    out = tmp_path / "o"
    assert main(["test", "--input", str(f), "--bandwidth", "0.2", "--out", str(out)]) == 0
    text = (out / "report.txt").read_text()
    assert text.startswith("# config=khmgof test --input")
    w, v = _reports(text)
    assert w["statistic"] == "W" and float(w["p_value"]) >= 0
    assert v["statistic"] == "V_hat" and "p_value" not in v
    assert "simulate" in v["note"]
    path = read_path_tsv(out / "w_n.tsv")
    assert path.n == 60 and (out / "w_n.tsv").read_text().startswith("# config=")
    assert TestReport.from_text(text.split("\n\n")[0]).value == float(w["value"])


def test_estimate_mode(tmp_path, capsys):
    f = _csv(tmp_path, 60)
    out = tmp_path / "o"
    assert main(["test", "--input", str(f), "--bandwidth", "0.2", "--scale", "estimate",
                 "--out", str(out)]) == 0
    assert _reports((out / "report.txt").read_text())[0]["statistic"] == "W_tilde"
    assert (out / "w_tilde_n.tsv").exists()


def test_tail_overflow_hint(tmp_path, capsys):
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 2, 40)
    y = np.exp(x) + rng.standard_normal(40)
    y[5] += 200.0
    f = tmp_path / "o.csv"
    write_sample_csv(f, Sample(x, y))
    assert main(["test", "--input", str(f), "--bandwidth", "0.3", "--out", str(tmp_path)]) == EXIT_CODES["domain"]
    assert "--scale estimate" in capsys.readouterr().err


def test_simulate_is_byte_identical(tmp_path, capsys):
    out = tmp_path / "o"
    args = ["simulate", "--n", "30", "--reps", "15", "--bandwidths", "0.3,0.5",
            "--alt-weight", "0.2", "--seed", "11", "--out", str(out)]
    assert main(args) == 0
    first = {name: (out / name).read_bytes() for name in os.listdir(out)}
    assert main(args) == 0
    assert {"null_summary.tsv", "power.tsv", "critical_values.tsv", "edf_W_a0.3.tsv",
            "edf_V_hat_a0.5.tsv"} <= set(first)
    for name, data in first.items():
        assert (out / name).read_bytes() == data
        assert data.startswith(b"#")
    # 2 bandwidths x 4 levels in the power table
    rows = [ln for ln in first["power.tsv"].decode().splitlines() if not ln.startswith("#")]
    assert len(rows) == 1 + 8


def test_simulate_fills_table_used_by_test(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["simulate", "--n", "40", "--reps", "25", "--bandwidths", "0.3",
                 "--levels", "0.1,0.05", "--out", str(out)]) == 0
    table = CriticalTable.load(out / "critical_values.tsv")
    assert len(table) == 4
    assert table.lookup("V_hat", 40, 0.3, "normal", 0.05) > 0
    f = _csv(tmp_path, 40)
    assert main(["test", "--input", str(f), "--bandwidth", "0.3", "--out", str(out)]) == 0
    v = _reports((out / "report.txt").read_text())[1]
    assert v["statistic"] == "V_hat" and float(v["critical_value"]) > 0


def test_diagnose_logistic(tmp_path, capsys):
    assert main(["diagnose", "--family", "logistic", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "diagnose_logistic.tsv").read_text()
    rows = [ln.split("\t") for ln in text.splitlines() if ln.startswith("scaled_norm")]
    assert len(rows) == 5 and all(r[-1] == "pass" for r in rows)
    ident = [ln for ln in text.splitlines() if ln.startswith("identity_max_error")][0]
    assert float(ident.split("\t")[2]) < 1e-6
    assert text.startswith("# config=khmgof diagnose --family logistic")


def test_diagnose_laplace_degenerate_rows(capsys):
    assert main(["diagnose", "--family", "laplace:1"]) == 0
    rows = [ln.split("\t") for ln in capsys.readouterr().out.splitlines() if ln.startswith("scaled_norm")]
    for r in rows[1:]:
        assert r[4] == "degenerate" and r[5] == "pass"


def test_diagnose_normal_reports_measured_value(capsys):
    main(["diagnose", "--family", "normal"])
    last = [ln.split("\t") for ln in capsys.readouterr().out.splitlines() if ln.startswith("scaled_norm")][-1]
    assert float(last[2]) == pytest.approx(2.10084, abs=1e-4)


def test_console_script_entry_point():
    exe = shutil.which("khmgof")
    cmd = [exe] if exe else [sys.executable, "-m", "khmgof.cli"]
    out = subprocess.run(cmd + ["diagnose", "--family", "t:3"], capture_output=True, text=True)
    assert out.returncode == 0 and "# overall=pass" in out.stdout


@pytest.mark.slow
def test_null_size_of_test_command(tmp_path, capsys):
    cfg = ExperimentConfig(n=200, reps=100, master_seed=314)
    accepted = 0
    for r in range(100):
        f = tmp_path / f"s{r}.csv"
        write_sample_csv(f, sample_model(cfg, r))
        assert main(["test", "--input", str(f), "--out", str(tmp_path / "o")]) == 0
        accepted += _reports((tmp_path / "o" / "report.txt").read_text())[0]["reject"] == "false"
    assert accepted >= 90
