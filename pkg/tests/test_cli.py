import io
import json
import subprocess
import sys

import pytest

from uqcohom.cli import main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    return code, json.loads(text)


def test_h1():
    code, rep = run_json("h1", "--q", "1,1,0.25")
    assert code == 0 and rep["h1_dimension"] == 5
    assert rep["nullspace_crosscheck"]["agrees"]
    assert rep["schema"] == 1 and rep["command"] == "h1"


@pytest.mark.parametrize("argv", [["h1", "--q", "1,0"], ["h1", "--q", "1,-1"], ["h1"]])
def test_input_errors(argv):
    assert run(*argv)[0] == 1


def test_parse_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["h1", "--bogus"])
    assert info.value.code == 1


def test_h2_computed():
    code, rep = run_json("h2", "--q", "1,1,0.64,0.25,0.25", "--nogo-samples", "4")
    assert code == 0
    assert rep["status"] == "Computed" and rep["dimension"] == 7
    assert rep["nogo"]["passed"]
    assert "independence" in rep and "timing" not in rep


def test_h2_timing_flag():
    code, rep = run_json("h2", "--q", "1,0.64,0.25", "--nogo-samples", "2", "--timing")
    assert code == 0 and set(rep["timing"]) == {"assemble", "independence", "nogo"}


def test_h2_unsupported():
    code, rep = run_json("h2", "--q", "1,0.5,0.25")
    assert code == 3
    assert rep["status"] == "UnsupportedGPCase" and rep["bounds"] == [0, 1]
    assert len(rep["gp_probe"]) == 3


def test_h2_shortfall():
    code, rep = run_json("h2", "--q", "1,1,0.3", "--max-samples", "0")
    assert code == 4 and rep["status"] == "SpanShortfall"


def test_h2_deterministic():
    argv = ("h2", "--q", "1,1,0.64,0.25,0.25", "--nogo-samples", "3", "--seed", "5")
    assert run(*argv)[1] == run(*argv)[1]


def test_recurrence_stdout():
    code, text = run("recurrence", "--q", "0.5", "--a", "0.2", "--b", "0.1", "--K", "10")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "k,b_k,ratio,g_k"
    assert len(lines) == 1 + 11 + 1
    assert float(lines[2].split(",")[1]) == pytest.approx(0.3464102, abs=1e-7)
    summary = json.loads(lines[-1][2:])
    assert summary["ratio_converged"] and summary["square_summable"]


def test_recurrence_csv_file(tmp_path):
    path = tmp_path / "rows.csv"
    code, rep = run_json("recurrence", "--q", "0.5", "--a", "0.2", "--b", "0.1", "--K", "5",
                         "--csv", str(path))
    assert code == 0 and rep["max_ab"] == 0.2
    assert len(path.read_text().strip().splitlines()) == 7


def test_recurrence_errors():
    assert run("recurrence", "--q", "0.5", "--a", "0.2", "--b", "0.1", "--K", "1")[0] == 1
    assert run("recurrence", "--q", "0.5", "--a", "1e300", "--b", "1e300", "--K", "50")[0] == 5
    assert run("recurrence", "--q", "1.5", "--a", "0.2", "--b", "0.1")[0] == 1


@pytest.mark.parametrize("kind,extra", [("epsilon", []), ("random", ["--m", "2"]),
                                        ("keyrep", ["--N", "40"]), ("infdim", ["--N", "40"])])
def test_verify_rep(kind, extra):
    q = "1,0.64,0.25" if kind in ("keyrep", "infdim") else "1,1,0.5"
    code, rep = run_json("verify-rep", "--kind", kind, "--q", q, *extra)
    assert code == 0 and rep["passed"]


def test_verify_rep_uncompressed_keyrep_fails():
    code, rep = run_json("verify-rep", "--kind", "keyrep", "--q", "1,0.64,0.25", "--N", "20", "--M", "20")
    assert code == 2 and not rep["passed"]


def test_triples():
    code, rep = run_json("triples", "--q", "1,0.5,0.25,0.125")
    assert code == 0 and len(rep["triples"]) == 2
    assert not any(d["geometric"] for d in rep["details"])


def test_nogo():
    code, rep = run_json("nogo", "--q", "1,1,0.64,0.25,0.25", "--samples", "5")
    assert code == 0 and rep["passed"]


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nq = 1,1,0.25\nmax-samples = 7\nseed=3\n")
    code, rep = run_json("h1", "--config", str(cfg))
    assert code == 0 and rep["h1_dimension"] == 5
    assert rep["config"]["max_samples"] == 7 and rep["config"]["seed"] == 3
    code, rep = run_json("h1", "--config", str(cfg), "--seed", "9", "--q", "1,1,1")
    assert rep["config"]["seed"] == 9 and rep["h1_dimension"] == 9


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no equals sign here\n")
    assert run("h1", "--config", str(cfg))[0] == 1
    assert run("h1", "--config", str(tmp_path / "missing.cfg"))[0] == 1


def test_out_file(tmp_path):
    out = tmp_path / "report.json"
    code, text = run("h1", "--q", "1,0.5", "--out", str(out))
    assert code == 0 and out.read_text() == text
    assert list(tmp_path.iterdir()) == [out]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "uqcohom", "h1", "--q", "1,1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["h1_dimension"] == 4
    proc = subprocess.run([sys.executable, "-m", "uqcohom", "h1", "--q", "1,0"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
