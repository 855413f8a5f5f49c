import json

import pytest

from restart_agd import engine
from restart_agd.cli import main
from restart_agd.experiments import THREADS_ENV, max_workers

pytestmark = pytest.mark.usefixtures("no_mutation")

CERTIFY = ["certify", "--problem", "scalar-quad", "--c", "1", "--L", "10", "--x0", "1",
           "--policy", "grad-next", "--iters", "2000"]


def test_certify_scalar_quadratic_passes(capsys):
    assert main(CERTIFY) == 0
    assert "certificate: pass" in capsys.readouterr().out


def test_config_error_names_field(capsys):
    assert main(["run", "--problem", "quadratic", "--n", "0"]) == 2
    err = capsys.readouterr().err
    assert "n: must be a positive integer" in err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["run", "--frobnicate"]) == 2
    assert "usage:" in capsys.readouterr().err


def test_certify_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setenv(engine.MUTATION_ENV, "momentum-off-by-one")
    assert main(CERTIFY) == 3
    assert "FAIL" in capsys.readouterr().out


def test_coord_on_coupled_problem_needs_opt_in(capsys):
    base = ["run", "--problem", "hinder-lubin-mod", "--m", "12", "--n", "10", "--policy", "coord",
            "--iters", "20"]
    assert main(base) == 2
    assert main(base + ["--allow-nonseparable"]) == 0


def test_outputs_are_reproducible(tmp_path):
    def once(tag):
        csv, cert = tmp_path / f"{tag}.csv", tmp_path / f"{tag}.json"
        assert main(["run", "--problem", "scalar-huber", "--x0", "3", "--iters", "300",
                     "--csv", str(csv), "--certificate", str(cert), "--svg",
                     str(tmp_path / f"{tag}.svg")]) == 0
        return csv.read_bytes(), cert.read_bytes()

    assert once("a") == once("b")
    doc = json.loads((tmp_path / "a.json").read_text())
    assert {"problem", "policy", "schedule", "seed", "checks", "overall_pass"} <= set(doc)
    assert doc["problem"] == "scalar-huber" and doc["overall_pass"] is True


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "quadratic", "n": 6, "seed": 2, "max_iters": 50}))
    csv = tmp_path / "t.csv"
    assert main(["run", "--config", str(cfg), "--iters", "20", "--csv", str(csv)]) == 0
    assert len(csv.read_text().splitlines()) == 22
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"problem": "quadratic", "n": -3}))
    assert main(["run", "--config", str(bad)]) == 2


def test_bench_file_contract(tmp_path, capsys):
    out = tmp_path / "results"
    assert main(["bench", "--suite", "appendix-d", "--seed", "42", "--out", str(out),
                 "--iters", "400"]) == 0
    files = sorted(p.name for p in out.iterdir() if p.suffix in (".csv", ".svg"))
    assert files == ["appendix-d.svg", "appendix-d_grad-next.csv", "appendix-d_grad-prev.csv",
                     "appendix-d_none.csv"]
    summary = json.loads((out / "appendix-d_summary.json").read_text())
    assert set(summary["policies"]) == {"none", "grad-prev", "grad-next"}


def test_sweep_command(tmp_path, capsys):
    out = tmp_path / "sweep.json"
    assert main(["sweep", "--seeds", "2", "--iters", "300", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 12 and all(r["overall_pass"] for r in rows)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "1")
    assert max_workers(8) == 1
    monkeypatch.setenv(THREADS_ENV, "3")
    assert max_workers(8) == 3 and max_workers(2) == 2
    monkeypatch.setenv(THREADS_ENV, "junk")
    assert max_workers(1) == 1
