from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import pytest

from muntz import cli

ESS = ["compop", "--phi", "x^2", "--seq", "geom:2,12", "--essnorm", "--no-timestamp"]
EXAMPLE_JOBS = [
    {"subcommand": "seq", "inputs": {"seq": "geom:2,12", "check": ["lacunary"]}},
    {"subcommand": "poly", "inputs": {"action": "expand", "p": "x + x^(s:sqrt2)", "pow": 4, "count": True}},
    {"subcommand": "compop", "inputs": {"phi": "x^2", "seq": "geom:2,12", "essnorm": True}},
]


def _main_json(capsys, argv):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, json.loads(out) if out.strip() else None, err


def test_seq_example(capsys):
    code, out, err = _main_json(capsys, ["seq", "geom:2,12", "--check", "lacunary"])
    assert code == 0 and out == {"gamma": 2.0, "lacunary": True}
    # The resolved job is echoed on stderr.
    echoed = json.loads(err)["job"]
    assert echoed["inputs"]["check"] == ["lacunary"] and echoed["inputs"]["block"] == 3


def test_poly_example(capsys):
    code, out, _ = _main_json(capsys, ["poly", "expand", "--p", "x + x^(s:sqrt2)", "--pow", "4", "--count"])
    assert code == 0 and out == {"terms": 5}


def test_compop_essnorm_example(capsys):
    code, out, _ = _main_json(capsys, ESS)
    assert code == 0
    e = out["essential_norm"]["e"]
    assert all(b <= a for a, b in zip(e, e[1:]))
    assert abs(e[-1] - math.sqrt(0.5)) < 0.01
    formula = out["essential_norm_formula"]
    assert formula["sum"] == pytest.approx(0.5, abs=1e-6)
    assert formula["sqrt_sum"] == pytest.approx(math.sqrt(0.5), abs=1e-6)


def test_console_script_runs_as_a_module():
    proc = subprocess.run(
        [sys.executable, "-m", "muntz", "seq", "geom:2,12", "--check", "lacunary"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout) == {"gamma": 2.0, "lacunary": True}


def test_reports_are_deterministic(tmp_path, capsys):
    path = tmp_path / "r.json"
    blobs = []
    for _ in range(2):
        assert cli.main([*ESS, "--out", str(path)]) == 0
        blobs.append(path.read_bytes())
    capsys.readouterr()
    assert blobs[0] == blobs[1]
    assert "generated_at" not in json.loads(blobs[0])


def test_timestamp_present_by_default():
    res = cli.run({"subcommand": "seq", "inputs": {"seq": "geom:2,5"}})
    assert "generated_at" in res.report and res.report["status"] == "ok"


def test_full_report_envelope(capsys):
    code, out, _ = _main_json(capsys, ["seq", "geom:2,12", "--no-timestamp", "--full"])
    assert code == 0
    assert set(out) >= {"tool", "version", "job", "status", "result"}
    assert out["job"]["inputs"]["check"] == ["lacunary", "gap", "muntz", "quasilacunary"]


def test_unknown_fields_are_rejected():
    res = cli.run({"subcommand": "seq", "inputs": {"seq": "geom:2,5"}, "colour": "red"})
    assert res.code == 1 and "colour" in res.report["error"]["message"]
    res = cli.run({"subcommand": "seq", "inputs": {"seq": "geom:2,5", "bogus": 1}})
    assert res.code == 1 and "bogus" in res.report["error"]["message"]
    res = cli.run({"subcommand": "dance", "inputs": {}})
    assert res.code == 1


def test_domain_errors_are_structured(capsys):
    code = cli.main(["compop", "--phi", "2*x", "--seq", "geom:2,6", "--svals", "--no-timestamp"])
    _, err = capsys.readouterr()
    assert code == 1
    error = json.loads(err.strip().splitlines()[-1])["error"]
    assert error["type"] and error["message"]


def test_parse_errors_are_structured():
    res = cli.run({"subcommand": "poly", "inputs": {"p": "x + + x"}, "timestamp": False})
    assert res.code == 1 and res.report["status"] == "error"
    assert "generated_at" not in res.report


def test_strict_inconclusive_exit_code(monkeypatch):
    job = {"subcommand": "embed", "inputs": {"seq": "geom:2,8"}, "strict": True}
    real = cli.HANDLERS["embed"]

    def only_inconclusive(inp):
        res, notes, _, rows = real({**inp, "classify": False})
        return res, notes, ["inconclusive", "inconclusive"], rows

    monkeypatch.setitem(cli.HANDLERS, "embed", only_inconclusive)
    assert cli.run(job).code == 2
    assert cli.run({**job, "strict": False}).code == 0


def test_strict_with_conclusive_verdicts_exits_zero():
    job = {"subcommand": "compop", "inputs": {"phi": "x/2", "seq": "geom:2,8"}, "strict": True}
    assert cli.run(job).code == 0


def test_plot_data_csv(tmp_path, capsys):
    plot = tmp_path / "p.csv"
    argv = ["compop", "--phi", "1-abs(2*x-1)", "--seq", "geom:2,12", "--classify", "--svals", "10",
            "--emit-plot-data", str(plot), "--no-timestamp"]
    assert cli.main(argv) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["svals"]["n"] == 10
    rows = list(csv.reader(plot.open()))
    assert rows[0] == ["series", "x", "y"]
    svals = [float(r[2]) for r in rows[1:] if r[0] == "sval"]
    assert len(svals) == 10 and all(abs(s - 1) < 1e-8 for s in svals)


def test_plot_data_default_path_follows_out(tmp_path, capsys):
    out = tmp_path / "run.json"
    argv = ["embed", "--seq", "geom:2,12", "--mu", '{"density":"1-x"}', "--n", "10", "--q", "0.5,1,2",
            "--out", str(out), "--emit-plot-data", "--no-timestamp"]
    assert cli.main(argv) == 0
    capsys.readouterr()
    series = {r[0] for r in csv.reader((tmp_path / "run.csv").open())}
    assert series == {"series", "sval", "tail_ratio"}
    rep = json.loads(out.read_text())
    assert set(rep["result"]["schatten"]) == {"0.5", "1.0", "2.0"}


def test_quad_tol_is_echoed_and_applied(capsys):
    code, _, err = _main_json(capsys, ["embed", "--seq", "geom:2,6", "--mu", '{"density":"1-x"}',
                                       "--svals", "--no-classify", "--quad-tol", "1e-6", "--no-timestamp"])
    assert code == 0 and json.loads(err)["job"]["tolerances"]["quad_abs_tol"] == 1e-6


def test_env_tolerance_reaches_quadrature(monkeypatch):
    from muntz import quadrature

    monkeypatch.setenv("MUNTZ_QUAD_TOL", "1e-4")
    assert quadrature.default_abs_tol() == pytest.approx(1e-4)
    with quadrature.abs_tol_override(1e-8):
        assert quadrature.default_abs_tol() == pytest.approx(1e-8)


def test_bundle_of_examples(tmp_path):
    code = cli.report_bundle(EXAMPLE_JOBS, tmp_path, timestamp=False)
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["index.json", "job_000_seq.json", "job_001_poly.json", "job_002_compop.json"]
    index = json.loads((tmp_path / "index.json").read_text())
    assert [j["status"] for j in index["jobs"]] == ["ok", "ok", "ok"]
    assert json.loads((tmp_path / "job_001_poly.json").read_text())["result"] == {"terms": 5}


def test_empty_bundle_is_an_error(tmp_path):
    with pytest.raises(cli.JobError):
        cli.report_bundle([], tmp_path)


def test_bundle_with_a_malformed_job(tmp_path):
    jobs = [EXAMPLE_JOBS[0], {"subcommand": "seq", "inputs": {"seq": "geom:2,5"}, "oops": 1}, EXAMPLE_JOBS[1]]
    code = cli.report_bundle(jobs, tmp_path, timestamp=False)
    index = json.loads((tmp_path / "index.json").read_text())
    assert code == 1 and index["exit_code"] == 1
    assert [j["status"] for j in index["jobs"]] == ["ok", "failed", "ok"]
    assert "oops" in index["jobs"][1]["error"]["message"]


def test_concurrent_bundle_matches_sequential(tmp_path, capsys):
    jobs_file = tmp_path / "jobs.json"
    jobs_file.write_text(json.dumps(EXAMPLE_JOBS))
    seq_dir, par_dir = tmp_path / "seq", tmp_path / "par"
    assert cli.main(["report", str(jobs_file), "--out", str(seq_dir), "--no-timestamp"]) == 0
    assert cli.main(["report", str(jobs_file), "--out", str(par_dir), "--jobs", "3", "--no-timestamp"]) == 0
    capsys.readouterr()
    for path in seq_dir.iterdir():
        assert path.read_bytes() == (par_dir / path.name).read_bytes()


def test_report_rejects_non_list_jobs_file(tmp_path, capsys):
    jobs_file = tmp_path / "jobs.json"
    jobs_file.write_text("{}")
    assert cli.main(["report", str(jobs_file), "--out", str(tmp_path / "o")]) == 1
    assert "error" in json.loads(capsys.readouterr().err)


def test_plain_sanitizes_non_json_values():
    from fractions import Fraction

    assert cli.plain({"a": math.inf, "b": -math.inf, "c": math.nan, "d": Fraction(1, 3), "e": (1, 2)}) == {
        "a": "+inf", "b": "-inf", "c": None, "d": "1/3", "e": [1, 2],
    }
