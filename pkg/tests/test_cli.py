from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from genfield import cli, config, suites

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = ROOT / "configs" / "default.json"
FAST = ["ccr", "kg", "spectrum", "wick-compare"]


def _raw():
    return json.loads(DEFAULT.read_text())


def _write(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


def _run(tmp_path, raw, *extra):
    cfg = _write(tmp_path, raw)
    out = tmp_path / "report.json"
    code = cli.main(["run", "--config", cfg, "--out", str(out), *extra])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_fast_suites_pass(tmp_path):
    args = [a for s in FAST for a in ("--suite", s)]
    code, rep = _run(tmp_path, _raw(), *args)
    assert code == 0
    assert [r["suite"] for r in rep["records"]] == sorted(FAST)
    assert rep["summary"]["fail"] == 0 and rep["exit_code"] == 0


def test_failing_suite_exit_1(tmp_path):
    raw = _raw()
    raw["tolerances"] = {"matrix_abs": 1e-300}
    code, rep = _run(tmp_path, raw, "--suite", "spectrum")
    assert code == 1 and rep["records"][0]["status"] == "fail"


@pytest.mark.parametrize("mutate", [
    lambda r: r["grid"].pop("m"),
    lambda r: r.update(colour="blue"),
    lambda r: r["grid"].update(K=4),
    lambda r: r["grid"].update(m=0),
    lambda r: r["grid"].update(d=2),
    lambda r: r.update(n_max=1),
    lambda r: r.update(format_version=2),
    lambda r: r.update(profile="lattice"),
    lambda r: r.update(oracle_expr=["a(0) +* a(1)"]),
    lambda r: r.update(suites=["nope"]),
])
def test_schema_gate_exit_2(tmp_path, mutate, capsys):
    raw = _raw()
    mutate(raw)
    code, rep = _run(tmp_path, raw)
    assert code == 2 and rep is None
    assert "config invalid" in capsys.readouterr().err


def test_missing_and_malformed_files(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "absent.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert cli.main(["run", "--config", str(DEFAULT), "--suite", "bogus"]) == 2


def test_internal_error_exit_3(tmp_path, monkeypatch):
    def boom(ctx):
        raise RuntimeError("kaboom")

    monkeypatch.setitem(suites.SUITES, "kg", (boom, "broken"))
    monkeypatch.setitem(cli.SUITES, "kg", (boom, "broken"))
    code, rep = _run(tmp_path, _raw(), "--suite", "kg")
    assert code == 3
    assert rep["records"][0]["status"] == "error" and "kaboom" in rep["records"][0]["notes"][0]


def test_reruns_are_byte_identical_modulo_runtime():
    cfg = config.load(DEFAULT)
    a, _ = cli.run(cfg, ["adjoint", "gateaux", "leibniz"])
    b, _ = cli.run(cfg, ["adjoint", "gateaux", "leibniz"])
    assert cli.dumps(cli.payload(a)) == cli.dumps(cli.payload(b))
    assert "runtime" in a and "runtime" not in cli.payload(a)


def test_seed_changes_random_payload():
    raw = _raw()
    a, _ = cli.run(config.from_dict(raw), ["gateaux"])
    raw["seed"] = raw["seed"] + 1
    b, _ = cli.run(config.from_dict(raw), ["gateaux"])
    assert a["records"] != b["records"]


def test_suite_rng_is_keyed_by_suite():
    x = suites.suite_rng(5, "gateaux").random(4)
    assert (x == suites.suite_rng(5, "gateaux").random(4)).all()
    assert not (x == suites.suite_rng(5, "leibniz").random(4)).all()


def test_csv_output(tmp_path):
    raw = _raw()
    csv_path = tmp_path / "q.csv"
    code, rep = _run(tmp_path, raw, "--suite", "spectrum", "--csv", str(csv_path))
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "suite,quantity,measured,predicted,tol,pass"
    assert len(lines) - 1 == len(rep["records"][0]["quantities"])
    assert all(l.startswith("spectrum,") for l in lines[1:])


def test_fixed_format_numbers():
    assert cli.fmt(0.1) == "1.000000e-01"
    assert cli.fmt(1 - 2j) == "1.000000e+00-2.000000e+00j"
    assert cli.fmt(3) == 3 and cli.fmt(True) is True and cli.fmt(None) is None


def test_paper_literal_ccr_is_evidence(tmp_path):
    raw = _raw()
    raw["profile"] = "paper-literal"
    code, rep = _run(tmp_path, raw, "--suite", "ccr")
    rec = rep["records"][0]
    assert code == 0 and rec["status"] == "evidence"
    assert any("factor" in n for n in rec["notes"])


def test_oracle_expr_checked(tmp_path):
    raw = _raw()
    raw["oracle_expr"] = ["a(0)*ad(0) + 2*ad(1)*a(2)", "(1,-2)*a(1)^2*ad(0) - 0.5*ad(1)"]
    code, rep = _run(tmp_path, raw, "--suite", "wick-compare")
    assert code == 0
    names = [q["name"] for q in rep["records"][0]["quantities"]]
    assert sum("oracle_expr" in n for n in names) == 2


def test_schema_and_list_commands(capsys):
    assert cli.main(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert schema["additionalProperties"] is False
    assert cli.main(["list-suites"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [l.split()[0] for l in out] == list(config.SUITE_IDS)


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "genfield", "list-suites"], capture_output=True, text=True)
    assert out.returncode == 0 and "phi4-oracle" in out.stdout
