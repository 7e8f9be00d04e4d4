import json
import math
import os
import shutil
import subprocess
import sys

import jsonschema
import pytest

from spanlift.cli import main, parse_flavor, parse_spec
from spanlift.golden import DATA_DIR

NUM = {"type": ["number", "string"]}  # "inf" is written as a string

CERT_SCHEMA = {
    "type": "object",
    "required": ["format", "tool_version", "verdict", "strict", "nodes", "assumptions", "programs"],
    "properties": {
        "verdict": {"enum": ["ACCEPTED", "REJECTED"]},
        "final_budget": {"type": "object", "required": ["kind"]},
        "assumptions": {"type": "array"},
        "nodes": {"type": "integer", "minimum": 1},
    },
}
DIV_SCHEMA = {
    "type": "object",
    "required": ["family", "params", "value", "certificate"],
    "properties": {"value": NUM, "family": {"enum": ["RENYI", "ZCDP", "TCDP", "DP"]}},
}
ORACLE_SCHEMA = {
    "type": "object",
    "required": ["flavor", "output", "claimed", "max_observed", "slack", "within_budget", "inputs"],
    "properties": {
        "within_budget": {"type": "boolean"},
        "inputs": {"type": "array", "items": {"type": "object", "required": ["index", "observed", "slack"]}},
    },
}
ACCOUNT_SCHEMA = {
    "type": "object",
    "required": ["route", "epsilon", "delta", "intermediate"],
    "properties": {"route": {"type": "string"}, "intermediate": {"type": "object"}},
}


def data(name):
    return os.path.join(DATA_DIR, name)


def run(capsys, *argv, schema=None):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    doc = json.loads(out) if out.strip() else None
    if schema is not None:
        jsonschema.validate(doc, schema)
    return code, doc, err


# -- parsing ---------------------------------------------------------------------------------


def test_parse_helpers():
    assert parse_flavor("zCDP:0,0.375").rho == 0.375
    assert parse_flavor("dp:1,1e-6").delta == 1e-6
    assert parse_spec("RENYI:2").alpha == 2
    from spanlift.cli import UsageError

    for bad in ("zCDP", "XX:1,2", "DP:1"):
        with pytest.raises(UsageError):
            parse_flavor(bad)
    with pytest.raises(UsageError):
        parse_spec("KL:1")


# -- check -------------------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["attmean", "histogram", "foldg"])
def test_check_golden(capsys, name):
    code, doc, _ = run(capsys, "check", f"golden:{name}", "--strict", schema=CERT_SCHEMA)
    assert code == 0 and doc["verdict"] == "ACCEPTED"


def test_check_mutated_and_missing(capsys, tmp_path):
    with open(data("attmean.json"), encoding="utf-8") as fh:
        doc = json.load(fh)
    doc["proof"]["conclusion"]["flavor"]["rho"] = 0.4
    shutil.copy(data("attmean.pw"), tmp_path / "attmean.pw")
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    code, cert, err = run(capsys, "check", tmp_path / "bad.json", schema=CERT_SCHEMA)
    assert code == 1 and cert["reason"] == "BAD_GRADE_ARITHMETIC" and "REJECTED" in err
    code, out, err = run(capsys, "check", tmp_path / "nope.json")
    assert code == 2 and out is None and "error" in err
    (tmp_path / "junk.json").write_text("{not json")
    assert run(capsys, "check", tmp_path / "junk.json")[0] == 2


def test_check_program_override(capsys, tmp_path):
    other = tmp_path / "attmean.pw"
    other.write_text(open(data("attmean.pw"), encoding="utf-8").read() + "\n")
    code, _, err = run(capsys, "check", "golden:attmean", "--program", f"attmean={other}")
    assert code == 2 and "sha256" in err


# -- divergence ------------------------------------------------------------------------------


def test_divergence_fixtures(capsys):
    code, doc, _ = run(capsys, "divergence", "RENYI:2", data("bern_half.json"), data("bern_quarter.json"),
                       schema=DIV_SCHEMA)
    assert code == 0 and doc["value"] == pytest.approx(math.log(4 / 3), abs=1e-12)
    code, doc, _ = run(capsys, "divergence", "RENYI:2", data("bern_half.json"), data("bern_half.json"))
    assert doc["value"] <= 0
    code, doc, _ = run(capsys, "divergence", "ZCDP:0", data("bern_true.json"), data("bern_quarter.json"),
                       schema=DIV_SCHEMA)
    # every Renyi order of a point mass against Bern(1/4) is ln 4; the sup of D/alpha sits at alpha -> 1
    assert code == 0 and doc["value"] == pytest.approx(math.log(4), abs=1e-6)
    code, doc, _ = run(capsys, "divergence", "ZCDP:0", data("bern_half.json"), data("bern_true.json"),
                       schema=DIV_SCHEMA)
    assert doc["value"] == "inf"
    code, doc, _ = run(capsys, "divergence", "ZCDP:0", data("bern_half.json"), data("bern_quarter.json"))
    assert doc["certificate"] is not None


def test_divergence_bits_and_errors(capsys, tmp_path):
    code, doc, _ = run(capsys, "divergence", "RENYI:2", data("bern_half.json"), data("bern_quarter.json"), "--bits")
    assert doc["units"] == "bits" and doc["value"] == pytest.approx(math.log2(4 / 3), abs=1e-12)
    assert run(capsys, "divergence", "RENYI:0.5", data("bern_half.json"), data("bern_half.json"))[0] == 2
    assert run(capsys, "divergence", "FOO:2", data("bern_half.json"), data("bern_half.json"))[0] == 2
    (tmp_path / "bad.json").write_text(json.dumps({"support": [{"outcome": {"bool": True}, "mass": 2.0}]}))
    assert run(capsys, "divergence", "RENYI:2", tmp_path / "bad.json", data("bern_half.json"))[0] == 2


# -- oracle ----------------------------------------------------------------------------------------


@pytest.fixture()
def coin(tmp_path):
    prog = tmp_path / "coin.pw"
    prog.write_text("vars { b: bool; p: real; } b <-$ Bern(p)\n")
    inputs = {"output": "b", "pairs": [{"left": {"p": 0.5}, "right": {"p": 0.25}}]}
    (tmp_path / "in.json").write_text(json.dumps(inputs))
    return prog, tmp_path / "in.json"


def test_oracle_exit_codes(capsys, coin, tmp_path):
    prog, inputs = coin
    code, doc, _ = run(capsys, "oracle", prog, prog, inputs, "--flavor", "RDP:2,0.3", schema=ORACLE_SCHEMA)
    assert code == 0 and doc["max_observed"] == pytest.approx(math.log(4 / 3), abs=1e-12)
    code, doc, _ = run(capsys, "oracle", prog, prog, inputs, "--flavor", "RDP:2,0.3", "--budget", "0",
                       schema=ORACLE_SCHEMA)
    assert code == 1 and not doc["within_budget"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"output": "b", "pairs": [{"left": {"p": "x"}, "right": {"p": 0.25}}]}))
    assert run(capsys, "oracle", prog, prog, bad, "--flavor", "RDP:2,0.3")[0] == 2
    bad.write_text(json.dumps({"output": "b", "pairs": [{"left": {"q": 1.0}, "right": {"p": 0.25}}]}))
    assert run(capsys, "oracle", prog, prog, bad, "--flavor", "RDP:2,0.3")[0] == 2
    pre = tmp_path / "pre.json"
    pre.write_text(json.dumps({"output": "b", "pre": "p@1 == p@2",
                               "pairs": [{"left": {"p": 0.5}, "right": {"p": 0.25}}]}))
    code, _, err = run(capsys, "oracle", prog, prog, pre, "--flavor", "RDP:2,0.3")
    assert code == 2 and "pre-condition" in err


def test_oracle_missing_grid(capsys, tmp_path):
    prog = tmp_path / "g.pw"
    prog.write_text("vars { y: real; m: real; } y <-$ Gauss(m, 1.0)\n")
    inputs = tmp_path / "in.json"
    inputs.write_text(json.dumps({"output": "y", "pairs": [{"left": {"m": 0}, "right": {"m": 1}}]}))
    code, _, err = run(capsys, "oracle", prog, prog, inputs, "--flavor", "zCDP:0,0.5")
    assert code == 2 and "grid" in err
    code, doc, _ = run(capsys, "oracle", prog, prog, inputs, "--flavor", "zCDP:0,0.5",
                       "--grid", "y=0.5,12,481", schema=ORACLE_SCHEMA)
    assert code == 0 and doc["max_observed"] == pytest.approx(0.5, abs=5e-3)


# -- config ------------------------------------------------------------------------------------------


def test_config_file_and_override(capsys, tmp_path):
    prog = tmp_path / "g.pw"
    prog.write_text("vars { y: real; m: real; } y <-$ Gauss(m, 1.0)\n")
    inputs = tmp_path / "in.json"
    inputs.write_text(json.dumps({"output": "y", "pairs": [{"left": {"m": 0}, "right": {"m": 1}}]}))
    cfg = tmp_path / "run.ini"
    cfg.write_text("[spanlift]\ngrid = y=0.5,12,481\nbits = true\nfuel = 3\n")
    code, doc, _ = run(capsys, "oracle", prog, prog, inputs, "--flavor", "zCDP:0,0.5", "--config", cfg)
    assert code == 0 and doc["units"] == "bits"
    assert doc["max_observed"] == pytest.approx(0.5 / math.log(2), abs=1e-2)
    # a flag wins over the file
    code, doc, _ = run(capsys, "oracle", prog, prog, inputs, "--flavor", "zCDP:0,0.5", "--config", cfg,
                       "--grid", "y=0.5,12,3")
    assert doc["inputs"][0]["support"] == [3, 3]
    assert run(capsys, "oracle", prog, prog, inputs, "--config", tmp_path / "none.ini")[0] == 2


def test_out_file(capsys, tmp_path):
    out = tmp_path / "cert.json"
    code = main(["check", "golden:foldg", "--out", str(out)])
    assert code == 0 and capsys.readouterr().out == ""
    jsonschema.validate(json.loads(out.read_text()), CERT_SCHEMA)


# -- account and compare-foldg -----------------------------------------------------------------------


def test_account_commands(capsys):
    code, doc, _ = run(capsys, "account", "compose", "DP:1,1e-6", "DP:0.5,0", schema=ACCOUNT_SCHEMA)
    assert code == 0 and doc["epsilon"] == 1.5 and doc["delta"] == 1e-6
    code, doc, _ = run(capsys, "account", "convert", "zCDP:0,0.5", "--to", "DP", "--delta", "1e-5",
                       schema=ACCOUNT_SCHEMA)
    assert doc["epsilon"] == pytest.approx(5.2985, abs=1e-4)
    assert doc["intermediate"]["assumptions"]
    code, doc, _ = run(capsys, "account", "convert", "RDP:2,0.1", "--delta", "1e-5", schema=ACCOUNT_SCHEMA)
    assert doc["epsilon"] == pytest.approx(11.6129, abs=1e-4)
    code, doc, _ = run(capsys, "account", "group", "DP:0.4,0", "-k", "2", schema=ACCOUNT_SCHEMA)
    assert doc["epsilon"] == pytest.approx(0.8)
    code, doc, _ = run(capsys, "account", "advanced", "--epsilon", "0.2", "--delta1", "1e-7", "-K", "100",
                       "--delta2", "1e-5", schema=ACCOUNT_SCHEMA)
    assert doc["epsilon"] == pytest.approx(13.597, abs=1e-3)
    assert run(capsys, "account", "group", "tCDP:3,0.1")[0] == 2
    assert run(capsys, "account", "convert", "zCDP:0,0.5", "--delta", "1e-5", "--not-lossless")[0] == 2
    assert run(capsys, "account", "convert", "DP:1,0", "--to", "tCDP")[0] == 2
    assert run(capsys, "account", "advanced", "--epsilon", "0.2")[0] == 2


def test_compare_foldg(capsys):
    code, doc, _ = run(capsys, "compare-foldg", "-K", "100", "--sigma", "10", "--delta1", "1e-7",
                       "--delta2", "1e-5")
    assert code == 0 and doc["zcdp"]["epsilon"] == pytest.approx(5.30, abs=5e-3) and doc["zcdp_better"]
    for part in ("zcdp", "zcdp_matched", "advanced"):
        jsonschema.validate(doc[part], ACCOUNT_SCHEMA)
    assert run(capsys, "compare-foldg", "--delta2", "0.5")[0] == 2


# -- report directory --------------------------------------------------------------------------------


def test_report_dir(capsys, tmp_path, coin):
    rd = tmp_path / "rep"
    assert run(capsys, "compare-foldg", "-K", "20", "--report-dir", rd)[0] == 0
    assert run(capsys, "check", "golden:attmean", "--report-dir", rd)[0] == 0
    assert run(capsys, "divergence", "RENYI:2", data("bern_half.json"), data("bern_quarter.json"),
               "--report-dir", rd)[0] == 0
    prog, inputs = coin
    assert run(capsys, "oracle", prog, prog, inputs, "--flavor", "RDP:2,0.3", "--report-dir", rd)[0] == 0
    assert run(capsys, "account", "convert", "zCDP:0,0.5", "--delta", "1e-5", "--report-dir", rd)[0] == 0
    files = set(os.listdir(rd))
    for f in ("compare_foldg.csv", "compare_foldg.png", "check_nodes.csv", "check_rules.png",
              "divergence.csv", "divergence.png", "oracle.csv", "oracle.png", "account.csv",
              "account_curve.csv", "account_curve.png"):
        assert f in files and os.path.getsize(rd / f) > 0, f
    with open(rd / "compare_foldg.csv", encoding="utf-8") as fh:
        assert len(fh.read().splitlines()) >= 3


def test_console_script():
    exe = shutil.which("spanlift")
    cmd = [exe] if exe else [sys.executable, "-m", "spanlift.cli"]
    res = subprocess.run(cmd + ["account", "compose", "zCDP:0,0.1", "zCDP:0,0.2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["intermediate"]["budget"]["rho"] == pytest.approx(0.3)
