import json
import subprocess
import sys

import pytest

from filtcomod.cli import JOB_SCHEMA, job_to_argv, main
from filtcomod.errors import ValidationError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def test_filtration_dims(capsys):
    out = run_json(capsys, "filtration-dims", "--model", "un", "--N", "3", "--dmax", "4")
    assert [r["dim"] for r in out["rows"]] == [1, 4, 10, 20, 35]
    out = run_json(capsys, "filtration-dims", "--model", "ga", "--dmax", "3")
    assert [r["dim"] for r in out["rows"]] == [1, 2, 3, 4]
    out = run_json(capsys, "filtration-dims", "--model", "gln", "--N", "2", "--dmax", "4")
    assert all(r["lower"] <= r["dim"] <= r["upper"] for r in out["rows"])
    assert [r["dim"] for r in out["rows"]] == [1, 5, 16, 40, 85]


def test_cofinite_type(capsys):
    out = run_json(capsys, "cofinite-type", "--family", "lang_ga", "--p", "2", "--d", "1")
    assert (out["profile"]["fittedDegree"], out["profile"]["leadingCoeff"]) == (1, "1/2")
    out = run_json(capsys, "cofinite-type", "--family", "regular", "--model", "un", "--N", "3", "--dmax", "20")
    assert (out["profile"]["fittedDegree"], out["profile"]["leadingCoeff"]) == (3, "1/6")
    out = run_json(capsys, "cofinite-type", "--family", "primitives")
    assert out["profile"]["fittedDegree"] == "subpolynomial"
    code, text, _ = run(capsys, "cofinite-type", "--family", "lang_ga", "--d", "1", "--dmax", "9", "--format", "csv")
    assert code == 0 and text.splitlines()[:3] == ["d,dim", "0,1", "1,1"]


def test_verdicts(capsys):
    out = run_json(capsys, "verdicts", "--family", "regular")
    assert out["mock"]["witnessHeight"] is None and out["injective"]["witnessHeight"] is None
    out = run_json(capsys, "verdicts", "--family", "lang_ga", "--d", "1")
    assert out["mock"]["witnessHeight"] is None
    assert out["injective"]["verdict"] == "not injective (witness r=1)"
    out = run_json(capsys, "verdicts", "--family", "trivial")
    assert out["mock"]["witnessHeight"] == 1 and out["injective"]["witnessHeight"] == 1


def test_verdicts_from_operator_module(capsys):
    mod = json.dumps({"p": 2, "psi": [[[0, 1], [0, 0]]]})
    out = run_json(capsys, "verdicts", "--module", mod, "--rmax", "1")
    assert out["mock"]["perHeight"]["1"]["free"]


def test_socle(capsys):
    triv = json.dumps({"model": {"kind": "Ga", "p": 2}, "dim": 2, "rho": [[0, 0, 0, "1"], [1, 1, 0, "1"]]})
    assert run_json(capsys, "socle", "--module", triv)["dim"] == 2
    assert run_json(capsys, "socle", "--family", "regular", "--cap", "1")["dim"] == 1
    assert run_json(capsys, "socle", "--family", "quotient", "--d", "2", "--cap", "16")["dim"] == 2


def test_subcoalgebra(capsys):
    out = run_json(capsys, "subcoalgebra", "--model", "ga", "--d", "3", "--elements", '["1"]')
    assert out["dim"] == 1
    out = run_json(capsys, "subcoalgebra", "--model", "ga", "--d", "3", "--elements", '["t"]')
    assert out["formatted"] == ["1", "t"]
    out = run_json(capsys, "subcoalgebra", "--model", "gln", "--N", "2", "--d", "1", "--elements", '["x_1_1"]')
    assert sorted(out["formatted"]) == ["x_1_1", "x_1_2", "x_2_1", "x_2_2"]
    el = {"terms": [{"exps": {"t": 2}, "det": 0, "coeff": "1"}]}
    out = run_json(capsys, "subcoalgebra", "--d", "3", "--elements", json.dumps([el]))
    assert out["formatted"] == ["1", "t^2"]


def test_hom_probe(capsys):
    out = run_json(capsys, "hom-probe", "--family", "lang_ga", "--d", "1")
    assert out["caps"] == [8, 16, 32] and out["imageDim"] == 0
    out = run_json(capsys, "hom-probe", "--family", "trivial", "--caps", "2,4")
    assert out["imageDim"] == 1


def test_job_runner(tmp_path, capsys):
    job = {"command": "cofinite-type", "family": {"kind": "lang_ga", "p": 3, "d": 1}, "dMax": 30}
    path = tmp_path / "job.json"
    path.write_text(json.dumps(job))
    out = run_json(capsys, "run", "--job", str(path))
    assert out["profile"]["leadingCoeff"] == "1/3"
    dest = tmp_path / "out.json"
    assert main(["run", "--job", str(path), "--out", str(dest)]) == 0
    assert json.loads(dest.read_text()) == out


def test_job_schema_rejects_unknown_fields():
    with pytest.raises(ValidationError):
        job_to_argv({"command": "filtration-dims", "extra": 1})
    with pytest.raises(ValidationError):
        job_to_argv({"command": "no-such-command"})
    assert JOB_SCHEMA["additionalProperties"] is False


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"command": "filtration-dims", "bogus": True}))
    assert run(capsys, "run", "--job", str(bad))[0] == 2
    assert run(capsys, "filtration-dims", "--dmax", "5", "--cap", "3")[0] == 3
    assert run(capsys, "cofinite-type", "--family-json", '{"kind": "lang_ga", "p": 2}')[0] == 2
    assert run(capsys, "socle", "--module", str(tmp_path / "missing.json"))[0] == 2
    code, _, err = run(capsys, "socle", "--model", "gln", "--family", "trivial")
    assert code == 2 and "unipotent" in err


def test_determinism(capsys):
    argv = ["verdicts", "--family", "lang_ga", "--d", "1", "--seed", "7"]
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first


def test_pretty_tables(capsys):
    code, text, _ = run(capsys, "filtration-dims", "--model", "gln", "--N", "2", "--dmax", "2", "--pretty")
    assert code == 0 and text.split()[:4] == ["d", "dim", "lower", "upper"]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "filtcomod", "filtration-dims", "--dmax", "2"],
                         capture_output=True, text=True, check=True)
    assert [r["dim"] for r in json.loads(res.stdout)["rows"]] == [1, 2, 3]
