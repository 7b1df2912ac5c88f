import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given

from mastruct import cli, jsonio
from mastruct.exterior import FLOAT, Form
from mastruct.hitchin import table1_representative
from mastruct.symplectic import random_form

from conftest import exact_forms

ROOT = Path(__file__).resolve().parents[1]
MAN = ROOT / "manifests"


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = cli.main([*map(str, argv), "--json", str(out)])
    return code, json.loads(out.read_text()), out.read_text()


@given(exact_forms())
def test_exact_roundtrip(w):
    text = json.dumps(jsonio.form_to_json(w))
    assert jsonio.form_from_json(json.loads(text)) == w


def test_float_roundtrip(rng):
    w = random_form(3, rng, FLOAT)
    back = jsonio.form_from_json(json.loads(json.dumps(jsonio.form_to_json(w))))
    assert back.allclose(w, 0)


def test_indices_are_one_based():
    obj = jsonio.form_to_json(table1_representative(8))
    assert obj["terms"] == [{"idx": [1, 2, 3], "c": "1"}]


@pytest.mark.parametrize("bad", [
    {"degree": 3, "terms": [{"idx": [1, 2], "c": 1}]},
    {"degree": 3, "terms": [{"idx": [2, 1, 3], "c": 1}]},
    {"degree": 3, "terms": [{"idx": [1, 2, 3], "c": 1}, {"idx": [1, 2, 3], "c": 2}]},
    {"degree": 3, "terms": [{"idx": [1, 2, 7], "c": 1}]},
    {"degree": 3, "terms": [{"idx": [1, 2, 3], "c": "x/y"}]},
    {"degree": 3, "mode": "exact", "terms": [{"idx": [1, 2, 3], "c": 0.5}]},
    {"terms": []},
])
def test_bad_forms_rejected(bad):
    with pytest.raises(jsonio.InputError):
        jsonio.form_from_json(bad)


def test_rational_strings():
    w = jsonio.form_from_json({"degree": 1, "terms": [{"idx": [2], "c": "-3/4"}]})
    assert w[(1,)] == Fraction(-3, 4)


def test_malformed_json_position():
    with pytest.raises(jsonio.InputError, match="line 1, column"):
        jsonio.load_json(MAN / "malformed.json")


def test_dumps_is_sorted_and_stable():
    rep = {"b": Fraction(1, 3), "a": np.array([1.5, 2]), "f": table1_representative(1)}
    assert jsonio.dumps(rep) == jsonio.dumps(dict(reversed(list(rep.items()))))
    assert json.loads(jsonio.dumps(rep))["b"] == "1/3"


def test_classify_row5(tmp_path):
    code, rep, _ = run(tmp_path, "classify", MAN / "table1_row5.json")
    assert code == 0 and rep["orbit"] == "Row5" and rep["signatureQK"] == [0, 3, 3]
    assert rep["conventions"]["qK_over_qLR"] == 2


@pytest.mark.parametrize("row", range(1, 10))
def test_classify_all_rows(tmp_path, row):
    code, rep, _ = run(tmp_path, "classify", MAN / f"table1_row{row}.json")
    assert code == 0 and rep["orbit"] == f"Row{row}"


def test_classify_two_form_is_bad_input(tmp_path):
    code, rep, _ = run(tmp_path, "classify", MAN / "omega_nonneg_degree.json")
    assert code == 2 and "degree" in rep["error"]


def test_classify_malformed_is_bad_input(tmp_path):
    code, rep, _ = run(tmp_path, "classify", MAN / "malformed.json")
    assert code == 2 and "line 1" in rep["error"]


def test_missing_file_is_bad_input(tmp_path):
    code, rep, _ = run(tmp_path, "classify", tmp_path / "nope.json")
    assert code == 2


def test_unknown_flag_is_bad_input():
    assert cli.main(["classify", "--bogus"]) == 2


def test_decompose(tmp_path):
    code, rep, _ = run(tmp_path, "decompose", MAN / "row1_scaled.json")
    assert code == 0 and rep["decomposition"]["kind"] == "hyperbolic"
    assert rep["annihilatorDims"] == [3, 3]


def test_decompose_degenerate_fails(tmp_path):
    code, rep, _ = run(tmp_path, "decompose", MAN / "table1_row8.json")
    assert code == 1 and "degenerate" in rep["error"]


def test_invariants(tmp_path):
    code, rep, _ = run(tmp_path, "invariants", MAN / "special_lagrangian.json")
    assert code == 0 and rep["KinSp6"] and rep["KsquaredIsLambdaId"]
    assert rep["signatureQK"] == [0, 6, 0]


def test_verify_solution_hess_integral(tmp_path):
    code, rep, _ = run(tmp_path, "verify-solution", "--eq", "hess", "--gamma", "1",
                       "--solution", MAN / "hess_integral.json")
    assert code == 0 and rep["passed"] and rep["maxAbsResidual"] < 1e-6


def test_verify_solution_wrong_solution(tmp_path):
    code, rep, _ = run(tmp_path, "verify-solution", "--eq", "hess", "--gamma", "1",
                       "--solution", MAN / "quadratic_diag123.json", "--samples", "5")
    assert code == 1 and rep["maxAbsResidual"] == pytest.approx(5)


def test_verify_solution_table(tmp_path):
    table = {"solution": "table",
             "table": [{"x": [0, 0, 0], "value": 0, "gradient": [0, 0, 0],
                        "hessian": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}]}
    path = tmp_path / "table.json"
    path.write_text(json.dumps(table))
    code, rep, _ = run(tmp_path, "verify-solution", "--eq", "hess", "--solution", path)
    assert code == 0 and rep["samples"] == 1


def test_verify_generalized(tmp_path):
    code, rep, _ = run(tmp_path, "verify-generalized", "--eq", "chynoweth-sewell", "--gamma",
                       "0", "--surface", MAN / "chynoweth_sewell_generalized.json")
    assert code == 0 and rep["passed"]


def test_structure_pseudo(tmp_path):
    code, rep, _ = run(tmp_path, "structure", "--eq", "pseudo")
    assert code == 0 and rep["orbit"] == "Row2" and rep["signatureQK"] == [4, 2, 0]
    assert rep["type"] == "elliptic"


def test_bad_gamma(tmp_path):
    code, rep, _ = run(tmp_path, "structure", "--eq", "hess", "--gamma", "0")
    assert code == 2


@pytest.mark.parametrize("name", ["flat_special_lagrangian.json", "flat_pullback_hess.json"])
def test_local_constancy(tmp_path, name):
    code, rep, _ = run(tmp_path, "local-constancy", MAN / name)
    assert code == 0 and rep["verdict"] == "LocallyConstant"


def test_local_constancy_wrong_expectation(tmp_path):
    code, _, _ = run(tmp_path, "local-constancy", MAN / "flat_special_lagrangian.json",
                     "--expect", "not-locally-constant")
    assert code == 1


def test_matode_cli(tmp_path):
    code, rep, _ = run(tmp_path, "matode", "--box", "0.25", "--step", "0.03125")
    assert code == 0 and rep["residual"] < 1e-5 and rep["G0MinusId"] == 0


def test_matode_bad_step(tmp_path):
    code, _, _ = run(tmp_path, "matode", "--box", "0.5", "--step", "0.3")
    assert code == 2


def test_stenzel_bad_parameters(tmp_path):
    code, _, _ = run(tmp_path, "stenzel", "--c", "-1")
    assert code == 2


def test_stdout_output(capsys):
    assert cli.main(["structure", "--eq", "hess"]) == 0
    assert json.loads(capsys.readouterr().out)["orbit"] == "Row1"


def test_repeated_runs_identical(tmp_path):
    a = run(tmp_path, "verify-solution", "--eq", "hess", "--solution",
            MAN / "hess_integral.json", "--seed", "4")[2]
    b = run(tmp_path, "verify-solution", "--eq", "hess", "--solution",
            MAN / "hess_integral.json", "--seed", "4")[2]
    assert a == b


def test_console_module_entry(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "mastruct", "classify",
                           str(MAN / "table1_row8.json"), "--json", str(out)])
    assert proc.returncode == 0 and json.loads(out.read_text())["orbit"] == "Row8"


def test_schemas_are_valid_json_schema():
    import jsonschema
    for name in ("form", "region", "solution", "surface", "structure"):
        jsonschema.Draft202012Validator.check_schema(jsonio.schema(name))


def test_empty_form_is_zero():
    assert jsonio.form_from_json({"degree": 3, "terms": []}) == Form.zero(3)
