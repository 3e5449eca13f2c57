import io
import json

from einfty.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_trees_enum_jsonl():
    code, out, _ = call("trees", "enum", "--dim", "3")
    assert code == 0
    assert len(out.splitlines()) == 8


def test_diff_linear():
    code, out, _ = call("diff", "--barcode", "[1|2||3]", "--linear-only")
    assert code == 0
    rows = [json.loads(x) for x in out.splitlines()]
    assert {r["term"]: r["coeff"] for r in rows} == {"[1|2|3]": 1, "[1|3|2]": -1, "[3|1|2]": 1}


def test_diff_critical_over_z_is_rejected():
    assert call("diff", "--barcode", "[1|2|||3|4]")[0] == 1
    assert call("diff", "--barcode", "[1|2|||3|4]", "--ring", "f2")[0] == 0


def test_classify_and_bad_cell():
    code, out, _ = call("classify", "--arity", "5", "--height", "2")
    assert code == 0 and json.loads(out)["regular"]
    code, out, _ = call("bad-cell", "--arity", "4", "--height", "inf")
    assert code == 0 and json.loads(out)["cell"]["barcode"] == "[1|2|||3|4]"


def test_counterterm_verify(tmp_path):
    f = tmp_path / "u.json"
    f.write_text(json.dumps(["[[1|||3]|[4||2]]", "[[1||3]|[2|||4]]"]))
    assert call("counterterm", "--barcode", "[1|2|||3|4]", "--verify", str(f))[0] == 0
    f.write_text(json.dumps(["[[1|||3]|[4||2]]"]))
    assert call("counterterm", "--barcode", "[1|2|||3|4]", "--verify", str(f))[0] == 1


def test_homology_with_matrices(tmp_path):
    code, out, _ = call("homology", "--arity", "3", "--height", "inf", "--dmax", "4",
                        "--matrices", str(tmp_path))
    assert code == 0
    ranks = {r["degree"]: r["rank"] for r in map(json.loads, out.splitlines())}
    assert ranks[1] == 2 and not any(v for k, v in ranks.items() if k != 1)
    assert list(tmp_path.glob("*.mtx"))


def test_lie_commands(tmp_path):
    f = tmp_path / "x.json"
    f.write_text(json.dumps([[[1, 2], 1], [[2, 1], -1]]))
    code, out, _ = call("lie", "ree", "--n", "2", "--input", str(f))
    assert code == 0 and json.loads(out)["lie"]
    code, out, _ = call("lie", "quotient", "--n", "3", "--signed")
    assert code == 0 and json.loads(out)["torsion_free"]


def test_error_codes(monkeypatch):
    assert call("bogus")[0] == 1
    assert call("diff", "--barcode", "[1|2|")[0] == 1
    assert call("classify", "--arity", "1", "--height", "2")[0] == 1
    monkeypatch.setenv("EINFTY_CAPACITY", "10")
    assert call("homology", "--arity", "5", "--height", "inf", "--dmax", "6")[0] == 2
