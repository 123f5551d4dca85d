import csv
import hashlib
import io
import json

import numpy as np
import pytest

from thermocat.cli import main
from thermocat.unitary import random_energy_preserving

P1 = {"energies": [0, 0.2, 0.5], "state": [0.35, 0.55, 0.1]}


def write(tmp_path, doc, name="spec.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_curve(tmp_path, capsys):
    code, out, _ = run(capsys, "curve", write(tmp_path, P1))
    assert code == 0
    elbows = [r for r in csv_rows(out) if r["kind"] == "elbow"]
    assert len(elbows) == 4
    assert float(elbows[1]["x"]) == pytest.approx(0.337584537799)
    gibbs = {"energies": [0, 0.2, 0.5], "state": list(np.exp(-np.array([0, 0.2, 0.5])) / np.exp(-np.array([0, 0.2, 0.5])).sum())}
    code, out, _ = run(capsys, "curve", write(tmp_path, gibbs, "g.json"))
    assert [(r["x"], r["y"]) for r in csv_rows(out) if r["kind"] == "elbow"] == [("0", "0"), ("1", "1")]


def test_spec_hash_and_determinism(tmp_path, capsys):
    path = write(tmp_path, P1)
    _, first, _ = run(capsys, "extremes", path)
    _, second, _ = run(capsys, "extremes", path)
    assert first == second
    doc = json.loads(first)
    expected = hashlib.sha256(json.dumps(P1, sort_keys=True).encode()).hexdigest()
    assert doc["meta"]["spec_sha256"] == expected
    assert doc["meta"]["version"] == "0.1.0"


def test_extremes_barycentric(tmp_path, capsys):
    code, out, _ = run(capsys, "extremes", write(tmp_path, P1), "--class", "eto")
    assert code == 0
    doc = json.loads(out)
    assert doc["source_barycentric"] == pytest.approx([0.390, 0.025], abs=1e-3)
    bary = np.array([v["barycentric"] for v in doc["vertices"]])
    assert np.min(np.max(np.abs(bary - [-0.184, 0.097]), axis=1)) < 1e-3
    assert all(v["provenance"] for v in doc["vertices"])


def test_extremes_other_classes(tmp_path, capsys):
    g = np.exp(-np.array([0, 0.2, 0.5]))
    code, out, _ = run(capsys, "extremes", write(tmp_path, {"energies": [0, 0.2, 0.5], "state": list(g / g.sum())}), "--class", "to")
    assert code == 0 and len(json.loads(out)["vertices"]) == 1
    qubit = {"energies": [0, 0.7], "state": [0, 1]}
    code, out, _ = run(capsys, "extremes", write(tmp_path, qubit, "q.json"), "--class", "mto")
    rows = sorted(tuple(v["populations"]) for v in json.loads(out)["vertices"])
    gq = 1 / (1 + np.exp(-0.7))
    assert rows[0] == (0, 1) and rows[1] == pytest.approx((gq, 1 - gq))


def test_majorize(tmp_path, capsys):
    spec = dict(P1, target=[0.4, 0.35, 0.25])
    code, out, _ = run(capsys, "majorize", write(tmp_path, spec))
    doc = json.loads(out)
    assert code == 0
    assert doc["thermomajorises"] == doc["gibbs_stochastic_feasible"]
    code, _, err = run(capsys, "majorize", write(tmp_path, P1, "n.json"))
    assert code == 2 and "target" in err


def test_catalysis_trajectory_reference_instance(tmp_path, capsys):
    spec = dict(P1, catalyst={"dim": 2, "distribution": [0.381634229931062, 0.618365770068938]})
    code, out, _ = run(capsys, "catalysis", write(tmp_path, spec))
    assert code == 0
    rows = csv_rows(out)
    final = rows[-1]
    q = [float(final[f"system[{i}]"]) for i in (1, 2, 3)]
    assert q == pytest.approx([0.2179, 0.5180, 0.2641], abs=1e-3)
    assert float(final["mutual_information"]) < 1e-6
    assert "# initial composite beta-order (2*2, 2*1, 1*2, 1*1, 3*2, 3*1)" in out


def test_catalysis_empty_sequence(tmp_path, capsys):
    spec = dict(P1, catalyst={"dim": 2, "distribution": [0.5, 0.5]}, options={"sequence": []})
    code, out, _ = run(capsys, "catalysis", write(tmp_path, spec))
    assert code == 0 and len(csv_rows(out)) == 1


def test_catalysis_scan_count(tmp_path, capsys):
    spec = {"energies": [0, 0.5], "state": [0.2, 0.8], "catalyst": {"dim": 2, "distribution": "scan"}, "options": {"grid_points": 11}}
    code, out, _ = run(capsys, "catalysis", write(tmp_path, spec))
    assert code == 0 and len(csv_rows(out)) == 11


def test_cooling_trivial(tmp_path, capsys):
    spec = {"energies": [0, 0.4, 0.5], "beta": 1.0, "options": {"beta_h": 1.0, "dims": [1, 2]}}
    code, out, _ = run(capsys, "cooling", write(tmp_path, spec))
    assert code == 0
    assert all(float(r["beta_c"]) == 1.0 for r in csv_rows(out))


def test_decompose(tmp_path, capsys):
    h0 = [0.0, 0.0, 1.0, 1.0, 1.0]
    u = random_energy_preserving(np.array(h0), np.random.default_rng(3))
    (tmp_path / "u.json").write_text(json.dumps({"real": u.real.tolist(), "imag": u.imag.tolist()}))
    code, out, _ = run(capsys, "decompose", write(tmp_path, {"energies": h0, "matrix_file": "u.json"}))
    doc = json.loads(out)
    assert code == 0 and doc["reconstruction_error"] <= 1e-10
    assert len(doc["factors"]) <= doc["factor_bound"]
    (tmp_path / "i.csv").write_text("1,0\n0,1\n")
    code, out, _ = run(capsys, "decompose", write(tmp_path, {"energies": [0, 1], "matrix_file": "i.csv"}, "i.json"))
    assert code == 0 and json.loads(out)["factors"] == []
    (tmp_path / "x.csv").write_text("0,1\n1,0\n")
    code, _, err = run(capsys, "decompose", write(tmp_path, {"energies": [0, 1], "matrix_file": "x.csv"}, "x.json"))
    assert code == 3 and "commute" in err


def test_spec_errors(tmp_path, capsys):
    assert run(capsys, "curve", write(tmp_path, "{bad"))[0] == 2
    assert run(capsys, "curve", write(tmp_path, {"energies": [0, 1], "state": [0.5, 0.2, 0.3]}, "a.json"))[0] == 2
    assert run(capsys, "curve", write(tmp_path, {"energies": [1, 0], "state": [0.5, 0.5]}, "b.json"))[0] == 2
    assert run(capsys, "curve", write(tmp_path, {"state": [0.5, 0.5]}, "c.json"))[0] == 2


def test_budget_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("THERMOCAT_BUDGET", "2")
    assert run(capsys, "extremes", write(tmp_path, P1))[0] == 4


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, "-o", str(target), "curve", write(tmp_path, P1))
    assert code == 0 and out == "" and target.read_text().startswith("# thermocat")
