import csv
import json

import jsonschema
import pytest

from derand import reports
from derand.cli import main

SCHEMA = reports.load_schema()


def run(argv, tmp_path, name="report.json"):
    path = tmp_path / name
    code = main(["--report", str(path), *argv])
    doc = json.loads(path.read_text()) if path.exists() else None
    if doc is not None:
        jsonschema.validate(doc, SCHEMA)
    return code, doc


def _strip_timing(doc):
    doc = dict(doc)
    doc.pop("timing")
    return doc


FOOL = ["fool", "--n", "8", "--ell", "1", "--eps", "0.5", "--t", "2", "--k-h", "2", "--polys", "2", "--exact"]


def test_fool_exact_report(tmp_path):
    code, doc = run(FOOL + ["--decompose"], tmp_path)
    assert code == 0 and doc["exact"] is True and doc["passed"]
    row = doc["result"]["polynomials"][0]
    assert {"w1", "eps_target", "exact", "decomposition"} <= set(row)
    assert {"pruning", "hybrid"} <= set(row["decomposition"])
    assert doc["result"]["params"]["label"] == "overridden"


def test_determinism(tmp_path):
    _, a = run(FOOL, tmp_path, "a.json")
    _, b = run(FOOL, tmp_path, "b.json")
    assert _strip_timing(a) == _strip_timing(b)
    assert reports.dumps(_strip_timing(a)) == reports.dumps(_strip_timing(b))


def test_failing_check_exits_one(tmp_path, capsys):
    code, doc = run(["fool", "--n", "8", "--ell", "1", "--eps", "0.001", "--t", "2", "--k-h", "1", "--polys", "2"],
                    tmp_path)
    assert code == 1 and not doc["passed"]
    assert "lipschitz-fooling[0]" in capsys.readouterr().err


def test_usage_errors_exit_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["graph", "build", "--n", "4"])
    assert exc.value.code == 2
    assert main(["--report", str(tmp_path / "x.json"), "graph", "build", "--n", "4", "--d", "2", "--eps", "0.5"]) == 2
    assert main(["--report", str(tmp_path / "x.json"), "graph", "audit", str(tmp_path / "missing.json"),
                 "--delta", "0.05"]) == 2


def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eps": 0.05, "rng_seed": 7}))
    code, doc = run(["--config", str(cfg), "graph", "build", "--n", "3", "--d", "1", "--eps", "0.1"], tmp_path)
    assert code == 0 and doc["config"]["eps"] == 0.05 and doc["config"]["rng_seed"] == 7
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["--config", str(cfg), "graph", "build", "--n", "3", "--d", "1", "--eps", "0.1"]) == 2


def test_prg_sample(tmp_path):
    base = ["prg", "sample", "--n", "8", "--ell", "1", "--eps", "0.5", "--t", "4", "--k-h", "2"]
    code, doc = run(base + ["--seed", "0x1f"], tmp_path, "a.json")
    assert code == 0 and len(doc["result"]["output"]) == 8
    assert set(doc["result"]["output"]) <= {-1, 1}
    _, again = run(base + ["--seed", "1f"], tmp_path, "b.json")
    assert again["result"]["output"] == doc["result"]["output"]
    _, many = run(base + ["--count", "3"], tmp_path, "c.json")
    assert len(many["result"]["outputs"]) == 3


def test_graph_pipeline(tmp_path):
    g = tmp_path / "g.json"
    spectrum = tmp_path / "spectrum.csv"
    code, doc = run(["graph", "build", "--n", "3", "--d", "1", "--eps", "0.1", "--out", str(g), "--csv", str(spectrum)],
                    tmp_path, "build.json")
    assert code == 0 and g.exists()
    rows = list(csv.reader(spectrum.open()))
    assert rows[0] == ["coset_rep_hex", "degree", "lambda"] and len(rows) == 17
    code, doc = run(["graph", "audit", str(g), "--delta", "0.05"], tmp_path, "audit.json")
    assert code == 0 and "table" not in doc["result"]
    adj = next(e for e in doc["entries"] if e["claim"] == "adjacent-inner-product")
    assert adj["asserted"] is False
    code, doc = run(["graph", "fold", str(g)], tmp_path, "fold.json")
    assert code == 0 and doc["result"]["orbits"] == 9
    code, doc = run(["graph", "cut", str(g), "--b", "0.25"], tmp_path, "cut.json")
    assert code == 0 and doc["exact"] and doc["result"]["phi"] > 0


def test_gap_command(tmp_path):
    out = tmp_path / "gap.json"
    code = main(["gap", "--n", "4", "--d", "2", "--eps", "0.1", "--b", "0.3333333333", "--rounds", "2",
                 "--tensor", "3", "--out", str(out)])
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, SCHEMA)
    assert code == 0
    claims = {e["claim"] for e in doc["entries"]}
    assert {"cloud-eigenvalue", "near-orthogonal-mass", "matching", "balance", "objective"} <= claims
    assert doc["result"]["feasible"] is False and doc["result"]["gap"] is None


def test_audit_all(tmp_path):
    code, doc = run(["audit-all"], tmp_path)
    assert code == 0 and doc["passed"]


def test_schema_rejects_unlabeled_monte_carlo():
    bad = reports.make_report("x", {}, {}, [{"claim": "c", "measured": 1, "bound": None, "status": "NA",
                                            "asserted": False, "exact": False}], exact=False, seconds=0)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(json.loads(reports.dumps(bad)), SCHEMA)
    with pytest.raises(ValueError):
        reports.entry("c", 1, exact=False)
