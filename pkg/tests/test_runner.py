import csv
import json

import pytest

from sumproduct.cli import main
from sumproduct.runner import ConfigError, certificate_for, derive_seed, parse_config, run
from sumproduct.rings import parse_ring

BASIC = {
    "rings": ["zpr:3,2", "zpr:5,2", "polyq:3,2,0,1"],
    "theorems": ["T-mult", "T-special"],
    "seeds": [0, 1, 2, 3, 4],
    "sets": {"A": {"kind": "random-units", "size": 4}, "B": {"kind": "random-units", "size": 3},
             "C": {"kind": "random-units", "size": 3}},
    "functions": {"g": {"func": "random"}, "h": {"func": "random"}},
}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_config_happy_path():
    cfg = parse_config(json.dumps(BASIC))
    assert cfg.rings == BASIC["rings"] and cfg.seeds == [0, 1, 2, 3, 4]
    assert not cfg.certify and cfg.jobs == 1
    assert cfg.functions["g"] == {"func": "random"}
    assert cfg.config_hash == parse_config(json.dumps(BASIC)).config_hash


def test_parse_config_singular_keys_and_defaults():
    cfg = parse_config(json.dumps({"ring": "zpr:5,2", "theorem": "T-add", "seed": 7}))
    assert cfg.rings == ["zpr:5,2"] and cfg.theorems == ["T-add"] and cfg.seeds == [7]
    assert cfg.sets["A"] == {"kind": "random-units", "size": 4}
    assert cfg.functions["h"] == {"func": "constant", "value": 1}


@pytest.mark.parametrize(
    "doc, path",
    [
        ({"rings": ["zpr:4,2"], "theorems": ["T-mult"], "seeds": [0]}, "rings[0]"),
        ({"rings": ["zpr:5,2"], "theorems": ["T-mult"]}, "seed"),
        ({"rings": ["zpr:5,2"], "theorems": ["T-nope"], "seeds": [0]}, "theorems[0]"),
        ({"rings": ["zpr:5,2"], "theorems": ["T-mult"], "seeds": [0], "caps": {"enumeration": 10}}, "rings[0]"),
        ({"rings": ["zpr:3,4"], "certify": True}, "rings[0]"),
        ({"rings": ["zpr:5,2"], "theorems": ["T-mult"], "seeds": ["x"]}, "seeds[0]"),
        ({"rings": ["zpr:5,2"], "theorems": ["T-mult"], "seeds": [0], "sets": {"A": {"kind": "blob"}}}, "sets.A.kind"),
        ({"rings": ["zpr:5,2"], "theorems": ["T-mult"], "seeds": [0], "functions": {"g": {"func": "monomial"}}},
         "functions.g.k"),
        ({}, "rings"),
    ],
)
def test_parse_config_errors_name_the_field(doc, path):
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(doc))
    assert info.value.path == path
    assert str(info.value).startswith(path)


def test_malformed_json():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("{rings: ")


def test_env_cap(monkeypatch):
    monkeypatch.setenv("SUMPRODUCT_MAX_N", "100")
    with pytest.raises(ConfigError, match="max_n"):
        parse_config(json.dumps({"rings": ["zpr:5,2"], "certify": True}))
    assert parse_config(json.dumps({"rings": ["zpr:3,2"], "certify": True})).caps["max_n"] == 100


def test_derive_seed_is_stable():
    assert derive_seed(3, "A") == derive_seed(3, "A") != derive_seed(3, "B")
    assert derive_seed(0, "A") == int.from_bytes(__import__("hashlib").sha256(b"0:A").digest()[:8], "big")


def test_certify_only_config(tmp_path):
    cfg = parse_config(json.dumps({"rings": ["zpr:5,2"]}))
    manifest = run(cfg, tmp_path)
    assert manifest.files == ["certificate_zpr_5_2.json"]
    cert = json.loads((tmp_path / "certificate_zpr_5_2.json").read_text())
    assert cert["bound_holds"] and cert["bound_nontrivial"] and cert["lambda"] <= 500**0.5
    assert cert["degree_deviation"] == 0
    assert json.loads((tmp_path / "manifest.json").read_text())["certificates"][0]["ring"] == "zpr:5,2"


def test_implicit_certificate():
    cert = certificate_for(parse_ring("zpr:3,4"), 4096)
    assert cert["mode"] == "implicit" and cert["lambda"] is None and cert["connected"]


def test_matrix_of_thirty_instances(tmp_path):
    manifest = run(parse_config(json.dumps(BASIC)), tmp_path)
    rows = read_csv(tmp_path / "report.csv")
    assert len(rows) == 30 == len(manifest.instances)
    assert manifest.exit_code == 0 and manifest.errors == 0
    assert all(r["chain_ok"] == "true" for r in rows)
    assert list(rows[0]) == ["ring", "theorem", "seed", "A_size", "B_size", "C_size", "m", "f_size", "BC_size",
                             "e_ST", "S_size", "T_size", "lambda", "chain_ok", "explicit_ok", "delta_emp"]
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["instances"]) == 30 and report["errors"] == []


def test_empty_set_is_recorded_and_run_continues(tmp_path):
    doc = dict(BASIC, rings=["zpr:3,2"], theorems=["T-mult"], seeds=[0, 1])
    doc["sets"] = dict(BASIC["sets"], A={"kind": "explicit", "elements": []})
    manifest = run(parse_config(json.dumps(doc)), tmp_path)
    assert manifest.errors == 2 and manifest.exit_code == 0
    assert "nonempty" in manifest.instances[0]["error"]
    assert read_csv(tmp_path / "report.csv") == []

    doc["seeds"] = [0]
    doc["theorems"] = ["T-mult", "T-add"]
    doc["sets"] = dict(BASIC["sets"])
    doc["sets"]["B"] = {"kind": "explicit", "elements": [3]}
    manifest = run(parse_config(json.dumps(doc)), tmp_path / "b")
    assert [i["status"] for i in manifest.instances] == ["error", "error"]


def test_subgroup_domain_three_sets(tmp_path):
    doc = {"rings": ["zpr:5,2"], "theorems": ["T-three-sets"], "seeds": [1, 2],
           "domain": {"kind": "subgroup", "generator": 7},
           "sets": {r: {"kind": "random-domain", "size": 3} for r in "ABC"},
           "functions": {"g": {"func": "random"}, "h": {"func": "identity"}}}
    manifest = run(parse_config(json.dumps(doc)), tmp_path)
    assert [i["status"] for i in manifest.instances] == ["ok", "ok"]


def test_chain_failure_sets_exit_code(tmp_path, monkeypatch):
    import sumproduct.runner as runner_mod

    monkeypatch.setattr(runner_mod, "certificate_for", lambda ring, max_n: {"ring": ring.label, "lambda": -1e9})
    doc = dict(BASIC, rings=["zpr:3,2"], theorems=["T-special"], seeds=[0])
    manifest = run(parse_config(json.dumps(doc)), tmp_path)
    assert manifest.chain_failures == 1 and manifest.exit_code == 1


def test_reports_are_reproducible(tmp_path):
    cfg = parse_config(json.dumps(BASIC))
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    for name in ["report.csv", "report.json"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_matches_serial(tmp_path):
    doc = dict(BASIC, rings=["zpr:3,2"])
    run(parse_config(json.dumps(doc)), tmp_path / "serial")
    run(parse_config(json.dumps(dict(doc, jobs=2))), tmp_path / "parallel")
    assert (tmp_path / "serial" / "report.csv").read_bytes() == (tmp_path / "parallel" / "report.csv").read_bytes()


# ---------------------------------------------------------------------------
# command line


def test_cli_certify(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["certify", "--ring", "zpr:3,2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["n"] == 81
    assert main(["certify", "--ring", "zpr:3,4", "--mode", "implicit"]) == 0
    assert json.loads(capsys.readouterr().out)["lambda"] is None
    assert main(["certify", "--ring", "zpr:3,4"]) == 2
    assert main(["certify", "--ring", "zpr:4,2"]) == 2


def test_cli_experiment(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(dict(BASIC, rings=["zpr:3,2"])))
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert len(read_csv(tmp_path / "o" / "report.csv")) == 10
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path / "s"), "--seed", "9"]) == 0
    rows = read_csv(tmp_path / "s" / "report.csv")
    assert {r["seed"] for r in rows} == {"9"}
    cfg.write_text(json.dumps({"rings": ["zpr:3,2"], "theorems": ["T-mult"]}))
    assert main(["experiment", "--config", str(cfg)]) == 2
    assert "seed" in capsys.readouterr().err


def test_cli_probe_and_vinh(tmp_path, capsys):
    assert main(["probe-sharpness", "--ring", "zpr:101,1", "--length", "21"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["ratio"] == "4100/2121" and doc["base"] == 2
    assert main(["probe-sharpness", "--ring", "zpr:101,1", "--length", "1", "10"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 2
    out = tmp_path / "v.json"
    assert main(["vinh-check", "--ring", "zpr:101,1", "--size", "20", "--seed", "0", "--count", "5",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["violations"] == 0 and len(doc["checks"]) == 5
