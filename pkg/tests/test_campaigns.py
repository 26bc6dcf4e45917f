from __future__ import annotations

import json
import os

import numpy as np
import pytest

from cohomolocal import campaigns as cp
from cohomolocal import cohomology as co
from cohomolocal.cli import main
from cohomolocal.groups import closure, from_spec
from cohomolocal.zq import Modulus

SMALL = {
    "OracleEquivalence": {"samples": 12, "max_order": 200},
    "PrimeCaseExhaustive": {"primes": [2, 3]},
    "CounterexampleSearch": {"n": 2, "p": 2, "l": 2, "expect_witness": True},
    "SylowLemma": {"lattices": [[2, 2, 1]], "samples": 8, "max_order": 200},
    "ScalarCriterion": {"samples": 8, "moduli": [3, 5, 9], "dims": [1, 2], "max_order": 400},
    "BlockLemma": {"samples": 4, "moduli": [3, 4], "max_order": 2000},
    "TensorLemma": {"samples": 3, "moduli": [3, 4], "max_order": 2000},
    "Theorem14Check": {"p": 5, "samples": 4, "include_catalog": False, "max_order": 2000},
}


def _run(kind, jobs=1, **kw):
    d = {"kind": kind, "seed": 3, **SMALL[kind], **kw}
    return cp.run_campaign(d, jobs=jobs)


@pytest.mark.parametrize("kind", cp.KINDS)
def test_each_kind_passes_on_a_small_run(kind):
    rep = _run(kind)
    assert rep["schema"] == cp.SCHEMA
    assert rep["verdict"] == "pass", rep["violations"]
    assert rep["summary"]["instances"] == len(rep["records"]) > 0
    keys = [json.dumps(r["key"]) for r in rep["records"]]
    assert len(set(keys)) == len(keys)


def test_reports_are_byte_identical_across_job_counts():
    a = cp.dumps(_run("OracleEquivalence", jobs=1))
    b = cp.dumps(_run("OracleEquivalence", jobs=2))
    c = cp.dumps(_run("OracleEquivalence", jobs=1))
    assert a == b == c


def test_seed_changes_instances():
    a = _run("OracleEquivalence")
    b = _run("OracleEquivalence", seed=4)
    assert [r["key"] for r in a["records"]] != [r["key"] for r in b["records"]]


def test_timings_are_opt_in():
    rep = _run("OracleEquivalence", samples=3)
    assert all("seconds" not in r for r in rep["records"])
    rep = _run("OracleEquivalence", samples=3, timings=True)
    assert all("seconds" in r for r in rep["records"])


def test_spec_validation():
    with pytest.raises(cp.SpecError):
        cp.CampaignSpec.from_dict({"kind": "Nope"})
    with pytest.raises(cp.SpecError):
        cp.CampaignSpec.from_dict({"kind": "OracleEquivalence", "colour": 1})
    with pytest.raises(cp.SpecError):
        cp.CampaignSpec.from_dict({"kind": "OracleEquivalence", "families": ["weird"]})
    with pytest.raises(cp.SpecError):
        cp.CampaignSpec.from_dict([1, 2])
    with pytest.raises(cp.SpecError):
        cp.run_campaign({"kind": "ScalarCriterion", "samples": 1, "moduli": [4]})


def test_records_agree_across_campaigns():
    """The same group gets the same local invariants whichever campaign evaluates it."""
    seen = {}
    for kind in ("OracleEquivalence", "SylowLemma", "ScalarCriterion"):
        for r in _run(kind)["records"]:
            k = json.dumps(r["key"])
            if k in seen:
                assert seen[k] == r["h1loc"]
            seen[k] = r["h1loc"]


def test_records_reproduce_from_their_group_spec():
    for r in _run("SylowLemma")["records"][:10]:
        G = from_spec(r["group"])
        assert G.order == r["order"]
        assert co.h1loc(G).invariants == r["h1loc"]


def test_search_finds_witness_with_local_generator_values():
    rep = _run("CounterexampleSearch")
    wit = cp.witnesses(rep)
    assert wit and rep["summary"]["nontrivial_h1loc"] == len(wit)
    for r in wit[:5]:
        G = from_spec(r["group"])
        vals = np.array(r["witness_cocycle"]["generator_values"]).reshape(-1)
        fr = co.frame(G)
        c = fr.expand(vals)
        assert c.is_cocycle() and c.satisfies_local_conditions()
        assert co.is_coboundary(c) is None


def test_search_without_witness_is_flagged():
    rep = cp.run_campaign({"kind": "CounterexampleSearch", "n": 2, "p": 3, "l": 1,
                           "expect_witness": True})
    assert rep["verdict"] == "fail"
    assert rep["violations"][0]["message"] == "no witness found"


def test_block_lemma_lifts_witness():
    rep = _run("BlockLemma")
    lifted = [r["lifted_witness"] for r in rep["records"] if "lifted_witness" in r]
    assert lifted
    for w in lifted:
        assert w["is_cocycle"] and w["is_local"] and not w["is_coboundary"]


def test_evaluate_flags_violations():
    # a group with nontrivial local cohomology fed to the prime-case check
    W = cp.witness_group()
    rec = cp.evaluate(cp._task(W, "witness", "prime"))
    assert rec["violations"]
    rec = cp.evaluate(cp._task(closure([[[1, 1], [0, 1]]], Modulus(3, 1)), "J", "prime"))
    assert not rec["violations"]


# ----------------------------------------------------------------------- CLI

@pytest.fixture
def spec_file(tmp_path):
    def write(obj, name="g.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)
    return write


def test_cli_group_and_cohomology(spec_file, capsys):
    path = spec_file({"p": 3, "n": 2, "generators": [[1, 1, 0, 1]]})
    assert main(["group", "info", path]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["order"] == 3
    assert main(["cohom", "h1", path]) == 0
    assert json.loads(capsys.readouterr().out)["h1"] == [3]
    assert main(["cohom", "h1loc", "--oracle", path]) == 0
    assert json.loads(capsys.readouterr().out)["h1loc"] == []
    assert main(["module", "structure", path]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "ReducibleIndecomposable"


def test_cli_exit_codes(spec_file, tmp_path, capsys):
    bad = spec_file({"p": 4, "n": 2, "generators": []}, "bad.json")
    assert main(["group", "info", bad]) == 2
    assert main(["group", "info", str(tmp_path / "missing.json")]) == 2
    assert main(["frobnicate"]) == 2
    big = spec_file({"p": 5, "n": 2, "generators": [[1, 1, 0, 1], [0, 1, 4, 0], [2, 0, 0, 1]]})
    assert main(["--element-cap", "10", "group", "info", big]) == 3
    camp = spec_file({"kind": "CounterexampleSearch", "p": 3, "expect_witness": True}, "c.json")
    out = str(tmp_path / "r.json")
    assert main(["campaign", "run", camp, "-o", out]) == 1
    camp = spec_file({"kind": "OracleEquivalence", "samples": 3}, "ok.json")
    assert main(["campaign", "run", camp, "-o", out, "--jobs", "2", "--seed", "1"]) == 0
    assert json.loads(open(out).read())["campaign"]["seed"] == 1
    bad_camp = spec_file({"kind": "Nope"}, "n.json")
    assert main(["campaign", "run", bad_camp, "-o", out]) == 2
    capsys.readouterr()


def test_cli_catalog(tmp_path):
    out = tmp_path / "cat.json"
    assert main(["construct", "catalog", "-n", "2", "-p", "3", "-o", str(out)]) == 0
    entries = json.loads(out.read_text())
    assert {e["name"] for e in entries} >= {"SL2", "GL2", "borel"}


def test_cli_does_not_leak_the_element_cap(spec_file, capsys):
    path = spec_file({"p": 3, "n": 2, "generators": [[1, 1, 0, 1]]})
    before = os.environ.get("COHOM_ELEMENT_CAP")
    assert main(["--element-cap", "50", "group", "info", path]) == 0
    assert os.environ.get("COHOM_ELEMENT_CAP") == before
    capsys.readouterr()
