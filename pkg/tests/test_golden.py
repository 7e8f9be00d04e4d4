import json
import os
import shutil

import pytest

from spanlift.errors import InvalidParam
from spanlift.golden import DATA_DIR, NAMES, golden_mutations, golden_path, mutation_candidates, write_golden
from spanlift.logic import RDP, ZCDP, check_derivation, check_proof_file, load_proof

BUDGETS = {"attmean": RDP(2, 0.5), "histogram": ZCDP(0, 0.25), "foldg": ZCDP(0, 0.375)}


@pytest.fixture(scope="module")
def proofs():
    return {name: load_proof(golden_path(name)) for name in NAMES}


@pytest.mark.parametrize("name", NAMES)
def test_golden_accepted(name, proofs):
    pf = proofs[name]
    cert = check_derivation(pf.derivation, strict=True, lemmas=pf.lemmas, programs=pf.programs)
    assert cert.accepted, cert.message
    assert cert.final_budget == BUDGETS[name]
    assert not [a for a in cert.assumptions if a["kind"] == "entailment"]
    again = check_derivation(pf.derivation, strict=True, lemmas=pf.lemmas, programs=pf.programs)
    assert again.dumps() == cert.dumps()


@pytest.mark.parametrize("name", NAMES)
def test_golden_mutations_rejected(name, proofs):
    muts = golden_mutations(proofs[name].derivation)
    assert len(muts) == 10
    kinds = {label.split()[0] for label, _ in muts}
    assert {"grade+10%", "swap", "drop"} <= kinds or len(kinds) >= 2
    for label, d in muts:
        cert = check_derivation(d)
        assert not cert.accepted, label
        assert cert.reason and cert.path


def test_every_grade_bump_rejected(proofs):
    """Not just the sampled ten: every +10% grade perturbation is caught."""
    for name in NAMES:
        for label, d in mutation_candidates(proofs[name].derivation)["grade"]:
            assert not check_derivation(d).accepted, (name, label)


def test_regeneration_is_identical(tmp_path):
    out = write_golden(str(tmp_path))
    for name in NAMES:
        for ext in (".json", ".pw"):
            with open(os.path.join(DATA_DIR, name + ext), encoding="utf-8") as a, \
                    open(os.path.join(tmp_path, name + ext), encoding="utf-8") as b:
                assert a.read() == b.read(), name + ext
        assert out[name].endswith(name + ".json")


def test_program_hash_mismatch(tmp_path):
    for f in ("attmean.json", "attmean.pw"):
        shutil.copy(os.path.join(DATA_DIR, f), tmp_path / f)
    with open(tmp_path / "attmean.pw", "a", encoding="utf-8") as fh:
        fh.write("\n")
    with pytest.raises(InvalidParam) as e:
        check_proof_file(str(tmp_path / "attmean.json"))
    assert e.value.code == "PROGRAM_HASH_MISMATCH"


def test_proof_file_shape():
    with open(golden_path("foldg"), encoding="utf-8") as fh:
        doc = json.load(fh)
    assert doc["format"] == "spanlift-proof/1"
    assert set(doc["proof"]) >= {"rule", "premises", "conclusion"}

    def walk(node):
        yield node
        for p in node.get("premises", []):
            yield from walk(p)

    assert any("side" in n for n in walk(doc["proof"]))
    assert set(doc["proof"]["conclusion"]) >= {"left", "right", "pre", "post", "flavor"}
    assert len(doc["programs"]["foldg"]["sha256"]) == 64
