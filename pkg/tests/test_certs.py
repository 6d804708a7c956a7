import json

import pytest

from regulus import certs, theorems
from regulus.certs import Certificate, CertificateError, Method
from regulus.search import (annihilation_search, census, direct_verify, find_progressions,
                            serre_probe_form)
from regulus.series import EXACT, Series, add, shift
from regulus.theorems import (random_sparse_series, verify_identity_3_1, verify_lemma_3_2,
                              verify_prop_fkmj, verify_prop_j0, verify_uv_commutation)


def _uv():
    extra = {"seed": 11, "size": 300, "terms": 12, "bound": 50}
    f = random_sparse_series(11, 300, 12, 50)
    return verify_uv_commutation(f, 4, 9, extra)


BUILDERS = {
    "identity": lambda: certs.from_report(verify_identity_3_1(2, 5, 300)),
    "fkmj": lambda: certs.from_report(verify_prop_fkmj(2, 5, 1, 300, sturm=True)),
    "j0-proof": lambda: certs.from_report(verify_prop_j0(2, 5, 11520, sturm=True)),
    "lemma": lambda: certs.from_report(verify_lemma_3_2(2, 5, 2, 200)),
    "uv": lambda: certs.from_report(_uv()),
    "hecke": lambda: certs.from_hit(annihilation_search(2, 5, 0, (61, 61), 200)[0]),
    "serre": lambda: certs.from_report(serre_probe_form(2, 5, 0, 241, 1, 5, 60)),
    "progression": lambda: certs.from_progression(direct_verify(5, 5, 4, 5, 300)),
    "hecke-progression": lambda: certs.from_progression(
        find_progressions(5, 5, (7, 7), 100, 100)[0][0]),
    "failed-progression": lambda: certs.from_progression(direct_verify(5, 5, 3, 5, 50)),
    "census": lambda: certs.from_census(census(2, 5, 3000)),
}


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_roundtrip(name, tmp_path, capsys):
    cert = BUILDERS[name]()
    path = certs.emit(cert, str(tmp_path))
    line = capsys.readouterr().out
    assert line.count("\n") == 1 and cert.kind in line
    outcome = certs.check(path)
    assert outcome.ok, outcome.problems
    again = certs.write(BUILDERS[name](), str(tmp_path / "again"))
    assert open(path, "rb").read() == open(again, "rb").read()


def test_methods_reflect_tiers():
    assert BUILDERS["identity"]().method == Method.EXACT_IDENTITY
    assert BUILDERS["fkmj"]().method == Method.COEFFICIENT_SCAN
    proof = BUILDERS["j0-proof"]()
    assert proof.method == Method.STURM_PROOF_GRADE and proof.depth >= proof.sturm_bound
    assert any("weight 10" in a for a in proof.assumptions)
    assert BUILDERS["progression"]().method == Method.DIRECT_ORACLE


def test_failed_check_still_certified():
    cert = BUILDERS["failed-progression"]()
    assert not cert.passed and cert.first_failure["n"] == "0"


def test_canonical_text():
    cert = BUILDERS["lemma"]()
    text = cert.to_json()
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert all(isinstance(v, str) for v in data["params"].values())
    assert Certificate.from_dict(data) == cert


def test_digest_tracks_the_checked_window(monkeypatch):
    base = BUILDERS["identity"]()
    real = theorems.identity_sides

    def bumped(k, m, depth, ring=EXACT):
        lhs, rhs = real(k, m, depth, ring)
        extra = shift(Series.q([1], depth + 1, ring), 24 * 100)
        return add(lhs, extra), add(rhs, extra)

    monkeypatch.setattr(theorems, "identity_sides", bumped)
    changed = certs.from_report(verify_identity_3_1(2, 5, 300))
    assert changed.passed and changed.digest != base.digest


def _tamper(tmp_path, cert, **edits):
    data = cert.to_dict()
    for key, value in edits.items():
        data[key] = value
    path = tmp_path / "t.json"
    path.write_text(json.dumps(data, sort_keys=True))
    return certs.check(str(path))


def test_edited_digest_fails(tmp_path):
    cert = BUILDERS["lemma"]()
    out = _tamper(tmp_path, cert, digest="sha256:" + "0" * 64)
    assert not out.ok and not out.malformed and "digest" in out.problems[0]


def test_flipped_verdict_fails(tmp_path):
    cert = BUILDERS["failed-progression"]()
    out = _tamper(tmp_path, cert, passed=True, first_failure=None)
    assert not out.ok


def test_overclaimed_method_rejected(tmp_path):
    cert = BUILDERS["fkmj"]()
    assert _tamper(tmp_path, cert, method="STURM_PROOF_GRADE").malformed
    assert not _tamper(tmp_path, cert, method="EXACT_IDENTITY").ok
    j0 = BUILDERS["j0-proof"]()
    out = _tamper(tmp_path, j0, method="COEFFICIENT_SCAN")
    assert not out.ok


def test_edited_result_fails(tmp_path):
    cert = BUILDERS["census"]()
    counts = dict(cert.result["counts"], **{"0": "1"})
    assert not _tamper(tmp_path, cert, result={"counts": counts}).ok


def test_edited_provenance_fails(tmp_path):
    cert = BUILDERS["hecke-progression"]()
    prov = dict(cert.provenance, L="11")
    out = _tamper(tmp_path, cert, provenance=prov)
    assert not out.ok and out.malformed


def test_schema_errors(tmp_path):
    cert = BUILDERS["lemma"]()
    assert _tamper(tmp_path, cert, schema_version="other/9").malformed
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert certs.check(str(bad)).malformed
    assert certs.check(str(tmp_path / "missing.json")).malformed


def test_invariants_enforced_on_construction():
    cert = BUILDERS["fkmj"]()
    data = dict(cert.to_dict(), method="STURM_PROOF_GRADE")
    with pytest.raises(CertificateError):
        Certificate.from_dict(data)
    data = dict(cert.to_dict(), kind="NOPE")
    with pytest.raises(CertificateError):
        Certificate.from_dict(data)
