import json
from pathlib import Path

import pytest

from gencontact import cli, manifest

MANIFESTS = Path(cli.__file__).parent / "manifests"

GOLDEN = {
    "heisenberg_sasakian": 0,
    "flat_cokahler": 1,
    "malformed_expression": 2,
    "contact_explicit": 1,
    "classical_explicit": 1,
    "heisenberg_cone": 1,
    "real_line_product": 1,
}


@pytest.mark.parametrize("name, code", sorted(GOLDEN.items()))
def test_golden_manifest_exit_codes(name, code, capsys):
    assert cli.main(["verify", str(MANIFESTS / f"{name}.ini"), "--samples", "10"]) == code


def test_malformed_manifest_reports_line(capsys):
    cli.main(["verify", str(MANIFESTS / "malformed_expression.ini")])
    err = capsys.readouterr().err
    assert "line 6" in err


def test_json_report_layout(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = cli.main(["verify", str(MANIFESTS / "heisenberg_sasakian.ini"), "--samples", "10", "--json", str(out)])
    rep = json.loads(out.read_text())
    assert code == rep["exit_code"] == 0
    assert rep["schema_version"] == cli.SCHEMA_VERSION
    assert [c["name"] for c in rep["checks"]] == ["axioms", "normal", "sasakian"]
    assert all(c["status"] == "PASS" for c in rep["checks"])
    assert rep["provenance"]["samples"] == 10 and rep["provenance"]["seed"] == 42
    assert len(rep["manifest"]["sha256"]) == 64


def test_reports_are_reproducible():
    path = str(MANIFESTS / "flat_cokahler.ini")
    a, b = cli.run(path, samples=8), cli.run(path, samples=8)
    a.pop("generated_at"), b.pop("generated_at")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_flags_override_manifest_settings():
    path = str(MANIFESTS / "heisenberg_sasakian.ini")
    rep = cli.run(path, samples=5, seed=7, tol=1e-6, route="phi")
    prov = rep["provenance"]
    assert (prov["samples"], prov["seed"], prov["route"]) == (5, 7, "phi")
    assert prov["tolerances"]["tol"] == 1e-6
    # the phi route gives pi_M = 0 on the Heisenberg chart, so (d eta) pi_M has zero spectrum
    sas = [c for c in rep["checks"] if c["name"] == "sasakian"][0]
    assert sas["details"]["route"] == "phi"
    assert sas["details"]["spectrum_at_first_point"] == [[0.0, 0.0]] * 3


def test_failing_checks_are_listed(capsys):
    cli.main(["verify", str(MANIFESTS / "heisenberg_cone.ini"), "--samples", "5"])
    out = capsys.readouterr().out
    assert "FAIL  cone-kahler" in out and "failing conditions" in out


def test_builtins_command(capsys):
    assert cli.main(["builtins"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [l.split()[0] for l in lines] == ["heisenberg_sasakian", "flat_cokahler", "contact_heisenberg", "real_line"]


def test_describe_command(capsys):
    assert cli.main(["describe", "cone-kahler"]) == 0
    out = capsys.readouterr().out
    for i in range(1, 5):
        assert f"({i})" in out
    assert cli.main(["describe", "bogus"]) == 2


def test_missing_manifest_is_an_error(tmp_path, capsys):
    assert cli.main(["verify", str(tmp_path / "none.ini")]) == 2


def test_unknown_check_has_line_number():
    with pytest.raises(manifest.ManifestError) as err:
        manifest.check_list(manifest.parse_text("[structure]\nbuiltin = real_line\n[checks]\nfoo =\n"))
    assert err.value.line == 4


def test_entry_outside_section_has_line_number():
    with pytest.raises(manifest.ManifestError) as err:
        manifest.parse_text("# comment\nkey = 1\n")
    assert err.value.line == 2


def test_classical_axiom_failure_is_an_error(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("[chart]\ncoords = x, y, z\n[structure]\nkind = classical\n"
                 "phi = \"0, -1, 1; 1, 0, 0; 0, 0, 0\"\nxi = \"0, 0, 1\"\neta = \"0, 0, 1\"\n[checks]\naxioms =\n")
    assert cli.main(["verify", str(p)]) == 2
    assert "phi(xi)" in capsys.readouterr().err


def test_bad_flag_values_are_rejected():
    with pytest.raises(SystemExit) as err:
        cli.main(["verify", "x.ini", "--samples", "0"])
    assert err.value.code == 2
