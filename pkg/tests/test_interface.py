import json

import pytest

from contactlax.cli import main
from contactlax.compat import ck_transform, derive
from contactlax.laxfamilies import make_rat
from contactlax.serialize import (
    laxpair_from_json,
    laxpair_to_json,
    pdesystem_from_json,
    pdesystem_to_json,
    prational_from_json,
    prational_to_json,
)


def test_derive_rat_counts(tmp_path, capsys):
    out = tmp_path / "sys.json"
    code = main(["derive", "--family", "rat", "-m", "1", "-n", "1", "--out-json", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "equations: 4" in text and "determined" in text
    data = json.loads(out.read_text())
    assert len(data["equations"]) == 4


def test_derive_ratgp_underdetermined(capsys):
    assert main(["derive", "--family", "ratgp", "-m", "1", "-n", "1"]) == 0
    text = capsys.readouterr().out
    assert "equations: 5" in text and "underdetermined" in text


def test_parameter_error_exit_code():
    assert main(["derive", "--family", "poly", "-m", "0", "-n", "1"]) == 2


def test_usage_error_exit_code():
    assert main(["derive", "--family", "nosuch", "-m", "1", "-n", "1"]) == 2


def test_verify_qsolution(capsys):
    assert main(["verify", "qsolution"]) == 0
    assert "pass (exact zero)" in capsys.readouterr().out


def test_verify_ab(capsys):
    assert main(["verify", "ab", "-m", "1", "-n", "2"]) == 0


def test_verify_theorem1_records_map(capsys):
    assert main(["verify", "theorem1", "-m", "1", "-n", "1"]) == 0
    text = capsys.readouterr().out
    assert "validated maps: solved" in text


def test_verify_rls_mismatch_reported(capsys):
    assert main(["verify", "rls", "-m", "1", "-n", "1"]) == 0
    text = capsys.readouterr().out
    assert "mismatch-reported" in text
    assert "line (w1)_y: mismatch" in text
    assert "line (v1)_t: match" in text


def test_verify_reduce21(capsys):
    assert main(["verify", "reduce21", "--family", "ratgp", "-m", "1", "-n", "1"]) == 0
    assert "pass" in capsys.readouterr().out


def test_ck_command(tmp_path, capsys):
    out = tmp_path / "ck.json"
    assert main(["ck", "--family", "rat", "-m", "1", "-n", "1", "--out-json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["independents"] == ["X", "Y", "Z", "T"]


def test_simulate_constant_and_abort(tmp_path, capsys):
    init = tmp_path / "init.json"
    init.write_text(json.dumps({
        "v1": {"constant": -1.0}, "w1": {"constant": 1.0},
        "a1": {"constant": 1.0}, "b1": {"constant": 0.5},
    }))
    mon = tmp_path / "mon.csv"
    code = main([
        "simulate", "--family", "rat", "-m", "1", "-n", "1", "--grid", "8",
        "--steps", "20", "--dt", "0.01", "--init", str(init),
        "--monitor", str(mon), "--monitor-every", "5",
    ])
    assert code == 0
    assert mon.read_text().startswith("step,T,min_pole_dist,residual_L2,max_field")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "v1": {"constant": -1.0}, "w1": {"constant": -0.95},
        "a1": {"constant": 1.0}, "b1": {"constant": 0.5},
    }))
    code = main([
        "simulate", "--family", "rat", "-m", "1", "-n", "1", "--grid", "8",
        "--steps", "5", "--dt", "0.01", "--init", str(bad),
    ])
    assert code == 3


def test_export_and_roundtrip(tmp_path, capsys):
    out = tmp_path / "lax.json"
    assert main(["export", "--family", "ratgp", "-m", "2", "-n", "1", "--what", "lax", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    again = laxpair_to_json(laxpair_from_json(data))
    assert again == data


@pytest.mark.parametrize("family,m,n,form", [
    ("rat", 1, 1, "coefficients"),
    ("rat", 1, 1, "residues"),
    ("ratgp", 1, 1, "coefficients"),
    ("poly", 2, 1, "coefficients"),
])
def test_pdesystem_json_roundtrip(family, m, n, form):
    sys = derive(family, m, n, form=form)
    data = pdesystem_to_json(sys)
    back = pdesystem_from_json(data)
    assert back.unknowns == sys.unknowns
    assert back.independents == sys.independents
    assert len(back.equations) == len(sys.equations)
    for a, b in zip(back.equations, sys.equations):
        assert a == b
    assert pdesystem_to_json(back) == data


def test_ck_system_json_roundtrip_preserves_original():
    sys = ck_transform(derive("rat", 1, 1, form="residues"))
    data = pdesystem_to_json(sys)
    back = pdesystem_from_json(data)
    orig = back.provenance["original_system"]
    for a, b in zip(orig.equations, sys.provenance["original_system"].equations):
        assert a == b


def test_prational_json_roundtrip():
    lax = make_rat(2, 1)
    for r in (lax.F, lax.G):
        data = prational_to_json(r)
        back = prational_from_json(data)
        assert back == r
        assert prational_to_json(back) == data


def test_goldens_present_and_marked():
    from importlib.resources import files

    base = files("contactlax").joinpath("paper-transcriptions")
    for name in ("rational_system_m1_n1.json", "rational_system_m2_n1.json"):
        doc = json.loads(base.joinpath(name).read_text())
        assert "NEVER regenerate" in doc["warning"]
        assert doc["lines"]


def test_simulate_manufactured_mode(tmp_path, capsys):
    conv = tmp_path / "conv.csv"
    code = main([
        "simulate", "--family", "rat", "-m", "1", "-n", "1",
        "--manufactured", "--convergence", str(conv),
    ])
    assert code == 0
    lines = conv.read_text().strip().splitlines()
    assert lines[0] == "study,level,error,order"
    assert any(l.startswith("temporal") for l in lines)
    assert any(l.startswith("spatial") for l in lines)


def test_simulate_requires_init_without_manufactured():
    assert main(["simulate", "--family", "rat", "-m", "1", "-n", "1"]) == 2
