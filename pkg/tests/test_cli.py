import json

import pytest

from tecrepeater.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_station(capsys):
    code, out, _ = run(capsys, "station", "-n", "2", "-m", "2", "--eta0", "0.9", "--e", "0.0")
    assert code == 0
    doc = json.loads(out)
    assert doc["tool"] == "tecrepeater"
    assert doc["config"]["n"] == 2
    assert doc["station"]["p0"] == pytest.approx(0.9477, abs=1e-4)


@pytest.mark.parametrize("argv", [
    ["station", "-n", "1"],
    ["station", "--eta0", "1.2"],
    ["station", "--e", "0.6"],
    ["rate", "--n-stations", "0"],
    ["bogus"],
])
def test_invalid_arguments_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        rc = main(argv)
        raise SystemExit(rc)
    assert exc.value.code == 1


def test_rate(capsys):
    code, out, _ = run(capsys, "rate", "--n-stations", "210", "--e", "5e-4", "--dx-form", "literal", "--samples", "20000")
    assert code == 0
    doc = json.loads(out)
    assert doc["l_tot_km"] == pytest.approx(442.5, abs=0.1)
    assert doc["fg"]["k_logical"] >= doc["cg"]["k_logical"]
    assert doc["cg_beats_plob"] and doc["fg_beats_plob"]
    assert doc["r_direct"] < doc["r_plob"] < doc["r_tgw"]


def test_cap_refusal_exit_3(capsys):
    code, _, err = run(capsys, "rate", "--n-stations", "30", "--method", "FG_exact")
    assert code == 3
    assert "cap" in err


def test_cutoff(capsys, tmp_path):
    out = tmp_path / "cut.json"
    code, _, _ = run(capsys, "cutoff", "--e", "1e-3", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["method"] == "CG" and doc["n_star"] > 0


def test_verify_pass_and_fail(capsys, tmp_path):
    code, out, err = run(capsys, "verify", "--eta0", "0.9", "--e", "0.02", "--trials", "300000", "--seed", "1")
    assert code == 0
    assert "D_X adjudication -> consistent" in err
    doc = json.loads(out)
    assert doc["report"]["ok"]
    assert doc["dx_adjudication"]["line"].startswith("D_X adjudication -> ")

    run(capsys, "station", "--eta0", "0.9", "--e", "0.02", "--out", str(tmp_path / "t.json"))
    table = json.loads((tmp_path / "t.json").read_text())
    for row in table["station"]["rows"]:
        row["ex"] = min(row["ex"] * 2 + 0.01, 0.5)
    (tmp_path / "bad.json").write_text(json.dumps(table))
    code, out, err = run(capsys, "verify", "--table", str(tmp_path / "bad.json"), "--trials", "300000")
    assert code == 2
    assert "D_X adjudication" in err
    assert not json.loads(out)["report"]["ok"]


def test_config_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"eta0": 0.8, "seed": 11}))
    monkeypatch.setenv("TECREP_SEED", "5")
    monkeypatch.setenv("TECREP_WORKERS", "1")
    _, out, _ = run(capsys, "station", "--config", str(cfg))
    c = json.loads(out)["config"]
    assert c["eta0"] == 0.8 and c["seed"] == 11
    _, out, _ = run(capsys, "station", "--config", str(cfg), "--eta0", "0.7")
    assert json.loads(out)["config"]["eta0"] == 0.7
    _, out, _ = run(capsys, "station")
    assert json.loads(out)["config"]["seed"] == 5
    cfg.write_text(json.dumps({"nonsense": 1}))
    code, _, _ = run(capsys, "station", "--config", str(cfg))
    assert code == 1


def test_sweep_deterministic_csv(capsys, tmp_path):
    args = ["sweep", "--e", "1e-3", "--eta0-range", "0.9", "0.95", "0.05", "--l-range", "100", "400", "100",
            "--samples", "500"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b), "--workers", "2")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0].startswith("eta0,l_tot_km,N")
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert meta["code"] == {"n": 2, "m": 2}
    code, out, _ = run(capsys, *args, "--format", "json", "--no-fg")
    assert code == 0 and len(json.loads(out)["cells"]) == 8
