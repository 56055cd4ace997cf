import json
import subprocess
import sys

import numpy as np
import pytest

from su2pdo.cli import main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_transform_constant(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kind": "constant", "value": [2.0, 0.0]}))
    code, out = run(["transform", str(p), "--lmax", "1", "--parseval"], capsys)
    d = json.loads(out)
    assert code == 0 and d["parseval_gap"] < 1e-12
    assert d["blocks"][0]["matrix"] == [[[pytest.approx(2.0), pytest.approx(0.0, abs=1e-13)]]]
    assert all(np.max(np.abs(b["matrix"])) < 1e-13 for b in d["blocks"][1:])


def test_roundtrip_files(tmp_path, capsys):
    rng = np.random.default_rng(0)
    blocks = [{"twice_ell": tl, "matrix": rng.standard_normal((tl + 1, tl + 1, 2)).tolist()}
              for tl in range(7)]
    src = tmp_path / "c.json"
    src.write_text(json.dumps({"kind": "fourier_coefficients", "twice_ell_max": 6,
                               "blocks": blocks}))
    f, back = tmp_path / "f.json", tmp_path / "b.json"
    assert main(["synthesize", str(src), "--out", str(f)]) == 0
    assert main(["transform", str(f), "--out", str(back)]) == 0
    b = json.loads(back.read_text())
    err = max(np.max(np.abs(np.array(x["matrix"]) - np.array(y["matrix"])))
              for x, y in zip(blocks, b["blocks"]))
    assert err < 1e-10


def test_diff_sublaplacian(capsys):
    code, out = run(["diff", "--builtin", "SubLap", "--op", "D12", "--lmax", "3"], capsys)
    d = json.loads(out)
    assert code == 0 and d["kind"] == "left_invariant"
    assert d["blocks"][-1]["edge"] is True
    M = np.array(d["blocks"][2]["matrix"])
    # -sigma_{d-} = sigma_{J+}: superdiagonal sqrt 2 at l = 1
    assert np.allclose(M[1, 0, 0], np.sqrt(2)) and np.allclose(M[2, 1, 0], np.sqrt(2))


def test_diff_identity_is_zero(capsys):
    code, out = run(["diff", "--builtin", "I", "--alpha", "1", "0", "0", "1", "--lmax", "2"], capsys)
    d = json.loads(out)
    inner = [b for b in d["blocks"] if not b["edge"]]
    assert inner and all(np.max(np.abs(b["matrix"])) < 1e-14 for b in inner)


def test_classify(capsys):
    code, out = run(["classify", "--builtin", "SubLap", "--lmax", "32"], capsys)
    assert abs(json.loads(out)["m"] - 2) < 0.1
    code, out = run(["classify", "--builtin", "SubLap", "--lmax", "32", "--parametrix"], capsys)
    d = json.loads(out)
    assert abs(d["m"] + 1) < 0.15 and abs(d["rho"] - 0.5) < 0.1
    code, out = run(["classify", "--builtin", "I", "--lmax", "16", "--format", "csv"], capsys)
    assert out.splitlines()[0] == "alpha,beta,slope,residual"


def test_hypoel_exit_codes(capsys):
    code, out = run(["hypoel", "--name", "Heat", "--lmax", "24"], capsys)
    assert code == 0 and json.loads(out)["verdict"] is True
    code, out = run(["hypoel", "--name", "Schrodinger-", "--lmax", "24"], capsys)
    d = json.loads(out)
    assert code == 1 and d["classification"]["witnesses"]


def test_parametrix_command(capsys):
    code, out = run(["parametrix", "--builtin", "Heat", "--lmax", "4"], capsys)
    d = json.loads(out)
    assert code == 0 and d["singular_ells"] == [0.0]


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["transform", str(bad)]) == 2
    assert main(["transform", str(tmp_path / "missing.json")]) == 2
    assert main(["diff", "--builtin", "Nope"]) == 2
    assert main(["classify", "--builtin", "SubLap", "--lmax", "200"]) == 2


def test_band_limit_error(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kind": "constant", "value": 1.0}))
    f = tmp_path / "f.json"
    assert main(["transform", str(p), "--lmax", "1"]) == 0
    capsys.readouterr()
    code = main(["synthesize", str(p)])  # wrong kind
    assert code == 2
    main(["transform", str(p), "--lmax", "1", "--out", str(tmp_path / "co.json")])
    main(["synthesize", str(tmp_path / "co.json"), "--out", str(f)])
    assert main(["transform", str(f), "--lmax", "3"]) == 3


def test_env_default(monkeypatch, capsys):
    monkeypatch.setenv("SU2PDO_FORMAT", "csv")
    code, out = run(["catalog"], capsys)
    assert code == 0 and out.startswith("name,order")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "su2pdo", "catalog"], capture_output=True, text=True)
    assert r.returncode == 0 and "SubLap" in r.stdout


def test_deterministic_output(capsys):
    a = run(["classify", "--builtin", "Heat", "--lmax", "16", "--seed", "3"], capsys)
    b = run(["classify", "--builtin", "Heat", "--lmax", "16", "--seed", "3"], capsys)
    assert a == b
