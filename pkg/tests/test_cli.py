import json
import subprocess
import sys

import numpy as np
import pytest

from quasilab.cli import main
from quasilab.io import read_json, read_profile
from quasilab.radial import Certificate


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_converges(capsys):
    code, out, _ = run(capsys, "classify", "--n", "3", "--p", "2", "--f", "power:4", "--eps", "1")
    data = json.loads(out)
    assert code == 0
    assert data["verdict"] == "converges" and data["value"] == 1.0 and data["sigma"] == 3.0


def test_classify_diverges_and_bad_regime(capsys):
    assert run(capsys, "classify", "--n", "3", "--p", "2", "--f", "power:3")[0] == 10
    code, _, err = run(capsys, "classify", "--n", "3", "--p", "3", "--f", "power:4")
    assert code == 2 and "UnsupportedRegime" in err


def test_classify_table(capsys, tmp_path):
    # t^4 sampled on a dyadic table classifies numerically
    t = np.exp2(-np.arange(60.0))[::-1]
    table = tmp_path / "f.csv"
    table.write_text("t,f\n" + "".join(f"{a:.17g},{a ** 4:.17g}\n" for a in t))
    code, out, _ = run(capsys, "classify", "--n", "3", "--p", "2", "--f", f"table:{table}")
    assert code == 0 and json.loads(out)["verdict"] == "converges"


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("problem.n = 3\nproblem.p = 2\nf = power:3\n")
    assert run(capsys, "classify", "--config", str(cfg))[0] == 10
    assert run(capsys, "classify", "--config", str(cfg), "--f", "power:5")[0] == 0


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("problem.n = 3\nproblem.colour = red\n")
    code, _, err = run(capsys, "classify", "--config", str(cfg))
    assert code == 2 and "run.cfg:2" in err


def test_non_monotone_table(capsys, tmp_path):
    table = tmp_path / "f.csv"
    table.write_text("t,f\n0,0\n0.5,0.3\n1,0.1\n")
    code, _, err = run(capsys, "construct", "--n", "3", "--p", "2", "--f", f"table:{table}")
    assert code == 2 and "MonotonicityViolation" in err


def test_construct_writes_artifacts(capsys, tmp_path):
    out_dir = tmp_path / "run"
    code, out, _ = run(capsys, "construct", "--n", "3", "--p", "2", "--f", "power:4",
                       "--eps", "1", "--out", str(out_dir))
    assert code == 0
    cert = Certificate.from_dict(read_json(out_dir / "certificate.json"))
    assert cert.passed and cert.sup_u <= 0.5
    u = read_profile(out_dir / "u.csv")
    assert u.values[0] == cert.sup_u
    assert (out_dir / "u.csv").read_text().startswith("r,u\n")
    assert (out_dir / "F.csv").exists()


def test_construct_refusal(capsys):
    assert run(capsys, "construct", "--n", "3", "--p", "2", "--f", "power:3")[0] == 10


def test_construct_search_exhausted(capsys):
    code = run(capsys, "construct", "--n", "4", "--p", "3", "--f", "power:10",
               "--delta0", "1e6", "--max-iters", "1")[0]
    assert code == 12


def test_certify(capsys):
    code, out, _ = run(capsys, "certify", "--n", "3", "--p", "2", "--f", "power:4",
                       "--delta", "1")
    assert code == 0 and json.loads(out)["pass"] is True
    code, out, _ = run(capsys, "certify", "--n", "3", "--p", "2", "--f", "power:4",
                       "--delta", "100")
    assert code == 15


def test_wolff(capsys):
    code, out, _ = run(capsys, "wolff", "--f", "indicator", "--n", "3", "--p", "2", "--d", "0")
    assert code == 0
    assert json.loads(out)["W"] == pytest.approx(6.283185307179586, rel=1e-12)


def test_wolff_divergent_mass(capsys):
    assert run(capsys, "wolff", "--f", "decay:3", "--n", "3", "--p", "2", "--d", "1")[0] == 14


def test_wolff_csv(capsys):
    code, out, _ = run(capsys, "wolff", "--n", "3", "--p", "2", "--f", "indicator", "--d", "0,2", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "d,W,near,far"


def test_hardy(capsys):
    code, out, _ = run(capsys, "hardy", "--profile", "exp", "--n", "3", "--p", "2")
    data = json.loads(out)
    assert code == 0
    assert data["ratio"] == pytest.approx(2.0, rel=1e-9) and data["sharp"] == 4.0


def test_galerkin(capsys):
    code, out, _ = run(capsys, "galerkin", "--p", "2", "--n", "3", "--f-forcing", "indicator",
                       "--R", "50", "--cells", "2000")
    assert code == 0 and json.loads(out)["final_error"] <= 1e-3


def test_harnack(capsys):
    code, out, _ = run(capsys, "harnack", "--n", "3", "--p", "2", "--f", "indicator", "--lambda", "1",
                       "--radii", "1,2,4")
    assert code == 0
    assert run(capsys, "harnack", "--f", "indicator", "--lambda", "3")[0] == 2


def test_reports_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        assert main(["classify", "--n", "3", "--p", "2", "--f", "powerlog:3,2", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quasilab", "classify", "--n", "3", "--p", "2",
                           "--f", "power:4"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["verdict"] == "converges"
