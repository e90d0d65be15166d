import json

import numpy as np
import pytest

from widthlab import io
from widthlab.cli import main
from widthlab.exceptions import ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def files(tmp_path):
    io.write_matrix_csv(tmp_path / "A.csv", np.array([[1.0, 0, 1], [0, 1, 1]]))
    io.write_matrix_csv(tmp_path / "B.csv", np.array([[1.0, 1.0]]))
    (tmp_path / "x.json").write_text("[0, 0, 2]")
    (tmp_path / "y.csv").write_text("i,value\n1,1\n2,1\n")
    return tmp_path


def test_io_roundtrip(tmp_path):
    A = np.array([[0.1, -2.0], [3.0, 1e-17]])
    io.write_matrix_csv(tmp_path / "m.csv", A)
    assert np.array_equal(io.read_matrix_csv(tmp_path / "m.csv"), A)
    (tmp_path / "v.csv").write_text("3,2.5\n1,-1\n")
    assert list(io.read_vector(tmp_path / "v.csv")) == [-1, 0, 2.5]
    assert list(io.read_vector(tmp_path / "v.csv", 4)) == [-1, 0, 2.5, 0]
    (tmp_path / "bad.csv").write_text("2,2\n1,2\n")
    with pytest.raises(ConfigError):
        io.read_matrix_csv(tmp_path / "bad.csv")


def test_recover(capsys, files):
    code, out = run(capsys, "recover", "--matrix-file", str(files / "A.csv"),
                    "--vector-file", str(files / "x.json"))
    assert code == 0 and np.allclose(out["solution"], [0, 0, 2])
    code, out = run(capsys, "recover", "--matrix-file", str(files / "A.csv"),
                    "--rhs-file", str(files / "y.csv"), "--method", "exact", "--p", "0.5")
    assert code == 0 and np.allclose(out["solution"], [0, 0, 1])
    code, out = run(capsys, "recover", "--matrix-file", str(files / "B.csv"), "--rhs-file",
                    str(files / "y.csv"))
    assert code == 4  # length mismatch


def test_recover_tie_is_property_failure(capsys, files):
    (files / "one.json").write_text("[1]")
    code, out = run(capsys, "recover", "--matrix-file", str(files / "B.csv"),
                    "--rhs-file", str(files / "one.json"))
    assert code == 2 and out["status"] == "tie-detected"


def test_rip_and_budget(capsys, files):
    code, out = run(capsys, "rip", "--matrix-file", str(files / "B.csv"), "--s", "2")
    assert code == 0 and out["delta"] == pytest.approx(1)
    code, out = run(capsys, "rip", "--matrix-file", str(files / "A.csv"), "--s", "2",
                    "--budget", "1")
    assert code == 3 and out["error"] == "budget"


def test_nsp(capsys, files, tmp_path):
    code, out = run(capsys, "nsp", "--matrix-file", str(files / "A.csv"), "--s", "1")
    assert code == 0 and out["holds"]
    code, out = run(capsys, "nsp", "--matrix-file", str(files / "B.csv"), "--s", "1",
                    "--out", str(tmp_path / "o"))
    assert code == 2 and out["counterexample"]["verified"]
    assert (tmp_path / "o" / "nsp.json").exists()


def test_pack(capsys, tmp_path):
    code, out = run(capsys, "pack", "--N", "4", "--s", "2")
    assert code == 0 and out["sets"] == [[1, 2], [3, 4]]
    (tmp_path / "f.json").write_text(json.dumps({"N": 3, "s": 2, "sets": [[1, 2], [2, 3]]}))
    code, out = run(capsys, "pack", "--family-file", str(tmp_path / "f.json"))
    assert code == 2 and not out["ok"]


def test_bounds_and_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 1024, "m": 10, "s": 4, "p": 1.0}))
    code, out = run(capsys, "bounds", "--config", str(cfg), "--m", "64")
    assert code == 0
    assert out["rate_band"]["rate"] == pytest.approx(0.2428, abs=1e-4)
    assert out["min_measurements_lp"] == 8
    assert out["lower_bound_constants"]["c1"] == pytest.approx(0.45512, abs=1e-5)
    code, out = run(capsys, "bounds", "--N", "10", "--m", "20")
    assert code == 4


def test_widths_instance(capsys, files):
    code, out = run(capsys, "widths", "--matrix-file", str(files / "B.csv"), "--starts", "4")
    assert code == 0
    assert out["empirical_lower"] == pytest.approx(2**-0.5)
    assert out["empirical_lower"] <= out["certified_upper"]
    assert out["sandwich"]["em_le_C1_upper"]


def test_campaign_commands(capsys, tmp_path):
    cfg = tmp_path / "phase.json"
    cfg.write_text(json.dumps({"N": [16], "m": [8, 16], "s": [1], "trials": 3}))
    code, out = run(capsys, "phase", "--config", str(cfg), "--out", str(tmp_path / "o"),
                    "--seed", "4")
    assert code == 0 and (tmp_path / "o" / "phase.csv").exists()
    cfg.write_text(json.dumps({"N": [16], "trials": 0}))
    code, out = run(capsys, "phase", "--config", str(cfg))
    assert code == 4
    cfg.write_text(json.dumps({"campaign": "widths", "N": [16], "p": [1.0],
                               "options": {"starts": 2}}))
    code, out = run(capsys, "widths", "--config", str(cfg), "--out", str(tmp_path / "w"))
    assert code == 0 and (tmp_path / "w" / "widths.csv").exists()


def test_missing_config_file(capsys, tmp_path):
    code, out = run(capsys, "stability", "--config", str(tmp_path / "nope.json"))
    assert code == 4
