import json
import subprocess
import sys

import numpy as np
import pytest

from curvlab.cli import EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, main, parse_curve
from curvlab.tensorfile import read_tensor

FAST = ["--samples", "500", "--restarts", "3"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_models_fubini_study_1(capsys):
    code, out, _ = run(capsys, "models", "fubini_study", "-n", "1")
    assert code == EXIT_OK
    header, record = out.splitlines()[:2]
    assert header.split()[:3] == ["CURVLAB-TENSOR", "1", "1"]
    assert [float(x) for x in record.split()[4:]] == [2.0, 0.0]


def test_models_structured_and_file(tmp_path, capsys):
    path = tmp_path / "ball.json"
    code, out, _ = run(capsys, "models", "complex_ball", "-n", "2", "--format", "structured",
                       "--out", str(path))
    assert code == EXIT_OK and out == ""
    assert read_tensor(path).entries[0, 0, 0, 0] == -2


def test_models_bad_sign_class(capsys):
    code, _, err = run(capsys, "models", "random", "--sign-class", "sort-of-positive")
    assert code == EXIT_INPUT and "unknown sign class" in err


def test_usage_error_exit_code(capsys):
    assert run(capsys, "models")[0] == 2
    assert run(capsys, "classify", "--samples", "0", "--in", "x")[0] == EXIT_INPUT


@pytest.mark.parametrize("model,sign", [("complex_ball", "negative"), ("fubini_study", "positive")])
def test_classify_models(tmp_path, capsys, model, sign):
    path = tmp_path / "t.txt"
    run(capsys, "models", model, "-n", "3", "--out", str(path))
    code, out, _ = run(capsys, "classify", "--in", str(path), *FAST, "--format", "structured")
    assert code == EXIT_OK
    rep = json.loads(out)
    dn = [v for v in rep["verdicts"] if v["notion"] == "dual_nakano"][0]
    assert dn["sign"] == sign and dn["certified"]
    assert rep["chain_violations"] == []


def test_classify_corrupted_file(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("CURVLAB-TENSOR 1 2 2 1\n1 1 1 1 oops 0\n")
    code, _, err = run(capsys, "classify", "--in", str(path))
    assert code == EXIT_INPUT and "invalid tensor file" in err
    code, _, err = run(capsys, "classify", "--in", str(tmp_path / "missing.txt"))
    assert code == EXIT_INPUT


def test_classify_non_kahler_defect_reported(tmp_path, capsys):
    path = tmp_path / "defect.txt"
    # Kähler flag set but R_{1 1bar 1 2bar} != R_{1 2bar 1 1bar}
    path.write_text("CURVLAB-TENSOR 1 2 2 1\n1 1 1 1 -2 0\n1 1 1 2 0.5 0\n")
    code, _, err = run(capsys, "classify", "--in", str(path))
    assert code == EXIT_INPUT and "violates" in err


def test_audit_semi_dual_nakano_negative(capsys):
    code, out, _ = run(capsys, "audit", "--seed", "1", "--count", "100", "-n", "2",
                       "--sign-class", "semi-dual-nakano-negative", *FAST)
    assert code == EXIT_OK
    assert "0 with chain violations" in out


def test_audit_empty_batch(capsys):
    code, out, _ = run(capsys, "audit", "--count", "0")
    assert code == EXIT_OK and "audited 0 tensors" in out


def test_audit_injected_defect_is_reported(capsys):
    code, out, _ = run(capsys, "audit", "--count", "2", "-n", "2", "--inject-sign-flip", *FAST)
    assert code == EXIT_MISMATCH
    assert "2=>3" in out and "curvature_operator" in out and "witness=" in out
    code, out, _ = run(capsys, "audit", "--count", "2", "-n", "2", "--inject-sign-flip",
                       "--format", "structured", *FAST)
    doc = json.loads(out)
    assert doc["violations"] == 2 and doc["failures"][0]["tensor"]["n"] == 2


def test_audit_is_deterministic(capsys):
    args = ("audit", "--count", "3", "-n", "3", "--seed", "9", "--format", "structured", *FAST)
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_parse_curve_forms():
    assert parse_curve("-1,0,0,0,0,0,1") == [-1, 0, 0, 0, 0, 0, 1]
    assert parse_curve("1+2j,0,0,0,0,0,1")[0] == 1 + 2j
    assert parse_curve(",".join(["0.5", "-1"] * 7))[3] == 0.5 - 1j


def test_wp_rejects_degenerate_curves(capsys):
    code, _, err = run(capsys, "wp", "--curve=-1,0,0,0,0,1,0", "--refine", "0")
    assert code == EXIT_INPUT and "c6" in err
    code, _, err = run(capsys, "wp", "--curve=1,-2,1,0,0,0,1", "--refine", "0")
    assert code == EXIT_INPUT or code == EXIT_OK      # squarefree check decides
    code, _, err = run(capsys, "wp", "--curve", "1,2,3")
    assert code == EXIT_INPUT
    code, _, err = run(capsys, "wp", "--refine", "9")
    assert code == EXIT_INPUT


def test_wp_repeated_root_rejected(capsys):
    # (x - 1)^2 (x^4 + 1): a double root at 1
    c = np.poly([1, 1, *np.roots([1, 0, 0, 0, 1])])[::-1]
    text = ",".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in c)
    code, _, err = run(capsys, "wp", f"--curve={text}", "--refine", "0")
    assert code == EXIT_INPUT and "not separated" in err


def test_wp_level1_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code, stdout, _ = run(capsys, "wp", "--refine", "1", *FAST, "--identity-trials", "3",
                          "--out", str(out))
    assert code == EXIT_OK
    assert "verdicts as expected" in stdout
    files = sorted(p.name for p in out.iterdir())
    assert files == ["cotangent.txt", "cotangent_orthonormal.txt", "manifest.json",
                     "tangent.txt", "tangent_orthonormal.txt"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["run_config"]["refinement"] == 1
    assert manifest["verdicts_as_expected"] is True
    assert len(manifest["config_hash"]) == 16
    R = read_tensor(out / "cotangent.txt")
    assert (R.n, R.r, R.kahler) == (3, 3, False)


def test_wp_structured_is_deterministic(capsys):
    args = ("wp", "--refine", "0", *FAST, "--identity-trials", "2", "--format", "structured")
    a = json.loads(run(capsys, *args)[1])
    b = json.loads(run(capsys, *args)[1])
    a.pop("timings_s"), b.pop("timings_s")
    assert a == b


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "curvlab.cli", "models", "flat", "-n", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("CURVLAB-TENSOR")
