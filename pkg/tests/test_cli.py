import json
import subprocess
import sys

import pytest
from mpmath import mp, mpf

from motive_height.cli import main
from motive_height.documents import canonical_bytes, example_document


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_example(tmp_path, name, filename=None):
    path = tmp_path / (filename or name.replace(":", "_") + ".json")
    path.write_bytes(canonical_bytes(example_document(name)))
    return str(path)


def test_example_roundtrip_validates(capsys, tmp_path):
    code, out, err = run_cli(capsys, "example", "tate:1")
    assert code == 0
    path = tmp_path / "doc.json"
    path.write_text(out)
    code, out, err = run_cli(capsys, "validate", str(path))
    assert code == 0
    assert "valid" in out


def test_height_tate0_exact_zero(capsys, tmp_path):
    path = write_example(tmp_path, "tate:0")
    code, out, err = run_cli(capsys, "height", path)
    assert code == 0
    assert "h = 0.0 ± 0" in out


def test_height_tate1_value_and_radius(capsys, tmp_path):
    path = write_example(tmp_path, "tate:1")
    code, out, err = run_cli(capsys, "height", path, "--format", "rows")
    assert code == 0
    fields = out.strip().split("\t")
    assert fields[0] == "tate:1"
    assert (fields[1], fields[2]) == ("-1", "0")
    mp.dps = 50
    assert abs(mpf(fields[3]) + mp.log(2 * mp.pi)) < mpf("1e-24")
    assert mpf(fields[4]) < mpf("1e-30")
    assert mpf(fields[5]) == 0


def test_height_deterministic(capsys, tmp_path):
    path = write_example(tmp_path, "elliptic:square")
    code1, out1, _ = run_cli(capsys, "height", path)
    code2, out2, _ = run_cli(capsys, "height", path)
    assert code1 == code2 == 0
    assert out1 == out2


def test_precision_monotone(capsys, tmp_path):
    path = write_example(tmp_path, "tate:1")
    _, out128, _ = run_cli(capsys, "--precision", "128", "height", path,
                           "--format", "rows")
    _, out192, _ = run_cli(capsys, "--precision", "192", "height", path,
                           "--format", "rows")
    rad128 = mpf(out128.strip().split("\t")[4])
    rad192 = mpf(out192.strip().split("\t")[4])
    assert rad192 < rad128


def test_window_override_flag(capsys, tmp_path):
    path = write_example(tmp_path, "tate:1")
    _, base, _ = run_cli(capsys, "height", path, "--format", "rows")
    code, widened, err = run_cli(capsys, "height", path, "--window=-3,2",
                                 "--format", "rows")
    assert code == 0
    f_base, f_wide = base.split("\t"), widened.split("\t")
    assert (f_wide[1], f_wide[2]) == ("-3", "2")
    assert f_base[3] == f_wide[3]  # same height, report echoes the window
    code, out, err = run_cli(capsys, "height", path, "--window", "0,1")
    assert code == 1  # window does not contain the Hodge support


def test_validate_semantic_failure_exit1(capsys, tmp_path):
    doc = example_document("tate:1")
    # claim bad reduction at 7 without an override
    doc["bad_primes"] = [7]
    path = tmp_path / "bad.json"
    path.write_bytes(canonical_bytes(doc))
    code, out, err = run_cli(capsys, "validate", str(path))
    assert code == 1
    assert "bad prime 7" in err


def test_non_nested_filtration_exit1(capsys, tmp_path):
    doc = example_document("elliptic:square")
    for entry in doc["local"]:
        if "fl" in entry:
            entry["fl"]["filtration"] = [{"i": 0, "basis": [["0"], ["5"]]}]
    path = tmp_path / "nonnested.json"
    path.write_bytes(canonical_bytes(doc))
    code, out, err = run_cli(capsys, "validate", str(path))
    assert code == 1
    assert "p=3" in err or "p=5" in err


def test_malformed_json_exit3(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, out, err = run_cli(capsys, "validate", str(path))
    assert code == 3
    code, out, err = run_cli(capsys, "height", str(path))
    assert code == 3


def test_missing_file_exit3(capsys, tmp_path):
    code, out, err = run_cli(capsys, "height", str(tmp_path / "nope.json"))
    assert code == 3


def test_local_command(capsys, tmp_path):
    path = write_example(tmp_path, "elliptic:square")
    code, out, err = run_cli(capsys, "local", path, "--p", "5")
    assert code == 0
    assert "computed-from-FL" in out
    assert "v(0) = 0" in out
    code, out, err = run_cli(capsys, "local", path, "--p", "11")
    assert code == 0
    assert "default-good" in out


def test_invariants_command(capsys, tmp_path):
    path = write_example(tmp_path, "tate:1")
    code, out, err = run_cli(capsys, "invariants", path)
    assert code == 0
    assert "s = -1" in out and "t = -1" in out and "pass" in out


def test_experiment_command(capsys, tmp_path):
    path = write_example(tmp_path, "tate:1")
    spec = {"format_version": "1", "p": 2, "k": 1, "exponent": 1,
            "q_dr": [["1"]], "q_betti": [["1"]], "phi_u": [["1/2"]],
            "filtration_u": []}
    spec_path = tmp_path / "spec.json"
    spec_path.write_bytes(canonical_bytes(spec))
    code, out, err = run_cli(capsys, "experiment", path, str(spec_path), "-n", "2")
    assert code == 0
    assert "lattice ratio: 1/4" in out
    assert "heights match within radii: yes" in out


def test_batch_order_and_parallel_determinism(capsys, tmp_path):
    paths = [write_example(tmp_path, n)
             for n in ("tate:1", "tate:0", "elliptic:square")]
    code1, seq, _ = run_cli(capsys, "batch", *paths)
    assert code1 == 0
    code2, par, _ = run_cli(capsys, "batch", "--jobs", "2", *paths)
    assert code2 == 0
    assert seq == par
    lines = seq.strip().splitlines()
    assert lines[2].startswith("tate:1\t")
    assert lines[3].startswith("tate:0\t")
    assert lines[4].startswith("elliptic:square\t")


def test_batch_directory_input(capsys, tmp_path):
    write_example(tmp_path, "tate:0", "a.json")
    write_example(tmp_path, "tate:1", "b.json")
    code, out, err = run_cli(capsys, "batch", str(tmp_path), "--format", "rows")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("tate:0\t")


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "motive_height.cli", "example", "trivial"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["format_version"] == "1"
