import csv
import hashlib
import io
import json

import pytest

from pclab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


SINGLE = {"family": "interval", "branches": [{"slope": 0.5, "offset": 0.25}], "breakpoints": []}


def test_sim_rotation(capsys):
    code, out, _ = run(capsys, "sim", "--steps", "6", "--x0", "[0]")
    assert code == 0
    xs = [json.loads(line)["x"][0] for line in out.splitlines()]
    assert xs == pytest.approx([0, 0.8, 0.2, 0.9, 0.25, 0.925])


def test_sim_single_branch_converges(tmp_path, capsys):
    cfg = write(tmp_path, "one.json", SINGLE)
    code, out, _ = run(capsys, "sim", cfg, "--steps", "30", "--x0", "[0.9]")
    xs = [json.loads(line)["x"][0] for line in out.splitlines()]
    gaps = [abs(x - 0.5) for x in xs]
    assert code == 0 and gaps[-1] < 1e-8 and all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_sim_singular_start(capsys):
    code, out, _ = run(capsys, "sim", "--x0", "[0.4]")
    rec = json.loads(out.splitlines()[0])
    assert code == 0 and rec["failed_at"] == 0 and rec["label"] is None


def test_certify_exit_codes(tmp_path, capsys):
    code, out, _ = run(capsys, "certify")
    assert code == 0 and json.loads(out)["outcome"] == "certified"
    cfg = write(tmp_path, "hard.json", {"b": 0.8549017214306456})
    code, out, _ = run(capsys, "certify", cfg)
    assert code == 2 and json.loads(out)["outcome"] == "undecided"
    bad = write(tmp_path, "bad.json", {"b": 0.2})
    code, _, err = run(capsys, "certify", bad)
    assert code == 1 and "lambda/b" in err


def test_config_errors(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{"family": "rotation",\n "b": }')
    code, _, err = run(capsys, "certify", str(p))
    assert code == 1 and ":2:" in err
    unknown = write(tmp_path, "unknown.json", {"tolerances": {"etaa": 1}})
    code, _, err = run(capsys, "certify", unknown)
    assert code == 1 and "tolerances.etaa" in err


def test_print_config(capsys):
    code, out, _ = run(capsys, "--print-config")
    assert code == 0 and json.loads(out)["family"] == "rotation"


def test_orbits_csv(capsys):
    code, out, _ = run(capsys, "orbits")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and sorted(float(r["x0"]) for r in rows) == pytest.approx([4 / 15, 14 / 15])


def test_hoffman_identity(capsys):
    code, out, _ = run(capsys, "hoffman", "--matrix", "[[1,0],[0,1]]")
    assert code == 0 and float(out.splitlines()[1]) == 1.0


def test_growth_single_branch(tmp_path, capsys):
    cfg = write(tmp_path, "one.json", SINGLE)
    code, out, _ = run(capsys, "growth", cfg, "--depth-max", "6")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6 and all(float(r["rate"]) == 0 for r in rows)


def test_probe_t_ratio(tmp_path, capsys):
    cfg = write(tmp_path, "two.json", {
        "family": "interval", "branches": [{"slope": 0.5, "offset": 0.2}, {"slope": -0.4, "offset": 0.7}],
        "breakpoints": [0.43], "probe": {"delta": 0.1, "samples": 2000}})
    code, out, _ = run(capsys, "probe-T", cfg)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows
    for r in rows:
        assert float(r["estimate"]) <= float(r["bound"]) + 3 * float(r["sigma"])


def test_sweep_summary_and_zero_samples(capsys):
    code, out, _ = run(capsys, "sweep", "--count", "0")
    assert code == 0 and json.loads(out)["summary"]["samples"] == 0
    code, out, _ = run(capsys, "sweep", "--count", "5")
    lines = out.splitlines()
    assert len(lines) == 6 and json.loads(lines[-1])["summary"]["samples"] == 5


def test_sweep_same_seed_same_digest(tmp_path, capsys):
    digests = []
    for k in range(2):
        path = tmp_path / f"run{k}.jsonl"
        assert main(["sweep", "--count", "40", "--seed", "7", "-o", str(path)]) == 0
        digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_staircase_command(capsys):
    code, out, _ = run(capsys, "staircase", "--count", "50")
    rows = list(csv.DictReader(io.StringIO(out)))
    rho = [float(r["rho"]) for r in rows]
    assert code == 0 and len(rho) == 50 and rho == sorted(rho)
