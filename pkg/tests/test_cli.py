import json
import subprocess
import sys

import pytest

from semiquant.cli import main
from semiquant.report import SCHEMA

UPPER = ["--metric-E", "y^-2", "--metric-G", "c^2*y^-2"]
FLAT = ["--metric-E", "1", "--metric-G", "1"]
DEFORMED = ["--metric-E", "y^-2", "--metric-G", "y^-2*exp(2*t/y)"]


def run_json(capsys, *argv):
    code = main([*argv, "--format", "json"])
    out = capsys.readouterr().out
    return json.loads(out) if out else None, code


def order1_fields(node, path=""):
    if isinstance(node, dict):
        for key, value in node.items():
            sub = f"{path}.{key}" if path else key
            if key == "order1" and isinstance(value, dict):
                yield from ((f"{sub}.{k}", v) for k, v in value.items())
            elif key == "order1":
                yield sub, value
            else:
                yield from order1_fields(value, sub)


def test_upper_half_plane_scalar(capsys):
    data, code = run_json(capsys, *UPPER, "--stages", "classical,quantum")
    assert data["classical"]["scalar_curvature"] == "-2*c^-2"
    assert data["quantum"]["classification"] == "quantum-levi-civita"
    # the printed g1 cross terms disagree with the defining equation; the run says so
    assert code == 2
    assert {d["quantity"] for d in data["discrepancies"]} == {
        "quantum.g1.order1.dx*dy",
        "quantum.g1.order1.dy*dx",
    }


def test_flat_order1_fields_vanish(capsys):
    data, code = run_json(capsys, *FLAT)
    fields = dict(order1_fields(data["quantum"]))
    assert len(fields) >= 4 * 4 + 4
    assert all(v == "0" for v in fields.values()), fields
    assert data["quantum"]["ricci_form"] == "0"
    assert code == 0 and data["discrepancies"] == []


def test_t_deform_stage(capsys):
    data, code = run_json(capsys, *DEFORMED, "--stages", "t-deform")
    assert data["conditions"]["t_deformation"]["classification"] == "weak-quantum-levi-civita"
    assert code == 2
    against_oracle = [d for d in data["discrepancies"] if d["oracle_verdict"].get("defining_equation_agrees_with") == "engine"]
    assert against_oracle


def test_required_keys(capsys):
    data, _ = run_json(capsys, *UPPER)
    assert data["schema"] == SCHEMA == "semiquant-report/1"
    assert set(data) == {"schema", "input", "classical", "quantum", "conditions", "discrepancies"}
    assert set(data["classical"]) == {"christoffel", "riemann", "scalar_curvature", "omega12"}
    assert set(data["quantum"]) == {
        "g_Q", "g1", "nabla_Q_dx", "nabla_Q_dy", "wedge_table", "ricci_form",
        "nabla_ricci", "torsion", "cotorsion", "classification",
    }
    for d in data["discrepancies"]:
        assert set(d) == {"quantity", "engine_value", "paper_value", "paper_ref", "oracle_verdict"}


def test_zero_claims_carry_status(capsys):
    data, _ = run_json(capsys, *UPPER)
    assert data["quantum"]["cotorsion"]["verdict"]["status"] in ("ZeroSymbolic", "ZeroNumeric")
    for verdict in data["quantum"]["nabla_ricci"]["verdicts"].values():
        assert verdict["status"] in ("ZeroSymbolic", "ZeroNumeric")


def test_conditions_stage(capsys):
    data, code = run_json(capsys, "--metric-E", "y^-2", "--metric-G", "y^-4", "--stages", "conditions")
    assert data["classical"] is None and data["quantum"] is None
    assert data["conditions"]["classical_form"]["family"] == "none"
    assert code == 0


def test_text_format(capsys):
    assert main(FLAT) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "classical.scalar_curvature = 0" in lines
    assert lines == sorted(lines)


def test_json_is_deterministic(capsys):
    first = (main([*DEFORMED, "--stages", "classical,quantum", "--format", "json"]), capsys.readouterr().out)
    second = (main([*DEFORMED, "--stages", "classical,quantum", "--format", "json"]), capsys.readouterr().out)
    assert first == second


def test_module_entry_point_is_deterministic():
    cmd = [sys.executable, "-m", "semiquant", *UPPER, "--format", "json"]
    a = subprocess.run(cmd, capture_output=True, check=False)
    b = subprocess.run(cmd, capture_output=True, check=False)
    assert a.returncode == b.returncode == 2
    assert a.stdout == b.stdout and a.stdout
    assert b"discrepanc" in a.stderr


# -- configuration --------------------------------------------------------------------

def test_seed_flag_and_environment(capsys, monkeypatch):
    data, _ = run_json(capsys, *FLAT)
    assert data["input"]["seed"] == 0x5EED
    monkeypatch.setenv("SEMIQUANT_SEED", "7")
    data, _ = run_json(capsys, *FLAT)
    assert data["input"]["seed"] == 7
    data, _ = run_json(capsys, *FLAT, "--seed", "0x10")
    assert data["input"]["seed"] == 16


def test_param_pin(capsys):
    data, code = run_json(capsys, "--metric-E", "y^-2", "--metric-G", "q^2*y^-2", "--param", "q=2")
    assert data["classical"]["scalar_curvature"] == "-1/2"
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["--metric-E", "y^", "--metric-G", "1"],
        ["--metric-E", "q*y", "--metric-G", "1"],
        ["--metric-E", "y-2", "--metric-G", "1"],
        ["--metric-E", "1", "--metric-G", "1", "--stages", "bogus"],
        ["--metric-E", "1", "--metric-G", "1", "--no-such-flag"],
        ["--metric-E", "1"],
    ],
)
def test_input_errors_exit_one(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    assert code == 1
    assert capsys.readouterr().err


def test_parse_error_reports_location(capsys):
    assert main(["--metric-E", "y+*2", "--metric-G", "1"]) == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "at byte 2" in captured.err


# -- batch ----------------------------------------------------------------------------

def test_batch_preserves_order(tmp_path, capsys):
    entries = [
        {"metric_E": "1", "metric_G": "1"},
        {"metric_E": "y^-2", "metric_G": "c^2*y^-2"},
        {"metric_E": "y^-1", "metric_G": "y^2+1", "stages": ["conditions"]},
    ]
    path = tmp_path / "batch.json"
    path.write_text(json.dumps(entries))
    code = main(["--batch", str(path), "--format", "json", "--jobs", "2"])
    parallel = capsys.readouterr().out
    assert main(["--batch", str(path), "--format", "json"]) == code == 2
    serial = capsys.readouterr().out
    assert parallel == serial
    data = json.loads(serial)
    assert [d["input"]["metric_E"] for d in data] == ["1", "y^-2", "y^-1"]


def test_batch_with_bad_entry(tmp_path, capsys):
    path = tmp_path / "batch.json"
    path.write_text(json.dumps([{"metric_E": "1", "metric_G": "1"}, {"metric_E": "y^", "metric_G": "1"}]))
    assert main(["--batch", str(path), "--format", "json"]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data[0]["schema"] == SCHEMA and "error" in data[1]
