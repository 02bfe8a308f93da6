"""Command line surface: exit codes, payload schemas, determinism."""

import json

import pytest

from rician_capacity.cli import main
from rician_capacity.records import read_sweep_csv

ANCHOR_TEXT = "0 0.9\n0.7071067811865476 0.1\n"


def test_solve_writes_solution(tmp_path, capsys):
    out = tmp_path / "sol.json"
    rc = main(["solve", "--model", "rician", "--constraint", "peak", "--K", "1",
               "--snr", "0.05", "--restarts", "4", "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["schema"] == "rician-capacity-solution-v1"
    assert payload["converged"] is True
    assert payload["capacity_nats"] > 0
    summary = capsys.readouterr().out
    assert "capacity" in summary and "nats" in summary


def test_solve_stdout_json(capsys):
    rc = main(["solve", "--model", "rician", "--constraint", "peak", "--K", "1",
               "--snr", "0.05", "--restarts", "4"])
    assert rc == 0
    captured = capsys.readouterr()
    payload = json.loads(captured.out)
    assert payload["distribution"]["locations"]
    assert "capacity" in captured.err


def test_solve_bits_flag(tmp_path, capsys):
    out = tmp_path / "sol.json"
    rc = main(["solve", "--model", "rician", "--constraint", "peak", "--K", "1",
               "--snr", "0.05", "--restarts", "4", "--bits", "--out", str(out)])
    assert rc == 0
    assert "bits" in capsys.readouterr().out
    # stored value stays in nats regardless of the display unit
    assert json.loads(out.read_text())["capacity_nats"] > 0


@pytest.mark.parametrize("args", [
    ["solve", "--model", "rician", "--constraint", "moment4", "--K", "1", "--snr", "0"],
    ["solve", "--model", "rician", "--constraint", "moment4", "--K", "1",
     "--snr", "0.05"],                               # kappa missing
    ["solve", "--model", "rician", "--constraint", "moment4", "--K", "1",
     "--snr", "0.05", "--kappa", "0.8"],             # kappa <= 1
    ["solve", "--model", "rician-pn", "--constraint", "moment4", "--K", "1",
     "--snr", "0.05", "--kappa", "10"],              # pn supports avg-power only
    ["sweep", "--model", "rician", "--constraint", "peak", "--K", "1"],  # no grid
])
def test_invalid_inputs_exit_2(args):
    assert main(args) == 2


def test_unknown_model_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["solve", "--model", "awgn", "--snr", "0.05"])


def test_kt_check_certifies_anchor(tmp_path):
    dist = tmp_path / "anchor.txt"
    dist.write_text(ANCHOR_TEXT)
    rc = main(["kt-check", "--model", "rician", "--constraint", "moment4", "--K", "1",
               "--snr", "0.05", "--kappa", "10", str(dist)])
    assert rc == 0


def test_kt_check_rejects_perturbed(tmp_path):
    dist = tmp_path / "bad.txt"
    dist.write_text("0 0.85\n0.7071067811865476 0.15\n")
    rc = main(["kt-check", "--model", "rician", "--constraint", "moment4", "--K", "1",
               "--snr", "0.05", "--kappa", "10", str(dist)])
    assert rc == 3


def test_kt_check_malformed_file(tmp_path):
    dist = tmp_path / "garbage.txt"
    dist.write_text("zzz\n")
    rc = main(["kt-check", "--model", "rician", "--constraint", "moment4", "--K", "1",
               "--snr", "0.05", "--kappa", "10", str(dist)])
    assert rc == 2


def test_mc_check_agrees(tmp_path, capsys):
    dist = tmp_path / "anchor.txt"
    dist.write_text(ANCHOR_TEXT)
    rc = main(["mc-check", "--model", "rician", "--constraint", "moment4", "--K", "1",
               "--snr", "0.05", "--kappa", "10", "--samples", "100000", "--seed", "5",
               str(dist)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema"] == "rician-capacity-mccheck-v1"


def test_sweep_deterministic_output(tmp_path):
    args = ["sweep", "--model", "rician-pn", "--constraint", "avg-power", "--K", "1",
            "--snr-grid", "1e-3,1e-2", "--restarts", "6"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    records = read_sweep_csv(out1)
    assert len(records) == 2
    assert [r.snr_alpha for r in records] == [1e-3, 1e-2]
    assert all(r.converged for r in records)
    # capacity nondecreasing along the grid
    assert records[0].capacity_nats <= records[1].capacity_nats


def test_sweep_json_format(capsys):
    rc = main(["sweep", "--model", "rician", "--constraint", "peak", "--K", "0",
               "--snr-grid", "0.05,0.1", "--restarts", "4", "--format", "json"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["records"]) == 2
