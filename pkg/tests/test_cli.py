import subprocess
import sys

import numpy as np
import pytest

from satprecoding.cli import main
from satprecoding.csvio import parse_complex_rows


def test_gen_channel_writes_parseable_csv(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["gen-channel", "--rho", "2", "--seed", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# rows=18 cols=9")
    H = parse_complex_rows([l for l in lines if not l.startswith("#")])
    assert H.shape == (18, 9) and np.all(np.abs(H) > 0)


def test_gen_channel_is_deterministic(capsys):
    main(["gen-channel", "--seed", "5"])
    first = capsys.readouterr().out
    main(["gen-channel", "--seed", "5"])
    assert capsys.readouterr().out == first


def test_solve_one_prints_report(capsys):
    assert main(["solve-one", "--rho", "1", "--power", "50"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("t_achieved=") and "[precoder rows=9 cols=9]" in out


def test_power_sweep_writes_outputs(tmp_path, capsys):
    code = main(["power-sweep", "--strategies", "four_color,mmse_rescaled", "--runs", "1", "--out", str(tmp_path)])
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"power_dbw_sweep.csv", "power_dbw_rates.csv", "power_dbw_beams.csv", "power_dbw_manifest.json"} <= names


@pytest.mark.parametrize(
    "argv, code",
    [
        (["power-sweep", "--config", "/nonexistent/c.yaml"], 2),
        (["rho-sweep", "--runs", "0"], 2),
    ],
)
def test_configuration_errors_exit_nonzero(argv, code, capsys):
    assert main(argv) == code
    assert "configuration error" in capsys.readouterr().err


def test_io_error_exits_nonzero(tmp_path, capsys):
    blocker = tmp_path / "f"
    blocker.write_text("")
    argv = ["power-sweep", "--strategies", "four_color", "--runs", "1", "--out", str(blocker / "x")]
    assert main(argv) == 3
    assert str(blocker) in capsys.readouterr().err


def test_bad_strategy_list_is_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["power-sweep", "--strategies", "magic"])
    assert exc.value.code != 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "satprecoding", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "power-sweep" in res.stdout
