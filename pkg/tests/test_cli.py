import json
import subprocess
import sys

import pytest

from opval.cli import run
from opval.modelio import family_to_json, resolve_model


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_nc_enumerate(capsys):
    code, out, _ = call(capsys, "nc", "enumerate", "--n", "4", "--json")
    assert code == 0
    assert len(json.loads(out)) == 14


@pytest.mark.parametrize("argv", [["nc", "enumerate", "--n", "0"], ["nc", "enumerate"], ["nope"],
                                  ["rdiag", "check", "--model", "dt:zero"],
                                  ["rdiag", "check", "--model", "nofreepolar", "--budget", "10", "--mode", "m2"],
                                  ["series", "fg", "--model", "nofreepolar", "--b1", "1,x"],
                                  ["spectral", "density", "--threads", "0"]])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 2 and err


def test_rdiag_check_exit_codes(capsys, tmp_path):
    code, out, _ = call(capsys, "rdiag", "check", "--model", "nofreepolar", "--json")
    assert code == 0 and json.loads(out)
    nf = resolve_model("nofreepolar")
    fam = nf.cumulant_family(6).with_maps({(1, 1): [1, 0, 0, 0]})
    doc = {"algebra": {"dimension": 2}, "labels": [1, 2], "cumulants": family_to_json(fam)}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    code, out, _ = call(capsys, "rdiag", "check", "--model", str(p), "--mode", "cumulant")
    assert code == 1 and "FAIL" in out


def test_polar_and_twist(capsys):
    code, out, _ = call(capsys, "rdiag", "polar", "--model", "nofreepolar", "--json")
    assert code == 0 and json.loads(out)["status"] == "obstructed"
    assert call(capsys, "rdiag", "twist", "--model", "dt:4")[0] == 0
    assert call(capsys, "rdiag", "twist", "--model", "nofreepolar", "--theta", "identity")[0] == 1
    # for d = 2 the flip is the permutation (1, 0)
    flip = call(capsys, "rdiag", "twist", "--model", "nofreepolar")
    assert flip[0] == 1
    assert call(capsys, "rdiag", "twist", "--model", "nofreepolar", "--theta", "1,0") == flip


def test_circular_commands(capsys):
    code, out, _ = call(capsys, "circular", "moments", "--model", "nofreepolar", "--order", "3")
    assert code == 0 and "m_3 = (13/8, 91/8)" in out
    assert call(capsys, "circular", "covariance", "--model", "nofreepolar")[0] == 0
    assert call(capsys, "circular", "trace", "--model", "dt:3")[0] == 0
    assert call(capsys, "circular", "trace", "--model", "nofreepolar", "--tau", "1/3,2/3")[0] == 1


def test_series_csv(capsys, tmp_path):
    out_path = tmp_path / "fg.csv"
    code, _, _ = call(capsys, "series", "fg", "--model", "scalar-circular:1", "--order", "5",
                      "--format", "csv", "--out", str(out_path))
    assert code == 0
    rows = out_path.read_text().splitlines()
    assert rows[0] == "n,F,G" and [r.split(",")[1] for r in rows[1:]] == ["1", "1", "2", "5", "14", "42"]


def test_cumulants_convert_and_trace(capsys, tmp_path):
    fam = resolve_model("nofreepolar").cumulant_family(4)
    src = tmp_path / "cum.json"
    src.write_text(json.dumps(family_to_json(fam)))
    mom_path = tmp_path / "mom.json"
    assert call(capsys, "cumulants", "convert", "--in", str(src), "--to", "moments", "--max-order", "4",
                "--out", str(mom_path))[0] == 0
    back = tmp_path / "back.json"
    assert call(capsys, "cumulants", "convert", "--in", str(mom_path), "--to", "cumulants",
                "--out", str(back))[0] == 0
    assert json.loads(back.read_text())["maps"] == family_to_json(fam)["maps"]
    assert call(capsys, "cumulants", "trace", "--in", str(src), "--tau", "1/2,1/2", "--max-len", "4")[0] == 0
    assert call(capsys, "cumulants", "trace", "--in", str(src), "--tau", "1/3,2/3", "--max-len", "4")[0] == 1


def test_malformed_json_exit_2(capsys, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"algebra": {"dimension": 2}, ')
    code, _, err = call(capsys, "cumulants", "convert", "--in", str(p), "--to", "moments")
    assert code == 2 and "line 1" in err


def test_spectral_commands(capsys, tmp_path):
    code, out, _ = call(capsys, "spectral", "verify-appendix", "--order", "30")
    assert code == 0 and "quartic identity holds to order 30" in out
    code, out, _ = call(capsys, "spectral", "norm", "--json")
    assert code == 0 and abs(json.loads(out)["norm"] - 2.18942089) < 1e-8
    csv, svg = tmp_path / "rho.csv", tmp_path / "rho.svg"
    code, _, _ = call(capsys, "spectral", "density", "--points", "200", "--out", str(csv), "--svg", str(svg))
    assert code == 0 and csv.read_text().startswith("t,density\n") and svg.read_text().startswith("<svg")
    assert call(capsys, "spectral", "puiseux")[0] in (0, 1)


def test_reports_are_byte_identical(capsys, tmp_path):
    argv = ["spectral", "density", "--points", "100", "--json", "--out", str(tmp_path / "rho.csv")]
    first = call(capsys, *argv)[1]
    assert call(capsys, *argv, "--threads", "3")[1] == first
    argv = ["rdiag", "check", "--model", "dt:2", "--json"]
    assert call(capsys, *argv)[1] == call(capsys, *argv)[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "opval", "nc", "enumerate", "--n", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.splitlines() == ["{1} {2}", "{1,2}"]
