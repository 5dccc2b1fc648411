import csv
import io
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from r4curv.cli import CLASSIFY_HEADER, COMPUTE_HEADER, FLOW_HEADER, main

SURFACES = Path(__file__).resolve().parent.parent / "surfaces"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_compute_clifford(capsys):
    code, out, _ = run(capsys, "compute", "--surface", "builtin:clifford", "--grid", "4x4")
    assert code == 0
    assert out.splitlines()[0] == COMPUTE_HEADER
    table = rows(out)
    assert len(table) == 16
    for r in table:
        assert abs(float(r["kN"])) < 1e-10
        assert r["ellipse_kind"] == "segment"
    # cell-centred, u slowest
    assert float(table[0]["u"]) == pytest.approx(math.pi / 4)
    assert float(table[1]["v"]) == pytest.approx(3 * math.pi / 4)


def test_compute_to_file(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, text, _ = run(capsys, "compute", "--surface", "builtin:zsquared", "--grid", "3x3", "--out", str(out))
    assert code == 0 and text == ""
    centre = rows(out.read_text())[4]
    assert float(centre["kN"]) == pytest.approx(4.0, abs=1e-10)
    assert centre["ellipse_kind"] == "circle"


def test_compute_irregular_rows(tmp_path, capsys):
    f = tmp_path / "cone.surf"
    f.write_text("x = u\ny = u*v\nz = 0\nw = u*v^2\nu in [-1, 1] open\nv in [-1, 1] open\n")
    code, out, _ = run(capsys, "compute", "--surface", str(f), "--grid", "3x3")
    assert code == 0
    table = rows(out)
    assert table[4]["ellipse_kind"] == "irregular"
    assert table[4]["kN"] == "nan"


def test_classify_csv(capsys):
    code, out, _ = run(capsys, "classify", "--surface", str(SURFACES / "h_singular.surf"), "--grid", "24x24")
    assert code == 0
    assert out.splitlines()[0] == CLASSIFY_HEADER
    minimal = [r for r in rows(out) if r["type"] == "minimal"]
    assert sorted(r["index"] for r in minimal) == ["-1/2", "1/2"]


def test_classify_sentinel(capsys):
    code, out, _ = run(capsys, "classify", "--surface", "builtin:zsquared", "--grid", "8x8")
    assert code == 0
    first = out.splitlines()[1].split(",")
    assert first[0] == "degenerate_everywhere" and first[4] == "minimal;axiumbilic"


def test_verify_exit_codes(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--surface", "builtin:clifford", "--grid", "12x12", "--out", str(report))
    assert code == 0 and "overall: PASS" in out
    data = json.loads(report.read_text())
    assert data["overall"] == "pass"
    assert set(data["conditions"]) == set("abcdefgh") | {"codazzi", "projection", "sphere_fit"}
    code, out, _ = run(capsys, "verify", "--surface", "builtin:zsquared", "--grid", "12x12")
    assert code == 1 and "overall: FAIL" in out
    code, out, _ = run(capsys, "verify", "--surface", "builtin:sphere", "--grid", "12x12")
    assert code == 1 and "K = r^2" in out


def test_tolerance_flag_changes_verdict(capsys):
    code, _, _ = run(capsys, "verify", "--surface", "builtin:clifford", "--grid", "8x8",
                     "--tol-sphere_fit", "1e-30", "--tol-codazzi", "1e-30")
    assert code == 1


def test_fit_sphere(capsys):
    code, out, _ = run(capsys, "fit-sphere", "--surface", "builtin:clifford", "--grid", "8x8")
    assert code == 0
    radius = float(out.split("radius: ")[1].split()[0])
    assert radius == pytest.approx(math.sqrt(2), abs=1e-12)
    assert "hyperspherical: yes" in out
    code, out, _ = run(capsys, "fit-sphere", "--surface", "builtin:sphere", "--grid", "8x8")
    assert code == 1 and out.startswith("degenerate-cloud:")
    code, out, _ = run(capsys, "fit-sphere", "--surface", "builtin:zsquared", "--grid", "8x8")
    assert code == 1 and "hyperspherical: no" in out


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.surf"
    bad.write_text("x = u +* v\ny = v\nz = 0\nw = 0\nu in [-1, 1] open\nv in [-1, 1] open\n")
    code, _, err = run(capsys, "compute", "--surface", str(bad))
    assert code == 2 and "line 1" in err and "byte" in err
    code, _, err = run(capsys, "compute", "--surface", str(tmp_path / "missing.surf"))
    assert code == 2 and err.startswith("r4curv: error:")
    code, _, err = run(capsys, "compute", "--surface", "builtin:nope")
    assert code == 2
    code, _, err = run(capsys, "compute", "--surface", "builtin:plane", "--grid", "4by4")
    assert code == 2
    code, _, err = run(capsys, "compute", "--surface", "builtin:plane", "--tol-kN", "-1")
    assert code == 2
    code, _, err = run(capsys, "flow", "--surface", "builtin:plane", "--field", "bogus")
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["compute"])
    assert exc.value.code == 2


def test_flow_csv_and_svg(tmp_path, capsys):
    svg = tmp_path / "f.svg"
    code, out, _ = run(capsys, "flow", "--surface", "builtin:clifford", "--seeds", "0.5,0.5;1.0,2.0",
                       "--step", "0.05", "--svg", str(svg))
    assert code == 0
    assert out.splitlines()[0] == FLOW_HEADER
    table = rows(out)
    ids = sorted({int(r["curve_id"]) for r in table})
    assert ids == [0, 1, 2, 3]
    root = ET.fromstring(svg.read_text())
    paths = root.findall("{http://www.w3.org/2000/svg}path")
    assert len(paths) == len(ids)


def test_flow_skips_degenerate_seed(tmp_path, capsys):
    svg = tmp_path / "f.svg"
    code, out, err = run(capsys, "flow", "--surface", "builtin:zsquared", "--field", "mean1",
                         "--seeds", "0,0", "--svg", str(svg))
    assert code == 0
    assert "warning" in err and "skipped" in err
    assert len(rows(out)) == 0
    root = ET.fromstring(svg.read_text())
    assert len(root.findall("{http://www.w3.org/2000/svg}circle")) == 1


def test_flow_nu_principal(capsys):
    code, out, _ = run(capsys, "flow", "--surface", "builtin:clifford", "--field", "nu-min",
                       "--nu=-cos(u),-sin(u),cos(v),sin(v)", "--seeds", "0.3,0.3",
                       "--step", "0.05")
    assert code == 0 and len(rows(out)) > 10
    code, _, err = run(capsys, "flow", "--surface", "builtin:clifford", "--field", "nu-min", "--seeds", "0.3,0.3")
    assert code == 2


@pytest.mark.parametrize("cmd", ["compute", "verify"])
def test_thread_cap_does_not_change_output(cmd, tmp_path, capsys, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("R4CURV_THREADS", threads)
        path = tmp_path / f"{cmd}{threads}.out"
        run(capsys, cmd, "--surface", "builtin:zsquared", "--grid", "10x10", "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
