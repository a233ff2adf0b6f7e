import json
import math

import pytest

from kwz import immersion as im
from kwz.cli import main
from kwz.immersion import TETRAHEDRON_COORDS, TETRAHEDRON_FACES


@pytest.fixture
def tetra_file(tmp_path):
    p = tmp_path / "tetra.json"
    assert main(["gen", "tetrahedron", "-o", str(p)]) == 0
    return p


def _write(path, faces, coords):
    path.write_text(json.dumps({"vertices": [list(map(float, c)) for c in coords],
                                "faces": [list(f) for f in faces]}))
    return path


def test_check_tetrahedron(tetra_file, capsys):
    assert main(["check", str(tetra_file)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] and all(out["flags"].values())
    assert out["zero_score"] <= 1e-10
    assert out["mesh"] == str(tetra_file)


def test_check_writes_report_and_svg(tetra_file, tmp_path):
    rep, svg = tmp_path / "r.json", tmp_path / "d.svg"
    assert main(["check", str(tetra_file), "-o", str(rep), "--svg", str(svg), "--no-oracle"]) == 0
    d = json.loads(rep.read_text())
    assert d["z_oracle"] is None and "oracle" not in d["flags"]
    assert svg.read_text().lstrip().startswith("<?xml")


def test_check_fails_with_impossible_tolerance(tetra_file, capsys):
    assert main(["check", str(tetra_file), "--tol-zero", "0"]) == 1
    assert json.loads(capsys.readouterr().out)["flags"]["zero"] is False


def test_orientation_error(tmp_path, capsys):
    faces = [(0, 2, 1)] + list(TETRAHEDRON_FACES[1:])
    p = _write(tmp_path / "bad.json", faces, TETRAHEDRON_COORDS)
    assert main(["check", str(p)]) == 2
    err = json.loads(capsys.readouterr().out)
    assert err["error"] == "OrientationMismatch"
    assert err["detail"] == "InconsistentOrientation"


def test_degenerate_and_missing_input(tmp_path, capsys):
    x = TETRAHEDRON_COORDS.copy()
    x[3] = 0.5 * (x[0] + x[1])
    p = _write(tmp_path / "flat.json", TETRAHEDRON_FACES, x)
    assert main(["check", str(p)]) == 2
    assert json.loads(capsys.readouterr().out)["error"] == "DegenerateFace"
    assert main(["check", str(tmp_path / "nope.json")]) == 2
    assert "error" in json.loads(capsys.readouterr().out)


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["gen", "random-convex", "-n", "15", "--seed", "7", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    t, x = im.load_mesh(a)
    assert t.vertex_count == 15


def test_gen_to_stdout(capsys):
    assert main(["gen", "bipyramid"]) == 0
    assert len(json.loads(capsys.readouterr().out)["faces"]) == 6


def test_weights(tetra_file, capsys):
    assert main(["weights", str(tetra_file)]) == 0
    lines = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    assert len(lines) == 6
    for rec in lines:
        assert rec["y_re"] == pytest.approx(1 / 3, abs=1e-15)
        assert abs(rec["y_im"]) == pytest.approx(math.sqrt(2) / 3, abs=1e-15)
        assert rec["phi_uu"] == pytest.approx(math.pi / 3)
        assert set(rec) == {"u", "u'", "theta", "phi_uu", "phi_u'u", "y_re", "y_im"}


def test_selftest(capsys):
    assert main(["selftest", "--trials", "10", "--seed", "1"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["passed"] and d["trials"] == 10 and "records" not in d
    assert main(["selftest", "--trials", "10", "--flip-turning", "--records"]) == 1
    d = json.loads(capsys.readouterr().out)
    assert not d["passed"] and len(d["records"]) == 10


def test_unfold_svg(tetra_file, tmp_path):
    out = tmp_path / "u.svg"
    assert main(["unfold-svg", str(tetra_file), "-o", str(out)]) == 0
    first = out.read_bytes()
    assert main(["unfold-svg", str(tetra_file), "-o", str(out)]) == 0
    assert out.read_bytes() == first


def test_straight_routing_error_on_tetrahedron(tetra_file, capsys):
    assert main(["check", str(tetra_file), "--routing", "straight"]) == 1
    assert json.loads(capsys.readouterr().out)["error"] == "DecompositionFailed"


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "kwz" in capsys.readouterr().out
