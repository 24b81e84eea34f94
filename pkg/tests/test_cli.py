import csv
import json

import pytest

from multicorn_lab import cli, curves


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def summary(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    lines = out.strip().splitlines()
    assert len(lines) == 1
    data = json.loads(lines[0])
    assert set(data) == {"command", "params_digest", "outputs", "metrics"}
    return data


def test_per_curve(capsys, tmp_path):
    out = tmp_path / "curve.csv"
    data = summary(capsys, "per-curve", "--curve", "per1-1", "--samples", "50", "--out", str(out))
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 50 and data["metrics"]["rows"] == 50
    for r in rows:
        assert abs(curves.per1_minus1_value(float(r["a"]), float(r["b"]))) < 1e-10
        assert r["curve_id"] == curves.PER1_MINUS1


def test_find_center(capsys):
    data = summary(capsys, "find-center", "--family", "real-cubic", "--bitransitive")
    assert data["metrics"]["center"] == [0.7071067811865476, 0.0]
    data = summary(capsys, "find-center", "--family", "tricorn", "--period", "2", "--c", "-0.9,0.05")
    assert data["metrics"]["center"] == pytest.approx([-1.0, 0.0], abs=1e-12)


def test_fingerprint(capsys, tmp_path):
    out = tmp_path / "fp.jsonl"
    data = summary(capsys, "fingerprint", "--family", "multibrot", "--d", "2", "--c", "0.25",
                   "--out", str(out))
    assert data["metrics"]["singular_count"] == 1
    record = json.loads(out.read_text())
    assert {"family", "params", "eta_upper", "eta_lower", "singular_values",
            "ecalle_height"} <= set(record)


def test_find_parabolic_and_height(capsys):
    data = summary(capsys, "find-parabolic", "--seed-c", "0.3", "--seed-z", "0.4")
    assert data["metrics"]["c"] == pytest.approx([0.25, 0.0], abs=1e-9)
    data = summary(capsys, "ecalle-height", "--family", "tricorn", "--c", "-1.75", "--period", "3")
    assert abs(data["metrics"]["ecalle_height"]) < 1e-4


def test_domain_error_exit_code(capsys):
    code, out, _ = run(capsys, "ecalle-height", "--family", "multibrot", "--c", "0.25")
    assert code == 2
    assert json.loads(out)["error"] == "NotAntiReturn"


def test_usage_errors(capsys):
    code, _, err = run(capsys, "render-locus", "--max-iter", "-3")
    assert code == 1 and "--max-iter" in err
    code, _, err = run(capsys, "no-such-command")
    assert code == 1
    code, _, err = run(capsys)
    assert code == 1
    code, _, err = run(capsys, "per-curve", "--curve", "per1-1", "--out", "/nonexistent/dir/x.csv")
    assert code == 1 and "not writable" in err


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "job.cfg"
    cfg.write_text("# curve job\ncurve = per1-1\nsamples = 7\n")
    data = summary(capsys, "per-curve", "--config", str(cfg))
    assert data["metrics"]["rows"] == 7
    data = summary(capsys, "per-curve", "--config", str(cfg), "--samples", "9")
    assert data["metrics"]["rows"] == 9
    cfg.write_text("bogus = 1\n")
    code, _, err = run(capsys, "per-curve", "--config", str(cfg))
    assert code == 1 and "bogus" in err


def test_render_is_reproducible_across_threads(capsys, tmp_path, monkeypatch):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    common = ["render-locus", "--width-px", "80", "--height-px", "64", "--max-iter", "200",
              "--census-period", "1"]
    d1 = summary(capsys, *common, "--threads", "1", "--out", str(a))
    monkeypatch.setenv(cli.THREADS_ENV, "4")
    d2 = summary(capsys, *common, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert d1["metrics"] == d2["metrics"]
    assert d1["params_digest"] != d2["params_digest"]  # outputs differ
    d3 = summary(capsys, *common, "--threads", "2", "--out", str(a))
    assert d3["params_digest"] == d1["params_digest"]


def test_chessboard_and_straighten(capsys, tmp_path):
    img = tmp_path / "cb.ppm"
    summary(capsys, "fatou-chessboard", "--polynomial", "0;1;1", "--window", "-0.9,-0.1,-0.4,0.4",
            "--width-px", "32", "--height-px", "32", "--out", str(img))
    assert img.read_bytes().startswith(b"P6\n32 32\n255\n")
    path = tmp_path / "s.csv"
    data = summary(capsys, "straighten", "--a", "0.7071067811865476", "--b", "0",
                   "--to", "0.72,0.01", "--samples", "4", "--target-center", "0", "--out", str(path))
    assert data["metrics"]["samples"] == 4
    assert path.read_text().splitlines()[0] == "a,b,mu_re,mu_im,c_re,c_im"


def test_trace_cord_and_census(capsys, tmp_path):
    out = tmp_path / "t.csv"
    data = summary(capsys, "trace-cord", "--period", "3", "--arc-seed", "-1.75,0",
                   "--target-height", "0", "--start", "-1.6,0", "--step", "1e-2", "--out", str(out))
    assert data["metrics"]["wiggle_count"] == 0
    assert out.read_text().startswith("step_index,re,im,displacement")
    data = summary(capsys, "census", "--family", "multibrot", "--period", "1", "2",
                   "--window", "-2,0.5,-1.25,1.25", "--width-px", "120", "--height-px", "120")
    assert data["metrics"]["census"] == {"1": 1, "2": 1}


def test_tricorn_like_render(capsys, tmp_path):
    out = tmp_path / "tl.ppm"
    data = summary(capsys, "render-tricorn-like", "--width-px", "64", "--height-px", "128",
                   "--max-iter", "300", "--out", str(out))
    assert data["metrics"]["b_symmetry_mismatches"] == 0
