import json

import numpy as np
import pytest

from curvespec import io
from curvespec.cli import main
from curvespec.estimator import ContourStack
from curvespec.spectral import make_grid


def write_cfg(path, **kw):
    d = {
        "truth": {"template": "five-lobe"},
        "noise": {"model": "p-order", "alpha": 1.0, "beta": 10.0, "p": 2, "J_max": 10},
        "n": 31,
        "J": 10,
        "T": 4,
        "seed": 3,
    }
    d.update(kw)
    path.write_text(json.dumps(d))
    return path


def test_simulate_zero_noise_circle(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", truth={"template": "circle", "scale": 2.0}, noise={"sigma2": [0.0]})
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "s.json")]) == 0
    stack = io.read_contours(tmp_path / "s.json")
    r = np.hypot(stack.points[..., 0], stack.points[..., 1])
    np.testing.assert_allclose(r, 2.0, atol=1e-12)
    side = io.read_json(tmp_path / "s.truth.json")
    assert side["seed"] == 3 and "generator" in side["rng"]


def test_simulate_estimate_zero_noise_matches_truth(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", noise={"sigma2": [0.0]})
    main(["simulate", str(cfg), "--out", str(tmp_path / "s.json")])
    assert main(["estimate", str(tmp_path / "s.json"), "--out", str(tmp_path / "f.json"),
                 "--truth", str(tmp_path / "s.truth.json"), "--svg"]) == 0
    rows = np.loadtxt(tmp_path / "f.curve.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(rows[:, 1:3], rows[:, 3:5], atol=1e-10)
    assert (tmp_path / "f.svg").read_text().startswith("<svg")
    assert (tmp_path / "f.variances.svg").exists()


def test_variance_count(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", n=125, T=99)
    main(["simulate", str(cfg), "--out", str(tmp_path / "s.json")])
    main(["estimate", str(tmp_path / "s.json"), "--out", str(tmp_path / "f.json")])
    assert len(io.read_json(tmp_path / "f.json")["noise_var"]) == 11
    assert len((tmp_path / "f.variances.csv").read_text().splitlines()) == 12


def test_evaluate_budget(tmp_path):
    cfg = write_cfg(tmp_path / "c.json")
    main(["simulate", str(cfg), "--out", str(tmp_path / "s.json")])
    main(["estimate", str(tmp_path / "s.json"), "--out", str(tmp_path / "f.json")])
    assert main(["evaluate", str(tmp_path / "f.json"), str(tmp_path / "s.truth.json"),
                 "--out", str(tmp_path / "e.json")]) == 0
    e = io.read_json(tmp_path / "e.json")
    assert e["tail_bias"] + e["variance_term"] == pytest.approx(e["realized_ise"], rel=1e-10)
    assert e["expected_ise"] > 0
    assert main(["evaluate", str(tmp_path / "f.json")]) == 1


def test_estimate_single_contour(tmp_path):
    g = make_grid(9)
    io.write_contours(tmp_path / "one.json", ContourStack(g, np.random.default_rng(0).standard_normal((1, 9, 2))))
    assert main(["estimate", str(tmp_path / "one.json"), "--out", str(tmp_path / "f.json")]) == 1
    assert main(["estimate", str(tmp_path / "one.json"), "--out", str(tmp_path / "f.json"), "--means-only"]) == 0


def test_align_command(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", truth={"template": "three-lobe"}, noise={"sigma2": [0.0]}, n=73, T=2,
                    misalignment={"max_shift": 2.0, "m": 0})
    main(["simulate", str(cfg), "--out", str(tmp_path / "s.json")])
    assert main(["align", str(tmp_path / "s.json"), "--J", "20", "--out", str(tmp_path / "a.json"),
                 "--grid-search-shifts"]) == 0
    a = io.read_json(tmp_path / "a.json")
    assert len(a["alphas"]) == 3 and a["alphas"][0] == 0.0
    assert a["M"] < 1e-6 * a["initial_M"]
    assert a["weights"] == [[], [], []]
    assert a["average_error_display"] == f"{np.sqrt(a['M'] / (3 * 73)):.2f}"
    aligned = io.read_contours(tmp_path / "a.aligned.json")
    assert aligned.points.shape == (3, 73, 2)


def test_align_identical_contours(tmp_path):
    g = make_grid(21)
    pts = np.column_stack([np.cos(g.theta), np.sin(2 * g.theta)])
    io.write_contours(tmp_path / "id.json", ContourStack(g, np.stack([pts] * 3)))
    assert main(["align", str(tmp_path / "id.json"), "--m", "1", "--out", str(tmp_path / "a.json")]) == 0
    a = io.read_json(tmp_path / "a.json")
    assert a["M"] < 1e-20
    assert np.abs(a["alphas"]).max() == 0 and np.abs(a["weights"]).max() == 0


def test_text_contour_input(tmp_path):
    g = make_grid(5)
    lines = []
    for t in range(2):
        lines += [f"{np.cos(x) + t},{np.sin(x)}" for x in g.theta] + [""]
    (tmp_path / "c.txt").write_text("\n".join(lines))
    stack = io.read_contours(tmp_path / "c.txt")
    assert stack.points.shape == (2, 5, 2)


def test_even_n_schema_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", n=4, J=1)
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "s.json")]) == 1
    assert "odd" in capsys.readouterr().err


def test_bad_contour_file_diagnostics(tmp_path, capsys):
    (tmp_path / "bad.json").write_text('{"version": "curvespec/1", "n": 5, "contours": [[[0, 0]]]}')
    assert main(["estimate", str(tmp_path / "bad.json"), "--out", str(tmp_path / "f.json")]) == 1
    assert "contours[0]" in capsys.readouterr().err
    (tmp_path / "broken.json").write_text('{\n"n": 5,\n')
    assert main(["estimate", str(tmp_path / "broken.json"), "--out", str(tmp_path / "f.json")]) == 1
    assert "line" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["estimate", str(tmp_path / "nope.json"), "--out", str(tmp_path / "f.json")]) == 1
    assert "nope.json" in capsys.readouterr().err


def test_usage_errors_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_numeric_failure_exit_2(tmp_path, monkeypatch, capsys):
    from curvespec import cli
    from curvespec.diffeo import FlowError

    g = make_grid(9)
    io.write_contours(tmp_path / "s.json", ContourStack(g, np.random.default_rng(0).standard_normal((2, 9, 2))))

    def boom(*a, **k):
        raise FlowError("flow is not monotone")

    monkeypatch.setattr(cli, "align", boom)
    assert main(["align", str(tmp_path / "s.json"), "--m", "1", "--out", str(tmp_path / "a.json")]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_experiment_command(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", replications=3)
    assert main(["experiment", str(cfg), "--out", str(tmp_path / "r.json"), "--svg"]) == 0
    r = io.read_json(tmp_path / "r.json")
    assert r["kind"] == "estimation" and len(r["records"]["ise"]) == 3
    assert (tmp_path / "r.csv").exists() and (tmp_path / "r.svg").exists()


def test_simulate_is_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path / "c.json")
    main(["simulate", str(cfg), "--out", str(tmp_path / "a.json")])
    main(["simulate", str(cfg), "--out", str(tmp_path / "b.json")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    main(["simulate", str(cfg), "--out", str(tmp_path / "c2.json"), "--seed", "4"])
    assert (tmp_path / "a.json").read_bytes() != (tmp_path / "c2.json").read_bytes()


def test_float_round_trip(tmp_path):
    g = make_grid(7)
    pts = np.random.default_rng(1).standard_normal((2, 7, 2)) * 1e3
    io.write_contours(tmp_path / "x.json", ContourStack(g, pts))
    assert io.read_contours(tmp_path / "x.json").points.tobytes() == pts.tobytes()
