import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from condmode import io
from condmode.cli import main
from condmode.density import JointKernelModel
from condmode.experiments import gen_sine_dataset
from condmode.regression import Dataset


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
positive = st.floats(min_value=1e-300, max_value=1e300, allow_nan=False, allow_infinity=False)


class TestFormats:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6).flatmap(lambda m: st.tuples(
        arrays(float, (m, 2), elements=finite),
        arrays(float, (m, 1), elements=finite),
        arrays(float, (m, 2), elements=positive),
        arrays(float, (m, 1), elements=positive),
    )))
    def test_model_round_trip(self, tmp_path_factory, blocks):
        xc, yc, xs, ys = blocks
        m = xc.shape[0]
        model = JointKernelModel(np.full(m, 1.0 / m), xc, yc, xs, ys)
        path = tmp_path_factory.mktemp("m") / "model.json"
        io.write_model(path, model, {"note": "x"})
        back, meta = io.read_model(path)
        assert back == model
        assert meta == {"note": "x"}
        for name in ("weights", "x_centers", "y_centers", "x_bandwidths", "y_bandwidths"):
            assert getattr(back, name).tobytes() == getattr(model, name).tobytes()

    def test_negative_zero_survives(self, tmp_path):
        model = JointKernelModel([1.0], [[-0.0]], [[0.0]], [[1.0]], [[1.0]])
        io.write_model(tmp_path / "m.json", model)
        back, _ = io.read_model(tmp_path / "m.json")
        assert np.signbit(back.x_centers[0, 0]) and not np.signbit(back.y_centers[0, 0])

    def test_model_is_json(self, tmp_path):
        model = JointKernelModel([0.25, 0.75], [[0.1], [0.2]], [[1.0], [2.0]], [[0.3], [0.3]], [[0.4], [0.4]])
        io.write_model(tmp_path / "m.json", model)
        doc = json.loads((tmp_path / "m.json").read_text())
        assert set(doc) == {"version", "dx", "dy", "weights", "x_centers", "y_centers", "x_bandwidths", "y_bandwidths"}
        assert doc["x_centers"] == [[0.10000000000000001], [0.20000000000000001]]

    def test_dataset_round_trip(self, tmp_path):
        data = gen_sine_dataset(50, 0.2, seed=2)
        io.write_dataset(tmp_path / "d.csv", data)
        assert (tmp_path / "d.csv").read_text().splitlines()[0] == "x1,y1"
        assert io.read_dataset(tmp_path / "d.csv") == data

    def test_dataset_multi_dim(self, tmp_path):
        data = Dataset(np.arange(6.0).reshape(3, 2), np.arange(9.0).reshape(3, 3) / 7)
        io.write_dataset(tmp_path / "d.csv", data)
        assert (tmp_path / "d.csv").read_text().splitlines()[0] == "x1,x2,y1,y2,y3"
        assert io.read_dataset(tmp_path / "d.csv") == data

    @pytest.mark.parametrize(
        "text, line",
        [
            ("x1,y1\n1,2\n3,oops\n", 3),
            ("x1,y1\n1,2,3\n", 2),
            ("a,b\n1,2\n", 1),
            ("x1,y1\n1,nan\n", 2),
            ("", 1),
        ],
    )
    def test_malformed_dataset(self, tmp_path, text, line):
        (tmp_path / "bad.csv").write_text(text)
        with pytest.raises(io.FileFormatError) as exc:
            io.read_dataset(tmp_path / "bad.csv")
        assert exc.value.line == line

    def test_mixture_round_trip(self, tmp_path, golden_mixture):
        io.write_mixture(tmp_path / "mix.json", golden_mixture)
        back = io.read_mixture(tmp_path / "mix.json")
        for name in ("weights", "centers", "bandwidths"):
            np.testing.assert_array_equal(getattr(back, name), getattr(golden_mixture, name))


class TestGen:
    def test_byte_identical(self, tmp_path):
        assert run("gen", "sine", "--n", 10, "--sigma", 0, "--seed", 7, "--out", tmp_path / "a.csv") == 0
        assert run("gen", "sine", "--n", 10, "--sigma", 0, "--seed", 7, "--out", tmp_path / "b.csv") == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_zero_n(self, tmp_path, capsys):
        assert run("gen", "sine", "--n", 0, "--seed", 7, "--out", tmp_path / "a.csv") == 2
        assert "usage" in capsys.readouterr().err

    def test_reload(self, tmp_path):
        run("gen", "ambiguous", "--n", 40, "--seed", 1, "--out", tmp_path / "a.csv")
        assert io.read_dataset(tmp_path / "a.csv").n == 40

    def test_io_failure(self, tmp_path):
        assert run("gen", "sine", "--n", 5, "--out", tmp_path / "missing" / "a.csv") == 1


class TestFit:
    def test_one_row(self, tmp_path):
        (tmp_path / "d.csv").write_text("x1,y1\n0.5,1.5\n")
        assert run("fit", tmp_path / "d.csv", "--bandwidth", "0.2,0.3", "--out", tmp_path / "m.json") == 0
        model, meta = io.read_model(tmp_path / "m.json")
        assert model.m == 1 and model.weights[0] == 1.0
        assert meta["bandwidth"] == [0.2, 0.3]

    def test_round_trip(self, tmp_path):
        data = gen_sine_dataset(30, 0.2, seed=5)
        io.write_dataset(tmp_path / "d.csv", data)
        run("fit", tmp_path / "d.csv", "--bandwidth", "0.1", "--out", tmp_path / "m.json")
        model, _ = io.read_model(tmp_path / "m.json")
        np.testing.assert_array_equal(model.weights, np.full(30, 1 / 30))
        io.write_model(tmp_path / "m2.json", model, io.read_model(tmp_path / "m.json")[1])
        assert (tmp_path / "m.json").read_bytes() == (tmp_path / "m2.json").read_bytes()

    def test_loo_grid(self, tmp_path):
        io.write_dataset(tmp_path / "d.csv", gen_sine_dataset(300, 0.2, seed=5))
        assert run("fit", tmp_path / "d.csv", "--loo-grid", "0.05,0.1,0.2", "--out", tmp_path / "m.json") == 0
        _, meta = io.read_model(tmp_path / "m.json")
        assert meta["selection"] == "loo"
        assert meta["bandwidth"][0] in (0.05, 0.1, 0.2)

    def test_malformed_csv(self, tmp_path, capsys):
        (tmp_path / "d.csv").write_text("x1,y1\n1,2\n3,x\n")
        assert run("fit", tmp_path / "d.csv", "--bandwidth", "1", "--out", tmp_path / "m.json") == 1
        assert "line 3" in capsys.readouterr().err

    def test_empty_grid(self, tmp_path):
        (tmp_path / "d.csv").write_text("x1,y1\n1,2\n3,4\n")
        assert run("fit", tmp_path / "d.csv", "--loo-grid", "", "--out", tmp_path / "m.json") == 2

    def test_bandwidth_arity(self, tmp_path):
        (tmp_path / "d.csv").write_text("x1,y1\n1,2\n")
        assert run("fit", tmp_path / "d.csv", "--bandwidth", "1,2,3", "--out", tmp_path / "m.json") == 2


@pytest.fixture
def single_kernel_model(tmp_path):
    path = tmp_path / "single.json"
    io.write_model(path, JointKernelModel([1.0], [[0.0]], [[2.5]], [[1.0]], [[0.4]]))
    return path


class TestPredict:
    def test_nw_single_kernel(self, tmp_path, single_kernel_model):
        out = tmp_path / "p.csv"
        assert run("predict", single_kernel_model, "--method", "nw", "--x", 0.3, "--out", out) == 0
        rows = read_csv(out)
        assert float(rows[0]["y1"]) == 2.5
        assert rows[0]["status"] == "ok"

    def test_mode_single_kernel(self, tmp_path, single_kernel_model):
        out = tmp_path / "p.csv"
        assert run("predict", single_kernel_model, "--method", "mode", "--seed", 1, "--x", 0.3, "--out", out) == 0
        row = read_csv(out)[0]
        assert float(row["y1"]) == pytest.approx(2.5, abs=1e-6)
        assert float(row["density"]) == pytest.approx(1 / (np.sqrt(2 * np.pi) * 0.4), rel=1e-9)

    def test_golden_mixture_dummy_x(self, tmp_path):
        model = JointKernelModel(
            [0.45, 0.45, 0.1],
            x_centers=np.zeros((3, 1)),
            y_centers=[[1.0, 1.0], [-1.0, -1.0], [-1.5, 1.5]],
            x_bandwidths=np.ones((3, 1)),
            y_bandwidths=[[1.0, 1.0], [1.0, 1.0], [0.5, 0.5]],
        )
        io.write_model(tmp_path / "m.json", model)
        out = tmp_path / "p.csv"
        assert run("predict", tmp_path / "m.json", "--method", "mode", "--x", 0, "--seed", 3, "--out", out) == 0
        row = read_csv(out)[0]
        y = np.array([float(row["y1"]), float(row["y2"])])
        assert min(np.linalg.norm(y - 1), np.linalg.norm(y + 1)) < 0.15

    def test_query_file(self, tmp_path, single_kernel_model):
        (tmp_path / "q.csv").write_text("x1\n0\n1\n2\n")
        out = tmp_path / "p.csv"
        assert run("predict", single_kernel_model, "--method", "nw", "--queries", tmp_path / "q.csv", "--out", out) == 0
        assert len(read_csv(out)) == 3

    def test_dimension_mismatch(self, single_kernel_model):
        assert run("predict", single_kernel_model, "--x", "0,1") == 2

    def test_outside_support_flagged(self, tmp_path, single_kernel_model, capsys):
        out = tmp_path / "p.csv"
        assert run("predict", single_kernel_model, "--method", "nw", "--x", 0, "--x", 1e200, "--out", out) == 0
        rows = read_csv(out)
        assert [r["status"] for r in rows] == ["ok", "outside_support"]
        assert "1 queries outside" in capsys.readouterr().err

    def test_missing_model(self, tmp_path):
        assert run("predict", tmp_path / "nope.json", "--x", 0) == 1


class TestModeCommand:
    def test_golden_mixture(self, tmp_path, golden_mixture):
        io.write_mixture(tmp_path / "mix.json", golden_mixture)
        out = tmp_path / "mode.csv"
        assert run("mode", tmp_path / "mix.json", "--seed", 5, "--out", out) == 0
        row = read_csv(out)[0]
        y = np.array([float(row["y1"]), float(row["y2"])])
        assert min(np.linalg.norm(y - 1), np.linalg.norm(y + 1)) < 0.1
        assert float(row["density"]) >= float(row["best_sample_density"])


class TestBenchmark:
    def test_unknown_experiment(self, tmp_path):
        assert run("benchmark", "nope", "--out", tmp_path) == 2

    def test_byte_identical_and_consistent(self, tmp_path):
        args = ["benchmark", "ambiguous", "--n", 300, "--q", 200, "--queries", 20]
        assert run(*args, "--out", tmp_path / "a") == 0
        assert run(*args, "--out", tmp_path / "b") == 0
        for name in ("ambiguous_records.csv", "ambiguous_summary.json", "ambiguous_plot.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        rep = io.read_report(tmp_path / "a", "ambiguous")
        assert rep.recompute_summary() == rep.summary
        plot = read_csv(tmp_path / "a" / "ambiguous_plot.csv")
        assert list(plot[0]) == ["x", "y_mode", "y_nw", "branch_a", "branch_b"]

    def test_sine_default_config(self, tmp_path):
        assert run("benchmark", "sine", "--out", tmp_path) == 0
        doc = json.loads((tmp_path / "sine_summary.json").read_text())
        assert doc["summary"]["nw_rmse"] <= doc["summary"]["mode_rmse"]
        assert doc["config"]["s"] == [0.1, 0.1] and doc["config"]["n"] == 1000
        plot = read_csv(tmp_path / "sine_plot.csv")
        assert list(plot[0]) == ["x", "y_mode", "y_nw", "y_true"] and len(plot) == 200
        rep = io.read_report(tmp_path, "sine")
        assert rep.recompute_summary() == pytest.approx(rep.summary)


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "condmode", "gen", "sine", "--n", "3", "--out", str(tmp_path / "d.csv")],
        capture_output=True,
    )
    assert proc.returncode == 0
    assert io.read_dataset(tmp_path / "d.csv").n == 3
