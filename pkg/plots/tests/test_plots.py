import struct

import numpy as np
import pytest

from nineplots import SchemaError, TraceBundle, render_rmse, render_traces
from nineplots.traces import quat_to_rpy_deg

STATE = ["qw", "qx", "qy", "qz", "vx", "vy", "vz", "px", "py", "pz"]
TRACE_HEADER = (["t"] + STATE + [f"P{i}{i}" for i in range(1, 10)]
                + ["innov_norm"])
TRUTH_HEADER = (["t"] + STATE + ["dW" + c for c in STATE]
                + ["bW" + c for c in STATE] + ["fx", "fy", "fz"])


def _write(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _state_row(t, yaw=0.0):
    # unit quaternion for a yaw rotation plus slowly moving v and p
    q = [np.cos(yaw / 2), 0.0, 0.0, np.sin(yaw / 2)]
    v = [0.1 * t, -0.2 * t, 0.05]
    p = [1.0 + t, 2.0 - t, 0.9]
    return q + v + p


def make_truth(path, n=50, dt=0.02):
    rows = []
    for j in range(n):
        t = j * dt
        s = _state_row(t, yaw=0.3 * t)
        rows.append([t] + s + s + s + [0.1, 0.05, -0.4])
    _write(path, TRUTH_HEADER, rows)


def make_trace(path, n=50, dt=0.02):
    rows = []
    for j in range(n):
        t = j * dt
        rows.append([t] + _state_row(t, yaw=0.3 * t + 0.1 / (1.0 + 5 * t))
                    + [0.01] * 9 + [0.001])
    _write(path, TRACE_HEADER, rows)


def make_summary(path, srs=None, proposed=None):
    comps = ["vx", "vy", "vz", "roll", "pitch", "yaw", "px", "py", "pz"]
    srs = srs if srs is not None else np.linspace(1.0, 9.0, 9)
    proposed = proposed if proposed is not None else np.linspace(0.5, 4.5, 9)
    with open(path, "w", encoding="utf-8") as f:
        f.write("component,srs,proposed\n")
        for c, a, b in zip(comps, srs, proposed):
            f.write(f"{c},{a:.17g},{b:.17g}\n")


def png_size(path):
    with open(path, "rb") as f:
        head = f.read(24)
    assert head[:8] == b"\x89PNG\r\n\x1a\n"
    return struct.unpack(">II", head[16:24])


@pytest.fixture
def truth(tmp_path):
    path = tmp_path / "truth.csv"
    make_truth(path)
    return str(path)


@pytest.fixture
def trace(tmp_path):
    path = tmp_path / "trace_proposed.csv"
    make_trace(path)
    return str(path)


class TestQuatToRpy:
    def test_yaw_only(self):
        r, p, y = quat_to_rpy_deg(np.array([np.cos(0.2)]), np.array([0.0]),
                                  np.array([0.0]), np.array([np.sin(0.2)]))
        assert abs(y[0] - np.degrees(0.4)) < 1e-9
        assert abs(r[0]) < 1e-12 and abs(p[0]) < 1e-12

    def test_roll_pitch(self):
        # quaternion for intrinsic ZYX angles (roll, pitch, yaw)
        roll, pitch, yaw = 0.3, -0.2, 0.5
        cr, sr = np.cos(roll / 2), np.sin(roll / 2)
        cp, sp = np.cos(pitch / 2), np.sin(pitch / 2)
        cy, sy = np.cos(yaw / 2), np.sin(yaw / 2)
        qw = cr * cp * cy + sr * sp * sy
        qx = sr * cp * cy - cr * sp * sy
        qy = cr * sp * cy + sr * cp * sy
        qz = cr * cp * sy - sr * sp * cy
        r, p, y = quat_to_rpy_deg(*(np.array([v]) for v in (qw, qx, qy, qz)))
        assert np.allclose([r[0], p[0], y[0]],
                           np.degrees([roll, pitch, yaw]), atol=1e-9)


class TestRenderTraces:
    def test_two_bundles_png(self, truth, trace, tmp_path):
        out = str(tmp_path / "fig.png")
        bundles = [
            TraceBundle(truth, trace, "proposed", frame="relative"),
            TraceBundle(truth, trace, "srs", frame="world"),
        ]
        assert render_traces(bundles, out) == out
        w, h = png_size(out)
        assert w > 0 and h > 0

    def test_truth_only(self, truth, tmp_path):
        out = str(tmp_path / "fig.png")
        render_traces([TraceBundle(truth)], out)
        assert png_size(out)[0] > 0

    def test_window_selection(self, truth, trace, tmp_path):
        out = str(tmp_path / "fig.svg")
        render_traces([TraceBundle(truth, trace, "p", window=(0.0, 0.3))], out)
        assert open(out).read(100).lstrip().startswith("<?xml")

    def test_rerender_identical_dimensions(self, truth, trace, tmp_path):
        a = str(tmp_path / "a.png")
        b = str(tmp_path / "b.png")
        bundles = [TraceBundle(truth, trace, "proposed")]
        render_traces(bundles, a)
        render_traces(bundles, b)
        assert png_size(a) == png_size(b)

    def test_missing_column_named(self, truth, tmp_path):
        bad = tmp_path / "bad.csv"
        rows = [[j * 0.02] + _state_row(j * 0.02)[:-1] for j in range(5)]
        _write(bad, ["t"] + STATE[:-1], rows)
        with pytest.raises(SchemaError, match="pz"):
            render_traces([TraceBundle(truth, str(bad), "x")],
                          str(tmp_path / "fig.png"))

    def test_empty_window_rejected(self, truth, trace, tmp_path):
        with pytest.raises(SchemaError, match="window"):
            render_traces([TraceBundle(truth, trace, "p", window=(90.0, 99.0))],
                          str(tmp_path / "fig.png"))

    def test_invalid_bundle(self, truth):
        with pytest.raises(ValueError):
            TraceBundle(truth, frame="body")
        with pytest.raises(ValueError):
            TraceBundle(truth, window=(1.0, 0.5))
        with pytest.raises(ValueError):
            render_traces([], "fig.png")


class TestRenderRmse:
    def test_grouped_chart(self, tmp_path):
        summary = tmp_path / "compare_summary.csv"
        make_summary(summary)
        out = str(tmp_path / "rmse.png")
        assert render_rmse(str(summary), out) == out
        assert png_size(out)[0] > 0

    def test_all_zero_summary(self, tmp_path):
        summary = tmp_path / "compare_summary.csv"
        make_summary(summary, srs=np.zeros(9), proposed=np.zeros(9))
        out = str(tmp_path / "rmse.png")
        render_rmse(str(summary), out)
        assert png_size(out)[0] > 0

    def test_missing_filter_column_named(self, tmp_path):
        summary = tmp_path / "compare_summary.csv"
        with open(summary, "w", encoding="utf-8") as f:
            f.write("component,proposed\n")
            f.write("yaw,1.0\n")
        with pytest.raises(SchemaError, match="srs"):
            render_rmse(str(summary), str(tmp_path / "rmse.png"))

    def test_missing_component_row_named(self, tmp_path):
        summary = tmp_path / "compare_summary.csv"
        with open(summary, "w", encoding="utf-8") as f:
            f.write("component,srs,proposed\n")
            f.write("yaw,1.0,0.5\n")
        with pytest.raises(SchemaError, match="px"):
            render_rmse(str(summary), str(tmp_path / "rmse.png"))


class TestCli:
    def test_plot_traces_cli(self, truth, trace, tmp_path, capsys):
        from nineplots.cli import plot_traces_main
        out = str(tmp_path / "fig.png")
        rc = plot_traces_main(["--truth", truth, "--trace", trace,
                               "--label", "proposed", "--out", out])
        assert rc == 0
        assert png_size(out)[0] > 0

    def test_plot_traces_cli_schema_error(self, truth, tmp_path, capsys):
        from nineplots.cli import plot_traces_main
        missing = str(tmp_path / "nope.csv")
        rc = plot_traces_main(["--truth", truth, "--trace", missing,
                               "--out", str(tmp_path / "fig.png")])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_plot_rmse_cli(self, tmp_path, capsys):
        from nineplots.cli import plot_rmse_main
        summary = tmp_path / "compare_summary.csv"
        make_summary(summary)
        out = str(tmp_path / "rmse.png")
        assert plot_rmse_main(["--summary", str(summary), "--out", out]) == 0
        assert png_size(out)[0] > 0

    def test_plot_rmse_cli_error(self, tmp_path, capsys):
        from nineplots.cli import plot_rmse_main
        rc = plot_rmse_main(["--summary", str(tmp_path / "none.csv"),
                             "--out", str(tmp_path / "rmse.png")])
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestEndToEndWithEstimator:
    def test_renders_from_real_estimator_outputs(self, tmp_path):
        """Criterion: the scripts render the transient figure and the RMSE
        chart from actual comparison-campaign outputs without error."""
        pytest.importorskip("ninekf")
        from ninekf.cli import main as ninekf_main
        from ninekf.config import DEFAULT_CONFIG

        cfg = tmp_path / "scenario.cfg"
        cfg.write_text(DEFAULT_CONFIG
                       .replace("duration = 10.0", "duration = 2.0")
                       .replace("steady_state_start = 5.0",
                                "steady_state_start = 1.0"))
        logs = str(tmp_path / "logs")
        assert ninekf_main(["simulate", "--config", str(cfg), "--seed", "5",
                            "--out", logs]) == 0
        for flt in ("proposed", "srs"):
            assert ninekf_main(["estimate", "--filter", flt, "--logs", logs,
                                "--init-error", "sample", "--seed", "5"]) == 0
        results = str(tmp_path / "results")
        assert ninekf_main(["compare", "--config", str(cfg), "--trials", "2",
                            "--seed", "5", "--out", results]) == 0

        fig = str(tmp_path / "transient.png")
        bundles = [
            TraceBundle(f"{logs}/truth.csv", f"{logs}/trace_proposed.csv",
                        "proposed", window=(0.0, 1.0), frame="relative"),
            TraceBundle(f"{logs}/truth.csv", f"{logs}/trace_srs.csv",
                        "srs", window=(0.0, 1.0), frame="world"),
        ]
        render_traces(bundles, fig)
        assert png_size(fig)[0] > 0

        chart = str(tmp_path / "rmse.png")
        render_rmse(f"{results}/compare_summary.csv", chart)
        assert png_size(chart)[0] > 0
