import json

import numpy as np
import pytest

import amc


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@pytest.fixture(scope="module")
def source():
    return amc.make_source("smooth", size=512, fov_deg=120.0, seed=3)


def test_so3_round_trip():
    w = np.array([0.1, -0.2, 0.3])
    r = amc.exp_so3(w)
    np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(amc.log_so3(r), w, atol=1e-12)
    assert amc.geodesic_distance(r, r) == 0.0
    with pytest.raises(amc.NearAntipodalError):
        amc.log_so3(rot_y(np.pi))


def test_track_recovers_rotation(source):
    k = amc.intrinsics_from_fov(160, 90, 60.0)
    rel = amc.exp_so3(np.array([0.01, 0.02, -0.005]))
    a = amc.rgb_to_gray(amc.render_view(source, np.eye(3), k))
    b = amc.rgb_to_gray(amc.render_view(source, rel, k))
    assert a.shape == (90, 160) and a.dtype == np.float32
    res = amc.track(a, b, k)
    assert np.degrees(amc.geodesic_distance(res["rotation"], rel.T)) < 0.1
    assert all(x > y for x, y in zip(res["loss_history"], res["loss_history"][1:]))


def test_pipeline_on_static_frames(source):
    k = amc.intrinsics_from_fov(160, 90, 60.0)
    frame = amc.render_view(source, np.eye(3), k)
    pipe = amc.Pipeline(k, 1.0 / 60.0, {"mode": "saccade", "n_avg": 3})
    for _ in range(4):
        step = pipe.process(frame)
    assert step["image"].shape == (68, 120, 3)
    assert step["mask"].max() == 3
    np.testing.assert_array_equal(step["image"], step["unstabilized"])
    assert step["metrics_mode"]["nf_rms"] == 0.0
    with pytest.raises(amc.ConfigError):
        amc.Pipeline(k, 1.0 / 60.0, {"n_trak": 5})


def test_metrics_of_shifted_ramp():
    x = np.arange(30, dtype=np.float32)
    prev = np.tile(0.1 * x, (20, 1))
    assert amc.normal_flow_rms(prev, prev - 0.05) == pytest.approx(0.5, abs=1e-4)
    assert amc.delta_i_rms(prev, prev + 0.1) == pytest.approx(0.1, abs=1e-6)


def test_cli_commands_end_to_end(tmp_path):
    ds = tmp_path / "ds"
    assert amc.synth(ds, preset="static", source_size=1024, frames=6) == 6
    report = amc.track_dataset(ds, tmp_path / "rot.csv")
    assert report["frames"] == 6 and report["max_error_deg"] < 1e-6
    summary = amc.stabilize(ds, {"output_dir": str(tmp_path / "out")})
    assert summary["frames"] == 6
    saved = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert saved["frames"] == 6
    m = amc.metrics(tmp_path / "out" / "frames", tmp_path / "m.csv")
    assert m["delta_i_rms"] == 0.0
    with pytest.raises(amc.DataError):
        amc.stabilize(tmp_path / "missing")
