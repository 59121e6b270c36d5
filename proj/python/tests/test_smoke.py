import json
import math
import os
import pathlib

import numpy as np
import pytest

import stx

DATA = pathlib.Path(os.environ.get("STX_TEST_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "tests" / "data"))


def global_grid(values, start="2000-01", units="kg m-2 s-1"):
    nt, ny, nx = values.shape
    lat = np.linspace(-90.0, 90.0, ny + 1)
    lon = np.linspace(-180.0, 180.0, nx + 1)
    return stx.Grid(values, lat, lon, start=start, units=units, name="gpp")


def test_percentile_and_area():
    assert stx.percentile([1.0, 2.0, 3.0, 4.0, 5.0], 50) == 3.0
    r = 6371000.0
    assert stx.cell_area(-90, 90, 360) == pytest.approx(4 * math.pi * r * r, rel=1e-12)
    assert stx.month_seconds(2000, 2) == 29 * 86400


def test_ssa_groups_sum_to_series():
    t = np.arange(156, dtype=float)
    x = 0.01 * t + np.sin(2 * math.pi * t / 12) + 0.1 * np.cos(1.3 * t)
    d = stx.ssa_decompose(x)
    np.testing.assert_allclose(d["trend"] + d["annual"] + d["anomaly"], x, atol=1e-10)
    assert d["window"] == 72
    assert "annual" in d["groups"]


def test_threshold_and_labels():
    rng = np.random.default_rng(1)
    g = global_grid(rng.normal(size=(12, 6, 8)))
    res = stx.threshold_mask(g, percentile=10, tail="neg")
    assert res["mask"].shape == (12, 6, 8)
    assert res["count"] == int(res["mask"].sum())
    labels, n = stx.label_components(res["mask"], "6n", wrap_lon=True)
    assert labels.shape == res["mask"].shape
    assert set(np.unique(labels)) == set(range(n + 1))
    stats = stx.component_stats(g, res["mask"], "6n", wrap_lon=True)
    assert len(stats) == n
    assert sorted(s["rank"] for s in stats) == list(range(1, n + 1))


def test_block_is_one_component():
    m = np.zeros((4, 5, 6), dtype=np.uint8)
    m[1:3, 1:3, 2:4] = 1
    labels, n = stx.label_components(m, "6n")
    assert n == 1 and labels[1, 1, 2] == 1


def test_powerlaw_and_tls():
    sizes = [n for n in range(1, 200) for _ in range(int(round(1e5 * n ** -2.0)))]
    fit = stx.powerlaw_fit(sizes)
    assert fit["gamma"] == pytest.approx(2.0, abs=0.05)
    assert stx.natural_cutoff(1, 100, 2.0) == pytest.approx(100.0)
    slope, intercept = stx.tls_fit([0.0, 1.0, 2.0], [1.0, 3.0, 5.0])
    assert slope == pytest.approx(2.0) and intercept == pytest.approx(1.0)


def test_grid_round_trip(tmp_path):
    g = global_grid(np.arange(24, dtype=float).reshape(2, 3, 4))
    path = tmp_path / "g.stxg"
    stx.write_grid(g, path)
    back = stx.read_grid(path)
    np.testing.assert_array_equal(back.values, g.values)
    assert back.months == ["2000-01", "2000-02"]


def test_errors_are_typed(tmp_path):
    bad = tmp_path / "bad.stxg"
    bad.write_bytes(b"not a grid")
    with pytest.raises(stx.Error):
        stx.read_grid(bad)
    with pytest.raises(stx.DomainError):
        stx.label_components(np.zeros((2, 2, 2), dtype=np.uint8), "nope")


def test_run_pipeline(tmp_path):
    summary = stx.run_pipeline(DATA / "planted.cfg", out=tmp_path / "out")
    names = [s["structure"] for s in summary["structures"]]
    assert names
    assert summary["extreme_voxels"] > 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["version"] == stx.__version__
