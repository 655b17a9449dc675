import math

import numpy as np
import pytest
from PIL import Image

import imgstat


def test_version():
    assert imgstat.__version__.startswith("imgstat ")


def test_welch_matches_scipy_value():
    r = imgstat.welch_t_test([2.1, 2.3, 2.5, 2.7, 2.9], [1.0, 1.4, 1.8, 2.2])
    assert r["t"] == pytest.approx(3.0571479921904094, abs=1e-10)
    assert r["df"] == pytest.approx(4.749414519906323, abs=1e-9)
    assert r["p"] == pytest.approx(0.030145716488960337, abs=1e-8)


def test_identical_samples():
    r = imgstat.welch_t_test([1.0, 2.0, 4.0], [1.0, 2.0, 4.0])
    assert r["t"] == 0.0 and r["p"] == 1.0


def test_two_point_kurtosis():
    s = imgstat.moment_summary([-1.0, 1.0] * 50)
    assert s["kurtosis"] == 1.0
    assert s["skewness"] == 0.0


def test_weibull_recovery():
    rng = np.random.default_rng(3)
    x = 2.0 * rng.weibull(1.3, 50000)
    f = imgstat.fit_weibull(x.tolist())
    assert f["gamma"] == pytest.approx(1.3, rel=0.02)
    assert f["beta"] == pytest.approx(2.0, rel=0.02)


def test_region_areas_checkerboard():
    board = np.where((np.add.outer(np.arange(7), np.arange(7)) % 2) == 0, 11, 200).astype(np.uint8)
    assert imgstat.region_areas(board, n_levels=2, connectivity=4) == {1: 49}


def test_region_law_exact():
    hist = {s: round(1e7 / s**2) for s in range(1, 90)}
    assert imgstat.fit_region_law(hist)["c"] == pytest.approx(-2.0, abs=0.05)


def test_spectrum_parseval_and_slope():
    field = imgstat.power_law_field(128, 2.0, seed=11)
    assert field.shape == (128, 128)
    power = imgstat.power_spectrum(field)
    centred = field - field.mean()
    assert power.sum() / field.size == pytest.approx((centred**2).sum(), rel=1e-9)
    freqs, prof = imgstat.axis_profile(field, "h")
    assert len(freqs) == 64 and freqs[-1] == 0.5
    assert 1.5 < imgstat.fit_power_law(freqs, prof)["alpha"] < 2.5


def test_error_carries_code():
    with pytest.raises(imgstat.ImgstatError) as info:
        imgstat.moment_summary([1.0, 1.0, 1.0])
    assert info.value.code == "DegenerateSample"
    with pytest.raises(imgstat.ImgstatError):
        imgstat.power_spectrum(np.zeros((4, 8)))


def _write_corpus(path, seeds):
    path.mkdir()
    for s in seeds:
        f = imgstat.power_law_field(128, 2.0, s)
        g = np.clip(np.round(128 + 40 * f), 0, 255).astype(np.uint8)
        Image.fromarray(np.stack([g, g, g], axis=-1)).save(path / f"img_{s:03d}.png")


def test_analyze_and_compare(tmp_path):
    _write_corpus(tmp_path / "a", range(6))
    _write_corpus(tmp_path / "b", range(100, 106))
    a = imgstat.analyze(tmp_path / "a", threads=1)
    b = imgstat.analyze(tmp_path / "b", threads=2)
    assert len(a["images"]) == 6
    assert imgstat.analyze(tmp_path / "a", threads=2) == a
    report = imgstat.compare(a, b)
    assert len(report["rows"]) == 16
    same = imgstat.compare(a, a)
    assert all(row["p_value"] == 1.0 for row in same["rows"] if row["p_value"] is not None)


def test_analyze_rejects_bad_options(tmp_path):
    with pytest.raises(imgstat.ImgstatError):
        imgstat.analyze(tmp_path, no_such_option=1)
    with pytest.raises(imgstat.ImgstatError) as info:
        imgstat.analyze(tmp_path)
    assert info.value.exit_code == 2
    _write_corpus(tmp_path / "c", [1])
    with pytest.raises(imgstat.ImgstatError) as info:
        imgstat.analyze(tmp_path / "c", sigma=-1.0)
    assert info.value.exit_code == 3
