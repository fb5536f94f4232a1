import numpy as np
import pytest

from lfdepth import DispRange, LightField, bench_cost, evaluate
from lfdepth import metrics
from conftest import random_lf


def test_evaluate_perfect_estimate(rng):
    gt = rng.random((8, 8))
    report = evaluate(gt.copy(), gt)
    assert report.mse_x100 == 0.0
    assert all(pct == 0.0 for pct in report.badpix.values())
    assert report.pixel_count == 64


def test_evaluate_known_error():
    gt = np.zeros((2, 2))
    est = np.array([[0.1, 0.0], [0.0, 0.0]])
    report = evaluate(est, gt)
    # MSE x100 = 100 * (0.1^2 / 4) = 0.25
    assert abs(report.mse_x100 - 0.25) <= 1e-12
    assert report.badpix[0.07] == 25.0
    assert report.badpix[0.03] == 25.0
    assert report.badpix[0.01] == 25.0


def test_evaluate_threshold_is_strict():
    gt = np.zeros((1, 1))
    report = evaluate(np.full((1, 1), 0.07), gt)
    assert report.badpix[0.07] == 0.0  # |err| == eps does not count as bad
    assert report.badpix[0.03] == 100.0


def test_evaluate_with_mask():
    gt = np.zeros((2, 2))
    est = np.array([[1.0, 0.0], [0.0, 0.0]])
    mask = np.array([[False, True], [True, True]])
    report = evaluate(est, gt, eval_mask=mask)
    assert report.pixel_count == 3
    assert report.mse_x100 == 0.0


def test_evaluate_errors(rng):
    with pytest.raises(ValueError):
        evaluate(np.zeros((2, 2)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        evaluate(np.zeros((2, 2)), np.zeros((2, 2)), eval_mask=np.zeros((3, 3), bool))
    with pytest.raises(ValueError):
        evaluate(np.zeros((2, 2)), np.zeros((2, 2)),
                 eval_mask=np.zeros((2, 2), bool))


def test_report_formatting():
    report = evaluate(np.zeros((4, 4)), np.zeros((4, 4)))
    text = report.format()
    assert "MSE x100" in text and "BadPix(0.07)" in text
    kv = report.to_kv()
    assert kv["pixels"] == "16"
    assert "badpix_0.07" in kv


def test_bench_smoke(rng):
    lf = random_lf(rng, 3, 3, 16, 16)
    report = bench_cost(lf, DispRange(-2, 2))
    assert [e.name for e in report.entries] == ["shift-and-concat", "oacc"]
    shift, oacc = report.entries
    # both routes reduced the same samples the same way
    assert shift.checksum == oacc.checksum
    assert oacc.peak_bytes < shift.peak_bytes
    assert shift.seconds >= 0 and oacc.seconds >= 0
    assert report.threads == 1 and report.repeats == 3
    text = report.format()
    assert "shift-and-concat" in text and "oacc" in text


def test_bench_peak_accounting(rng):
    lf = random_lf(rng, 3, 3, 16, 16)
    drange = DispRange(-2, 2)
    report = bench_cost(lf, drange)
    shift, oacc = report.entries
    vol_bytes = drange.count * 9 * 16 * 16 * 4
    assert shift.peak_bytes >= vol_bytes
    assert oacc.peak_bytes <= 2 * 16 * 16 * 8 + drange.count * 16 * 16 * 4


def test_bench_equality_gate(rng, monkeypatch):
    lf = random_lf(rng, 3, 3, 8, 8)

    real = metrics._oacc_mean

    def skewed(lf_, drange, mosaic, ledger):
        return real(lf_, drange, mosaic, ledger) + np.float32(0.01)

    monkeypatch.setattr(metrics, "_oacc_mean", skewed)
    with pytest.raises(RuntimeError, match="equality gate"):
        bench_cost(lf, DispRange(-1, 1))


def test_bench_rejects_low_repeats(rng):
    with pytest.raises(ValueError):
        bench_cost(random_lf(rng), DispRange(-1, 1), repeats=2)


def test_bench_threads_from_env(rng, monkeypatch):
    monkeypatch.setenv("LF_OACC_THREADS", "4")
    report = bench_cost(random_lf(rng, 3, 3, 8, 8), DispRange(-1, 1))
    assert report.threads == 4
