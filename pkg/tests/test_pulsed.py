import json
import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

import cohscat as cs

PARAMS = cs.default_cavity_params()  # t1 = 0.1072 ns, t2 = 2*t1


def make_train(area_pi, fwhm, n_pairs):
    return cs.PulseTrain(
        pulse_area=area_pi * math.pi,
        pulse_fwhm=fwhm,
        separation=2.36,
        pair_period=13.1,
        n_pairs=n_pairs,
    )


def test_train_validation():
    with pytest.raises(ValueError):
        cs.PulseTrain(pulse_area=1.0, pulse_fwhm=3.0, separation=2.36, pair_period=13.1)
    with pytest.raises(ValueError):
        cs.PulseTrain(pulse_area=1.0, pulse_fwhm=0.1, separation=14.0, pair_period=13.1)
    with pytest.raises(ValueError):
        cs.PulseTrain(pulse_area=-1.0, pulse_fwhm=0.1, separation=2.0, pair_period=13.0)


def test_rabi_curve_examples():
    fwhm = PARAMS.t1 / 1000.0
    curve = dict(cs.rabi_curve(PARAMS, [0.0, 0.71 * math.pi, math.pi], fwhm))
    assert curve[0.0] == 0.0
    assert curve[math.pi] >= 0.98
    assert curve[0.71 * math.pi] == pytest.approx(math.sin(0.71 * math.pi / 2.0) ** 2, rel=0.02)


def test_rabi_curve_maxima_at_odd_pi():
    fwhm = PARAMS.t1 / 1000.0
    areas = np.linspace(0.0, 4.0, 41) * math.pi
    probs = np.array([p for _, p in cs.rabi_curve(PARAMS, areas, fwhm)])
    # local maxima of the sampled curve sit at pi and 3*pi
    peaks = [areas[i] for i in range(1, 40) if probs[i] > probs[i - 1] and probs[i] > probs[i + 1]]
    assert np.allclose(peaks, [math.pi, 3.0 * math.pi], atol=areas[1] - areas[0])


def test_zero_area_gives_empty_stream():
    train = make_train(0.0, 0.01, 200)
    # zero-area "pulses" cannot excite anything
    train = cs.PulseTrain(pulse_area=0.0, pulse_fwhm=0.01, separation=2.36,
                          pair_period=13.1, n_pairs=200)
    stream = cs.simulate_stream(PARAMS, train, seed=1)
    assert stream.n_tags == 0


def test_impulsive_pi_pulse_statistics():
    train = make_train(1.0, PARAMS.t1 / 1000.0, 50000)  # 1e5 pulses
    stream = cs.simulate_stream(PARAMS, train, seed=42)
    assert stream.mean_per_pulse == pytest.approx(1.0, abs=0.01)
    counts = stream.counts_per_pulse()
    assert (counts >= 2).sum() / counts.size < 0.005


def test_reexcitation_grows_with_pulse_width():
    n = 50000
    p2 = {}
    for fwhm in (0.25 * PARAMS.t1, 0.53 * PARAMS.t1):
        stream = cs.simulate_stream(PARAMS, make_train(1.0, fwhm, n), seed=9)
        counts = stream.counts_per_pulse()
        p2[fwhm] = (counts >= 2).sum() / counts.size
    assert 0.0 < p2[0.25 * PARAMS.t1] < p2[0.53 * PARAMS.t1]


def test_mc_mean_matches_ode_expectation():
    fwhm = 0.057
    train = make_train(0.71, fwhm, 50000)  # 1e5 pulses
    stream = cs.simulate_stream(PARAMS, train, seed=3)
    expected = cs.rabi_curve(PARAMS, [0.71 * math.pi], fwhm)[0][1]
    n_pulses = 2 * train.n_pairs
    sigma = math.sqrt(expected / n_pulses)  # counts are nearly Bernoulli
    assert abs(stream.mean_per_pulse - expected) < 3.0 * sigma + 0.002


def test_stream_determinism_and_worker_equivalence():
    train = make_train(0.71, 0.057, 4000)
    a = cs.simulate_stream(PARAMS, train, seed=11)
    b = cs.simulate_stream(PARAMS, train, seed=11)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.pair_index, b.pair_index)
    assert np.array_equal(a.pulse_index, b.pulse_index)

    c = cs.simulate_stream(PARAMS, train, seed=11, workers=4)
    assert not np.array_equal(a.times, c.times)  # different substreams...
    ks = ks_2samp(np.diff(a.times), np.diff(c.times))  # ...same law
    assert ks.pvalue > 0.01
    c2 = cs.simulate_stream(PARAMS, train, seed=11, workers=4)
    assert np.array_equal(c.times, c2.times)


def test_dephasing_channel_keeps_emission_statistics():
    dephased = cs.EmitterParams(t1=PARAMS.t1, t2=0.6 * PARAMS.t1)
    train = make_train(1.0, PARAMS.t1 / 1000.0, 20000)
    stream = cs.simulate_stream(dephased, train, seed=5)
    # an impulsive pi pulse inverts regardless of t2; emission count stays ~1
    assert stream.mean_per_pulse == pytest.approx(1.0, abs=0.02)


def test_synthetic_stream_matches_targets():
    train = make_train(0.71, PARAMS.t1 / 1000.0, 100000)
    mu = 0.8
    stream = cs.synthetic_stream(PARAMS, train, mean_per_pulse=mu, g_target=0.167, seed=21)
    assert stream.mean_per_pulse == pytest.approx(mu, abs=0.01)
    report = cs.hbt_analyze(stream)
    assert report.g_metric == pytest.approx(0.167, abs=3.0 * report.g_metric_err + 0.005)
    with pytest.raises(ValueError):
        cs.synthetic_stream(PARAMS, train, mean_per_pulse=0.1, g_target=300.0, seed=1)


def test_hbt_single_photon_stream():
    train = make_train(0.71, PARAMS.t1 / 1000.0, 20000)
    stream = cs.synthetic_stream(PARAMS, train, mean_per_pulse=1.0, g_target=0.0, seed=2)
    report = cs.hbt_analyze(stream)
    assert report.g_metric == 0.0
    assert report.g2_zero == 0.0
    sides = [report.peak_areas[d] / (train.n_pairs - d) for d in range(2, 11)]
    assert np.std(sides) / np.mean(sides) < 0.01  # flat side clusters


def test_hbt_rejects_empty_and_reports_errors():
    train = make_train(0.71, 0.057, 5000)
    stream = cs.simulate_stream(PARAMS, train, seed=6)
    report = cs.hbt_analyze(stream)
    assert report.g_metric_err > 0.0
    assert 0 in report.peak_areas and 2 in report.peak_areas
    empty = cs.PhotonStream(
        times=np.empty(0), pair_index=np.empty(0, int), pulse_index=np.empty(0, int),
        seed=0, params=PARAMS, train=train,
    )
    with pytest.raises(ValueError):
        cs.hbt_analyze(empty)


@pytest.mark.parametrize("overlap_true,g,tol", [(1.0, 0.0, 0.01), (0.0, 0.0, 0.01)])
def test_pulsed_hom_trivial_overlaps(overlap_true, g, tol):
    train = make_train(0.71, PARAMS.t1 / 1000.0, 2000000)
    mu = math.sin(0.71 * math.pi / 2.0) ** 2
    stream = cs.synthetic_stream(PARAMS, train, mean_per_pulse=mu, g_target=g, seed=17)
    report = cs.pulsed_hom(stream, overlap_true, seed=23)
    assert report.aux["overlap_raw"] == pytest.approx(overlap_true, abs=tol)
    assert report.overlap == pytest.approx(overlap_true, abs=tol)


def test_pulsed_hom_recovers_contaminated_overlap():
    train = make_train(0.71, PARAMS.t1 / 1000.0, 400000)
    mu = math.sin(0.71 * math.pi / 2.0) ** 2
    stream = cs.synthetic_stream(PARAMS, train, mean_per_pulse=mu, g_target=0.167, seed=29)
    report = cs.pulsed_hom(stream, 0.90, seed=31)
    assert report.overlap == pytest.approx(0.90, abs=0.02)
    assert report.g_metric == pytest.approx(0.167, abs=0.01)
    assert report.aux["correction"] > 1.5  # multi-photon correction is substantial


def test_pulsed_hom_estimator_bias_is_small():
    """Average the estimator over independent streams: bias < 0.01."""
    train = make_train(0.71, PARAMS.t1 / 1000.0, 200000)
    mu = math.sin(0.71 * math.pi / 2.0) ** 2
    estimates = []
    for seed in range(5):
        stream = cs.synthetic_stream(PARAMS, train, mean_per_pulse=mu, g_target=0.167, seed=seed)
        estimates.append(cs.pulsed_hom(stream, 0.90, seed=seed + 100).aux["overlap_raw"])
    assert abs(float(np.mean(estimates)) - 0.90) < 0.01


def test_pulsed_hom_delay_mismatch_rejected():
    train = make_train(0.71, PARAMS.t1 / 1000.0, 1000)
    stream = cs.synthetic_stream(PARAMS, train, mean_per_pulse=0.8, g_target=0.0, seed=1)
    with pytest.raises(ValueError):
        cs.pulsed_hom(stream, 0.9, seed=2, delay=1.0)


def test_coincidence_histogram_pairs():
    times = np.array([0.0, 0.1, 5.0])
    centers, counts = cs.coincidence_histogram(times, max_lag=1.0, bin_width=0.2)
    assert counts.sum() == 2  # the 0.1 lag counted at +-
    assert len(centers) == len(counts)


def test_export_stream_roundtrip(tmp_path):
    train = make_train(0.71, 0.057, 500)
    stream = cs.simulate_stream(PARAMS, train, seed=8)
    csv_path = tmp_path / "stream.csv"
    sidecar = cs.export_stream(stream, csv_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "pair_index,pulse_index,time_ns"
    assert len(lines) == stream.n_tags + 1
    meta = json.loads((tmp_path / "stream.csv.json").read_text())
    assert meta["seed"] == 8
    assert meta["train"]["n_pairs"] == 500
    assert meta["params"]["t1"] == pytest.approx(PARAMS.t1)
    assert sidecar.endswith("stream.csv.json")
