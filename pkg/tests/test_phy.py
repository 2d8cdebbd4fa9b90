import dataclasses

import numpy as np
import pytest

from rachsim.config import RachConfig
from rachsim.phy import (DetectionCurve, OutcomeKind, PreambleTransmission,
                         UnsupportedPrachIndexError, collision_distinguishable,
                         detect_preambles, prach_opportunities,
                         preamble_tx_power)

COLLISION_THRESHOLD_M = 2.998e8 / (2 * 1.08e6)  # 138.796296... m

ALWAYS_DETECT = DetectionCurve.step(-1e9)
NEVER_DETECT = DetectionCurve.step(1e9)


def tx(ue, idx, dist, snr=0.0):
    return PreambleTransmission(ue_id=ue, preamble_index=idx, tx_counter=1,
                                tx_power_dbm=0.0, snr_at_enb_db=snr,
                                distance_m=dist)


# -- transmit power ---------------------------------------------------------

def test_power_examples():
    r = RachConfig()
    assert preamble_tx_power(r, 120.0, 1, 23.0) == 10.0
    assert preamble_tx_power(r, 140.0, 1, 23.0) == 23.0  # cap active
    assert preamble_tx_power(r, 120.0, 3, 23.0) == 14.0  # (3-1)*2 dB ramp


def test_power_matches_independent_oracle_exactly():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        init = float(rng.uniform(-120.0, -90.0))
        step = float(rng.uniform(0.0, 6.0))
        plc = float(rng.uniform(60.0, 170.0))
        counter = int(rng.integers(1, 200))
        pmax = float(rng.uniform(18.0, 30.0))
        r = dataclasses.replace(RachConfig(),
                                preamble_initial_received_target_power_dbm=init,
                                power_ramping_step_db=step)
        oracle = min(pmax, init + 0.0 + (counter - 1) * step + plc)
        assert preamble_tx_power(r, plc, counter, pmax) == oracle


def test_power_vectorized():
    r = RachConfig()
    p = preamble_tx_power(r, np.array([120.0, 140.0]), np.array([1, 1]), 23.0)
    assert p.tolist() == [10.0, 23.0]


# -- opportunity schedule ---------------------------------------------------

def test_schedule_index1():
    sched = prach_opportunities(1, 100)
    assert sched.times.tolist() == [4, 24, 44, 64, 84]


def test_schedule_short_horizon_empty():
    assert prach_opportunities(1, 4).times.size == 0


def test_schedule_strictly_increasing_all_indices():
    for idx in range(16):
        t = prach_opportunities(idx, 500).times
        assert np.all(np.diff(t) > 0)


def test_schedule_index0_and_dense_index():
    assert prach_opportunities(0, 50).times.tolist() == [1, 21, 41]
    assert prach_opportunities(14, 12).times.tolist() == list(range(12))


def test_unsupported_index_lists_supported():
    with pytest.raises(UnsupportedPrachIndexError, match=r"supported.*0"):
        prach_opportunities(63, 100)


# -- detection curve --------------------------------------------------------

def test_default_curve_meets_anchor():
    curve = DetectionCurve.default()
    assert curve.p_miss_at(-14.2) <= 1e-2


def test_curve_monotone_pointwise():
    curve = DetectionCurve.default()
    snr = np.linspace(-30.0, 5.0, 600)
    p = curve.p_miss_at(snr)
    assert np.all(np.diff(p) <= 1e-15)
    assert np.all((p >= 0) & (p <= 1))


def test_curve_clamps_outside_range():
    curve = DetectionCurve.from_points([(-20, 1.0), (-14.2, 0.01)])
    assert curve.p_miss_at(-40.0) == 1.0
    assert curve.p_miss_at(0.0) == 0.01


def test_curve_exact_points():
    pts = [(-20.0, 0.9), (-15.0, 0.1), (-14.2, 0.004)]
    curve = DetectionCurve.from_points(pts)
    for s, p in pts:
        assert curve.p_miss_at(s) == p


def test_curve_log_domain_interpolation():
    curve = DetectionCurve.from_points([(-30.0, 1.0), (-20.0, 0.01)])
    # halfway in SNR is halfway in log10(p): sqrt(1.0 * 0.01) = 0.1
    assert curve.p_miss_at(-25.0) == pytest.approx(0.1, rel=1e-12)


def test_curve_rejects_bad_tables():
    with pytest.raises(ValueError, match="non-increasing"):
        DetectionCurve.from_points([(-20, 0.5), (-10, 0.9)])
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        DetectionCurve.from_points([(-20, 1.5), (-10, 0.5)])
    with pytest.raises(ValueError, match="-14.2"):
        DetectionCurve.from_points([(-20, 1.0), (-10, 0.5)])  # anchor violated


def test_curve_from_file(tmp_path):
    path = tmp_path / "curve.txt"
    path.write_text("# snr_db p_miss\n-20 1.0\n-14.2 0.01\n-8 1e-6\n")
    curve = DetectionCurve.from_file(path)
    assert curve.p_miss_at(-14.2) == 0.01
    assert curve.sha256() == DetectionCurve.from_file(path).sha256()


def test_step_curve():
    curve = DetectionCurve.step(-10.0)
    assert curve.p_miss_at(-10.1) == 1.0
    assert curve.p_miss_at(-10.0) == 0.0
    assert curve.p_miss_at(5.0) == 0.0


# -- collision distinguishability ------------------------------------------

def test_collision_threshold_examples():
    assert not collision_distinguishable(300.0, 300.0)  # zero spread
    assert collision_distinguishable(500.0, 300.0)      # 200 m > 138.8 m
    assert not collision_distinguishable(400.0, 300.0)  # 100 m <= 138.8 m


def test_collision_threshold_boundary():
    just_below = COLLISION_THRESHOLD_M * (1 - 1e-6)
    just_above = COLLISION_THRESHOLD_M * (1 + 1e-6)
    assert not collision_distinguishable(1000.0 + just_below, 1000.0)
    assert collision_distinguishable(1000.0 + just_above, 1000.0)


def test_collision_domain_error():
    with pytest.raises(ValueError):
        collision_distinguishable(100.0, 200.0)


# -- detection outcomes -----------------------------------------------------

def test_single_transmission_detected():
    out = detect_preambles([tx(0, 7, 500.0)], ALWAYS_DETECT, np.random.default_rng(0))
    assert out.kind_of(7) == OutcomeKind.DETECTED_SINGLE
    assert out.ues_of(7) == (0,)
    assert out.kind_of(8) == OutcomeKind.SILENT


def test_wide_spread_collision_is_detected():
    out = detect_preambles([tx(0, 3, 500.0), tx(1, 3, 300.0)], ALWAYS_DETECT,
                           np.random.default_rng(0))
    assert out.kind_of(3) == OutcomeKind.DETECTED_COLLISION
    assert set(out.ues_of(3)) == {0, 1}


def test_narrow_spread_collision_goes_unnoticed():
    out = detect_preambles([tx(0, 3, 350.0), tx(1, 3, 300.0)], ALWAYS_DETECT,
                           np.random.default_rng(0))
    assert out.kind_of(3) == OutcomeKind.UNDETECTED_COLLISION


def test_all_missed():
    out = detect_preambles([tx(0, 3, 500.0), tx(1, 3, 300.0)], NEVER_DETECT,
                           np.random.default_rng(0))
    assert out.kind_of(3) == OutcomeKind.MISSED


def test_one_visible_peak_of_many_senders_hides_the_collision():
    # Only one transmitter clears the detector: apparent spread is zero even
    # though the senders are far apart.
    curve = DetectionCurve.step(-5.0)
    txs = [tx(0, 9, 500.0, snr=10.0), tx(1, 9, 100.0, snr=-20.0)]
    out = detect_preambles(txs, curve, np.random.default_rng(0))
    assert out.kind_of(9) == OutcomeKind.UNDETECTED_COLLISION
    assert set(out.ues_of(9)) == {0, 1}


def test_indices_do_not_interfere():
    txs = [tx(0, 1, 500.0), tx(1, 2, 300.0), tx(2, 3, 100.0)]
    out = detect_preambles(txs, ALWAYS_DETECT, np.random.default_rng(0))
    for idx in (1, 2, 3):
        assert out.kind_of(idx) == OutcomeKind.DETECTED_SINGLE


def test_outcome_conserves_transmitters():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n = int(rng.integers(1, 120))
        txs = [tx(u, int(rng.integers(0, 10)), float(rng.uniform(50, 2000)),
                  snr=float(rng.uniform(-25, 5)))
               for u in range(n)]
        out = detect_preambles(txs, DetectionCurve.default(), rng)
        ues = [u for _, us in out.by_index.values() for u in us]
        assert sorted(ues) == list(range(n))
        for kind, us in out.by_index.values():
            if kind == OutcomeKind.DETECTED_SINGLE:
                assert len(us) == 1
            if kind == OutcomeKind.UNDETECTED_COLLISION:
                assert len(us) >= 2


def test_all_wide_spreads_detected_collisions_deterministically():
    txs = [tx(u, 0, 200.0 + 200.0 * u) for u in range(4)]
    for seed in range(5):
        out = detect_preambles(txs, ALWAYS_DETECT, np.random.default_rng(seed))
        assert out.kind_of(0) == OutcomeKind.DETECTED_COLLISION


def test_expected_singleton_count_matches_closed_form():
    # One opportunity, M devices, K preambles, perfect detection: the mean
    # number of lone transmitters is M*(1-1/K)^(M-1).
    m, k, trials = 100, 54, 2000
    rng = np.random.default_rng(7)
    total = 0
    for _ in range(trials):
        idx = rng.integers(0, k, size=m)
        txs = [tx(u, int(idx[u]), float(50 + 31 * u)) for u in range(m)]
        out = detect_preambles(txs, ALWAYS_DETECT, rng)
        total += out.count(OutcomeKind.DETECTED_SINGLE)
    oracle = m * (1 - 1 / k) ** (m - 1)
    assert total / trials == pytest.approx(oracle, rel=0.05)
