import math

import numpy as np
import pytest
from scipy.integrate import quad

import cohscat as cs
from cohscat.emitter import bloch_system, leakage_for_contrast


def test_params_validation():
    with pytest.raises(ValueError):
        cs.EmitterParams(t1=0.0, t2=0.1)
    with pytest.raises(ValueError):
        cs.EmitterParams(t1=1.0, t2=2.5)  # t2 > 2*t1
    with pytest.raises(ValueError):
        cs.EmitterParams(t1=1.0, t2=0.0)


def test_linewidth_inverts_exactly():
    de = 6.14
    params = cs.default_cavity_params(linewidth_uev=de)
    assert abs(params.t2 - 2.0 * cs.HBAR_UEV_NS / de) < 1e-12
    assert abs(params.linewidth_uev() - de) < 1e-12
    assert abs(params.t2 - 2.0 * params.t1) < 1e-12


def test_bloch_state_invariants():
    with pytest.raises(ValueError):
        cs.BlochState(1.0, 1.0, 1.0)
    assert cs.BlochState.ground().rho_ee() == 0.0
    assert cs.BlochState.excited().rho_ee() == 1.0


def test_steady_state_undriven():
    params = cs.EmitterParams(t1=1.0, t2=0.6)
    st = cs.steady_state(params, 0.0)
    assert (st.u, st.v, st.w) == (0.0, 0.0, -1.0)
    assert st.rho_ee() == 0.0


def test_steady_state_saturation_limit():
    params = cs.EmitterParams(t1=1.0, t2=0.6)
    rabi = math.sqrt(1e12 / (params.t1 * params.t2))  # s = 1e12
    assert cs.steady_state(params, rabi).rho_ee() == pytest.approx(0.5, abs=1e-6)


def test_steady_state_s_equals_one_against_ode():
    params = cs.EmitterParams(t1=1.0, t2=0.6)
    rabi = math.sqrt(1.0 / (params.t1 * params.t2))
    st = cs.steady_state(params, rabi)
    assert st.rho_ee() == pytest.approx(0.25, abs=1e-12)
    # Independent check: integrate the equations of motion to 50 lifetimes.
    drive = cs.DriveField(rabi=rabi)
    final = cs.evolve(params, drive, cs.BlochState.ground(), [0.0, 50.0 * params.t1])[-1]
    assert final.u == pytest.approx(st.u, abs=1e-8)
    assert final.v == pytest.approx(st.v, abs=1e-8)
    assert final.w == pytest.approx(st.w, abs=1e-8)


def test_steady_state_rejects_bad_rabi():
    params = cs.EmitterParams(t1=1.0, t2=0.6)
    with pytest.raises(ValueError):
        cs.steady_state(params, float("nan"))
    with pytest.raises(ValueError):
        cs.steady_state(params, -1.0)


def test_rho_ee_saturation_curve_shape():
    params = cs.EmitterParams(t1=0.7, t2=1.1)
    for s in (0.1, 1.0, 1.857, 25.0):
        rabi = math.sqrt(s / (params.t1 * params.t2))
        assert cs.steady_state(params, rabi).rho_ee() == pytest.approx(
            s / (2.0 * (1.0 + s)), abs=1e-12
        )
    # intensity reaches 0.65 of its asymptote at s = 1.857
    rabi = math.sqrt(1.857 / (params.t1 * params.t2))
    assert cs.steady_state(params, rabi).rho_ee() / 0.5 == pytest.approx(0.65, abs=1e-3)


def test_evolve_free_decay():
    params = cs.EmitterParams(t1=0.8, t2=1.2)
    ts = np.linspace(0.0, 6.0, 61)
    states = cs.evolve(params, cs.DriveField(rabi=0.0), cs.BlochState.excited(), ts)
    w_exact = 2.0 * np.exp(-ts / params.t1) - 1.0
    for st, w in zip(states, w_exact):
        assert st.u == 0.0 and st.v == 0.0
        assert st.w == pytest.approx(w, abs=1e-8)


def test_evolve_impulsive_pi_pulse():
    params = cs.EmitterParams(t1=1.0, t2=2.0)
    dur = params.t1 / 1000.0
    drive = cs.DriveField(rabi=math.pi / dur, shape="square", duration=dur)
    states = cs.evolve(params, drive, cs.BlochState.ground(), [0.0, dur])
    assert states[-1].rho_ee() >= 0.999


def test_evolve_converges_to_steady_state():
    params = cs.EmitterParams(t1=1.0, t2=1.5)
    rabi = 2.0
    st = cs.steady_state(params, rabi)
    final = cs.evolve(params, cs.DriveField(rabi=rabi), cs.BlochState.ground(), [0.0, 50.0])[-1]
    assert np.allclose(final.as_array(), st.as_array(), atol=1e-8)


def test_evolve_rejects_bad_grid():
    params = cs.EmitterParams(t1=1.0, t2=1.0)
    with pytest.raises(ValueError):
        cs.evolve(params, cs.DriveField(rabi=0.0), cs.BlochState.ground(), [0.0, 0.0, 1.0])


def test_evolve_preserves_bloch_ball(rng):
    params = cs.EmitterParams(t1=1.0, t2=1.3)
    drives = [
        cs.DriveField(rabi=8.0),
        cs.DriveField(rabi=math.pi / 0.01, shape="square", duration=0.01),
        cs.DriveField.from_area(2.0 * math.pi, "gaussian", 0.05, t0=0.4),
    ]
    ts = np.linspace(0.0, 4.0, 201)
    for drive in drives:
        for st in cs.evolve(params, drive, cs.BlochState.ground(), ts):
            assert st.u ** 2 + st.v ** 2 + st.w ** 2 <= 1.0 + 1e-7


def test_drive_field_areas_match_quadrature():
    for drive in (
        cs.DriveField(rabi=3.0, shape="square", duration=0.4),
        cs.DriveField.from_area(0.71 * math.pi, "gaussian", 0.057, t0=0.5),
    ):
        lo, hi = (drive.t0 - 2.0, drive.t0 + 2.0)
        area, _ = quad(lambda t: float(drive.omega(t)), lo, hi, limit=200)
        assert area == pytest.approx(drive.pulse_area, abs=1e-9)
    assert cs.DriveField(rabi=1.0).pulse_area is None


def test_rrs_fraction_examples():
    bulk = cs.EmitterParams(t1=1.0, t2=0.6)
    assert cs.rrs_fraction(bulk, 0.0) == pytest.approx(0.30, abs=1e-12)
    ideal = cs.EmitterParams(t1=1.0, t2=2.0)
    assert cs.rrs_fraction(ideal, 0.0) == pytest.approx(1.0, abs=1e-12)
    rabi = math.sqrt(1.0 / (ideal.t1 * ideal.t2))  # s = 1
    assert cs.rrs_fraction(ideal, rabi) == pytest.approx(0.5, abs=1e-12)


def test_rrs_fraction_matches_steady_state_ratio(rng):
    for _ in range(100):
        t1 = rng.uniform(0.05, 3.0)
        t2 = rng.uniform(0.05, 1.0) * 2.0 * t1
        rabi = rng.uniform(0.0, 20.0)
        params = cs.EmitterParams(t1=t1, t2=t2)
        st = cs.steady_state(params, rabi)
        ratio = (st.u ** 2 + st.v ** 2) / 4.0 / st.rho_ee() if st.rho_ee() > 0 else t2 / (2 * t1)
        assert cs.rrs_fraction(params, rabi) == pytest.approx(ratio, abs=1e-10)


def test_rrs_fraction_monotone_and_bounded():
    params = cs.EmitterParams(t1=1.0, t2=1.1)
    omegas = np.linspace(0.0, 30.0, 400)
    vals = np.array([cs.rrs_fraction(params, w) for w in omegas])
    assert np.all(np.diff(vals) < 0.0)
    assert np.all(vals > 0.0)
    assert vals[0] == pytest.approx(params.t2 / (2.0 * params.t1), abs=1e-12)


def test_bloch_system_steady_state_consistency():
    params = cs.EmitterParams(t1=0.9, t2=1.0, detuning=2.5)
    rabi = 3.0
    a_mat, b_vec = bloch_system(params, rabi)
    x = cs.steady_state(params, rabi).as_array()
    assert np.allclose(a_mat @ x + b_vec, 0.0, atol=1e-13)


def test_derive_cavity_params():
    params = cs.derive_cavity_params(1.0, 10.0, 1.0)
    assert params.t1 == pytest.approx(0.1, abs=1e-15)
    assert params.t2 == pytest.approx(0.2, abs=1e-15)
    # Lifetime-limited linewidth grows threefold over the (1 ns, 0.6 ns)
    # dephased emitter: 6.582 µeV vs 2.194 µeV.
    bulk = cs.default_bulk_params()
    assert params.linewidth_uev() == pytest.approx(6.582119, abs=1e-6)
    assert bulk.linewidth_uev() == pytest.approx(2.1940397, abs=1e-6)
    assert params.linewidth_uev() / bulk.linewidth_uev() == pytest.approx(3.0, abs=1e-12)

    measured = cs.derive_cavity_params(1.072006, 10.0, 1.0)
    assert measured.linewidth_uev() == pytest.approx(6.14, abs=1e-4)

    assert cs.derive_cavity_params(1.0, 1.0, 0.5).t1 == 1.0
    with pytest.raises(ValueError):
        cs.derive_cavity_params(1.0, 10.0, 1.2)
    with pytest.raises(ValueError):
        cs.derive_cavity_params(1.0, 0.5, 1.0)


def test_saturation_curve_gate_off_is_linear():
    params = cs.EmitterParams(t1=1.0, t2=0.6)
    gating = cs.GatingModel(charge_occupation=0.9, laser_leakage=12.5, collection_efficiency=0.1)
    powers = np.linspace(0.0, 50.0, 11)
    curve = cs.saturation_curve(params, gating, powers, rabi_per_sqrt_power=1.0, gate_on=False)
    for p, counts in curve:
        assert counts == pytest.approx(12.5 * p, rel=1e-12)
    assert curve[0] == (0.0, 0.0)


def test_saturation_curve_occupation_zero_kills_emission():
    params = cs.EmitterParams(t1=1.0, t2=0.6)
    gating = cs.GatingModel(charge_occupation=0.0, laser_leakage=3.0, collection_efficiency=0.1)
    curve = cs.saturation_curve(params, gating, [4.0], rabi_per_sqrt_power=1.0, gate_on=True)
    assert curve[0][1] == pytest.approx(3.0 * 4.0, rel=1e-12)


def test_saturation_curve_monotone_and_contrast():
    params = cs.default_cavity_params()
    k = 2.0
    leak = leakage_for_contrast(params, 1.0, 0.05, k, contrast=500.0)
    gating = cs.GatingModel(charge_occupation=1.0, laser_leakage=leak, collection_efficiency=0.05)
    p_knee = 1.0 / (k ** 2 * params.t1 * params.t2)
    powers = np.linspace(0.0, 5.0 * p_knee, 200)
    counts = np.array([c for _, c in cs.saturation_curve(params, gating, powers, k)])
    assert np.all(np.diff(counts) >= -1e-9)
    gated = cs.saturation_curve(params, gating, [p_knee], k, gate_on=True)[0][1]
    laser = cs.saturation_curve(params, gating, [p_knee], k, gate_on=False)[0][1]
    assert (gated - laser) / laser == pytest.approx(500.0, rel=0.01)
