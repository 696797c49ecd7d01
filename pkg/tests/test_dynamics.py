import math
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from floquet_pt.dynamics import (
    ReductionWarning,
    continuous_run,
    effective_decay_rate,
    has_interior_minimum,
    initial_state,
    monotone_after,
    rabi_period,
    resolved_run,
    stroboscopic_run,
    three_level_run,
    trotter_errors,
    validate_reduction,
)
from floquet_pt.floquet import ep_boundary, floquet_spectrum, kappa_multiplier
from floquet_pt.models import (
    ContinuousModel,
    DimensionlessPoint,
    PhaseLabel,
    ThreeLevelModel,
    canonical_protocol,
    mhz_to_rad_s,
)

P = DimensionlessPoint


def oracle_populations(a, g, n):
    """|<j| U^n |0>|^2 by explicit repeated products of the closed-form matrix."""
    c, s, e = math.cos(a / 2), math.sin(a / 2), math.exp(-g)
    u = np.array([[c, -1j * s], [-1j * e * s, e * c]])
    psi = np.array([1, 0], dtype=complex)
    out = [np.abs(psi) ** 2]
    for _ in range(n):
        psi = u @ psi
        out.append(np.abs(psi) ** 2)
    return np.array(out)


def test_zero_periods():
    traj = stroboscopic_run(canonical_protocol(P(0.3, 0.2)), n_periods=0)
    assert len(traj) == 1
    assert traj.p0_raw[0] == 1.0 and traj.norm[0] == 1.0


def test_unitary_stroboscopic_rabi():
    traj = stroboscopic_run(canonical_protocol(P(0.1, 0.0)), n_periods=300)
    n = np.arange(301)
    np.testing.assert_allclose(traj.p0_raw, np.cos(0.05 * n) ** 2, atol=1e-12)


@pytest.mark.parametrize("a, g", [(0.1, 0.5), (0.5, 0.3), (0.05, 0.0132)])
def test_stroboscopic_matches_repeated_products(a, g):
    traj = stroboscopic_run(canonical_protocol(P(a, g), 2.0, 3.0), n_periods=400)
    np.testing.assert_allclose(traj.raw, oracle_populations(a, g, 400), atol=1e-12)


def test_strong_measurement_decays_monotonically():
    traj = stroboscopic_run(canonical_protocol(P(0.1, 0.5)), n_periods=2000)
    assert monotone_after(traj.p0_raw, 0)
    assert traj.p0_raw[-1] < 1e-6


def test_normalized_populations_sum_to_one():
    traj = stroboscopic_run(canonical_protocol(P(0.7, 0.9)), n_periods=200)
    np.testing.assert_allclose(traj.p0_norm + traj.p1_norm, 1.0, atol=1e-10)
    assert np.all(np.diff(traj.norm) <= 1e-15)


def test_norm_conserved_without_loss():
    traj = stroboscopic_run(canonical_protocol(P(1.3, 0.0)), n_periods=10_000)
    assert np.max(np.abs(traj.norm - 1.0)) <= 1e-10


def test_norm_underflow_truncates():
    # cos(pi/2) is ~6e-17 in floating point, so the norm shrinks ~1e-32 per period
    traj = stroboscopic_run(canonical_protocol(P(math.pi, 400.0)), n_periods=50)
    assert traj.truncated
    assert 2 <= len(traj) < 51
    assert traj.norm[-1] >= 1e-300


def test_initial_state_validation():
    with pytest.raises(ValueError):
        initial_state([1.0, 1.0])
    with pytest.raises(ValueError):
        stroboscopic_run(canonical_protocol(P(0.1, 0.1)), (1.0, 0.0, 0.0), 3)


def test_continuous_rabi():
    omega = 2.0
    traj = continuous_run(ContinuousModel(omega, 0.0), t_max=10.0, dt=0.05)
    np.testing.assert_allclose(traj.p0_raw, np.cos(omega * traj.t / 2) ** 2, atol=1e-12)
    assert traj.t[-1] == pytest.approx(10.0)


def test_continuous_matches_ode_integration():
    model = ContinuousModel(1.0, 0.5)
    h = model.hamiltonian()
    sol = solve_ivp(
        lambda t, y: (-1j * h @ y),
        (0, 20),
        np.array([1, 0], dtype=complex),
        t_eval=np.linspace(0, 20, 201),
        rtol=1e-11,
        atol=1e-13,
    )
    traj = continuous_run(model, t_max=20.0, dt=0.1)
    np.testing.assert_allclose(traj.raw, np.abs(sol.y.T) ** 2, atol=1e-8)


def test_continuous_oscillation_frequency_in_unbroken_phase():
    omega, gamma = 1.0, 0.5
    nu = math.sqrt(omega ** 2 - gamma ** 2)
    traj = continuous_run(ContinuousModel(omega, gamma), t_max=40.0, dt=1e-3)
    p = traj.p0_raw
    minima = [traj.t[i] for i in range(1, len(p) - 1) if p[i] < p[i - 1] and p[i] < p[i + 1]]
    # amplitude oscillates at nu/2, so population zeros repeat every 2 pi / nu
    spacing = np.diff(minima)
    np.testing.assert_allclose(spacing, 2 * math.pi / nu, atol=2e-3)
    assert rabi_period(ContinuousModel(omega, gamma)) == pytest.approx(2 * math.pi / nu)


def test_continuous_static_broken_phase_is_monotone():
    traj = continuous_run(ContinuousModel(1.0, 2.0), t_max=60.0, dt=0.05)
    p = traj.p0_norm
    assert not has_interior_minimum(p, tol=1e-12)
    assert monotone_after(p, 0, tol=1e-12)


def test_decay_rate_zeno_limit_and_unitary():
    assert effective_decay_rate(canonical_protocol(P(0.3, 0.0))).kappa_multiplier == 0.0
    # eta_+ -> 1 as the interval shrinks; the rate falls off as omega_t0^2
    k3 = effective_decay_rate(canonical_protocol(P(1e-3, 0.5)), n_cap=2000).kappa_multiplier
    k4 = effective_decay_rate(canonical_protocol(P(1e-4, 0.5)), n_cap=2000).kappa_multiplier
    assert 0 < k4 < 1e-7
    assert k4 / k3 == pytest.approx(1e-2, rel=1e-3)


def test_decay_rate_fit_tracks_multiplier():
    for g in (0.2, 0.5):
        est = effective_decay_rate(canonical_protocol(P(0.1, g)))
        assert est.phase is PhaseLabel.PTBP
        assert est.kappa_fit == pytest.approx(est.kappa_multiplier, rel=0.05)
        assert est.fit_window[1] > est.fit_window[0]
    weak = effective_decay_rate(canonical_protocol(P(0.1, 0.2))).kappa_multiplier
    strong = effective_decay_rate(canonical_protocol(P(0.1, 0.5))).kappa_multiplier
    assert strong < weak


def test_decay_rate_ptsp_reports_common_modulus():
    est = effective_decay_rate(canonical_protocol(P(1.0, 0.3)))
    assert est.phase is PhaseLabel.PTSP
    assert est.kappa_multiplier == pytest.approx(0.3, rel=1e-12)
    assert est.kappa_fit is None


def test_decay_rate_short_run_skips_fit():
    est = effective_decay_rate(canonical_protocol(P(0.1, 0.5)), n_cap=10)
    assert est.kappa_fit is None and est.kappa_multiplier > 0


@pytest.mark.parametrize("a", [0.05, 0.1])
def test_zeno_monotonicity_on_broken_side(a):
    lo = ep_boundary(a)
    gs = np.linspace(lo, 5.0, 21)[1:]
    kappas = [kappa_multiplier(P(a, g)) for g in gs]
    assert all(k2 < k1 for k1, k2 in zip(kappas, kappas[1:]))


@pytest.mark.parametrize("a, g", [(0.5, 0.3), (1.0, 0.3), (0.1, 0.01), (0.1, 0.05)])
def test_unbroken_normalized_dip_within_first_rabi_period(a, g):
    spec = floquet_spectrum(canonical_protocol(P(a, g)))
    theta = abs(np.angle(spec.multipliers[0]))
    n_rabi = int(math.ceil(2 * math.pi / theta))
    traj = stroboscopic_run(canonical_protocol(P(a, g)), n_periods=n_rabi)
    assert has_interior_minimum(traj.p0_norm)


@pytest.mark.parametrize("a, g", [(0.05, 0.3), (0.1, 0.3), (0.1, 0.2), (0.1, 0.5), (0.05, 0.8)])
def test_broken_normalized_converges_to_dominant_mode(a, g):
    proto = canonical_protocol(P(a, g))
    spec = floquet_spectrum(proto)
    traj = stroboscopic_run(proto, n_periods=20_000)
    p = traj.p0_norm
    assert monotone_after(p, 3, tol=1e-12) or monotone_after(p, 3, increasing=True, tol=1e-12)
    target = abs(spec.modes[0][0]) ** 2
    assert traj.p0_norm[-1] == pytest.approx(target, abs=1e-6)


def test_trotter_refinement_converges():
    model = ContinuousModel(1.0, 0.5)
    errors = trotter_errors(model, rabi_period(model) / 20, levels=4)
    assert all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))
    orders = [math.log2(e1 / e2) for e1, e2 in zip(errors, errors[1:])]
    assert min(orders) >= 1.0


def test_resolved_run_agrees_at_period_boundaries():
    proto = canonical_protocol(P(0.4, 0.3), 1.0, 2.0)
    fine = resolved_run(proto, n_periods=30, samples_per_period=7)
    coarse = stroboscopic_run(proto, n_periods=30)
    at_starts = np.concatenate([fine.raw[::7][:30], fine.raw[-1:]])
    np.testing.assert_allclose(at_starts, coarse.raw, atol=1e-13)
    assert np.all(np.diff(fine.norm) <= 1e-15)


def test_three_level_without_side_coupling_is_rabi():
    omega = 1.5
    traj = three_level_run(ThreeLevelModel(omega, 0.0, 0.0), t_max=8.0, dt=0.1)
    np.testing.assert_allclose(traj.raw[:, 0], np.cos(omega * traj.t / 2) ** 2, atol=1e-12)
    assert np.all(traj.raw[:, 2] == 0.0)


def test_three_level_elimination_rate():
    omega_p, gamma_big = 1.0, 100.0
    model = ThreeLevelModel(0.0, omega_p, gamma_big)
    traj = three_level_run(model, (0.0, 1.0, 0.0), t_max=400.0, dt=1.0)
    tail = traj.t > 50
    slope = np.polyfit(traj.t[tail], np.log(traj.raw[tail, 1]), 1)[0]
    assert -slope == pytest.approx(2 * model.gamma_eff, rel=1e-3)


def test_validate_reduction_ion_magnitudes():
    model = ThreeLevelModel(mhz_to_rad_s(0.1), mhz_to_rad_s(1.0), 22e6)
    report = validate_reduction(model)
    assert report.gamma_eff == model.omega_prime ** 2 / (2 * model.Gamma)
    assert report.valid
    assert report.sup_error <= 0.05


def test_validate_reduction_trivial_and_scaling():
    report = validate_reduction(ThreeLevelModel(1.0, 0.0, 20.0))
    assert report.gamma_eff == 0.0 and report.sup_error == pytest.approx(0.0, abs=1e-12)
    a = ThreeLevelModel(1.0, 20.0, 40.0).gamma_eff
    b = ThreeLevelModel(1.0, 20.0, 80.0).gamma_eff
    assert b == a / 2


def test_validate_reduction_warns_outside_validity():
    with pytest.warns(ReductionWarning):
        report = validate_reduction(ThreeLevelModel(1.0, 2.0, 3.0))
    assert not report.valid and report.sup_error > 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        validate_reduction(ThreeLevelModel(1.0, 20.0, 40.0))


def test_shape_helpers():
    assert has_interior_minimum([3, 1, 2])
    assert has_interior_minimum([3, 1, 1, 2])
    assert not has_interior_minimum([3, 2, 1])
    assert not has_interior_minimum([1.0, 1.0 - 1e-16, 1.0], tol=1e-12)
    assert monotone_after([0, 5, 4, 4, 1], 1)
    assert not monotone_after([0, 5, 4, 6], 1)
