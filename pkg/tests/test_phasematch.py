import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import c
from scipy.optimize import brentq

from heraldkit.dispersion import FUSED_SILICA, BirefringentFiber, nm_to_omega
from heraldkit.errors import InconsistentTriple, NonPositiveBirefringence, NoSolution, OutOfDispersionWindow
from heraldkit.phasematch import (
    DK_TOL,
    PumpEnvelope,
    PumpShape,
    calibrate_delta_n,
    delta_k,
    envelope_fwhm_hz,
    fwhm,
    phase_matching_function,
    pump_amplitude,
    solve_central,
    two_photon_envelope,
)

# 40-digit mpmath evaluation of the closed-form calibration for (715, 618, 848) nm
DELTA_N_REFERENCE = 4.2193183191475e-4
PUMP_FWHM_HZ = 193.5185312533620e9
SECH_WIDTH_HZ = 109.7823522870507e9
# FWHM of (x / sinh x)^2 divided by FWHM of sech^2 x
SECH_ENVELOPE_RATIO = 1.6921695746705079


def test_calibration_golden(ref_delta_n):
    assert ref_delta_n == pytest.approx(DELTA_N_REFERENCE, rel=1e-9)


def test_calibration_matches_root_finder():
    # independent route: zero the mismatch as a function of delta_n
    ws = 2.0 * nm_to_omega(715.0) - nm_to_omega(848.0)
    wi = nm_to_omega(848.0)
    root = brentq(lambda dn: float(delta_k(BirefringentFiber(FUSED_SILICA, dn, 1.0), ws, wi)), 1e-6, 5e-3, xtol=1e-18)
    assert calibrate_delta_n(715.0, 618.0, 848.0) == pytest.approx(root, rel=1e-9)


def test_round_trip_recovers_triple(ref_fiber):
    sol = solve_central(ref_fiber, 715.0)
    assert sol.lambda_i == pytest.approx(848.0, abs=1e-3)
    assert sol.lambda_s == pytest.approx(618.0, abs=0.5)
    assert abs(sol.residual_delta_k) < DK_TOL


def test_solution_conserves_energy(ref_fiber):
    sol = solve_central(ref_fiber, 715.0)
    assert 2 / sol.lambda_p == pytest.approx(1 / sol.lambda_s + 1 / sol.lambda_i, rel=1e-12)
    assert sol.lambda_s < sol.lambda_p < sol.lambda_i


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-5, 2e-3), st.floats(600.0, 850.0))
def test_solve_central_round_trips_through_calibration(dn, lp):
    fiber = BirefringentFiber(FUSED_SILICA, dn, 0.1)
    try:
        sol = solve_central(fiber, lp)
    except NoSolution:
        return
    assert abs(sol.residual_delta_k) < DK_TOL
    back = calibrate_delta_n(sol.lambda_p, sol.lambda_s, sol.lambda_i)
    assert back == pytest.approx(dn, rel=1e-6)


def test_zero_birefringence_has_no_solution():
    with pytest.raises(NoSolution):
        solve_central(BirefringentFiber(FUSED_SILICA, 0.0, 0.1), 715.0)


def test_pump_outside_window():
    with pytest.raises(OutOfDispersionWindow):
        solve_central(BirefringentFiber(FUSED_SILICA, 4e-4, 0.1), 2500.0)


def test_inconsistent_triple():
    with pytest.raises(InconsistentTriple, match="energy conservation"):
        calibrate_delta_n(715.0, 600.0, 848.0)


def test_anomalous_dispersion_triple_needs_negative_birefringence():
    lp, li = 1550.0, 1700.0
    with pytest.raises(NonPositiveBirefringence):
        calibrate_delta_n(lp, 1 / (2 / lp - 1 / li), li)


def test_delta_k_vanishes_at_degeneracy_without_birefringence():
    f = BirefringentFiber(FUSED_SILICA, 0.0, 0.1)
    w = nm_to_omega(715.0)
    assert delta_k(f, w, w) == pytest.approx(0.0, abs=1e-6)


def test_delta_k_symmetric_in_photons(ref_fiber):
    w = nm_to_omega(np.array([620.0, 846.0]))
    assert delta_k(ref_fiber, w[0], w[1]) == pytest.approx(float(delta_k(ref_fiber, w[1], w[0])), rel=1e-12)


def test_phase_matching_function_peak(ref_fiber):
    sol = solve_central(ref_fiber, 715.0)
    pm = phase_matching_function(ref_fiber, nm_to_omega(sol.lambda_s), nm_to_omega(sol.lambda_i))
    assert abs(pm) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-50.0, 50.0))
def test_phase_matching_modulus_is_sinc(x):
    # a fiber whose length makes dk L / 2 = x at a chosen pair
    ws, wi = nm_to_omega(640.0), nm_to_omega(2 / (2 / 715.0 - 1 / 640.0))
    dk = float(delta_k(BirefringentFiber(FUSED_SILICA, 4e-4, 1.0), ws, wi))
    length = abs(2 * x / dk) + 1e-9
    pm = phase_matching_function(BirefringentFiber(FUSED_SILICA, 4e-4, length), ws, wi)
    arg = 0.5 * dk * length
    assert abs(pm) == pytest.approx(abs(np.sinc(arg / np.pi)), abs=1e-12)


def test_pump_bandwidth_conversion(ref_pump):
    assert ref_pump.fwhm_hz == pytest.approx(PUMP_FWHM_HZ, rel=1e-12)
    assert ref_pump.fwhm_hz == pytest.approx(c * 0.33e-9 / 715e-9**2, rel=1e-15)


def test_sech_amplitude_width(ref_pump):
    nu = np.linspace(-5, 5, 20001) * SECH_WIDTH_HZ
    amp = pump_amplitude(ref_pump, nu)
    np.testing.assert_allclose(amp, 1 / np.cosh(nu / SECH_WIDTH_HZ), rtol=1e-12)
    assert fwhm(nu, amp**2) == pytest.approx(PUMP_FWHM_HZ, rel=1e-6)


def test_gaussian_amplitude_width():
    pump = PumpEnvelope(715.0, 0.33, PumpShape.GAUSSIAN)
    nu = np.linspace(-3, 3, 20001) * pump.fwhm_hz
    assert fwhm(nu, pump_amplitude(pump, nu) ** 2) == pytest.approx(pump.fwhm_hz, rel=1e-6)


def test_sech_self_convolution_closed_form(ref_pump):
    # sech * sech (s) = 2 s / sinh s in units of the sech width
    x = np.linspace(-12, 12, 481)
    env = two_photon_envelope(ref_pump, x * SECH_WIDTH_HZ)
    with np.errstate(invalid="ignore"):
        exact = np.where(x == 0, 1.0, x / np.sinh(x))
    np.testing.assert_allclose(env, exact, atol=2e-6)


def test_sech_envelope_ratio(ref_pump):
    assert envelope_fwhm_hz(ref_pump) / ref_pump.fwhm_hz == pytest.approx(SECH_ENVELOPE_RATIO, rel=1e-4)


def test_gaussian_envelope_ratio_is_sqrt2():
    pump = PumpEnvelope(715.0, 0.5, PumpShape.GAUSSIAN)
    assert envelope_fwhm_hz(pump) / pump.fwhm_hz == pytest.approx(np.sqrt(2.0), rel=1e-4)


def test_substitution_mode(ref_pump):
    nu = np.linspace(-1e12, 1e12, 11)
    np.testing.assert_array_equal(two_photon_envelope(ref_pump, nu, "substitution"), pump_amplitude(ref_pump, nu))
    assert envelope_fwhm_hz(ref_pump, "substitution") == ref_pump.fwhm_hz
    with pytest.raises(ValueError):
        two_photon_envelope(ref_pump, nu, "bogus")


def test_invalid_pump():
    with pytest.raises(ValueError):
        PumpEnvelope(715.0, 0.0)
    with pytest.raises(ValueError):
        PumpEnvelope(-1.0, 0.3)


def test_degenerate_triple_has_no_birefringence():
    with pytest.raises(NonPositiveBirefringence):
        calibrate_delta_n(715.0, 715.0, 715.0)


def test_calibrated_mismatch_checked_by_bisection(ref_fiber):
    # independent root of dk along the energy-conserving line, from scipy
    wp = nm_to_omega(715.0)
    d = brentq(lambda x: float(delta_k(ref_fiber, wp + x, wp - x)), 0.05 * wp, 0.2 * wp, xtol=1e-6)
    sol = solve_central(ref_fiber, 715.0)
    assert nm_to_omega(sol.lambda_s) - wp == pytest.approx(d, rel=1e-9)
    assert abs(float(delta_k(ref_fiber, wp + d, wp - d))) < 1e-3
