import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sca import FieldConfig, Grid, WaveField, gaussian_packet, make_plan, plane_wave, run
from sca.analysis import diffraction as diff
from sca.analysis import measure, theory
from sca.analysis.spectrum import fft_radix2, fft_spectrum, imag_mass_spectrum, next_pow2
from sca.analysis.tuning import TuningError, harmonic_potential, stationarity_residual, tune_kappa

from conftest import THETA

PI = math.pi


# --- closed forms -------------------------------------------------------------------

def test_phase_velocity_values():
    assert 0.096 <= theory.phase_velocity_theory(THETA, PI / 4) <= 0.100
    assert abs(theory.phase_velocity_theory(THETA, PI / 4) - 0.09898) < 1e-5
    assert abs(theory.base_phase_velocity(THETA, PI / 4) - 0.09763) < 1e-5


def test_phase_velocity_periodic_and_zero_rejected():
    eps = 1e-3
    assert abs(theory.phase_velocity_theory(THETA, 2 * PI - eps)
               - theory.phase_velocity_theory(THETA, -eps)) < 1e-12
    with pytest.raises(ValueError):
        theory.phase_velocity_theory(THETA, 2 * PI)


def test_relative_error_properties():
    assert abs(theory.relative_vp_error(THETA, PI / 2)) < 1e-15
    assert theory.relative_vp_error(THETA, PI / 2 - 0.1) > 0 > theory.relative_vp_error(THETA, PI / 2 + 0.1)
    r = theory.relative_vp_error(THETA, 1.0) / theory.relative_vp_error(THETA / 2, 1.0)
    assert abs(r - 4) < 1e-12


def test_group_velocity_values():
    assert abs(theory.group_velocity_theory(THETA, PI / 2) - 0.2588) < 1e-4
    assert theory.group_velocity_theory(THETA, 0.0) == 0.0
    assert theory.group_velocity_theory(THETA, -1.0) == -theory.group_velocity_theory(THETA, 1.0)


@given(st.floats(0.05, 3.0))
def test_group_velocity_is_dispersion_slope(k):
    h = 1e-6
    num = (theory.dispersion_omega(THETA, k + h) - theory.dispersion_omega(THETA, k - h)) / (2 * h)
    assert abs(num - theory.group_velocity_theory(THETA, k)) < 1e-7


def test_well_levels():
    lattice = theory.well_energy_dispersion(3, 17, THETA)
    assert abs(lattice - 0.03992) < 1e-5
    assert abs(theory.well_energy(3, 17, THETA) - 0.04023) < 1e-5
    assert 155 < 2 * PI / lattice < 166
    n = np.arange(1, 34)
    w = theory.well_energy_dispersion(n, 17, THETA)
    assert np.allclose(w[:16], w[17:33][::-1])  # symmetric about n = L
    assert np.allclose(theory.well_energy_dispersion(n + 34, 17, THETA), w)
    assert theory.well_energy_dispersion(0, 17, THETA) == 0.0


def test_oscillator_levels():
    rho = 400 / 12
    w = theory.oscillator_omega(THETA, rho)
    assert abs(w - 2.356e-4) < 1e-7
    assert abs(theory.oscillator_level(THETA, rho, 3) - 3.5 * w) < 1e-15
    assert 7600 < 2 * PI / theory.oscillator_level(THETA, rho, 3) < 7640
    assert abs(theory.oscillator_kappa(THETA, rho) - 2.12e-7) < 1e-9
    assert theory.oscillator_omega_asymptotic(THETA, rho, 0) == 0.0


def test_fraunhofer_curves():
    s = np.array([0.0, 0.125, 0.25])
    assert np.allclose(theory.fraunhofer_narrow(s, 40, 10), [1, 0, 1], atol=1e-15)
    wide = theory.fraunhofer_wide(s, 40, 20, 10)
    assert wide[0] == 1.0 and abs(wide[2] - np.sinc(0.5)) < 1e-15


# --- spectra -------------------------------------------------------------------------

@given(st.integers(0, 9), st.integers(0, 2 ** 32 - 1))
def test_fft_matches_numpy(p, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(2 ** p) + 1j * rng.standard_normal(2 ** p)
    assert np.allclose(fft_radix2(x), np.fft.fft(x), atol=1e-9)


def test_fft_rejects_other_lengths():
    with pytest.raises(ValueError):
        fft_radix2(np.ones(6))
    assert next_pow2(5) == 8 and next_pow2(8) == 8 and next_pow2(1) == 1


def test_constant_series_has_empty_spectrum():
    rep = fft_spectrum(np.full(100, 3.0))
    assert np.allclose(rep.magnitudes, 0.0)


def test_sinusoid_fundamental():
    t = np.arange(4096)
    rep = fft_spectrum(np.sin(0.05 * t) + 0.3 * np.sin(0.15 * t))
    assert abs(rep.fundamental() - 0.05) < 2 * PI / 4096
    # the imaginary-mass axis is halved: |sin(w t)| peaks at 2w
    rep = imag_mass_spectrum(np.abs(np.sin(0.01 * t)))
    assert abs(rep.fundamental() - 0.01) < PI / 4096
    assert rep.to_dict()["length"] == 4096


def test_spectrum_window_and_band():
    t = np.arange(3000)
    rep = fft_spectrum(np.sin(0.1 * t), 1000, 3000, max_freq=0.5)
    assert rep.frequencies.max() <= 0.5 and rep.length == 2000
    assert abs(rep.frequencies[1] - 2 * PI / 2048) < 1e-15  # zero-padded to 2048


# --- measurements -------------------------------------------------------------------

def test_minima_of_abs_sine():
    w = 0.01
    series = np.abs(np.sin(w * np.arange(2000)))
    pairs = measure.period_from_minima(series, smooth=1)
    assert len(pairs) >= 4
    for T, wi in pairs:
        assert abs(wi - w) / w < 0.01
        assert abs(T / (PI / w) - round(T / (PI / w))) < 0.01
    # minima of |sin(w t)| are pi / w apart; the oscillation period is twice that
    assert abs(measure.mean_period_from_minima(series, smooth=1) - 2 * PI / w) <= 3


def test_too_few_minima():
    with pytest.raises(measure.MeasurementError):
        measure.period_from_minima(np.abs(np.sin(0.01 * np.arange(400))))


def test_prominence_skips_ripple():
    t = np.arange(4000)
    series = np.abs(np.sin(0.002 * t)) + 0.01 * np.sin(0.2 * t)
    mins = measure.find_minima(series, prominence=0.5)
    assert np.allclose(np.diff(mins), PI / 0.002, atol=5)


def test_imag_mass():
    assert measure.imag_mass(np.ones(8, dtype=complex)) == 0.0
    assert measure.imag_mass(np.array([1j, -2j])) == 3.0


def test_phase_velocity_from_plane_wave():
    g = Grid((16,))
    snaps = run(plane_wave(g, PI / 4), make_plan(g, THETA), 100)
    v = measure.measure_phase_velocity(snaps)
    assert abs(v - 0.098) <= 0.002
    assert abs(measure.wavenumber_1d(snaps[0].field.psi) - PI / 4) < 1e-12


def test_phase_velocity_rejects_packets():
    g = Grid((64,))
    snaps = run(gaussian_packet(g, PI / 4, 32, 6), make_plan(g, THETA), 4)
    with pytest.raises(measure.MeasurementError):
        measure.measure_phase_velocity(snaps)


def test_resting_packet_has_no_group_velocity():
    g = Grid((128,))
    snaps = run(gaussian_packet(g, 0.0, 64, 8), make_plan(g, THETA), 100, every=50)
    assert abs(measure.measure_group_velocity(snaps)) < 0.005


def test_packet_center_wraps():
    g = Grid((100,))
    # the envelope is built on the open interval, so roll a centered packet across the seam
    psi = np.roll(gaussian_packet(g, 0.0, 50, 8).psi, 48)
    c, _ = measure.packet_center(psi)
    assert min(abs(c - 98), abs(c + 2)) < 0.5


def test_velocity_report():
    rep = measure.velocity_report(THETA, PI / 2, None, 0.26)
    d = rep.to_dict()
    assert abs(d["v_g_theory"] - 0.2588) < 1e-4


# --- diffraction ---------------------------------------------------------------------

def synthetic_column(shift=0.0):
    y = np.arange(400, dtype=float)
    s = diff.sin_phi_geometry(y - shift, 199.5, 190, 120)
    return theory.fraunhofer_wide(s, 40, 20, 10) * np.exp(-((y - 199.5) / 150) ** 2)


def test_sin_phi_geometry():
    s = diff.sin_phi_geometry([199.5, 269.5], 199.5, 190, 120)
    assert s[0] == 0.0 and abs(s[1] - 1 / math.sqrt(2)) < 1e-15


def test_slice_of_synthetic_pattern():
    rep = diff.diffraction_slice(synthetic_column(), 190, 199.5, 120, 40, 20, 10)
    zeros = diff.cos2_zeros(rep, 40, 10)
    mins = rep.minima()
    assert len(zeros) >= 2
    for z in zeros:
        assert np.min(np.abs(mins - z)) <= 1.0
    lo, hi = rep.window
    assert abs(rep.narrow[lo:hi].sum() - rep.intensity[lo:hi].sum()) < 1e-9
    assert abs(rep.fringe_centroid() - 199.5) < 0.5
    env = diff.envelope_check(rep, 40, 10)
    assert env["bounded"] and env["side_ratio"] < 1


def test_fringe_centroid_follows_shift():
    rep = diff.diffraction_slice(synthetic_column(4.0), 190, 199.5, 120, 40, 20, 10)
    assert abs(rep.fringe_centroid() - 203.5) < 1.0


def test_slice_errors():
    with pytest.raises(diff.DiffractionError):
        diff.diffraction_slice(np.zeros(400), 190, 199.5, 120, 40, 20, 10)
    with pytest.raises(diff.DiffractionError):
        diff.diffraction_slice(WaveField(Grid((8,)), np.ones(8)), 1, 4, 0, 4, 2, 1)
    with pytest.raises(diff.DiffractionError):
        diff.accumulate_column([], 3)


def test_accumulate_column():
    g = Grid((4, 4))
    f = WaveField(g, np.ones((4, 4)) / 4)
    assert np.allclose(diff.accumulate_column([f, f], 1), 2 / 16)


# --- kappa tuning -------------------------------------------------------------------

def test_harmonic_potential_shape():
    v = harmonic_potential(Grid((400,)), THETA, 2e-7, 200)
    assert np.argmin(v) in (199, 200) and abs(v[199] - v[200]) < 1e-15
    with pytest.raises(ValueError):
        harmonic_potential(Grid((4, 4)), THETA, 1e-7, 2)


def test_residual_is_smaller_near_the_tuned_kappa():
    g = Grid((400,))
    r_good = stationarity_residual(g, THETA, 400 / 12, 3, 2.17e-7, every=32)
    r_bad = stationarity_residual(g, THETA, 400 / 12, 3, 4.34e-7, every=32)
    assert r_good < r_bad


def test_tuning_rejects_bad_bracket():
    with pytest.raises(ValueError):
        tune_kappa(Grid((400,)), THETA, 400 / 12, 3, -1.0)
    with pytest.raises(TuningError) as exc:
        # a guess eight times too large puts the minimum at the lower bracket edge
        tune_kappa(Grid((400,)), THETA, 400 / 12, 3, 1.7e-6, n_coarse=3, every=64)
    assert exc.value.samples
