"""Measurements on simulated fields and the closed-form values they are compared with."""
from .diffraction import DiffractionError, DiffractionReport, diffraction_slice, envelope_check
from .measure import (MeasurementError, VelocityReport, find_minima, imag_mass, imag_mass_series,
                      measure_group_velocity, measure_phase_velocity, period_from_minima,
                      period_from_spectrum)
from .spectrum import SpectrumReport, fft_radix2, fft_spectrum, imag_mass_spectrum
from .tuning import TuningError, harmonic_potential, tune_kappa
