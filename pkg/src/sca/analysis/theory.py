"""Closed-form lattice predictions: velocities, dispersion, energy levels.

Velocities are in cells per cycle, frequencies in radians per cycle. The
lattice cannot tell k from k + 2 pi, so phase velocities are evaluated at the
Brillouin-zone representative of k in [-pi, pi).
"""
from __future__ import annotations

import math

import numpy as np


def brillouin(k):
    """Representative of k in [-pi, pi)."""
    return (np.asarray(k, dtype=float) + math.pi) % (2 * math.pi) - math.pi


def _nonzero_k(k) -> np.ndarray:
    kr = brillouin(k)
    if np.any(np.abs(kr) < 1e-12):
        raise ValueError("phase velocity is undefined for k = 0 (mod 2 pi)")
    return kr


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def dispersion_omega(theta, k):
    """omega = 4 theta sin^2(k/2) + (4/3) theta^3 cos(k) sin^2(k)."""
    k = np.asarray(k, dtype=float)
    return _scalar(4 * theta * np.sin(k / 2) ** 2
                   + 4.0 / 3.0 * theta ** 3 * np.cos(k) * np.sin(k) ** 2)


def base_dispersion_omega(theta, k):
    """First-order term of the dispersion relation (the theta -> 0 shape)."""
    return _scalar(4 * theta * np.sin(np.asarray(k, dtype=float) / 2) ** 2)


def phase_velocity_theory(theta, k):
    kr = _nonzero_k(k)
    return _scalar(dispersion_omega(theta, kr) / kr)


def base_phase_velocity(theta, k):
    kr = _nonzero_k(k)
    return _scalar(4 * theta / kr * np.sin(kr / 2) ** 2)


def relative_vp_error(theta, k):
    """Leading relative deviation of v_p from the base velocity."""
    kr = _nonzero_k(k)
    return _scalar(theta ** 2 * 4 * np.cos(kr) * np.sin(kr) ** 2 / (3 * np.sin(kr / 2) ** 2))


def group_velocity_theory(theta, k):
    """d omega / dk = 2 theta sin k + (4/3) theta^3 (2 sin k - 3 sin^3 k)."""
    s = np.sin(np.asarray(k, dtype=float))
    return _scalar(2 * theta * s + 4.0 / 3.0 * theta ** 3 * (2 * s - 3 * s ** 3))


def well_energy(n, L, theta):
    """Continuum infinite-well level omega_n = n^2 pi^2 theta / L^2."""
    return _scalar(np.asarray(n, dtype=float) ** 2 * math.pi ** 2 * theta / L ** 2)


def well_energy_dispersion(n, L, theta):
    """Lattice infinite-well level: the dispersion relation at k = n pi / L."""
    return dispersion_omega(theta, np.asarray(n, dtype=float) * math.pi / L)


def oscillator_omega(theta, rho):
    """Oscillator frequency 2 theta / rho^2 matching the length scale rho."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return 2 * theta / rho ** 2


def oscillator_level(theta, rho, n):
    """Continuum level (n + 1/2) omega."""
    return (n + 0.5) * oscillator_omega(theta, rho)


def oscillator_kappa(theta, rho):
    """Force constant m omega^2 = 2 theta / rho^4 in absolute lattice units."""
    return 2 * theta / rho ** 4


def oscillator_omega_asymptotic(theta, rho, n):
    """Free-particle dispersion at the effective wavenumber sqrt(2n) / rho."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    k = np.sqrt(2.0 * np.asarray(n, dtype=float)) / rho
    return _scalar(4 * theta * np.sin(k / 2) ** 2
                   + 4.0 / 3.0 * theta ** 3 * np.cos(k) * np.sin(k) ** 2)


def fraunhofer_narrow(sin_phi, d, lam):
    return np.cos(math.pi * d * np.asarray(sin_phi) / lam) ** 2


def fraunhofer_wide(sin_phi, d, b, lam):
    """Narrow-slit fringes times sinc(pi b sin(phi) / lambda) (unnormalized sinc)."""
    return fraunhofer_narrow(sin_phi, d, lam) * np.sinc(b * np.asarray(sin_phi) / lam)
