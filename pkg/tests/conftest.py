"""Shared test oracles, kept independent of the library code paths they check."""

import numpy as np
import pytest


def g2_resonant_closed_form(t1, rabi, taus):
    """Damped-oscillation solution for the resonant g2 at t2 = 2*t1.

    mu is complex below the oscillation threshold; the expression stays
    real either way.
    """
    taus = np.abs(np.asarray(taus, dtype=float))
    mu = np.sqrt(complex(rabi ** 2 - (1.0 / (4.0 * t1)) ** 2))
    if mu == 0:
        damp = 1.0 + 3.0 * taus / (4.0 * t1)
    else:
        damp = np.cos(mu * taus) + (3.0 / (4.0 * t1)) * np.sin(mu * taus) / mu
    return (1.0 - np.exp(-3.0 * taus / (4.0 * t1)) * damp).real


def liouvillian_reference(t1, t2, detuning, rabi):
    """Master-equation generator on (rho_ee, rho_eg, rho_ge, rho_gg),
    written out independently for ODE-based regression cross-checks."""
    g = 1.0 / t1
    gt = 1.0 / t2
    hw = 0.5j * rabi
    return np.array(
        [
            [-g, -hw, hw, 0.0],
            [-hw, -1j * detuning - gt, 0.0, hw],
            [hw, 0.0, 1j * detuning - gt, -hw],
            [g, hw, -hw, 0.0],
        ],
        dtype=complex,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
