"""CW two-photon interference in an unbalanced Mach-Zehnder interferometer.

Photons emitted one path-delay apart meet at the output coupler; the
post-selected autocorrelation decomposes into three delayed copies of the
source g2 plus, for parallel polarizations, an interference term carrying
|g1|^2. Beat-note terms between the two paths are dropped (the delay far
exceeds the correlation times of interest).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .correlations import CorrelationTrace, TimingResponse, convolve_timing, g1, g2
from .emitter import EmitterParams

PARALLEL = "parallel"
ORTHOGONAL = "orthogonal"


@dataclass(frozen=True)
class HomSetup:
    """Unbalanced interferometer: path delay (ns), coupler reflectivity and
    the relative polarization of the two arms."""

    delay: float
    splitter_ratio: float = 0.5
    polarization: str = PARALLEL

    def __post_init__(self):
        if self.delay <= 0:
            raise ValueError("delay must be > 0")
        if not 0.0 < self.splitter_ratio < 1.0:
            raise ValueError("splitter_ratio must lie in (0, 1)")
        if self.polarization not in (PARALLEL, ORTHOGONAL):
            raise ValueError(f"polarization must be parallel or orthogonal, got {self.polarization!r}")


def _pair_values(params: EmitterParams, rabi: float, setup: HomSetup, tau_grid: np.ndarray):
    r = setup.splitter_ratio
    t = 1.0 - r
    tau_grid = np.asarray(tau_grid, dtype=float)
    center = g2(params, rabi, tau_grid).values
    minus = g2(params, rabi, tau_grid - setup.delay).values
    plus = g2(params, rabi, tau_grid + setup.delay).values
    perp = 2.0 * r * t * center + r ** 2 * minus + t ** 2 * plus
    coh = np.abs(g1(params, rabi, tau_grid).values) ** 2
    par = np.clip(perp - 2.0 * r * t * coh, 0.0, None)
    return par, perp


def hom_g2(params: EmitterParams, rabi: float, setup: HomSetup, tau_grid) -> CorrelationTrace:
    """Post-selected autocorrelation at one interferometer output.

    Requires the grid to reach at least twice the path delay so that the
    side structure is contained. The trace records both detector orderings,
    so for an unbalanced splitter the ordered R^2/T^2 side weights fold
    into their mean at -+delay.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.max(np.abs(tau_grid)) < 2.0 * setup.delay:
        raise ValueError("tau grid must extend to at least twice the interferometer delay")
    par, perp = _pair_values(params, rabi, setup, tau_grid)
    vals = par if setup.polarization == PARALLEL else perp
    return CorrelationTrace(tau_grid=tau_grid, values=vals, kind="G2")


def hom_pair(
    params: EmitterParams,
    rabi: float,
    setup: HomSetup,
    tau_grid,
    irf: TimingResponse | None = None,
) -> tuple[CorrelationTrace, CorrelationTrace]:
    """(parallel, orthogonal) traces, optionally smeared by the detector IRF."""
    par = hom_g2(params, rabi, replace(setup, polarization=PARALLEL), tau_grid)
    perp = hom_g2(params, rabi, replace(setup, polarization=ORTHOGONAL), tau_grid)
    if irf is not None and irf.fwhm > 0.0:
        par = convolve_timing(par, irf)
        perp = convolve_timing(perp, irf)
    return par, perp


def visibility(parallel: CorrelationTrace, orthogonal: CorrelationTrace) -> CorrelationTrace:
    """Pointwise (g2_perp - g2_par)/g2_perp; zero (and flagged) where the
    orthogonal trace vanishes."""
    if parallel.tau_grid.shape != orthogonal.tau_grid.shape or not np.allclose(
        parallel.tau_grid, orthogonal.tau_grid, rtol=0, atol=1e-12
    ):
        raise ValueError("visibility requires identical tau grids")
    denom = orthogonal.values
    bad = denom < 1e-12
    safe = np.where(bad, 1.0, denom)
    vals = np.where(bad, 0.0, (denom - parallel.values) / safe)
    vals = np.clip(vals, 0.0, 1.0)
    return CorrelationTrace(
        tau_grid=parallel.tau_grid, values=vals, kind="VISIBILITY", flagged=bad
    )


def hom_visibility(
    params: EmitterParams,
    rabi: float,
    setup: HomSetup,
    tau_grid,
    irf: TimingResponse | None = None,
) -> CorrelationTrace:
    par, perp = hom_pair(params, rabi, setup, tau_grid, irf)
    return visibility(par, perp)


def visibility_family(
    params: EmitterParams,
    rabi: float,
    setup: HomSetup,
    ratios,
    tau_grid,
    irf: TimingResponse | None = None,
) -> list[CorrelationTrace]:
    """One visibility trace per coherence ratio t2/(2 t1), shared grid."""
    traces = []
    for ratio in ratios:
        traces.append(hom_visibility(params.with_coherence_ratio(ratio), rabi, setup, tau_grid, irf))
    return traces


def solve_timing_for_visibility(
    params: EmitterParams,
    rabi: float,
    setup: HomSetup,
    tau_grid,
    target: float = 0.89,
    fwhm_max: float = 2.0,
) -> float:
    """Detector-response FWHM (ns) at which the peak visibility equals target.

    Peak visibility falls monotonically from 1 as the IRF smears the
    parallel dip, so a scalar bracket suffices.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target visibility must lie in (0, 1)")
    tau_grid = np.asarray(tau_grid, dtype=float)

    def peak(fwhm: float) -> float:
        irf = TimingResponse(fwhm=fwhm) if fwhm > 0 else None
        return float(np.max(hom_visibility(params, rabi, setup, tau_grid, irf).values))

    lo = tau_grid[1] - tau_grid[0]
    if peak(lo) < target:
        raise ValueError("grid spacing too coarse to reach the target visibility")
    hi = lo
    while peak(hi) > target:
        hi *= 2.0
        if hi > fwhm_max:
            raise ValueError(f"no IRF below {fwhm_max} ns yields visibility {target}")
    return float(brentq(lambda f: peak(f) - target, hi / 2.0, hi, xtol=1e-6))
