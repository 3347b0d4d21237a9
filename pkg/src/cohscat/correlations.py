"""First- and second-order correlation functions of the CW-driven emitter.

g2 follows from evolving the Bloch equations out of the ground state after a
detection event; g1 from the regression theorem applied to the one-emitter
master equation. Both are evaluated through the (exact) eigen-decomposition
of the corresponding linear generator, with an ODE fallback when the
generator is defective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .emitter import EmitterParams, bloch_system, steady_state, _check_rabi

_EVEN_TOL = 1e-9


@dataclass(frozen=True)
class BlinkingParams:
    """Classical intermittency envelope (1 + amplitude * exp(-|tau|/timescale))."""

    amplitude: float
    timescale: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("blinking amplitude must be >= 0")
        if self.timescale <= 0:
            raise ValueError("blinking timescale must be > 0")


@dataclass(frozen=True)
class TimingResponse:
    """Gaussian detector timing response; fwhm = 0 is an ideal detector."""

    fwhm: float

    def __post_init__(self):
        if self.fwhm < 0:
            raise ValueError("timing fwhm must be >= 0")


@dataclass(frozen=True)
class CorrelationTrace:
    """Sampled correlation function on a tau grid (ns).

    kind is "G1" (complex values, with the constant coherent part recorded
    in coherent_offset), "G2" (real, non-negative, even) or "VISIBILITY"
    (real, in [0, 1]; flagged marks points where the denominator vanished).
    """

    tau_grid: np.ndarray
    values: np.ndarray
    kind: str
    coherent_offset: float | None = None
    flagged: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "tau_grid", np.asarray(self.tau_grid, dtype=float))
        if self.kind == "G1":
            object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
            if np.any(np.abs(self.values) > 1.0 + _EVEN_TOL):
                raise ValueError("|g1| must not exceed 1")
        elif self.kind in ("G2", "VISIBILITY"):
            vals = np.asarray(self.values, dtype=float)
            if np.any(vals < -_EVEN_TOL):
                raise ValueError(f"{self.kind} values must be >= 0")
            if self.tau_grid.shape != vals.shape:
                raise ValueError("tau_grid and values must have matching shapes")
            object.__setattr__(self, "values", np.clip(self._folded(vals), 0.0, None))
        else:
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        if self.tau_grid.shape != self.values.shape:
            raise ValueError("tau_grid and values must have matching shapes")

    def _folded(self, vals):
        # Intensity correlations are recorded with both detector orderings,
        # so evenness in tau is enforced by folding whenever the grid is
        # sign-symmetric (a no-op for already-even data).
        rev = -self.tau_grid[::-1]
        if self.tau_grid.size and np.allclose(self.tau_grid, rev, atol=1e-12, rtol=0):
            return (vals + vals[::-1]) / 2.0
        return vals

    def is_uniform(self) -> bool:
        d = np.diff(self.tau_grid)
        return len(d) > 0 and np.allclose(d, d[0], rtol=1e-9, atol=1e-12)


def _propagate_modes(gen: np.ndarray, x0: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """exp(gen * tau) @ x0 for every tau >= 0, via eigen-decomposition."""
    evals, vecs = np.linalg.eig(gen.astype(complex))
    if np.linalg.cond(vecs) < 1e9:
        y0 = np.linalg.solve(vecs, x0.astype(complex))
        phases = np.exp(np.multiply.outer(taus, evals))
        return (phases * y0) @ vecs.T
    # Defective generator (critically damped drive): integrate instead.
    uniq, inverse = np.unique(taus, return_inverse=True)
    if uniq[-1] == 0.0:
        return np.tile(x0.astype(complex), (len(taus), 1))
    t_eval = uniq if uniq[0] > 0.0 else uniq[1:]
    sol = solve_ivp(
        lambda t, y: gen @ y,
        (0.0, float(uniq[-1])),
        x0.astype(complex),
        method="DOP853",
        t_eval=t_eval if len(t_eval) else None,
        rtol=1e-12,
        atol=1e-14,
    )
    if not sol.success:
        raise RuntimeError(f"regression propagation failed: {sol.message}")
    ys = sol.y.T if len(t_eval) else np.empty((0, len(x0)), dtype=complex)
    if uniq[0] == 0.0:
        ys = np.vstack([x0.astype(complex), ys])
    return ys[inverse]


def _require_cw(params: EmitterParams, rabi: float):
    _check_rabi(rabi)
    if rabi == 0.0:
        raise ValueError("correlation functions require a nonzero CW drive")


def g2(params: EmitterParams, rabi: float, tau_grid) -> CorrelationTrace:
    """Normalized intensity autocorrelation g2(tau) of the driven emitter.

    Evolves the Bloch vector from the ground state (the post-emission state)
    and normalizes the regrowth of rho_ee by its steady-state value. Even in
    tau by construction.
    """
    _require_cw(params, rabi)
    tau_grid = np.asarray(tau_grid, dtype=float)
    a_mat, b_vec = bloch_system(params, rabi)
    x_ss = np.linalg.solve(a_mat, -b_vec)
    rho_ss = (1.0 + x_ss[2]) / 2.0
    x0 = np.array([0.0, 0.0, -1.0]) - x_ss
    abs_tau = np.abs(tau_grid)
    modes = _propagate_modes(a_mat, x0, abs_tau)
    w = modes[:, 2].real + x_ss[2]
    vals = (1.0 + w) / 2.0 / rho_ss
    return CorrelationTrace(tau_grid=tau_grid, values=np.clip(vals, 0.0, None), kind="G2")


def _liouvillian(params: EmitterParams, rabi: float) -> np.ndarray:
    """Generator of the master equation on (rho_ee, rho_eg, rho_ge, rho_gg)."""
    g_rad = 1.0 / params.t1
    g_t2 = 1.0 / params.t2
    d = params.detuning
    hw = 0.5j * rabi
    return np.array(
        [
            [-g_rad, -hw, hw, 0.0],
            [-hw, -1j * d - g_t2, 0.0, hw],
            [hw, 0.0, 1j * d - g_t2, -hw],
            [g_rad, hw, -hw, 0.0],
        ],
        dtype=complex,
    )


def g1(params: EmitterParams, rabi: float, tau_grid) -> CorrelationTrace:
    """First-order coherence g1(tau) = <s+(t+tau) s-(t)> / rho_ee.

    The constant coherent part |<s->|^2 / rho_ee is stored as
    coherent_offset and equals the coherently scattered fraction. Negative
    taus are filled by conjugate symmetry.
    """
    _require_cw(params, rabi)
    tau_grid = np.asarray(tau_grid, dtype=float)
    ss = steady_state(params, rabi)
    rho_ss = ss.rho_ee()
    c_ss = (ss.u + 1j * ss.v) / 2.0
    lio = _liouvillian(params, rabi)
    # sigma- rho_ss has rows (e,g): [[0, 0], [rho_ee, rho_eg]]
    x0 = np.array([0.0, 0.0, rho_ss, c_ss], dtype=complex)
    abs_tau = np.abs(tau_grid)
    modes = _propagate_modes(lio, x0, abs_tau)
    vals = modes[:, 2] / rho_ss
    vals = np.where(tau_grid < 0, np.conj(vals), vals)
    mag = np.abs(vals)
    vals = np.where(mag > 1.0, vals / np.maximum(mag, 1.0), vals)  # trim roundoff
    offset = abs(c_ss) ** 2 / rho_ss
    return CorrelationTrace(tau_grid=tau_grid, values=vals, kind="G1", coherent_offset=offset)


def apply_blinking(trace: CorrelationTrace, blinking: BlinkingParams) -> CorrelationTrace:
    """Multiply a G2 trace by the bunching envelope (1 + a*exp(-|tau|/tau_b))."""
    if trace.kind != "G2":
        raise ValueError("blinking applies to G2 traces only")
    env = 1.0 + blinking.amplitude * np.exp(-np.abs(trace.tau_grid) / blinking.timescale)
    return replace(trace, values=trace.values * env)


def convolve_timing(trace: CorrelationTrace, irf: TimingResponse) -> CorrelationTrace:
    """Convolve a trace with the Gaussian detector response.

    Requires a uniform tau grid. The kernel is unit-normalized on the grid,
    so the integral is preserved provided the trace has settled to a
    constant within a kernel width of the grid edges (edge bins are
    replicated outward).
    """
    if not trace.is_uniform():
        raise ValueError("convolve_timing requires a uniform tau grid")
    if irf.fwhm == 0.0:
        return replace(trace)
    dt = float(trace.tau_grid[1] - trace.tau_grid[0])
    sigma = irf.fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    half = max(1, int(math.ceil(6.0 * sigma / dt)))
    x = np.arange(-half, half + 1) * dt
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    kernel /= kernel.sum()

    def smooth(arr):
        padded = np.concatenate([np.full(half, arr[0]), arr, np.full(half, arr[-1])])
        return np.convolve(padded, kernel, mode="valid")

    if trace.kind == "G1":
        vals = smooth(trace.values.real) + 1j * smooth(trace.values.imag)
    else:
        vals = smooth(trace.values)
    return replace(trace, values=vals)
