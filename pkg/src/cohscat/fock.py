"""Few-photon multimode linear optics with partial distinguishability.

States live in the occupation basis of (mode, internal label) pairs: the
internal label tags a photon's unmeasured degrees of freedom, so photons
with different labels never interfere while the circuit acts on the mode
index alone. Amplitudes evolve by expanding creation-operator monomials
element by element; a matrix-permanent evaluator over the composed circuit
unitary provides an independent route to the same transition amplitudes.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import OptimizeWarning, brentq, curve_fit

_MAX_PHOTONS = 3
_UNITARY_TOL = 1e-12

Config = tuple[tuple[int, int], ...]  # sorted ((mode, label), ...)


@dataclass(frozen=True)
class CircuitElement:
    """Directional coupler or single-mode phase shifter.

    The coupler unitary on its two modes is [[sqrt(R), i sqrt(1-R)],
    [i sqrt(1-R), sqrt(R)]].
    """

    kind: str
    modes: tuple[int, ...]
    reflectivity: float | None = None
    phi: float | None = None

    @classmethod
    def coupler(cls, reflectivity: float, mode_a: int, mode_b: int) -> "CircuitElement":
        if not 0.0 < reflectivity < 1.0:
            raise ValueError("coupler reflectivity must lie in (0, 1)")
        if mode_a == mode_b:
            raise ValueError("coupler needs two distinct modes")
        return cls(kind="coupler", modes=(mode_a, mode_b), reflectivity=reflectivity)

    @classmethod
    def phase(cls, phi: float, mode: int) -> "CircuitElement":
        return cls(kind="phase", modes=(mode,), phi=phi)

    def matrix(self, n_modes: int) -> np.ndarray:
        """Element unitary embedded in the identity on n_modes."""
        if max(self.modes) >= n_modes:
            raise ValueError(f"element touches mode {max(self.modes)} of {n_modes}")
        u = np.eye(n_modes, dtype=complex)
        if self.kind == "coupler":
            a, b = self.modes
            r = math.sqrt(self.reflectivity)
            t = 1j * math.sqrt(1.0 - self.reflectivity)
            u[a, a] = r
            u[b, b] = r
            u[a, b] = t
            u[b, a] = t
        else:
            u[self.modes[0], self.modes[0]] = np.exp(1j * self.phi)
        if not np.allclose(u @ u.conj().T, np.eye(n_modes), atol=_UNITARY_TOL):
            raise ValueError("element matrix is not unitary")
        return u


def circuit_unitary(elements, n_modes: int) -> np.ndarray:
    """Composed mode matrix of a sequence of elements (applied in order)."""
    u = np.eye(n_modes, dtype=complex)
    for el in elements:
        u = el.matrix(n_modes) @ u
    return u


def _config_norm(config: Config) -> float:
    norm = 1.0
    for count in Counter(config).values():
        norm *= math.factorial(count)
    return norm


@dataclass(frozen=True)
class FockState:
    """Superposition over occupation configurations of (mode, label) pairs."""

    amplitudes: dict[Config, complex]
    n_modes: int

    def __post_init__(self):
        if not self.amplitudes:
            raise ValueError("state must contain at least one configuration")
        counts = {len(cfg) for cfg in self.amplitudes}
        if len(counts) != 1:
            raise ValueError("all configurations must hold the same photon number")
        if max(counts) > _MAX_PHOTONS:
            raise ValueError(f"at most {_MAX_PHOTONS} photons supported")
        for cfg in self.amplitudes:
            if tuple(sorted(cfg)) != cfg:
                raise ValueError(f"configuration {cfg} is not in sorted canonical form")
            if any(m < 0 or m >= self.n_modes for m, _ in cfg):
                raise ValueError(f"configuration {cfg} uses modes outside 0..{self.n_modes - 1}")
        total = sum(abs(a) ** 2 for a in self.amplitudes.values())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"state norm^2 is {total}, must be 1")

    @property
    def n_photons(self) -> int:
        return len(next(iter(self.amplitudes)))

    @classmethod
    def from_photons(cls, photons, n_modes: int) -> "FockState":
        """Product state with one photon per (mode, label) entry."""
        cfg = tuple(sorted(tuple(p) for p in photons))
        return cls(amplitudes={cfg: 1.0 + 0.0j}, n_modes=n_modes)

    def mode_occupations(self) -> dict[tuple[int, ...], float]:
        """Probability of each mode-occupation pattern, labels traced out."""
        probs: dict[tuple[int, ...], float] = {}
        for cfg, amp in self.amplitudes.items():
            occ = [0] * self.n_modes
            for mode, _ in cfg:
                occ[mode] += 1
            key = tuple(occ)
            probs[key] = probs.get(key, 0.0) + abs(amp) ** 2
        return probs

    def expected_mode_counts(self) -> np.ndarray:
        out = np.zeros(self.n_modes)
        for occ, p in self.mode_occupations().items():
            out += p * np.asarray(occ)
        return out


def apply_element(state: FockState, element: CircuitElement) -> FockState:
    """Evolve the state through one element by monomial expansion."""
    if max(element.modes) >= state.n_modes:
        raise ValueError(
            f"element touches mode {max(element.modes)}, state has {state.n_modes} modes"
        )
    if element.kind == "phase":
        out = {}
        mode = element.modes[0]
        for cfg, amp in state.amplitudes.items():
            k = sum(1 for m, _ in cfg if m == mode)
            out[cfg] = out.get(cfg, 0.0) + amp * np.exp(1j * element.phi * k)
        return FockState(amplitudes=out, n_modes=state.n_modes)

    u = element.matrix(state.n_modes)
    out: dict[Config, complex] = {}
    for cfg, amp in state.amplitudes.items():
        base = amp / math.sqrt(_config_norm(cfg))
        choices = []
        for mode, label in cfg:
            if mode in element.modes:
                choices.append([(m, label, u[m, mode]) for m in element.modes])
            else:
                choices.append([(mode, label, 1.0 + 0.0j)])
        for combo in itertools.product(*choices):
            factor = base
            for _, _, coeff in combo:
                factor *= coeff
            if factor == 0.0:
                continue
            new_cfg = tuple(sorted((m, l) for m, l, _ in combo))
            out[new_cfg] = out.get(new_cfg, 0.0) + factor * math.sqrt(_config_norm(new_cfg))
    out = {cfg: a for cfg, a in out.items() if abs(a) > 1e-14}
    return FockState(amplitudes=out, n_modes=state.n_modes)


def apply_circuit(state: FockState, elements) -> FockState:
    for el in elements:
        state = apply_element(state, el)
    return state


def _permanent(mat: np.ndarray) -> complex:
    n = mat.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    for perm in itertools.permutations(range(n)):
        term = 1.0 + 0.0j
        for i, j in enumerate(perm):
            term *= mat[i, j]
        total += term
    return total


def permanent_amplitude(unitary: np.ndarray, input_occ, output_occ) -> complex:
    """Transition amplitude <output|U|input> for identical bosons.

    Occupations are per-mode photon counts; the amplitude is the permanent
    of the row/column-repeated submatrix with the usual 1/sqrt(n!)
    normalization.
    """
    unitary = np.asarray(unitary, dtype=complex)
    input_occ = list(input_occ)
    output_occ = list(output_occ)
    if len(input_occ) != unitary.shape[1] or len(output_occ) != unitary.shape[0]:
        raise ValueError("occupation lists must match the unitary dimension")
    if sum(input_occ) != sum(output_occ):
        raise ValueError("photon number must be conserved")
    if sum(input_occ) > _MAX_PHOTONS:
        raise ValueError(f"at most {_MAX_PHOTONS} photons supported")
    cols = [m for m, n in enumerate(input_occ) for _ in range(n)]
    rows = [m for m, n in enumerate(output_occ) for _ in range(n)]
    sub = unitary[np.ix_(rows, cols)]
    norm = 1.0
    for n in input_occ:
        norm *= math.factorial(n)
    for n in output_occ:
        norm *= math.factorial(n)
    return _permanent(sub) / math.sqrt(norm)


@dataclass(frozen=True)
class SourceModel:
    """Pairwise photon indistinguishability and two-photon contamination.

    overlap : probability weight of the fully indistinguishable component
    multiphoton_g : relative weight of a two-photons-in-one-port event
    """

    overlap: float
    multiphoton_g: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("overlap must lie in [0, 1]")
        if self.multiphoton_g < 0:
            raise ValueError("multiphoton_g must be >= 0")


@dataclass(frozen=True)
class FringeTable:
    """Detection probabilities versus interferometer phase."""

    phi: np.ndarray
    p_out0: np.ndarray
    p_out1: np.ndarray
    p_coincidence: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return {"p_out0": self.p_out0, "p_out1": self.p_out1, "p_coincidence": self.p_coincidence}[
            name
        ]

    def csv_rows(self):
        yield "phi_rad,p_out0,p_out1,p_coincidence"
        for row in zip(self.phi, self.p_out0, self.p_out1, self.p_coincidence):
            yield ",".join(f"{x:.12g}" for x in row)


def _mzi_elements(r1: float, phi: float, r2: float):
    return [
        CircuitElement.coupler(r1, 0, 1),
        CircuitElement.phase(phi, 0),
        CircuitElement.coupler(r2, 0, 1),
    ]


def _dual_component_probs(r1, phi, r2, labels):
    state = FockState.from_photons([(0, labels[0]), (1, labels[1])], n_modes=2)
    state = apply_circuit(state, _mzi_elements(r1, phi, r2))
    probs = state.mode_occupations()
    coinc = probs.get((1, 1), 0.0)
    mean0 = state.expected_mode_counts()[0]
    return mean0 / 2.0, coinc


def _contamination_probs(r1, phi, r2, port):
    photons = [(port, 0), (port, 1)]  # re-excited photons do not interfere
    state = FockState.from_photons(photons, n_modes=2)
    state = apply_circuit(state, _mzi_elements(r1, phi, r2))
    probs = state.mode_occupations()
    coinc = probs.get((1, 1), 0.0)
    mean0 = state.expected_mode_counts()[0]
    return mean0 / 2.0, coinc


def mzi_fringes(
    source: SourceModel,
    coupler_r1: float,
    coupler_r2: float,
    phi_grid,
    input_kind: str = "dual",
) -> FringeTable:
    """Single-photon and coincidence fringes of a two-coupler interferometer.

    Dual input mixes an indistinguishable pair (weight overlap) with a
    distinguishable-label pair, plus two-photons-in-one-port contamination
    events of relative weight multiphoton_g per input port.
    """
    phi_grid = np.asarray(phi_grid, dtype=float)
    if phi_grid.ndim != 1 or len(phi_grid) < 2:
        raise ValueError("phi grid must hold at least two points")
    span = phi_grid[-1] - phi_grid[0]
    step = span / (len(phi_grid) - 1)
    # a half-open [0, 2*pi) sampling counts as full coverage
    if span + step < 2.0 * math.pi - 1e-9:
        raise ValueError("phi grid must cover at least 2*pi")
    p0 = np.empty_like(phi_grid)
    p1 = np.empty_like(phi_grid)
    pc = np.empty_like(phi_grid)
    for i, phi in enumerate(phi_grid):
        if input_kind == "single":
            state = FockState.from_photons([(0, 0)], n_modes=2)
            state = apply_circuit(state, _mzi_elements(coupler_r1, phi, coupler_r2))
            mean0 = state.expected_mode_counts()[0]
            p0[i], p1[i], pc[i] = mean0, 1.0 - mean0, 0.0
            continue
        if input_kind != "dual":
            raise ValueError(f"input_kind must be single or dual, got {input_kind!r}")
        m = source.overlap
        g = source.multiphoton_g
        p0_ind, pc_ind = _dual_component_probs(coupler_r1, phi, coupler_r2, (0, 0))
        p0_dis, pc_dis = _dual_component_probs(coupler_r1, phi, coupler_r2, (0, 1))
        p0_mix = m * p0_ind + (1.0 - m) * p0_dis
        pc_mix = m * pc_ind + (1.0 - m) * pc_dis
        if g > 0:
            p0_c0, pc_c0 = _contamination_probs(coupler_r1, phi, coupler_r2, 0)
            p0_c1, pc_c1 = _contamination_probs(coupler_r1, phi, coupler_r2, 1)
            weight = 1.0 + 2.0 * g
            p0_mix = (p0_mix + g * (p0_c0 + p0_c1)) / weight
            pc_mix = (pc_mix + g * (pc_c0 + pc_c1)) / weight
        p0[i], p1[i], pc[i] = p0_mix, 1.0 - p0_mix, pc_mix
    return FringeTable(phi=phi_grid, p_out0=p0, p_out1=p1, p_coincidence=pc)


@dataclass(frozen=True)
class FringeFit:
    visibility: float
    frequency: float
    phase: float
    offset: float
    amplitude: float
    residual_norm: float


def fit_fringe(table: FringeTable, harmonic: int, column: str | None = None) -> FringeFit:
    """Least-squares sinusoid fit y = c + a cos(f phi + theta) near the
    requested harmonic; visibility is (max-min)/(max+min) of the fit."""
    if harmonic not in (1, 2):
        raise ValueError("harmonic must be 1 or 2")
    if column is None:
        column = "p_coincidence" if harmonic == 2 else "p_out0"
    phi = table.phi
    y = table.column(column)
    span = phi[-1] - phi[0]
    pts_per_period = len(phi) / (span / (2.0 * math.pi / harmonic))
    if pts_per_period < 8:
        raise ValueError("need at least 8 samples per fringe period")

    # Linear pre-fit at the fixed harmonic seeds the nonlinear fit.
    design = np.column_stack([np.ones_like(phi), np.cos(harmonic * phi), np.sin(harmonic * phi)])
    c0, cc, cs = np.linalg.lstsq(design, y, rcond=None)[0]
    amp0 = math.hypot(cc, cs)
    theta0 = math.atan2(-cs, cc)

    def model(x, c, a, f, theta):
        return c + a * np.cos(f * x + theta)

    try:
        with warnings.catch_warnings():
            # Noise-free synthetic fringes fit exactly; the covariance is
            # then singular, which is irrelevant here.
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(
                model, phi, y, p0=[c0, max(amp0, 1e-6), float(harmonic), theta0], maxfev=20000
            )
    except RuntimeError as exc:
        raise RuntimeError(f"fringe fit did not converge: {exc}") from exc
    c, a, f, theta = popt
    if a < 0:
        a, theta = -a, theta + math.pi
    if f < 0:
        f, theta = -f, -theta
    resid = float(np.linalg.norm(model(phi, *popt) - y))
    vis = a / c if c > 0 else math.inf
    return FringeFit(
        visibility=float(vis),
        frequency=float(f),
        phase=float(math.remainder(theta, 2.0 * math.pi)),
        offset=float(c),
        amplitude=float(a),
        residual_norm=resid,
    )


def single_photon_visibility(reflectivity: float) -> float:
    """Fringe visibility of the direct output for equal couplers R1 = R2."""
    diff = (2.0 * reflectivity - 1.0) ** 2
    return (1.0 - diff) / (1.0 + diff)


def solve_coupler_reflectivity(target_visibility: float) -> float:
    """Equal-coupler reflectivity whose direct-output fringe visibility
    matches the target (the branch above 1/2 is returned by convention)."""
    if not 0.0 < target_visibility <= 1.0:
        raise ValueError("target visibility must lie in (0, 1]")
    if target_visibility == 1.0:
        return 0.5
    return float(
        brentq(lambda r: single_photon_visibility(r) - target_visibility, 0.5, 1.0 - 1e-9)
    )
