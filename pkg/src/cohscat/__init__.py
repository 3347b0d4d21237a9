"""cohscat: coherent light scattering from a cavity-enhanced two-level emitter.

Library layout:

- emitter       parameters, Bloch dynamics, steady state, coherent fraction,
                saturation/gating intensity model
- correlations  g1/g2 via the regression theorem, blinking envelope,
                detector timing response
- spectrum      coherent + incoherent emission spectrum, linewidth fitting
- hom           CW two-photon interference in a delay interferometer
- pulsed        Rabi curves, quantum-jump photon streams, coincidence-peak
                analysis, click-level pulsed interference
- fock          few-photon linear optics with partial distinguishability
- scenario/cli  JSON-configured figure-reproducing command line
"""

__version__ = "0.1.0"

from .correlations import (
    BlinkingParams,
    CorrelationTrace,
    TimingResponse,
    apply_blinking,
    convolve_timing,
    g1,
    g2,
)
from .emitter import (
    HBAR_UEV_NS,
    BlochState,
    DriveField,
    EmitterParams,
    GatingModel,
    IntegrationError,
    default_bulk_params,
    default_cavity_params,
    derive_cavity_params,
    evolve,
    rrs_fraction,
    saturation_curve,
    steady_state,
)
from .fock import (
    CircuitElement,
    FockState,
    FringeTable,
    SourceModel,
    apply_circuit,
    apply_element,
    circuit_unitary,
    fit_fringe,
    mzi_fringes,
    permanent_amplitude,
    solve_coupler_reflectivity,
)
from .hom import (
    HomSetup,
    hom_g2,
    hom_pair,
    hom_visibility,
    solve_timing_for_visibility,
    visibility,
    visibility_family,
)
from .pulsed import (
    PeakReport,
    PhotonStream,
    PulseTrain,
    coincidence_histogram,
    export_stream,
    hbt_analyze,
    pulsed_hom,
    rabi_curve,
    simulate_stream,
    synthetic_stream,
)
from .scenario import Scenario, SchemaError
from .spectrum import (
    FitConvergenceError,
    GridError,
    SpectralResponse,
    SpectrumTrace,
    emission_spectrum,
    fit_linewidth,
    incoherent_spectrum,
)
