"""Pulse-schedule compilation, verification and simulation for homonuclear
spin systems.

The package models a molecule (`SpinSystem`), compiles refocusing schedules
for quantum-logic gates (`generate`), checks them algebraically
(`verify_schedule`), fits them onto the real time axis (`pack_timed`), and
validates them numerically with exact density-matrix simulation
(`simulate_gate`, `simulate_spectrum`, `tsetse_metric`).
"""

__version__ = "0.1.0"

from .errors import (
    GenerationError,
    PackingError,
    ScheduleError,
    SimulationError,
    SpectrumError,
    SpinschedError,
    ValidationError,
)
from .generate import (
    SCHEMES,
    canonical_chain,
    canonical_full,
    chain_order,
    generate,
    pulse_count_report,
    soft_pulse_total,
)
from .schedule import (
    PulseEvent,
    Schedule,
    SignMatrix,
    TimedLayout,
    VerifyReport,
    Violation,
    accumulated_counts,
    accumulated_times,
    antiphase_duration,
    load_schedule,
    pack_timed,
    sign_matrix,
    verify_schedule,
)
from .simulate import (
    ArtifactMetric,
    FinitePulseResult,
    GateReport,
    PulseShape,
    cnot_target,
    coherence_orders,
    compare_gate,
    finite_pulse_propagator,
    free_hamiltonian,
    ideal_propagator,
    multiple_quantum_amplitude,
    receiver_reference,
    simulate_gate,
    tsetse_metric,
)
from .spectrum import (
    AcquisitionParams,
    Spectrum,
    default_regions,
    half_integrals,
    multiplet_compare,
    parseval_energies,
    simulate_spectrum,
    spectrum_to_csv,
    spectrum_to_svg,
)
from .spin_model import (
    CouplingPolicy,
    GateSpec,
    SpinSystem,
    build_system,
    load_system,
    refocus_pairs,
    system_to_dict,
    validate_system,
)

__all__ = [name for name in dir() if not name.startswith("_")]
