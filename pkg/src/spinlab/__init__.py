"""Density-matrix simulation of logically labeled NMR quantum computation."""

from .core import (
    build_hamiltonian,
    deviation,
    effective_pure_state,
    evolve,
    pure_state,
    rotation_unitary,
    subspace_block,
    thermal_populations,
    thermal_state,
)
from .dsl import ParseError, format_program, parse_program
from .errors import (
    ConvergenceError,
    InputError,
    NumericalError,
    SingularSystemError,
    SpinlabError,
    SpinSystemError,
)
from .frame import Frame, frame_change, uncoupled_form, uncoupling_offsets
from .grover import GroverRun, grover_inversion_sequence, grover_oracle_sequence, grover_iteration, grover_run
from .pulses import ShapedPulse, calibrate_amplitude, integrate_pulses, pulse_propagator
from .readout import FID, Spectrum, measure_populations, simulate_fid, spectrum
from .sequences import (
    IDEAL,
    Acquire,
    Delay,
    ErrorModel,
    FrameShift,
    Pulse,
    PulseSequence,
    Rotation,
    cnot_sequence,
    labeling_capacity,
    labeling_sequence,
    load_error_model,
    pulse,
    run_sequence,
    sequence_unitary,
    uncouple,
)
from .system import SpinSystem, bromotrifluoroethylene, load_system, loads_system
from .tomography import Tomography, deviation_error_norm, full_tomography, tomography_of_state

__all__ = [
    "Acquire",
    "bromotrifluoroethylene",
    "build_hamiltonian",
    "calibrate_amplitude",
    "cnot_sequence",
    "ConvergenceError",
    "Delay",
    "deviation",
    "deviation_error_norm",
    "effective_pure_state",
    "ErrorModel",
    "evolve",
    "FID",
    "format_program",
    "Frame",
    "frame_change",
    "FrameShift",
    "full_tomography",
    "grover_inversion_sequence",
    "grover_iteration",
    "grover_oracle_sequence",
    "grover_run",
    "GroverRun",
    "IDEAL",
    "InputError",
    "integrate_pulses",
    "labeling_capacity",
    "labeling_sequence",
    "load_error_model",
    "load_system",
    "loads_system",
    "measure_populations",
    "NumericalError",
    "parse_program",
    "ParseError",
    "Pulse",
    "pulse",
    "pulse_propagator",
    "PulseSequence",
    "pure_state",
    "Rotation",
    "rotation_unitary",
    "run_sequence",
    "sequence_unitary",
    "ShapedPulse",
    "simulate_fid",
    "SingularSystemError",
    "Spectrum",
    "spectrum",
    "SpinlabError",
    "SpinSystem",
    "SpinSystemError",
    "subspace_block",
    "thermal_populations",
    "thermal_state",
    "Tomography",
    "tomography_of_state",
    "uncouple",
    "uncoupled_form",
    "uncoupling_offsets",
]

__version__ = "0.1.0"
