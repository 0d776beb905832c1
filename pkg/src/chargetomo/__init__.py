"""State and process tomography for inductively coupled Josephson charge qubits."""

from .device import DeviceParams, ControlSettings, reference_parameters, hamiltonian, timings
from .control import NamedGate, PulseSequence, X, Z, Z3Q, U_tau, sequence, compose, verify_tables
from .measurement import MeasurementSetting, MeasurementRecord, probability, measure
from .tomography import (TomographySchedule, schedule_1q, schedule_2q, schedule_nq, schedule_for,
                         reconstruct, state_tomography, project_physical)
from .process import Channel, ChiMatrix, standard_channel, process_tomography, run_process_tomography

__version__ = "0.1.0"

__all__ = [
    "DeviceParams", "ControlSettings", "reference_parameters", "hamiltonian", "timings",
    "NamedGate", "PulseSequence", "X", "Z", "Z3Q", "U_tau", "sequence", "compose", "verify_tables",
    "MeasurementSetting", "MeasurementRecord", "probability", "measure",
    "TomographySchedule", "schedule_1q", "schedule_2q", "schedule_nq", "schedule_for",
    "reconstruct", "state_tomography", "project_physical",
    "Channel", "ChiMatrix", "standard_channel", "process_tomography", "run_process_tomography",
]
