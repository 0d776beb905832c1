"""Single-qubit quantum channels and chi-matrix process tomography."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .device import DeviceParams
from .measurement import MeasurementRecord, derive_seed
from .qmath import SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z, projector
from .tomography import ReconstructionResult, reconstruct, schedule_1q, simulate_records

TP_TOL = 1e-10
CHI_BASIS = (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z)
CHI_BASIS_LABEL = "I,X,Y,Z"


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class Channel:
    kraus_ops: tuple[np.ndarray, ...]
    label: str = "channel"

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ChannelError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise ChannelError(f"Kraus operators must all be {dim}x{dim}, got {k.shape}")
        residual = self.tp_residual_of(ops)
        if residual > TP_TOL:
            raise ChannelError(
                f"channel {self.label!r} is not trace preserving: max |sum K^dagger K - I| = {residual:.3e}")
        object.__setattr__(self, "kraus_ops", ops)

    @staticmethod
    def tp_residual_of(ops: Sequence[np.ndarray]) -> float:
        total = sum(k.conj().T @ k for k in ops)
        return float(np.max(np.abs(total - np.eye(ops[0].shape[0]))))

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]


def apply_channel(c: Channel, rho: np.ndarray) -> np.ndarray:
    if rho.shape != (c.dim, c.dim):
        raise ValueError(f"state of shape {rho.shape} does not fit a {c.dim}-dimensional channel")
    return sum(k @ rho @ k.conj().T for k in c.kraus_ops)


def _check_param(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


def standard_channel(kind: str, param: float = 0.0) -> Channel:
    """``identity``, ``bit_flip(p)``, ``dephasing(p)`` or ``amplitude_damping(gamma)``.

    ``dephasing(p)`` applies ``sigma_z`` with probability ``p/2`` so that
    ``p = 1`` removes every coherence.
    """
    if kind == "identity":
        return Channel((SIGMA_0,), "identity")
    _check_param(kind, param)
    if kind == "bit_flip":
        ops = (math.sqrt(1 - param) * SIGMA_0, math.sqrt(param) * SIGMA_X)
    elif kind == "dephasing":
        ops = (math.sqrt(1 - param / 2) * SIGMA_0, math.sqrt(param / 2) * SIGMA_Z)
    elif kind == "amplitude_damping":
        ops = (np.array([[1, 0], [0, math.sqrt(1 - param)]], dtype=complex),
               np.array([[0, math.sqrt(param)], [0, 0]], dtype=complex))
    else:
        raise ValueError(f"unknown channel kind {kind!r}")
    return Channel(ops, f"{kind}({param:g})")


def input_states() -> list[np.ndarray]:
    """|0>, |1>, (|0>+|1>)/sqrt2 and (|0>+i|1>)/sqrt2 as density matrices."""
    s = 1 / math.sqrt(2)
    return [projector([1, 0]), projector([0, 1]), projector([s, s]), projector([s, 1j * s])]


@dataclass(frozen=True)
class ChiMatrix:
    """``E(rho) = sum_mn chi[m, n] sigma_m rho sigma_n`` over (I, X, Y, Z)."""

    entries: np.ndarray
    basis_label: str = CHI_BASIS_LABEL

    @property
    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    @property
    def min_eigenvalue(self) -> float:
        h = (self.entries + self.entries.conj().T) / 2
        return float(np.linalg.eigvalsh(h)[0])

    def tp_residual(self) -> float:
        """``max |sum chi_mn sigma_n sigma_m - I|``; zero for trace-preserving maps."""
        total = sum(self.entries[m, n] * CHI_BASIS[n] @ CHI_BASIS[m] for m in range(4) for n in range(4))
        return float(np.max(np.abs(total - SIGMA_0)))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(self.entries[m, n] * CHI_BASIS[m] @ rho @ CHI_BASIS[n] for m in range(4) for n in range(4))


def _chi_design(inputs: Sequence[np.ndarray]) -> np.ndarray:
    """Matrix taking vec(chi) to the stacked, flattened outputs for the given inputs."""
    cols = []
    for m in range(4):
        for n in range(4):
            cols.append(np.concatenate([(CHI_BASIS[m] @ rho @ CHI_BASIS[n]).ravel() for rho in inputs]))
    return np.array(cols).T


def chi_from_outputs(inputs: Sequence[np.ndarray], outputs: Sequence[np.ndarray]) -> ChiMatrix:
    """Linear inversion of ``outputs[j] = E(inputs[j])`` into the chi matrix."""
    a = _chi_design(inputs)
    b = np.concatenate([np.asarray(o, dtype=complex).ravel() for o in outputs])
    chi = np.linalg.solve(a, b).reshape(4, 4)
    return ChiMatrix(chi)


@dataclass
class ProcessTomographyResult:
    chi: ChiMatrix
    inputs: list[np.ndarray]
    reconstructions: list[ReconstructionResult]
    records: list[list[MeasurementRecord]] = field(default_factory=list)


def run_process_tomography(c: Channel, shots: int = 0, seed: int = 0, project: bool = False,
                           device: DeviceParams | None = None) -> ProcessTomographyResult:
    """Prepare the four inputs, pass them through ``c`` and reconstruct each output
    with single-qubit state tomography, then invert for chi.

    ``shots = 0`` uses exact probabilities.  Physicality projection of the
    intermediate states is off by default because it biases chi near the
    boundary of completely positive maps.
    """
    if c.dim != 2:
        raise ChannelError(f"process tomography is limited to single-qubit channels, got dimension {c.dim}")
    schedule = schedule_1q(device)
    inputs = input_states()
    recons, all_records = [], []
    for j, rho_in in enumerate(inputs):
        rho_out = apply_channel(c, rho_in)
        records = simulate_records(schedule, rho_out, shots, derive_seed(seed, f"input{j}"))
        result = reconstruct(schedule, records, project=project)
        recons.append(result)
        all_records.append(records)
    outputs = [r.physical_rho if project else r.raw_rho for r in recons]
    return ProcessTomographyResult(chi_from_outputs(inputs, outputs), inputs, recons, all_records)


def process_tomography(c: Channel, shots: int = 0, seed: int = 0, project: bool = False,
                       device: DeviceParams | None = None) -> ChiMatrix:
    return run_process_tomography(c, shots, seed, project, device).chi
