"""Single-qubit |1><1| readout: exact probabilities and seeded shot sampling.

Only one qubit is read out per setting; there is deliberately no joint
multi-qubit projector.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .control import PulseSequence, compose
from .device import DeviceParams
from .qmath import check_hermitian

CLAMP_TOL = 1e-10
_CHUNK = 1 << 20


class ProbabilityError(ArithmeticError):
    """A computed probability fell outside [0, 1] by more than round-off."""


@dataclass(frozen=True)
class MeasurementSetting:
    sequence: PulseSequence
    readout_qubit: int
    label: str = ""

    def __post_init__(self):
        if self.readout_qubit < 0:
            raise ValueError("readout_qubit must be >= 0")
        if not self.label:
            object.__setattr__(self, "label", f"{self.sequence.label or 'I'}|q{self.readout_qubit + 1}")


@dataclass(frozen=True)
class MeasurementRecord:
    setting: MeasurementSetting
    ideal_probability: float
    shots: int
    ones_count: int
    seed: int

    def __post_init__(self):
        if self.shots < 0 or not 0 <= self.ones_count <= self.shots:
            raise ValueError(f"inconsistent record: {self.ones_count} ones in {self.shots} shots")

    @property
    def frequency(self) -> float:
        """Empirical frequency, or the exact probability when no shots were taken."""
        if self.shots == 0:
            return self.ideal_probability
        return self.ones_count / self.shots


def projector_one(n: int, l: int) -> np.ndarray:
    """``I (x) ... (x) |1><1| (x) ... (x) I`` with the projector on qubit ``l`` (0-based)."""
    if not 0 <= l < n:
        raise IndexError(f"qubit {l} out of range for {n} qubits")
    diag = np.array([(i >> (n - 1 - l)) & 1 for i in range(2**n)], dtype=complex)
    return np.diag(diag)


def _clamp(value: float) -> float:
    if value < -CLAMP_TOL or value > 1 + CLAMP_TOL:
        raise ProbabilityError(f"probability {value!r} outside [0, 1] beyond round-off")
    return min(max(value, 0.0), 1.0)


def probability(p: DeviceParams, rho: np.ndarray, s: MeasurementSetting) -> float:
    """``Tr[W rho W^dagger (|1><1|)_l]`` for the setting's pulse sequence ``W``."""
    if not 0 <= s.readout_qubit < p.n_qubits:
        raise ValueError(f"readout qubit {s.readout_qubit} out of range for {p.n_qubits} qubits")
    check_hermitian(rho)
    w = compose(p, s.sequence)
    rotated = w @ rho @ w.conj().T
    n = p.n_qubits
    ones = [(i >> (n - 1 - s.readout_qubit)) & 1 for i in range(2**n)]
    value = float(np.sum(np.diag(rotated).real[np.array(ones, dtype=bool)]))
    return _clamp(value)


def with_readout_error(prob: float, flip_rate: float) -> float:
    """Outcome probability after a symmetric classical bit flip."""
    if not 0.0 <= flip_rate <= 1.0:
        raise ValueError(f"flip rate must be in [0, 1], got {flip_rate}")
    return prob * (1.0 - flip_rate) + (1.0 - prob) * flip_rate


def sample(prob: float, shots: int, seed: int) -> int:
    """Number of |1> outcomes in ``shots`` Bernoulli trials.

    Each trial compares one raw 64-bit word of a Philox stream (keyed by
    ``seed``) with ``floor(prob * 2**64)``, so the count is an integer-only
    function of ``(prob, shots, seed)`` and identical on every platform.
    """
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {prob}")
    if shots < 0:
        raise ValueError("shots must be >= 0")
    if prob == 0.0 or shots == 0:
        return 0
    if prob == 1.0:
        return shots
    # prob * 2**64 is exact in binary floating point
    threshold = np.uint64(int(prob * 2.0**64))
    gen = np.random.Philox(seed & 0xFFFF_FFFF_FFFF_FFFF)
    count = 0
    remaining = shots
    while remaining:
        n = min(remaining, _CHUNK)
        count += int(np.count_nonzero(gen.random_raw(n) < threshold))
        remaining -= n
    return count


def derive_seed(master_seed: int, label: str) -> int:
    """Per-setting 64-bit seed derived from the master seed and a setting label."""
    digest = hashlib.blake2b(f"{master_seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def measure(p: DeviceParams, rho: np.ndarray, s: MeasurementSetting, shots: int,
            seed: int, readout_error: float = 0.0) -> MeasurementRecord:
    """One setting on ``rho``.  The stored probability is that of recording a 1,
    so it already includes the classical readout flip rate."""
    prob = with_readout_error(probability(p, rho, s), readout_error)
    ones = sample(prob, shots, seed) if shots else 0
    return MeasurementRecord(s, prob, shots, ones, seed)
