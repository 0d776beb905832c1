"""Named density matrices used by the CLI and the tests."""

from __future__ import annotations

import math

import numpy as np

from .qmath import ket, projector, random_density_matrix

SQRT3 = math.sqrt(3.0)


def bloch_example_state() -> np.ndarray:
    """Single-qubit example: equal populations, ``rho_01 = (1 - i sqrt3)/4``.

    Its Bloch vector is ``(1/2, sqrt3/2, 0)``.
    """
    return np.array([[0.5, (1 - 1j * SQRT3) / 4], [(1 + 1j * SQRT3) / 4, 0.5]], dtype=complex)


def rho_prime() -> np.ndarray:
    """Two-qubit example matrix with coherence ``(1 - i sqrt3)/2`` between |00> and |11>.

    Not positive: its eigenvalues are 3/2, 0, 0, -1/2.
    """
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = 0.5
    m[0, 3] = (1 - 1j * SQRT3) / 2
    m[3, 0] = (1 + 1j * SQRT3) / 2
    return m


def named_state(name: str, n_qubits: int = 1, seed: int = 0) -> np.ndarray:
    s = 1 / math.sqrt(2)
    if name == "maximally_mixed":
        return np.eye(2**n_qubits, dtype=complex) / 2**n_qubits
    if name == "random":
        return random_density_matrix(n_qubits, np.random.default_rng(seed))
    if name == "random_pure":
        return random_density_matrix(n_qubits, np.random.default_rng(seed), rank=1)
    if name == "ground":
        return projector(ket("0" * n_qubits))
    if name == "excited":
        return projector(ket("1" * n_qubits))
    single = {
        "bloch_example": bloch_example_state,
        "plus": lambda: projector([s, s]),
        "plus_i": lambda: projector([s, 1j * s]),
    }
    if name in single:
        if n_qubits != 1:
            raise ValueError(f"preset {name!r} is a single-qubit state")
        return single[name]()
    if name == "bell":
        if n_qubits != 2:
            raise ValueError("preset 'bell' is a two-qubit state")
        return projector((ket("00") + ket("11")) * s)
    if name == "ghz":
        return projector((ket("0" * n_qubits) + ket("1" * n_qubits)) * s)
    raise ValueError(f"unknown state preset {name!r}")


STATE_PRESETS = ("maximally_mixed", "random", "random_pure", "ground", "excited",
                 "bloch_example", "plus", "plus_i", "bell", "ghz")
