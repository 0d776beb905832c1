"""Dense complex linear algebra and Pauli-basis bookkeeping for 1-4 qubits.

Matrices are plain ``numpy`` complex arrays of shape ``(2**n, 2**n)``.
Pauli words are strings over ``"0xyz"`` with the first character acting on
qubit 1 (the most significant tensor factor), so ``"x0"`` is
``sigma_x (x) I``.  The computational basis follows ``|0> = |up>``, i.e.
``sigma_z |0> = +|0>``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

HERMITIAN_TOL = 1e-9
MAX_QUBITS = 4

PAULI_LETTERS = "0xyz"

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_SINGLE = {"0": SIGMA_0, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}
for _m in _SINGLE.values():
    _m.setflags(write=False)


class NotHermitianError(ValueError):
    """Raised when a matrix that must be Hermitian is not, beyond tolerance."""


@dataclass(frozen=True)
class PauliString:
    """One Pauli word together with its real coefficient."""

    word: str
    coefficient: float

    def __post_init__(self):
        if not self.word or set(self.word) - set(PAULI_LETTERS):
            raise ValueError(f"invalid Pauli word {self.word!r}")

    @property
    def weight(self) -> int:
        return sum(c != "0" for c in self.word)


def num_qubits(m: np.ndarray) -> int:
    dim = m.shape[0]
    if m.ndim != 2 or m.shape[1] != dim or dim < 2 or dim & (dim - 1):
        raise ValueError(f"expected a square 2^n matrix, got shape {m.shape}")
    return dim.bit_length() - 1


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def pauli_words(n: int) -> list[str]:
    """All ``4**n`` words in lexicographic (0, x, y, z) order."""
    return ["".join(w) for w in itertools.product(PAULI_LETTERS, repeat=n)]


@lru_cache(maxsize=None)
def _pauli_matrix_cached(word: str) -> np.ndarray:
    m = reduce(np.kron, (_SINGLE[c] for c in word))
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


def pauli_matrix(word: str) -> np.ndarray:
    """Tensor product of the single-qubit matrices named by ``word``."""
    if not word:
        raise ValueError("Pauli word must be nonempty")
    if set(word) - set(PAULI_LETTERS):
        raise ValueError(f"invalid Pauli word {word!r}")
    return _pauli_matrix_cached(word)


@lru_cache(maxsize=None)
def pauli_stack(n: int) -> np.ndarray:
    """All Pauli matrices for ``n`` qubits stacked as ``(4**n, 2**n, 2**n)``."""
    stack = np.stack([pauli_matrix(w) for w in pauli_words(n)])
    stack.setflags(write=False)
    return stack


def embed(word_for_qubits: Mapping[int, str], n: int) -> str:
    """Build an ``n``-letter word with the given letters at 0-based positions."""
    letters = ["0"] * n
    for q, c in word_for_qubits.items():
        letters[q] = c
    return "".join(letters)


def hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    defect = hermitian_defect(m)
    if defect > tol:
        raise NotHermitianError(f"matrix is not Hermitian: max |m - m^dagger| = {defect:.3e} > {tol:g}")


def pauli_decompose(m: np.ndarray) -> list[PauliString]:
    """Coefficients ``r_w = Tr(m P_w)`` for every word, lexicographic order.

    ``m == sum(r_w P_w) / 2**n`` for Hermitian ``m``.
    """
    n = num_qubits(m)
    check_hermitian(m)
    # Tr(m P) = sum_ij m_ij P_ji
    coeffs = np.einsum("ij,wji->w", m, pauli_stack(n)).real
    return [PauliString(w, float(c)) for w, c in zip(pauli_words(n), coeffs)]


def pauli_assemble(coefficients: Iterable[PauliString] | Mapping[str, float]) -> np.ndarray:
    """Inverse of :func:`pauli_decompose`: ``sum(r_w P_w) / 2**n``.

    Missing words are treated as zero; use the tomography ``assemble`` when a
    complete set is required.
    """
    items = coefficients.items() if isinstance(coefficients, Mapping) else (
        (p.word, p.coefficient) for p in coefficients)
    items = list(items)
    if not items:
        raise ValueError("no coefficients given")
    n = len(items[0][0])
    out = np.zeros((2**n, 2**n), dtype=complex)
    for word, c in items:
        if len(word) != n:
            raise ValueError(f"word {word!r} does not have {n} letters")
        out += c * pauli_matrix(word)
    return out / 2**n


def as_dict(coefficients: Iterable[PauliString], tol: float = 0.0) -> dict[str, float]:
    return {p.word: p.coefficient for p in coefficients if abs(p.coefficient) > tol}


def expm_hermitian(h: np.ndarray, angle_scale: float) -> np.ndarray:
    """``exp(-i * angle_scale * h)`` via the eigendecomposition of ``h``."""
    check_hermitian(h)
    h = (h + h.conj().T) / 2
    evals, evecs = np.linalg.eigh(h)
    phases = np.exp(-1j * angle_scale * evals)
    return (evecs * phases) @ evecs.conj().T


def conjugate_observable(w: np.ndarray, o: np.ndarray) -> np.ndarray:
    """Return ``W^dagger O W``, the observable seen through the unitary ``W``."""
    if w.shape != o.shape:
        raise ValueError(f"dimension mismatch: W {w.shape} vs O {o.shape}")
    defect = np.max(np.abs(w.conj().T @ w - np.eye(w.shape[0])))
    if defect > 1e-10:
        raise ValueError(f"W is not unitary (max |W^dagger W - I| = {defect:.3e})")
    return w.conj().T @ o @ w


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2))))


def phase_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|Tr(A^dagger B)| / dim``; equals 1 iff unitaries agree up to global phase."""
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    return abs(1.0 - phase_fidelity(a, b)) < tol


def phase_aligned_deviation(a: np.ndarray, b: np.ndarray) -> float:
    """Max entrywise ``|a - e^{i phi} b|`` with the phase chosen from ``Tr(a^dagger b)``."""
    overlap = np.trace(a.conj().T @ b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(a * phase - b)))


def ket(bits: str) -> np.ndarray:
    """Computational basis ket from a bit string such as ``"01"``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(vec: Sequence[complex]) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_density_matrix(n_qubits: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random physical state from a complex Ginibre matrix of the given rank."""
    dim = 2**n_qubits
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2
