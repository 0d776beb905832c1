"""Pulse segments, named gates and the equivalent-measurement algebra.

Sequence labels use product notation, e.g. ``"X1U(t)Z1"``: the string is
read as a matrix product, so the rightmost gate (``Z1``) is executed first.
Qubit numbers in labels are 1-based; every Python-level index is 0-based.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .device import (
    ConfigurationError,
    ControlSettings,
    DeviceParams,
    check_tau_ratio,
    hamiltonian,
    settings_for,
    tau_flux,
    timings,
)
from .qmath import (
    PauliString,
    conjugate_observable,
    embed,
    equal_up_to_phase,
    num_qubits,
    pauli_matrix,
    pauli_stack,
    pauli_words,
)

SQRT2 = math.sqrt(2.0)
EQUIVALENCE_TOL = 1e-10


@dataclass(frozen=True)
class PulseSegment:
    settings: ControlSettings
    duration: float

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError(f"segment duration must be >= 0, got {self.duration}")


@dataclass(frozen=True)
class PulseSequence:
    """Segments in execution order (first element acts first)."""

    segments: tuple[PulseSegment, ...] = ()
    label: str = ""

    @property
    def total_duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    def then(self, other: "PulseSequence") -> "PulseSequence":
        """``other`` executed after ``self``; the label follows product notation."""
        return PulseSequence(self.segments + other.segments, other.label + self.label)


class GateKind(str, Enum):
    X = "X"
    Z = "Z"
    Z3Q = "Z3Q"
    U_TAU = "U"


@dataclass(frozen=True)
class NamedGate:
    """``X_l``/``Z_l``: quarter turns ``exp(i pi sigma/4)``; ``Z3Q_l``: three quarter
    turns about z; ``U_TAU``: the entangling pulse on a qubit pair."""

    kind: GateKind
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        expected = 2 if self.kind is GateKind.U_TAU else 1
        if len(self.qubits) != expected:
            raise ValueError(f"{self.kind.value} gate takes {expected} qubit index(es), got {self.qubits}")
        if expected == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError("U(tau) needs two distinct qubits")

    def token(self, n_qubits: int) -> str:
        if self.kind is GateKind.U_TAU:
            a, b = sorted(self.qubits)
            if n_qubits == 2:
                return "U(t)"
            return f"U{a + 1}{b + 1}(t)"
        return f"{self.kind.value}{self.qubits[0] + 1}"


def X(l: int) -> NamedGate:
    return NamedGate(GateKind.X, (l,))


def Z(l: int) -> NamedGate:
    return NamedGate(GateKind.Z, (l,))


def Z3Q(l: int) -> NamedGate:
    return NamedGate(GateKind.Z3Q, (l,))


def U_tau(a: int = 0, b: int = 1) -> NamedGate:
    return NamedGate(GateKind.U_TAU, (a, b))


_TOKEN = re.compile(r"U(\d\d)?(?:\((?:t|τ|tau)\))?|Z3Q(\d)|([XZ])(\d)|I")


def parse_label(label: str) -> list[NamedGate]:
    """Parse product notation into gates in matrix order (leftmost first)."""
    gates = []
    pos = 0
    text = label.replace(" ", "")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ValueError(f"cannot parse gate label {label!r} at position {pos}")
        pos = m.end()
        if m.group(0) == "I":
            continue
        if m.group(0).startswith("U"):
            pair = m.group(1) or "12"
            gates.append(U_tau(int(pair[0]) - 1, int(pair[1]) - 1))
        elif m.group(2):
            gates.append(Z3Q(int(m.group(2)) - 1))
        else:
            gates.append(NamedGate(GateKind(m.group(3)), (int(m.group(4)) - 1,)))
    return gates


def format_label(gates: Sequence[NamedGate], n_qubits: int) -> str:
    return "".join(g.token(n_qubits) for g in gates)


def _check_index(p: DeviceParams, g: NamedGate) -> None:
    for q in g.qubits:
        if not 0 <= q < p.n_qubits:
            raise ConfigurationError(f"gate {g.token(max(p.n_qubits, 3))} addresses qubit {q + 1} "
                                     f"but the device has {p.n_qubits}")


def gate_schedule(p: DeviceParams, g: NamedGate) -> PulseSequence:
    """Single-segment realisation of a named gate on ``p``.

    Qubits not taking part sit at ``n_g = 1/2``, ``flux = 1/2`` where their
    Hamiltonian and all their couplings vanish.
    """
    _check_index(p, g)
    t = timings(p)
    n = p.n_qubits
    if g.kind is GateKind.X:
        seg = PulseSegment(settings_for(n, {g.qubits[0]: (0.5, 0.0)}), t.t_x)
    elif g.kind is GateKind.Z:
        seg = PulseSegment(settings_for(n, {g.qubits[0]: (0.0, 0.5)}), t.t_z_quarter)
    elif g.kind is GateKind.Z3Q:
        seg = PulseSegment(settings_for(n, {g.qubits[0]: (0.0, 0.5)}), 3.0 * t.t_z_quarter)
    else:
        check_tau_ratio(p)
        f = tau_flux(p)
        a, b = g.qubits
        seg = PulseSegment(settings_for(n, {a: (0.5, f), b: (0.5, f)}), t.tau)
    return PulseSequence((seg,), g.token(n))


def sequence(p: DeviceParams, gates: Sequence[NamedGate] | str) -> PulseSequence:
    """Pulse sequence for gates given in matrix order (or as a label string)."""
    if isinstance(gates, str):
        gates = parse_label(gates)
    segments: tuple[PulseSegment, ...] = ()
    for g in reversed(gates):
        segments += gate_schedule(p, g).segments
    return PulseSequence(segments, format_label(gates, p.n_qubits))


def evolve_segment(p: DeviceParams, seg: PulseSegment) -> np.ndarray:
    """``exp(-2 pi i H t)`` with H in GHz and t in ns."""
    return _evolve_cached(p, seg)


@lru_cache(maxsize=4096)
def _evolve_cached(p: DeviceParams, seg: PulseSegment) -> np.ndarray:
    dim = 2**p.n_qubits
    if seg.duration == 0.0:
        u = np.eye(dim, dtype=complex)
    else:
        h = hamiltonian(p, seg.settings)
        evals, evecs = np.linalg.eigh(h)
        u = (evecs * np.exp(-2j * math.pi * seg.duration * evals)) @ evecs.conj().T
    u.setflags(write=False)
    return u


@lru_cache(maxsize=65536)
def compose(p: DeviceParams, w: PulseSequence) -> np.ndarray:
    """Product of the segment unitaries, later segments to the left."""
    u = np.eye(2**p.n_qubits, dtype=complex)
    for seg in w.segments:
        u = evolve_segment(p, seg) @ u
    u.setflags(write=False)
    return u


_MAX_SEGMENT_PERIOD = 16


def _reversed_settings(s: ControlSettings) -> ControlSettings:
    return ControlSettings(tuple(1.0 - g for g in s.n_g), tuple(1.0 - f for f in s.flux))


def inverse_segments(p: DeviceParams, seg: PulseSegment) -> tuple[PulseSegment, ...]:
    """Segments undoing ``seg`` up to a global phase.

    Mapping ``n_g -> 1 - n_g`` and ``flux -> 1 - flux`` flips the sign of the
    charging and Josephson terms.  It cannot flip a Josephson energy at
    ``flux = 0`` (flux is periodic with period 1) nor the coupling, which is
    even in both fluxes.  Such segments are instead repeated ``k - 1`` times,
    where ``k`` is the smallest power with ``U**k`` proportional to I.
    """
    h = hamiltonian(p, seg.settings)
    flipped = _reversed_settings(seg.settings)
    if np.max(np.abs(hamiltonian(p, flipped) + h)) < 1e-12:
        return (PulseSegment(flipped, seg.duration),)
    u = evolve_segment(p, seg)
    power = u
    for k in range(2, _MAX_SEGMENT_PERIOD + 1):
        power = power @ u
        if equal_up_to_phase(power, np.eye(len(u)), 1e-10):
            return (PulseSegment(seg.settings, (k - 1) * seg.duration),)
    raise ValueError(f"segment with settings {seg.settings} has no inverse reachable by the controls")


def inverse_sequence(p: DeviceParams, w: PulseSequence) -> PulseSequence:
    """``W^-1`` up to global phase: segments time-reversed, each one inverted."""
    segments: tuple[PulseSegment, ...] = ()
    for seg in reversed(w.segments):
        segments += inverse_segments(p, seg)
    return PulseSequence(segments, f"({w.label or 'I'})^-1")


def u_closed_form(E_J: float, E_int: float, t: float) -> np.ndarray:
    """Five-term Pauli expansion of the two-qubit evolution at the degeneracy point.

    Evolution under ``-(E_J/2)(sx1 + sx2) - E_int sy1 sy2`` for ``t`` ns::

        U = (cos phi + cos theta)/2 I + i n_z sin(theta)/2 (sx1 + sx2)
            + i (sin phi - n_x sin theta)/2 sz1 sz2
            + i (sin phi + n_x sin theta)/2 sy1 sy2
            - (cos phi - cos theta)/2 sx1 sx2

    with ``phi = 2 pi E_int t``, ``theta = 2 pi t sqrt(E_int^2 + E_J^2)``,
    ``a = E_J/E_int``, ``n_z = a/sqrt(1+a^2)``, ``n_x = 1/sqrt(1+a^2)``.
    """
    if E_int == 0:
        raise ValueError("E_int = 0 leaves a = E_J/E_int undefined; evolve the qubits separately")
    a = E_J / E_int
    root = math.sqrt(1.0 + a * a)
    phi = 2.0 * math.pi * E_int * t
    theta = 2.0 * math.pi * E_int * t * root
    n_z = a / root
    n_x = 1.0 / root
    if E_int < 0:
        # root is taken positive; theta must carry the sign of the eigenvalue splitting
        theta, n_z, n_x = -theta, -n_z, -n_x
    P = pauli_matrix
    return (
        0.5 * (math.cos(phi) + math.cos(theta)) * P("00")
        + 0.5j * n_z * math.sin(theta) * (P("x0") + P("0x"))
        + 0.5j * (math.sin(phi) - n_x * math.sin(theta)) * P("zz")
        + 0.5j * (math.sin(phi) + n_x * math.sin(theta)) * P("yy")
        - 0.5 * (math.cos(phi) - math.cos(theta)) * P("xx")
    )


def u_tau_closed_form() -> np.ndarray:
    """The entangling gate at ``phi = pi/4``, ``theta = pi``."""
    P = pauli_matrix
    return ((1 - SQRT2) * P("00") - (1 + SQRT2) * P("xx") + 1j * P("yy") + 1j * P("zz")) / (2 * SQRT2)


def ideal_gate(g: NamedGate, n_qubits: int) -> np.ndarray:
    """Closed-form unitary of a named gate (no pulse physics)."""
    if g.kind is GateKind.U_TAU:
        a, b = g.qubits
        P = lambda la, lb: pauli_matrix(embed({a: la, b: lb}, n_qubits))  # noqa: E731
        return ((1 - SQRT2) * P("0", "0") - (1 + SQRT2) * P("x", "x")
                + 1j * P("y", "y") + 1j * P("z", "z")) / (2 * SQRT2)
    letter = "x" if g.kind is GateKind.X else "z"
    angle = 3 * math.pi / 4 if g.kind is GateKind.Z3Q else math.pi / 4
    sigma = pauli_matrix(embed({g.qubits[0]: letter}, n_qubits))
    return math.cos(angle) * np.eye(2**n_qubits) + 1j * math.sin(angle) * sigma


def observable_coefficients(o: np.ndarray, tol: float = 1e-12) -> list[PauliString]:
    """Expansion ``O = sum c_w P_w`` keeping terms with ``|c_w| > tol``."""
    n = num_qubits(o)
    raw = np.einsum("ij,wji->w", o, pauli_stack(n)) / 2**n
    imag = float(np.max(np.abs(raw.imag)))
    if imag > EQUIVALENCE_TOL:
        raise ValueError(f"observable has complex Pauli coefficients (max imaginary part {imag:.2e})")
    return [PauliString(w, float(c)) for w, c in zip(pauli_words(n), raw.real) if abs(c) > tol]


def equivalent_measurement(p: DeviceParams, w: PulseSequence, readout_qubit: int,
                           tol: float = 1e-12) -> list[PauliString]:
    """Pauli expansion of ``W^dagger sz_l W``, the observable that the readout of
    qubit ``l`` effectively measures when ``W`` runs first."""
    if not 0 <= readout_qubit < p.n_qubits:
        raise ValueError(f"readout qubit {readout_qubit} out of range for {p.n_qubits} qubits")
    sz = pauli_matrix(embed({readout_qubit: "z"}, p.n_qubits))
    return observable_coefficients(conjugate_observable(compose(p, w), sz), tol)


# Tables of equivalent two-qubit measurements, transcribed literally:
# target word, W in product notation, and -sqrt(2) W^dagger sz_l W.


@dataclass(frozen=True)
class TableRow:
    table: str
    index: int
    target: str
    label: str
    readout_qubit: int
    expected: tuple[tuple[str, float], ...]

    @property
    def expected_dict(self) -> dict[str, float]:
        return dict(self.expected)


def _rows(table: str, readout: int, rows: Iterable[tuple[str, str, dict[str, float]]]) -> tuple[TableRow, ...]:
    return tuple(TableRow(table, i + 1, t, w, readout, tuple(e.items())) for i, (t, w, e) in enumerate(rows))


TABLE_I = _rows("I", 0, [
    ("xy", "U(t)", {"z0": 1, "xy": 1}),
    ("xz", "X1U(t)", {"y0": -1, "xz": 1}),
    ("xx", "U(t)Z2", {"z0": 1, "xx": -1}),
    ("yy", "U(t)Z1", {"z0": 1, "yy": 1}),
    ("yz", "X1U(t)Z1", {"x0": 1, "yz": 1}),
    ("yx", "U(t)Z1Z2", {"z0": 1, "yx": -1}),
    ("zy", "U(t)Z1X1", {"y0": -1, "zy": 1}),
    ("zz", "X1U(t)Z1X1", {"x0": 1, "zz": 1}),
    ("zx", "U(t)Z1Z2X1", {"y0": -1, "zx": -1}),
])

TABLE_II = _rows("II", 1, [
    ("xx", "U(t)Z1", {"0z": 1, "xx": -1}),
    ("yx", "U(t)", {"0z": 1, "yx": 1}),
    ("zx", "U(t)X1", {"0y": -1, "zx": 1}),
    ("xy", "U(t)Z1Z2", {"0z": 1, "xy": -1}),
    ("yy", "U(t)Z2", {"0z": 1, "yy": 1}),
    ("zy", "U(t)X1Z2", {"0x": 1, "zy": 1}),
    ("xz", "U(t)Z1Z2X2", {"0y": -1, "xz": -1}),
    ("yz", "U(t)Z2X2", {"0y": -1, "yz": 1}),
    ("zz", "U(t)X1Z2X2", {"0x": 1, "zz": 1}),
])


@dataclass(frozen=True)
class RowResult:
    row: TableRow
    measured: dict[str, float]
    deviation: float
    reversed_deviation: float
    order: str | None
    target_deviation: float

    @property
    def passed(self) -> bool:
        return self.order is not None


@dataclass
class TableReport:
    rows: list[RowResult] = field(default_factory=list)
    tol: float = EQUIVALENCE_TOL

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def max_deviation(self) -> float:
        return max(min(r.deviation, r.reversed_deviation) for r in self.rows)

    @property
    def convention(self) -> str:
        """Product-order reading that reproduced every passing row."""
        orders = {r.order for r in self.rows if r.passed}
        if orders == {"matrix"} or orders == {"matrix", "either"} or orders == {"either"}:
            return "matrix"
        if orders == {"reversed"} or orders == {"reversed", "either"}:
            return "reversed"
        return "mixed" if orders else "none"

    def failures(self) -> list[RowResult]:
        return [r for r in self.rows if not r.passed]


def _scaled_equivalent(p: DeviceParams, gates: Sequence[NamedGate], readout: int) -> dict[str, float]:
    terms = equivalent_measurement(p, sequence(p, gates), readout)
    return {t.word: -SQRT2 * t.coefficient for t in terms}


def _deviation(measured: dict[str, float], expected: dict[str, float]) -> float:
    words = set(measured) | set(expected)
    return max(abs(measured.get(w, 0.0) - expected.get(w, 0.0)) for w in words)


def verify_tables(p: DeviceParams, tol: float = EQUIVALENCE_TOL) -> TableReport:
    """Check every tabulated row as an operator identity on the device pulses.

    Each row is tried with its label read as a matrix product; when that fails
    the reversed execution order is tried and recorded instead.  Rows that fail
    both ways are reported, never patched.
    """
    if p.n_qubits != 2:
        p = p.with_qubits(2)
    report = TableReport(tol=tol)
    for row in TABLE_I + TABLE_II:
        gates = parse_label(row.label)
        expected = row.expected_dict
        measured = _scaled_equivalent(p, gates, row.readout_qubit)
        dev = _deviation(measured, expected)
        rev_measured = _scaled_equivalent(p, list(reversed(gates)), row.readout_qubit)
        rev = _deviation(rev_measured, expected)
        if dev < tol and rev < tol:
            order = "either"
        elif dev < tol:
            order = "matrix"
        elif rev < tol:
            order = "reversed"
        else:
            order = None
        target_dev = abs(measured.get(row.target, 0.0) - expected[row.target])
        report.rows.append(RowResult(row, measured, dev, rev, order, target_dev))
    return report
