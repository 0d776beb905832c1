"""Measurement schedules, triangular linear inversion and physicality projection.

Every setting (pulse sequence ``W`` followed by the readout of qubit ``l``)
obeys ``p = 1/2 - 1/2 Tr(rho W^dagger sz_l W)``.  Expanding the equivalent
observable in Pauli words turns this into one linear relation
``p = 1/2 + sum_w a_w r_w`` with ``r_w = Tr(rho P_w)``.  Schedules are built
so that each relation introduces exactly one new coefficient, which makes
the inversion a forward substitution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import control
from .control import NamedGate, PulseSequence, U_tau, X, Z, Z3Q, parse_label
from .device import DeviceParams, reference_parameters
from .measurement import MeasurementRecord, MeasurementSetting, derive_seed, measure
from .qmath import PauliString, check_hermitian, num_qubits, pauli_assemble, pauli_words

# Relations whose coefficient on the new word is smaller than this are rejected
# as ill-conditioned.
MIN_TARGET_WEIGHT = 0.1
DEFAULT_BUDGET = 4


class ScheduleError(ValueError):
    """A schedule cannot be built or is inconsistent with the data given to it."""


@dataclass(frozen=True)
class Relation:
    """``p = 1/2 + sum(coefficients[w] * r_w)`` for the setting at ``setting_index``."""

    setting_index: int
    target: str
    coefficients: tuple[tuple[str, float], ...]

    @property
    def coefficient_dict(self) -> dict[str, float]:
        return dict(self.coefficients)

    @property
    def dependencies(self) -> list[str]:
        return [w for w, _ in self.coefficients if w != self.target]


@dataclass(frozen=True)
class TomographySchedule:
    device: DeviceParams
    settings: tuple[MeasurementSetting, ...]
    relations: tuple[Relation, ...]

    @property
    def n_qubits(self) -> int:
        return self.device.n_qubits

    @property
    def targets(self) -> list[str]:
        return [r.target for r in self.relations]

    def relation_matrix(self) -> np.ndarray:
        """Rows: relations; columns: every non-identity word in lexicographic order."""
        words = pauli_words(self.n_qubits)[1:]
        index = {w: i for i, w in enumerate(words)}
        m = np.zeros((len(self.relations), len(words)))
        for i, rel in enumerate(self.relations):
            for w, a in rel.coefficients:
                m[i, index[w]] = a
        return m

    def total_durations(self) -> dict[str, float]:
        return {s.label: s.sequence.total_duration for s in self.settings}


@dataclass(frozen=True)
class ScheduleFragment:
    setting: MeasurementSetting
    relation: Relation


@dataclass
class ReconstructionResult:
    raw_rho: np.ndarray
    physical_rho: np.ndarray
    coefficients: list[PauliString]
    stderr: dict[str, float] = field(default_factory=dict)
    min_eigenvalue: float = 0.0


def _default_device(device: DeviceParams | None, n: int) -> DeviceParams:
    if device is None:
        return reference_parameters(1, n)
    if device.n_qubits != n:
        return device.with_qubits(n)
    return device


def relation_for(device: DeviceParams, setting: MeasurementSetting, index: int, target: str,
                 known: Iterable[str], tol: float = 1e-12) -> Relation:
    """Derive the linear relation of ``setting`` and check it resolves ``target``."""
    terms = control.equivalent_measurement(device, setting.sequence, setting.readout_qubit, tol)
    coeffs = {t.word: -0.5 * t.coefficient for t in terms}
    if abs(coeffs.get(target, 0.0)) < MIN_TARGET_WEIGHT / 2:
        raise ScheduleError(f"setting {setting.label} does not measure {target}")
    missing = sorted(set(coeffs) - set(known) - {target})
    if missing:
        raise ScheduleError(f"setting {setting.label} for {target} needs unresolved words {missing}")
    return Relation(index, target, tuple(sorted(coeffs.items())))


def _single_qubit_settings(device: DeviceParams, qubit: int) -> list[tuple[str, list[NamedGate]]]:
    n = device.n_qubits
    letters = lambda c: "".join(c if i == qubit else "0" for i in range(n))  # noqa: E731
    return [
        (letters("z"), []),
        (letters("y"), [X(qubit)]),
        (letters("x"), [Z3Q(qubit), X(qubit), Z(qubit)]),
    ]


def _build(device: DeviceParams, plan: Sequence[tuple[str, Sequence[NamedGate] | str, int]]) -> TomographySchedule:
    settings, relations, known = [], [], set()
    for i, (target, gates, readout) in enumerate(plan):
        seq = control.sequence(device, gates)
        setting = MeasurementSetting(seq, readout)
        relations.append(relation_for(device, setting, i, target, known))
        settings.append(setting)
        known.add(target)
    return TomographySchedule(device, tuple(settings), tuple(relations))


def schedule_1q(device: DeviceParams | None = None) -> TomographySchedule:
    """Direct readout (z), X then readout (y), and the z-x-3z composite (x)."""
    device = _default_device(device, 1)
    return _build(device, [(t, g, 0) for t, g in _single_qubit_settings(device, 0)])


def schedule_2q(route: str = "auto", device: DeviceParams | None = None) -> TomographySchedule:
    """Fifteen settings: six single-qubit ones, then nine from the equivalence tables.

    ``route`` picks the readout qubit for the two-qubit coefficients:
    ``"qubit1"`` uses the first table, ``"qubit2"`` the second, and
    ``"auto"`` takes whichever row needs fewer gates (first table on ties).
    """
    device = _default_device(device, 2)
    control.check_tau_ratio(device)
    plan = []
    for q in (0, 1):
        plan += [(t, g, q) for t, g in _single_qubit_settings(device, q)]
    rows_1 = {r.target: r for r in control.TABLE_I}
    rows_2 = {r.target: r for r in control.TABLE_II}
    for target in rows_1:
        if route == "qubit1":
            row = rows_1[target]
        elif route == "qubit2":
            row = rows_2[target]
        elif route == "auto":
            a, b = rows_1[target], rows_2[target]
            row = b if len(parse_label(b.label)) < len(parse_label(a.label)) else a
        else:
            raise ValueError(f"unknown route {route!r}; expected qubit1, qubit2 or auto")
        plan.append((target, row.label, row.readout_qubit))
    return _build(device, plan)


def _alphabet(n: int) -> list[NamedGate]:
    gates = [X(l) for l in range(n)] + [Z(l) for l in range(n)]
    gates += [U_tau(a, b) for a, b in itertools.combinations(range(n), 2)]
    return gates


def candidate_sequences(n: int, budget: int = DEFAULT_BUDGET) -> Iterator[tuple[NamedGate, ...]]:
    """Gate words over {X_l, Z_l, U_lk} by length, then lexicographically."""
    alphabet = _alphabet(n)
    for length in range(budget + 1):
        yield from itertools.product(alphabet, repeat=length)


class _CandidateOracle:
    """Equivalent-measurement supports for candidate sequences, from cached gate unitaries."""

    def __init__(self, device: DeviceParams):
        self.device = device
        self.n = device.n_qubits
        self._gate_u = {g: control.compose(device, control.gate_schedule(device, g)) for g in _alphabet(self.n)}
        self._sz = [control.pauli_matrix(control.embed({l: "z"}, self.n)) for l in range(self.n)]

    def terms(self, gates: Sequence[NamedGate], readout: int) -> dict[str, float]:
        w = np.eye(2**self.n, dtype=complex)
        for g in gates:
            w = w @ self._gate_u[g]
        o = w.conj().T @ self._sz[readout] @ w
        return {t.word: t.coefficient for t in control.observable_coefficients(o, 1e-9)}


def _commutes_with_readout(g: NamedGate, readout: int) -> bool:
    if g.kind is control.GateKind.U_TAU:
        return readout not in g.qubits
    return g.qubits[0] != readout or g.kind is not control.GateKind.X


def _candidates(n: int, budget: int) -> Iterator[tuple[tuple[NamedGate, ...], int]]:
    for gates in candidate_sequences(n, budget):
        for readout in range(n):
            # a last-executed gate commuting with sz_l repeats a shorter candidate
            if gates and _commutes_with_readout(gates[0], readout):
                continue
            yield gates, readout


def schedule_nq(n: int, device: DeviceParams | None = None, budget: int = DEFAULT_BUDGET) -> TomographySchedule:
    """Greedy triangular schedule for ``n <= 4`` qubits.

    Candidates are scanned in the deterministic order of
    :func:`candidate_sequences`; a candidate is accepted when its equivalent
    observable involves exactly one coefficient not yet resolved.  Candidates
    with several unknowns are parked and retried whenever a new coefficient
    becomes available.
    """
    if not 1 <= n <= 4:
        raise ScheduleError(f"schedule_nq supports 1..4 qubits, got {n}")
    device = _default_device(device, n)
    if n > 1:
        control.check_tau_ratio(device)
    oracle = _CandidateOracle(device)
    needed = set(pauli_words(n)[1:])
    known: set[str] = set()
    chosen: list[tuple[str, tuple[NamedGate, ...], int]] = []
    parked: list[tuple[tuple[NamedGate, ...], int, dict[str, float]]] = []

    def accept(gates, readout, terms) -> bool:
        new = set(terms) - known
        if len(new) != 1:
            return False
        (target,) = new
        if abs(terms[target]) < MIN_TARGET_WEIGHT:
            return False
        chosen.append((target, gates, readout))
        known.add(target)
        return True

    for gates, readout in _candidates(n, budget):
        if known == needed:
            break
        terms = oracle.terms(gates, readout)
        if not set(terms) - known:
            continue
        if accept(gates, readout, terms):
            progress = True
            while progress:
                progress = False
                still = []
                for pg, pr, pt in parked:
                    if not set(pt) - known:
                        continue
                    if accept(pg, pr, pt):
                        progress = True
                    else:
                        still.append((pg, pr, pt))
                parked = still
        else:
            parked.append((gates, readout, terms))

    if known != needed:
        missing = sorted(needed - known)
        raise ScheduleError(
            f"gate budget {budget} exhausted at rank {len(known)} of {len(needed)}; "
            f"unresolved words: {missing}")
    return _build(device, [(t, list(g), r) for t, g, r in chosen])


THREE_QUBIT_RECIPES = {"xzy": ("U13(t)Z1U12(t)", 0)}


def schedule_3q_coefficient(target: str, resolved: Iterable[str] = (), device: DeviceParams | None = None,
                            budget: int = DEFAULT_BUDGET) -> ScheduleFragment:
    """One setting that resolves ``target`` given already ``resolved`` words.

    ``"xzy"`` uses the two-entangler recipe ``U13(t) Z1 U12(t)`` read on qubit 1,
    which also involves ``z00``, ``xy0`` and ``y0y``.  Other words are found by
    searching the candidate generator.
    """
    device = _default_device(device, 3)
    resolved = set(resolved)
    if target in THREE_QUBIT_RECIPES:
        label, readout = THREE_QUBIT_RECIPES[target]
        setting = MeasurementSetting(control.sequence(device, label), readout)
        terms = control.equivalent_measurement(device, setting.sequence, readout)
        missing = sorted({t.word for t in terms} - resolved - {target})
        if missing:
            raise ScheduleError(f"{target} via {label} needs prerequisite words {missing}")
        return ScheduleFragment(setting, relation_for(device, setting, 0, target, resolved))
    oracle = _CandidateOracle(device)
    for gates, readout in _candidates(3, budget):
        terms = oracle.terms(gates, readout)
        if abs(terms.get(target, 0.0)) < MIN_TARGET_WEIGHT or set(terms) - resolved - {target}:
            continue
        setting = MeasurementSetting(control.sequence(device, list(gates)), readout)
        return ScheduleFragment(setting, relation_for(device, setting, 0, target, resolved))
    raise ScheduleError(f"no sequence within {budget} gates resolves {target} from {sorted(resolved)}")


def schedule_for(n: int, device: DeviceParams | None = None, route: str = "auto") -> TomographySchedule:
    """The hand-built schedules for one and two qubits, the greedy one beyond."""
    if n == 1:
        return schedule_1q(device)
    if n == 2:
        return schedule_2q(route, device)
    return schedule_nq(n, device)


def simulate_records(schedule: TomographySchedule, rho: np.ndarray, shots: int = 0,
                     master_seed: int = 0, readout_error: float = 0.0) -> list[MeasurementRecord]:
    return [measure(schedule.device, rho, s, shots, derive_seed(master_seed, s.label), readout_error)
            for s in schedule.settings]


def _check_plan(schedule: TomographySchedule) -> None:
    seen: set[str] = set()
    for rel in schedule.relations:
        if abs(rel.coefficient_dict.get(rel.target, 0.0)) == 0.0:
            raise ScheduleError(f"relation for {rel.target} has zero weight on its target")
        missing = [w for w in rel.dependencies if w not in seen]
        if missing:
            raise ScheduleError(f"relation for {rel.target} depends on unresolved {missing}")
        seen.add(rel.target)


def solve(schedule: TomographySchedule, records: Sequence[MeasurementRecord],
          stderr: dict[str, float] | None = None) -> list[PauliString]:
    """Forward-substitute the relations; ``r`` of the identity word is fixed to 1.

    If ``stderr`` is given it is filled with binomial standard errors
    propagated through the substitution (zero for exact records).
    """
    if len(records) != len(schedule.settings):
        raise ScheduleError(f"expected {len(schedule.settings)} records, got {len(records)}")
    for setting, rec in zip(schedule.settings, records):
        if rec.setting.label != setting.label:
            raise ScheduleError(f"record {rec.setting.label!r} does not match setting {setting.label!r}")
    _check_plan(schedule)
    r: dict[str, float] = {}
    var: dict[str, float] = {}
    for rel in schedule.relations:
        rec = records[rel.setting_index]
        f = rec.frequency
        coeffs = rel.coefficient_dict
        a_t = coeffs[rel.target]
        rest = sum(a * r[w] for w, a in coeffs.items() if w != rel.target)
        r[rel.target] = (f - 0.5 - rest) / a_t
        v = f * (1 - f) / rec.shots if rec.shots else 0.0
        v += sum(a * a * var[w] for w, a in coeffs.items() if w != rel.target)
        var[rel.target] = v / (a_t * a_t)
    words = pauli_words(schedule.n_qubits)
    r[words[0]] = 1.0
    missing = [w for w in words if w not in r]
    if missing:
        raise ScheduleError(f"schedule leaves {len(missing)} words unresolved: {missing[:8]}")
    if stderr is not None:
        stderr.update({w: math.sqrt(var.get(w, 0.0)) for w in words})
    return [PauliString(w, r[w]) for w in words]


def assemble(coefficients: Iterable[PauliString]) -> np.ndarray:
    """``rho = sum(r_w P_w) / 2**n`` from a complete coefficient set."""
    coefficients = list(coefficients)
    if not coefficients:
        raise ValueError("empty coefficient set")
    n = len(coefficients[0].word)
    given = {c.word for c in coefficients}
    missing = sorted(set(pauli_words(n)) - given)
    if missing:
        raise ValueError(f"incomplete coefficient set, missing {missing[:8]}")
    if len(given) != len(coefficients):
        raise ValueError("duplicate words in coefficient set")
    return pauli_assemble(coefficients)


def project_simplex(values: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    v = np.asarray(values, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_physical(raw: np.ndarray) -> np.ndarray:
    """Nearest PSD, trace-one matrix sharing ``raw``'s eigenvectors.

    Eigenvalues are projected onto the probability simplex by sorted
    water-filling; this equals the Frobenius-nearest density matrix.
    """
    check_hermitian(raw)
    tr = np.trace(raw)
    if abs(tr - 1.0) > 1e-8:
        raise ValueError(f"trace must be 1 within 1e-8, got {tr}")
    h = (raw + raw.conj().T) / 2
    evals, evecs = np.linalg.eigh(h)
    if evals[0] >= 0.0 and abs(evals.sum() - 1.0) < 1e-15:
        return h
    lam = project_simplex(evals)
    out = (evecs * lam) @ evecs.conj().T
    return (out + out.conj().T) / 2


def reconstruct(schedule: TomographySchedule, records: Sequence[MeasurementRecord],
                project: bool = True) -> ReconstructionResult:
    errors: dict[str, float] = {}
    coeffs = solve(schedule, records, errors)
    raw = assemble(coeffs)
    min_eig = float(np.linalg.eigvalsh(raw)[0])
    physical = project_physical(raw) if project else raw
    return ReconstructionResult(raw, physical, coeffs, errors, min_eig)


def state_tomography(rho: np.ndarray, device: DeviceParams | None = None, shots: int = 0,
                     master_seed: int = 0, route: str = "auto", project: bool = True,
                     readout_error: float = 0.0) -> tuple[ReconstructionResult, list[MeasurementRecord]]:
    """Simulate the full schedule on ``rho`` and reconstruct it."""
    check_hermitian(rho)
    n = num_qubits(rho)
    schedule = schedule_for(n, _default_device(device, n), route)
    records = simulate_records(schedule, rho, shots, master_seed, readout_error)
    return reconstruct(schedule, records, project), records
