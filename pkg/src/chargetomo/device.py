"""Charge-qubit parameters, Hamiltonians and pulse timings.

Units: every energy is stored as a frequency ``E/h`` in GHz and every time
in ns, so a term ``E * sigma`` held for ``t`` ns contributes the phase
``2*pi*E*t``.

Flux is the dimensionless ratio ``Phi_x / Phi_0``.  A qubit is switched off
(zero Josephson energy, zero coupling) at ``flux = 0.5``, which is what the
literature sometimes writes loosely as ``Phi_x = pi/2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .qmath import MAX_QUBITS, embed, pauli_matrix

SQRT15 = math.sqrt(15.0)

# Energy-to-frequency conversions, 5 significant digits.
GHZ_PER_KELVIN = 20.837
GHZ_PER_MICRO_EV = 0.24180


class ConfigurationError(ValueError):
    """Device or gate configuration cannot realise the requested operation."""


class Coupling(str, Enum):
    INDUCTOR_YY = "inductor_yy"
    CHI_XX = "chi_xx"


class EnergyUnit(str, Enum):
    K = "K"
    UEV = "ueV"
    GHZ = "GHz"


def convert_energy(value: float, unit: str | EnergyUnit) -> float:
    """Convert an energy quoted in kelvin, micro-eV or GHz to GHz."""
    if not math.isfinite(value):
        raise ValueError(f"energy must be finite, got {value}")
    unit = EnergyUnit(unit)
    if unit is EnergyUnit.K:
        return value * GHZ_PER_KELVIN
    if unit is EnergyUnit.UEV:
        return value * GHZ_PER_MICRO_EV
    return float(value)


@dataclass(frozen=True)
class DeviceParams:
    """A chain of nominally identical dc-SQUID charge qubits.

    ``E_L`` defaults to ``sqrt(15) * tau_energy``, the inductive energy that
    makes the entangling pulse land exactly on the target two-qubit gate.
    ``tau_energy`` is the Josephson energy held during that pulse; it
    defaults to ``E_J0`` (reached at ``flux = 1/3``).  Setting it to
    ``2 * E_J0`` runs the pulse at ``flux = 0`` instead and halves ``tau``.
    """

    n_qubits: int
    E_C: float
    E_J0: float
    E_L: float | None = None
    coupling: Coupling = Coupling.INDUCTOR_YY
    tau_energy: float | None = None
    E_J0_per_qubit: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        if self.tau_energy is None:
            object.__setattr__(self, "tau_energy", float(self.E_J0))
        if self.E_L is None:
            object.__setattr__(self, "E_L", SQRT15 * self.tau_energy)
        if self.E_J0_per_qubit is not None:
            overrides = tuple(float(e) for e in self.E_J0_per_qubit)
            if len(overrides) != self.n_qubits:
                raise ConfigurationError("E_J0_per_qubit must have one entry per qubit")
            object.__setattr__(self, "E_J0_per_qubit", overrides)
        energies = {"E_C": self.E_C, "E_J0": self.E_J0, "E_L": self.E_L, "tau_energy": self.tau_energy}
        energies.update({f"E_J0[{i}]": e for i, e in enumerate(self.E_J0_per_qubit or ())})
        for name, value in energies.items():
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be a positive energy, got {value}")
        if self.E_C <= self.E_J0:
            warnings.warn(
                f"E_C = {self.E_C:g} GHz does not exceed E_J0 = {self.E_J0:g} GHz; "
                "the two-level charge picture assumes E_C >> E_J",
                stacklevel=3,
            )

    def qubit_E_J0(self, qubit: int) -> float:
        if self.E_J0_per_qubit is None:
            return self.E_J0
        return self.E_J0_per_qubit[qubit]

    def with_qubits(self, n_qubits: int) -> "DeviceParams":
        return DeviceParams(n_qubits, self.E_C, self.E_J0, self.E_L, self.coupling, self.tau_energy)

    @classmethod
    def from_units(cls, n_qubits: int, E_C: tuple[float, str], E_J0: tuple[float, str], **kwargs) -> "DeviceParams":
        """Build from ``(value, unit)`` pairs, e.g. ``E_J0=(100e-3, "K")``."""
        converted = {k: convert_energy(*v) if isinstance(v, tuple) else v for k, v in kwargs.items()}
        return cls(n_qubits, convert_energy(*E_C), convert_energy(*E_J0), **converted)


def reference_parameters(which: int = 1, n_qubits: int = 1, **kwargs) -> DeviceParams:
    """The three reference charge-qubit parameter sets.

    1. ``E_J0 = 100 mK``, ``E_C = 1 K``
    2. ``2 E_J0 = 45 ueV``, ``4 E_C = 580 ueV``
    3. ``2 E_J0 / h = 13.0 GHz``, ``4 E_C / h = 149.1 GHz``
    """
    if which == 1:
        return DeviceParams.from_units(n_qubits, E_C=(1.0, "K"), E_J0=(0.1, "K"), **kwargs)
    if which == 2:
        return DeviceParams.from_units(n_qubits, E_C=(580 / 4, "ueV"), E_J0=(45 / 2, "ueV"), **kwargs)
    if which == 3:
        return DeviceParams.from_units(n_qubits, E_C=(149.1 / 4, "GHz"), E_J0=(13.0 / 2, "GHz"), **kwargs)
    raise ValueError(f"unknown parameter set {which}; expected 1, 2 or 3")


@dataclass(frozen=True)
class ControlSettings:
    """Gate charge and flux bias of every qubit during one pulse segment."""

    n_g: tuple[float, ...]
    flux: tuple[float, ...]

    def __post_init__(self):
        n_g = tuple(float(x) for x in self.n_g)
        flux = tuple(float(x) % 1.0 for x in self.flux)
        if len(n_g) != len(flux):
            raise ValueError(f"n_g has {len(n_g)} entries but flux has {len(flux)}")
        object.__setattr__(self, "n_g", n_g)
        object.__setattr__(self, "flux", flux)

    @property
    def n_qubits(self) -> int:
        return len(self.n_g)

    @classmethod
    def idle(cls, n_qubits: int) -> "ControlSettings":
        """Every qubit at the degeneracy point with its SQUID switched off: H = 0."""
        return cls((0.5,) * n_qubits, (0.5,) * n_qubits)

    def replace(self, qubit: int, n_g: float | None = None, flux: float | None = None) -> "ControlSettings":
        ng = list(self.n_g)
        fl = list(self.flux)
        if n_g is not None:
            ng[qubit] = n_g
        if flux is not None:
            fl[qubit] = flux
        return ControlSettings(tuple(ng), tuple(fl))


@dataclass(frozen=True)
class Timings:
    """Pulse durations in ns."""

    t_x: float
    t_z_quarter: float
    t_y_total: float
    tau: float
    tau_alternative: float = field(default=float("nan"))


def charge_energy(p: DeviceParams, n_g: float) -> float:
    return 4.0 * p.E_C * (1.0 - 2.0 * n_g)


def josephson_energy(p: DeviceParams, flux: float, qubit: int | None = None) -> float:
    e_j0 = p.E_J0 if qubit is None else p.qubit_E_J0(qubit)
    # cos(pi/2) is 6e-17 in floating point; pin the switched-off point to zero
    if math.isclose(flux % 1.0, 0.5, abs_tol=1e-15):
        return 0.0
    return 2.0 * e_j0 * math.cos(math.pi * flux)


def interaction_energy(p: DeviceParams, flux1: float, flux2: float,
                       qubits: tuple[int, int] | None = None) -> float:
    q1, q2 = qubits if qubits is not None else (None, None)
    return josephson_energy(p, flux1, q1) * josephson_energy(p, flux2, q2) / p.E_L


def hamiltonian(p: DeviceParams, s: ControlSettings) -> np.ndarray:
    """Instantaneous Hamiltonian (GHz) for the given control settings.

    ``inductor_yy``::

        H = -1/2 sum_l [dE_ch(n_g_l) sz_l + E_J(flux_l) sx_l] - sum_{l<k} E_int sy_l sy_k

    ``chi_xx`` replaces the coupling with ``+chi sx_l sx_k``, ``chi = E_int``.
    """
    n = p.n_qubits
    if s.n_qubits != n:
        raise ValueError(f"settings describe {s.n_qubits} qubits but the device has {n}")
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for l in range(n):
        h -= 0.5 * charge_energy(p, s.n_g[l]) * pauli_matrix(embed({l: "z"}, n))
        h -= 0.5 * josephson_energy(p, s.flux[l], l) * pauli_matrix(embed({l: "x"}, n))
    for l in range(n):
        for k in range(l + 1, n):
            e_int = interaction_energy(p, s.flux[l], s.flux[k], (l, k))
            if e_int == 0.0:
                continue
            if p.coupling is Coupling.INDUCTOR_YY:
                h -= e_int * pauli_matrix(embed({l: "y", k: "y"}, n))
            else:
                h += e_int * pauli_matrix(embed({l: "x", k: "x"}, n))
    return h


def tau_flux(p: DeviceParams) -> float:
    """Flux bias at which each SQUID's Josephson energy equals ``tau_energy``."""
    ratio = p.tau_energy / (2.0 * p.E_J0)
    if ratio > 1.0:
        raise ConfigurationError(
            f"tau_energy = {p.tau_energy:g} GHz exceeds the maximum Josephson energy 2*E_J0 = {2 * p.E_J0:g} GHz")
    return math.acos(ratio) / math.pi


def timings(p: DeviceParams) -> Timings:
    """Durations of the elementary pulses.

    ``t_x``: quarter-turn about x at the degeneracy point with ``flux = 0``.
    ``t_z_quarter``: quarter-turn about z at ``n_g = 0`` with the SQUID off.
    ``t_y_total``: the z, x, 3z composite that turns about y.
    ``tau``: entangling pulse at Josephson energy ``tau_energy``;
    ``tau_alternative`` is the same pulse evaluated at ``E_J(0) = 2 E_J0``.
    """
    t_x = 1.0 / (8.0 * p.E_J0)
    t_z = 1.0 / (16.0 * p.E_C)
    return Timings(
        t_x=t_x,
        t_z_quarter=t_z,
        t_y_total=t_z + t_x + 3.0 * t_z,
        tau=SQRT15 / (8.0 * p.tau_energy),
        tau_alternative=SQRT15 / (8.0 * 2.0 * p.E_J0),
    )


def check_tau_ratio(p: DeviceParams, rtol: float = 1e-6) -> None:
    """Raise unless ``E_L / E_J = sqrt(15)`` holds for the entangling pulse."""
    if p.coupling is not Coupling.INDUCTOR_YY:
        raise ConfigurationError("the U(tau) gate needs the inductor_yy coupling")
    ratio = p.E_L / p.tau_energy
    if abs(ratio - SQRT15) > rtol * SQRT15:
        raise ConfigurationError(
            f"U(tau) requires E_L/E_J = sqrt(15) ~ {SQRT15:.6f}; configured ratio is {ratio:.6f}")


def settings_for(n_qubits: int, active: dict[int, tuple[float, float]]) -> ControlSettings:
    """Idle settings except for the qubits listed as ``{qubit: (n_g, flux)}``."""
    s = ControlSettings.idle(n_qubits)
    for q, (ng, fl) in active.items():
        s = s.replace(q, n_g=ng, flux=fl)
    return s

