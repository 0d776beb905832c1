import math
import warnings

import numpy as np
import pytest

from chargetomo import device
from chargetomo.device import (ConfigurationError, ControlSettings, DeviceParams, convert_energy, hamiltonian,
                               reference_parameters, timings)
from chargetomo.qmath import pauli_matrix

# Frozen from hand evaluation of the closed-form durations (ns) with 1 K = 20.837 GHz.
SET1_T_X = 0.059989441858232954
SET1_T_Y = 0.071987330229879548
SET1_TAU = 0.23233810926521437


class TestUnits:
    def test_kelvin(self):
        assert convert_energy(1.0, "K") == pytest.approx(20.837)

    def test_micro_ev(self):
        assert convert_energy(100.0, "ueV") == pytest.approx(24.18)

    def test_unknown_unit(self):
        with pytest.raises(ValueError):
            convert_energy(1.0, "meV")


class TestDeviceParams:
    def test_defaults(self):
        p = reference_parameters(1, 2)
        assert p.tau_energy == p.E_J0
        assert p.E_L == pytest.approx(math.sqrt(15) * p.E_J0)

    @pytest.mark.parametrize("field", ["E_C", "E_J0", "E_L"])
    def test_non_positive_rejected(self, field):
        kw = {"E_C": 20.0, "E_J0": 2.0, "E_L": 8.0}
        kw[field] = 0.0
        with pytest.raises(ConfigurationError):
            DeviceParams(2, **kw)

    def test_too_many_qubits(self):
        with pytest.raises(ConfigurationError):
            DeviceParams(5, 20.0, 2.0)

    def test_weak_charging_warns(self):
        with pytest.warns(UserWarning):
            DeviceParams(1, 1.0, 2.0)

    def test_per_qubit_override_length(self):
        with pytest.raises(ConfigurationError):
            DeviceParams(2, 20.0, 2.0, E_J0_per_qubit=(2.0,))

    def test_reference_sets_are_charge_regime(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for k in (1, 2, 3):
                reference_parameters(k)


class TestHamiltonian:
    def test_idle_is_zero(self):
        p = reference_parameters(1, 3)
        assert np.count_nonzero(hamiltonian(p, ControlSettings.idle(3))) == 0

    def test_single_qubit_terms(self):
        p = reference_parameters(1, 1)
        h = hamiltonian(p, ControlSettings((0.2,), (0.1,)))
        expected = (-0.5 * 4 * p.E_C * (1 - 0.4) * pauli_matrix("z")
                    - 0.5 * 2 * p.E_J0 * math.cos(0.1 * math.pi) * pauli_matrix("x"))
        assert np.allclose(h, expected, atol=1e-12)

    def test_coupling_yy(self):
        p = reference_parameters(1, 2)
        h = hamiltonian(p, ControlSettings((0.5, 0.5), (0.0, 0.0)))
        e_j = 2 * p.E_J0
        expected = -0.5 * e_j * (pauli_matrix("x0") + pauli_matrix("0x")) - e_j**2 / p.E_L * pauli_matrix("yy")
        assert np.allclose(h, expected, atol=1e-12)

    def test_coupling_chi_xx(self):
        p = reference_parameters(1, 2, coupling="chi_xx")
        h = hamiltonian(p, ControlSettings((0.5, 0.5), (0.0, 0.0)))
        e_j = 2 * p.E_J0
        assert np.allclose(h + 0.5 * e_j * (pauli_matrix("x0") + pauli_matrix("0x")),
                           e_j**2 / p.E_L * pauli_matrix("xx"), atol=1e-12)

    def test_switched_off_qubit_decouples(self):
        p = reference_parameters(1, 2)
        h = hamiltonian(p, ControlSettings((0.5, 0.5), (0.0, 0.5)))
        assert np.allclose(h, -p.E_J0 * pauli_matrix("x0"), atol=1e-14)

    def test_flux_periodic(self):
        assert ControlSettings((0.5,), (1.25,)).flux == (0.25,)

    def test_settings_mismatch(self):
        with pytest.raises(ValueError):
            hamiltonian(reference_parameters(1, 2), ControlSettings.idle(3))

    def test_hermitian(self):
        p = reference_parameters(2, 3)
        h = hamiltonian(p, ControlSettings((0.1, 0.3, 0.9), (0.2, 0.7, 0.4)))
        assert np.allclose(h, h.conj().T)


class TestTimings:
    def test_set1_frozen(self):
        t = timings(reference_parameters(1, 2))
        assert t.t_x == pytest.approx(SET1_T_X, rel=1e-12)
        assert t.t_y_total == pytest.approx(SET1_T_Y, rel=1e-12)
        assert t.tau == pytest.approx(SET1_TAU, rel=1e-12)
        assert t.tau_alternative == pytest.approx(SET1_TAU / 2, rel=1e-12)

    def test_tau_flux_one_third(self):
        assert device.tau_flux(reference_parameters(1, 2)) == pytest.approx(1 / 3)

    def test_tau_energy_above_max(self):
        p = reference_parameters(1, 2, tau_energy=5.0)
        with pytest.raises(ConfigurationError):
            device.tau_flux(p)

    def test_tau_ratio_error_names_root15(self):
        p = reference_parameters(1, 2, E_L=1.0)
        with pytest.raises(ConfigurationError, match="sqrt\\(15\\)"):
            device.check_tau_ratio(p)

    def test_chi_xx_has_no_u_tau(self):
        with pytest.raises(ConfigurationError):
            device.check_tau_ratio(reference_parameters(1, 2, coupling="chi_xx"))
