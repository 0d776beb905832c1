import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chargetomo import qmath
from chargetomo.qmath import (NotHermitianError, PauliString, pauli_assemble, pauli_decompose, pauli_matrix,
                              pauli_words)


def taylor_expm(a, terms=80):
    # scaling and squaring around a plain Taylor series; independent of eigh
    norm = np.linalg.norm(a, 1)
    k = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    a = a / 2**k
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for j in range(1, terms):
        term = term @ a / j
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


class TestPauliAlgebra:
    def test_word_order(self):
        assert pauli_words(1) == ["0", "x", "y", "z"]
        assert pauli_words(2)[:5] == ["00", "0x", "0y", "0z", "x0"]
        assert len(pauli_words(3)) == 64

    def test_products(self):
        X, Y, Z = qmath.SIGMA_X, qmath.SIGMA_Y, qmath.SIGMA_Z
        assert np.allclose(X @ Y, 1j * Z)
        assert np.allclose(Y @ Z, 1j * X)
        assert np.allclose(Z @ X, 1j * Y)

    def test_first_letter_is_first_qubit(self):
        assert np.allclose(pauli_matrix("z0"), np.kron(qmath.SIGMA_Z, np.eye(2)))
        assert np.allclose(pauli_matrix("0z"), np.kron(np.eye(2), qmath.SIGMA_Z))

    def test_orthogonality(self):
        stack = qmath.pauli_stack(2)
        gram = np.einsum("aij,bji->ab", stack, stack)
        assert np.allclose(gram, 4 * np.eye(16))

    def test_bad_word(self):
        with pytest.raises(ValueError):
            pauli_matrix("xq")

    def test_embed(self):
        assert qmath.embed({0: "x", 2: "y"}, 3) == "x0y"

    def test_constants_read_only(self):
        with pytest.raises(ValueError):
            qmath.SIGMA_X[0, 0] = 5


class TestDecompose:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_against_trace_loop(self, n):
        rng = np.random.default_rng(n)
        rho = qmath.random_density_matrix(n, rng)
        coeffs = {c.word: c.coefficient for c in pauli_decompose(rho)}
        for w in pauli_words(n):
            expected = np.trace(rho @ pauli_matrix(w)).real
            assert coeffs[w] == pytest.approx(expected, abs=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_round_trip(self, n, seed):
        rho = qmath.random_density_matrix(n, np.random.default_rng(seed))
        back = pauli_assemble(pauli_decompose(rho))
        assert np.max(np.abs(back - rho)) < 1e-13

    def test_maximally_mixed(self):
        coeffs = pauli_decompose(np.eye(4) / 4)
        assert coeffs[0].coefficient == pytest.approx(1.0)
        assert all(abs(c.coefficient) < 1e-15 for c in coeffs[1:])

    def test_non_hermitian_rejected(self):
        m = np.array([[1, 1], [0, 0]], dtype=complex)
        with pytest.raises(NotHermitianError):
            pauli_decompose(m)

    def test_not_power_of_two(self):
        with pytest.raises(ValueError):
            qmath.num_qubits(np.eye(3))

    def test_assemble_dict(self):
        m = pauli_assemble({"0": 1.0, "z": 1.0})
        assert np.allclose(m, [[1, 0], [0, 0]])

    def test_pauli_string_weight(self):
        assert PauliString("x0z", 1.0).weight == 2


class TestExponential:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 2**32 - 1), st.floats(-3, 3))
    def test_matches_taylor(self, n, seed, scale):
        h = qmath.random_hermitian(2**n, np.random.default_rng(seed))
        u = qmath.expm_hermitian(h, scale)
        assert np.max(np.abs(u - taylor_expm(-1j * scale * h))) < 1e-10

    def test_unitary(self):
        h = qmath.random_hermitian(8, np.random.default_rng(0))
        u = qmath.expm_hermitian(h, 2 * math.pi * 0.37)
        assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)

    def test_conjugate_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            qmath.conjugate_observable(2 * np.eye(2), qmath.SIGMA_Z)


class TestMetrics:
    def test_trace_distance_orthogonal(self):
        a = qmath.projector(qmath.ket("0"))
        b = qmath.projector(qmath.ket("1"))
        assert qmath.trace_distance(a, b) == pytest.approx(1.0)

    def test_phase(self):
        u = qmath.expm_hermitian(qmath.random_hermitian(4, np.random.default_rng(3)), 1.0)
        assert qmath.equal_up_to_phase(u, np.exp(0.7j) * u)
        assert qmath.phase_aligned_deviation(u, np.exp(-2.1j) * u) < 1e-14
        assert not qmath.equal_up_to_phase(u, u @ qmath.pauli_matrix("xz"))

    @pytest.mark.parametrize("rank", [1, 2, None])
    def test_random_state_is_physical(self, rank):
        rho = qmath.random_density_matrix(2, np.random.default_rng(1), rank=rank)
        ev = np.linalg.eigvalsh(rho)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert ev[0] > -1e-14
        if rank:
            assert np.sum(ev > 1e-12) == rank
