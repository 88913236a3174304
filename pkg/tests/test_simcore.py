import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qencbench.errors import ArgumentError
from qencbench.simcore import (CX, RX, RY, RZ, Circuit, H, PhasePoly, StateVector, X,
                               apply_gate, circuit_unitary, inner_product, run_circuit,
                               sample_counts)

SQ2 = 1 / math.sqrt(2)

# dense single-qubit matrices for the oracle
_M = {
    "H": np.array([[1, 1], [1, -1]]) * SQ2,
    "X": np.array([[0, 1], [1, 0]]),
}


def _rot(kind, t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return {"RX": np.array([[c, -1j * s], [-1j * s, c]]),
            "RY": np.array([[c, -s], [s, c]]),
            "RZ": np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])}[kind]


def _embed(u, q, n):
    # little endian: qubit 0 is the rightmost Kronecker factor
    out = np.eye(1)
    for k in range(n):
        out = np.kron(u if k == q else np.eye(2), out)
    return out


def _cx_matrix(c, t, n):
    dim = 1 << n
    m = np.zeros((dim, dim))
    for z in range(dim):
        m[z ^ (1 << t) if z >> c & 1 else z, z] = 1
    return m


def random_circuit(rng, n, depth):
    gates = []
    for _ in range(depth):
        k = rng.integers(0, 7)
        q = int(rng.integers(0, n))
        if k == 0:
            gates.append(H(q))
        elif k == 1:
            gates.append(X(q))
        elif k in (2, 3, 4):
            gates.append((RX, RY, RZ)[k - 2](q, rng.uniform(-7, 7)))
        elif k == 5 and n > 1:
            c, t = rng.choice(n, 2, replace=False)
            gates.append(CX(int(c), int(t)))
        else:
            terms = [(int(rng.integers(1, 1 << n)), rng.normal()) for _ in range(3)]
            gates.append(PhasePoly(terms))
    return Circuit(n, tuple(gates))


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(v / np.linalg.norm(v), n)


class TestStateVector:
    def test_zeros(self):
        s = StateVector.zeros(3)
        assert s.amplitudes[0] == 1 and s.norm() == 1 and len(s) == 8

    def test_length_must_match(self):
        with pytest.raises(ArgumentError):
            StateVector(np.ones(3), 2)

    def test_qubit_cap(self):
        with pytest.raises(ArgumentError):
            StateVector.zeros(17)
        with pytest.raises(ArgumentError):
            Circuit(0)


class TestApplyGate:
    def test_hadamard(self):
        s = apply_gate(StateVector.zeros(1), H(0))
        np.testing.assert_allclose(s.amplitudes, [SQ2, SQ2], atol=1e-15)

    def test_rx_pi_flips(self):
        d = math.pi / 2
        s = apply_gate(StateVector.zeros(1), RX(0, 2 * d))
        assert abs(abs(s.amplitudes[1]) - 1) < 1e-12

    def test_phasepoly_single_term(self):
        plus = StateVector([SQ2, SQ2])
        s = apply_gate(plus, PhasePoly([({0}, math.pi)]))
        np.testing.assert_allclose(s.amplitudes, [-SQ2, -SQ2], atol=1e-12)

    def test_little_endian(self):
        s = apply_gate(StateVector.zeros(2), X(0))
        assert s.amplitudes[1] == 1

    def test_target_out_of_range(self):
        with pytest.raises(ArgumentError):
            apply_gate(StateVector.zeros(2), H(2))
        with pytest.raises(ArgumentError):
            apply_gate(StateVector.zeros(2), PhasePoly([(0b100, 1.0)]))

    def test_distinct_targets(self):
        with pytest.raises(ArgumentError):
            CX(1, 1)

    def test_input_untouched(self):
        s = StateVector.zeros(1)
        apply_gate(s, H(0))
        assert s.amplitudes[0] == 1

    @pytest.mark.parametrize("kind", ["H", "X", "RX", "RY", "RZ"])
    def test_single_qubit_matches_dense(self, kind, rng):
        n = 3
        psi = random_state(rng, n)
        for q in range(n):
            if kind in _M:
                g, u = (H if kind == "H" else X)(q), _M[kind]
            else:
                t = rng.uniform(-5, 5)
                g, u = {"RX": RX, "RY": RY, "RZ": RZ}[kind](q, t), _rot(kind, t)
            np.testing.assert_allclose(apply_gate(psi, g).amplitudes,
                                       _embed(u, q, n) @ psi.amplitudes, atol=1e-13)

    def test_phasepoly_matches_dense(self, rng, backend):
        n = 4
        psi = random_state(rng, n)
        terms = [(int(rng.integers(1, 16)), rng.normal()) for _ in range(5)]
        z = np.arange(16)
        phase = np.zeros(16)
        for m, c in terms:
            sign = np.array([(-1) ** bin(v & m).count("1") for v in z])
            phase += c * sign
        want = np.exp(1j * phase) * psi.amplitudes
        got = apply_gate(psi, PhasePoly(terms)).amplitudes
        np.testing.assert_allclose(got, want, atol=1e-13)

    def test_phasepoly_iterable_and_mask_agree(self):
        a = PhasePoly([({0, 2}, 0.3)])
        b = PhasePoly([(0b101, 0.3)])
        assert a == b and a.targets == (0, 2)


class TestRunCircuit:
    def test_hh_identity(self):
        s = run_circuit(Circuit(1, (H(0), H(0))))
        np.testing.assert_allclose(s.amplitudes, [1, 0], atol=1e-15)

    def test_empty_circuit(self, rng):
        psi = random_state(rng, 3)
        np.testing.assert_array_equal(run_circuit(Circuit(3), psi).amplitudes, psi.amplitudes)

    def test_bell_matches_matrix_product(self):
        c = Circuit(2, (H(0), H(1), CX(0, 1)))
        u = _cx_matrix(0, 1, 2) @ np.kron(_M["H"], _M["H"])
        np.testing.assert_allclose(run_circuit(c).amplitudes, u[:, 0], atol=1e-14)

    def test_cx_matches_dense(self, rng):
        n = 3
        psi = random_state(rng, n)
        for c in range(n):
            for t in range(n):
                if c != t:
                    got = apply_gate(psi, CX(c, t)).amplitudes
                    np.testing.assert_allclose(got, _cx_matrix(c, t, n) @ psi.amplitudes)

    def test_width_mismatch(self):
        with pytest.raises(ArgumentError):
            run_circuit(Circuit(2), StateVector.zeros(3))
        with pytest.raises(ArgumentError):
            Circuit(2, (H(3),))

    def test_norm_preserved_random_circuits(self, rng):
        for _ in range(1000):
            n = int(rng.integers(1, 11))
            c = random_circuit(rng, n, int(rng.integers(0, 51)))
            assert abs(run_circuit(c).norm() - 1) <= 1e-9

    def test_adjoint_inverts(self, rng, backend):
        for _ in range(50):
            n = int(rng.integers(1, 8))
            c = random_circuit(rng, n, 40)
            psi = random_state(rng, n)
            back = run_circuit(c.adjoint(), run_circuit(c, psi))
            assert np.max(np.abs(back.amplitudes - psi.amplitudes)) < 1e-9

    def test_phasepoly_commute_bitwise(self, rng):
        psi = random_state(rng, 4)
        a = PhasePoly([(3, 0.7), (8, -1.1)])
        b = PhasePoly([(5, 2.3), (12, 0.4)])
        ab = run_circuit(Circuit(4, (a, b)), psi).amplitudes
        ba = run_circuit(Circuit(4, (b, a)), psi).amplitudes
        np.testing.assert_allclose(ab, ba, rtol=0, atol=1e-15)

    def test_unitary_is_unitary(self, rng):
        u = circuit_unitary(random_circuit(rng, 3, 20))
        np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


class TestInnerProduct:
    def test_self_overlap(self, rng):
        psi = random_state(rng, 4)
        assert abs(inner_product(psi, psi) - 1) < 1e-12

    def test_orthogonal(self):
        assert inner_product(StateVector.basis(1, 0), StateVector.basis(1, 1)) == 0

    def test_conjugate_symmetry(self, rng):
        a, b = random_state(rng, 3), random_state(rng, 3)
        direct = sum(np.conj(x) * y for x, y in zip(a.amplitudes, b.amplitudes))
        assert abs(inner_product(a, b) - direct) < 1e-12
        assert abs(inner_product(a, b) - np.conj(inner_product(b, a))) < 1e-12
        assert abs(inner_product(a, b)) <= 1 + 1e-10

    def test_size_mismatch(self):
        with pytest.raises(ArgumentError):
            inner_product(StateVector.zeros(1), StateVector.zeros(2))


class TestSampleCounts:
    def test_deterministic_state(self):
        assert sample_counts(StateVector.zeros(3), 1000, 0) == {0: 1000}

    def test_binomial_bound(self):
        c = sample_counts(StateVector([SQ2, SQ2]), 10**6, 7)
        assert sum(c.values()) == 10**6
        assert abs(c[0] / 1e6 - 0.5) < 0.002

    def test_seed_determinism(self, rng):
        psi = random_state(rng, 4)
        assert sample_counts(psi, 500, 3) == sample_counts(psi, 500, 3)

    @pytest.mark.parametrize("shots", [0, -5, 2.5])
    def test_bad_shots(self, shots):
        with pytest.raises(ArgumentError):
            sample_counts(StateVector.zeros(1), shots, 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6))
def test_rotation_chain_roundtrip(angles):
    n = len(angles)
    gates = tuple(RY(q, a) for q, a in enumerate(angles)) + tuple(
        RX(q, -2 * a) for q, a in enumerate(angles))
    c = Circuit(n, gates)
    back = run_circuit(c.adjoint(), run_circuit(c))
    assert abs(back.amplitudes[0]) > 1 - 1e-10
