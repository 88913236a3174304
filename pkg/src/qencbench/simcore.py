"""Dense statevector simulation for the small gate vocabulary used by the
feature maps.

Bit ordering is little-endian: qubit ``q`` is bit ``q`` of the basis index,
so ``X`` on qubit 0 maps ``|00>`` (index 0) to index 1.

Rotations follow ``R_P(theta) = exp(-i theta P / 2)``. ``PhasePoly`` is a
diagonal gate that multiplies basis state ``|z>`` by
``exp(i * sum_t c_t * s_t(z))`` with ``s_t(z) = prod_{j in mask_t} (1 - 2 z_j)``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _core
from .errors import ArgumentError

MAX_QUBITS = 16

GATE_KINDS = ("H", "RX", "RY", "RZ", "X", "CX", "PhasePoly")
_ROTATIONS = ("RX", "RY", "RZ")
_ARITY = {"H": 1, "RX": 1, "RY": 1, "RZ": 1, "X": 1, "CX": 2}

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def _check_n_qubits(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ArgumentError(f"n_qubits must be a positive integer, got {n!r}")
    if n > MAX_QUBITS:
        raise ArgumentError(f"n_qubits={n} exceeds the {MAX_QUBITS}-qubit cap")


class StateVector:
    """Complex amplitudes of an ``n_qubits`` register.

    Mutable; a single owner applies gates in place via :func:`run_circuit`.
    Use :meth:`copy` before sharing.
    """

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes, n_qubits=None):
        amps = np.array(amplitudes, dtype=np.complex128).ravel()
        if n_qubits is None:
            n_qubits = int(amps.size).bit_length() - 1
        _check_n_qubits(n_qubits)
        if amps.size != 1 << n_qubits:
            raise ArgumentError(
                f"{amps.size} amplitudes do not match {n_qubits} qubits"
            )
        self.n_qubits = int(n_qubits)
        self.amplitudes = amps

    @classmethod
    def zeros(cls, n_qubits):
        """The computational basis state ``|0...0>``."""
        _check_n_qubits(n_qubits)
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def basis(cls, n_qubits, index):
        state = cls.zeros(n_qubits)
        if not 0 <= index < state.amplitudes.size:
            raise ArgumentError(f"basis index {index} out of range")
        state.amplitudes[0] = 0.0
        state.amplitudes[index] = 1.0
        return state

    def copy(self):
        return StateVector(self.amplitudes.copy(), self.n_qubits)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def __len__(self):
        return self.amplitudes.size

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits})"


@dataclass(frozen=True)
class Gate:
    """One gate. ``targets`` holds (control, target) for ``CX``.

    For ``PhasePoly``, ``phase_terms`` is a tuple of ``(bitmask, coefficient)``
    and ``targets`` lists the qubits touched by any mask.
    """

    kind: str
    targets: tuple
    angle: float = 0.0
    phase_terms: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ArgumentError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if len(set(targets)) != len(targets):
            raise ArgumentError(f"{self.kind} targets must be distinct: {targets}")
        if any(t < 0 for t in targets):
            raise ArgumentError(f"negative qubit index in {targets}")
        if self.kind == "PhasePoly":
            terms = tuple((int(m), float(c)) for m, c in self.phase_terms)
            if any(m <= 0 for m, _ in terms):
                raise ArgumentError("PhasePoly masks must be positive bitmasks")
            object.__setattr__(self, "phase_terms", terms)
        elif len(targets) != _ARITY[self.kind]:
            raise ArgumentError(
                f"{self.kind} takes {_ARITY[self.kind]} qubit(s), got {targets}"
            )

    def adjoint(self):
        if self.kind in _ROTATIONS:
            return Gate(self.kind, self.targets, angle=-self.angle)
        if self.kind == "PhasePoly":
            terms = tuple((m, -c) for m, c in self.phase_terms)
            return Gate("PhasePoly", self.targets, phase_terms=terms)
        return self

    @property
    def max_qubit(self):
        if self.kind == "PhasePoly":
            top = max((m for m, _ in self.phase_terms), default=0)
            return max(top.bit_length() - 1, max(self.targets, default=-1))
        return max(self.targets)


def H(q):
    return Gate("H", (q,))


def X(q):
    return Gate("X", (q,))


def RX(q, angle):
    return Gate("RX", (q,), angle=float(angle))


def RY(q, angle):
    return Gate("RY", (q,), angle=float(angle))


def RZ(q, angle):
    return Gate("RZ", (q,), angle=float(angle))


def CX(control, target):
    return Gate("CX", (control, target))


def PhasePoly(terms):
    """Diagonal phase gate from ``[(qubit_indices_or_mask, coeff), ...]``.

    Each term's qubit set may be given as an int bitmask or an iterable of
    qubit indices.
    """
    norm_terms = []
    touched = 0
    for qubits, coeff in terms:
        if isinstance(qubits, (int, np.integer)):
            mask = int(qubits)
        else:
            mask = 0
            for q in qubits:
                mask |= 1 << int(q)
        touched |= mask
        norm_terms.append((mask, float(coeff)))
    targets = tuple(q for q in range(touched.bit_length()) if touched >> q & 1)
    return Gate("PhasePoly", targets, phase_terms=tuple(norm_terms))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, Gate):
                raise ArgumentError(f"not a Gate: {g!r}")
            if g.targets and g.max_qubit >= self.n_qubits:
                raise ArgumentError(
                    f"{g.kind} on {g.targets} exceeds {self.n_qubits} qubits"
                )
        object.__setattr__(self, "gates", gates)

    def adjoint(self):
        """Gates reversed, each replaced by its inverse."""
        return Circuit(self.n_qubits, tuple(g.adjoint() for g in reversed(self.gates)))

    def __add__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise ArgumentError("cannot concatenate circuits of different widths")
        return Circuit(self.n_qubits, self.gates + other.gates)

    def without(self, kind):
        """Copy of this circuit with every gate of ``kind`` removed."""
        return Circuit(self.n_qubits, tuple(g for g in self.gates if g.kind != kind))

    def __len__(self):
        return len(self.gates)


def _rotation_matrix(kind, angle):
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=np.complex128)


@lru_cache(maxsize=512)
def _cx_indices(n_qubits, control, target):
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    sel = idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)]
    return sel, sel | (1 << target)


def _apply_1q(amps, n_qubits, q, u):
    view = amps.reshape(1 << (n_qubits - q - 1), 2, 1 << q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    view[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def _apply_inplace(state, gate):
    n = state.n_qubits
    if gate.targets and gate.max_qubit >= n:
        raise ArgumentError(f"{gate.kind} on {gate.targets} out of range for {n} qubits")
    amps = state.amplitudes
    kind = gate.kind
    if kind == "H":
        _apply_1q(amps, n, gate.targets[0], _H)
    elif kind == "X":
        _apply_1q(amps, n, gate.targets[0], _X)
    elif kind in _ROTATIONS:
        _apply_1q(amps, n, gate.targets[0], _rotation_matrix(kind, gate.angle))
    elif kind == "CX":
        lo, hi = _cx_indices(n, gate.targets[0], gate.targets[1])
        tmp = amps[lo].copy()
        amps[lo] = amps[hi]
        amps[hi] = tmp
    else:
        if gate.phase_terms:
            masks = np.array([m for m, _ in gate.phase_terms], dtype=np.int64)
            coeffs = np.array([c for _, c in gate.phase_terms], dtype=np.float64)
            amps *= np.exp(1j * np.asarray(_core.phase_diagonal(masks, coeffs, n)))


def apply_gate(state, gate):
    """Return a new state with ``gate`` applied; the input is untouched."""
    out = state.copy()
    _apply_inplace(out, gate)
    return out


def run_circuit(circuit, initial=None):
    """Apply ``circuit`` gate by gate to a copy of ``initial`` (default ``|0..0>``)."""
    if initial is None:
        initial = StateVector.zeros(circuit.n_qubits)
    if circuit.n_qubits != initial.n_qubits:
        raise ArgumentError(
            f"circuit has {circuit.n_qubits} qubits, state has {initial.n_qubits}"
        )
    state = initial.copy()
    for gate in circuit.gates:
        _apply_inplace(state, gate)
    return state


def inner_product(a, b):
    """``<a|b>`` (conjugate-linear in ``a``)."""
    if a.n_qubits != b.n_qubits:
        raise ArgumentError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def sample_counts(state, shots, seed):
    """Draw ``shots`` computational-basis outcomes from ``|amplitude|^2``.

    Returns ``{basis_index: count}`` with zero counts omitted. ``seed`` may be
    an int or a :class:`numpy.random.SeedSequence`.
    """
    if not isinstance(shots, (int, np.integer)) or shots < 1:
        raise ArgumentError(f"shots must be a positive integer, got {shots!r}")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(shots), probs)
    nz = np.flatnonzero(counts)
    return {int(k): int(counts[k]) for k in nz}


def circuit_unitary(circuit):
    """Dense unitary of ``circuit`` built column by column (small n only)."""
    dim = 1 << circuit.n_qubits
    cols = [run_circuit(circuit, StateVector.basis(circuit.n_qubits, k)).amplitudes
            for k in range(dim)]
    return np.stack(cols, axis=1)
