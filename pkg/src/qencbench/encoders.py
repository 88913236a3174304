"""Data-encoding feature maps.

Five maps turn a (scaled) feature vector ``d`` into a circuit acting on
``|0...0>``:

``Angle``
    ``RX(2 d_l)`` on wire ``l``, i.e. ``prod_l exp(-i X_l d_l)``.
``EntAngle``
    Hadamard on every wire, ``RY(d_l)`` on wire ``l``, then a CX ring
    ``CX(0,1) ... CX(n-2,n-1) CX(n-1,0)`` (single ``CX(0,1)`` when n = 2).
``Amplitude``
    Amplitudes proportional to the zero-padded vector, prepared top-down by
    a binary tree of uniformly controlled ``RY`` rotations, each multiplexor
    decomposed into ``RY`` and ``CX`` gates.
``IQP``
    ``U_Z(d) H U_Z(d) H |0>`` with
    ``U_Z(d) = exp(i [sum_l d_l Z_l + sum_{l<j} (pi-d_l)(pi-d_j) Z_l Z_j])``.
``AltIQP``
    Same two-block layout with coefficients ``s*d_l`` and
    ``s*(pi-d_l)(pi-d_j)`` (default ``s = 2``) over a full or linear pair set.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ArgumentError, EncodingError
from .simcore import CX, H, RX, RY, Circuit, PhasePoly, run_circuit

MAP_KINDS = ("Angle", "EntAngle", "Amplitude", "IQP", "AltIQP")
SCALINGS = ("MinMaxToTwoPi", "UnitInterval", "None")
ENTANGLEMENTS = ("Full", "Linear")

_SCALING_INTERVALS = {
    "MinMaxToTwoPi": (0.0, 2.0 * math.pi),
    "UnitInterval": (0.0, 1.0),
    "None": None,
}


def default_scaling(map_kind):
    return "UnitInterval" if map_kind == "Amplitude" else "MinMaxToTwoPi"


@dataclass(frozen=True)
class EncodingSpec:
    """Which feature map to build and how to scale its inputs.

    ``entangle=False`` drops the CX ring of ``EntAngle``; it exists to check
    that the data-independent entangler cancels in fidelities.
    """

    map_kind: str
    n_features: int
    scaling: str = None
    altiqp_entanglement: str = "Full"
    altiqp_scale: float = 2.0
    entangle: bool = True

    def __post_init__(self):
        if self.map_kind not in MAP_KINDS:
            raise ArgumentError(
                f"unknown map kind {self.map_kind!r}; choose from {MAP_KINDS}"
            )
        if not isinstance(self.n_features, (int, np.integer)) or self.n_features < 1:
            raise ArgumentError(f"n_features must be >= 1, got {self.n_features!r}")
        scaling = self.scaling
        if scaling is None:
            scaling = default_scaling(self.map_kind)
        if scaling not in SCALINGS:
            raise ArgumentError(f"unknown scaling {scaling!r}; choose from {SCALINGS}")
        object.__setattr__(self, "scaling", scaling)
        if self.altiqp_entanglement not in ENTANGLEMENTS:
            raise ArgumentError(
                f"altiqp_entanglement must be one of {ENTANGLEMENTS}"
            )
        # raises on the qubit cap
        Circuit(self.n_qubits)

    @property
    def n_qubits(self):
        if self.map_kind == "Amplitude":
            return max(1, math.ceil(math.log2(self.n_features)))
        return int(self.n_features)


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature min/max fitted on training rows, plus the target interval.

    ``interval`` is ``None`` for the identity scaling.
    """

    mins: tuple
    maxs: tuple
    interval: tuple = None

    def transform(self, rows):
        x = np.asarray(rows, dtype=np.float64)
        if self.interval is None:
            return x.copy()
        lo, hi = self.interval
        mins = np.asarray(self.mins)
        span = np.asarray(self.maxs) - mins
        const = span == 0
        safe = np.where(const, 1.0, span)
        out = lo + (x - mins) / safe * (hi - lo)
        return np.where(const, 0.5 * (lo + hi), out)


def fit_scaler(rows, spec):
    """Fit min/max scaling on ``rows`` (training rows only)."""
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ArgumentError("fit_scaler needs a non-empty 2-D row matrix")
    if x.shape[1] != spec.n_features:
        raise ArgumentError(
            f"rows have {x.shape[1]} columns, spec expects {spec.n_features}"
        )
    return ScalerParams(
        mins=tuple(x.min(axis=0).tolist()),
        maxs=tuple(x.max(axis=0).tolist()),
        interval=_SCALING_INTERVALS[spec.scaling],
    )


def _scaled_row(row, spec, scaler):
    d = np.asarray(row, dtype=np.float64).ravel()
    if d.size != spec.n_features:
        raise ArgumentError(f"row has {d.size} entries, spec expects {spec.n_features}")
    if scaler is not None:
        d = scaler.transform(d[None, :])[0]
    elif spec.scaling != "None":
        raise ArgumentError(f"{spec.scaling} scaling requires a fitted scaler")
    if not np.all(np.isfinite(d)):
        raise EncodingError("row contains non-finite values")
    return d


def _angle_gates(d):
    return [RX(l, 2.0 * v) for l, v in enumerate(d)]


def _ring(n):
    if n == 1:
        return []
    if n == 2:
        return [CX(0, 1)]
    return [CX(l, l + 1) for l in range(n - 1)] + [CX(n - 1, 0)]


def _entangled_angle_gates(d, entangle=True):
    n = len(d)
    gates = [H(l) for l in range(n)] + [RY(l, v) for l, v in enumerate(d)]
    if entangle:
        gates += _ring(n)
    return gates


def _phase_terms(d, pairs, scale):
    terms = [(1 << l, scale * v) for l, v in enumerate(d)]
    terms += [((1 << l) | (1 << j), scale * (math.pi - d[l]) * (math.pi - d[j]))
              for l, j in pairs]
    return terms


def _iqp_gates(d, pairs, scale):
    n = len(d)
    layer = [H(l) for l in range(n)]
    u = PhasePoly(_phase_terms(d, pairs, scale))
    return layer + [u] + layer + [u]


def _gray(i):
    return i ^ (i >> 1)


def _multiplexed_ry(target, controls, angles):
    """Uniformly controlled RY as alternating RY/CX gates.

    ``angles[c]`` applies when the control register (``controls[b]`` is bit
    ``b`` of ``c``) holds ``c``.
    """
    k = len(controls)
    if k == 0:
        return [RY(target, angles[0])]
    size = 1 << k
    theta = np.asarray(angles, dtype=np.float64)
    js = np.arange(size)
    gates = []
    for i in range(size):
        g = _gray(i)
        signs = np.array([-1.0 if bin(j & g).count("1") & 1 else 1.0 for j in js])
        alpha = float(signs @ theta) / size
        gates.append(RY(target, alpha))
        nxt = _gray((i + 1) % size)
        bit = (g ^ nxt).bit_length() - 1
        gates.append(CX(controls[bit], target))
    return gates


def _amplitude_gates(v):
    """State-preparation gates for the real vector ``v`` (length ``2**m``)."""
    m = int(v.size).bit_length() - 1
    gates = []
    for t in range(m - 1, -1, -1):
        controls = list(range(t + 1, m))
        blocks = v.reshape(-1, 2, 1 << t)  # (prefix, bit t, lower bits)
        if t == 0:
            left, right = blocks[:, 0, 0], blocks[:, 1, 0]
        else:
            left = np.linalg.norm(blocks[:, 0, :], axis=1)
            right = np.linalg.norm(blocks[:, 1, :], axis=1)
        angles = 2.0 * np.arctan2(right, left)
        if not np.any(angles):
            continue
        gates += _multiplexed_ry(t, controls, angles)
    return gates


def amplitude_vector(row, spec, scaler):
    """The normalized, zero-padded target vector of amplitude encoding."""
    d = _scaled_row(row, spec, scaler)
    v = np.zeros(1 << spec.n_qubits)
    v[: d.size] = d
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise EncodingError("amplitude encoding of an all-zero row is undefined")
    return v / nrm


def encoding_circuit(row, spec, scaler=None):
    """Circuit ``U(d)`` such that ``U(d)|0...0>`` is the encoded state."""
    kind = spec.map_kind
    if kind == "Amplitude":
        gates = _amplitude_gates(amplitude_vector(row, spec, scaler))
    else:
        d = _scaled_row(row, spec, scaler)
        if kind == "Angle":
            gates = _angle_gates(d)
        elif kind == "EntAngle":
            gates = _entangled_angle_gates(d, spec.entangle)
        elif kind == "IQP":
            gates = _iqp_gates(d, combinations(range(d.size), 2), 1.0)
        else:
            if spec.altiqp_entanglement == "Full":
                pairs = combinations(range(d.size), 2)
            else:
                pairs = [(l, l + 1) for l in range(d.size - 1)]
            gates = _iqp_gates(d, pairs, spec.altiqp_scale)
    return Circuit(spec.n_qubits, tuple(gates))


def encode(row, spec, scaler=None):
    """Encoded state ``U(d)|0...0>``."""
    return run_circuit(encoding_circuit(row, spec, scaler))


def encoding_adjoint(row, spec, scaler=None):
    """``U(d)^dagger``: appending it after :func:`encode` returns ``|0...0>``."""
    return encoding_circuit(row, spec, scaler).adjoint()


def encode_rows(rows, spec, scaler=None):
    """Stack of encoded amplitude vectors, one row per data row."""
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2:
        raise ArgumentError("rows must be a 2-D matrix")
    out = np.empty((x.shape[0], 1 << spec.n_qubits), dtype=np.complex128)
    for i, row in enumerate(x):
        out[i] = encode(row, spec, scaler).amplitudes
    return out

