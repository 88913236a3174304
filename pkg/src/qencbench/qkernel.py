"""Fidelity kernels from the inverse-embedding test.

The test circuit is ``U(d_i)`` followed by ``U(d_j)^dagger``; the probability
of reading ``|0...0>`` is ``|<psi(d_j)|psi(d_i)>|^2``. Exact mode computes
that overlap from statevectors, Shots mode samples the test circuit.
"""

import io
from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .encoders import encode, encode_rows, encoding_adjoint
from .errors import ArgumentError
from .simcore import run_circuit, sample_counts

MODES = ("Exact", "Shots")

_SQUARE, _BLOCK = 0, 1


@dataclass(frozen=True)
class KernelConfig:
    mode: str = "Exact"
    shots: int = 1024
    base_seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ArgumentError(f"kernel mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "Shots" and (int(self.shots) != self.shots or self.shots < 1):
            raise ArgumentError(f"shots must be a positive integer, got {self.shots!r}")


@dataclass(frozen=True)
class GramMatrix:
    """Kernel values plus the configuration that produced them.

    ``symmetric`` is True for a square train/train matrix; rectangular
    test/train blocks use the same container with ``symmetric=False``.
    """

    entries: np.ndarray
    config: KernelConfig
    symmetric: bool = True

    @property
    def size(self):
        return self.entries.shape[0]

    @property
    def shape(self):
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def pair_seed(base_seed, i, j, block=_SQUARE):
    """Seed for the (i, j) entry; independent of evaluation order."""
    if block == _SQUARE and i > j:
        i, j = j, i
    return np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, block, int(i), int(j)])


def _shots_fidelity(state_i, adjoint_j, shots, seed):
    out = run_circuit(adjoint_j, state_i)
    return sample_counts(out, shots, seed).get(0, 0) / shots


def fidelity(row_i, row_j, spec, scaler, config=KernelConfig(), i=0, j=1):
    """Kernel value for one pair of rows.

    ``i``/``j`` are the pair's indices, used only to derive the shot seed.
    """
    a = np.asarray(row_i, dtype=np.float64).ravel()
    b = np.asarray(row_j, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ArgumentError(f"rows differ in length: {a.size} vs {b.size}")
    if config.mode == "Exact":
        if np.array_equal(a, b):
            return 1.0
        ov = np.vdot(encode(b, spec, scaler).amplitudes, encode(a, spec, scaler).amplitudes)
        return float(min(1.0, abs(ov) ** 2))
    seed = pair_seed(config.base_seed, i, j)
    return _shots_fidelity(encode(a, spec, scaler), encoding_adjoint(b, spec, scaler),
                           int(config.shots), seed)


def _check_rows(rows, spec, name):
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ArgumentError(f"{name} must be a non-empty row matrix")
    if x.shape[1] != spec.n_features:
        raise ArgumentError(
            f"{name} has {x.shape[1]} columns, spec expects {spec.n_features}"
        )
    return x


def gram_matrix(rows_a, rows_b, spec, scaler, config=KernelConfig(), n_jobs=None):
    """Kernel matrix between ``rows_a`` and ``rows_b``.

    Pass ``rows_b=None`` (or the same rows) for the symmetric training Gram
    matrix: each unordered pair is evaluated once and mirrored. Otherwise a
    rectangular block with entry ``(i, j) = fidelity(a_i, b_j)`` is returned.
    """
    a = _check_rows(rows_a, spec, "rows_a")
    square = rows_b is None or rows_b is rows_a
    if not square:
        b = _check_rows(rows_b, spec, "rows_b")
        square = a.shape == b.shape and np.array_equal(a, b)
    if square:
        entries = _square(a, spec, scaler, config, n_jobs)
    else:
        entries = _block(a, b, spec, scaler, config, n_jobs)
    return GramMatrix(entries, config, symmetric=square)


def _square(x, spec, scaler, config, n_jobs):
    m = x.shape[0]
    if config.mode == "Exact":
        psi = encode_rows(x, spec, scaler)
        g = np.abs(psi.conj() @ psi.T) ** 2
        g = np.triu(np.clip(g, 0.0, 1.0), 1)
        g = g + g.T
        np.fill_diagonal(g, 1.0)
        return g
    states = [encode(r, spec, scaler) for r in x]
    adjoints = [encoding_adjoint(r, spec, scaler) for r in x]
    shots = int(config.shots)
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]

    def work(p):
        i, j = p
        return _shots_fidelity(states[i], adjoints[j], shots,
                               pair_seed(config.base_seed, i, j, _SQUARE))

    vals = pmap(work, pairs, n_jobs)
    # U(d) U(d)^dagger = I, so the all-zeros count on the diagonal is always `shots`
    g = np.eye(m)
    for (i, j), v in zip(pairs, vals):
        g[i, j] = g[j, i] = v
    return g


def _block(a, b, spec, scaler, config, n_jobs):
    if config.mode == "Exact":
        pa = encode_rows(a, spec, scaler)
        pb = encode_rows(b, spec, scaler)
        return np.clip(np.abs(pa.conj() @ pb.T) ** 2, 0.0, 1.0)
    states = [encode(r, spec, scaler) for r in a]
    adjoints = [encoding_adjoint(r, spec, scaler) for r in b]
    shots = int(config.shots)
    pairs = [(i, j) for i in range(a.shape[0]) for j in range(b.shape[0])]

    def work(p):
        i, j = p
        return _shots_fidelity(states[i], adjoints[j], shots,
                               pair_seed(config.base_seed, i, j, _BLOCK))

    vals = pmap(work, pairs, n_jobs)
    return np.array(vals, dtype=np.float64).reshape(a.shape[0], b.shape[0])


def write_gram_csv(gram, path_or_buf):
    """Row-major CSV with a ``#`` header carrying size, mode, shots and seed."""
    cfg = gram.config
    rows, cols = gram.shape
    lines = [f"# rows={rows},cols={cols},mode={cfg.mode},shots="
             f"{cfg.shots if cfg.mode == 'Shots' else 0},seed={cfg.base_seed},"
             f"symmetric={int(gram.symmetric)}"]
    lines += [",".join(repr(float(v)) for v in r) for r in gram.entries]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_gram_csv(path_or_buf):
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, encoding="utf-8") as fh:
            text = fh.read()
    head, _, body = text.partition("\n")
    if not head.startswith("#"):
        raise ArgumentError("gram CSV is missing its '#' header line")
    meta = dict(kv.split("=", 1) for kv in head[1:].strip().split(","))
    entries = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    if entries.shape != (int(meta["rows"]), int(meta["cols"])):
        raise ArgumentError("gram CSV body does not match its header size")
    mode = meta["mode"]
    shots = int(meta["shots"]) if mode == "Shots" else 1024
    cfg = KernelConfig(mode=mode, shots=shots, base_seed=int(meta["seed"]))
    return GramMatrix(entries, cfg, symmetric=bool(int(meta.get("symmetric", "1"))))
