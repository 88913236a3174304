"""Expressibility: KL divergence between a feature map's pairwise-fidelity
histogram and a Haar reference histogram.

Two references are available:

* ``Independent``: fidelities of independent Haar-random states in dimension
  ``N`` have density ``(N-1)(1-f)^(N-2)``, i.e. survival ``(1-f)^(N-1)``.
* ``Dependent``: ``Beta(K, K(N-1))``, used when fidelities come from all
  pairs of one dataset. ``K = 2**(n_qubits // 2)``.

Bin masses are differences of the CDF (or of the survival function in the
upper tail), never midpoint densities: for large ``N`` the density is far too
steep near ``f = 1`` for midpoint evaluation.
"""

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .encoders import fit_scaler
from .errors import ArgumentError
from .qkernel import KernelConfig, gram_matrix

N_BINS = 100
DEFAULT_SHOTS = 1000
REFERENCE_KINDS = ("Independent", "Dependent")


def bin_edges(n_bins=N_BINS):
    return np.linspace(0.0, 1.0, n_bins + 1)


def dependent_k(n_qubits):
    return 2 ** (int(n_qubits) // 2)


@dataclass(frozen=True)
class HaarReference:
    kind: str
    N: int
    K: int = 1
    n_bins: int = N_BINS

    def __post_init__(self):
        if self.kind not in REFERENCE_KINDS:
            raise ArgumentError(f"reference kind must be one of {REFERENCE_KINDS}")
        if int(self.N) != self.N or self.N < 2:
            raise ArgumentError(f"N must be an integer >= 2, got {self.N!r}")
        if int(self.K) != self.K or self.K < 1:
            raise ArgumentError(f"K must be an integer >= 1, got {self.K!r}")
        if self.n_bins < 1:
            raise ArgumentError("n_bins must be positive")


@dataclass(frozen=True)
class FidelitySample:
    values: np.ndarray
    source: str = "DatasetPairs"
    shots: int = None  # None means exact statevector fidelities

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ArgumentError("fidelities must lie in [0, 1]")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ExpressibilityReport:
    score: float
    pqc_hist: np.ndarray
    haar_hist: np.ndarray
    metadata: dict = field(default_factory=dict)


def _independent_masses(N, edges):
    m = N - 1
    lo, hi = edges[:-1], edges[1:]
    with np.errstate(divide="ignore"):
        surv_lo = np.exp(m * np.log1p(-lo))
        ratio = np.where(hi < 1.0, np.log1p(-hi) - np.log1p(-lo), -np.inf)
    return surv_lo * -np.expm1(m * ratio)


def _dependent_masses(N, K, edges):
    a, b = float(K), float(K) * (N - 1)
    pairs = [specfun.betainc_pair(a, b, float(e)) for e in edges]
    mean = a / (a + b)
    masses = np.empty(edges.size - 1)
    for i in range(edges.size - 1):
        if edges[i] >= mean:
            masses[i] = pairs[i][1] - pairs[i + 1][1]
        else:
            masses[i] = pairs[i + 1][0] - pairs[i][0]
    return np.clip(masses, 0.0, None)


def haar_bin_masses(ref):
    """Probability mass of the Haar fidelity distribution in each bin."""
    edges = bin_edges(ref.n_bins)
    if ref.kind == "Independent":
        return _independent_masses(int(ref.N), edges)
    return _dependent_masses(int(ref.N), int(ref.K), edges)


def fidelity_histogram(values, n_bins=N_BINS):
    """Normalized histogram on uniform bins over [0, 1] (1.0 lands in the last bin)."""
    v = np.asarray(values, dtype=np.float64)
    counts, _ = np.histogram(v, bins=bin_edges(n_bins))
    return counts / counts.sum()


def kl_divergence(p, q):
    """``sum p ln(p/q)`` in nats; empty ``p`` bins add 0, ``q = 0 < p`` gives inf."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def expressibility_score(sample, ref):
    if sample.values.size == 0:
        raise ArgumentError("fidelity sample is empty")
    return kl_divergence(fidelity_histogram(sample.values, ref.n_bins), haar_bin_masses(ref))


def pairwise_fidelities(rows, spec, scaler, config=None, n_jobs=None):
    """Fidelity of every unordered pair of distinct row indices."""
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ArgumentError("pairwise_fidelities needs at least 2 rows")
    config = config or KernelConfig(mode="Exact")
    g = gram_matrix(x, None, spec, scaler, config, n_jobs=n_jobs).entries
    iu = np.triu_indices(x.shape[0], 1)
    return FidelitySample(
        values=g[iu],
        source="DatasetPairs",
        shots=int(config.shots) if config.mode == "Shots" else None,
    )


def _report(sample, ref, meta):
    pqc = fidelity_histogram(sample.values, ref.n_bins)
    haar = haar_bin_masses(ref)
    meta = dict(meta)
    meta.update(reference=ref.kind, N=int(ref.N), K=int(ref.K),
                shots=sample.shots if sample.shots is not None else "Exact",
                n_pairs=int(sample.values.size), source=sample.source)
    return ExpressibilityReport(score=kl_divergence(pqc, haar), pqc_hist=pqc,
                                haar_hist=haar, metadata=meta)


def dataset_expressibility(rows, spec, scaler=None, config=None, dataset="", n_jobs=None):
    """Expressibility over all pairs of a dataset, against the dependent reference."""
    x = np.asarray(rows, dtype=np.float64)
    if scaler is None and spec.scaling != "None":
        scaler = fit_scaler(x, spec)
    sample = pairwise_fidelities(x, spec, scaler, config, n_jobs=n_jobs)
    n = spec.n_qubits
    ref = HaarReference("Dependent", N=2 ** n, K=dependent_k(n))
    return _report(sample, ref, dict(map_kind=spec.map_kind, dataset=dataset,
                                     n_qubits=n, n_rows=int(x.shape[0])))


def uniform_expressibility(spec, n_samples, seed, config=None, n_jobs=None):
    """Expressibility of ``n_samples`` points drawn uniformly from ``[0, 2pi]^n``.

    Inputs enter the map unscaled; the reference is the independent one.
    """
    if n_samples < 2:
        raise ArgumentError("uniform_expressibility needs n_samples >= 2")
    if spec.scaling != "None":
        spec = dataclasses.replace(spec, scaling="None")
    rng = np.random.default_rng(seed)
    x = rng.random((int(n_samples), spec.n_features)) * (2.0 * math.pi)
    sample = pairwise_fidelities(x, spec, None, config, n_jobs=n_jobs)
    sample = dataclasses.replace(sample, source="UniformRandom")
    n = spec.n_qubits
    ref = HaarReference("Independent", N=2 ** n)
    return _report(sample, ref, dict(map_kind=spec.map_kind, dataset="uniform",
                                     n_qubits=n, n_rows=int(n_samples), seed=seed))


def write_report_csv(report, path):
    """Metadata as ``#`` lines, then ``bin_lo,bin_hi,pqc,haar`` per bin."""
    edges = bin_edges(report.pqc_hist.size)
    lines = [f"# score={float(report.score)!r}"]
    lines += [f"# {k}={v}" for k, v in sorted(report.metadata.items())]
    lines.append("bin_lo,bin_hi,pqc,haar")
    for i in range(report.pqc_hist.size):
        vals = (edges[i], edges[i + 1], report.pqc_hist[i], report.haar_hist[i])
        lines.append(",".join(repr(float(v)) for v in vals))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_report_csv(path):
    meta, pqc, haar, score = {}, [], [], math.nan
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                if k == "score":
                    score = float(v)
                else:
                    meta[k] = v
            elif not line.startswith("bin_lo"):
                _, _, p, h = line.split(",")
                pqc.append(float(p))
                haar.append(float(h))
    return ExpressibilityReport(score=score, pqc_hist=np.array(pqc),
                                haar_hist=np.array(haar), metadata=meta)
