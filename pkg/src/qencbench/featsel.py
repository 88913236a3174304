"""QUBO feature selection.

Each feature is a binary variable. Relevance (|Pearson| with the target)
is rewarded with weight ``alpha`` and pairwise redundancy (|Pearson|
between features) is penalized with weight ``1 - alpha``:

    E(x) = -alpha * sum_i r_i x_i + (1 - alpha) * sum_{i<j} R_ij x_i x_j

A bisection over ``alpha`` finds a weight that selects exactly ``k``
features. Simulated annealing stands in for a quantum annealer; exhaustive
enumeration is the oracle for small instances.
"""

import json
import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from . import _core
from ._parallel import pmap
from .errors import ArgumentError, RefusalError

EXHAUSTIVE_MAX_VARS = 20
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class QuboInstance:
    linear: np.ndarray
    quadratic: np.ndarray
    alpha: float

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=np.float64).ravel()
        quad = np.asarray(self.quadratic, dtype=np.float64)
        if quad.shape != (lin.size, lin.size):
            raise ArgumentError("quadratic must be n_vars x n_vars")
        if not np.allclose(quad, quad.T, atol=1e-12) or np.any(np.diag(quad) != 0):
            raise ArgumentError("quadratic must be symmetric with zero diagonal")
        if not 0.0 <= self.alpha <= 1.0:
            raise ArgumentError(f"alpha must lie in [0, 1], got {self.alpha}")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)

    @property
    def n_vars(self):
        return self.linear.size

    def with_alpha(self, alpha):
        return replace(self, alpha=float(alpha))

    def energy(self, x):
        """Energy of one assignment (or a stack of assignments)."""
        x = np.asarray(x, dtype=np.float64)
        pair = 0.5 * np.einsum("...i,ij,...j->...", x, self.quadratic, x)
        return -self.alpha * (x @ self.linear) + (1.0 - self.alpha) * pair


@dataclass(frozen=True)
class SelectionResult:
    chosen: tuple
    alpha: float
    energy: float
    solver: str
    adjusted: bool = False

    @property
    def count(self):
        return len(self.chosen)

    def to_dict(self):
        return {"chosen": list(self.chosen), "alpha": self.alpha, "energy": self.energy,
                "solver": self.solver, "adjusted": self.adjusted}


def _abs_pearson(a, b):
    """|corr| between columns of ``a`` and columns of ``b``; constant columns give 0."""
    ac = a - a.mean(axis=0)
    bc = b - b.mean(axis=0)
    na = np.sqrt(np.sum(ac * ac, axis=0))
    nb = np.sqrt(np.sum(bc * bc, axis=0))
    num = ac.T @ bc
    den = np.outer(na, nb)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return np.clip(np.abs(r), 0.0, 1.0)


def correlation_terms(features, target):
    """``(relevance, redundancy)``: |Pearson| with the target and between features."""
    x = np.asarray(features, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64).ravel()
    if x.ndim != 2:
        raise ArgumentError("features must be a 2-D matrix")
    if x.shape[0] < 2:
        raise ArgumentError("need at least 2 rows to compute correlations")
    if t.size != x.shape[0]:
        raise ArgumentError("target length does not match the row count")
    relevance = _abs_pearson(x, t[:, None])[:, 0]
    redundancy = _abs_pearson(x, x)
    np.fill_diagonal(redundancy, 0.0)
    redundancy = 0.5 * (redundancy + redundancy.T)
    return relevance, redundancy


def build_qubo(features, target, alpha):
    if not 0.0 <= alpha <= 1.0:
        raise ArgumentError(f"alpha must lie in [0, 1], got {alpha}")
    lin, quad = correlation_terms(features, target)
    return QuboInstance(lin, quad, float(alpha))


def _tie_key(ix):
    # equal energies: fewer features first, then lexicographic
    return len(ix), ix


def _prune_free(q, x):
    """Drop selected variables whose removal does not raise the energy."""
    x = x.copy()
    while True:
        on = np.flatnonzero(x)
        if on.size == 0:
            return x
        gain = q.alpha * q.linear[on] - (1.0 - q.alpha) * (q.quadratic[on] @ x)
        free = on[gain <= _TIE_TOL]
        if free.size == 0:
            return x
        x[free[0]] = 0.0


def _pick(indices_list, energies, solver, alpha):
    best = float(np.min(energies))
    cands = [tuple(ix) for ix, e in zip(indices_list, energies) if e <= best + _TIE_TOL * max(1.0, abs(best))]
    chosen = min(cands, key=_tie_key)
    return SelectionResult(chosen, float(alpha), best, solver)


def solve_exhaustive(q):
    """Global minimum by enumerating all ``2**n`` assignments."""
    n = q.n_vars
    if n > EXHAUSTIVE_MAX_VARS:
        raise RefusalError(f"exhaustive search refused for {n} > {EXHAUSTIVE_MAX_VARS} variables")
    bits = np.arange(n)
    best_e, cands = math.inf, []
    chunk = 1 << 14
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        x = ((codes[:, None] >> bits[None, :]) & 1).astype(np.float64)
        e = q.energy(x)
        lo = float(e.min())
        if lo < best_e - _TIE_TOL * max(1.0, abs(lo)):
            best_e, cands = lo, []
        thr = best_e + _TIE_TOL * max(1.0, abs(best_e))
        for c in codes[e <= thr]:
            cands.append(tuple(int(b) for b in bits if c >> b & 1))
        best_e = min(best_e, lo)
    chosen = min(cands, key=_tie_key)
    x = np.zeros(n)
    x[list(chosen)] = 1.0
    return SelectionResult(chosen, q.alpha, float(q.energy(x)), "Exhaustive")


def temperature_schedule(q, sweeps, t_ratio=1e-4):
    """Geometric schedule from the largest possible flip cost down by ``t_ratio``."""
    lin = q.alpha * np.abs(q.linear)
    coup = (1.0 - q.alpha) * np.abs(q.quadratic).sum(axis=1)
    t_hot = float(np.max(lin + coup)) if q.n_vars else 1.0
    if t_hot <= 0.0:
        t_hot = 1.0
    return np.geomspace(t_hot, t_hot * t_ratio, int(sweeps))


def solve_annealing(q, sweeps=1000, restarts=10, seed=0, n_jobs=None):
    """Best-of-restarts single-spin-flip Metropolis annealing."""
    if sweeps < 1 or restarts < 1:
        raise ArgumentError("sweeps and restarts must be >= 1")
    n = q.n_vars
    lin = np.ascontiguousarray(-q.alpha * q.linear)
    coup = np.ascontiguousarray((1.0 - q.alpha) * q.quadratic)
    temps = temperature_schedule(q, sweeps)
    children = np.random.SeedSequence(int(seed)).spawn(int(restarts))

    def run(child):
        rng = np.random.default_rng(child)
        x0 = rng.integers(0, 2, size=n).astype(np.uint8)
        u = rng.random((int(sweeps), n))
        best, _ = _core.anneal(lin, coup, x0, temps, u)
        return _prune_free(q, np.asarray(best, dtype=np.float64))

    results = pmap(run, children, n_jobs)
    energies = [float(q.energy(x)) for x in results]
    idx = [tuple(int(i) for i in np.flatnonzero(x)) for x in results]
    return _pick(idx, energies, "Annealing", q.alpha)


def _solve(q, solver, sweeps, restarts, seed, n_jobs):
    if solver == "exhaustive":
        return solve_exhaustive(q)
    if solver == "annealing":
        return solve_annealing(q, sweeps, restarts, seed, n_jobs)
    raise ArgumentError(f"unknown solver {solver!r}")


def _adjust(q, chosen, k):
    x = np.zeros(q.n_vars)
    x[list(chosen)] = 1.0
    while x.sum() > k:
        on = np.flatnonzero(x)
        trials = np.repeat(x[None, :], on.size, axis=0)
        trials[np.arange(on.size), on] = 0.0
        x = trials[int(np.argmin(q.energy(trials)))]
    while x.sum() < k:
        off = np.flatnonzero(x == 0)
        trials = np.repeat(x[None, :], off.size, axis=0)
        trials[np.arange(off.size), off] = 1.0
        x = trials[int(np.argmin(q.energy(trials)))]
    return tuple(int(i) for i in np.flatnonzero(x)), float(q.energy(x))


def select_k_features(features, target, k, solver="annealing", sweeps=1000,
                      restarts=10, seed=0, max_steps=50, n_jobs=None):
    """Bisect ``alpha`` until the optimum selects exactly ``k`` features.

    The selected count is nondecreasing in ``alpha`` at the optimum. If no
    probed ``alpha`` gives exactly ``k`` (possible with a heuristic solver),
    the nearest count is trimmed or extended greedily by energy and the
    result is flagged ``adjusted``.
    """
    lin, quad = correlation_terms(features, target)
    n = lin.size
    if not 1 <= k <= n:
        raise ArgumentError(f"k must lie in [1, {n}], got {k}")
    base = QuboInstance(lin, quad, 1.0)
    lo, hi = 0.0, 1.0
    best = None
    for _ in range(int(max_steps)):
        mid = 0.5 * (lo + hi)
        res = _solve(base.with_alpha(mid), solver, sweeps, restarts, seed, n_jobs)
        if res.count == k:
            return res
        if best is None or abs(res.count - k) < abs(best.count - k):
            best = res
        if res.count < k:
            lo = mid
        else:
            hi = mid
    q = base.with_alpha(best.alpha)
    chosen, energy = _adjust(q, best.chosen, k)
    return SelectionResult(chosen, best.alpha, energy, best.solver, adjusted=True)


def reference_feature_subsets():
    """Shipped 10-column subsets for Ionosphere, Sonar and WDBC (0-based column labels)."""
    text = resources.files("qencbench").joinpath("data/selected_columns.json").read_text()
    return {k: tuple(v) for k, v in json.loads(text).items()}


def write_selection(result, path):
    """JSON for ``.json`` paths, otherwise a one-row CSV."""
    path = str(path)
    if path.endswith(".json"):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(result.to_dict(), fh, indent=2)
            fh.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("indices,alpha,energy,solver,adjusted\n")
        fh.write(f"{' '.join(map(str, result.chosen))},{result.alpha!r},{result.energy!r},"
                 f"{result.solver},{int(result.adjusted)}\n")
