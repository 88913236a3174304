"""Pure-Python implementations of the hot loops.

Used when the compiled ``_ckernels`` extension is unavailable, or when
``QENCBENCH_PURE=1`` is set. Every function here has the same signature and
semantics as its compiled counterpart.
"""

import math

import numpy as np

TAU = 1e-12


def _parity(values, mask):
    masked = values & mask
    if hasattr(np, "bitwise_count"):
        return (np.bitwise_count(masked) & 1).astype(np.int64)
    out = np.zeros(masked.shape, dtype=np.int64)
    while mask:
        low = mask & -mask
        out ^= (masked & low) != 0
        mask ^= low
    return out


def phase_diagonal(masks, coeffs, n_qubits):
    """Return ``phase[z] = sum_t coeffs[t] * (-1)**popcount(z & masks[t])``."""
    z = np.arange(1 << n_qubits, dtype=np.int64)
    phases = np.zeros(z.shape[0], dtype=np.float64)
    for mask, coeff in zip(np.asarray(masks).tolist(), np.asarray(coeffs).tolist()):
        phases += coeff * (1 - 2 * _parity(z, mask)).astype(np.float64)
    return phases


def anneal(linear, coupling, x0, temps, uniforms):
    """Single-spin-flip Metropolis sweeps over a QUBO.

    ``linear`` and ``coupling`` already carry the alpha weighting, so the
    energy is ``sum_i linear[i] x_i + sum_{i<j} coupling[i, j] x_i x_j``.
    One sweep visits every variable in index order; ``uniforms[s, i]`` is the
    acceptance draw for variable ``i`` in sweep ``s``. Returns the best
    assignment seen and its energy.
    """
    lin = [float(v) for v in linear]
    J = np.asarray(coupling, dtype=np.float64)
    rows = [list(map(float, r)) for r in J]
    n = len(lin)
    x = [int(v) for v in x0]
    field = [0.0] * n
    energy = 0.0
    for i in range(n):
        if x[i]:
            energy += lin[i]
            for k in range(n):
                field[k] += rows[k][i]
    for i in range(n):
        if x[i]:
            for k in range(i + 1, n):
                if x[k]:
                    energy += rows[i][k]
    best = list(x)
    best_energy = energy
    u = np.asarray(uniforms, dtype=np.float64).tolist()
    for s, temp in enumerate(np.asarray(temps, dtype=np.float64).tolist()):
        us = u[s]
        for i in range(n):
            sign = -1.0 if x[i] else 1.0
            delta = sign * (lin[i] + field[i])
            if delta <= 0.0 or us[i] < math.exp(-delta / temp):
                x[i] = 1 - x[i]
                energy += delta
                for k in range(n):
                    field[k] += sign * rows[k][i]
                if energy < best_energy:
                    best_energy = energy
                    best = list(x)
    return np.array(best, dtype=np.uint8), best_energy


def smo(K, y, C, tol, max_iter, alpha, grad):
    """Maximal-violating-pair SMO on the C-SVC dual, updating in place.

    ``alpha`` and ``grad`` are modified in place so a caller can resume from
    a previous state. Returns ``(iterations, converged)``.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pos = y > 0
    it = 0
    while it < max_iter:
        v = -y * grad
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        if not up.any() or not low.any():
            return it, True
        vu = np.where(up, v, -np.inf)
        vl = np.where(low, v, np.inf)
        i = int(np.argmax(vu))
        j = int(np.argmin(vl))
        if vu[i] - vl[j] < tol:
            return it, True

        yi, yj = y[i], y[j]
        qii, qjj, qij = K[i, i], K[j, j], yi * yj * K[i, j]
        ai_old, aj_old = alpha[i], alpha[j]
        ai, aj = ai_old, aj_old
        if yi != yj:
            quad = qii + qjj + 2.0 * qij
            if quad <= 0.0:
                quad = TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0.0:
                if aj < 0.0:
                    aj, ai = 0.0, diff
            elif ai < 0.0:
                ai, aj = 0.0, -diff
            if diff > 0.0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = qii + qjj - 2.0 * qij
            if quad <= 0.0:
                quad = TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0.0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0.0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        dai, daj = ai - ai_old, aj - aj_old
        grad += y * yi * K[:, i] * dai
        grad += y * yj * K[:, j] * daj
        it += 1
    return it, False
