# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Signatures mirror :mod:`qencbench._pykernels` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, INFINITY

cnp.import_array()

cdef double TAU = 1e-12


cdef inline int _parity(unsigned long long v) nogil:
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return <int>(v & 1)


def phase_diagonal(const long long[:] masks, const double[:] coeffs, int n_qubits):
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t n_terms = masks.shape[0]
    out = np.zeros(dim, dtype=np.float64)
    cdef double[:] phases = out
    cdef Py_ssize_t z, t
    cdef double acc
    with nogil:
        for z in range(dim):
            acc = 0.0
            for t in range(n_terms):
                if _parity(<unsigned long long>(z & masks[t])):
                    acc -= coeffs[t]
                else:
                    acc += coeffs[t]
            phases[z] = acc
    return out


def anneal(const double[:] linear, const double[:, :] coupling,
           const unsigned char[:] x0, const double[:] temps,
           const double[:, :] uniforms):
    cdef Py_ssize_t n = linear.shape[0]
    cdef Py_ssize_t n_sweeps = temps.shape[0]
    cdef Py_ssize_t s, i, k
    cdef double energy = 0.0, best_energy, delta, temp, sign
    x_arr = np.array(x0, dtype=np.uint8, copy=True)
    best_arr = x_arr.copy()
    field_arr = np.zeros(n, dtype=np.float64)
    cdef unsigned char[:] x = x_arr
    cdef unsigned char[:] best = best_arr
    cdef double[:] field = field_arr

    with nogil:
        for i in range(n):
            if x[i]:
                energy += linear[i]
                for k in range(n):
                    field[k] += coupling[k, i]
        for i in range(n):
            if x[i]:
                for k in range(i + 1, n):
                    if x[k]:
                        energy += coupling[i, k]
        best_energy = energy
        for s in range(n_sweeps):
            temp = temps[s]
            for i in range(n):
                if x[i]:
                    sign = -1.0
                else:
                    sign = 1.0
                delta = sign * (linear[i] + field[i])
                if delta <= 0.0 or uniforms[s, i] < exp(-delta / temp):
                    x[i] = 1 - x[i]
                    energy += delta
                    for k in range(n):
                        field[k] += sign * coupling[k, i]
                    if energy < best_energy:
                        best_energy = energy
                        for k in range(n):
                            best[k] = x[k]
    return best_arr, best_energy


def smo(const double[:, :] K, const double[:] y, double C, double tol,
        long long max_iter, double[:] alpha, double[:] grad):
    cdef Py_ssize_t n = K.shape[0]
    cdef Py_ssize_t t, i, j
    cdef long long it = 0
    cdef double gmax, gmin, v, yi, yj, qii, qjj, qij, quad, delta, diff, total
    cdef double ai_old, aj_old, dai, daj
    cdef bint converged = False

    with nogil:
        while it < max_iter:
            gmax = -INFINITY
            gmin = INFINITY
            i = -1
            j = -1
            for t in range(n):
                v = -y[t] * grad[t]
                if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                    if v > gmax:
                        gmax = v
                        i = t
                if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                    if v < gmin:
                        gmin = v
                        j = t
            if i < 0 or j < 0 or gmax - gmin < tol:
                converged = True
                break

            yi = y[i]
            yj = y[j]
            qii = K[i, i]
            qjj = K[j, j]
            qij = yi * yj * K[i, j]
            ai_old = alpha[i]
            aj_old = alpha[j]
            if yi != yj:
                quad = qii + qjj + 2.0 * qij
                if quad <= 0.0:
                    quad = TAU
                delta = (-grad[i] - grad[j]) / quad
                diff = alpha[i] - alpha[j]
                alpha[i] += delta
                alpha[j] += delta
                if diff > 0.0:
                    if alpha[j] < 0.0:
                        alpha[j] = 0.0
                        alpha[i] = diff
                else:
                    if alpha[i] < 0.0:
                        alpha[i] = 0.0
                        alpha[j] = -diff
                if diff > 0.0:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = C - diff
                else:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = C + diff
            else:
                quad = qii + qjj - 2.0 * qij
                if quad <= 0.0:
                    quad = TAU
                delta = (grad[i] - grad[j]) / quad
                total = alpha[i] + alpha[j]
                alpha[i] -= delta
                alpha[j] += delta
                if total > C:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = total - C
                else:
                    if alpha[j] < 0.0:
                        alpha[j] = 0.0
                        alpha[i] = total
                if total > C:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = total - C
                else:
                    if alpha[i] < 0.0:
                        alpha[i] = 0.0
                        alpha[j] = total

            dai = alpha[i] - ai_old
            daj = alpha[j] - aj_old
            for t in range(n):
                grad[t] += y[t] * yi * K[t, i] * dai
                grad[t] += y[t] * yj * K[t, j] * daj
            it += 1
    return it, bool(converged)
