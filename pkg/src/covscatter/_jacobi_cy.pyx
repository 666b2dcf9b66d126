# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cyclic Jacobi eigensolver, compiled inner loops.

Hot kernel of the package: every covariance refit in the stability
experiments runs one full eigendecomposition. Mirrors
``covscatter._jacobi_py`` rotation-for-rotation.
"""

from libc.math cimport fabs, sqrt

BACKEND = "cython"


cdef double _offdiag_sq(double[:, ::1] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += a[i, j] * a[i, j]
    return total


cdef int _cycle(double[:, ::1] a, double[:, ::1] v, double tol_sq, int max_sweeps) nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef double apq, theta, sign, t, c, s, rp, rq
    for sweep in range(max_sweeps):
        if _offdiag_sq(a, n) <= tol_sq:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0.0 else -1.0
                t = sign / (fabs(theta) + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for i in range(n):
                    rp = a[p, i]
                    rq = a[q, i]
                    a[p, i] = c * rp - s * rq
                    a[q, i] = s * rp + c * rq
                for i in range(n):
                    rp = a[i, p]
                    rq = a[i, q]
                    a[i, p] = c * rp - s * rq
                    a[i, q] = s * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    rp = v[i, p]
                    rq = v[i, q]
                    v[i, p] = c * rp - s * rq
                    v[i, q] = s * rp + c * rq
    if _offdiag_sq(a, n) <= tol_sq:
        return max_sweeps
    return -1


def jacobi_cycle(double[:, ::1] a, double[:, ::1] v, double tol, int max_sweeps):
    """In-place cyclic Jacobi sweeps; see the NumPy backend for the contract."""
    cdef int result
    with nogil:
        result = _cycle(a, v, tol * tol, max_sweeps)
    return result
