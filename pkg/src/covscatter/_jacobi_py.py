"""Cyclic Jacobi eigensolver, NumPy implementation.

Fallback backend used when the compiled extension is unavailable. The
rotation formulas mirror ``covscatter._jacobi_cy`` one-for-one so both
backends agree to floating-point roundoff.
"""

import math

import numpy as np

BACKEND = "numpy"


def _offdiag_sq(a):
    # summed directly; subtracting the diagonal mass from the total would
    # cancel catastrophically once the off-diagonal part is tiny
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.sum(off * off))


def jacobi_cycle(a, v, tol, max_sweeps):
    """Run cyclic Jacobi sweeps in place on ``a``, accumulating rotations in ``v``.

    ``a`` must be symmetric; on success its diagonal holds the (unsorted)
    eigenvalues and the columns of ``v`` the matching eigenvectors. Returns
    the number of sweeps performed, or -1 if the off-diagonal Frobenius norm
    is still above ``tol`` after ``max_sweeps``.
    """
    n = a.shape[0]
    tol_sq = tol * tol
    for sweep in range(max_sweeps):
        if _offdiag_sq(a) <= tol_sq:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0.0 else -1.0
                t = sign / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return max_sweeps if _offdiag_sq(a) <= tol_sq else -1
