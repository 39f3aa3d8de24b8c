# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex pivot loop; mirrors ``_kernel_py`` rule for rule."""

from libc.math cimport INFINITY

cdef int OPTIMAL = 0
cdef int UNBOUNDED = 1
cdef int ITERATION_LIMIT = 2

cdef double RATIO_EPS = 1e-12


cdef void _pivot(double[:, ::1] T, long[::1] basis, Py_ssize_t r, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t nr = T.shape[0], nc = T.shape[1], i, k
    cdef double piv = T[r, j], f
    for k in range(nc):
        T[r, k] = T[r, k] / piv
    for i in range(nr):
        if i == r:
            continue
        f = T[i, j]
        if f == 0.0:
            continue
        for k in range(nc):
            T[i, k] = T[i, k] - f * T[r, k]
    basis[r] = j


def pivot(double[:, ::1] T, long[::1] basis, Py_ssize_t r, Py_ssize_t j):
    _pivot(T, basis, r, j)


cdef Py_ssize_t _entering(double[:, ::1] T, Py_ssize_t obj_row, Py_ssize_t sec_row,
                          Py_ssize_t n_enter, double tol1, double tol2, bint bland) noexcept nogil:
    cdef Py_ssize_t k, best = -1
    cdef double v, bestv = INFINITY, d1
    for k in range(n_enter):
        v = T[obj_row, k]
        if v < -tol1:
            if bland:
                return k
            if v < bestv:
                bestv = v
                best = k
    if best >= 0:
        return best
    if sec_row < 0:
        return -1
    bestv = INFINITY
    for k in range(n_enter):
        d1 = T[obj_row, k]
        v = T[sec_row, k]
        if d1 <= tol1 and v < -tol2:
            if bland:
                return k
            if v < bestv:
                bestv = v
                best = k
    return best


cdef Py_ssize_t _leaving(double[:, ::1] T, long[::1] basis, Py_ssize_t nrows,
                         Py_ssize_t j, double piv_tol) noexcept nogil:
    cdef Py_ssize_t i, r = -1, rhs = T.shape[1] - 1
    cdef double best = INFINITY, ratio
    for i in range(nrows):
        if T[i, j] > piv_tol:
            ratio = T[i, rhs] / T[i, j]
            if ratio < best:
                best = ratio
    if best == INFINITY:
        return -1
    for i in range(nrows):
        if T[i, j] > piv_tol:
            ratio = T[i, rhs] / T[i, j]
            if ratio <= best + RATIO_EPS:
                if r < 0 or basis[i] < basis[r]:
                    r = i
    return r


def run_simplex(double[:, ::1] T, long[::1] basis, Py_ssize_t nrows, Py_ssize_t n_enter,
                Py_ssize_t obj_row, Py_ssize_t sec_row, double tol1, double tol2,
                double piv_tol, long max_iter, long bland_after):
    cdef long it = 0
    cdef Py_ssize_t j, r
    cdef int status = ITERATION_LIMIT
    with nogil:
        while it < max_iter:
            j = _entering(T, obj_row, sec_row, n_enter, tol1, tol2, it >= bland_after)
            if j < 0:
                status = OPTIMAL
                break
            r = _leaving(T, basis, nrows, j, piv_tol)
            if r < 0:
                status = UNBOUNDED
                break
            _pivot(T, basis, r, j)
            it += 1
    return status, it
