# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled back end for :mod:`hamexpr.kernels`.

Each sample is processed independently on a d x d scratch matrix that fits in
cache; gates update row pairs in place.  Qubit 0 is the most significant bit.
"""
import numpy as np

from libc.math cimport cos, sin
from libc.stdlib cimport malloc, free
from libc.string cimport memset

ctypedef double complex cplx


cdef inline void _gate(int g, const int[::1] rtype, const int[::1] slot, const double[::1] scale,
                       const cplx[:, :, ::1] fixed, const double[:, ::1] thetas, Py_ssize_t b,
                       bint adjoint, cplx* u) noexcept nogil:
    cdef int r = rtype[g]
    cdef double a, c, s
    cdef cplx tmp
    if r == 0:
        u[0] = fixed[g, 0, 0]
        u[1] = fixed[g, 0, 1]
        u[2] = fixed[g, 1, 0]
        u[3] = fixed[g, 1, 1]
    else:
        a = scale[g] * thetas[b, slot[g]]
        c = cos(0.5 * a)
        s = sin(0.5 * a)
        if r == 1:
            u[0] = c
            u[1] = -1j * s
            u[2] = -1j * s
            u[3] = c
        elif r == 2:
            u[0] = c
            u[1] = -s
            u[2] = s
            u[3] = c
        else:
            u[0] = c - 1j * s
            u[1] = 0
            u[2] = 0
            u[3] = c + 1j * s
    if adjoint:
        u[0] = u[0].conjugate()
        u[3] = u[3].conjugate()
        tmp = u[1]
        u[1] = u[2].conjugate()
        u[2] = tmp.conjugate()


cdef inline void _apply(cplx* m, int n, int d, int target, int control, const cplx* u) noexcept nogil:
    cdef int tb = 1 << (n - 1 - target)
    cdef int cb = 0
    cdef int r0, r1, col
    cdef cplx x0, x1
    cdef cplx u00 = u[0], u01 = u[1], u10 = u[2], u11 = u[3]
    cdef cplx* p0
    cdef cplx* p1
    cdef bint diag = (u01 == 0 and u10 == 0)
    if control >= 0:
        cb = 1 << (n - 1 - control)
    for r0 in range(d):
        if r0 & tb:
            continue
        if cb and not (r0 & cb):
            continue
        r1 = r0 | tb
        p0 = m + r0 * d
        p1 = m + r1 * d
        if diag:
            for col in range(d):
                p0[col] = u00 * p0[col]
                p1[col] = u11 * p1[col]
        else:
            for col in range(d):
                x0 = p0[col]
                x1 = p1[col]
                p0[col] = u00 * x0 + u01 * x1
                p1[col] = u10 * x0 + u11 * x1


cdef inline void _identity(cplx* m, int d) noexcept nogil:
    cdef int i
    memset(m, 0, d * d * sizeof(cplx))
    for i in range(d):
        m[i * d + i] = 1


cdef void _build(cplx* m, int n, int d, const int[::1] target, const int[::1] control,
                 const int[::1] rtype, const int[::1] slot, const double[::1] scale,
                 const cplx[:, :, ::1] fixed, const double[:, ::1] theta_a,
                 const double[:, ::1] theta_b, Py_ssize_t b, bint pair) noexcept nogil:
    """m <- U(theta_b[b]) or, with ``pair``, U(theta_a[b])^dagger U(theta_b[b])."""
    cdef int g
    cdef int ng = target.shape[0]
    cdef cplx u[4]
    _identity(m, d)
    for g in range(ng):
        _gate(g, rtype, slot, scale, fixed, theta_b, b, 0, u)
        _apply(m, n, d, target[g], control[g], u)
    if pair:
        for g in range(ng - 1, -1, -1):
            _gate(g, rtype, slot, scale, fixed, theta_a, b, 1, u)
            _apply(m, n, d, target[g], control[g], u)


cdef struct Sparse:
    # CSR form of every Hamiltonian, rows offset by h * (d + 1)
    int* ptr
    int* col
    cplx* val
    double* rval
    unsigned char* real


cdef int _sparse_init(Sparse* sp, const cplx[:, :, ::1] mats, int d) noexcept nogil:
    cdef int nh = mats.shape[0], h, i, j, nnz = 0
    sp.ptr = <int*> malloc(nh * (d + 1) * sizeof(int))
    sp.col = <int*> malloc(nh * d * d * sizeof(int))
    sp.val = <cplx*> malloc(nh * d * d * sizeof(cplx))
    sp.rval = <double*> malloc(nh * d * d * sizeof(double))
    sp.real = <unsigned char*> malloc(nh * sizeof(unsigned char))
    if sp.ptr == NULL or sp.col == NULL or sp.val == NULL or sp.rval == NULL or sp.real == NULL:
        return -1
    for h in range(nh):
        sp.real[h] = 1
        for i in range(d):
            sp.ptr[h * (d + 1) + i] = nnz
            for j in range(d):
                if mats[h, i, j] != 0:
                    sp.col[nnz] = j
                    sp.val[nnz] = mats[h, i, j]
                    sp.rval[nnz] = mats[h, i, j].real
                    if mats[h, i, j].imag != 0:
                        sp.real[h] = 0
                    nnz += 1
        sp.ptr[h * (d + 1) + d] = nnz
    return 0


cdef void _sparse_free(Sparse* sp) noexcept nogil:
    free(sp.ptr)
    free(sp.col)
    free(sp.val)
    free(sp.rval)
    free(sp.real)


cdef double _term(const cplx* a, int d, Sparse* sp, const double[:, ::1] diags,
                  const unsigned char[::1] is_diag, int h, cplx* ha, cplx* ah) noexcept nogil:
    """Tr[H A H A^dagger]^2 for Hamiltonian index ``h``."""
    cdef int i, j, k, p
    cdef const int* ptr = sp.ptr + h * (d + 1)
    cdef double tr = 0.0, re, im, r
    cdef cplx v
    if is_diag[h]:
        for i in range(d):
            for j in range(d):
                v = a[i * d + j]
                re = v.real
                im = v.imag
                tr += diags[h, i] * diags[h, j] * (re * re + im * im)
    else:
        memset(ha, 0, d * d * sizeof(cplx))
        memset(ah, 0, d * d * sizeof(cplx))
        # (HA)[i, j] += H[i, k] A[k, j];  (AH)[j, k] += A[j, i] H[i, k]
        if sp.real[h]:
            for i in range(d):
                for p in range(ptr[i], ptr[i + 1]):
                    k = sp.col[p]
                    r = sp.rval[p]
                    for j in range(d):
                        ha[i * d + j] = ha[i * d + j] + r * a[k * d + j]
                        ah[j * d + k] = ah[j * d + k] + r * a[j * d + i]
        else:
            for i in range(d):
                for p in range(ptr[i], ptr[i + 1]):
                    k = sp.col[p]
                    v = sp.val[p]
                    for j in range(d):
                        ha[i * d + j] = ha[i * d + j] + v * a[k * d + j]
                        ah[j * d + k] = ah[j * d + k] + a[j * d + i] * v
        for i in range(d * d):
            tr += ha[i].real * ah[i].real + ha[i].imag * ah[i].imag
    return tr * tr


def unitaries(int n, const int[::1] target, const int[::1] control, const int[::1] rtype,
              const int[::1] slot, const double[::1] scale, const cplx[:, :, ::1] fixed,
              const double[:, ::1] thetas):
    cdef Py_ssize_t nb = thetas.shape[0], b
    cdef int d = 1 << n
    out = np.empty((nb, d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] ov = out
    with nogil:
        for b in range(nb):
            _build(&ov[b, 0, 0], n, d, target, control, rtype, slot, scale, fixed, thetas, thetas, b, 0)
    return out


def pair_products(int n, const int[::1] target, const int[::1] control, const int[::1] rtype,
                  const int[::1] slot, const double[::1] scale, const cplx[:, :, ::1] fixed,
                  const double[:, ::1] theta_a, const double[:, ::1] theta_b):
    cdef Py_ssize_t nb = theta_a.shape[0], b
    cdef int d = 1 << n
    if theta_b.shape[0] != nb:
        raise ValueError("theta_a and theta_b must have the same number of rows")
    out = np.empty((nb, d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] ov = out
    with nogil:
        for b in range(nb):
            _build(&ov[b, 0, 0], n, d, target, control, rtype, slot, scale, fixed, theta_a, theta_b, b, 1)
    return out


def trace_terms(const cplx[:, :, ::1] a, const cplx[:, :, ::1] matrices, const double[:, ::1] diagonals,
                const unsigned char[::1] is_diag):
    cdef Py_ssize_t nb = a.shape[0], b
    cdef int d = a.shape[1], nh = matrices.shape[0], h
    out = np.empty((nb, nh), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Sparse sp
    cdef cplx* ha = <cplx*> malloc(d * d * sizeof(cplx))
    cdef cplx* ah = <cplx*> malloc(d * d * sizeof(cplx))
    cdef int ok = _sparse_init(&sp, matrices, d)
    try:
        if ha == NULL or ah == NULL or ok != 0:
            raise MemoryError()
        with nogil:
            for b in range(nb):
                for h in range(nh):
                    ov[b, h] = _term(&a[b, 0, 0], d, &sp, diagonals, is_diag, h, ha, ah)
    finally:
        free(ha)
        free(ah)
        _sparse_free(&sp)
    return out


def pair_terms(int n, const int[::1] target, const int[::1] control, const int[::1] rtype,
               const int[::1] slot, const double[::1] scale, const cplx[:, :, ::1] fixed,
               const double[:, ::1] theta_a, const double[:, ::1] theta_b,
               const cplx[:, :, ::1] matrices, const double[:, ::1] diagonals,
               const unsigned char[::1] is_diag):
    cdef Py_ssize_t nb = theta_a.shape[0], b
    cdef int d = 1 << n, nh = matrices.shape[0], h
    if theta_b.shape[0] != nb:
        raise ValueError("theta_a and theta_b must have the same number of rows")
    out = np.empty((nb, nh), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Sparse sp
    cdef cplx* m = <cplx*> malloc(d * d * sizeof(cplx))
    cdef cplx* ha = <cplx*> malloc(d * d * sizeof(cplx))
    cdef cplx* ah = <cplx*> malloc(d * d * sizeof(cplx))
    cdef int ok = _sparse_init(&sp, matrices, d)
    try:
        if m == NULL or ha == NULL or ah == NULL or ok != 0:
            raise MemoryError()
        with nogil:
            for b in range(nb):
                _build(m, n, d, target, control, rtype, slot, scale, fixed, theta_a, theta_b, b, 1)
                for h in range(nh):
                    ov[b, h] = _term(m, d, &sp, diagonals, is_diag, h, ha, ah)
    finally:
        free(m)
        free(ha)
        free(ah)
        _sparse_free(&sp)
    return out
