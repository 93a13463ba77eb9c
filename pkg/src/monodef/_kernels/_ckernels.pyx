# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled order kernels; same contract as ``_pykernels``.

Rows cross the boundary as Python ints and are packed into ``uint64``
word matrices for the inner loops.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

BACKEND = "cython"


cdef inline Py_ssize_t _words(Py_ssize_t n):
    return (n + 63) >> 6 if n > 0 else 1


cdef inline int _ctz(uint64_t x):
    cdef int c = 0
    while not (x & 1):
        x >>= 1
        c += 1
    return c


def _pack(rows, Py_ssize_t n):
    cdef Py_ssize_t w = _words(n)
    cdef Py_ssize_t nbytes = w * 8
    buf = b"".join([r.to_bytes(nbytes, "little") for r in rows])
    return np.frombuffer(buf, dtype=np.uint64).reshape(n, w).copy()


def _unpack(cnp.ndarray[uint64_t, ndim=2] mat):
    return [int.from_bytes(mat[i].tobytes(), "little") for i in range(mat.shape[0])]


def iter_bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def closure(succ):
    cdef Py_ssize_t n = len(succ)
    if n == 0:
        return []
    cdef cnp.ndarray[uint64_t, ndim=2] m = _pack(succ, n)
    cdef uint64_t[:, ::1] a = m
    cdef Py_ssize_t w = a.shape[1]
    cdef Py_ssize_t i, k, t, kw
    cdef uint64_t kb
    for k in range(n):
        kw = k >> 6
        kb = (<uint64_t>1) << (k & 63)
        for i in range(n):
            if a[i, kw] & kb:
                for t in range(w):
                    a[i, t] |= a[k, t]
    for i in range(n):
        if a[i, i >> 6] & ((<uint64_t>1) << (i & 63)):
            # rare path: let the reference kernel name the cycle
            from ._pykernels import closure as _ref
            _ref(succ)
            raise ValueError([i, i])
    return _unpack(m)


def transpose(rows):
    cdef Py_ssize_t n = len(rows)
    if n == 0:
        return []
    cdef cnp.ndarray[uint64_t, ndim=2] m = _pack(rows, n)
    cdef uint64_t[:, ::1] a = m
    cdef cnp.ndarray[uint64_t, ndim=2] o = np.zeros_like(m)
    cdef uint64_t[:, ::1] b = o
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            if (a[i, j >> 6] >> (j & 63)) & 1:
                b[j, i >> 6] |= (<uint64_t>1) << (i & 63)
    return _unpack(o)


def order_violation(up):
    cdef Py_ssize_t n = len(up)
    if n == 0:
        return None
    cdef cnp.ndarray[uint64_t, ndim=2] m = _pack(up, n)
    cdef uint64_t[:, ::1] a = m
    cdef Py_ssize_t w = a.shape[1]
    cdef Py_ssize_t i, j, t
    cdef uint64_t extra
    for i in range(n):
        if (a[i, i >> 6] >> (i & 63)) & 1:
            return ("irreflexive", (i,))
        for j in range(n):
            if (a[i, j >> 6] >> (j & 63)) & 1:
                for t in range(w):
                    extra = a[j, t] & ~a[i, t]
                    if extra:
                        k = t * 64 + _ctz(extra)
                        return ("transitive", (i, j, k))
    return None


def mub_table(up, down, pairs):
    cdef Py_ssize_t n = len(up)
    if n == 0:
        return [0 for _ in pairs]
    cdef uint64_t[:, ::1] u = _pack(up, n)
    cdef uint64_t[:, ::1] d = _pack(down, n)
    cdef Py_ssize_t w = u.shape[1]
    cdef cnp.ndarray[uint64_t, ndim=1] cm = np.zeros(w, dtype=np.uint64)
    cdef cnp.ndarray[uint64_t, ndim=1] om = np.zeros(w, dtype=np.uint64)
    cdef uint64_t[::1] common = cm
    cdef uint64_t[::1] res = om
    cdef Py_ssize_t i, j, t, z, s
    cdef uint64_t word
    cdef bint minimal
    out = []
    for pair in pairs:
        i = pair[0]
        j = pair[1]
        for t in range(w):
            common[t] = u[i, t] & u[j, t]
            res[t] = 0
        for t in range(w):
            word = common[t]
            while word:
                z = t * 64 + _ctz(word)
                word &= word - 1
                minimal = True
                for s in range(w):
                    if d[z, s] & common[s]:
                        minimal = False
                        break
                if minimal:
                    res[z >> 6] |= (<uint64_t>1) << (z & 63)
        out.append(int.from_bytes(om.tobytes(), "little"))
    return out


def mub_bits(up, down, Py_ssize_t i, Py_ssize_t j):
    return mub_table(up, down, [(i, j)])[0]
