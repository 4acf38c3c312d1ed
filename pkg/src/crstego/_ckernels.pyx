# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; semantics are identical to ``_pykernels``."""

import numpy as np
from libc.math cimport INFINITY

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

ctypedef unsigned long long u64
ctypedef long long i64

cdef enum:
    OK = 0
    PADDING_EXHAUSTED = 1
    PRECISION_COLLAPSE = 2


def embed_symbols(const i64[:, ::1] cum, const unsigned char[::1] bits, int beta, int gamma):
    cdef Py_ssize_t n = cum.shape[0]
    cdef Py_ssize_t k = cum.shape[1] - 1
    cdef Py_ssize_t nbits = bits.shape[0]
    sym_arr = np.zeros(n, dtype=np.int32)
    cdef int[::1] sym = sym_arr
    if n == 0:
        return sym_arr, 0, OK
    if nbits < beta:
        return sym_arr, 0, PADDING_EXHAUSTED
    cdef u128 one = 1
    cdef u128 half = one << (beta - 1)
    cdef u128 q1 = half >> 1
    cdef u128 q3 = half + q1
    cdef u128 low = 0
    cdef u128 high = (one << beta) - 1
    cdef u128 q = 0
    cdef u128 width, top, bot, off
    cdef Py_ssize_t pos, i, s
    cdef int status = OK
    for pos in range(beta):
        q = (q << 1) | bits[pos]
    pos = beta
    with nogil:
        for i in range(n):
            width = high - low + 1
            s = 0
            top = 0
            while s < k:
                if cum[i, s + 1] != cum[i, s]:
                    top = low + ((width * <u128>cum[i, s + 1]) >> gamma)
                    if q < top:
                        break
                s += 1
            bot = low + ((width * <u128>cum[i, s]) >> gamma)
            if top <= bot:
                status = PRECISION_COLLAPSE
                break
            low = bot
            high = top - 1
            sym[i] = <int>s
            while True:
                if high < half:
                    off = 0
                elif low >= half:
                    off = half
                elif low >= q1 and high < q3:
                    off = q1
                else:
                    break
                if pos >= nbits:
                    status = PADDING_EXHAUSTED
                    break
                low = (low - off) << 1
                high = ((high - off) << 1) | 1
                q = ((q - off) << 1) | bits[pos]
                pos += 1
            if status != OK:
                break
    return sym_arr, pos - beta, status


def extract_bits(const i64[:, ::1] cum, const int[::1] symbols, int beta, int gamma, i64 limit):
    cdef Py_ssize_t n = cum.shape[0]
    cdef bint store = limit >= 0
    out_arr = np.zeros(limit if store else 0, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef u128 one = 1
    cdef u128 half = one << (beta - 1)
    cdef u128 q1 = half >> 1
    cdef u128 q3 = half + q1
    cdef u128 low = 0
    cdef u128 high = (one << beta) - 1
    cdef u128 width, bot, top, off
    cdef i64 follow = 0
    cdef i64 count = 0
    cdef i64 j
    cdef int s, bit
    cdef int status = OK
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            s = symbols[i]
            width = high - low + 1
            bot = low + ((width * <u128>cum[i, s]) >> gamma)
            top = low + ((width * <u128>cum[i, s + 1]) >> gamma)
            if top <= bot:
                status = PRECISION_COLLAPSE
                break
            low = bot
            high = top - 1
            while True:
                if high < half:
                    off = 0
                    bit = 0
                elif low >= half:
                    off = half
                    bit = 1
                elif low >= q1 and high < q3:
                    follow += 1
                    low = (low - q1) << 1
                    high = ((high - q1) << 1) | 1
                    continue
                else:
                    break
                if store:
                    if count < limit:
                        out[count] = bit
                    for j in range(1, follow + 1):
                        if count + j < limit:
                            out[count + j] = 1 - bit
                count += 1 + follow
                follow = 0
                low = (low - off) << 1
                high = ((high - off) << 1) | 1
            if store and count >= limit:
                break
    if store:
        return out_arr, min(count, limit), status
    return out_arr, count, status


def stc_viterbi(const unsigned char[::1] x, const double[::1] rho, const u64[::1] colmask,
                const unsigned char[::1] block_end, const unsigned char[::1] msg, int h):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nstates = 1 << h
    cdef Py_ssize_t nbytes = (nstates + 7) >> 3
    path_arr = np.zeros((n, nbytes), dtype=np.uint8)
    cdef unsigned char[:, ::1] path = path_arr
    w_arr = np.full(nstates, INFINITY)
    nw_arr = np.empty(nstates)
    cdef double[::1] w = w_arr
    cdef double[::1] nw = nw_arr
    cdef double[::1] tmp
    cdef double c0, c1, a, bb
    cdef Py_ssize_t i, s, blk = 0
    cdef u64 c
    cdef int mb
    y_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] y = y_arr
    w[0] = 0.0
    with nogil:
        for i in range(n):
            c = colmask[i]
            if x[i]:
                c0 = rho[i]
                c1 = 0.0
            else:
                c0 = 0.0
                c1 = rho[i]
            for s in range(nstates):
                a = w[s] + c0
                bb = w[s ^ c] + c1
                if bb < a:
                    nw[s] = bb
                    path[i, s >> 3] |= <unsigned char>(1 << (s & 7))
                else:
                    nw[s] = a
            tmp = w
            w = nw
            nw = tmp
            if block_end[i]:
                mb = msg[blk]
                for s in range(nstates >> 1):
                    nw[s] = w[(s << 1) | mb]
                for s in range(nstates >> 1, nstates):
                    nw[s] = INFINITY
                tmp = w
                w = nw
                nw = tmp
                blk += 1
    cost = w[0]
    if cost == INFINITY:
        return y_arr, float(cost)
    s = 0
    for i in range(n - 1, -1, -1):
        if block_end[i]:
            blk -= 1
            s = (s << 1) | msg[blk]
        if path[i, s >> 3] & (1 << (s & 7)):
            y[i] = 1
            s ^= colmask[i]
    return y_arr, float(cost)
