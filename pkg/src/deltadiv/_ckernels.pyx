# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# Compiled batch kernels; same contract as _pykernels.py.
import math

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, INFINITY
from libc.stdio cimport snprintf
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cnp.import_array()

NAME = "cython"

DEF C_AGREE = 0
DEF C_BOTH = 1
DEF C_MIXED = 2
CASE_AGREE = C_AGREE
CASE_BOTH_NONNEG = C_BOTH
CASE_MIXED = C_MIXED


cdef inline double _kl_row(const double[:, ::1] P, const double[:, ::1] Q, Py_ssize_t r,
                           Py_ssize_t m, double ln_base) noexcept nogil:
    cdef double s = 0.0, p, q
    cdef Py_ssize_t i
    for i in range(m):
        q = Q[r, i]
        if q > 0:
            p = P[r, i]
            if p == 0:
                return INFINITY
            s += q * log(q / p)
    s /= ln_base
    return s if s > 0 else 0.0


cdef inline double _js_row(const double[:, ::1] P, const double[:, ::1] Q, Py_ssize_t r,
                           Py_ssize_t m, double ln_base) noexcept nogil:
    cdef double s = 0.0, p, q, t
    cdef Py_ssize_t i
    for i in range(m):
        p = P[r, i]
        q = Q[r, i]
        t = p + q
        if p > 0:
            s += p * log(2 * p / t)
        if q > 0:
            s += q * log(2 * q / t)
    s = 0.5 * s / ln_base
    return s if s > 0 else 0.0


def batch_measures(P, Q, double log_base_kl=math.e, bint with_kl=True, bint with_js=True):
    cdef const double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef const double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef Py_ssize_t n = Pv.shape[0], m = Pv.shape[1], r, i, w, wt
    cdef double pw, qw, pwt, qwt, a, b, d, rest, spread, tv, x, ind, first, second, half_top
    cdef double ln_kl = log(log_base_kl), ln2 = log(2.0)

    omega_a = np.empty(n, dtype=np.int64)
    omega_t_a = np.empty(n, dtype=np.int64)
    case_a = np.empty(n, dtype=np.int8)
    names = ("a", "b", "d_delta", "d_delta_def", "delta_star", "delta_max",
             "delta_max_closed", "d_tv", "clutter_tv", "clutter_delta", "d_kl", "d_kl_rev", "d_js")
    arrs = {k: np.empty(n, dtype=np.float64) for k in names}
    cdef long long[::1] o_w = omega_a
    cdef long long[::1] o_wt = omega_t_a
    cdef signed char[::1] o_case = case_a
    cdef double[::1] o_a = arrs["a"], o_b = arrs["b"], o_d = arrs["d_delta"]
    cdef double[::1] o_def = arrs["d_delta_def"], o_star = arrs["delta_star"]
    cdef double[::1] o_max = arrs["delta_max"], o_maxc = arrs["delta_max_closed"]
    cdef double[::1] o_tv = arrs["d_tv"], o_ctv = arrs["clutter_tv"], o_cd = arrs["clutter_delta"]
    cdef double[::1] o_kl = arrs["d_kl"], o_klr = arrs["d_kl_rev"], o_js = arrs["d_js"]

    with nogil:
        for r in range(n):
            w = 0
            wt = 0
            for i in range(1, m):
                if Pv[r, i] > Pv[r, w]:
                    w = i
                if Qv[r, i] > Qv[r, wt]:
                    wt = i
            pw = Pv[r, w]
            qw = Qv[r, w]
            pwt = Pv[r, wt]
            qwt = Qv[r, wt]
            a = qwt - pwt
            b = pw - qw
            o_w[r] = w
            o_wt[r] = wt
            o_a[r] = a
            o_b[r] = b

            rest = 0.0
            spread = 0.0
            tv = 0.0
            for i in range(m):
                x = Pv[r, i] - Qv[r, i]
                tv += fabs(x)
                if i != w and i != wt:
                    rest += x
                    spread += fabs(x)
            o_tv[r] = 0.5 * tv
            o_cd[r] = 0.5 * fabs(rest)
            o_ctv[r] = 0.5 * spread

            if w == wt:
                o_case[r] = C_AGREE
                d = fabs(b)
                o_def[r] = 0.5 * fabs(b) + 0.5 * fabs(rest)
                ind = 0.0
                o_maxc[r] = 0.5 * fabs(b)
            else:
                if a >= 0 and b >= 0:
                    o_case[r] = C_BOTH
                    d = a if a >= b else b
                else:
                    o_case[r] = C_MIXED
                    d = fabs(a) + fabs(b)
                o_def[r] = 0.5 * (fabs(a) + fabs(b)) + 0.5 * fabs(rest)
                ind = 1.0
                half_top = 0.5 * (pw + qwt)
                if b < 0:
                    o_maxc[r] = half_top - pwt
                elif a < 0:
                    o_maxc[r] = half_top - qw
                else:
                    o_maxc[r] = half_top - (qw if qw < pwt else pwt)
            o_d[r] = d
            o_star[r] = 0.5 * (fabs(b) + fabs(a))
            first = fabs(b) + ind * fabs(qwt - qw)
            second = fabs(a) + ind * fabs(pw - pwt)
            o_max[r] = 0.5 * (first if first >= second else second)

            if with_kl:
                o_kl[r] = _kl_row(Pv, Qv, r, m, ln_kl)
                o_klr[r] = _kl_row(Qv, Pv, r, m, ln_kl)
            if with_js:
                o_js[r] = _js_row(Pv, Qv, r, m, ln2)

    out = {"omega": omega_a, "omega_tilde": omega_t_a, "case": case_a}
    for k in names[:10]:
        out[k] = arrs[k]
    if with_kl:
        out["d_kl"] = arrs["d_kl"]
        out["d_kl_rev"] = arrs["d_kl_rev"]
    if with_js:
        out["d_js"] = arrs["d_js"]
    return out


def batch_delta(P, Q):
    cdef const double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef const double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef Py_ssize_t n = Pv.shape[0], m = Pv.shape[1], r, i, w, wt
    cdef double a, b
    res = np.empty(n, dtype=np.float64)
    cdef double[::1] o = res
    with nogil:
        for r in range(n):
            w = 0
            wt = 0
            for i in range(1, m):
                if Pv[r, i] > Pv[r, w]:
                    w = i
                if Qv[r, i] > Qv[r, wt]:
                    wt = i
            a = Qv[r, wt] - Pv[r, wt]
            b = Pv[r, w] - Qv[r, w]
            if w == wt:
                o[r] = fabs(b)
            elif a >= 0 and b >= 0:
                o[r] = a if a >= b else b
            else:
                o[r] = fabs(a) + fabs(b)
    return res


cdef extern from "_fmt17.h" nogil:
    int fmt17(char* buf, int cap, double x)


def format_rows(columns, kinds):
    """Render columns as CSV lines; see the numpy backend for ``kinds``."""
    cdef Py_ssize_t ncol = len(columns), n, r, c, j, size = 0, cap
    cdef int written
    cdef char* out
    cdef char* grown
    cdef const char* lab
    if ncol == 0:
        return ""
    n = len(columns[0])
    floats = [i for i, k in enumerate(kinds) if isinstance(k, str) and k == "f"]
    ints = [i for i, k in enumerate(kinds) if not (isinstance(k, str) and k == "f")]
    F_arr = np.empty((n, max(len(floats), 1)), dtype=np.float64)
    I_arr = np.empty((n, max(len(ints), 1)), dtype=np.int64)
    for j, i in enumerate(floats):
        F_arr[:, j] = columns[i]
    for j, i in enumerate(ints):
        I_arr[:, j] = columns[i]
    cdef const double[:, ::1] F = F_arr
    cdef const long long[:, ::1] I = I_arr
    # per column: 0 float, 1 int, 2 categorical; slot = column index within F or I
    kind_a = np.empty(ncol, dtype=np.int64)
    slot_a = np.empty(ncol, dtype=np.int64)
    label_base_a = np.zeros(ncol, dtype=np.int64)
    labels = []
    for c, k in enumerate(kinds):
        if isinstance(k, str) and k == "f":
            kind_a[c] = 0
            slot_a[c] = floats.index(c)
        else:
            slot_a[c] = ints.index(c)
            if isinstance(k, str):
                kind_a[c] = 1
            else:
                kind_a[c] = 2
                label_base_a[c] = len(labels)
                labels.extend(x.encode("ascii") for x in k)
    cdef const long long[::1] kind = kind_a
    cdef const long long[::1] slot = slot_a
    cdef const long long[::1] label_base = label_base_a
    cdef Py_ssize_t nlab = len(labels)
    cdef const char** lab_ptr = <const char**> malloc((nlab + 1) * sizeof(char*))
    cdef Py_ssize_t* lab_len = <Py_ssize_t*> malloc((nlab + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t longest = 0
    for j in range(nlab):
        lab_ptr[j] = <const char*> labels[j]
        lab_len[j] = len(labels[j])
        longest = max(longest, lab_len[j])
    cdef Py_ssize_t row_max = ncol * (32 + longest) + 2
    cap = n * row_max + 1
    out = <char*> malloc(cap)
    if out == NULL or lab_ptr == NULL or lab_len == NULL:
        free(out)
        free(lab_ptr)
        free(lab_len)
        raise MemoryError()
    try:
        with nogil:
            for r in range(n):
                for c in range(ncol):
                    if c:
                        out[size] = b','
                        size += 1
                    if kind[c] == 0:
                        size += fmt17(out + size, 32, F[r, slot[c]])
                    elif kind[c] == 1:
                        written = snprintf(out + size, 32, "%lld", I[r, slot[c]])
                        size += written
                    else:
                        j = label_base[c] + I[r, slot[c]]
                        memcpy(out + size, lab_ptr[j], lab_len[j])
                        size += lab_len[j]
                out[size] = b'\n'
                size += 1
        return out[:size].decode("ascii")
    finally:
        free(out)
        free(lab_ptr)
        free(lab_len)
