"""Vectorized numpy versions of the batch kernels (fallback backend).

Inputs are ``(n, m)`` float64 arrays holding one distribution per row.  The
compiled backend in ``_ckernels.pyx`` exposes the same functions with the same
outputs.
"""

import math

import numpy as np

NAME = "numpy"

CASE_AGREE = 0
CASE_BOTH_NONNEG = 1
CASE_MIXED = 2


def _kl_rows(P, Q, ln_base):
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(Q > 0, Q * np.log(Q / P), 0.0)
    terms = np.where((Q > 0) & (P == 0), np.inf, terms)
    out = terms.sum(axis=1) / ln_base
    return np.maximum(out, 0.0)


def _js_rows(P, Q, ln_base):
    S = P + Q
    with np.errstate(divide="ignore", invalid="ignore"):
        tp = np.where(P > 0, P * np.log(2 * P / S), 0.0)
        tq = np.where(Q > 0, Q * np.log(2 * Q / S), 0.0)
    out = 0.5 * (tp + tq).sum(axis=1) / ln_base
    return np.maximum(out, 0.0)


def batch_measures(P, Q, log_base_kl=math.e, with_kl=True, with_js=True):
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    n, m = P.shape
    rows = np.arange(n)
    w = P.argmax(axis=1)
    wt = Q.argmax(axis=1)
    pw, qw = P[rows, w], Q[rows, w]
    pwt, qwt = P[rows, wt], Q[rows, wt]
    a = qwt - pwt
    b = pw - qw
    agree = w == wt
    both = (~agree) & (a >= 0) & (b >= 0)
    case = np.where(agree, CASE_AGREE, np.where(both, CASE_BOTH_NONNEG, CASE_MIXED)).astype(np.int8)

    d_delta = np.where(agree, np.abs(b), np.where(both, np.maximum(a, b), np.abs(a) + np.abs(b)))

    rest = np.ones((n, m), dtype=bool)
    rest[rows, w] = False
    rest[rows, wt] = False
    diff = P - Q
    rest_diff = np.where(rest, diff, 0.0)
    clutter_delta = 0.5 * np.abs(rest_diff.sum(axis=1))
    clutter_tv = 0.5 * np.abs(rest_diff).sum(axis=1)
    dom = np.where(agree, np.abs(b), np.abs(a) + np.abs(b))
    d_delta_def = 0.5 * dom + clutter_delta
    d_tv = 0.5 * np.abs(diff).sum(axis=1)

    delta_star = 0.5 * (np.abs(b) + np.abs(a))
    ind = np.where(agree, 0.0, 1.0)
    first = np.abs(b) + ind * np.abs(qwt - qw)
    second = np.abs(a) + ind * np.abs(pw - pwt)
    delta_max = 0.5 * np.maximum(first, second)
    half_top = 0.5 * (pw + qwt)
    closed_dis = np.where(
        b < 0, half_top - pwt, np.where(a < 0, half_top - qw, half_top - np.minimum(qw, pwt))
    )
    delta_max_closed = np.where(agree, 0.5 * np.abs(b), closed_dis)

    out = {
        "omega": w.astype(np.int64),
        "omega_tilde": wt.astype(np.int64),
        "case": case,
        "a": a,
        "b": b,
        "d_delta": d_delta,
        "d_delta_def": d_delta_def,
        "delta_star": delta_star,
        "delta_max": delta_max,
        "delta_max_closed": delta_max_closed,
        "d_tv": d_tv,
        "clutter_tv": clutter_tv,
        "clutter_delta": clutter_delta,
    }
    if with_kl:
        ln = math.log(log_base_kl)
        out["d_kl"] = _kl_rows(P, Q, ln)
        out["d_kl_rev"] = _kl_rows(Q, P, ln)
    if with_js:
        out["d_js"] = _js_rows(P, Q, math.log(2.0))
    return out


def batch_delta(P, Q):
    """Delta divergence closed form only, one value per row."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    rows = np.arange(P.shape[0])
    w = P.argmax(axis=1)
    wt = Q.argmax(axis=1)
    a = Q[rows, wt] - P[rows, wt]
    b = P[rows, w] - Q[rows, w]
    return np.where(
        w == wt,
        np.abs(b),
        np.where((a >= 0) & (b >= 0), np.maximum(a, b), np.abs(a) + np.abs(b)),
    )


def format_rows(columns, kinds):
    """Render columns as CSV lines.

    ``kinds`` holds one code per column: ``"i"`` integer, ``"f"`` float printed
    with 17 significant digits, or a tuple of labels for a column of integer
    category codes.
    """
    rendered = []
    for col, kind in zip(columns, kinds):
        if kind == "i":
            rendered.append([str(int(x)) for x in col])
        elif kind == "f":
            rendered.append(["%.17g" % x for x in col.tolist()])
        else:
            rendered.append([kind[int(x)] for x in col])
    return "".join(",".join(row) + "\n" for row in zip(*rendered))
