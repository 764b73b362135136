"""Conversion of a frame jet to boundary normal coordinates.

The chart map ``x(z1, z2) = gamma(z1) + z2 N(z1)`` is expanded as a
truncated bivariate power series in frame coordinates and composed with the
frame Taylor polynomial, so the conversion is exact up to the jet order.
"""

from math import factorial

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import binom

from .model import jet_keys


def _trunc(c, n):
    out = np.zeros(n + 1)
    c = np.asarray(c, dtype=float)[: n + 1]
    out[: len(c)] = c
    return out


def _compose1(outer, inner, n):
    """Series of ``outer(inner(z))`` for ``inner(0) = 0``, truncated at ``z^n``."""
    out = np.zeros(n + 1)
    power = _trunc([1.0], n)
    for a in outer[: n + 1]:
        out += a * power
        power = _trunc(P.polymul(power, inner), n)
    return out


def _inv_sqrt_one_plus(x, n):
    """``(1 + x)^(-1/2)`` for a series ``x`` with zero constant term."""
    coeffs = np.array([binom(-0.5, i) for i in range(n + 1)])
    return _compose1(coeffs, x, n)


def _revert(f, n):
    """Series inverse of ``f`` with ``f(0) = 0, f'(0) != 0``."""
    g = _trunc([0.0, 1.0 / f[1]], n)
    for m in range(2, n + 1):
        err = _compose1(_trunc(f, n), g, n)
        g[m] -= err[m] / f[1]
    return g


def chart_map_series(graph, n):
    """Frame coordinates ``(u1, u2)`` of the chart point ``(z1, z2)`` as two
    2D coefficient arrays ``[a, b] ~ z1^a z2^b``, total degree ``<= n``."""
    b = _trunc(graph, n + 1)
    db = P.polyder(b)
    w = _inv_sqrt_one_plus(_trunc(P.polymul(db, db), n), n)  # 1/sqrt(1+b'^2) in u1
    # arclength z1(u1) = int sqrt(1+b'^2); sqrt(1+x) = (1+x) / sqrt(1+x)
    sq = _trunc(P.polymul(_trunc(P.polyadd([1.0], P.polymul(db, db)), n), w), n)
    z_of_u = _trunc(P.polyint(sq), n)
    u_of_z = _revert(z_of_u, n)
    X1 = np.zeros((n + 1, n + 1))
    X2 = np.zeros((n + 1, n + 1))
    X1[:, 0] = u_of_z
    X2[:, 0] = _compose1(b, u_of_z, n)
    # unit inward normal in frame coordinates: (-b', 1) / sqrt(1+b'^2)
    n1 = _compose1(_trunc(-P.polymul(db, w), n), u_of_z, n)
    n2 = _compose1(w, u_of_z, n)
    X1[: n, 1] = n1[:n]
    X2[: n, 1] = n2[:n]
    return X1, X2


def _mul2(A, B, n):
    out = np.zeros((n + 1, n + 1))
    for a in range(n + 1):
        for b in range(n + 1 - a):
            if A[a, b] == 0:
                continue
            for c in range(n + 1 - a):
                for d in range(n + 1 - a - b - c):
                    out[a + c, b + d] += A[a, b] * B[c, d]
    return out


def frame_to_chart(jet, graph, order):
    """Chart-coordinate partials ``d_{z1}^j d_{z2}^k Q(p)`` from a frame jet."""
    n = order
    X1, X2 = chart_map_series(graph, n)
    one = np.zeros((n + 1, n + 1))
    one[0, 0] = 1.0
    pw1 = [one]
    pw2 = [one]
    for _ in range(n):
        pw1.append(_mul2(pw1[-1], X1, n))
        pw2.append(_mul2(pw2[-1], X2, n))
    total = np.zeros((n + 1, n + 1))
    for (j, k), c in jet.items():
        if j + k > n or c == 0.0:
            continue
        total += c / (factorial(j) * factorial(k)) * _mul2(pw1[j], pw2[k], n)
    return {(j, k): float(total[j, k] * factorial(j) * factorial(k)) for (j, k) in jet_keys(order)}


def chart_uncertainty(unc, graph, order):
    """Entrywise bound for the linear map :func:`frame_to_chart`."""
    keys = jet_keys(order)
    out = {key: 0.0 for key in keys}
    for key in keys:
        u = unc.get(key, 0.0)
        if u == 0.0:
            continue
        col = frame_to_chart({key: 1.0}, graph, order)
        for k2 in keys:
            out[k2] += abs(col[k2]) * u
    return out
