"""One-sided finite-difference stencils and Richardson extrapolation."""

from dataclasses import dataclass
from math import factorial

import numpy as np


def fd_weights(nodes, m):
    """Weights ``w`` with ``sum w_i f(nodes_i) ~ f^(m)(0)`` (Fornberg-style
    Vandermonde solve; exact for polynomials of degree < len(nodes))."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if m >= n:
        raise ValueError("need more nodes than the derivative order")
    V = np.vander(nodes, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[m] = factorial(m)
    return np.linalg.solve(V, rhs)


def stencil_nodes(m, accuracy):
    """Integer node offsets ``0..m+accuracy-1`` of a forward stencil."""
    return np.arange(m + accuracy, dtype=float)


@dataclass
class Extrapolated:
    value: np.ndarray
    uncertainty: np.ndarray
    levels: list

    def relative_spread(self):
        v = np.abs(np.asarray(self.value))
        return np.asarray(self.uncertainty) / np.where(v > 0, v, 1.0)


def richardson(estimates, ratio, first_power):
    """Richardson table for estimates at steps ``h, h/ratio, h/ratio^2, ...``.

    Each level removes the next power of ``h``.  Returns the most refined
    value and, as uncertainty, the largest distance between it and the most
    refined entry of any earlier level.
    """
    T = [np.asarray(e, dtype=float) for e in estimates]
    table = [T]
    p = first_power
    while len(T) > 1:
        fac = ratio**p
        T = [T[i + 1] + (T[i + 1] - T[i]) / (fac - 1.0) for i in range(len(T) - 1)]
        table.append(T)
        p += 1
    best = table[-1][0]
    if len(table) > 1:
        unc = np.max([np.abs(best - t[-1]) for t in table[:-1]], axis=0)
    else:
        unc = np.full_like(best, np.inf)
    return Extrapolated(best, unc, [t[-1] for t in table])


def one_sided_derivative(sample, m, h, accuracy=4, levels=3, ratio=2.0):
    """``m``-th derivative at 0 of a function known on ``t >= 0``.

    ``sample(ts)`` must return an array of values, one row per node.
    A forward stencil of the given accuracy order is applied at step sizes
    ``h, h/ratio, ...`` and combined by Richardson extrapolation.
    """
    nodes = stencil_nodes(m, accuracy)
    w = fd_weights(nodes, m)
    hs = [h / ratio**i for i in range(levels)]
    ts = sorted({float(round(k * hh, 15)) for hh in hs for k in nodes})
    vals = dict(zip(ts, np.asarray(sample(np.array(ts)))))
    ests = []
    for hh in hs:
        rows = np.array([vals[float(round(k * hh, 15))] for k in nodes])
        ests.append(np.tensordot(w, rows, axes=(0, 0)) / hh**m)
    return richardson(ests, ratio, accuracy)


def limit_at_zero(sample, h, levels=4, ratio=2.0):
    """Extrapolate ``lim_{t->0+} F(t)`` from ``F`` on a geometric grid,
    assuming ``F`` is smooth at 0."""
    hs = np.array([h / ratio**i for i in range(levels)])
    vals = np.asarray(sample(hs))
    return richardson(list(vals), ratio, 1)
