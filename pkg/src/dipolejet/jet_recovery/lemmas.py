"""Simulator-side checks of the small-t limits behind the jet recovery.

For a launch family, ``g_k(t) = d^k/dt^k perp grad Q(a+(s; t))`` is taken at
fixed ``s`` and then evaluated at ``s = ell(t)``.  Its ``eta``-th derivative
at ``t = 0`` is compared with closed forms:

* ``eta = 0``: the limit vanishes;
* ``eta = k``: after removing the terms computable from lower-order data,
  the remainder is ``k! (eps beta ell'(0))^k d_N^k perp grad Q(p)``;
* ``0 < eta < k``: the value does not change when ``Q`` inside the domain
  is altered at order ``k + 1`` only (the companion keeps the original field).
"""

from dataclasses import dataclass, field
from itertools import product
from math import factorial

import numpy as np
from numpy.polynomial import polynomial as P

from ..dynamics import DipoleState, ExitSolver, integrate_dipole
from ..errors import IllConditioned
from ..numdiff import fd_weights, limit_at_zero, one_sided_derivative
from ..potential import SumPotential
from .model import frame_polynomial
from .tangency import ExactFamily, estimate_ell_prime

INNER_STEP = {1: 1e-4, 2: 1e-3, 3: 3e-3}


@dataclass
class LemmaCheck:
    k: int
    eta: int
    numeric: np.ndarray
    prediction: np.ndarray
    discrepancy: float
    details: dict = field(default_factory=dict)


def _dF(Q, p, vecs):
    """``D^m F(p)[v1, ..., vm]`` for ``F = perp grad Q``."""
    out = np.zeros(2)
    for idx in product((0, 1), repeat=len(vecs)):
        w = 1.0
        for v, i in zip(vecs, idx):
            w *= v[i]
        if w == 0.0:
            continue
        a = idx.count(0)
        b = len(idx) - a
        out += w * np.array([Q.partial(p, a, b + 1), -Q.partial(p, a + 1, b)])
    return out


def _dF_poly(Q, p, polys, deg):
    """Multilinear form with polynomial-vector arguments (arrays ``2 x deg+1``)."""
    out = np.zeros((2, deg + 1))
    for idx in product((0, 1), repeat=len(polys)):
        c = np.zeros(deg + 1)
        c[0] = 1.0
        for poly, i in zip(polys, idx):
            c = P.polymul(c, poly[i])[: deg + 1]
            c = np.concatenate([c, np.zeros(deg + 1 - len(c))])
        if not c.any():
            continue
        a = idx.count(0)
        b = len(idx) - a
        out[0] += c * Q.partial(p, a, b + 1)
        out[1] -= c * Q.partial(p, a + 1, b)
    return out


# d^k/dt^k F(a(t)) as sums of coefficient * D^m F[a_{j1}, ..., a_{jm}]
_FAA = {
    1: [(1, (1,))],
    2: [(1, (1, 1)), (1, (2,))],
    3: [(1, (1, 1, 1)), (3, (1, 2)), (1, (3,))],
}


class _FlowSampler:
    def __init__(self, family, Q, domain, k, delta, tol, Q_minus=None):
        self.family = family
        self.Q = Q
        self.Q_minus = Q_minus
        self.exit = ExitSolver(Q, domain, tol=tol, Q_minus=Q_minus)
        self.k = k
        self.delta = delta
        self.tol = tol
        self.d_min = 1e-4 * domain.diameter
        self.nodes = np.arange(-3, 4, dtype=float)
        self._cache = {}

    def _positions(self, t, s):
        out = []
        for j in self.nodes:
            tt = t + j * self.delta
            st = DipoleState(self.family.p, self.family.xi(tt))
            traj = integrate_dipole(st, self.Q, s, tol=self.tol, d_min=self.d_min, Q_minus=self.Q_minus)
            out.append(traj.state(s).a_plus)
        return np.array(out)

    def row(self, t):
        """``[g_k, c - p, a_1, ..., a_k]`` flattened, at ``s = ell(t)``."""
        if t in self._cache:
            return self._cache[t]
        p = self.family.p
        if t == 0.0:
            pos = np.tile(p, (len(self.nodes), 1))
            s = 0.0
        else:
            s = self.exit.run(p, self.family.xi(t))[0]
            pos = self._positions(t, s)
        ders = [fd_weights(self.nodes, r) @ pos / self.delta**r for r in range(1, self.k + 1)]
        Fs = np.array([self.Q.perp_grad(x) for x in pos])
        g = fd_weights(self.nodes, self.k) @ Fs / self.delta**self.k
        c = pos[3] - p
        out = np.concatenate([g, c] + ders)
        self._cache[t] = out
        return out

    def rows(self, ts):
        return np.array([self.row(float(t)) for t in ts])


def _series_value(Q, p, coeffs, k, eta):
    """``eta``-th derivative at 0 of the Faa di Bruno expansion built from
    Taylor data ``coeffs[r] = d^r/dt^r [c - p, a_1..a_k]`` (r = 0..eta)."""
    deg = eta
    n = 2 * (k + 1)
    series = np.zeros((n, deg + 1))
    for r in range(deg + 1):
        series[:, r] = coeffs[r] / factorial(r)
    cpoly = series[0:2]
    apoly = {j: series[2 * j: 2 * j + 2] for j in range(1, k + 1)}
    total = np.zeros((2, deg + 1))
    lead = np.zeros(2)
    for mult, js in _FAA[k]:
        args = [apoly[j] for j in js]
        # expand D^m F(c(t)) around p
        for q in range(deg + 1):
            term = _dF_poly(Q, p, args + [cpoly] * q, deg) / factorial(q)
            total += mult * term
    if eta == k:
        u1 = coeffs[1][2:4]
        lead = factorial(k) * _dF(Q, p, [u1] * k)
    return total[:, eta] * factorial(eta), lead


def _alt_potential(family, Q, k, amplitude):
    jet = {(0, k + 1): amplitude * factorial(k + 1)}
    return SumPotential([Q, frame_polynomial(family.frame, jet)])


def lemma_limits_check(k, eta, family, Q, domain, h=None, accuracy=4, levels=3, tol=1e-13, inner_step=None, Q_alt=None, ell_h=0.01):
    """Numeric small-t limit of ``d^eta/dt^eta g_k`` and its closed form.

    The default base step ``h = 0.04 / ell'(0)`` keeps the longest sampled
    exit time near 0.04 whatever the entry slope of the family.
    """
    if not 1 <= k <= 3 or not 0 <= eta <= k:
        raise ValueError("need 1 <= k <= 3 and 0 <= eta <= k")
    if not isinstance(family, ExactFamily):
        raise TypeError("lemma checks need an exact launch family")
    ellp = float(estimate_ell_prime(family, ExitSolver(Q, domain, tol=tol), ell_h).value)
    if h is None:
        h = min(0.02, 0.04 / ellp)
    delta = INNER_STEP[k] if inner_step is None else inner_step
    samp = _FlowSampler(family, Q, domain, k, delta, tol)
    if eta == 0:
        lim = limit_at_zero(lambda ts: samp.rows(ts)[:, :2], h, levels=levels + 1)
        val = np.asarray(lim.value)
        return LemmaCheck(k, 0, val, np.zeros(2), float(np.abs(val).max()), {"uncertainty": lim.uncertainty.tolist()})
    if eta < k:
        if Q_alt is None:
            Q_alt = _alt_potential(family, Q, k, 0.05)
        # the companion lives outside the domain, where both potentials agree
        alt = _FlowSampler(family, Q_alt, domain, k, delta, tol, Q_minus=Q)
        a = one_sided_derivative(lambda ts: samp.rows(ts)[:, :2], eta, h, accuracy=accuracy, levels=levels)
        b = one_sided_derivative(lambda ts: alt.rows(ts)[:, :2], eta, h, accuracy=accuracy, levels=levels)
        unc = a.uncertainty + b.uncertainty
        diff = float(np.abs(a.value - b.value).max())
        # below the numerical resolution the relative measure is meaningless
        scale = max(float(np.abs(a.value).max()), float(np.abs(b.value).max()), float(unc.max()), 1e-300)
        details = {"uncertainty": unc.tolist(), "abs_difference": diff, "within_uncertainty": bool(diff <= 2 * float(unc.max()))}
        return LemmaCheck(k, eta, np.asarray(a.value), np.asarray(b.value), diff / scale, details)
    # eta == k: leading coefficient after known-term subtraction
    coeffs = [np.zeros(2 * (k + 1))]
    for r in range(1, eta + 1):
        d = one_sided_derivative(lambda ts: samp.rows(ts)[:, 2:], r, h, accuracy=accuracy, levels=levels)
        coeffs.append(np.asarray(d.value))
    direct = one_sided_derivative(lambda ts: samp.rows(ts)[:, :2], eta, h, accuracy=accuracy, levels=levels)
    series, lead = _series_value(Q, family.p, coeffs, k, eta)
    known = series - lead
    numeric = np.asarray(direct.value) - known
    e = family.epsilon * family.beta * ellp
    prediction = factorial(k) * e**k * _dF(Q, family.p, [family.frame.N] * k)
    scale = float(np.abs(prediction).max())
    if scale == 0.0:
        raise IllConditioned("leading term vanishes for this potential; relative check undefined")
    disc = float(np.abs(numeric - prediction).max()) / scale
    details = {
        "ell_prime": ellp,
        "direct": np.asarray(direct.value).tolist(),
        "known_terms": known.tolist(),
        "series_total": series.tolist(),
        "uncertainty": np.asarray(direct.uncertainty).tolist(),
    }
    return LemmaCheck(k, eta, numeric, prediction, disc, details)
