"""Local polynomial models of the potential in a boundary frame.

Jet entries ``c[j, k]`` are partial derivatives ``d1^j d2^k Q(p)`` in the
tangent/normal frame at ``p``.  Given boundary traces of some partials, the
remaining entries follow from a linear solve along the boundary graph
``u2 = b(u1)``.
"""

from math import factorial

import numpy as np
from numpy.polynomial import polynomial as P

from ..potential import PolynomialPotential, _falling


def boundary_graph(frame, width, degree=10, n=81):
    """Taylor coefficients of ``u2 = b(u1)`` near ``p`` in frame coordinates."""
    dom = frame.domain
    sp = dom.speed(frame.theta)
    dth = 1.5 * width / sp
    th = frame.theta + np.linspace(-dth, dth, 4 * n)
    uv = np.array([frame.coords(dom.gamma(t)) for t in th])
    keep = np.abs(uv[:, 0]) <= width
    c = P.polyfit(uv[keep, 0], uv[keep, 1], degree)
    c[:2] = 0.0
    return c


def _fit_once(s, values, degree):
    hi, (rss, *_) = P.polyfit(s, values, degree, full=True)
    lo = np.concatenate([P.polyfit(s, values, degree - 1), [0.0]])
    dof = max(1, len(s) - degree - 1)
    sigma = np.sqrt(float(rss[0]) / dof) if len(rss) else 0.0
    # least-squares amplification of the residual noise level (2 sigma)
    V = np.vander(s, degree + 1, increasing=True)
    noise = 2.0 * sigma * np.sqrt((np.linalg.pinv(V) ** 2).sum(axis=1))
    return hi, np.abs(hi - lo) + noise


def fit_trace(s, values, degree, min_degree=None, focus=(1, 2)):
    """Taylor coefficients at ``u1 = 0`` of a boundary trace.

    The error bar per coefficient is the change from the fit one degree
    lower plus the amplification of the residual noise level.  With
    ``min_degree`` the degree in ``[min_degree, degree]`` minimising the
    error bars of the ``focus`` coefficients is used (``min_degree`` is
    capped at ``degree``).
    """
    s = np.asarray(s, dtype=float)
    values = np.asarray(values, dtype=float)
    if min_degree is None:
        return _fit_once(s, values, degree)
    best = None
    for d in range(min(min_degree, degree), degree + 1):
        c, u = _fit_once(s, values, d)
        score = sum(u[i] for i in focus if i < len(u))
        if best is None or score < best[0]:
            best = (score, c, u)
    c, u = best[1], best[2]
    pad = degree + 1 - len(c)
    return np.concatenate([c, np.zeros(pad)]), np.concatenate([u, np.zeros(pad)])


def _term_trace(j, k, a, b, graph, nmax):
    """Taylor coefficients of ``d1^a d2^b (u1^j u2^k)`` restricted to the graph."""
    fa = _falling(j, a)
    fb = _falling(k, b)
    if fa == 0 or fb == 0:
        return np.zeros(nmax + 1)
    poly = np.zeros(j - a + 1)
    poly[-1] = 1.0
    if k - b > 0:
        for _ in range(k - b):
            poly = P.polymul(poly, graph)[: nmax + 1]
    out = np.zeros(nmax + 1)
    m = min(len(poly), nmax + 1)
    out[:m] = poly[:m]
    return fa * fb * out


def jet_keys(degree):
    return [(j, n - j) for n in range(1, degree + 1) for j in range(n, -1, -1)]


def assemble_jet(graph, traces, degree, fixed=None):
    """Solve for all jet entries up to ``degree``.

    ``traces[(a, b)]`` holds Taylor coefficients of ``d1^a d2^b Q`` along the
    boundary.  Entry ``(j, 0)`` is matched to coefficient ``j - 1`` of the
    ``(1, 0)`` trace, entry ``(j, k)`` to coefficient ``j`` of the ``(0, k)``
    trace.  ``fixed`` entries are imposed; entries with no data are zero.
    Returns ``(jet, sources)``.
    """
    fixed = dict(fixed or {})
    keys = jet_keys(degree)
    idx = {key: i for i, key in enumerate(keys)}
    n = len(keys)
    A = np.zeros((n, n))
    rhs = np.zeros(n)
    sources = {}
    for key in keys:
        j, k = key
        r = idx[key]
        if key in fixed:
            A[r, r] = 1.0
            rhs[r] = fixed[key]
            sources[key] = "fixed"
            continue
        if k == 0:
            field, coef = (1, 0), j - 1
        else:
            field, coef = (0, k), j
        tr = traces.get(field)
        if tr is None or coef >= len(tr):
            A[r, r] = 1.0
            sources[key] = "zero"
            continue
        a, b = field
        for other, col in idx.items():
            jj, kk = other
            A[r, col] = _term_trace(jj, kk, a, b, graph, coef)[coef] / (factorial(jj) * factorial(kk))
        rhs[r] = tr[coef]
        sources[key] = f"trace{field}"
    c = np.linalg.solve(A, rhs)
    return {key: float(c[idx[key]]) for key in keys}, sources


def jet_uncertainty(graph, traces, trace_unc, degree, fixed=None):
    """Entrywise error bars propagated through :func:`assemble_jet` (linear)."""
    base, _ = assemble_jet(graph, traces, degree, fixed)
    total = {key: 0.0 for key in base}
    for field, unc in trace_unc.items():
        for i, u in enumerate(unc):
            if u == 0 or i >= len(traces[field]):
                continue
            tr = {f: np.array(v, dtype=float) for f, v in traces.items()}
            tr[field][i] += u
            pert, _ = assemble_jet(graph, tr, degree, fixed)
            for key in total:
                total[key] += abs(pert[key] - base[key])
    return total


def frame_polynomial(frame, jet):
    """Polynomial potential ``sum c_jk u1^j u2^k / (j! k!)`` in plane coordinates."""
    T, N = frame.T, frame.N
    lin1 = {(1, 0): T[0], (0, 1): T[1]}
    lin2 = {(1, 0): N[0], (0, 1): N[1]}
    out = {}
    for (j, k), c in jet.items():
        if c == 0.0:
            continue
        term = {(0, 0): c / (factorial(j) * factorial(k))}
        for _ in range(j):
            term = _mul(term, lin1)
        for _ in range(k):
            term = _mul(term, lin2)
        for key, v in term.items():
            out[key] = out.get(key, 0.0) + v
    return PolynomialPotential(out, center=frame.p)


def _mul(p, q):
    out = {}
    for (a, b), c in p.items():
        for (d, e), f in q.items():
            key = (a + d, b + e)
            out[key] = out.get(key, 0.0) + c * f
    return out


def frame_partial(frame, Q, x, j, k):
    """``d1^j d2^k Q(x)`` along the frame axes, from plane partials of ``Q``."""
    T, N = frame.T, frame.N
    op = {(0, 0): 1.0}
    for _ in range(j):
        op = _mul(op, {(1, 0): T[0], (0, 1): T[1]})
    for _ in range(k):
        op = _mul(op, {(1, 0): N[0], (0, 1): N[1]})
    return sum(c * Q.partial(x, a, b) for (a, b), c in op.items())


def true_frame_jet(frame, Q, order, x=None):
    """Exact jet of a known potential in the frame (an oracle for tests)."""
    x = frame.p if x is None else np.asarray(x, dtype=float)
    return {key: float(frame_partial(frame, Q, x, *key)) for key in jet_keys(order)}
