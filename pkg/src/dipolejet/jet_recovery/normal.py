"""Higher normal derivatives at a boundary point.

The data discrepancy ``R(t)`` of an exact launch family is compared with the
discrepancy of a model dipole whose positive vortex feels a local polynomial
built from everything already recovered.  The model is run to the measured exit
times, so the mismatch does not depend on how the model would itself exit.
The lowest derivative at ``t = 0`` that the unknown normal entries reach is
``2K + 1`` for order ``K + 1``; the unknowns are fitted so that this
derivative of the mismatch vanishes.
"""

from dataclasses import dataclass, field

import numpy as np

from ..dynamics import DipoleState, integrate_dipole
from ..freeflow import free_flow
from ..errors import DipoleError, IllConditioned
from ..numdiff import one_sided_derivative
from .gradient import FamilySampler
from .model import assemble_jet, frame_polynomial


@dataclass
class NormalFit:
    values: dict
    uncertainty: dict
    sensitivity: np.ndarray
    residual: np.ndarray
    n_model_runs: int
    jet: dict = field(default_factory=dict)


class ModelOracle:
    """Model dipole flow for a given jet, stopped at prescribed times."""

    def __init__(self, frame, graph, traces, degree, Q_outside, domain, tol=1e-12):
        self.frame = frame
        self.graph = graph
        self.traces = traces
        self.degree = degree
        self.Q_outside = Q_outside
        self.domain = domain
        self.tol = tol

    def model(self, fixed, traces=None):
        jet, _ = assemble_jet(self.graph, self.traces if traces is None else traces, self.degree, fixed)
        return frame_polynomial(self.frame, jet), jet

    def discrepancy(self, model, p, xi, ell):
        """``R`` of the model dipole launched at ``(p, xi)`` after time ``ell``."""
        if ell == 0.0:
            return np.zeros(4)
        traj = integrate_dipole(DipoleState(p, xi), model, ell, tol=self.tol, d_min=1e-4 * self.domain.diameter, Q_minus=self.Q_outside)
        st = traj.state(ell)
        free = free_flow(ell, p, xi)
        return np.concatenate([st.a_plus - free.a_plus, st.a_minus - free.a_minus])


def fit_normal_entries(family, data_oracle, model_oracle, K, h, known=None, accuracy=4, levels=3, ratio=2.0, unknowns=None, iterations=2, rel_tol=0.5, abs_floor=1e-8, trace_unc=None):
    """Fit the order ``K + 1`` normal entries of the jet at ``family.p``.

    ``unknowns`` defaults to ``[(0, K + 1), (1, K)]``: the first is read from
    the tangential frame component of the ``(2K+1)``-th derivative, the second
    from the normal one.  ``known`` are further jet entries to impose.
    ``trace_unc`` maps a trace to error bars of its Taylor coefficients;
    each is pushed through the fit and added to the reported uncertainty.
    """
    m = 2 * K + 1
    if unknowns is None:
        unknowns = [(0, K + 1), (1, K)]
    known = dict(known or {})
    frame = family.frame
    data = FamilySampler(family, data_oracle)
    runs = 0

    def deriv(x, traces=None):
        nonlocal runs
        fixed = dict(known)
        fixed.update(zip(unknowns, x))
        model, jet = model_oracle.model(fixed, traces)
        runs += 1

        def mismatch(ts):
            rows = data.rows(ts)
            mod = np.array([model_oracle.discrepancy(model, family.p, family.xi(t), r[4]) for t, r in zip(ts, rows)])
            d = rows[:, :4] - mod
            return np.column_stack([d[:, :2] @ frame.T, d[:, :2] @ frame.N])

        est = one_sided_derivative(mismatch, m, h, accuracy=accuracy, levels=levels, ratio=ratio)
        return est.value[: len(unknowns)], est.uncertainty[: len(unknowns)], jet

    x = np.zeros(len(unknowns))
    base_jet, _ = assemble_jet(model_oracle.graph, model_oracle.traces, model_oracle.degree, known)
    for i, key in enumerate(unknowns):
        x[i] = base_jet.get(key, 0.0)

    def check(x, f, u, J, jet, extra=0.0):
        unc = np.abs(np.linalg.inv(J)) @ (u + np.abs(f)) + extra
        values = {key: float(v) for key, v in zip(unknowns, x)}
        fit = NormalFit(values, {key: float(v) for key, v in zip(unknowns, unc)}, J, f, runs, jet)
        scale = max(abs(v) for v in values.values())
        if np.any(unc > rel_tol * scale + abs_floor):
            raise IllConditioned(f"normal entries {values} with spread {fit.uncertainty}", partial=fit)
        return fit

    try:
        f, u, jet = deriv(x)
        step = 0.1 + np.abs(x)
        J = np.zeros((len(unknowns), len(unknowns)))
        for i in range(len(unknowns)):
            xp = x.copy()
            xp[i] += step[i]
            J[:, i] = (deriv(xp)[0] - f) / step[i]
        for _ in range(iterations):
            x = x - np.linalg.solve(J, f)
            # spread implied by the current residual before trusting a new model
            check(x, np.zeros_like(f), u, J, jet)
            f, u, jet = deriv(x)
        extra = np.zeros(len(unknowns))
        for key, errs in (trace_unc or {}).items():
            for i, e in enumerate(errs):
                if e == 0.0:
                    continue
                tr = {k: np.array(v, dtype=float) for k, v in model_oracle.traces.items()}
                tr[key][i] += e
                extra += np.abs(np.linalg.solve(J, deriv(x, tr)[0] - f))
    except DipoleError as exc:
        if isinstance(exc, IllConditioned):
            raise
        raise IllConditioned(f"entries {unknowns}: model flow failed: {exc}") from exc
    return check(x, f, u, J, jet, extra)
