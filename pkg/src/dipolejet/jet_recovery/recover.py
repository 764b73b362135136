"""Boundary jet recovery up to order 3 from measurement-map data."""

from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from ..errors import IllConditioned
from .chart import chart_uncertainty, frame_to_chart
from .gradient import frame_gradient_samples, recover_gradient
from .model import assemble_jet, boundary_graph, fit_trace, jet_keys, jet_uncertainty
from .normal import ModelOracle, fit_normal_entries
from .tangency import BoundaryFrame, boundary_theta, build_family


@dataclass(frozen=True)
class RecoverySettings:
    rho: Optional[float] = None
    h_gradient: float = 0.01
    h_hessian: float = 0.02
    h_order3: float = 0.04
    accuracy: int = 4
    levels: int = 3
    levels_order3: int = 3
    ratio: float = 2.0
    ratio_order3: float = 2.0
    field_width: float = 0.15
    field_points: int = 21
    field_degree: int = 10
    hessian_points: int = 11
    hessian_stride: int = 3
    hessian_degree: int = 6
    epsilon: float = 1.0
    beta: float = 1.0
    delta: float = 0.5
    alpha_sign: int = 1
    rel_tol: float = 0.5
    abs_floor: float = 1e-3
    model_tol: float = 1e-12

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise KeyError(f"unknown recovery settings: {sorted(bad)}")
        return cls(**d)

    @property
    def spacing(self):
        return self.field_width / (self.field_points // 2)


class GradientField:
    """Recovered boundary gradients on an arclength grid around a base point,
    computed on demand and cached by grid index."""

    def __init__(self, domain, theta0, oracle, Q_outside, margin, settings):
        self.domain = domain
        self.theta0 = float(theta0)
        self.oracle = oracle
        self.Q_outside = Q_outside
        self.margin = margin
        self.settings = settings
        self._est = {}

    def theta(self, i):
        return self.domain.theta_at_arclength(self.theta0, i * self.settings.spacing)

    def at(self, i):
        if i not in self._est:
            st = self.settings
            p = self.domain.gamma(self.theta(i))
            self._est[i] = recover_gradient(
                p, self.domain, self.oracle, Q_outside=self.Q_outside, margin=self.margin,
                rho=st.rho, h=st.h_gradient, accuracy=st.accuracy, levels=st.levels,
                rel_tol=st.rel_tol, abs_floor=st.abs_floor)
        return self._est[i]

    def window(self, center):
        half = self.settings.field_points // 2
        return [self.at(center + j) for j in range(-half, half + 1)]

    def __len__(self):
        return len(self._est)


def gradient_traces(frame, estimates, degree, focus, min_degree=4):
    """Boundary traces of the two frame gradient components; the fit degree
    is chosen for the coefficients listed in ``focus``."""
    s, g, _ = frame_gradient_samples(frame, estimates)
    traces, unc = {}, {}
    for col, key in enumerate([(1, 0), (0, 1)]):
        traces[key], unc[key] = fit_trace(s, g[:, col], degree, min_degree, focus)
    return traces, unc


@dataclass
class HessianEstimate:
    point: np.ndarray
    matrix: np.ndarray
    uncertainty: np.ndarray
    frame_matrix: np.ndarray
    frame_uncertainty: np.ndarray
    asymmetry: float
    asymmetry_uncertainty: float
    jet: dict
    jet_uncertainty: dict
    ell_prime: float = float("nan")
    sensitivity: Optional[np.ndarray] = None


def _hessian_at(field_, center, Q_outside, settings):
    st = settings
    dom = field_.domain
    fr = BoundaryFrame(dom, field_.theta(center))
    ests = field_.window(center)
    traces, tunc = gradient_traces(fr, ests, st.field_degree, focus=(0, 1, 2))
    graph = boundary_graph(fr, 1.5 * st.field_width)
    gp = field_.at(center).grad
    fam = build_family(fr.p, gp, st.epsilon, st.beta, st.delta, st.alpha_sign, domain=dom, margin=field_.margin)
    mo = ModelOracle(fr, graph, traces, 4, Q_outside, dom, tol=st.model_tol)
    fit = fit_normal_entries(fam, field_.oracle, mo, 1, st.h_hessian, accuracy=st.accuracy, levels=st.levels, ratio=st.ratio,
                             rel_tol=st.rel_tol, abs_floor=st.abs_floor, trace_unc={k: v[:3] for k, v in tunc.items()})
    tan, _ = assemble_jet(graph, traces, 2)
    tan_u = jet_uncertainty(graph, traces, tunc, 2)
    c20, c11t = tan[(2, 0)], tan[(1, 1)]
    c02, c11n = fit.values[(0, 2)], fit.values[(1, 1)]
    u20, u11t = tan_u[(2, 0)], tan_u[(1, 1)]
    u02, u11n = fit.uncertainty[(0, 2)], fit.uncertainty[(1, 1)]
    c11 = 0.5 * (c11t + c11n)
    u11 = 0.5 * (u11t + u11n)
    Hf = np.array([[c20, c11], [c11, c02]])
    Uf = np.array([[u20, u11], [u11, u02]])
    R = fr.rotation
    H = R @ Hf @ R.T
    U = np.abs(R) @ Uf @ np.abs(R).T
    jet = {(1, 0): tan[(1, 0)], (0, 1): tan[(0, 1)], (2, 0): c20, (1, 1): c11, (0, 2): c02}
    jet_u = {(1, 0): tan_u[(1, 0)], (0, 1): tan_u[(0, 1)], (2, 0): u20, (1, 1): u11, (0, 2): u02}
    est = HessianEstimate(fr.p, H, U, Hf, Uf, abs(c11t - c11n), u11t + u11n, jet, jet_u, sensitivity=fit.sensitivity)
    return est, fr, traces, tunc, graph


def recover_hessian(p, domain, oracle, Q_outside, margin=0.0, settings=None, field=None):
    """Second derivatives of ``Q`` at the boundary point ``p``.

    The tangential row comes from the derivative of the recovered gradient
    field along the boundary, the normal entries from the third derivative of
    the model-corrected discrepancy.  The mixed entry is obtained both ways;
    their average is reported and their gap is ``asymmetry``.
    """
    settings = settings or RecoverySettings()
    if field is None:
        field = GradientField(domain, boundary_theta(domain, p), oracle, Q_outside, margin, settings)
    est = _hessian_at(field, 0, Q_outside, settings)[0]
    est.ell_prime = field.at(0).ell_prime
    return est


@dataclass
class JetEstimate:
    p: np.ndarray
    order: int
    values: dict
    uncertainties: dict
    frame_values: dict
    frame_uncertainties: dict
    diagnostics: dict = field(default_factory=dict)
    tangent: np.ndarray = None  # unit tangent of the frame at p

    def to_dict(self):
        def keyed(d):
            return {f"{j},{k}": float(v) for (j, k), v in sorted(d.items(), key=lambda kv: (sum(kv[0]), -kv[0][0]))}

        return {
            "point": [float(v) for v in self.p],
            "order": self.order,
            "values": keyed(self.values),
            "uncertainties": keyed(self.uncertainties),
            "frame_values": keyed(self.frame_values),
            "frame_uncertainties": keyed(self.frame_uncertainties),
            "diagnostics": self.diagnostics,
        }


def _jet_estimate(fr, graph, order, jet, unc, diagnostics):
    jet = {k: jet[k] for k in jet_keys(order)}
    unc = {k: unc.get(k, 0.0) for k in jet_keys(order)}
    return JetEstimate(fr.p, order, frame_to_chart(jet, graph, order), chart_uncertainty(unc, graph, order), jet, unc, diagnostics, fr.T)


def recover_jet(p, order, domain, oracle, Q_outside, margin=0.0, settings=None):
    """Jet of ``Q`` at ``p`` through ``order`` (1, 2 or 3).

    Values are partials in boundary normal coordinates at ``p``; the same
    jet in the Cartesian tangent/normal frame is kept in ``frame_values``.
    Failure at some order raises :class:`IllConditioned` whose ``partial``
    is the estimate through the previous order.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    st = settings or RecoverySettings()
    theta = boundary_theta(domain, p)
    fr = BoundaryFrame(domain, theta)
    graph = boundary_graph(fr, 1.5 * st.field_width)
    field_ = GradientField(domain, theta, oracle, Q_outside, margin, st)
    try:
        g0 = field_.at(0)
    except IllConditioned as exc:
        raise IllConditioned(f"order 1: {exc}") from exc
    gf = fr.to_frame(g0.grad)
    gu = np.abs(fr.rotation.T) @ g0.uncertainty
    diag = {
        "ell_prime": g0.ell_prime,
        "convexity": None,
        "residuals": {"companion_gradient": g0.companion_residual},
    }
    jet = {(1, 0): gf[0], (0, 1): gf[1]}
    unc = {(1, 0): gu[0], (0, 1): gu[1]}
    est1 = _jet_estimate(fr, graph, 1, jet, unc, dict(diag))
    if order == 1:
        return est1
    try:
        h0, _, traces, tunc, _ = _hessian_at(field_, 0, Q_outside, st)
    except IllConditioned as exc:
        raise IllConditioned(f"order 2: {exc}", partial=est1) from exc
    jet.update({k: h0.jet[k] for k in [(2, 0), (1, 1), (0, 2)]})
    unc.update({k: h0.jet_uncertainty[k] for k in [(2, 0), (1, 1), (0, 2)]})
    diag["residuals"]["hessian_asymmetry"] = h0.asymmetry
    diag["residuals"]["hessian_asymmetry_uncertainty"] = h0.asymmetry_uncertainty
    diag["sensitivity_order2"] = h0.sensitivity.tolist()
    est2 = _jet_estimate(fr, graph, 2, jet, unc, dict(diag))
    diag["gradient_evaluations"] = len(field_)
    if order == 2:
        est2.diagnostics = diag
        return est2
    try:
        jet3, unc3, d3 = _order3(field_, fr, graph, traces, tunc, jet, unc, Q_outside, st)
    except IllConditioned as exc:
        raise IllConditioned(f"order 3: {exc}", partial=est2) from exc
    diag.update(d3)
    diag["gradient_evaluations"] = len(field_)
    return _jet_estimate(fr, graph, 3, jet3, unc3, diag)


def _order3(field_, fr, graph, traces, tunc, jet2, unc2, Q_outside, st):
    half = st.hessian_points // 2
    centers = [st.hessian_stride * j for j in range(-half, half + 1)]
    s, n2 = [], []
    N = fr.N
    for c in centers:
        h = _hessian_at(field_, c, Q_outside, st)[0]
        s.append(fr.coords(h.point)[0])
        n2.append(N @ h.matrix @ N)
    tr, tu = gradient_traces(fr, field_.window(0), st.field_degree, focus=(0, 1, 2, 3, 4), min_degree=6)
    tr[(0, 2)], tu[(0, 2)] = fit_trace(s, n2, st.hessian_degree, min(3, st.hessian_degree), (0, 1, 2))
    fam = build_family(fr.p, fr.rotation @ np.array([jet2[(1, 0)], jet2[(0, 1)]]), st.epsilon, st.beta, st.delta,
                       st.alpha_sign, domain=field_.domain, margin=field_.margin)
    mo = ModelOracle(fr, graph, tr, 6, Q_outside, field_.domain, tol=st.model_tol)
    fit = fit_normal_entries(fam, field_.oracle, mo, 2, st.h_order3, accuracy=st.accuracy, levels=st.levels_order3, ratio=st.ratio_order3,
                             rel_tol=st.rel_tol, abs_floor=st.abs_floor,
                             trace_unc={k: v[: (3 if k == (0, 2) else 5)] for k, v in tu.items()})
    tan, _ = assemble_jet(graph, tr, 3, {(0, 3): fit.values[(0, 3)]})
    tan_u = jet_uncertainty(graph, tr, tu, 3, {(0, 3): fit.values[(0, 3)]})
    jet = dict(jet2)
    unc = dict(unc2)
    for key in [(3, 0), (2, 1)]:
        jet[key] = tan[key]
        unc[key] = tan_u[key]
    c12t, c12n = tan[(1, 2)], fit.values[(1, 2)]
    jet[(1, 2)] = 0.5 * (c12t + c12n)
    unc[(1, 2)] = 0.5 * (tan_u[(1, 2)] + fit.uncertainty[(1, 2)])
    jet[(0, 3)] = fit.values[(0, 3)]
    unc[(0, 3)] = fit.uncertainty[(0, 3)]
    diag = {
        "order3_mixed_gap": abs(c12t - c12n),
        "sensitivity_order3": fit.sensitivity.tolist(),
    }
    return jet, unc, diag

