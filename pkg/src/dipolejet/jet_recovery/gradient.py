"""First-order recovery: the boundary gradient from slopes of the flow discrepancy."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import IllConditioned, NonpositiveSlope
from ..numdiff import one_sided_derivative
from ..su_identity import sample_R
from .tangency import find_tangent_xi_from_data


class FamilySampler:
    """Caches ``(R, ell)`` per parameter value for one family."""

    def __init__(self, family, oracle):
        self.family = family
        self.oracle = oracle
        self._cache = {}

    def rows(self, ts):
        need = [t for t in ts if t not in self._cache]
        for s in sample_R(self.family, self.oracle, [t for t in need if t != 0.0]):
            self._cache[s.t] = np.concatenate([s.R, [s.ell]])
        if 0.0 in need:
            self._cache[0.0] = np.zeros(5)
        return np.array([self._cache[t] for t in ts])

    @property
    def n_evaluations(self):
        return len(self._cache)


@dataclass
class GradientEstimate:
    point: np.ndarray
    theta: float
    grad: np.ndarray
    uncertainty: np.ndarray
    ell_prime: float
    xi0: np.ndarray
    companion_limit: np.ndarray
    companion_residual: float = math.nan

    def frame_grad(self, frame):
        return frame.to_frame(self.grad)


def recover_gradient(p, domain, oracle, Q_outside=None, margin=0.0, rho=None, h=0.01, accuracy=4, levels=3, rel_tol=0.5, abs_floor=1e-8):
    """``grad Q`` at the boundary point ``p`` from measurement-map data only.

    The tangent companion position is found by bisection on an arc; the
    ratio of ``R'(0)`` to ``ell'(0)`` along the arc family gives
    ``perp grad Q(p)`` in its first block.  When ``Q_outside`` is known the
    second block is compared with ``-perp grad Q(xi0)`` and the mismatch is
    added to the uncertainty.
    """
    tang = find_tangent_xi_from_data(p, domain, oracle, rho, margin=margin)
    sampler = FamilySampler(tang.family, oracle)
    d = one_sided_derivative(sampler.rows, 1, h, accuracy=accuracy, levels=levels)
    lp, lp_unc = float(d.value[4]), float(d.uncertainty[4])
    if not lp > 0:
        raise NonpositiveSlope(f"ell'(0) estimate {lp:.3g} is not positive")
    lim = d.value[:4] / lp
    unc = d.uncertainty[:4] / lp + np.abs(lim) * lp_unc / lp
    gp = lim[:2]
    grad = np.array([-gp[1], gp[0]])
    gunc = np.array([unc[1], unc[0]])
    resid = math.nan
    if Q_outside is not None:
        resid = float(np.abs(lim[2:] + Q_outside.perp_grad(tang.xi0)).max())
        gunc = gunc + resid
    scale = float(np.abs(grad).max())
    if np.any(gunc > rel_tol * scale + abs_floor):
        raise IllConditioned(f"gradient spread {gunc.tolist()} too large", partial=grad)
    return GradientEstimate(tang.family.p, tang.family.frame.theta, grad, gunc, lp, tang.xi0, lim[2:], resid)


def recover_gradient_field(points, domain, oracle, **kw):
    """:func:`recover_gradient` at each boundary point, in order."""
    return [recover_gradient(p, domain, oracle, **kw) for p in points]


def frame_gradient_samples(frame, estimates):
    """Tangential coordinate and frame-components of recovered gradients."""
    s = np.array([frame.coords(e.point)[0] for e in estimates])
    g = np.array([frame.to_frame(e.grad) for e in estimates])
    u = np.array([np.abs(frame.rotation.T) @ e.uncertainty for e in estimates])
    return s, g, u

