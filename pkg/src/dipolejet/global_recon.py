"""Global reconstruction of ``Q`` on the enlarged domain from one boundary jet.

The recovered jet at a boundary point ``p`` defines a Taylor polynomial of
``Q`` (without constant term) in Cartesian coordinates; its gradient is
integrated along straight segments starting on the outer boundary of the
enlarged domain, where ``Q`` is known.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np
from scipy import integrate

from .dynamics import ExitSolver
from .errors import DipoleError, IllConditioned, SegmentLeavesValidity
from .geometry import tilde_omega_margin, vec
from .jet_recovery.model import frame_polynomial
from .jet_recovery.recover import recover_jet
from .potential import gradient_bound


@dataclass
class GradientModel:
    p: np.ndarray
    order: int
    poly: object  # PolynomialPotential centred at p, zero constant term
    validity_radius: float = math.inf

    def grad(self, x):
        return self.poly.grad(x)

    def covers(self, x, slack=1e-12):
        return float(np.linalg.norm(vec(x) - self.p)) <= self.validity_radius + slack


def taylor_gradient_model(jet, validity_radius=math.inf):
    """Truncated Taylor polynomial of ``grad Q`` at ``jet.p``.

    Uses the Cartesian frame jet, so the model reproduces polynomial
    potentials of degree ``<= jet.order`` exactly.
    """
    T = np.asarray(jet.tangent, dtype=float)
    frame = SimpleNamespace(p=np.asarray(jet.p, dtype=float), T=T, N=np.array([-T[1], T[0]]))
    poly = frame_polynomial(frame, jet.frame_values)
    return GradientModel(np.asarray(jet.p, dtype=float), jet.order, poly, float(validity_radius))


def _segment_integral(model, a, b, quad_tol):
    a, b = vec(a), vec(b)
    d = b - a
    if not d.any():
        return 0.0
    for x in (a, b):
        if not model.covers(x):
            raise SegmentLeavesValidity(f"segment end {x.tolist()} outside validity radius {model.validity_radius}")
    # the validity region is a disk, so checking the ends covers the segment
    val, _ = integrate.quad(lambda t: float(model.grad(a + t * d) @ d), 0.0, 1.0, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    return float(val)


def path_integrate_Q(model, Q_outside, x, z, quad_tol=1e-10, via=None):
    """``Q(z) + int grad Q . dgamma`` along ``z -> x`` (or ``z -> via -> x``)."""
    q = float(Q_outside(vec(z)))
    if via is None:
        return q + _segment_integral(model, z, x, quad_tol)
    return q + _segment_integral(model, z, via, quad_tol) + _segment_integral(model, via, x, quad_tol)


def tilde_anchor(domain, margin, x):
    """Nearest point of the outer boundary of the enlarged domain."""
    x = vec(x)
    y = domain.nearest_boundary_point(x)
    n = domain.g_grad(y)
    return y + margin * n / np.linalg.norm(n)


def in_tilde(domain, margin, x):
    return domain.distance_outside(x) <= margin


def tilde_grid(domain, margin, n):
    """``n x n`` grid over the bounding box of the enlarged domain, keeping
    only points inside it."""
    x0, x1, y0, y1 = domain.bbox()
    xs = np.linspace(x0 - margin, x1 + margin, n)
    ys = np.linspace(y0 - margin, y1 + margin, n)
    pts = [np.array([a, b]) for b in ys for a in xs]
    return np.array([q for q in pts if in_tilde(domain, margin, q)])


def path_independence(model, Q_outside, domain, margin, x, quad_tol=1e-10, offset=0.25):
    """Difference between the straight path and a broken path to ``x``."""
    z = tilde_anchor(domain, margin, x)
    d = vec(x) - z
    w = 0.5 * (vec(x) + z) + offset * np.array([-d[1], d[0]])
    a = path_integrate_Q(model, Q_outside, x, z, quad_tol)
    b = path_integrate_Q(model, Q_outside, x, z, quad_tol, via=w)
    return abs(a - b)


@dataclass
class Reconstruction:
    points: np.ndarray
    q_est: np.ndarray
    q_true: np.ndarray
    margin: float
    jet: object
    failures: list = field(default_factory=list)

    @property
    def abs_err(self):
        return np.abs(self.q_est - self.q_true)

    def stats(self):
        ok = np.isfinite(self.q_est)
        err = self.abs_err[ok]
        scale = float(np.abs(self.q_true).max()) if len(self.q_true) else 0.0
        sup = float(err.max()) if err.size else math.nan
        return {
            "n_points": int(len(self.points)),
            "n_failed": int((~ok).sum()),
            "sup_abs_error": sup,
            "rms_error": float(np.sqrt(np.mean(err**2))) if err.size else math.nan,
            "max_abs_q": scale,
            "sup_rel_error": sup / scale if scale > 0 else math.nan,
        }


def reconstruct_global(domain, Q, p, order=2, sigma=0.1, grid_n=50, settings=None, ode_tol=1e-12, quad_tol=1e-10, validity_radius=math.inf, threads=1, oracle=None):
    """Recover the jet at ``p``, continue it by Taylor series and integrate
    over a grid of the enlarged domain.  ``Q`` is used for the simulated
    measurements, for the known exterior values and for scoring only."""
    margin = tilde_omega_margin(gradient_bound(Q, domain), sigma)
    if oracle is None:
        oracle = ExitSolver(Q, domain, tol=ode_tol)
    failures = []
    try:
        jet = recover_jet(p, order, domain, oracle, Q, margin=margin, settings=settings)
    except IllConditioned as e:
        if e.partial is None:
            raise
        failures.append({"stage": "jet", "error": str(e)})
        jet = e.partial
    model = taylor_gradient_model(jet, validity_radius)
    pts = tilde_grid(domain, margin, grid_n)

    def one(x):
        try:
            return path_integrate_Q(model, Q, x, tilde_anchor(domain, margin, x), quad_tol), None
        except DipoleError as e:
            return math.nan, {"point": x.tolist(), "error": f"{type(e).__name__}: {e}"}

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            res = list(ex.map(one, pts))
    else:
        res = [one(x) for x in pts]
    q_est = np.array([r[0] for r in res])
    failures += [r[1] for r in res if r[1] is not None]
    q_true = np.array([float(Q(x)) for x in pts])
    return Reconstruction(pts, q_est, q_true, margin, jet, failures)
