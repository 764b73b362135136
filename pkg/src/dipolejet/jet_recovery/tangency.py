"""Tangent launches: closed-form companion placement, data-driven tangency
search, launch families and the exit-time slope."""

import math
from dataclasses import dataclass

import numpy as np

from ..dynamics import DipoleState, integrate_dipole
from ..errors import DegenerateVelocity, NonpositiveSlope, NoTransitionFound, XiInsideTildeOmega
from ..numdiff import limit_at_zero, one_sided_derivative


def xi_for_velocity(p, v, gradQ_p):
    """Companion position making the positive vortex at ``p`` start with velocity ``v``.

    Solves ``v = (p - xi)^perp / (pi |p - xi|^2) + perp grad Q(p)`` in closed
    form: ``xi = p + w^perp / (pi |w|^2)`` with ``w = v - perp grad Q(p)``.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    g = np.asarray(gradQ_p, dtype=float)
    w = v - np.array([g[1], -g[0]])
    w2 = float(w.dot(w))
    if w2 == 0.0:
        raise DegenerateVelocity("requested velocity equals the potential drift")
    return p + np.array([w[1], -w[0]]) / (math.pi * w2)


class BoundaryFrame:
    """Tangent/inward-normal frame at ``domain.gamma(theta)``."""

    def __init__(self, domain, theta):
        self.domain = domain
        self.theta = float(theta)
        self.p, self.T, self.N = domain.frame(theta)

    def to_plane(self, v):
        return v[0] * self.T + v[1] * self.N

    def to_frame(self, v):
        v = np.asarray(v, dtype=float)
        return np.array([v.dot(self.T), v.dot(self.N)])

    def coords(self, x):
        return self.to_frame(np.asarray(x, dtype=float) - self.p)

    @property
    def rotation(self):
        """Columns are the frame axes in plane coordinates."""
        return np.column_stack([self.T, self.N])


class TangentFamily:
    """One-parameter launch family: ``a+`` at ``p``, ``a-`` at ``xi(t)``."""

    def __init__(self, frame):
        self.frame = frame
        self.p = frame.p

    def xi(self, t):
        raise NotImplementedError


class ArcFamily(TangentFamily):
    """Companion rotated along a circle of radius ``rho`` about ``p``.

    ``psi`` is measured from the outward normal towards the tangent;
    ``t`` is the angular offset from the tangent launch ``psi0``.
    """

    def __init__(self, frame, rho, psi0, sign=1.0):
        super().__init__(frame)
        self.rho = float(rho)
        self.psi0 = float(psi0)
        self.sign = float(sign)

    def xi_at_angle(self, psi):
        d = -math.cos(psi) * self.frame.N + math.sin(psi) * self.frame.T
        return self.p + self.rho * d

    def xi(self, t):
        return self.xi_at_angle(self.psi0 + self.sign * t)


class ExactFamily(TangentFamily):
    """Launch family with chart velocity ``eps (alpha(t), beta t)``,
    ``alpha(t) = alpha_sign sqrt(1 - beta^2 t^2)``."""

    def __init__(self, frame, gradQ_p, epsilon, beta, delta, alpha_sign=1):
        super().__init__(frame)
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if beta == 0 or abs(beta) * delta >= 1:
            raise ValueError("need beta != 0 and |beta| delta < 1")
        self.gradQ_p = np.asarray(gradQ_p, dtype=float)
        self.epsilon = float(epsilon)
        self.beta = float(beta)
        self.delta = float(delta)
        self.alpha_sign = 1.0 if alpha_sign >= 0 else -1.0

    def alpha(self, t):
        return self.alpha_sign * math.sqrt(1.0 - (self.beta * t) ** 2)

    def velocity(self, t):
        """Launch velocity of ``a+`` in plane coordinates."""
        return self.frame.to_plane(self.epsilon * np.array([self.alpha(t), self.beta * t]))

    def xi(self, t):
        return xi_for_velocity(self.p, self.velocity(t), self.gradQ_p)


def boundary_theta(domain, p):
    """Boundary parameter of a point on (or numerically near) the boundary."""
    return float(domain.theta_of(domain.nearest_boundary_point(np.asarray(p, dtype=float))))


def build_family(p, gradQ_p, epsilon=1.0, beta=1.0, delta=0.5, alpha_sign=1, *, domain, margin=0.0, n_check=33):
    """Exact launch family at the boundary point ``p``; every companion launch
    position on ``[0, delta)`` is checked to lie outside the enlarged domain."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    frame = BoundaryFrame(domain, boundary_theta(domain, p))
    fam = ExactFamily(frame, gradQ_p, epsilon, beta, delta, alpha_sign)
    for t in np.linspace(0.0, delta, n_check, endpoint=False):
        xi = fam.xi(t)
        if domain.distance_outside(xi) <= margin:
            raise XiInsideTildeOmega(f"xi({t:.3g}) = {xi.tolist()} lies within the enlarged domain")
    return fam


def _enters(oracle, p, xi):
    return oracle.measure(p, xi).tau_plus > 0.0


@dataclass
class TangencyResult:
    xi0: np.ndarray
    psi0: float
    family: ArcFamily
    bisection_width: float


def find_tangent_xi_from_data(p, domain, oracle, rho=None, margin=0.0, psi_range=None, tol=1e-10, refine=True):
    """Locate the tangent launch from measurements only.

    Companion candidates lie on the circle of radius ``rho`` about ``p``.
    The entering (``tau > 0``) / non-entering transition is bracketed and
    bisected; with ``refine`` the root of the exit time, extrapolated from
    the entering side, replaces the bisection midpoint.  ``psi`` is the angle
    of ``xi - p`` from the outward normal towards the tangent.
    """
    frame = BoundaryFrame(domain, boundary_theta(domain, p))
    if rho is None:
        rho = default_arc_radius(domain, margin)
    fam = ArcFamily(frame, rho, 0.0)
    p = frame.p
    if psi_range is None:
        grid = np.linspace(-0.49 * math.pi, 0.49 * math.pi, 99)
        ok = [psi for psi in grid if domain.distance_outside(fam.xi_at_angle(psi)) > margin]
        if not ok:
            raise NoTransitionFound("no admissible companion positions on the scan arc")
        lo, hi = min(ok), max(ok)
    else:
        lo, hi = psi_range
    scan = np.linspace(lo, hi, 33)
    states = [_enters(oracle, p, fam.xi_at_angle(psi)) for psi in scan]
    a = b = None
    for i in range(len(scan) - 1):
        if not states[i] and states[i + 1]:
            a, b = scan[i], scan[i + 1]
            break
    if a is None:
        raise NoTransitionFound("scan arc has no enter/leave transition")
    while b - a > tol:
        mid = 0.5 * (a + b)
        if _enters(oracle, p, fam.xi_at_angle(mid)):
            b = mid
        else:
            a = mid
    psi0 = 0.5 * (a + b)
    if refine:
        psi0 = _refine_by_exit_time(oracle, fam, b, scale=min(1e-3, 0.25 * (hi - b)))
    out = ArcFamily(frame, rho, psi0)
    return TangencyResult(out.xi(0.0), psi0, out, b - a)


def _refine_by_exit_time(oracle, fam, psi_in, scale):
    offs = scale * np.arange(1, 7)
    taus = np.array([oracle.measure(fam.p, fam.xi_at_angle(psi_in + d)).tau_plus for d in offs])
    if np.any(taus <= 0):
        return psi_in
    c = np.polynomial.polynomial.polyfit(offs, taus, 4)
    roots = np.polynomial.polynomial.polyroots(c)
    real = [r.real for r in roots if abs(r.imag) < 1e-12 and abs(r.real) < scale]
    if not real:
        return psi_in
    return psi_in + min(real, key=abs)


def default_arc_radius(domain, margin):
    return max(3.0 * margin, 0.25 * domain.min_curvature_radius)


def check_convexity(p, Q, domain, epsilon=1.0, xi=None, tol=1e-12, h=None, levels=5):
    """Second derivative at ``s = 0`` of the signed distance of ``a+`` along
    a tangent launch at ``p`` (speed ``epsilon`` unless ``xi`` is given).
    A negative value certifies strict convexity w.r.t. ``Q`` at ``p``."""
    frame = BoundaryFrame(domain, boundary_theta(domain, p))
    p = frame.p
    if xi is None:
        xi = xi_for_velocity(p, epsilon * frame.T, Q.grad(p))
    xi = np.asarray(xi, dtype=float)
    state0 = DipoleState(p, xi)
    if h is None:
        h = 0.02 * domain.min_curvature_radius * math.pi * float(np.linalg.norm(xi - p))
    traj = integrate_dipole(state0, Q, h, tol=tol)

    def ratio(ss):
        return np.array([2.0 * domain.project_to_boundary(traj.state(s).a_plus)[1] / s**2 for s in ss])

    return float(limit_at_zero(ratio, h, levels=levels).value)


def estimate_ell_prime(family, oracle, h, accuracy=4, levels=3):
    """One-sided, Richardson-extrapolated ``ell'(0)`` of the family.

    Also checks that ``ell(t) / t`` settles at the two smallest nodes; it
    doubles per halving when the exit time does not vanish at ``t = 0``
    (a launch that grazes a non-convex point and travels on).
    """
    seen = {}

    def ells(ts):
        out = []
        for t in ts:
            if t not in seen:
                seen[t] = 0.0 if t == 0 else oracle.measure(family.p, family.xi(t)).tau_plus
            out.append(seen[t])
        return np.array(out)

    est = one_sided_derivative(ells, 1, h, accuracy=accuracy, levels=levels)
    if not est.value > 0:
        raise NonpositiveSlope(f"estimated ell'(0) = {float(est.value):.3g} is not positive")
    t1, t2 = sorted(t for t in seen if t > 0)[:2]
    r1, r2 = seen[t1] / t1, seen[t2] / t2
    if abs(r1 - r2) > 0.25 * max(r1, r2):
        raise NonpositiveSlope(f"exit time does not vanish as t -> 0 (ell/t = {r1:.3g} at t={t1:.3g}, {r2:.3g} at t={t2:.3g})")
    return est
