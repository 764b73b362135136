"""Integral identity linking the measurable flow discrepancy to the velocity gap.

For a launch ``phi = (x, y)`` that exits after time ``ell``::

    X(ell, phi) - X0(ell, phi) = int_0^ell dX0/dphi(ell - s, X(s, phi)) (V - V0)(X(s, phi)) ds

where ``X0`` is the free flow and ``(V - V0) = (perp grad Q(a+), -perp grad Q(a-))``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .dynamics import DipoleState, ExitSolver, integrate_dipole
from .errors import CompanionHidden
from .freeflow import free_flow, free_flow_jacobian


def velocity_gap(state, Q, Q_minus=None):
    Qm = Q if Q_minus is None else Q_minus
    gp = Q.perp_grad(state.a_plus)
    gm = Qm.perp_grad(state.a_minus)
    return np.array([gp[0], gp[1], -gm[0], -gm[1]])


def _stack(state):
    return np.concatenate([state.a_plus, state.a_minus])


@dataclass
class SUTerms:
    ell: float
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def residual(self):
        return float(np.abs(self.lhs - self.rhs).max())


def su_terms(x, y, Q, domain, tol=1e-11, quad_tol=1e-10, ell=None):
    """Both sides of the identity for the launch ``(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if ell is None:
        ell = ExitSolver(Q, domain, tol=tol).run(x, y)[0]
    state0 = DipoleState(x, y)
    if ell == 0.0:
        return SUTerms(0.0, np.zeros(4), np.zeros(4))
    traj = integrate_dipole(state0, Q, ell, tol=tol, d_min=1e-4 * domain.diameter)
    lhs = _stack(traj.state(ell)) - _stack(free_flow(ell, x, y))

    def integrand(s):
        st = traj.state(s)
        J = free_flow_jacobian(ell - s, st.a_plus, st.a_minus)
        return J @ velocity_gap(st, Q)

    rhs, _ = integrate.quad_vec(integrand, 0.0, ell, epsabs=quad_tol, epsrel=0.0, limit=400)
    return SUTerms(float(ell), lhs, np.asarray(rhs))


def su_residual(x, y, Q, domain, tol=1e-11, quad_tol=1e-10):
    """Max-norm mismatch between the two sides of the identity."""
    return su_terms(x, y, Q, domain, tol, quad_tol).residual


@dataclass
class RSample:
    t: float
    R: np.ndarray
    ell: float
    exit: np.ndarray
    companion: Optional[np.ndarray]


def r_from_measurement(p, xi, m):
    """Discrepancy ``X(ell) - X0(ell)`` computed from one measurement record."""
    if m.companion is None:
        raise CompanionHidden(f"companion inside the domain for launch companion {np.asarray(xi).tolist()}")
    free = free_flow(m.tau_plus, p, xi)
    R = np.concatenate([m.exit_point - free.a_plus, m.companion - free.a_minus])
    return R


def sample_R(family, oracle, ts):
    """``RSample`` per ``t`` using only measurement-map answers.

    ``oracle.measure(x, y)`` answers the measurement map; an
    :class:`~dipolejet.dynamics.ExitSolver` qualifies.
    """
    out = []
    for t in ts:
        xi = family.xi(t)
        m = oracle.measure(family.p, xi)
        if m.tau_plus == 0.0:
            R = np.zeros(4)
        else:
            R = r_from_measurement(family.p, xi, m)
        out.append(RSample(float(t), R, m.tau_plus, m.exit_point, m.companion))
    return out
