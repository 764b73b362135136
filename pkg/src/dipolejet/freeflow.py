"""Closed-form dipole flow under the zero potential and its Jacobian."""

import math

import numpy as np

from .dynamics import DipoleState
from .errors import Collision


def interaction_velocity(x, y):
    """Shared velocity ``(x - y)^perp / (pi |x - y|^2)`` of a free dipole."""
    d1 = x[0] - y[0]
    d2 = x[1] - y[1]
    r2 = d1 * d1 + d2 * d2
    if r2 == 0.0:
        raise Collision("coincident vortices")
    return np.array([d2, -d1]) / (math.pi * r2)


def _velocity_jacobian(x, y):
    d1 = x[0] - y[0]
    d2 = x[1] - y[1]
    r2 = d1 * d1 + d2 * d2
    if r2 == 0.0:
        raise Collision("coincident vortices")
    c = 1.0 / (math.pi * r2 * r2)
    a = -2.0 * d1 * d2 * c
    b = (d1 * d1 - d2 * d2) * c
    return np.array([[a, b], [b, -a]])


def free_flow(s, x, y):
    """State after time ``s`` of the dipole launched from ``(x, y)`` with Q = 0.

    Both vortices translate rigidly with the interaction velocity.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = interaction_velocity(x, y)
    return DipoleState(x + s * w, y + s * w)


def free_flow_jacobian(s, x, y):
    """4x4 derivative of ``free_flow(s, .)`` with respect to ``(x1, x2, y1, y2)``."""
    W = s * _velocity_jacobian(x, y)
    I = np.eye(2)
    return np.block([[I + W, -W], [W, I - W]])


def free_flow_jacobian_ds(x, y):
    """Time derivative of :func:`free_flow_jacobian` (independent of ``s``)."""
    W = _velocity_jacobian(x, y)
    return np.block([[W, -W], [W, -W]])
