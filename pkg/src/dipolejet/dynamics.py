"""Forward integration of the dipole system and the exit-time measurement map."""

import bisect
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from . import kernels
from .errors import Collision, StepFailure, Trapped

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERR_EXP = -1.0 / 8.0


@dataclass(frozen=True)
class DipoleState:
    a_plus: np.ndarray
    a_minus: np.ndarray

    @classmethod
    def from_tuple(cls, y):
        return cls(np.array(y[:2], dtype=float), np.array(y[2:4], dtype=float))

    def as_tuple(self):
        return (float(self.a_plus[0]), float(self.a_plus[1]), float(self.a_minus[0]), float(self.a_minus[1]))

    @property
    def separation(self):
        return float(np.linalg.norm(self.a_plus - self.a_minus))


@dataclass(frozen=True)
class Measurement:
    """One record of the measurement map.

    ``companion`` is the negative vortex at the exit time when it is outside
    the domain and ``None`` otherwise.
    """

    tau_plus: float
    exit_point: np.ndarray
    companion: Optional[np.ndarray]

    @property
    def branch(self):
        return "full" if self.companion is not None else "partial"


def _packs(Q, Q_minus):
    pp = Q.kernel_pack()
    pm = pp if Q_minus is None or Q_minus is Q else Q_minus.kernel_pack()
    return pp, pm


def dipole_rhs(state, Q, d_min=0.0, Q_minus=None):
    """Velocities ``(v_plus, v_minus)``; ``Q_minus`` (default ``Q``) drives
    the negative vortex."""
    y = state.as_tuple()
    sep = math.hypot(y[0] - y[2], y[1] - y[3])
    if sep <= d_min or sep == 0.0:
        raise Collision(f"separation {sep:.3g} below floor {d_min:.3g}")
    pp, pm = _packs(Q, Q_minus)
    v = kernels.rhs(y, pp, pm)
    return np.array(v[:2]), np.array(v[2:])


class Trajectory:
    """Accepted integrator steps with an accurate continuous extension.

    ``state(s)`` re-takes one high-order step from the preceding sample, so
    interpolated values carry the integrator's own local accuracy.
    """

    def __init__(self, pplus, pminus):
        self.pplus = pplus
        self.pminus = pminus
        self.s = []
        self.y = []
        self.f = []

    def append(self, s, y, f):
        self.s.append(float(s))
        self.y.append(tuple(y))
        self.f.append(tuple(f))

    def __len__(self):
        return len(self.s)

    @property
    def s_end(self):
        return self.s[-1]

    def _locate(self, s):
        if self.s[-1] >= self.s[0]:
            i = bisect.bisect_right(self.s, s) - 1
        else:  # backward run: times decreasing
            neg = [-v for v in self.s]
            i = bisect.bisect_right(neg, -s) - 1
        return min(max(i, 0), len(self.s) - 1)

    def state_tuple(self, s):
        i = self._locate(s)
        h = s - self.s[i]
        if h == 0.0:
            return self.y[i]
        return kernels.advance(self.y[i], h, self.pplus, self.pminus)

    def state(self, s):
        return DipoleState.from_tuple(self.state_tuple(s))

    def samples(self):
        return np.array(self.s), np.array(self.y)


def _hermite(y0, f0, y1, f1, h, theta):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + theta
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return tuple(h00 * y0[n] + h10 * h * f0[n] + h01 * y1[n] + h11 * h * f1[n] for n in range(4))


def _march(y0, pplus, pminus, s_end, tol, d_min, h0=None):
    """Yield accepted steps ``(s0, y0, f0, h, y1, f1)`` up to ``s_end``."""
    direction = 1.0 if s_end >= 0 else -1.0
    span = abs(s_end)
    y = tuple(float(v) for v in y0)
    f = kernels.rhs(y, pplus, pminus)
    sep = math.hypot(y[0] - y[2], y[1] - y[3])
    if sep <= d_min:
        raise Collision(f"initial separation {sep:.3g} below floor {d_min:.3g}")
    speed = max(math.hypot(*f[:2]), math.hypot(*f[2:]), 1e-300)
    h = h0 if h0 is not None else 1e-4 * sep / speed
    h = min(h, span) if span > 0 else 0.0
    s = 0.0
    while abs(s) < span:
        h = min(h, span - abs(s))
        if h < 1e-14 * (1.0 + abs(s)):
            if span - abs(s) < 1e-13 * (1.0 + span):
                break
            raise StepFailure(f"step size underflow at s={s:.6g}")
        y1, f1, err = kernels.step(y, f, direction * h, tol, tol, pplus, pminus)
        if not math.isfinite(err):
            h *= MIN_FACTOR
            continue
        if err <= 1.0:
            fac = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err**ERR_EXP)
            sep = math.hypot(y1[0] - y1[2], y1[1] - y1[3])
            if sep <= d_min:
                raise Collision(f"separation {sep:.3g} below floor at s={s + direction * h:.6g}")
            s_new = direction * span if abs(span - (abs(s) + h)) < 1e-15 * (1 + span) else s + direction * h
            yield s, y, f, direction * h, y1, f1
            s, y, f = s_new, y1, f1
            h *= fac
        else:
            h *= max(MIN_FACTOR, SAFETY * err**ERR_EXP)


def check_tol(tol):
    if not (1e-13 <= tol <= 1e-6):
        raise ValueError(f"tol must lie in [1e-13, 1e-6], got {tol}")


def integrate_dipole(state0, Q, s_end, tol=1e-11, d_min=1e-4, Q_minus=None):
    """Integrate from ``state0`` over ``[0, s_end]`` (``s_end`` may be negative)."""
    check_tol(tol)
    pp, pm = _packs(Q, Q_minus)
    traj = Trajectory(pp, pm)
    y0 = state0.as_tuple()
    started = False
    for s0, ya, fa, h, y1, f1 in _march(y0, pp, pm, s_end, tol, d_min):
        if not started:
            traj.append(s0, ya, fa)
            started = True
        traj.append(s0 + h, y1, f1)
    if not started:
        traj.append(0.0, y0, kernels.rhs(y0, pp, pm))
    else:
        traj.s[-1] = float(s_end)
    return traj


def default_s_max(domain, x, y):
    sep = float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))
    return 10.0 * domain.diameter * math.pi * sep


class ExitSolver:
    """Measurement map ``S(x, y)`` for a fixed potential and domain.

    ``Q_minus`` optionally drives the negative vortex with a different field
    (used for model runs in which only the far field is trusted).
    """

    def __init__(self, Q, domain, tol=1e-11, d_min=None, Q_minus=None, eps_enter=1e-12, n_sub=8):
        check_tol(tol)
        self.Q = Q
        self.domain = domain
        self.tol = tol
        self.d_min = 1e-4 * domain.diameter if d_min is None else d_min
        self.pplus, self.pminus = _packs(Q, Q_minus)
        self.eps_enter = eps_enter
        self.n_sub = n_sub

    def _level_at(self, y):
        return self.domain.level((y[0], y[1]))

    def run(self, x, y, s_max=None):
        """Return ``(tau, state_at_tau)`` as plain tuples."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        y0 = (x[0], x[1], y[0], y[1])
        if s_max is None:
            s_max = default_s_max(self.domain, x, y)
        lvl = self._level_at(y0)
        if lvl < -self.eps_enter:
            return 0.0, y0
        pp, pm = self.pplus, self.pminus
        entered = lvl > self.eps_enter
        fracs = [(i + 1) / (self.n_sub + 1) for i in range(self.n_sub)] + [1.0]
        anchors = [(0.0, y0)]
        for s0, ya, fa, h, y1, f1 in _march(y0, pp, pm, s_max, self.tol, self.d_min):
            anchors = anchors[-1:] + [(s0, ya)]
            prev_s = s0
            for fr in fracs:
                if fr == 1.0:
                    yc = y1
                else:
                    yc = _hermite(ya, fa, y1, f1, h, fr)
                L = self._level_at(yc)
                sc = s0 + fr * h
                if not entered:
                    if L > self.eps_enter or L < -self.eps_enter:
                        # confirm with an accurate evaluation
                        if fr != 1.0:
                            yc = kernels.advance(ya, fr * h, pp, pm)
                            L = self._level_at(yc)
                        if L > self.eps_enter:
                            entered = True
                        elif L < -self.eps_enter:
                            return 0.0, y0
                elif L <= 0.0:
                    hit = self._refine(anchors, prev_s, sc, 9)
                    if hit is None:
                        # interpolant and exact flow disagree near the boundary
                        hit = self._refine(anchors, anchors[0][0], sc, 65)
                    if hit is not None:
                        return hit
                prev_s = sc
        raise Trapped(f"positive vortex still in the closed domain at s_max={s_max:.6g}")

    def _refine(self, anchors, sa, sb, n):
        """First inside-to-outside crossing on ``[sa, sb]``, located with exact
        re-steps from the latest accepted state ``anchors`` provides."""
        pp, pm = self.pplus, self.pminus

        def state(s):
            s_a, y_a = anchors[0]
            for s_k, y_k in anchors:
                if s_k <= s:
                    s_a, y_a = s_k, y_k
            return kernels.advance(y_a, s - s_a, pp, pm) if s != s_a else y_a

        def phi(s):
            return self._level_at(state(s))

        grid = np.linspace(sa, sb, n)
        vals = [phi(g) for g in grid]
        for i in range(len(grid) - 1):
            if vals[i] > 0.0 and vals[i + 1] <= 0.0:
                if vals[i + 1] == 0.0:
                    root = grid[i + 1]
                else:
                    root = optimize.brentq(phi, grid[i], grid[i + 1], xtol=1e-15, rtol=8.9e-16, maxiter=200)
                return float(root), state(root)
        return None

    def measure(self, x, y, s_max=None):
        tau, st = self.run(x, y, s_max)
        exit_point = np.array(st[:2])
        minus = np.array(st[2:])
        companion = None if self.domain.inside(minus) else minus
        m = Measurement(tau, exit_point, companion)
        object.__setattr__(m, "_minus", minus)
        return m


def exit_measurement(x, y, Q, domain, s_max=None, tol=1e-11, d_min=None):
    return ExitSolver(Q, domain, tol=tol, d_min=d_min).measure(x, y, s_max)
