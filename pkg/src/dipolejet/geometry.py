"""Convex planar domains, boundary projection and boundary normal charts.

Points are length-2 numpy arrays (or anything indexable as such).  The
boundary of every domain is parametrized counterclockwise by an angle-like
parameter ``theta``; the inward unit normal is the tangent rotated by +90
degrees.
"""

import math

import numpy as np
from scipy import integrate, optimize

from .errors import NoUniqueProjection


def vec(x):
    return np.asarray(x, dtype=float).reshape(2)


def perp(v):
    """``v^perp = (v2, -v1)``."""
    return np.array([v[1], -v[0]], dtype=float)


def tilde_omega_margin(M, sigma):
    """Thickness of the enlarged domain: ``min(1/(4 pi M), sigma)``."""
    if M < 0 or sigma <= 0:
        raise ValueError("need M >= 0 and sigma > 0")
    if M == 0:
        return float(sigma)
    return min(1.0 / (4.0 * math.pi * M), float(sigma))


class ConvexDomain:
    """Smooth strictly convex domain ``{g < 0}``.

    Subclasses provide the implicit function ``g`` with its first two
    derivatives, the boundary parametrization and its first derivative.
    """

    kind = "abstract"
    n_scan = 720
    boundary_eps = 1e-13

    def __init__(self, witness):
        self.witness = vec(witness)
        thetas = np.linspace(0.0, 2 * math.pi, self.n_scan, endpoint=False)
        self._scan_thetas = thetas
        self._scan_points = np.array([self.gamma(t) for t in thetas])
        kappas = np.array([self.curvature(t) for t in thetas])
        if np.any(kappas <= 0):
            raise ValueError(f"{self.kind} domain is not strictly convex")
        self.min_curvature_radius = float(1.0 / kappas.max())
        self.tube_radius = 0.5 * self.min_curvature_radius
        d = self._scan_points[:, None, :] - self._scan_points[None, :, :]
        self.diameter = float(np.sqrt((d**2).sum(-1)).max())

    # -- subclass interface -------------------------------------------------
    def g(self, x):
        raise NotImplementedError

    def g_grad(self, x):
        raise NotImplementedError

    def g_hess(self, x):
        raise NotImplementedError

    def gamma(self, theta):
        raise NotImplementedError

    def dgamma(self, theta):
        raise NotImplementedError

    def theta_of(self, y):
        """Parameter of a boundary point ``y``."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    # -- derived geometry ---------------------------------------------------
    def curvature(self, theta):
        y = self.gamma(theta)
        gx, gy = self.g_grad(y)
        H = self.g_hess(y)
        num = H[0, 0] * gy * gy - 2 * H[0, 1] * gx * gy + H[1, 1] * gx * gx
        return float(num / math.hypot(gx, gy) ** 3)

    def level(self, x):
        """Cheap signed level function: positive inside, zero on the boundary,
        first-order accurate signed distance near the boundary."""
        gr = self.g_grad(x)
        n = math.hypot(gr[0], gr[1])
        if n == 0.0:  # critical point of g, e.g. the centre
            return -math.copysign(math.inf, self.g(x))
        return -self.g(x) / n

    def inside(self, x):
        """Strict interior; points within round-off of the boundary are not
        interior (``level`` must exceed ``boundary_eps``)."""
        return self.level(vec(x)) > self.boundary_eps

    def tangent(self, theta):
        t = self.dgamma(theta)
        return t / math.hypot(t[0], t[1])

    def inward_normal(self, theta):
        t = self.tangent(theta)
        return np.array([-t[1], t[0]])

    def speed(self, theta):
        t = self.dgamma(theta)
        return math.hypot(t[0], t[1])

    def arclength(self, theta_a, theta_b):
        """Signed arclength from ``theta_a`` to ``theta_b`` (counterclockwise
        positive)."""
        if theta_a == theta_b:
            return 0.0
        val, _ = integrate.quad(self.speed, theta_a, theta_b, epsabs=1e-14, epsrel=1e-13, limit=200)
        return float(val)

    def _scan_nearest(self, x):
        d2 = ((self._scan_points - x) ** 2).sum(axis=1)
        i = int(np.argmin(d2))
        return self._scan_thetas[i]

    def _foot_newton(self, x, y0):
        y = np.array(y0, dtype=float)
        for _ in range(60):
            g = self.g(y)
            gr = self.g_grad(y)
            H = self.g_hess(y)
            r = x - y
            F = np.array([g, r[0] * gr[1] - r[1] * gr[0]])
            J = np.array(
                [
                    [gr[0], gr[1]],
                    [-gr[1] + r[0] * H[1, 0] - r[1] * H[0, 0], r[0] * H[1, 1] + gr[0] - r[1] * H[0, 1]],
                ]
            )
            try:
                dy = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            n0 = np.abs(F).max()
            while lam > 1e-4:
                yn = y + lam * dy
                gn = self.g(yn)
                grn = self.g_grad(yn)
                rn = x - yn
                Fn = np.array([gn, rn[0] * grn[1] - rn[1] * grn[0]])
                if np.abs(Fn).max() <= n0 or n0 < 1e-15:
                    break
                lam *= 0.5
            y = yn
            if np.abs(dy).max() * lam < 1e-14 * (1.0 + np.abs(y).max()):
                break
        return y

    def nearest_boundary_point(self, x):
        """Closest boundary point without the uniqueness check."""
        x = vec(x)
        y0 = self.gamma(self._scan_nearest(x))
        y = self._foot_newton(x, y0)
        if np.linalg.norm(x - y) > np.linalg.norm(x - y0) + 1e-12:
            y = y0
        return y

    def project_to_boundary(self, x):
        """Return ``(foot, signed_distance)``; distance positive inside."""
        x = vec(x)
        foot = self.nearest_boundary_point(x)
        dist = float(np.linalg.norm(x - foot))
        sd = dist if self.g(x) < 0 else -dist
        if sd > self.tube_radius * (1 + 1e-12):
            raise NoUniqueProjection(f"point {x.tolist()} is {sd:.3g} deep; tube radius {self.tube_radius:.3g}")
        return foot, sd

    def signed_distance(self, x):
        return self.project_to_boundary(x)[1]

    def distance_outside(self, x):
        """Euclidean distance from ``x`` to the closed domain (0 inside)."""
        x = vec(x)
        if self.g(x) <= 0:
            return 0.0
        return float(np.linalg.norm(x - self.nearest_boundary_point(x)))

    def boundary_point(self, theta):
        return self.gamma(theta)

    def frame(self, theta):
        """Origin, tangent and inward normal at ``gamma(theta)``."""
        return self.gamma(theta), self.tangent(theta), self.inward_normal(theta)

    def theta_at_arclength(self, theta0, s):
        """Parameter reached after signed arclength ``s`` from ``theta0``."""
        th = theta0 + s / self.speed(theta0)
        for _ in range(50):
            err = self.arclength(theta0, th) - s
            d = err / self.speed(th)
            th -= d
            if abs(d) < 1e-15:
                break
        return th

    def bbox(self):
        p = self._scan_points
        return p[:, 0].min(), p[:, 0].max(), p[:, 1].min(), p[:, 1].max()


class Circle(ConvexDomain):
    kind = "circle"

    def __init__(self, center, radius):
        self.center = vec(center)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        super().__init__(self.center)

    def g(self, x):
        return ((x[0] - self.center[0]) ** 2 + (x[1] - self.center[1]) ** 2 - self.radius**2) / (2 * self.radius)

    def g_grad(self, x):
        return np.array([x[0] - self.center[0], x[1] - self.center[1]]) / self.radius

    def g_hess(self, x):
        return np.eye(2) / self.radius

    def level(self, x):
        return self.radius - math.hypot(x[0] - self.center[0], x[1] - self.center[1])

    def gamma(self, theta):
        return self.center + self.radius * np.array([math.cos(theta), math.sin(theta)])

    def dgamma(self, theta):
        return self.radius * np.array([-math.sin(theta), math.cos(theta)])

    def curvature(self, theta):
        return 1.0 / self.radius

    def theta_of(self, y):
        return math.atan2(y[1] - self.center[1], y[0] - self.center[0])

    def arclength(self, theta_a, theta_b):
        return self.radius * (theta_b - theta_a)

    def theta_at_arclength(self, theta0, s):
        return theta0 + s / self.radius

    def nearest_boundary_point(self, x):
        x = vec(x)
        d = x - self.center
        r = math.hypot(d[0], d[1])
        if r == 0.0:
            return self.gamma(0.0)
        return self.center + self.radius * d / r

    def project_to_boundary(self, x):
        x = vec(x)
        d = x - self.center
        r = math.hypot(d[0], d[1])
        sd = self.radius - r
        if r == 0.0 or sd > self.tube_radius * (1 + 1e-12):
            raise NoUniqueProjection(f"point {x.tolist()} is {sd:.3g} deep; tube radius {self.tube_radius:.3g}")
        return self.center + self.radius * d / r, sd

    def to_dict(self):
        return {"kind": "circle", "center": self.center.tolist(), "radius": self.radius}


class Ellipse(ConvexDomain):
    """Axis-aligned ellipse, ``gamma(theta) = c + (a cos theta, b sin theta)``."""

    kind = "ellipse"

    def __init__(self, center, semi_axes):
        self.center = vec(center)
        self.a, self.b = (float(v) for v in semi_axes)
        if self.a <= 0 or self.b <= 0:
            raise ValueError("semi-axes must be positive")
        super().__init__(self.center)

    def g(self, x):
        u = (x[0] - self.center[0]) / self.a
        v = (x[1] - self.center[1]) / self.b
        return 0.5 * (u * u + v * v - 1.0) * min(self.a, self.b)

    def g_grad(self, x):
        m = min(self.a, self.b)
        return m * np.array([(x[0] - self.center[0]) / self.a**2, (x[1] - self.center[1]) / self.b**2])

    def g_hess(self, x):
        m = min(self.a, self.b)
        return m * np.diag([1 / self.a**2, 1 / self.b**2])

    def gamma(self, theta):
        return self.center + np.array([self.a * math.cos(theta), self.b * math.sin(theta)])

    def dgamma(self, theta):
        return np.array([-self.a * math.sin(theta), self.b * math.cos(theta)])

    def curvature(self, theta):
        s, c = math.sin(theta), math.cos(theta)
        return self.a * self.b / (self.a**2 * s * s + self.b**2 * c * c) ** 1.5

    def theta_of(self, y):
        return math.atan2((y[1] - self.center[1]) / self.b, (y[0] - self.center[0]) / self.a)

    def to_dict(self):
        return {"kind": "ellipse", "center": self.center.tolist(), "semi_axes": [self.a, self.b]}


class ImplicitDomain(ConvexDomain):
    """Domain ``{g < 0}`` for a polynomial ``g = sum c_jk x^j y^k``.

    The boundary is parametrized radially about the interior ``witness``.
    """

    kind = "implicit"

    def __init__(self, coeffs, witness):
        self.coeffs = {(int(j), int(k)): float(c) for (j, k), c in coeffs.items()}
        w = vec(witness)
        if self._g(w) >= 0:
            raise ValueError("witness is not inside the implicit domain")
        self._w = w
        super().__init__(w)

    def _g(self, x):
        return sum(c * x[0] ** j * x[1] ** k for (j, k), c in self.coeffs.items())

    def g(self, x):
        return self._g(x)

    def g_grad(self, x):
        gx = gy = 0.0
        for (j, k), c in self.coeffs.items():
            if j:
                gx += c * j * x[0] ** (j - 1) * x[1] ** k
            if k:
                gy += c * k * x[0] ** j * x[1] ** (k - 1)
        return np.array([gx, gy])

    def g_hess(self, x):
        H = np.zeros((2, 2))
        for (j, k), c in self.coeffs.items():
            if j >= 2:
                H[0, 0] += c * j * (j - 1) * x[0] ** (j - 2) * x[1] ** k
            if k >= 2:
                H[1, 1] += c * k * (k - 1) * x[0] ** j * x[1] ** (k - 2)
            if j and k:
                H[0, 1] += c * j * k * x[0] ** (j - 1) * x[1] ** (k - 1)
        H[1, 0] = H[0, 1]
        return H

    def _radius(self, theta):
        u = np.array([math.cos(theta), math.sin(theta)])
        hi = 1.0
        while self._g(self._w + hi * u) < 0:
            hi *= 2.0
            if hi > 1e6:
                raise ValueError(f"implicit domain is unbounded in direction {theta:.3f}")
        return optimize.brentq(lambda r: self._g(self._w + r * u), 0.0, hi, xtol=1e-15, rtol=8.9e-16)

    def gamma(self, theta):
        return self._w + self._radius(theta) * np.array([math.cos(theta), math.sin(theta)])

    def dgamma(self, theta):
        u = np.array([math.cos(theta), math.sin(theta)])
        du = np.array([-math.sin(theta), math.cos(theta)])
        r = self._radius(theta)
        gr = self.g_grad(self._w + r * u)
        dr = -r * gr.dot(du) / gr.dot(u)
        return dr * u + r * du

    def theta_of(self, y):
        return math.atan2(y[1] - self._w[1], y[0] - self._w[0])

    def to_dict(self):
        return {
            "kind": "implicit",
            "coeffs": {f"{j},{k}": c for (j, k), c in sorted(self.coeffs.items())},
            "witness": self._w.tolist(),
        }


class NormalChart:
    """Boundary normal coordinates based at ``domain.gamma(theta0)``.

    ``z1`` is signed boundary arclength of the foot point, ``z2`` the signed
    distance (positive inside).
    """

    def __init__(self, domain, theta0):
        self.domain = domain
        self.theta0 = float(theta0)
        self.p = domain.gamma(theta0)

    def _unwrap(self, theta):
        d = (theta - self.theta0 + math.pi) % (2 * math.pi) - math.pi
        return self.theta0 + d

    def to_normal_coords(self, x):
        foot, sd = self.domain.project_to_boundary(x)
        th = self._unwrap(self.domain.theta_of(foot))
        return self.domain.arclength(self.theta0, th), sd

    def from_normal_coords(self, z1, z2):
        th = self.domain.theta_at_arclength(self.theta0, z1)
        return self.domain.gamma(th) + z2 * self.domain.inward_normal(th)

    def metric_factor(self, z1, z2, h=1e-5):
        dx = (self.from_normal_coords(z1 + h, z2) - self.from_normal_coords(z1 - h, z2)) / (2 * h)
        return float(dx.dot(dx))

    def jacobian(self, z1=0.0, z2=0.0, h=1e-6):
        """Plane-coordinate columns ``d x / d z1`` and ``d x / d z2``."""
        c1 = (self.from_normal_coords(z1 + h, z2) - self.from_normal_coords(z1 - h, z2)) / (2 * h)
        c2 = (self.from_normal_coords(z1, z2 + h) - self.from_normal_coords(z1, z2 - h)) / (2 * h)
        return np.column_stack([c1, c2])


def domain_from_dict(d):
    kind = d.get("kind")
    if kind == "circle":
        return Circle(d["center"], d["radius"])
    if kind == "ellipse":
        return Ellipse(d["center"], d["semi_axes"])
    if kind == "implicit":
        coeffs = {tuple(int(v) for v in key.split(",")): c for key, c in d["coeffs"].items()}
        return ImplicitDomain(coeffs, d["witness"])
    raise ValueError(f"unknown domain kind {kind!r}")
