"""Background potentials with exact partial derivatives."""

import math

import numpy as np
from numpy.polynomial import hermite_e

from . import kernels
from .errors import OrderUnavailable


def _falling(n, k):
    out = 1
    for i in range(k):
        out *= n - i
    return out


class PotentialModel:
    """Base class. ``max_exact_order`` of ``None`` means every order is exact."""

    kind = "abstract"
    max_exact_order = None

    def poly_rows(self):
        return []

    def gauss_rows(self):
        return []

    def _partial(self, x, j, k):
        raise NotImplementedError

    def partial(self, x, j, k):
        if self.max_exact_order is not None and j + k > self.max_exact_order:
            raise OrderUnavailable(f"{self.kind} potential exact only to order {self.max_exact_order}")
        return self._partial(x, j, k)

    def eval_partials(self, x, order):
        """``{(j, k): d1^j d2^k Q(x)}`` for all ``j + k <= order``."""
        if self.max_exact_order is not None and order > self.max_exact_order:
            raise OrderUnavailable(f"{self.kind} potential exact only to order {self.max_exact_order}")
        return {(j, n - j): self._partial(x, j, n - j) for n in range(order + 1) for j in range(n, -1, -1)}

    def __call__(self, x):
        return self._partial(x, 0, 0)

    def grad(self, x):
        return np.array([self._partial(x, 1, 0), self._partial(x, 0, 1)])

    def perp_grad(self, x):
        g = self.grad(x)
        return np.array([g[1], -g[0]])

    def hessian(self, x):
        a = self._partial(x, 2, 0)
        b = self._partial(x, 1, 1)
        c = self._partial(x, 0, 2)
        return np.array([[a, b], [b, c]])

    def kernel_pack(self):
        return kernels.make_pack(self.poly_rows(), self.gauss_rows())

    def __add__(self, other):
        return SumPotential([self, other])


class ZeroPotential(PotentialModel):
    kind = "zero"

    def _partial(self, x, j, k):
        return 0.0

    def to_dict(self):
        return {"kind": "zero"}


class PolynomialPotential(PotentialModel):
    """``Q(x) = sum c_jk (x1 - c1)^j (x2 - c2)^k``."""

    kind = "polynomial"

    def __init__(self, coeffs, center=(0.0, 0.0)):
        self.coeffs = {(int(j), int(k)): float(c) for (j, k), c in coeffs.items() if c != 0.0}
        self.center = np.asarray(center, dtype=float)

    def _partial(self, x, j, k):
        u = x[0] - self.center[0]
        v = x[1] - self.center[1]
        total = 0.0
        for (a, b), c in self.coeffs.items():
            if a < j or b < k:
                continue
            total += c * _falling(a, j) * _falling(b, k) * u ** (a - j) * v ** (b - k)
        return total

    def degree(self):
        return max((a + b for a, b in self.coeffs), default=0)

    def poly_rows(self):
        cx, cy = self.center
        return [(cx, cy, a, b, c) for (a, b), c in sorted(self.coeffs.items())]

    def to_dict(self):
        d = {"kind": "polynomial", "coeffs": {f"{a},{b}": c for (a, b), c in sorted(self.coeffs.items())}}
        if np.any(self.center != 0):
            d["center"] = self.center.tolist()
        return d


class GaussianBumps(PotentialModel):
    """Sum of ``A exp(-|x - c|^2 / (2 w^2))`` bumps."""

    kind = "gaussian_bumps"

    def __init__(self, bumps, max_exact_order=8):
        self.bumps = [(np.asarray(c, dtype=float), float(a), float(w)) for c, a, w in bumps]
        for _, _, w in self.bumps:
            if w <= 0:
                raise ValueError("bump width must be positive")
        self.max_exact_order = max_exact_order

    def _partial(self, x, j, k):
        total = 0.0
        ej = np.zeros(j + 1)
        ej[j] = 1.0
        ek = np.zeros(k + 1)
        ek[k] = 1.0
        for c, a, w in self.bumps:
            u = (x[0] - c[0]) / w
            v = (x[1] - c[1]) / w
            e = a * math.exp(-0.5 * (u * u + v * v))
            total += e * (-1.0 / w) ** (j + k) * hermite_e.hermeval(u, ej) * hermite_e.hermeval(v, ek)
        return total

    def gauss_rows(self):
        return [(c[0], c[1], a, w) for c, a, w in self.bumps]

    def to_dict(self):
        return {
            "kind": "gaussian_bumps",
            "bumps": [{"center": c.tolist(), "amplitude": a, "width": w} for c, a, w in self.bumps],
        }


class SumPotential(PotentialModel):
    kind = "sum"

    def __init__(self, terms):
        self.terms = list(terms)
        orders = [t.max_exact_order for t in self.terms if t.max_exact_order is not None]
        self.max_exact_order = min(orders) if orders else None

    def _partial(self, x, j, k):
        return sum(t._partial(x, j, k) for t in self.terms)

    def poly_rows(self):
        return [r for t in self.terms for r in t.poly_rows()]

    def gauss_rows(self):
        return [r for t in self.terms for r in t.gauss_rows()]

    def to_dict(self):
        return {"kind": "sum", "terms": [t.to_dict() for t in self.terms]}


def parse_key(key):
    j, k = key.split(",")
    return int(j), int(k)


def potential_from_dict(d):
    kind = d.get("kind")
    if kind == "zero":
        return ZeroPotential()
    if kind == "polynomial":
        coeffs = {parse_key(key): float(c) for key, c in d["coeffs"].items()}
        return PolynomialPotential(coeffs, d.get("center", (0.0, 0.0)))
    if kind == "gaussian_bumps":
        bumps = [(b["center"], b["amplitude"], b["width"]) for b in d["bumps"]]
        return GaussianBumps(bumps, d.get("max_exact_order", 8))
    if kind == "sum":
        return SumPotential([potential_from_dict(t) for t in d["terms"]])
    raise ValueError(f"unknown potential kind {kind!r}")


def gradient_bound(Q, domain, n_samples=256):
    """Upper bound ``M`` for ``|grad Q|`` on the boundary: sampled max times 1.1."""
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    thetas = np.linspace(0.0, 2 * math.pi, n_samples, endpoint=False)
    m = max(float(np.linalg.norm(Q.grad(domain.gamma(t)))) for t in thetas)
    return 1.1 * m
