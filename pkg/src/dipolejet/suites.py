"""Seeded random test cases (domains, potentials, launches)."""

import math

import numpy as np

from .errors import DegenerateVelocity
from .geometry import Circle, Ellipse, ImplicitDomain
from .jet_recovery.tangency import BoundaryFrame, check_convexity, xi_for_velocity
from .potential import GaussianBumps, PolynomialPotential, SumPotential


def random_domain(rng):
    if rng.random() < 0.5:
        c = rng.uniform(-0.5, 0.5, 2)
        return Circle(c, rng.uniform(0.6, 1.5))
    c = rng.uniform(-0.5, 0.5, 2)
    return Ellipse(c, rng.uniform(0.7, 1.4, 2))


def random_potential(rng, scale=0.1):
    coeffs = {(1, 0): rng.normal(0, scale), (0, 1): rng.normal(0, scale)}
    for key in ((2, 0), (1, 1), (0, 2)):
        coeffs[key] = rng.normal(0, scale / 2)
    poly = PolynomialPotential(coeffs)
    if rng.random() < 0.5:
        return poly
    bump = (rng.uniform(-0.5, 0.5, 2), rng.normal(0, scale / 2), rng.uniform(0.3, 0.8))
    return SumPotential([poly, GaussianBumps([bump])])


def random_launch(domain, Q, rng, max_tries=100):
    """A boundary point ``x`` and a companion ``y`` outside the domain such
    that the positive vortex starts into the domain."""
    for _ in range(max_tries):
        fr = BoundaryFrame(domain, rng.uniform(0, 2 * math.pi))
        phi = rng.uniform(0.25, math.pi - 0.25)
        v = rng.uniform(0.5, 2.0) * (math.cos(phi) * fr.T + math.sin(phi) * fr.N)
        try:
            y = xi_for_velocity(fr.p, v, Q.grad(fr.p))
        except DegenerateVelocity:
            continue
        if domain.distance_outside(y) > 0.05:
            return fr.p, y
    raise RuntimeError("no admissible launch found")


def random_cases(n, seed=0, domain=None, Q=None):
    """``n`` tuples ``(domain, Q, x, y)``; fixed ``domain`` or ``Q`` are reused."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        D = domain if domain is not None else random_domain(rng)
        P_ = Q if Q is not None else random_potential(rng)
        x, y = random_launch(D, P_, rng)
        out.append((D, P_, x, y))
    return out


def suite_domains():
    # unit disk, an ellipse and a convex quartic level set
    return [
        Circle((0.0, 1.0), 1.0),
        Ellipse((0.2, 0.9), (1.3, 0.9)),
        ImplicitDomain({(4, 0): 1.0, (0, 4): 1.0, (2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0}, (0.0, 0.0)),
    ]


def suite_potentials():
    return [
        PolynomialPotential({(1, 0): 0.1, (0, 1): 0.2}),
        PolynomialPotential({(0, 2): 0.05, (1, 1): 0.02}),
        GaussianBumps([((0.1, 0.5), 0.05, 0.4)]),
        SumPotential([PolynomialPotential({(1, 0): -0.05, (2, 1): 0.02}), GaussianBumps([((-0.3, 0.2), 0.03, 0.3)])]),
    ]


def structured_cases(seed=0, launches=8):
    """Every suite domain with every suite potential, ``launches`` random
    launches each (96 cases by default)."""
    rng = np.random.default_rng(seed)
    return [(D, Q, *random_launch(D, Q, rng)) for D in suite_domains() for Q in suite_potentials() for _ in range(launches)]


def convex_boundary_points(domain, Q, n, threshold=-1.0, scan=96, epsilon=1.3):
    """``n`` boundary points spread evenly over the longest boundary arc on
    which ``check_convexity`` stays below ``threshold``.

    Uses the true ``Q``; this only selects test points where the grazing
    launch (at speed ``epsilon``) certifiably leaves the closed domain.
    """
    th = np.linspace(0.0, 2 * math.pi, scan, endpoint=False)
    ok = np.array([check_convexity(domain.gamma(t), Q, domain, epsilon=epsilon) < threshold for t in th])
    if ok.all():
        return [domain.gamma(t) for t in np.linspace(0.0, 2 * math.pi, n, endpoint=False)]
    if not ok.any():
        raise ValueError("no boundary point is convex with respect to Q")
    start = int(np.argmin(ok))  # a non-convex index; runs are read cyclically from here
    best, run, best_end = 0, 0, 0
    for k in range(1, scan + 1):
        if ok[(start + k) % scan]:
            run += 1
            if run > best:
                best, best_end = run, start + k
        else:
            run = 0
    step = 2 * math.pi / scan
    lo = (best_end - best + 1) * step
    hi = best_end * step
    return [domain.gamma(t) for t in np.linspace(lo, hi, n)]
