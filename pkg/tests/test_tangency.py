import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dipolejet.dynamics import DipoleState, ExitSolver, dipole_rhs
from dipolejet.errors import DegenerateVelocity, NonpositiveSlope, NoTransitionFound, XiInsideTildeOmega
from dipolejet.geometry import Circle
from dipolejet.jet_recovery import (
    BoundaryFrame,
    ExactFamily,
    build_family,
    check_convexity,
    estimate_ell_prime,
    find_tangent_xi_from_data,
    xi_for_velocity,
)
from dipolejet.potential import PolynomialPotential, ZeroPotential

from conftest import gauss_q, linear_q

ORIGIN = np.zeros(2)


def test_case_one_example():
    xi = xi_for_velocity(ORIGIN, (1 / math.pi, 0), (0, 0))
    assert np.allclose(xi, (0, -1), atol=1e-15)
    assert xi[0] == 0.0


@pytest.mark.parametrize("c,eps", [(0.1, 1.0), (0.3, 0.5), (2.0, 1.5)])
def test_case_two_circle_relation(c, eps):
    xi = xi_for_velocity(ORIGIN, (eps, 0), (c, 0))
    assert np.allclose(xi, np.array([c, -eps]) / (math.pi * (eps**2 + c**2)), atol=1e-15)
    assert abs(xi[1] ** 2 - xi[0] * (1 / (math.pi * c) - xi[0])) < 1e-12
    assert abs(xi[0] - math.pi * c * (xi @ xi)) < 1e-12
    Q = PolynomialPotential({(1, 0): c})
    vp, _ = dipole_rhs(DipoleState(ORIGIN, xi), Q)
    assert abs(vp[1]) < 1e-12


def test_degenerate_velocity():
    g = np.array([0.1, 0.2])
    with pytest.raises(DegenerateVelocity):
        xi_for_velocity(ORIGIN, (g[1], -g[0]), g)


@given(st.floats(0.05, 3), st.floats(0, 2 * math.pi), st.floats(-1, 1), st.floats(-1, 1))
def test_round_trip(speed, ang, px, py):
    Q = gauss_q()
    p = np.array([px, py])
    v = speed * np.array([math.cos(ang), math.sin(ang)])
    w = v - Q.perp_grad(p)
    if np.linalg.norm(w) < 1e-2:
        return
    xi = xi_for_velocity(p, v, Q.grad(p))
    vp, _ = dipole_rhs(DipoleState(p, xi), Q)
    assert np.abs(vp - v).max() < 1e-12 * max(1.0, speed)


def test_find_tangent_zero_q(disk):
    res = find_tangent_xi_from_data(ORIGIN, disk, ExitSolver(ZeroPotential(), disk), rho=1.0)
    assert np.allclose(res.xi0, (0, -1), atol=1e-8)


def test_find_tangent_linear_q(disk):
    Q = linear_q()
    res = find_tangent_xi_from_data(ORIGIN, disk, ExitSolver(Q, disk, tol=1e-12), rho=1.0)
    v, _ = dipole_rhs(DipoleState(ORIGIN, res.xi0), Q)
    fr = BoundaryFrame(disk, -math.pi / 2)
    assert abs(math.atan2(v @ fr.N, v @ fr.T)) < 1e-6
    # same companion as the closed form with the matching speed
    xi = xi_for_velocity(ORIGIN, (v @ fr.T) * fr.T, Q.grad(ORIGIN))
    assert np.linalg.norm(xi - res.xi0) < 1e-6


@pytest.mark.parametrize("rng_", [(-1.2, -0.3), (0.3, 1.2)])
def test_no_transition(disk, rng_):
    with pytest.raises(NoTransitionFound):
        find_tangent_xi_from_data(ORIGIN, disk, ExitSolver(ZeroPotential(), disk), rho=1.0, psi_range=rng_)


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
def test_convexity_unit_disk(disk, eps):
    assert check_convexity(ORIGIN, ZeroPotential(), disk, epsilon=eps) == pytest.approx(-eps**2, rel=1e-5)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_convexity_radius(r):
    D = Circle((0.0, r), r)
    assert check_convexity(ORIGIN, ZeroPotential(), D) == pytest.approx(-1 / r, rel=1e-5)


def test_convexity_fails_for_strong_drift(disk):
    # drift with d/dx1 of the vertical velocity = 10 bends the grazing path inward
    Q = PolynomialPotential({(2, 0): -5.0})
    assert check_convexity(ORIGIN, Q, disk) > 0


def test_build_family_closed_form(disk):
    fam = build_family(ORIGIN, (0, 0), epsilon=1.0, beta=1.0, delta=0.5, domain=disk)
    for t in (0.0, 0.1, 0.3, 0.45):
        assert np.allclose(fam.xi(t), np.array([t, -math.sqrt(1 - t * t)]) / math.pi, atol=1e-14)
    assert ExitSolver(ZeroPotential(), disk).measure(ORIGIN, fam.xi(0.0)).tau_plus == 0.0


def test_build_family_rejects_inside(disk):
    with pytest.raises(XiInsideTildeOmega):
        build_family(ORIGIN, (0, 0), epsilon=1.0, domain=disk, margin=0.5)
    with pytest.raises(ValueError):
        build_family(ORIGIN, (0, 0), beta=2.0, delta=0.5, domain=disk)


@pytest.mark.parametrize("eps,beta", [(1.0, 1.0), (2.0, 1.0), (1.0, 0.5)])
def test_ell_prime_chord(disk, eps, beta):
    fam = build_family(ORIGIN, (0, 0), epsilon=eps, beta=beta, delta=0.5, domain=disk)
    est = estimate_ell_prime(fam, ExitSolver(ZeroPotential(), disk, tol=1e-12), h=0.01)
    assert float(est.value) == pytest.approx(2 * beta / eps, rel=1e-4)


def test_ell_prime_negative_beta(disk):
    fam = ExactFamily(BoundaryFrame(disk, -math.pi / 2), (0, 0), 1.0, -1.0, 0.5)
    with pytest.raises(NonpositiveSlope):
        estimate_ell_prime(fam, ExitSolver(ZeroPotential(), disk), h=0.01)


def test_ell_prime_positive_on_suite():
    from dipolejet.suites import convex_boundary_points, suite_domains, suite_potentials

    for D in suite_domains():
        for Q in suite_potentials():
            for p in convex_boundary_points(D, Q, 3):
                fam = build_family(p, Q.grad(p), epsilon=1.0, beta=1.0, delta=0.5, domain=D)
                assert float(estimate_ell_prime(fam, ExitSolver(Q, D, tol=1e-11), h=0.01).value) > 0


def test_ell_prime_rejects_nonconvex_point(disk):
    # the grazing launch at the top of the disk bends inward and travels on
    Q = linear_q()
    p = np.array([0.0, 2.0])
    assert check_convexity(p, Q, disk) > 0
    fam = build_family(p, Q.grad(p), domain=disk)
    assert ExitSolver(Q, disk).measure(p, fam.xi(0.001)).tau_plus > 0.5
    with pytest.raises(NonpositiveSlope):
        estimate_ell_prime(fam, ExitSolver(Q, disk), h=0.01)
