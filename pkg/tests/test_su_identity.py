import numpy as np
import pytest

from dipolejet.dynamics import DipoleState, ExitSolver, Measurement
from dipolejet.errors import CompanionHidden
from dipolejet.jet_recovery import build_family
from dipolejet.potential import GaussianBumps, PolynomialPotential, ZeroPotential
from dipolejet.su_identity import sample_R, su_residual, su_terms, velocity_gap

from conftest import linear_q

TS = list(np.geomspace(1e-4, 1e-1, 6))


def test_velocity_gap_examples():
    assert np.allclose(velocity_gap(DipoleState((0, 0), (0, -1)), ZeroPotential()), 0)
    Q = PolynomialPotential({(0, 2): 0.05})
    assert np.allclose(velocity_gap(DipoleState((0, 0), (0, -2)), Q), (0, 0, 0.2, 0))


def test_residual_examples(disk):
    assert su_residual((0, 0), (1, 0), ZeroPotential(), disk) < 1e-13
    assert su_residual((0, 0), (1, 0), linear_q(), disk, tol=1e-11, quad_tol=1e-10) < 1e-7
    bump = GaussianBumps([((0.0, 1.0), 0.05, 0.4)])
    assert su_residual((0, 0), (1, 0), bump, disk, tol=1e-11, quad_tol=1e-10) < 1e-6


def test_non_entering_launch_is_zero(disk):
    t = su_terms((0, 0), (0, -1), ZeroPotential(), disk)
    assert t.ell == 0.0 and t.residual == 0.0


def family(disk, Q):
    p = np.array([0.0, 0.0])
    return build_family(p, Q.grad(p), epsilon=1.0, beta=1.0, domain=disk)


def test_sample_r_matches_quadrature(disk):
    Q = linear_q()
    fam = family(disk, Q)
    for r in sample_R(fam, ExitSolver(Q, disk, tol=1e-12), TS):
        terms = su_terms(fam.p, fam.xi(r.t), Q, disk, tol=1e-12, quad_tol=1e-11, ell=r.ell)
        assert np.abs(r.R - terms.rhs).max() < 1e-7


def test_sample_r_tol_insensitive(disk):
    Q = linear_q()
    fam = family(disk, Q)
    a = sample_R(fam, ExitSolver(Q, disk, tol=1e-12), TS)
    b = sample_R(fam, ExitSolver(Q, disk, tol=5e-13), TS)
    assert max(np.abs(x.R - y.R).max() for x, y in zip(a, b)) < 1e-8


def test_r_over_ell_limit(disk):
    # first two components of R / ell approach perp grad Q(p)
    Q = PolynomialPotential({(1, 0): 0.1, (0, 1): 0.2, (0, 2): 0.05, (1, 1): 0.03})
    fam = family(disk, Q)
    rs = sample_R(fam, ExitSolver(Q, disk, tol=1e-12), [1e-2, 5e-3, 2.5e-3])
    errs = [np.linalg.norm(r.R[:2] / r.ell - Q.perp_grad(fam.p)) for r in rs]
    assert errs[-1] < 0.5 * errs[0] and errs[-1] < 1e-2


def test_hidden_companion_raises(disk):
    class Hidden:
        def measure(self, x, y):
            m = ExitSolver(ZeroPotential(), disk).measure(x, y)
            return Measurement(m.tau_plus, m.exit_point, None)

    fam = family(disk, ZeroPotential())
    with pytest.raises(CompanionHidden):
        sample_R(fam, Hidden(), [0.05])
