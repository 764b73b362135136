import numpy as np
import pytest

from dipolejet.errors import IllConditioned
from dipolejet.jet_recovery import ArcFamily, BoundaryFrame, build_family, check_convexity, lemma_limits_check
from dipolejet.potential import PolynomialPotential, ZeroPotential

from conftest import cubic_q, gauss_q, quad_q

ORIGIN = np.zeros(2)


def family(Q, D, p=ORIGIN):
    return build_family(p, Q.grad(p), epsilon=1.0, beta=1.0, delta=0.5, domain=D)


def test_first_order_example(disk):
    Q = quad_q()
    r = lemma_limits_check(1, 1, family(Q, disk), Q, disk)
    # the companion drift bends the grazing path, so ell'(0) is not exactly 2;
    # the chord oracle ell'(0) = 2 eps beta / |second derivative| gives it
    ellp = 2.0 / abs(check_convexity(ORIGIN, Q, disk, epsilon=1.0))
    assert r.details["ell_prime"] == pytest.approx(ellp, rel=1e-4)
    assert np.allclose(r.prediction, (0.1 * ellp, 0.0), rtol=1e-4, atol=1e-12)
    assert r.discrepancy < 1e-2


def test_first_order_free_chord_limit(disk):
    # a faint potential keeps ell'(0) at the free value 2
    Q = PolynomialPotential({(0, 2): 1e-4})
    r = lemma_limits_check(1, 1, family(Q, disk), Q, disk)
    assert r.details["ell_prime"] == pytest.approx(2.0, rel=1e-3)
    assert r.discrepancy < 1e-2


@pytest.mark.parametrize("Q", [cubic_q(), PolynomialPotential({(0, 3): 0.01, (0, 2): 0.05}), gauss_q()])
def test_second_order_leading_term(disk, Q):
    r = lemma_limits_check(2, 2, family(Q, disk), Q, disk)
    assert r.discrepancy < 2e-2


@pytest.mark.parametrize("k,bound", [(1, 1e-6), (2, 1e-5)])
def test_plus_block_vanishes(disk, ellipse, k, bound):
    # second t-derivatives of the field carry a larger differencing floor
    for D in (disk, ellipse):
        for Q in (quad_q(), gauss_q()):
            p = D.gamma(-1.4)
            r = lemma_limits_check(k, 0, family(Q, D, p), Q, D)
            assert np.abs(r.numeric).max() < bound


def test_lower_order_dependence(disk):
    Q = gauss_q()
    r = lemma_limits_check(2, 1, family(Q, disk), Q, disk)
    assert r.discrepancy < 1e-3 or r.details["within_uncertainty"]


def test_leading_term_vanishing_is_ill_conditioned(disk):
    with pytest.raises(IllConditioned):
        lemma_limits_check(1, 1, family(ZeroPotential(), disk), ZeroPotential(), disk)
    # a quadratic has no third derivative to lead the second-order limit
    with pytest.raises(IllConditioned):
        lemma_limits_check(2, 2, family(quad_q(), disk), quad_q(), disk)


def test_argument_checks(disk):
    fam = family(quad_q(), disk)
    with pytest.raises(ValueError):
        lemma_limits_check(4, 1, fam, quad_q(), disk)
    with pytest.raises(ValueError):
        lemma_limits_check(1, 2, fam, quad_q(), disk)
    arc = ArcFamily(BoundaryFrame(disk, -np.pi / 2), 0.25, 0.0)
    with pytest.raises(TypeError):
        lemma_limits_check(1, 1, arc, quad_q(), disk)
