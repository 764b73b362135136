import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dipolejet.dynamics import ExitSolver
from dipolejet.geometry import Circle, NormalChart
from dipolejet.jet_recovery import BoundaryFrame, build_family
from dipolejet.jet_recovery.chart import frame_to_chart
from dipolejet.jet_recovery.model import boundary_graph, frame_polynomial, true_frame_jet
from dipolejet.jet_recovery.normal import ModelOracle
from dipolejet.potential import PolynomialPotential
from dipolejet.su_identity import r_from_measurement

CUBIC = PolynomialPotential({(1, 0): 0.1, (0, 1): -0.05, (2, 0): 0.03, (1, 1): 0.02, (0, 3): 0.01, (2, 1): -0.02})


@given(st.floats(0, 6.28), st.floats(-1, 1), st.floats(-1, 1))
def test_frame_polynomial_reproduces_polynomial(theta, x, y):
    fr = BoundaryFrame(Circle((0.2, 0.9), 0.8), theta)
    model = frame_polynomial(fr, true_frame_jet(fr, CUBIC, 3))
    assert np.allclose(model.grad((x, y)), CUBIC.grad((x, y)), atol=1e-12)
    assert model((x, y)) - model(fr.p) == pytest.approx(CUBIC((x, y)) - CUBIC(fr.p), abs=1e-12)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_boundary_graph_of_circle(r):
    fr = BoundaryFrame(Circle((0.0, r), r), -np.pi / 2)
    c = boundary_graph(fr, 0.1 * r)
    assert c[2] == pytest.approx(1 / (2 * r), rel=1e-8)
    assert c[4] == pytest.approx(1 / (8 * r**3), rel=1e-5)


def test_model_oracle_matches_data_for_exact_model(disk):
    Q = CUBIC
    fr = BoundaryFrame(disk, -np.pi / 2)
    mo = ModelOracle(fr, None, None, 3, Q, disk)
    model = frame_polynomial(fr, true_frame_jet(fr, Q, 3))
    fam = build_family(fr.p, Q.grad(fr.p), domain=disk)
    solver = ExitSolver(Q, disk, tol=1e-12)
    for t in (0.01, 0.05, 0.2):
        xi = fam.xi(t)
        m = solver.measure(fr.p, xi)
        R = r_from_measurement(fr.p, xi, m)
        assert np.abs(mo.discrepancy(model, fr.p, xi, m.tau_plus) - R).max() < 1e-10


def fd_chart_partials(Q, chart, h=2e-3):
    f = lambda a, b: Q(chart.from_normal_coords(a, b))
    d = {}
    d[(1, 0)] = (f(h, 0) - f(-h, 0)) / (2 * h)
    d[(0, 1)] = (f(0, h) - f(0, -h)) / (2 * h)
    d[(2, 0)] = (f(h, 0) - 2 * f(0, 0) + f(-h, 0)) / h**2
    d[(0, 2)] = (f(0, h) - 2 * f(0, 0) + f(0, -h)) / h**2
    d[(1, 1)] = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
    return d


@pytest.mark.parametrize("theta", [0.3, 1.7, 4.0])
def test_chart_values_match_normal_coordinates(ellipse, theta):
    fr = BoundaryFrame(ellipse, theta)
    chart = NormalChart(ellipse, theta)
    got = frame_to_chart(true_frame_jet(fr, CUBIC, 2), boundary_graph(fr, 0.2), 2)
    want = fd_chart_partials(CUBIC, chart)
    for key, v in want.items():
        assert got[key] == pytest.approx(v, abs=2e-5)
