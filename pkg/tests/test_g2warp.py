from math import comb

import numpy as np
import pytest

from g2flow import catalog, form
from g2flow.errors import DimensionError, NotClosedError, ValidationError
from g2flow.exterior import KForm, wedge
from g2flow.flow import integrate_flow
from g2flow.g2warp import (
    build_warped,
    ds,
    g2_structure,
    g2_torsion,
    laplacian_phi,
    metric_flow_rhs,
    omega14_basis,
    report,
    torsion_cross_checks,
    warped_dstar_phi_formula,
    warped_metric,
    warped_phi,
    warped_tau_formula,
)
from g2flow.liealg import abelian
from g2flow.metric_ops import form_norm_sq, hodge_laplacian, hodge_star
from g2flow.stability import g2_metric_arrays
from g2flow.su3 import torsion_forms

from conftest import rand_form

CLOSED_ROWS = catalog.TABLE_ROWS + ("g654-noneigen", "flat")


def test_a57_warped():
    S = catalog.load("a57").su3
    G = build_warped(S, 1.0)
    assert G.closed and np.allclose(G.g, np.eye(7))
    G2 = build_warped(S, 2.0)
    assert G2.closed and np.allclose(G2.g, np.diag([1, 1, 1, 1, 1, 1, 4.0]))
    assert G2.phi == warped_phi(S, 2.0)


def test_star_phi_formula():
    S = catalog.load("g6n3").su3
    for a in (1.0, 0.5):
        G = build_warped(S, a)
        expect = wedge(S.omega, S.omega).embed(7) * 0.5 + wedge(S.psi_minus.embed(7), ds()) * a
        assert G.star_phi.allclose(expect, 1e-10)


def test_non_closed_w2w4():
    G = build_warped(catalog.load("w2w4").su3, 1.0)
    assert not G.closed
    with pytest.raises(NotClosedError):
        g2_torsion(G)


def test_bad_warping():
    S = catalog.load("a57").su3
    for a in (0.0, -1.0):
        with pytest.raises(ValidationError):
            build_warped(S, a)


def test_g2_structure_dimension_check():
    with pytest.raises(DimensionError):
        g2_structure(abelian(6), form("e123", 6))


def test_a57_torsion():
    S = catalog.load("a57").su3
    T = g2_torsion(build_warped(S, 1.0))
    assert T.tau == form("2*e14-2*e23", 7)
    assert T.tau_norm_sq == pytest.approx(8.0)
    assert T.laplacian_phi == S.L.d(form("2*e14-2*e23", 6)).embed(7)
    assert np.allclose(T.tau_tilde, T.tau_tilde.T)


def test_flat_is_torsion_free():
    G = build_warped(catalog.load("flat").su3, 1.0)
    T = g2_torsion(G)
    assert T.tau.is_zero() and T.laplacian_phi.is_zero()
    assert np.allclose(metric_flow_rhs(G, T), 0)


def test_g654_noneigen_laplacian():
    row = catalog.load("g654-noneigen")
    S = row.su3
    T = g2_torsion(row.warped(1.0))
    dw = S.L.d(torsion_forms(S).w2_minus).embed(7)
    assert T.laplacian_phi.allclose(dw, 1e-10)
    assert T.laplacian_phi.allclose(hodge_laplacian(S.metric, S.psi_plus).embed(7), 1e-9)


@pytest.mark.parametrize("name", CLOSED_ROWS)
@pytest.mark.parametrize("a", [1.0, 1.7])
def test_torsion_invariants(name, a):
    row = catalog.load(name)
    S = row.su3
    G = row.warped(a)
    T = g2_torsion(G)
    assert omega14_basis(G).shape == (21, 14)
    checks = torsion_cross_checks(G, T)
    assert checks["omega14"] < 1e-10 and checks["solve"] < 1e-10
    assert checks["tau_vs_codiff"] < 1e-9 and checks["laplacian"] < 1e-9
    assert T.laplacian_phi.allclose(laplacian_phi(G), 1e-9)
    # constant warping: Delta phi = Delta_h psi+ and |tau|^2 = |w2-|^2
    assert T.laplacian_phi.allclose(hodge_laplacian(S.metric, S.psi_plus).embed(7), 1e-9)
    w2 = torsion_forms(S).w2_minus
    assert abs(T.tau_norm_sq - form_norm_sq(S.metric, w2)) < 1e-9
    assert T.tau.allclose(w2.embed(7), 1e-9)


def test_report_json():
    G = catalog.load("a57").warped(1.0)
    obj = report(G)
    assert set(obj) == {"tau", "tau_norm_sq", "closed", "laplacian_phi"}
    assert obj["closed"] is True


# warp relations for the Hodge star -------------------------------------------


@pytest.mark.parametrize("name", ["a57", "g6n3", "a517"])
def test_warp_star_relations(rng, name):
    S = catalog.load(name).su3
    for a in (1.0, 0.4, 2.5):
        G = build_warped(S, a)
        for k in range(7):
            beta = rand_form(rng, 6, k)
            sh = hodge_star(S.metric, beta)
            lhs1 = hodge_star(G.metric, beta.embed(7))
            assert lhs1.allclose(wedge(sh.embed(7), ds()) * a, 1e-9)
            lhs2 = hodge_star(G.metric, wedge(beta.embed(7), ds()))
            assert lhs2.allclose(sh.embed(7) * ((-1) ** k / a), 1e-9)


# pointwise formulas with a non-zero Lee form ---------------------------------


@pytest.mark.parametrize("f", [1.0, 0.7, 2.3])
def test_tau_formula_with_lee_form(f):
    S = catalog.load("w2w4").su3
    T = torsion_forms(S)
    M = warped_metric(S, f)
    phi = wedge(S.omega.embed(7), ds()) * f + S.psi_plus.embed(7)
    g, vol = g2_metric_arrays(phi.coeffs)
    assert np.allclose(g, M.g) and vol == pytest.approx(M.vol)
    tau = warped_tau_formula(S, T.theta, f)
    # tau in Lambda^2_14, d*phi = tau ^ phi, |tau|^2 = |w2-|^2 + 6 |theta|^2
    assert wedge(tau, hodge_star(M, phi)).max_abs() < 1e-10
    assert wedge(tau, phi).allclose(warped_dstar_phi_formula(S, T.theta, f), 1e-10)
    expect = T.w2_norm_sq + 6 * form_norm_sq(S.metric, T.theta)
    assert form_norm_sq(M, tau) == pytest.approx(expect)


def test_tau_formula_reduces_for_shf():
    S = catalog.load("a57").su3
    tau = warped_tau_formula(S, KForm(6, 1), 1.0)
    assert tau == form("2*e14-2*e23", 7)


# metric evolution ------------------------------------------------------------


def flow_metric_derivative(row, h=1e-3):
    """Richardson-extrapolated central difference of g_phi(t) along the numeric flow."""
    G = row.warped(1.0)

    def g_at(t):
        cur = integrate_flow(G.phi, G.Lhat, t, 1e-12, atol=1e-14)
        return g2_metric_arrays(cur.coeffs[-1])[0]

    d1 = (g_at(h) - g_at(-h)) / (2 * h)
    d2 = (g_at(2 * h) - g_at(-2 * h)) / (4 * h)
    return (4 * d1 - d2) / 3


@pytest.mark.parametrize("name", ["a57", "g51"])
def test_metric_flow_rhs_matches_flow(name):
    row = catalog.load(name)
    rhs = metric_flow_rhs(row.warped(1.0))
    assert np.allclose(rhs, rhs.T)
    assert np.max(np.abs(flow_metric_derivative(row) - rhs)) < 1e-5


def test_omega14_dimension():
    G = catalog.load("g654").warped(1.0)
    B = omega14_basis(G)
    for col in B.T:
        assert wedge(KForm(7, 2, col), G.star_phi).max_abs() < 1e-10
    assert comb(7, 2) - B.shape[1] == 7
