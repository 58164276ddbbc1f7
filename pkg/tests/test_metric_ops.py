from math import comb

import numpy as np
import pytest

from g2flow import catalog, form
from g2flow.errors import DimensionError, PositivityError
from g2flow.exterior import KForm, wedge
from g2flow.g2warp import ds
from g2flow.liealg import LieAlgebra, abelian
from g2flow.metric_ops import (
    MetricData,
    codifferential,
    eigenform_fit,
    form_inner,
    form_norm_sq,
    hodge_laplacian,
    hodge_star,
    levi_civita,
    ricci,
    scalar_curvature,
)
from g2flow.su3 import torsion_forms

from conftest import rand_form


def random_metric(rng, n):
    A = rng.standard_normal((n, n))
    return A @ A.T + n * np.eye(n)


def ricci_besse(L, g):
    """Ricci tensor of a left-invariant metric from the bracket formula.

    In a g-orthonormal basis,
    Ric(X,Y) = -1/2 sum <[X,e_i],[Y,e_i]> - 1/2 B(X,Y)
               + 1/4 sum <[e_i,e_j],X><[e_i,e_j],Y> - 1/2 (<[H,X],Y> + <[H,Y],X>)
    with B the Killing form and <H, X> = tr ad_X.
    """
    n = L.dim
    P = np.linalg.cholesky(np.linalg.inv(g))  # columns orthonormal for g
    Pinv = np.linalg.inv(P)
    C = np.einsum("ka,aij,ip,jq->kpq", Pinv, L.brackets, P, P)
    ad = np.transpose(C, (1, 0, 2))  # ad[i][k, j] = [e_i, e_j]^k
    B = np.einsum("ikj,ljk->il", ad, ad)
    H = np.array([np.trace(ad[i]) for i in range(n)])
    adH = np.tensordot(H, ad, axes=1)
    R = np.zeros((n, n))
    for x in range(n):
        for y in range(n):
            R[x, y] = (
                -0.5 * np.sum(ad[x] * ad[y])
                - 0.5 * B[x, y]
                + 0.25 * np.sum(C[x] * C[y])
                - 0.5 * (adH[y, x] + adH[x, y])
            )
    return Pinv.T @ R @ Pinv


# Hodge star -----------------------------------------------------------------


def test_star_of_volume_is_one():
    M = MetricData(abelian(6), np.eye(6))
    assert hodge_star(M, KForm(6, 6, [1.0])) == KForm.scalar(6, 1.0)
    assert hodge_star(M, KForm.scalar(6, 1.0)) == KForm(6, 6, [1.0])


def test_star_of_warped_a57_phi():
    S = catalog.load("a57").su3
    G = catalog.load("a57").warped(1.0)
    expect = wedge(S.omega, S.omega).embed(7) * 0.5 + wedge(S.psi_minus.embed(7), ds())
    assert G.star_phi == expect


@pytest.mark.parametrize("n", [6, 7])
def test_star_star_sign(rng, n):
    L = abelian(n)
    M = MetricData(L, random_metric(rng, n))
    for k in range(n + 1):
        a = rand_form(rng, n, k)
        assert hodge_star(M, hodge_star(M, a)).allclose(a * (-1) ** (k * (n - k)), 1e-9)


def test_star_defines_inner_product(rng):
    M = MetricData(abelian(7), random_metric(rng, 7))
    for k in range(8):
        a, b = rand_form(rng, 7, k), rand_form(rng, 7, k)
        lhs = wedge(a, hodge_star(M, b)).top_coefficient()
        assert lhs == pytest.approx(form_inner(M, a, b) * M.vol, rel=1e-9)


def test_su3_hodge_identities(table_row):
    S = table_row.su3
    M = S.metric
    assert hodge_star(M, S.omega).allclose(wedge(S.omega, S.omega) * 0.5, 1e-9)
    assert hodge_star(M, S.psi_plus).allclose(S.psi_minus, 1e-9)


# codifferential and Laplacian ----------------------------------------------


def test_codifferential_a57():
    S = catalog.load("a57").su3
    assert codifferential(S.metric, S.psi_plus) == form("2*e14-2*e23", 6)
    assert codifferential(S.metric, S.omega).is_zero()


def test_codifferential_abelian_one_form(rng):
    M = MetricData(abelian(6), random_metric(rng, 6))
    assert codifferential(M, rand_form(rng, 6, 1)).is_zero()


@pytest.mark.parametrize("name", catalog.TABLE_ROWS)
def test_adjointness_unimodular(rng, name):
    L = catalog.load(name).L
    M = MetricData(L, random_metric(rng, 6))
    for k in range(6):
        a, b = rand_form(rng, 6, k), rand_form(rng, 6, k + 1)
        assert form_inner(M, L.d(a), b) == pytest.approx(form_inner(M, a, codifferential(M, b)), abs=1e-8)


def test_adjointness_fails_without_unimodularity():
    L = LieAlgebra.parse("(e12,0)")
    M = MetricData(L, np.eye(2))
    one = KForm.basis_form(2, (1,))
    top = KForm(2, 2, [1.0])
    # <d e^1, e^12> = 1 but d^* of e^12 has no e^1 component
    assert form_inner(M, L.d(one), top) == pytest.approx(1.0)
    assert form_inner(M, one, codifferential(M, top)) == pytest.approx(0.0)


def test_laplacian_commutes_with_star(rng, table_row):
    M = table_row.su3.metric
    for k in range(7):
        a = rand_form(rng, 6, k)
        lhs = hodge_laplacian(M, hodge_star(M, a))
        rhs = hodge_star(M, hodge_laplacian(M, a))
        assert lhs.allclose(rhs, 1e-8)


def test_eigenform_fit_cases():
    S = catalog.load("a57").su3
    c, res, ok = eigenform_fit(S.metric, form("2*e14-2*e23", 6))
    assert ok and c == pytest.approx(4.0) and res < 1e-12
    S = catalog.load("g654-noneigen").su3
    c, res, ok = eigenform_fit(S.metric, torsion_forms(S).w2_minus)
    assert not ok and res > 0.1


def test_metric_validation():
    with pytest.raises(PositivityError):
        MetricData(abelian(3), np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(PositivityError):
        MetricData(abelian(2), [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(DimensionError):
        MetricData(abelian(3), np.eye(2))
    M = MetricData(abelian(3), np.eye(3))
    with pytest.raises(DimensionError):
        hodge_star(M, KForm(4, 1))


# curvature ------------------------------------------------------------------


def test_heisenberg_ricci():
    L = LieAlgebra.parse("(0,0,e12)")
    assert np.allclose(ricci(MetricData(L, np.eye(3))), np.diag([-0.5, -0.5, 0.5]))
    assert scalar_curvature(MetricData(L, np.eye(3))) == pytest.approx(-0.5)


def test_hyperbolic_plane():
    L = LieAlgebra.parse("(e12,0)")
    M = MetricData(L, np.eye(2))
    assert np.allclose(ricci(M), -np.eye(2))
    assert scalar_curvature(M) == pytest.approx(-2.0)


def test_flat_abelian():
    M = MetricData(abelian(6), np.diag([1, 2, 3, 4, 5, 6.0]))
    assert np.allclose(ricci(M), 0)


@pytest.mark.parametrize("name", catalog.names())
def test_ricci_matches_bracket_formula(rng, name):
    L = catalog.load(name).L
    for _ in range(3):
        g = random_metric(rng, 6)
        assert np.allclose(ricci(MetricData(L, g)), ricci_besse(L, g), atol=1e-10)


def test_ricci_non_unimodular_random(rng):
    L = LieAlgebra.parse("(e13,2*e23,0)")
    assert not L.is_unimodular()
    g = random_metric(rng, 3)
    assert np.allclose(ricci(MetricData(L, g)), ricci_besse(L, g), atol=1e-10)


def test_levi_civita_metric_and_torsion_free(rng):
    L = catalog.load("g6n3").L
    M = MetricData(L, random_metric(rng, 6))
    E, c, G = levi_civita(M)
    assert np.allclose(E.T @ M.g @ E, np.eye(6))
    # nabla_X Y - nabla_Y X = [X, Y] and <nabla_X Y, Z> + <Y, nabla_X Z> = 0
    assert np.allclose(G - np.transpose(G, (1, 0, 2)), c, atol=1e-12)
    assert np.allclose(G + np.transpose(G, (0, 2, 1)), 0, atol=1e-12)


@pytest.mark.parametrize("name", catalog.TABLE_ROWS)
def test_scalar_curvature_identity(name):
    S = catalog.load(name).su3
    n2 = form_norm_sq(S.metric, torsion_forms(S).w2_minus)
    assert abs(scalar_curvature(S.metric) + 0.5 * n2) < 1e-8


@pytest.mark.parametrize("n,k", [(6, 2), (7, 3)])
def test_inner_product_dimension(rng, n, k):
    M = MetricData(abelian(n), np.eye(n))
    a = rand_form(rng, n, k)
    assert form_norm_sq(M, a) == pytest.approx(np.sum(a.coeffs**2))
    assert len(a.coeffs) == comb(n, k)
