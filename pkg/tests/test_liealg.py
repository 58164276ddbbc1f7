import json

import numpy as np
import pytest

from g2flow import catalog, form
from g2flow.dsl import format_tuple, parse_form, parse_tuple
from g2flow.errors import DimensionError, JacobiError, ParseError
from g2flow.exterior import KForm, wedge
from g2flow.liealg import (
    LieAlgebra,
    abelian,
    ce_differential,
    extend_by_line,
    is_unimodular,
    parse_structure_equations,
    structure_tensor_from_brackets,
)

A57 = "(e15,-e25,-e35,e45,0,0)"


# parser --------------------------------------------------------------------


def test_parse_form_coefficients():
    a = parse_form("1/2*e12 - sqrt(2)*e34 + 3 e56 + alpha*e13", 6, {"alpha": 0.25})
    assert a.terms == {(1, 2): 0.5, (3, 4): -np.sqrt(2), (5, 6): 3.0, (1, 3): 0.25}


def test_parse_form_notations():
    assert parse_form("e^{15} - e^25", 6) == parse_form("e15-e25", 6)
    assert parse_form("e21", 6) == -parse_form("e12", 6)
    assert parse_form("e11", 6, deg=2).is_zero()
    assert parse_form("0", 6, deg=3) == KForm(6, 3)


@pytest.mark.parametrize(
    "text",
    ["e12 +", "e12 e13", "2**e12", "e12 + e123", "e19", "beta*e12", "sqrt(-2)*e12", "(e12"],
)
def test_parse_form_errors(text):
    with pytest.raises((ParseError, DimensionError)):
        parse_form(text, 6)


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_form("e12 + * e34", 6)
    assert err.value.pos == 6


def test_tuple_roundtrip():
    for name in catalog.names():
        L = catalog.load(name).L
        forms = parse_tuple(L.to_text())
        assert all(a.allclose(b, 1e-15) for a, b in zip(forms, L.dual_differentials))
        assert format_tuple(forms) == L.to_text()


# algebras ------------------------------------------------------------------


def test_a57_structure():
    L = parse_structure_equations(A57)
    assert L.dim == 6
    assert L.dual_differentials[0] == form("e15", 6)
    assert L.dual_differentials[1] == -form("e25", 6)
    assert L.d(KForm.basis_form(6, (5,))).is_zero()
    assert L.is_unimodular() and L.is_solvable() and not L.is_nilpotent()


def test_abelian():
    L = parse_structure_equations("(0,0,0,0,0,0)")
    assert L.is_abelian() and L.is_unimodular() and L.is_nilpotent()
    assert extend_by_line(L).is_abelian() and extend_by_line(L).dim == 7


def test_e11_e11():
    L = parse_structure_equations("(0,-e13,-e12,0,-e46,-e45)")
    assert L.is_unimodular() and L.is_solvable()


def test_not_unimodular():
    L = parse_structure_equations("(e12,0)")
    assert not is_unimodular(L)
    # [e1, e2] = -e1 so ad_{e2} has trace 1
    assert np.allclose(L.bracket([1, 0], [0, 1]), [-1, 0])


def test_bracket_sign_convention():
    L = parse_structure_equations(A57)
    # d e^1 = e15 means [e1, e5] = -e1
    assert np.allclose(L.bracket(np.eye(6)[0], np.eye(6)[4]), -np.eye(6)[0])
    C = L.brackets
    back = structure_tensor_from_brackets(C)
    assert all(a == b for a, b in zip(back, L.dual_differentials))


def test_jacobi_failure_reports_triple():
    with pytest.raises(JacobiError) as err:
        parse_structure_equations("(e24,e34,e12,0)")
    assert err.value.residual > 0.5
    assert err.value.triple == (2, (1, 2, 4))


def test_dimension_errors():
    L = parse_structure_equations(A57)
    with pytest.raises(DimensionError):
        ce_differential(L, KForm(7, 1))
    with pytest.raises((ParseError, DimensionError)):
        parse_structure_equations("(e17,0,0,0,0,0)")


def test_leibniz_rule(rng):
    L = catalog.load("g654").L
    a = KForm(6, 2, rng.standard_normal(15))
    b = KForm(6, 1, rng.standard_normal(6))
    lhs = L.d(wedge(a, b))
    rhs = wedge(L.d(a), b) + wedge(a, L.d(b))
    assert lhs.allclose(rhs, 1e-9)
    assert L.d(KForm.scalar(6, 3.0)).is_zero()


@pytest.mark.parametrize("name", catalog.names())
def test_d_squared_zero(name):
    L = catalog.load(name).L
    for Lk in (L, extend_by_line(L)):
        for k in range(Lk.dim - 1):
            assert np.abs(Lk.d_matrix(k + 1) @ Lk.d_matrix(k)).max(initial=0.0) < 1e-12


@pytest.mark.parametrize("name", catalog.TABLE_ROWS)
def test_table_algebras_unimodular_solvable(name):
    L = catalog.load(name).L
    assert L.is_unimodular() and L.is_solvable()


def test_nilpotent_rows():
    for name in catalog.NILPOTENT_ROWS:
        assert catalog.load(name).L.is_nilpotent()
    assert not catalog.load("a57").L.is_nilpotent()


def test_extend_twice_g51():
    L = catalog.load("g51").L
    n2 = extend_by_line(extend_by_line(L))
    assert n2.dim == 8
    assert n2.d(KForm.basis_form(8, (7,))).is_zero() and n2.d(KForm.basis_form(8, (8,))).is_zero()
    assert n2.is_nilpotent()


def test_json_roundtrip():
    L = catalog.load("a517", {"alpha": 0.5}).L
    obj = json.loads(json.dumps(L.to_json()))
    L2 = LieAlgebra.from_json(obj)
    assert all(a.allclose(b, 1e-15) for a, b in zip(L.dual_differentials, L2.dual_differentials))
    with pytest.raises(DimensionError):
        LieAlgebra.from_json({"structure": A57, "dim": 7})
    with pytest.raises(ValueError):
        LieAlgebra.from_json({"dim": 6})


def test_abelian_helper():
    assert abelian(4).is_abelian()
