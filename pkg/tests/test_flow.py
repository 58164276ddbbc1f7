import io
import json
import math

import numpy as np
import pytest

from g2flow import _backend, catalog, form
from g2flow.errors import DimensionError, NotClosedError, NotEigenformError, StabilityError, ValidationError
from g2flow.exterior import KForm, wedge
from g2flow.flow import (
    ANSATZ_IDX,
    ClosedFormFlow,
    FlowCurve,
    LaplacianRHS,
    closed_form,
    closed_form_curve,
    rescaling_scalars,
    from_su3,
    integrate_flow,
    integrate_reduced,
    maximal_interval,
    maximal_time,
    ode_residual,
    reduced_rhs,
    scalar_derivatives,
    scalars,
    selfsimilar_scale,
    soliton_type,
)
from g2flow.g2warp import ds
from g2flow.metric_ops import form_norm_sq, scalar_curvature
from g2flow.su3 import build_su3, torsion_forms


def cf_for(name, a=1.0):
    return from_su3(catalog.load(name).su3, a)


# explicit solution ----------------------------------------------------------


@pytest.mark.parametrize("a", [1.0, 2.5])
def test_a57_scalars(a):
    cf = cf_for("a57", a)
    assert (cf.c, cf.n2) == (pytest.approx(4.0), pytest.approx(8.0))
    ts = np.linspace(-0.18, 4.0, 50)
    f, _ = scalars(cf, ts)
    assert np.allclose(f, a * (16 / 3 * ts + 1) ** -0.25, rtol=1e-13)


def test_a57_psi_plus_coefficients():
    cf = cf_for("a57")
    for t in (-0.1, 0.0, 0.5, 3.0):
        st = closed_form(cf, t)
        expect = -((16 / 3 * t + 1) ** 0.75)
        assert st.psi_plus[(1, 4, 5)] == pytest.approx(expect, rel=1e-13)
        assert st.psi_plus[(2, 3, 5)] == pytest.approx(expect, rel=1e-13)
        # phi(t) = a omega ^ e7 + psi+(t)
        assert st.phi.allclose(wedge(catalog.load("a57").omega.embed(7), ds()) + st.psi_plus.embed(7), 1e-12)


def test_maximal_times():
    assert maximal_time(cf_for("a57")) == pytest.approx(-3 / 16)
    assert maximal_time(cf_for("g51")) == pytest.approx(-3 / 10)
    tw = ClosedFormFlow(1.0, catalog.TWISTOR_C, catalog.TWISTOR_N2)
    assert maximal_time(tw) == pytest.approx(-1 / 16)


def test_twistor_parameters():
    tw = ClosedFormFlow(1.0, 24.0, 96.0)
    ts = np.linspace(-0.06, 2.0, 40)
    f, k = scalars(tw, ts)
    assert np.allclose(f, 1 / (16 * ts + 1), rtol=1e-13)
    f2, om, ps = rescaling_scalars(96.0, ts)
    assert np.allclose(f2, f) and np.allclose(om, 16 * ts + 1) and np.allclose(ps, (16 * ts + 1) ** 1.5)
    assert np.allclose(1 + 24 * k, (16 * ts + 1) ** 1.5, rtol=1e-12)


@pytest.mark.parametrize("name", catalog.RESCALING_ROWS)
def test_rescaling_rows(name):
    # c = |w2-|^2 / 4: omega and psi+ only rescale
    cf = cf_for(name)
    assert cf.c == pytest.approx(cf.n2 / 4)
    S = cf.base
    for t in (-0.05, 0.3, 2.0):
        st = closed_form(cf, t)
        _, om, ps = rescaling_scalars(cf.n2, t)
        assert st.omega.allclose(S.omega * om, 1e-11)
        assert st.psi_plus.allclose(S.psi_plus * ps, 1e-11)


@pytest.mark.parametrize("name", catalog.TABLE_ROWS)
def test_ode_residual_and_monotonicity(name):
    cf = cf_for(name)
    T = maximal_time(cf)
    ts = np.linspace(T + 1e-3 * abs(T), 5.0, 100)
    assert np.max(ode_residual(cf, ts)) < 1e-10
    f, k = scalars(cf, ts)
    assert np.all(np.diff(f) < 0) and np.all(np.diff(k) > 0)
    assert np.all(1 + cf.c * k > 0)
    # derivatives agree with a difference quotient
    df, dk = scalar_derivatives(cf, 0.3)
    h = 1e-6
    assert df == pytest.approx((scalars(cf, 0.3 + h)[0] - scalars(cf, 0.3 - h)[0]) / (2 * h), rel=1e-6)
    assert dk == pytest.approx((scalars(cf, 0.3 + h)[1] - scalars(cf, 0.3 - h)[1]) / (2 * h), rel=1e-6)


@pytest.mark.parametrize("name", catalog.TABLE_ROWS)
def test_dw2_norm(name):
    cf = cf_for(name)
    assert form_norm_sq(cf.base.metric, cf.dw2) == pytest.approx(cf.c * cf.n2, rel=1e-10)


@pytest.mark.parametrize("name", catalog.TABLE_ROWS)
def test_structure_along_explicit_flow(name):
    cf = cf_for(name)
    row = catalog.load(name)
    for t in (-0.5 * abs(maximal_time(cf)), 0.4, 1.5):
        st = closed_form(cf, t)
        S = build_su3(row.L, st.omega, st.psi_plus)
        T = torsion_forms(S)
        assert T.class_flags["symplectic_half_flat"]
        assert abs(scalar_curvature(S.metric) + 0.5 * T.w2_norm_sq) < 1e-9


def test_closed_form_errors():
    with pytest.raises(ValidationError):
        ClosedFormFlow(0.0, 4, 8)
    with pytest.raises(ValidationError):
        ClosedFormFlow(1.0, 4, 0)
    with pytest.raises(ValidationError):
        ClosedFormFlow(1.0, 1.0, 8.0)  # c below n2/4
    cf = cf_for("a57")
    with pytest.raises(ValidationError):
        scalars(cf, -0.2)
    with pytest.raises(ValidationError):
        closed_form(ClosedFormFlow(1.0, 4, 8), 0.1)
    with pytest.raises(NotEigenformError):
        from_su3(catalog.load("g654-noneigen").su3)
    with pytest.raises(ValidationError):
        from_su3(catalog.load("flat").su3)
    with pytest.raises(ValidationError):
        from_su3(catalog.load("w2w4").su3)
    with pytest.raises(ValidationError):
        rescaling_scalars(96.0, -1.0)


def test_degenerate_exponent():
    # 6c = n2 lies below the bound c >= n2/4 unless n2 = 0, so only the
    # limit formula itself is exercised here
    cf = object.__new__(ClosedFormFlow)
    object.__setattr__(cf, "a", 1.0)
    object.__setattr__(cf, "c", 1.0)
    object.__setattr__(cf, "n2", 6.0)
    object.__setattr__(cf, "base", None)
    object.__setattr__(cf, "dw2", None)
    assert cf.degenerate and cf.extrapolated
    assert maximal_time(cf) == -math.inf
    f, k = scalars(cf, 0.5)
    assert f == pytest.approx(math.exp(-0.5)) and k == pytest.approx(math.expm1(0.5))


# numeric flow -----------------------------------------------------------------


def test_numeric_matches_explicit_a57():
    row = catalog.load("a57")
    G = row.warped(1.0)
    cur = integrate_flow(G.phi, G.Lhat, 1.0, 1e-9)
    assert cur.ok and cur.method == "rk_adaptive"
    ref = closed_form_curve(from_su3(row.su3), cur.times)
    assert cur.max_deviation(ref) < 1e-6
    assert np.max(cur.diagnostics["closedness_residual"]) < 1e-7
    assert np.all(np.diff(cur.times) > 0)


@pytest.mark.parametrize("name", ["g51", "g6n3", "g6_38"])
def test_omega_block_constant(name):
    row = catalog.load(name)
    G = row.warped(1.3)
    cur = integrate_flow(G.phi, G.Lhat, 0.8, 1e-10)
    block = wedge(row.omega.embed(7), ds()) * 1.3
    mask = np.array([7 in idx for idx in _indices()])
    assert np.max(np.abs(cur.coeffs[:, mask] - block.coeffs[mask])) < 1e-7


def _indices():
    from itertools import combinations

    return [tuple(i + 1 for i in c) for c in combinations(range(7), 3)]


def test_flat_flow_is_constant():
    G = catalog.load("flat").warped(1.0)
    cur = integrate_flow(G.phi, G.Lhat, 2.0)
    assert cur.ok
    assert np.max(np.abs(cur.coeffs - G.phi.coeffs)) == 0.0
    assert np.all(cur.diagnostics["tau_norm_sq"] == 0.0)


def test_backward_flow_stops_before_singular_time():
    G = catalog.load("a57").warped(1.0)
    cur = integrate_flow(G.phi, G.Lhat, -0.2, 1e-9)
    assert cur.status in ("stability_lost", "step_underflow", "blowup")
    assert -3 / 16 - 1e-3 < cur.flags["last_good_t"] < 0
    assert "last good t" in cur.message


def test_t_eval_sampling():
    row = catalog.load("g51")
    G = row.warped(1.0)
    ts = np.linspace(0, 0.5, 11)
    cur = integrate_flow(G.phi, G.Lhat, 0.5, 1e-10, t_eval=ts)
    assert np.allclose(cur.times, ts)
    ref = closed_form_curve(from_su3(row.su3), ts)
    assert cur.max_deviation(ref) < 1e-7


def test_zero_length_flow():
    G = catalog.load("a57").warped(1.0)
    cur = integrate_flow(G.phi, G.Lhat, 0.0)
    assert len(cur) == 1 and cur.ok


def test_integrate_flow_errors():
    G = catalog.load("w2w4").warped(1.0)
    with pytest.raises(NotClosedError):
        integrate_flow(G.phi, G.Lhat, 0.1)
    Ga = catalog.load("a57").warped(1.0)
    with pytest.raises(StabilityError):
        integrate_flow(form("e123", 7), Ga.Lhat, 0.1)
    with pytest.raises(DimensionError):
        integrate_flow(form("e123", 6), Ga.Lhat, 0.1)
    with pytest.raises(DimensionError):
        LaplacianRHS(catalog.load("a57").L)


def test_max_steps_status():
    G = catalog.load("a57").warped(1.0)
    cur = integrate_flow(G.phi, G.Lhat, 1.0, 1e-9, max_steps=3)
    assert cur.status == "max_steps" and not cur.ok


@pytest.mark.parametrize("name", catalog.SOLITON_ROWS)
def test_selfsimilar_torsion_decay(name):
    row = catalog.load(name)
    G = row.warped(1.0)
    ts = np.linspace(0, 1, 11)
    cur = integrate_flow(G.phi, G.Lhat, 1.0, 1e-10, t_eval=ts)
    tau = cur.diagnostics["tau_norm_sq"]
    assert np.max(np.abs(tau - tau[0] / (1 + 2 * row.lam * ts / 3))) < 1e-5


def test_backends_agree():
    row = catalog.load("g6n3")
    G = row.warped(1.0)
    old = _backend.BACKEND
    try:
        _backend.use("python")
        a = integrate_flow(G.phi, G.Lhat, 0.3, 1e-9)
        if old == "cython":
            _backend.use("cython")
        b = integrate_flow(G.phi, G.Lhat, 0.3, 1e-9)
    finally:
        _backend.use(old)
    # rounding-level differences move the adaptive step times slightly, so
    # compare the states at the common end point
    assert len(a) == len(b)
    assert np.max(np.abs(a.times - b.times)) < 1e-8
    assert np.max(np.abs(a.coeffs[-1] - b.coeffs[-1])) < 1e-12
    with pytest.raises(ValueError):
        _backend.use("fortran")


# serialization ------------------------------------------------------------------


def test_curve_csv_and_json():
    row = catalog.load("a57")
    cur = closed_form_curve(from_su3(row.su3), [0.0, 0.5, 1.0])
    text = cur.to_csv()
    lines = text.strip().splitlines()
    assert len(lines) == 4
    header = lines[0].split(",")
    assert header[0] == "t" and header[1] == "phi_123" and header[-3:] == cur.csv_header()[-3:]
    assert len(header) == 1 + 35 + 3
    obj = json.loads(cur.dumps())
    assert obj["method"] == "closed_form" and len(obj["samples"]) == 3
    assert KForm.from_json(obj["samples"][1]["phi"]).allclose(cur.phi(1), 1e-15)
    t, phi, diag = cur.samples[2]
    assert t == 1.0 and set(diag) == {"closedness_residual", "det_g", "tau_norm_sq"}
    buf = io.StringIO()
    cur.write_csv(buf)
    assert buf.getvalue() == text


def test_max_deviation_needs_same_times():
    cf = from_su3(catalog.load("a57").su3)
    with pytest.raises(ValueError):
        closed_form_curve(cf, [0, 1]).max_deviation(closed_form_curve(cf, [0, 0.5]))


# reduced system of the non-eigenform example ----------------------------------------


def test_reduced_initial_data():
    assert np.allclose(reduced_rhs(0.0, [1.0, 1.0]), [1 / 3, 4 / 3])
    sol = integrate_reduced(0.5, t_eval=[0.0, 0.5])
    assert (sol.v1[0], sol.v4[0]) == (1.0, 1.0)
    assert sol.status == "ok"


def test_reduced_vs_full_flow():
    row = catalog.load("g654-noneigen")
    G = row.warped(1.0)
    ts = np.linspace(0, 0.5, 6)
    cur = integrate_flow(G.phi, G.Lhat, 0.5, 1e-10, t_eval=ts)
    red = integrate_reduced(0.5, t_eval=ts)
    A = np.stack([cur.column(i) for i in ANSATZ_IDX], axis=1)
    assert np.max(np.abs(A - red.coefficients())) < 1e-6
    assert cur.column((2, 4, 6))[-1] == pytest.approx(red.v1[-1] ** 4 * red.v4[-1] ** 2, abs=1e-6)


# self-similar helpers ----------------------------------------------------------------


def test_selfsimilar_helpers():
    assert selfsimilar_scale(0.0, 3.0) == pytest.approx(1.0)
    assert selfsimilar_scale(8.0, 1.0) == pytest.approx((1 + 16 / 3) ** 1.5)
    assert maximal_interval(8.0) == (pytest.approx(-3 / 16), math.inf)
    assert maximal_interval(-1.0)[1] == pytest.approx(1.5)
    assert maximal_interval(0.0) == (-math.inf, math.inf)
    assert [soliton_type(x) for x in (1.0, 0.0, -2.0)] == ["expanding", "steady", "shrinking"]
    with pytest.raises(ValidationError):
        selfsimilar_scale(8.0, -1.0)


def test_flow_curve_type():
    assert FlowCurve.__dataclass_fields__["status"].default == "ok"
