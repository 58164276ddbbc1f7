"""Laplacian flow d phi/dt = Delta_phi phi of closed G2-structures.

Two routes: the explicit solution for warped products over a symplectic
half-flat structure whose w2- is a Laplacian eigenform, and a generic adaptive
Runge-Kutta integration of the 35 coefficients of phi on any 7-dimensional
Lie algebra.
"""
import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45, solve_ivp

from ._tables import basis, top_pairing
from .errors import (
    DimensionError,
    NotClosedError,
    NotEigenformError,
    NumericError,
    StabilityError,
    ValidationError,
)
from .exterior import KForm, compound, wedge
from .metric_ops import eigenform_fit, form_norm_sq
from .stability import g2_metric_arrays

CLOSED_TOL = 1e-7
DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
FIRST_STEP = 1e-3
BLOWUP = 1e10


# closed-form solution ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClosedFormFlow:
    """Parameters of the explicit solution: f(0) = a, Delta_h w2 = c w2, |w2|^2 = n2."""

    a: float
    c: float
    n2: float
    base: object = field(default=None, repr=False)
    dw2: KForm | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.a > 0:
            raise ValidationError(f"a must be positive, got {self.a}")
        if not self.n2 > 0:
            raise ValidationError("|w2-|^2 = 0: the structure is torsion-free and the flow is stationary")
        if self.c < self.n2 / 4.0 - 1e-9 * max(1.0, self.n2):
            raise ValidationError(f"eigenvalue c = {self.c} is below |w2-|^2/4 = {self.n2 / 4}")

    @property
    def degenerate(self):
        """True when 6c = |w2-|^2 and the exponential limit is used."""
        return abs(6.0 * self.c - self.n2) <= 1e-12 * max(1.0, self.n2)

    @property
    def extrapolated(self):
        return self.degenerate

    @property
    def lhat(self):
        from .liealg import extend_by_line

        return extend_by_line(self.base.L)


def from_su3(S, a=1.0, threshold=1e-8):
    """ClosedFormFlow for a symplectic half-flat S; w2- must be an eigenform."""
    from .su3 import torsion_forms

    T = torsion_forms(S)
    if not T.class_flags["symplectic_half_flat"]:
        raise ValidationError("the explicit solution needs a symplectic half-flat structure")
    if T.w2_minus.is_zero():
        raise ValidationError("w2- = 0: torsion-free, nothing flows")
    c, res, ok = eigenform_fit(S.metric, T.w2_minus, threshold)
    if not ok:
        raise NotEigenformError(f"w2- is not a Laplacian eigenform (relative residual {res:.3e})")
    return ClosedFormFlow(float(a), c, T.w2_norm_sq, S, S.L.d(T.w2_minus))


def maximal_time(cf):
    """T = 3/(n2 - 6c) < 0; -inf in the degenerate case 6c = n2."""
    if cf.degenerate:
        return -math.inf
    return 3.0 / (cf.n2 - 6.0 * cf.c)


def scalars(cf, t):
    """(f(t), k(t)); works on arrays of times."""
    t = np.asarray(t, dtype=float)
    T = maximal_time(cf)
    if np.any(t <= T):
        raise ValidationError(f"t must exceed the maximal existence time T = {T:.6g}")
    a, c, n2 = cf.a, cf.c, cf.n2
    if cf.degenerate:
        f = a * np.exp(-n2 * t / 6.0)
        k = np.expm1(c * t) / c
    else:
        base = (6.0 * c - n2) / 3.0 * t + 1.0
        f = a * base ** (n2 / (2.0 * n2 - 12.0 * c))
        k = ((a / f) ** (6.0 * c / n2) - 1.0) / c
    if f.ndim == 0:
        return float(f), float(k)
    return f, k


def scalar_derivatives(cf, t):
    """(df/dt, dk/dt) by differentiating the explicit formulas."""
    t = np.asarray(t, dtype=float)
    a, c, n2 = cf.a, cf.c, cf.n2
    f, k = scalars(cf, t)
    if cf.degenerate:
        df = -n2 / 6.0 * f
        dk = np.exp(c * t)
    else:
        eps = (6.0 * c - n2) / 3.0
        p = n2 / (2.0 * n2 - 12.0 * c)
        df = f * p * eps / (eps * t + 1.0)
        q = 6.0 * c / n2
        dk = (a / f) ** q * (-q) * df / f / c
    return df, dk


def ode_residual(cf, t):
    """Relative residual of the explicit (f, k) in the reduced ODE pair

    df/dt = -(n2/6)(a^2/f)/(1+ck)^2,   dk/dt = (a^2/f^2)/(1+ck).
    """
    a, c, n2 = cf.a, cf.c, cf.n2
    f, k = scalars(cf, t)
    df, dk = scalar_derivatives(cf, t)
    u = 1.0 + c * k
    rf = -(n2 / 6.0) * (a * a / f) / u**2
    rk = (a * a / f**2) / u
    e1 = np.abs(df - rf) / np.maximum(1.0, np.abs(rf))
    e2 = np.abs(dk - rk) / np.maximum(1.0, np.abs(rk))
    return np.maximum(e1, e2)


@dataclass(frozen=True, eq=False)
class FlowState:
    t: float
    f: float
    k: float
    omega: KForm
    psi_plus: KForm
    phi: KForm


def closed_form(cf, t):
    """Explicit phi(t) = f(t) omega(t) ^ e7 + psi+(t) with omega(t) = (a/f) omega."""
    if cf.base is None:
        raise ValidationError("closed_form needs a base structure; use scalars() for parameters only")
    f, k = scalars(cf, t)
    S = cf.base
    omega_t = S.omega * (cf.a / f)
    psi_t = S.psi_plus + cf.dw2 * k
    e7 = KForm.basis_form(7, (7,))
    phi_t = wedge(omega_t.embed(7), e7) * f + psi_t.embed(7)
    return FlowState(float(t), f, k, omega_t, psi_t, phi_t)


def rescaling_scalars(n2, t, a=1.0):
    """The c = n2/4 case: (f, omega scale, psi+ scale) = (a B^-1, B, B^{3/2}), B = n2 t/6 + 1."""
    B = n2 * np.asarray(t, dtype=float) / 6.0 + 1.0
    if np.any(B <= 0):
        raise ValidationError("t outside the maximal interval")
    return a / B, B, B**1.5


# numeric flow --------------------------------------------------------------


class LaplacianRHS:
    """Delta_phi phi = d d^* phi for closed phi on a fixed 7-dimensional algebra."""

    def __init__(self, Lhat):
        if Lhat.dim != 7:
            raise DimensionError("the Laplacian flow lives on 7-dimensional algebras")
        self.L = Lhat
        self.D2 = Lhat.d_matrix(2)
        self.D3 = Lhat.d_matrix(3)
        self.D4 = Lhat.d_matrix(4)
        self.W3 = top_pairing(7, 3)
        self.W5 = top_pairing(7, 5)
        self.nfev = 0

    def torsion(self, y):
        """(tau coefficients, g, vol); tau = d^* phi for closed phi."""
        g, vol = g2_metric_arrays(y)
        ginv = np.linalg.inv(g)
        star3 = vol * self.W3.T @ compound(ginv, 3)
        star5 = vol * self.W5.T @ compound(ginv, 5)
        # d^* on 3-forms in dimension 7: (-1)^{7*4+1} * d * = -* d *
        tau = -star5 @ (self.D4 @ (star3 @ y))
        return tau, g, vol

    def __call__(self, t, y):
        self.nfev += 1
        tau, _, _ = self.torsion(y)
        return self.D2 @ tau

    def diagnostics(self, y):
        tau, g, _ = self.torsion(y)
        G2 = compound(np.linalg.inv(g), 2)
        return {
            "closedness_residual": float(np.max(np.abs(self.D3 @ y), initial=0.0)),
            "det_g": float(np.linalg.det(g)),
            "tau_norm_sq": float(tau @ G2 @ tau),
        }


DIAG_KEYS = ("closedness_residual", "det_g", "tau_norm_sq")


@dataclass(eq=False)
class FlowCurve:
    """Sampled trajectory of phi with per-sample diagnostics."""

    times: np.ndarray
    coeffs: np.ndarray
    diagnostics: dict
    method: str
    status: str = "ok"
    message: str = ""
    flags: dict = field(default_factory=dict)

    @property
    def t_span(self):
        return float(self.times[0]), float(self.times[-1])

    @property
    def ok(self):
        return self.status == "ok"

    def __len__(self):
        return len(self.times)

    def phi(self, i):
        return KForm(7, 3, self.coeffs[i])

    @property
    def samples(self):
        return [
            (float(t), self.phi(i), {k: float(self.diagnostics[k][i]) for k in DIAG_KEYS})
            for i, t in enumerate(self.times)
        ]

    def column(self, idx):
        """Coefficient history of e^{idx} (1-based index tuple)."""
        from ._tables import index

        return self.coeffs[:, index(7, 3)[tuple(i - 1 for i in idx)]]

    def max_deviation(self, other):
        if len(other) != len(self) or not np.allclose(other.times, self.times, rtol=0, atol=1e-14):
            raise ValueError("curves are sampled at different times")
        return float(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0))

    def csv_header(self):
        return ["t"] + ["phi_" + "".join(str(i + 1) for i in b) for b in basis(7, 3)] + list(DIAG_KEYS)

    def write_csv(self, fh):
        w = csv.writer(fh)
        w.writerow(self.csv_header())
        for i, t in enumerate(self.times):
            row = [repr(float(t))] + [repr(float(x)) for x in self.coeffs[i]]
            row += [repr(float(self.diagnostics[k][i])) for k in DIAG_KEYS]
            w.writerow(row)

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def to_json(self):
        return {
            "method": self.method,
            "status": self.status,
            "message": self.message,
            "flags": dict(self.flags),
            "t_span": list(self.t_span),
            "samples": [
                {"t": float(t), "phi": self.phi(i).to_json(),
                 **{k: float(self.diagnostics[k][i]) for k in DIAG_KEYS}}
                for i, t in enumerate(self.times)
            ],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=1)


def _curve(times, ys, rhs, method, status="ok", message="", flags=None):
    ys = np.array(ys, dtype=float).reshape(len(times), 35)
    diag = {k: np.empty(len(times)) for k in DIAG_KEYS}
    for i, y in enumerate(ys):
        d = rhs.diagnostics(y)
        for k in DIAG_KEYS:
            diag[k][i] = d[k]
    return FlowCurve(np.array(times, dtype=float), ys, diag, method, status, message, dict(flags or {}))


def closed_form_curve(cf, times):
    times = np.asarray(times, dtype=float)
    ys = [closed_form(cf, t).phi.coeffs for t in times]
    flags = {"extrapolated": True} if cf.extrapolated else {}
    return _curve(times, ys, LaplacianRHS(cf.lhat), "closed_form", flags=flags)


def integrate_flow(phi0, Lhat, t_end, tol=DEFAULT_RTOL, *, atol=DEFAULT_ATOL, first_step=FIRST_STEP,
                   t_eval=None, max_steps=200000, closed_tol=CLOSED_TOL):
    """Adaptive RK4(5) integration of d phi/dt = Delta_phi phi from t = 0 to t_end.

    Samples are the accepted steps, or the points ``t_eval`` through the
    solver's dense output. Integration stops early, with ``status`` set, when
    phi leaves the positive orbit, the step size underflows or the
    coefficients blow up; no exception is raised in those cases.
    """
    if phi0.dim != 7 or phi0.deg != 3:
        raise DimensionError("expected a 3-form on R^7")
    rhs = LaplacianRHS(Lhat)
    y0 = np.array(phi0.coeffs, dtype=float)
    g2_metric_arrays(y0)  # raises StabilityError for unstable input
    res = float(np.max(np.abs(rhs.D3 @ y0), initial=0.0))
    if res > closed_tol:
        raise NotClosedError(f"initial 3-form is not closed (max |d phi| = {res:.3e})")
    t_end = float(t_end)
    if t_end == 0.0:
        return _curve([0.0], [y0], rhs, "rk_adaptive")

    solver = RK45(rhs, 0.0, y0, t_end, first_step=min(first_step, abs(t_end)), rtol=tol, atol=atol)
    times, ys = [0.0], [y0.copy()]
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        times, ys = [], []
        pending = list(t_eval)
        if pending and pending[0] == 0.0:
            times.append(0.0)
            ys.append(y0.copy())
            pending.pop(0)
    status, message = "ok", ""
    last_good = 0.0
    steps = 0
    while solver.status == "running":
        try:
            msg = solver.step()
        except StabilityError as exc:
            # a stage left the positive orbit: the step was too long or the
            # singular time is close
            status, message = "stability_lost", f"{exc} (last good t = {last_good:.6g})"
            break
        steps += 1
        if solver.status == "failed":
            status = "step_underflow"
            message = f"{msg} (last good t = {last_good:.6g})"
            break
        y = solver.y
        try:
            g2_metric_arrays(y)
        except StabilityError as exc:
            status, message = "stability_lost", f"{exc} (last good t = {last_good:.6g})"
            break
        if t_eval is None:
            times.append(solver.t)
            ys.append(y.copy())
        else:
            dense = solver.dense_output()
            lo, hi = sorted((solver.t_old, solver.t))
            while pending and lo <= pending[0] <= hi:
                tt = pending.pop(0)
                times.append(tt)
                ys.append(dense(tt))
        last_good = solver.t
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP:
            status, message = "blowup", f"coefficients exceed {BLOWUP:g} at t = {solver.t:.6g}"
            break
        if steps >= max_steps:
            status, message = "max_steps", f"stopped after {steps} steps at t = {solver.t:.6g}"
            break
    curve = _curve(times, ys, rhs, "rk_adaptive", status, message)
    curve.flags.update({"steps": steps, "nfev": rhs.nfev, "last_good_t": last_good})
    if curve.ok and np.max(curve.diagnostics["closedness_residual"]) > closed_tol:
        curve.status = "closedness_drift"
        curve.message = f"max |d phi| = {np.max(curve.diagnostics['closedness_residual']):.3e}"
    return curve


# the reduced system of the g_{6,54} non-eigenform example --------------------


def reduced_rhs(t, v):
    v1, v4 = v
    return [
        (2.0 - v1**12) / (3.0 * v1**5 * v4**2),
        (2.0 / 3.0) * (1.0 + v1**12) / (v1**6 * v4),
    ]


ANSATZ_IDX = ((1, 4, 7), (2, 3, 7), (5, 6, 7), (1, 2, 5), (1, 3, 6), (2, 4, 6), (3, 4, 5))


def ansatz_coefficients(v1, v4):
    """Coefficients of phi on ANSATZ_IDX for the reduced variables."""
    v1 = np.asarray(v1, dtype=float)
    v4 = np.asarray(v4, dtype=float)
    one = np.ones_like(v1)
    q = v1**4 * v4**2
    return np.stack([one, one, one, one, -q, q, (v4 / v1) ** 2], axis=-1)


@dataclass(frozen=True, eq=False)
class ReducedSolution:
    t: np.ndarray
    v1: np.ndarray
    v4: np.ndarray
    status: str
    sol: object = field(repr=False, default=None)

    def coefficients(self):
        return ansatz_coefficients(self.v1, self.v4)


def integrate_reduced(t_end, tol=1e-12, y0=(1.0, 1.0), t_eval=None):
    """Solve the reduced (v1, v4) system with an 8th-order Runge-Kutta method."""

    def hit_zero(t, v):
        return min(v[0], v[1]) - 1e-8

    hit_zero.terminal = True

    def blowup(t, v):
        return BLOWUP - max(abs(v[0]), abs(v[1]))

    blowup.terminal = True
    sol = solve_ivp(
        reduced_rhs, (0.0, float(t_end)), list(y0), method="DOP853",
        rtol=tol, atol=tol * 1e-2, t_eval=t_eval, dense_output=True, events=(hit_zero, blowup),
    )
    if sol.status == -1:
        raise NumericError(f"reduced system failed: {sol.message}")
    status = "ok" if sol.status == 0 else "blowup"
    return ReducedSolution(sol.t, sol.y[0], sol.y[1], status, sol)




# self-similar solutions ------------------------------------------------------


def soliton_type(lam, tol=1e-12):
    if lam > tol:
        return "expanding"
    if lam < -tol:
        return "shrinking"
    return "steady"


def maximal_interval(lam):
    """Interval on which 1 + (2/3) lambda t > 0."""
    if lam > 0:
        return (-1.5 / lam, math.inf)
    if lam < 0:
        return (-math.inf, -1.5 / lam)
    return (-math.inf, math.inf)


def selfsimilar_scale(lam, t):
    """rho(t) = (1 + (2/3) lambda t)^{3/2}."""
    base = 1.0 + (2.0 / 3.0) * lam * np.asarray(t, dtype=float)
    if np.any(base <= 0):
        lo, hi = maximal_interval(lam)
        raise ValidationError(f"t outside the maximal interval ({lo:.6g}, {hi:.6g})")
    out = base**1.5
    return float(out) if out.ndim == 0 else out
