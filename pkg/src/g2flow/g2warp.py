"""Warped G2-structures phi = a omega ^ e7 + psi+ on g + R and their torsion."""
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import DimensionError, NotClosedError, NumericError, ValidationError
from .exterior import KForm, two_form_matrix, unit_vector, wedge
from .liealg import LieAlgebra, extend_by_line
from .metric_ops import MetricData, codifferential, form_norm_sq, hodge_laplacian, hodge_star, ricci
from .stability import g2_metric_arrays

CLOSED_TOL = 1e-9
# tolerance for the warped metric against h + a^2 (e7)^2
METRIC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class G2Structure:
    Lhat: LieAlgebra
    phi: KForm
    metric: MetricData = field(repr=False)
    star_phi: KForm = field(repr=False)
    closed: bool
    closedness_residual: float
    base: object = field(default=None, repr=False)
    a: float | None = None

    @property
    def g(self):
        return self.metric.g

    @property
    def vol(self):
        return self.metric.vol


@dataclass(frozen=True, eq=False)
class G2Torsion:
    tau: KForm
    tau_norm_sq: float
    laplacian_phi: KForm
    tau_tilde: np.ndarray
    solve_residual: float
    omega14_residual: float

    def to_json(self, closed=True):
        return {
            "tau": self.tau.to_json(),
            "tau_norm_sq": self.tau_norm_sq,
            "closed": closed,
            "laplacian_phi": self.laplacian_phi.to_json(),
        }


def ds(n=7):
    """The 1-form dual to the extra direction."""
    return KForm.basis_form(n, (n,))


def g2_structure(Lhat, phi, tol=CLOSED_TOL):
    """G2-structure from an arbitrary positive 3-form on a 7-dimensional algebra."""
    if Lhat.dim != 7 or phi.dim != 7 or phi.deg != 3:
        raise DimensionError("expected a 3-form on a 7-dimensional algebra")
    g, vol = g2_metric_arrays(phi.coeffs)
    M = MetricData(Lhat, g, vol)
    dphi = Lhat.d(phi)
    res = dphi.max_abs()
    return G2Structure(Lhat, phi, M, hodge_star(M, phi), res < tol * max(1.0, phi.max_abs()), res)


def warped_phi(S, a):
    n = S.L.dim + 1
    return wedge(S.omega.embed(n), ds(n)) * a + S.psi_plus.embed(n)


def build_warped(S, a=1.0):
    """phi = a omega ^ e7 + psi+ on the product algebra with constant warping a."""
    a = float(a)
    if not a > 0:
        raise ValidationError(f"warping constant must be positive, got {a}")
    Lhat = extend_by_line(S.L)
    G = g2_structure(Lhat, warped_phi(S, a))
    expect = np.zeros((7, 7))
    expect[:6, :6] = S.h
    expect[6, 6] = a * a
    err = float(np.max(np.abs(G.g - expect)))
    if err > METRIC_TOL * max(1.0, np.abs(expect).max()):
        raise NumericError(f"warped metric differs from h + a^2 ds^2 by {err:.3e}")
    return G2Structure(G.Lhat, G.phi, G.metric, G.star_phi, G.closed, G.closedness_residual, S, a)


def omega14_basis(G):
    """Columns span {beta in Lambda^2 : beta ^ *phi = 0} (dimension 14)."""
    A = np.array([wedge(KForm(7, 2, e), G.star_phi).coeffs for e in np.eye(21)]).T
    _, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-10 * s[0]))
    B = Vt[rank:].T
    if B.shape[1] != 14:
        raise NumericError(f"Lambda^2_14 has dimension {B.shape[1]}; phi is degenerate")
    return B


def tau_tilde(tau, g):
    """tau_ik g^kr tau_rj."""
    T = two_form_matrix(tau)
    out = T @ np.linalg.inv(g) @ T
    return 0.5 * (out + out.T)


def g2_torsion(G, check=True):
    """Torsion 2-form of a closed G2-structure: d(*phi) = tau ^ phi, tau in Lambda^2_14."""
    if not G.closed:
        raise NotClosedError(f"phi is not closed (max |d phi| = {G.closedness_residual:.3e})")
    Lhat = G.Lhat
    B = omega14_basis(G)
    A = np.array([wedge(KForm(7, 2, b), G.phi).coeffs for b in B.T]).T
    rhs = Lhat.d(G.star_phi).coeffs
    y, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    solve_res = float(np.max(np.abs(A @ y - rhs), initial=0.0))
    tau = KForm(7, 2, B @ y)
    if check and solve_res > 1e-8 * max(1.0, np.abs(rhs).max()):
        raise NumericError(f"no tau in Lambda^2_14 solves d*phi = tau ^ phi (residual {solve_res:.3e})")
    lap = Lhat.d(tau)
    return G2Torsion(
        tau=tau,
        tau_norm_sq=form_norm_sq(G.metric, tau),
        laplacian_phi=lap,
        tau_tilde=tau_tilde(tau, G.g),
        solve_residual=solve_res,
        omega14_residual=wedge(tau, G.star_phi).max_abs(),
    )


def laplacian_phi(G):
    """Delta_phi phi = d d^* phi for closed phi, straight from the Hodge Laplacian."""
    return hodge_laplacian(G.metric, G.phi)


def torsion_cross_checks(G, T=None):
    """Residuals of tau against d^* phi and of d tau against the Hodge Laplacian."""
    T = g2_torsion(G) if T is None else T
    return {
        "tau_vs_codiff": (T.tau - codifferential(G.metric, G.phi)).max_abs(),
        "laplacian": (T.laplacian_phi - laplacian_phi(G)).max_abs(),
        "omega14": T.omega14_residual,
        "solve": T.solve_residual,
    }


def metric_flow_rhs(G, T=None):
    """dg/dt along the Laplacian flow: -2 Ric - (1/3)|tau|^2 g - tau~."""
    T = g2_torsion(G) if T is None else T
    return -2.0 * ricci(G.metric) - (T.tau_norm_sq / 3.0) * G.g - T.tau_tilde


# pointwise formulas for a warping function f with d log f = -theta -------


def warped_metric(S, f):
    """MetricData of h + f^2 ds^2 with the orientation of the warped phi."""
    g = np.zeros((7, 7))
    g[:6, :6] = S.h
    g[6, 6] = f * f
    return MetricData(extend_by_line(S.L), g, f * S.vol)


def warped_tau_formula(S, theta, f, w2=None):
    """tau = w2- + *_h(theta ^ psi-) + 2 f J theta ^ ds evaluated at a point."""
    from .su3 import torsion_forms

    if w2 is None:
        w2 = torsion_forms(S).w2_minus
    s = ds()
    t1 = hodge_star(S.metric, wedge(theta, S.psi_minus))
    return w2.embed(7) + t1.embed(7) + wedge(S.J_form(theta).embed(7), s) * (2.0 * f)


def warped_dstar_phi_formula(S, theta, f, w2=None):
    """d(*phi) when d f = -f theta: -f theta^psi-^ds + f w2^omega^ds + theta^omega^2."""
    from .su3 import torsion_forms

    if w2 is None:
        w2 = torsion_forms(S).w2_minus
    s = ds()
    om = S.omega
    out = wedge(wedge(theta, S.psi_minus).embed(7), s) * (-f)
    out = out + wedge(wedge(w2, om).embed(7), s) * f
    return out + wedge(theta, wedge(om, om)).embed(7)


def report(G):
    T = g2_torsion(G)
    return T.to_json(closed=G.closed)
