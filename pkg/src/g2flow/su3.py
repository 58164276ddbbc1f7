"""SU(3)-structures on 6-dimensional Lie algebras and their torsion forms."""
from dataclasses import dataclass, field

import numpy as np

from .config import get_tol
from .errors import (
    CompatibilityError,
    DimensionError,
    NormalizationError,
    PositivityError,
    StabilityError,
    TorsionClassError,
)
from .exterior import Endomorphism, KForm, contract, endo_action, two_form_matrix, wedge
from .liealg import LieAlgebra
from .metric_ops import MetricData, codifferential, form_inner, form_norm_sq, hodge_star
from .stability import induced_complex_structure, stability_report

# invariants are checked with a tolerance relative to the size of the data
CHECK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SU3Structure:
    L: LieAlgebra
    omega: KForm
    psi_plus: KForm
    J: Endomorphism
    psi_minus: KForm
    h: np.ndarray
    vol: float
    metric: MetricData = field(repr=False)
    name: str | None = None

    def J_form(self, a):
        """J acting on a form: a(J., ..., J.)."""
        return endo_action(self.J, a)

    def to_json(self):
        return {
            "algebra": self.L.to_json(),
            "omega": self.omega.to_json(),
            "psi_plus": self.psi_plus.to_json(),
        }


@dataclass(frozen=True, eq=False)
class SU3Torsion:
    theta: KForm
    w2_minus: KForm
    gamma: KForm
    class_flags: dict
    w2_norm_sq: float


def _residual(a):
    return a.max_abs()


def build_su3(L, omega, psi_plus, name=None, check_hodge=True):
    """Validate ``(omega, psi_plus)`` and derive J, psi_minus, h and the volume.

    Each failed condition raises its own :class:`ValidationError` subclass.
    """
    if L.dim != 6:
        raise DimensionError("SU(3)-structures live on 6-dimensional algebras")
    if omega.dim != 6 or omega.deg != 2 or psi_plus.dim != 6 or psi_plus.deg != 3:
        raise DimensionError("expected a 2-form and a 3-form on R^6")
    omega3 = wedge(wedge(omega, omega), omega)
    if abs(omega3.top_coefficient()) < get_tol():
        raise StabilityError("omega is degenerate (omega^3 = 0)")
    nu = omega3 / 6.0
    rep = stability_report(psi_plus, nu)
    if rep.J is None:
        raise StabilityError(f"psi_plus is not stable with P < 0 (P = {rep.P:.6g})")
    scale = max(1.0, omega.max_abs(), psi_plus.max_abs()) ** 3
    comp = wedge(omega, psi_plus)
    if _residual(comp) > CHECK_TOL * scale:
        raise CompatibilityError(f"omega ^ psi_plus != 0 (residual {_residual(comp):.3e})")
    J = rep.J
    psi_minus = endo_action(J, psi_plus)
    norm = wedge(psi_plus, psi_minus) - omega3 * (2.0 / 3.0)
    if _residual(norm) > CHECK_TOL * scale:
        raise NormalizationError(
            f"psi_plus ^ psi_minus != (2/3) omega^3 (residual {_residual(norm):.3e})"
        )
    h = two_form_matrix(omega) @ J.matrix
    if np.max(np.abs(h - h.T)) > CHECK_TOL * scale:
        raise PositivityError("omega(., J.) is not symmetric")
    h = 0.5 * (h + h.T)
    if np.linalg.eigvalsh(h)[0] <= 0:
        raise PositivityError("omega(., J.) is not positive definite")
    vol = nu.top_coefficient()
    h.setflags(write=False)
    M = MetricData(L, h, vol)
    S = SU3Structure(L, omega, psi_plus, J, psi_minus, h, vol, M, name or L.name)
    if check_hodge:
        r1 = _residual(hodge_star(M, omega) - wedge(omega, omega) * 0.5)
        r2 = _residual(hodge_star(M, psi_plus) - psi_minus)
        if max(r1, r2) > CHECK_TOL * scale:
            raise NormalizationError(f"Hodge duals inconsistent (residuals {r1:.3e}, {r2:.3e})")
    return S


def omega8_basis(S):
    """Columns span {beta : beta ^ omega^2 = 0, J beta = beta} (dimension 8)."""
    from .exterior import pullback_matrix

    om2 = wedge(S.omega, S.omega)
    rows = [wedge(KForm(6, 2, e), om2).coeffs for e in np.eye(15)]
    A = np.vstack([np.array(rows).T, pullback_matrix(S.J.matrix, 2) - np.eye(15)])
    _, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return Vt[rank:].T


def _project(G, B, x):
    """G-orthogonal projection of x onto the column span of B."""
    coef = np.linalg.solve(B.T @ G @ B, B.T @ G @ x)
    return B @ coef, coef


def project_omega8(S, beta):
    if beta.deg != 2 or beta.dim != 6:
        raise DimensionError("expected a 2-form on R^6")
    B = omega8_basis(S)
    proj, _ = _project(S.metric.gram(2), B, beta.coeffs)
    return KForm(6, 2, proj)


@dataclass(frozen=True)
class ThreeFormSplit:
    k_plus: float
    k_minus: float
    gamma: KForm
    beta: KForm

    def __iter__(self):
        return iter((self.k_plus, self.k_minus, self.gamma, self.beta))


def decompose_3form(S, rho):
    """rho = k+ psi+ + k- psi- + gamma + beta ^ omega with gamma in Omega^3_12."""
    if rho.deg != 3 or rho.dim != 6:
        raise DimensionError("expected a 3-form on R^6")
    M = S.metric
    n_pp = form_norm_sq(M, S.psi_plus)
    k_plus = form_inner(M, rho, S.psi_plus) / n_pp
    k_minus = form_inner(M, rho, S.psi_minus) / form_norm_sq(M, S.psi_minus)
    B = np.array([wedge(KForm.basis_form(6, (i + 1,)), S.omega).coeffs for i in range(6)]).T
    _, bcoef = _project(M.gram(3), B, rho.coeffs)
    beta = KForm(6, 1, bcoef)
    gamma = rho - S.psi_plus * k_plus - S.psi_minus * k_minus - wedge(beta, S.omega)
    return ThreeFormSplit(float(k_plus), float(k_minus), gamma, beta)


def lee_form(S):
    """theta = -1/2 J(d* omega)."""
    return S.J_form(codifferential(S.metric, S.omega)) * (-0.5)


def torsion_forms(S, tol=None):
    """theta, w2-, gamma for a structure with d psi+ = 0 and d omega = theta ^ omega."""
    tol = CHECK_TOL if tol is None else tol
    L = S.L
    scale = max(1.0, float(np.abs(L.brackets).max()))
    dpp = L.d(S.psi_plus)
    if _residual(dpp) > tol * scale:
        raise TorsionClassError(f"unsupported torsion class: d psi_plus != 0 (max {_residual(dpp):.3e})")
    dom = L.d(S.omega)
    if _residual(dom) <= tol * scale:
        theta = KForm(6, 1)
        omega_closed = True
    else:
        theta = lee_form(S)
        r = _residual(dom - wedge(theta, S.omega))
        if r > tol * scale:
            raise TorsionClassError(
                f"unsupported torsion class: d omega - theta ^ omega = {r:.3e}"
            )
        omega_closed = False
    dpm = L.d(S.psi_minus)
    B = omega8_basis(S)
    A = np.array([wedge(KForm(6, 2, b), S.omega).coeffs for b in B.T]).T
    y, *_ = np.linalg.lstsq(A, dpm.coeffs, rcond=None)
    r = float(np.max(np.abs(A @ y - dpm.coeffs), initial=0.0))
    if r > tol * scale:
        raise TorsionClassError(f"unsupported torsion class: d psi_minus is not w ^ omega (residual {r:.3e})")
    w2 = KForm(6, 2, B @ y)
    n2 = form_norm_sq(S.metric, w2)
    gamma = decompose_3form(S, L.d(w2)).gamma
    shf = omega_closed and theta.is_zero()
    return SU3Torsion(
        theta=theta,
        w2_minus=w2,
        gamma=gamma,
        class_flags={"symplectic_half_flat": shf, "W2W4": True},
        w2_norm_sq=n2,
    )


def one_form_identities(S, beta):
    """Residuals of the 1-form identities relating *(beta ^ psi+-), J and omega.

    Returns a dict of named residuals plus ``"max"``.
    """
    if beta.deg != 1 or beta.dim != 6:
        raise DimensionError("expected a 1-form on R^6")
    M = S.metric
    om, pp, pm = S.omega, S.psi_plus, S.psi_minus
    om2 = wedge(om, om)
    Jb = S.J_form(beta)
    sharp = np.linalg.solve(S.h, beta.coeffs)
    s_minus = hodge_star(M, wedge(beta, pm))
    s_plus = hodge_star(M, wedge(beta, pp))
    checks = {
        "star_contraction": s_minus - contract(sharp, pp),
        "i_a": wedge(s_minus, om) - wedge(Jb, pp),
        "i_b": wedge(Jb, pp) - wedge(beta, pm),
        "ii": wedge(s_minus, om2),
        "iii_a": wedge(s_minus, pp) + wedge(s_plus, pm),
        "iii_b": wedge(s_minus, pp) - wedge(beta, om2),
        "iii_c": wedge(beta, om2) - hodge_star(M, Jb) * 2.0,
        "iv_a": wedge(s_minus, pm) - wedge(s_plus, pp),
        "iv_b": wedge(s_minus, pm) + wedge(Jb, om2),
        "iv_c": wedge(Jb, om2) * -1.0 - hodge_star(M, beta) * 2.0,
    }
    out = {k: float(np.max(np.abs(v.coeffs), initial=0.0)) for k, v in checks.items()}
    out["max"] = max(out.values())
    return out
