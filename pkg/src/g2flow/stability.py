"""Stable forms: the quartic invariant of 3-forms in dimension 6 and the
metric of a 3-form in dimension 7.
"""
from dataclasses import dataclass
from math import comb

import numpy as np

from . import _backend
from ._tables import contract_table, top_pairing, wedge_table
from .errors import DimensionError, StabilityError
from .exterior import Endomorphism, KForm, contract, unit_vector, wedge
from .metric_ops import hodge_star
from .metric_ops import MetricData

P_TOL = 1e-9
DET_TOL = 1e-12


@dataclass(frozen=True)
class StabilityReport6:
    P: float
    J: Endomorphism | None
    stable: bool


@dataclass(frozen=True)
class G2MetricData:
    g: np.ndarray
    vol: float
    star_phi: KForm


def _require(psi, nu):
    if psi.dim != 6 or psi.deg != 3:
        raise DimensionError("expected a 3-form on R^6")
    if nu.dim != 6 or nu.deg != 6:
        raise DimensionError("expected a volume form on R^6")
    if abs(nu.top_coefficient()) < P_TOL:
        raise StabilityError("volume form is zero")


def k_map(psi, nu):
    """The endomorphism K with K(v) (x) nu = A(i_v psi ^ psi).

    Column i holds K(e_i); its j-th entry is the e^{1..6} coefficient of
    i_{e_i} psi ^ psi ^ e^j divided by that of nu.
    """
    _require(psi, nu)
    K = np.zeros((6, 6))
    for i in range(6):
        rho = wedge(contract(unit_vector(6, i + 1), psi), psi)
        for j in range(6):
            K[j, i] = wedge(rho, KForm.basis_form(6, (j + 1,))).top_coefficient()
    return Endomorphism(K / nu.top_coefficient())


def hitchin_quartic(psi, nu):
    K = k_map(psi, nu).matrix
    return float(np.trace(K @ K) / 6.0)


def stability_report(psi, nu):
    K = k_map(psi, nu).matrix
    P = float(np.trace(K @ K) / 6.0)
    J = Endomorphism(K / np.sqrt(-P)) if P < -P_TOL else None
    return StabilityReport6(P=P, J=J, stable=abs(P) > P_TOL)


def induced_complex_structure(psi, nu):
    """J = K / sqrt(|P|), defined on the open orbit P < 0."""
    K = k_map(psi, nu).matrix
    P = float(np.trace(K @ K) / 6.0)
    if not P < -P_TOL:
        raise StabilityError(f"3-form not in the orbit with P < 0 (P = {P:.3e})")
    return Endomorphism(K / np.sqrt(-P))


def g2_bilinear(phi):
    """Coefficients b_ij of (1/6) i_{e_i}phi ^ i_{e_j}phi ^ phi on e^{1..7}."""
    n = phi.dim if isinstance(phi, KForm) else 7
    coeffs = phi.coeffs if isinstance(phi, KForm) else np.ascontiguousarray(phi, dtype=np.float64)
    csrc, cvec, cdst, csgn = contract_table(n, 3)
    I, J, K, S = wedge_table(n, 2, 3)
    P = np.ascontiguousarray(top_pairing(n, 2))
    return _backend.kernels.g2_bilinear(
        coeffs, n, csrc, cvec, cdst, csgn, comb(n, 2), I, J, K, S, comb(n, 5), P
    )


def g2_metric_arrays(phi_coeffs):
    """(g, vol) from raw 3-form coefficients on R^7; raises if not positive.

    ``vol`` is the e^{1..7} coefficient of the volume form of g_phi and is
    negative when phi induces the opposite orientation.
    """
    b = g2_bilinear(np.asarray(phi_coeffs, dtype=np.float64))
    det = float(np.linalg.det(b))
    if not abs(det) > DET_TOL:
        raise StabilityError(f"3-form not in the positive orbit (det b = {det:.3e})")
    # b = g (x) vol; a negative real root means phi orients R^7 opposite to e^{1..7}
    root = np.sign(det) * abs(det) ** (1.0 / 9.0)
    g = b / root
    if np.linalg.eigvalsh(0.5 * (g + g.T))[0] <= 0:
        raise StabilityError("3-form not in the positive orbit (g_phi not positive definite)")
    return 0.5 * (g + g.T), root


def g2_metric(phi):
    if phi.dim != 7 or phi.deg != 3:
        raise DimensionError("expected a 3-form on R^7")
    g, vol = g2_metric_arrays(phi.coeffs)
    from .liealg import abelian

    M = MetricData(abelian(7), g, vol)
    g.setflags(write=False)
    return G2MetricData(g=g, vol=vol, star_phi=hodge_star(M, phi))
