"""SU(3)- and G2-structures on Lie algebras and the Laplacian flow."""
from ._backend import BACKEND
from .config import get_tol, set_tol, tolerance
from .exterior import Endomorphism, KForm, contract, endo_action, wedge
from .liealg import LieAlgebra, ce_differential, extend_by_line, parse_structure_equations
from .su3 import build_su3, torsion_forms
from .g2warp import build_warped, g2_torsion

__version__ = "0.1.0"


def form(text, dim, params=None, deg=None):
    """Parse a form expression such as ``"e125 - sqrt(2)*e136"`` on R^dim."""
    from .dsl import parse_form

    return parse_form(text, dim, params, deg)
