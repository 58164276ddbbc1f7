"""The symplectic half-flat examples on unimodular solvable Lie algebras.

One entry per algebra of the classification, plus the alternative structure on
g_{6,54} whose w2- is not a Laplacian eigenform, the flat structure on R^6, an
example with non-zero Lee form, and the twistor parameters.
Parameterized entries take a mapping such as ``{"alpha": 1.0}``.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .dsl import parse_form
from .exterior import Endomorphism, KForm
from .liealg import LieAlgebra

DEFAULT_PARAMS = {"alpha": 1.0}

# twistor space of a hyperbolic 4-manifold, only as parameters for the
# c = |w2-|^2 / 4 case
TWISTOR_N2 = 96.0
TWISTOR_C = 24.0


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    label: str
    structure: str
    omega: str
    psi_plus: str
    w2_minus: str
    h_diag: tuple
    c: object = None  # callable params -> float, or None when not an eigenform
    D_diag: object = None  # callable params -> tuple
    lam: object = None  # callable params -> float
    nilpotent: bool = False
    soliton: bool = False
    table_row: bool = True
    params: tuple = ()

    def resolve(self, params=None):
        p = dict(DEFAULT_PARAMS)
        p.update(params or {})
        return p


def _const(v):
    return lambda p: v


ENTRIES = (
    CatalogEntry(
        "e11e11", "e(1,1)+e(1,1)", "(0,-e13,-e12,0,-e46,-e45)",
        "e14+e23+2*e56", "e125-e126-e135-e136+e245+e246+e345-e346",
        "2*e25+2*e26-2*e35+2*e36", (1, 1, 1, 1, 2, 2),
        c=_const(2.0), D_diag=_const((0, 0, 0, 0, 0, 0, -2)), lam=_const(2.0), soliton=True,
    ),
    CatalogEntry(
        "g51", "g_{5,1}+R", "(0,0,0,0,e12,e13)",
        "e14+e26+e35", "e123+e156+e245-e346",
        "e26-e35", (1, 1, 1, 1, 1, 1),
        c=_const(2.0), D_diag=_const((-1, -1, -1, -2, -2, -2, -2)), lam=_const(5.0),
        nilpotent=True, soliton=True,
    ),
    CatalogEntry(
        "a57", "A_{5,7}^{-1,-1,1}+R", "(e15,-e25,-e35,e45,0,0)",
        "-e13+e24+e56", "-e126-e145-e235-e346",
        "2*e14-2*e23", (1, 1, 1, 1, 1, 1),
        c=_const(4.0), D_diag=_const((-2, -2, -2, -2, 0, -4, -4)), lam=_const(8.0), soliton=True,
    ),
    CatalogEntry(
        "a517", "A_{5,17}^{alpha,-alpha,1}+R",
        "(alpha*e15+e25,-e15+alpha*e25,-alpha*e35+e45,-e35-alpha*e45,0,0)",
        "e13+e24+e56", "e125-e146+e236-e345",
        "-2*alpha*e12-2*alpha*e34", (1, 1, 1, 1, 1, 1),
        c=lambda p: 4.0 * p["alpha"] ** 2,
        D_diag=lambda p: tuple(p["alpha"] ** 2 * x for x in (-2, -2, -2, -2, 0, -4, -4)),
        lam=lambda p: 8.0 * p["alpha"] ** 2,
        soliton=True, params=("alpha",),
    ),
    CatalogEntry(
        "g6n3", "g_{6,N3}", "(0,0,0,e12,e13,e23)",
        "2*e16+e25-e34", "-e123+e145-2*e246-2*e356",
        "4*e16-e25+e34", (1, 1, 1, 1, 1, 4),
        c=_const(6.0), D_diag=_const((-3, -3, -3, -6, -6, -6, -6)), lam=_const(15.0),
        nilpotent=True, soliton=True,
    ),
    CatalogEntry(
        "g6_38", "g_{6,38}^0", "(e23,-e36,e26,e26-e56,e36+e46,0)",
        "-2*e16+e34-e25", "-2*e135-2*e124+e236-e456",
        "4*e16-e25+e34", (4, 1, 1, 1, 1, 1),
        c=_const(6.0),
    ),
    CatalogEntry(
        "g654", "g_{6,54}^{0,-1}", "(e16+e35,-e26+e45,e36,-e46,0,0)",
        "e14+e23+sqrt(2)*e56", "e125-sqrt(2)*e136+sqrt(2)*e246+e345",
        "sqrt(2)*e13-e14+e23+sqrt(2)*e24", (1, 1, 1, 1, 1, 2),
        c=_const(2.0), D_diag=_const((-1, -1, 0, 0, -1, 0, -2)), lam=_const(3.0), soliton=True,
    ),
    CatalogEntry(
        "g6_118", "g_{6,118}^{0,-1,-1}", "(-e16+e25,-e15-e26,e36-e45,e35+e46,0,0)",
        "e14+e23-e56", "e126-e135+e245+e346",
        "2*e12-2*e34", (1, 1, 1, 1, 1, 1),
        c=_const(4.0),
    ),
    CatalogEntry(
        "g654-noneigen", "g_{6,54}^{0,-1} (non-eigenform structure)", "(e16+e35,-e26+e45,e36,-e46,0,0)",
        "e14+e23+e56", "e125-e136+e246+e345",
        "e23-e14+2*e13+2*e24", (1, 1, 1, 1, 1, 1),
        table_row=False,
    ),
    CatalogEntry(
        "flat", "R^6 (torsion-free)", "(0,0,0,0,0,0)",
        "e14+e25+e36", "e123-e156+e246-e345",
        "0", (1, 1, 1, 1, 1, 1),
        D_diag=_const((0,) * 7), lam=_const(0.0), table_row=False,
    ),
    CatalogEntry(
        # d omega = theta ^ omega with theta = -e6: not symplectic half-flat
        "w2w4", "R^2 x_phi R^4 with non-zero Lee form", "(e16,0,0,e46,-e56,0)",
        "e12+e34+e56", "e135-e146-e236-e245",
        "e14-e23", (1, 1, 1, 1, 1, 1),
        table_row=False,
    ),
)

BY_NAME = {e.name: e for e in ENTRIES}
TABLE_ROWS = tuple(e.name for e in ENTRIES if e.table_row)
SOLITON_ROWS = tuple(e.name for e in ENTRIES if e.soliton)
NON_SOLITON_ROWS = tuple(e.name for e in ENTRIES if e.table_row and not e.soliton)
NILPOTENT_ROWS = tuple(e.name for e in ENTRIES if e.nilpotent)

# rows with c = |w2-|^2 / 4, where the flow is a pure rescaling
RESCALING_ROWS = ("e11e11",)


def names():
    return [e.name for e in ENTRIES]


def entry(name):
    try:
        return BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(names())}") from None


@dataclass(frozen=True, eq=False)
class CatalogRow:
    """An entry evaluated at concrete parameter values."""

    entry: CatalogEntry
    params: dict
    L: LieAlgebra
    omega: KForm
    psi_plus: KForm
    w2_minus: KForm
    h: np.ndarray
    c: float | None
    D: Endomorphism | None
    lam: float | None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def name(self):
        return self.entry.name

    @property
    def su3(self):
        if "su3" not in self._cache:
            from .su3 import build_su3

            self._cache["su3"] = build_su3(self.L, self.omega, self.psi_plus, name=self.name)
        return self._cache["su3"]

    def warped(self, a=1.0):
        from .g2warp import build_warped

        return build_warped(self.su3, a)


def _key(params):
    return tuple(sorted(params.items()))


@lru_cache(maxsize=None)
def _load(name, pkey):
    e = entry(name)
    p = dict(pkey)
    L = LieAlgebra.parse(e.structure, p, name=e.name)
    omega = parse_form(e.omega, 6, p, deg=2)
    psi = parse_form(e.psi_plus, 6, p, deg=3)
    w2 = parse_form(e.w2_minus, 6, p, deg=2)
    h = np.diag(np.array(e.h_diag, dtype=float))
    D = Endomorphism.diag(e.D_diag(p)) if e.D_diag else None
    return CatalogRow(
        e, p, L, omega, psi, w2, h,
        e.c(p) if e.c else None, D, e.lam(p) if e.lam else None,
    )


def load(name, params=None):
    e = entry(name)
    p = e.resolve(params)
    # only keep parameters the entry uses so the cache key is stable
    p = {k: float(v) for k, v in p.items() if k in e.params}
    return _load(name, _key(p))


def rows(which="table", params=None):
    pick = {
        "table": TABLE_ROWS,
        "soliton": SOLITON_ROWS,
        "non_soliton": NON_SOLITON_ROWS,
        "nilpotent": NILPOTENT_ROWS,
        "all": tuple(names()),
    }[which]
    return [load(n, params) for n in pick]
