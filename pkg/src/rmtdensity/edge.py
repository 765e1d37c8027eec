"""Soft-edge expansions in the Airy variable xi.

Every function returns the quantity on the left of the corresponding edge
result, i.e. the bulk-scaled density at X = 1 + xi/edge_scale multiplied by
the ensemble's edge prefactor (see :func:`rmtdensity.exactdens.scaling_constants`).
With ``normalized=False`` the terms are divided back to a raw-coordinate
density at x = s (1 + xi/edge_scale).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactdens import EnsembleSpec, scaling_constants
from .specfun import airy_pair, airy_tail


@dataclass(frozen=True)
class EdgeTerm:
    order: Fraction
    value: np.ndarray | float


@dataclass(frozen=True)
class EdgeExpansion:
    xi: np.ndarray | float
    terms: tuple
    N: float = 1.0

    def __post_init__(self):
        orders = [t.order for t in self.terms]
        if any(b <= a for a, b in zip(orders, orders[1:])):
            raise ValueError("term orders must increase strictly")

    @property
    def total(self):
        return sum(t.value for t in self.terms)

    @property
    def orders(self) -> tuple:
        return tuple(t.order for t in self.terms)

    def term(self, order):
        order = Fraction(order)
        for t in self.terms:
            if t.order == order:
                return t.value
        raise KeyError(order)

    def truncated(self, max_order) -> "EdgeExpansion":
        keep = tuple(t for t in self.terms if t.order <= Fraction(max_order))
        return EdgeExpansion(self.xi, keep, self.N)


def _airy(xi):
    xi = np.asarray(xi, dtype=float)
    ai, aip = airy_pair(xi)
    return xi, np.asarray(ai), np.asarray(aip)


def _tail(xi):
    return np.asarray(airy_tail(xi))


def _finish(name, xi, N, alpha, pieces, normalized):
    if not normalized:
        sc = scaling_constants(EnsembleSpec.from_name(name, N, alpha))
        f = 1.0 / (sc.edge_prefactor * sc.bulk_jacobian)
        pieces = [(o, v * f) for o, v in pieces]
    scalar = np.ndim(xi) == 0
    terms = tuple(EdgeTerm(Fraction(o), float(v) if scalar else v) for o, v in pieces)
    return EdgeExpansion(float(xi) if scalar else xi, terms, N)


def airy_kernel_diagonal(xi):
    """Ai'(xi)^2 - xi Ai(xi)^2, the leading soft-edge profile at beta = 2."""
    xi, ai, aip = _airy(xi)
    return aip * aip - xi * ai * ai


FORMS = ("paper", "corrected")


def _check_form(form):
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")


def gue_edge_pieces(xi, N, form="paper"):
    xi, ai, aip = _airy(xi)
    k = aip ** 2 - xi * ai ** 2
    t23 = -(3 * xi ** 2 * ai ** 2 - 2 * xi * aip ** 2 - 3 * ai * aip) / 20
    t1 = ((-xi / 12 + 3 * xi ** 4 / 40 + xi ** 7 / 48) * ai ** 2
          - 3 * xi ** 2 / 40 * ai * aip
          + (1 / 12 - xi ** 3 / 20 - xi ** 6 / 48) * aip ** 2)
    pieces = [(0, k), (Fraction(2, 3), t23 * N ** (-2 / 3))]
    if form == "paper":
        pieces.append((1, t1 / N))
    return pieces


def edge_gue(xi, N: int, normalized: bool = True, form: str = "paper") -> EdgeExpansion:
    """(1/2N^{2/3}) rho(1 + xi/2N^{2/3}; UE_N(e^{-2N x^2})).

    form="paper" carries the stated O(1/N) polynomial-in-xi term.  The exact
    density has no O(1/N) part at this scaling (the remainder after the
    N^{-2/3} term is O(N^{-4/3})), so form="corrected" stops at N^{-2/3}.
    """
    _check_n(N)
    _check_form(form)
    return _finish("gue", xi, N, 0.0, gue_edge_pieces(xi, N, form), normalized)


def lue_edge_pieces(xi, N, alpha):
    xi, ai, aip = _airy(xi)
    k = aip ** 2 - xi * ai ** 2
    t13 = alpha / 2 ** (1 / 3) * ai ** 2
    t23 = 2 ** (1 / 3) / 10 * (3 * xi ** 2 * ai ** 2 - 2 * xi * aip ** 2 + (2 - 5 * alpha ** 2) * ai * aip)
    t1 = alpha * ((-7 * xi / 15 + alpha ** 2 * xi / 6) * ai ** 2 - xi ** 2 / 5 * ai * aip
                  + (-1 / 6 + alpha ** 2 / 6) * aip ** 2)
    return [(0, k), (Fraction(1, 3), t13 * N ** (-1 / 3)),
            (Fraction(2, 3), t23 * N ** (-2 / 3)), (1, t1 / N)]


def edge_lue(xi, N: int, alpha: float, normalized: bool = True) -> EdgeExpansion:
    """(1/(2N)^{2/3}) rho(1 + xi/(2N)^{2/3}; UE_N(x^alpha e^{-4N x})) to O(1/N)."""
    _check_n(N)
    return _finish("lue", xi, N, alpha, lue_edge_pieces(xi, N, alpha), normalized)


# The Hermite functions near the soft edge are Airy functions in a variable
# centred at sqrt(2n + 1).  Centring at sqrt(2N) instead shifts every
# psi_{N+m} by -(1/2) N^{-1/3} Ai'; the "corrected" GOE/GSE N^{-1/3} terms
# keep that shift, the "paper" ones drop it.

def goe_edge_pieces(xi, N, form="paper"):
    xi, ai, aip = _airy(xi)
    rest = 1 - _tail(xi)
    k = aip ** 2 - xi * ai ** 2 + 0.5 * ai * rest
    if form == "paper":
        t13 = aip * rest / (2 * N ** (1 / 3))
    else:
        t13 = (aip * rest - ai ** 2) / (4 * N ** (1 / 3))
    return [(0, k), (Fraction(1, 3), t13)]


def edge_goe(xi, N: int, normalized: bool = True, form: str = "paper") -> EdgeExpansion:
    """(1/2N^{2/3}) rho(1 + xi/2N^{2/3}; OE_N(e^{-N x^2})), N even, to O(N^{-1/3}).

    form="paper": N^{-1/3} term Ai'(1 - T)/2; form="corrected":
    (Ai'(1 - T) - Ai^2)/4, which is what the exact density converges to.
    Here T(xi) is the Airy tail integral.
    """
    _check_n(N, even=True)
    _check_form(form)
    return _finish("goe", xi, N, 0.0, goe_edge_pieces(xi, N, form), normalized)


def gse_edge_pieces(xi, N, form="paper"):
    xi, ai, aip = _airy(xi)
    tail = _tail(xi)
    k = aip ** 2 - xi * ai ** 2 - 0.5 * ai * tail
    if form == "paper":
        t13 = ai ** 2 / (2 * (2 * N) ** (1 / 3))
    else:
        t13 = (ai ** 2 + aip * tail) / (4 * (2 * N) ** (1 / 3))
    return [(0, k), (Fraction(1, 3), t13)]


def edge_gse(xi, N: int, normalized: bool = True, form: str = "paper") -> EdgeExpansion:
    """(1/(2N)^{2/3}) rho(1 + xi/(2(2N)^{2/3}); SE_N(e^{-4N x^2})) to O(N^{-1/3}).

    form="paper": (2N)^{-1/3} Ai^2/2; form="corrected": (2N)^{-1/3} (Ai^2 + Ai' T)/4.
    """
    _check_n(N)
    _check_form(form)
    return _finish("gse", xi, N, 0.0, gse_edge_pieces(xi, N, form), normalized)


def loe_edge_pieces(xi, N, alpha):
    xi, ai, aip = _airy(xi)
    rest = 1 - _tail(xi)
    k = aip ** 2 - xi * ai ** 2 + 0.5 * ai * rest
    t13 = -(alpha - 1) / (2 * (2 * N) ** (1 / 3)) * (aip * rest - ai ** 2)
    return [(0, k), (Fraction(1, 3), t13)]


def edge_loe(xi, N: int, alpha: float, normalized: bool = True) -> EdgeExpansion:
    """(1/(2N)^{2/3}) rho(1 + xi/(2N)^{2/3}; OE_N(x^{(alpha-1)/2} e^{-2N x})), N even."""
    _check_n(N, even=True)
    return _finish("loe", xi, N, alpha, loe_edge_pieces(xi, N, alpha), normalized)


def lse_edge_pieces(xi, N, alpha):
    xi, ai, aip = _airy(xi)
    tail = _tail(xi)
    k = aip ** 2 - xi * ai ** 2 - 0.5 * ai * tail
    t13 = (alpha + 1) / (2 * (4 * N) ** (1 / 3)) * (ai ** 2 + aip * tail)
    return [(0, k), (Fraction(1, 3), t13)]


def edge_lse(xi, N: int, alpha: float, normalized: bool = True) -> EdgeExpansion:
    """(2/(4N)^{2/3}) rho(1 + xi/(4N)^{2/3}; SE_N(x^{alpha+1} e^{-8N x})) to O(N^{-1/3})."""
    _check_n(N)
    return _finish("lse", xi, N, alpha, lse_edge_pieces(xi, N, alpha), normalized)


def edge_expansion(name: str, xi, N: int, alpha: float = 0.0, normalized: bool = True,
                   form: str = "paper") -> EdgeExpansion:
    """Dispatch by ensemble name; ``form`` only affects the Gaussian ensembles."""
    name = name.lower()
    _check_form(form)
    if name == "gue":
        return edge_gue(xi, N, normalized, form)
    if name == "goe":
        return edge_goe(xi, N, normalized, form)
    if name == "gse":
        return edge_gse(xi, N, normalized, form)
    if name == "lue":
        return edge_lue(xi, N, alpha, normalized)
    if name == "loe":
        return edge_loe(xi, N, alpha, normalized)
    if name == "lse":
        return edge_lse(xi, N, alpha, normalized)
    raise ValueError(f"unknown ensemble {name!r}")


# first order not carried by each edge expansion
NEXT_ORDER = {"gue": Fraction(4, 3), "lue": Fraction(4, 3), "goe": Fraction(2, 3),
              "gse": Fraction(2, 3), "loe": Fraction(2, 3), "lse": Fraction(2, 3)}


def edge_residual_exponent(name: str, xi: float, n_values, alpha: float = 0.0, form: str = "paper"):
    """Least-squares slope of -log|exact - expansion| against log N."""
    from .exactdens import scaled_density
    res = []
    for N in n_values:
        spec = EnsembleSpec.from_name(name, N, alpha, "edge")
        res.append(abs(scaled_density(spec, xi) - edge_expansion(name, xi, N, alpha, form=form).total))
    slope = np.polyfit(np.log(np.asarray(n_values, float)), np.log(res), 1)[0]
    return -float(slope), res


def _check_n(N, even=False):
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if even and N % 2:
        raise ValueError("N must be even")
