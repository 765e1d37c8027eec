"""Bulk asymptotic expansions of the global densities.

Each expansion is returned as an :class:`ExpansionValue` whose terms are
indexed by the power of 1/N they multiply.  Inputs may be scalars or numpy
arrays.

Phases are reduced modulo 2 pi using the integrality (or evenness) of N, so
that e.g. 2 N pi P_W(X) is evaluated as 2N (X sqrt(1-X^2) - arccos X).  The
private ``*_terms`` helpers accept real N and are used by the matching code,
where N is treated as a continuous large parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

PI = math.pi


class EdgeRegimeError(ValueError):
    """Raised when X is too close to the soft edge for a bulk expansion."""


@dataclass(frozen=True)
class Term:
    order: Fraction
    smooth: np.ndarray | float
    oscillatory: np.ndarray | float

    @property
    def value(self):
        return self.smooth + self.oscillatory


@dataclass(frozen=True)
class ExpansionValue:
    """Terms already carry their N^(-order) factor; ``coefficient`` strips it."""

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

    def term(self, order) -> Term:
        order = Fraction(order)
        for t in self.terms:
            if t.order == order:
                return t
        raise KeyError(order)

    def coefficient(self, order):
        """(smooth, oscillatory) coefficient of N^(-order)."""
        t = self.term(order)
        f = float(self.N) ** float(t.order)
        return t.smooth * f, t.oscillatory * f

    def truncated(self, max_order) -> "ExpansionValue":
        return ExpansionValue(tuple(t for t in self.terms if t.order <= Fraction(max_order)), self.N)

    @property
    def smooth(self):
        return sum(t.smooth for t in self.terms)

    @property
    def oscillatory(self):
        return sum(t.oscillatory for t in self.terms)


def _term(order, smooth=0.0, osc=0.0, like=None, N=1.0):
    order = Fraction(order)
    f = float(N) ** -float(order)
    smooth = smooth * f
    osc = osc * f
    if like is not None:
        z = np.zeros_like(like, dtype=float)
        smooth = smooth + z
        osc = osc + z
        if np.ndim(like) == 0:
            smooth, osc = float(smooth), float(osc)
    return Term(order, smooth, osc)


# ---------------------------------------------------------------------------
# limiting laws and phases
# ---------------------------------------------------------------------------

def rho_w(x):
    """Semicircle (2/pi) sqrt(1 - x^2), zero outside [-1, 1]."""
    x = np.asarray(x, dtype=float)
    out = 2 / PI * np.sqrt(np.clip(1 - x * x, 0.0, None))
    return float(out) if out.ndim == 0 else out


def p_w(x):
    """Integrated semicircle 1 + (x/2) rho_W(x) - arccos(x)/pi on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise ValueError("p_w needs |x| <= 1")
    out = 1 + x / 2 * rho_w(x) - np.arccos(x) / PI
    return float(out) if out.ndim == 0 else out


def rho_mp(x):
    """Marchenko-Pastur (2/pi) sqrt(1/x - 1) on (0, 1], zero beyond 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("rho_mp is defined for x > 0")
    out = 2 / PI * np.sqrt(np.clip(1 / x - 1, 0.0, None))
    return float(out) if out.ndim == 0 else out


def p_mp(x):
    """1 + x rho_MP(x) - (2/pi) arccos sqrt(x) on (0, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x > 1):
        raise ValueError("p_mp needs 0 < x <= 1")
    out = 1 + x * rho_mp(x) - 2 / PI * np.arccos(np.sqrt(x))
    return float(out) if out.ndim == 0 else out


# Phases multiply these by N, so they are written to keep full relative
# accuracy as X approaches the edges.
def _w(X):
    return (1 - X) * (1 + X)


def _acos(X):
    return np.arctan2(np.sqrt(_w(X)), X)


def _asin(X):
    return np.arctan2(X, np.sqrt(_w(X)))


def _acos_sqrt(X):
    return np.arctan2(np.sqrt(1 - X), np.sqrt(X))


def wigner_phase(N, X):
    """2 N pi P_W(X) reduced modulo 2 pi for integer N (real N accepted)."""
    X = np.asarray(X, dtype=float)
    return 2 * N * (X * np.sqrt(_w(X)) - _acos(X))


def a_phase(N, alpha, X):
    """A_{N,alpha}(X) = 2N(sqrt(X(1-X)) - arccos sqrt X) - alpha arccos sqrt X."""
    X = np.asarray(X, dtype=float)
    t = _acos_sqrt(X)
    return 2 * N * (np.sqrt(X * (1 - X)) - t) - alpha * t


def g_h(m, N, x):
    x = np.asarray(x, dtype=float)
    return np.cos(N * x * np.sqrt(_w(x)) + (N + 0.5) * _asin(x) - N * PI / 2 - m * _acos(x))


def g_h_tilde(m, N, x):
    x = np.asarray(x, dtype=float)
    return np.sin(N * x * np.sqrt(_w(x)) + (N + 0.5) * _asin(x) - N * PI / 2 - m * _acos(x))


def _laguerre_base(m, n, alpha, X):
    X = np.asarray(X, dtype=float)
    t = _acos_sqrt(X)
    return 2 * n * (np.sqrt(X * (1 - X)) - t) - (2 * m + alpha + 1) * t + 3 * PI / 4


def g_l(m, n, X, alpha):
    return np.sin(_laguerre_base(m, n, alpha, X))


def g_l_tilde(m, n, X, alpha):
    return np.cos(_laguerre_base(m, n, alpha, X))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

# Distance from the soft edge, in units of N^(-2/3), below which bulk
# expansions are refused.
EDGE_GUARD = 1.0


def _check_gaussian(X, N, guard):
    X = np.asarray(X, dtype=float)
    if np.any(np.abs(X) >= 1):
        raise ValueError("bulk expansions need -1 < X < 1")
    if guard and np.any(np.abs(X) > 1 - EDGE_GUARD * N ** (-2 / 3)):
        raise EdgeRegimeError(
            f"|X| exceeds 1 - N^(-2/3) = {1 - EDGE_GUARD * N ** (-2 / 3):.4g}; use the edge expansions")
    return X


def _check_laguerre(X, N, guard):
    X = np.asarray(X, dtype=float)
    if np.any(X <= 0) or np.any(X >= 1):
        raise ValueError("bulk expansions need 0 < X < 1")
    if guard and np.any(X > 1 - EDGE_GUARD * N ** (-2 / 3)):
        raise EdgeRegimeError(
            f"X exceeds 1 - N^(-2/3) = {1 - EDGE_GUARD * N ** (-2 / 3):.4g}; use the edge expansions")
    return X


def _check_n(N, even=False):
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if even and N % 2:
        raise ValueError("N must be even")


# ---------------------------------------------------------------------------
# unitary ensembles
# ---------------------------------------------------------------------------

def gue_terms(X, N, max_order=4):
    X = np.asarray(X, dtype=float)
    w = _w(X)
    th = wigner_phase(N, X)
    c, s = np.cos(th), np.sin(th)
    terms = [_term(0, rho_w(X), 0.0, X, N)]
    if max_order >= 1:
        # -2 cos / (pi^3 rho_W^2) = -cos / (2 pi (1 - X^2))
        terms.append(_term(1, 0.0, -c / (2 * PI * w), X, N))
    if max_order >= 2:
        terms.append(_term(2, 1 / (16 * PI * w ** 2.5), X * (15 + 2 * X ** 2) * s / (48 * PI * w ** 2.5), X, N))
    if max_order >= 3:
        num = 180 + 981 * X ** 2 + 60 * X ** 4 + 4 * X ** 6
        terms.append(_term(3, 0.0, num * c / (2304 * PI * w ** 4), X, N))
    if max_order >= 4:
        num = 323190 + 647055 * X ** 2 + 20358 * X ** 4 + 6084 * X ** 6 - 1112 * X ** 8
        terms.append(_term(4, 0.0, -X * num * s / (829440 * PI * w ** 5.5), X, N))
    return ExpansionValue(tuple(terms), N)


def bulk_gue(X, N: int, max_order: int = 4, guard: bool = True) -> ExpansionValue:
    """(1/N) rho(X; UE_N(e^{-2N x^2})) through O(N^-max_order).

    The O(N^-4) term carries only its oscillatory part; the smooth part at
    that order is not available in closed form.
    """
    if not 0 <= max_order <= 4:
        raise ValueError("max_order must be between 0 and 4")
    _check_n(N)
    X = _check_gaussian(X, N, guard)
    return gue_terms(X, N, max_order)


def lue_terms(X, N, alpha, max_order=2):
    X = np.asarray(X, dtype=float)
    u = X * (1 - X)
    th = 2 * a_phase(N, alpha, X)
    c, s = np.cos(th), np.sin(th)
    terms = [_term(0, rho_mp(X), 0.0, X, N)]
    if max_order >= 1:
        # pi^3 X^2 rho_MP^2 = 4 pi X (1 - X); alpha/(pi^2 X rho_MP) = alpha/(2 pi sqrt(X(1-X)))
        terms.append(_term(1, alpha / (2 * PI * np.sqrt(u)), -c / (4 * PI * u), X, N))
    if max_order >= 2:
        d = 192 * PI * (1 - X) ** 2.5 * X ** 1.5
        osc = alpha * c / (8 * PI * (1 - X) ** 2)
        osc = osc + (-3 + 12 * X + 8 * X ** 2 + 12 * (X - 1) * (2 * X - 1) * alpha ** 2) * s / d
        smooth = (1 + 4 * (X - 1) * alpha ** 2) / (64 * PI * (1 - X) ** 2.5 * X ** 1.5)
        terms.append(_term(2, smooth, osc, X, N))
    return ExpansionValue(tuple(terms), N)


def bulk_lue(X, N: int, alpha: float, max_order: int = 2, guard: bool = True) -> ExpansionValue:
    """(1/N) rho(X; UE_N(x^alpha e^{-4N x})) through O(N^-max_order)."""
    if not 0 <= max_order <= 2:
        raise ValueError("max_order must be between 0 and 2")
    _check_n(N)
    X = _check_laguerre(X, N, guard)
    return lue_terms(X, N, alpha, max_order)


# ---------------------------------------------------------------------------
# orthogonal and symplectic ensembles
# ---------------------------------------------------------------------------

def goe_terms(X, N, max_order=2):
    X = np.asarray(X, dtype=float)
    w = _w(X)
    terms = [_term(0, rho_w(X), 0.0, X, N)]
    if max_order >= 1:
        terms.append(_term(1, -1 / (2 * PI * np.sqrt(w)), 0.0, X, N))
    if max_order >= 2:
        # (2N-1) arcsin X + 2N X sqrt(1-X^2) equals the Wigner phase minus
        # arcsin X modulo 2 pi when N is even
        th = wigner_phase(N, X) - _asin(X)
        terms.append(_term(2, (3 + 4 * X * X) / (16 * PI * w ** 2.5),
                           -np.cos(th) / (8 * PI * w ** 2.5), X, N))
    return ExpansionValue(tuple(terms), N)


def bulk_goe(X, N: int, max_order: int = 2, guard: bool = True) -> ExpansionValue:
    """(1/N) rho(X; OE_N(e^{-N x^2})), N even, through O(N^-2)."""
    if not 0 <= max_order <= 2:
        raise ValueError("max_order must be between 0 and 2")
    _check_n(N, even=True)
    X = _check_gaussian(X, N, guard)
    return goe_terms(X, N, max_order)


def gse_terms(X, N, parity=True):
    X = np.asarray(X, dtype=float)
    w = _w(X)
    g = np.cos(wigner_phase(N, X) + 0.5 * _asin(X))  # g_{0,2N}^{(H)}(X)
    amp = g / w ** 0.25
    osc1 = 0.0
    if parity:
        sign = 1.0 if int(round(N)) % 2 == 0 else -1.0
        osc1 = -sign / (2 * PI) * amp
    return ExpansionValue((
        _term(0, rho_w(X), 0.0, X, N),
        _term(Fraction(1, 2), 0.0, -amp / math.sqrt(2 * PI), X, N),
        _term(1, 1 / (4 * PI * np.sqrt(w)), osc1, X, N),
    ), N)


def bulk_gse(X, N: int, parity: bool = True, guard: bool = True) -> ExpansionValue:
    """(1/N) rho(X; SE_N(e^{-4N x^2})) with terms at orders 0, 1/2 and 1.

    ``parity=True`` keeps the (-1)^N g_{0,2N}/(2 pi N) oscillation at O(1/N).
    Comparison with the exact density shows the O(1/N) coefficient is the
    smooth term alone, so ``parity=False`` is the numerically sharper choice.
    """
    _check_n(N)
    X = _check_gaussian(X, N, guard)
    return gse_terms(X, N, parity)


def loe_terms(X, N, alpha):
    lue = lue_terms(X, N, alpha, 1)
    X = np.asarray(X, dtype=float)
    u = X * (1 - X)
    extra_osc = np.cos(2 * a_phase(N, alpha, X)) / (4 * PI * u)
    extra_smooth = -1 / (2 * PI * np.sqrt(u))
    t0, t1 = lue.terms
    return ExpansionValue((t0, _term(1, t1.smooth * N + extra_smooth, t1.oscillatory * N + extra_osc, X, N)), N)


def bulk_loe(X, N: int, alpha: float, guard: bool = True) -> ExpansionValue:
    """(1/N) rho(X; OE_N(x^{(alpha-1)/2} e^{-2N x})), N even, through O(1/N).

    Built as the LUE expansion plus the orthogonal correction; the
    oscillatory O(1/N) parts cancel, leaving the smooth -(1-alpha)/(2 pi sqrt(X(1-X))).
    """
    _check_n(N, even=True)
    X = _check_laguerre(X, N, guard)
    return loe_terms(X, N, alpha)


def lse_terms(X, N, alpha):
    X = np.asarray(X, dtype=float)
    g = np.sin(a_phase(2 * N, alpha, X) - _acos_sqrt(X) + 3 * PI / 4)  # g_{0,2N}^{(L)}
    return ExpansionValue((
        _term(0, rho_mp(X), 0.0, X, N),
        _term(Fraction(1, 2), 0.0, -g / (2 * math.sqrt(PI) * X ** 0.75 * (1 - X) ** 0.25), X, N),
        _term(1, (alpha + 1) / (4 * PI * np.sqrt(X * (1 - X))), 0.0, X, N),
    ), N)


def bulk_lse(X, N: int, alpha: float, guard: bool = True) -> ExpansionValue:
    """(1/N) rho(X; SE_N(x^{alpha+1} e^{-8N x})) with terms at orders 0, 1/2, 1."""
    _check_n(N)
    X = _check_laguerre(X, N, guard)
    return lse_terms(X, N, alpha)


def bulk_expansion(name: str, X, N: int, alpha: float = 0.0, max_order=None, guard: bool = True):
    """Dispatch by ensemble name; max_order truncates where meaningful."""
    name = name.lower()
    if name == "gue":
        return bulk_gue(X, N, 4 if max_order is None else max_order, guard)
    if name == "lue":
        return bulk_lue(X, N, alpha, 2 if max_order is None else max_order, guard)
    if name == "goe":
        return bulk_goe(X, N, 2 if max_order is None else max_order, guard)
    if name == "gse":
        ev = bulk_gse(X, N, guard=guard)
    elif name == "loe":
        ev = bulk_loe(X, N, alpha, guard)
    elif name == "lse":
        ev = bulk_lse(X, N, alpha, guard)
    else:
        raise ValueError(f"unknown ensemble {name!r}")
    return ev if max_order is None else ev.truncated(max_order)
