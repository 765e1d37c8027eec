"""Linear statistics against exact densities and the smoothed-density predictions.

All statistics are in bulk coordinates: <A> = int rho(X) a(X) dX with rho the
bulk-scaled density, so that the leading term is N int rho_W a.

Chiral ensembles chME_N(x^{beta a} e^{-2 beta N x^2}) on (0, 1) are reached from
the Laguerre ensembles through y = x^2.  The smoothed chiral density used here is

    2 rho_W + (1/N) [a/(pi sqrt(1-X^2)) - (a/2) delta(X)
                     + (1/beta - 1/2) (delta(X-1)/2 - 1/(pi sqrt(1-X^2)))],

which is what the exact Laguerre moments require.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exactdens import EnsembleSpec, raw_support, scaled_density, scaling_constants
from .specfun import (ConvergenceError, airy_ai, airy_pair, airy_tail, cumulative_integrate,
                      gauss_legendre_panels)

PI = math.pi
BETA = {"goe": 1, "gue": 2, "gse": 4, "loe": 1, "lue": 2, "lse": 4}


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

def _theta_rule(n=64):
    # X = sin(theta) removes the inverse square-root endpoint singularities
    th, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * PI * th, 0.5 * PI * w


def numeric_wigner_moment(f, half=False) -> float:
    """int rho_W f over (-1, 1), or over (0, 1) when half=True."""
    th, w = _theta_rule()
    if half:
        th, w = 0.5 * (th + 0.5 * PI), 0.5 * w
    return float(np.sum(w * (2 / PI) * np.cos(th) ** 2 * f(np.sin(th))))


def numeric_singular_moment(f, half=False) -> float:
    """int f / (pi sqrt(1 - X^2)) over (-1, 1), or over (0, 1) when half=True."""
    th, w = _theta_rule()
    if half:
        th, w = 0.5 * (th + 0.5 * PI), 0.5 * w
    return float(np.sum(w * f(np.sin(th))) / PI)


@dataclass(frozen=True)
class TestFunction:
    """A smooth a(X) with the moments entering the smoothed predictions.

    Missing moments are filled in by quadrature.
    """
    __test__ = False  # keep pytest from collecting the class

    label: str
    evaluate: Callable
    wigner_moment: float | None = None
    edge_values: tuple | None = None
    singular_moment: float | None = None

    def __post_init__(self):
        f = self.evaluate
        if self.wigner_moment is None:
            object.__setattr__(self, "wigner_moment", numeric_wigner_moment(f))
        if self.singular_moment is None:
            object.__setattr__(self, "singular_moment", numeric_singular_moment(f))
        if self.edge_values is None:
            object.__setattr__(self, "edge_values", (float(f(1.0)), float(f(-1.0))))

    def __call__(self, X):
        return self.evaluate(np.asarray(X, dtype=float))

    def to_dict(self) -> dict:
        return {"label": self.label, "wigner_moment": self.wigner_moment,
                "edge_values": list(self.edge_values), "singular_moment": self.singular_moment}


def _catalan_moment(k: int) -> float:
    # int X^{2k} rho_W = C_k / 4^k
    return math.comb(2 * k, k) / (k + 1) / 4 ** k


def _arcsine_moment(k: int) -> float:
    # int X^{2k} / (pi sqrt(1 - X^2)) = binom(2k, k) / 4^k
    return math.comb(2 * k, k) / 4 ** k


def polynomial(coeffs, label: str | None = None) -> TestFunction:
    """a(X) = sum coeffs[j] X^j with closed-form moments."""
    c = [float(v) for v in coeffs]
    wig = sum(v * _catalan_moment(j // 2) for j, v in enumerate(c) if j % 2 == 0)
    sing = sum(v * _arcsine_moment(j // 2) for j, v in enumerate(c) if j % 2 == 0)
    edges = (sum(c), sum(v * (-1) ** j for j, v in enumerate(c)))
    if label is None:
        label = " + ".join(f"{v:g}*X^{j}" for j, v in enumerate(c) if v)

    def f(X):
        return np.polynomial.polynomial.polyval(X, c)

    return TestFunction(label, f, wig, edges, sing)


def monomial(k: int) -> TestFunction:
    return polynomial([0.0] * k + [1.0], f"X^{k}")


PRESETS = {"one": polynomial([1.0], "1"), "x2": monomial(2), "x4": monomial(4)}


def preset(name: str) -> TestFunction:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown test function {name!r}; choose from {sorted(PRESETS)}") from None


# ---------------------------------------------------------------------------
# exact statistics
# ---------------------------------------------------------------------------

def _bulk_spec(spec: EnsembleSpec) -> EnsembleSpec:
    if spec.scaling == "edge":
        raise ValueError("linear statistics are defined in raw or bulk coordinates")
    return spec.with_scaling("bulk")


def _gl_sum(g, lo, hi, panels, order=20):
    x, w = gauss_legendre_panels(lo, hi, panels, order)
    return float(np.sum(w * g(x)))


def _converged(g, lo, hi, panels, rel_tol, max_doublings=5):
    prev = _gl_sum(g, lo, hi, panels)
    for _ in range(max_doublings):
        panels *= 2
        cur = _gl_sum(g, lo, hi, panels)
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1.0):
            return cur
        prev = cur
    raise ConvergenceError(f"linear statistic did not settle: last two values {prev!r}, {cur!r}")


def linear_statistic(spec: EnsembleSpec, a, chiral: bool = False, rel_tol: float = 1e-8) -> float:
    """int rho(X) a(X) dX for the exact bulk-scaled density.

    The range is the support plus at least 5 N^{-2/3} beyond each soft edge,
    widened to the exactdens support where that is larger.  With
    chiral=True (Laguerre families only) the statistic is that of the chiral
    ensemble, sum_j a(sqrt(Y_j)).  Raw-scaled specs are integrated in raw x.
    """
    bspec = _bulk_spec(spec)
    raw = spec.scaling == "raw"
    s = scaling_constants(spec).bulk_jacobian
    f = a if callable(a) else a.evaluate
    N = spec.N
    top = max(1.0 + 5.0 * N ** (-2 / 3), raw_support(spec)[1] / s)
    panels = 8 * N + 16

    def rho(X):
        return np.asarray(scaled_density(bspec, X))

    if spec.family == "gaussian":
        if chiral:
            raise ValueError("chiral statistics need a Laguerre ensemble")
        if raw:
            return _converged(lambda x: rho(x / s) / s * f(x), -top * s, top * s, panels, rel_tol)
        return _converged(lambda X: rho(X) * f(X), -top, top, panels, rel_tol)

    # X = t^4 tames the x^{(alpha-1)/2} behaviour at the hard edge
    def g(t):
        X = t ** 4
        if chiral:
            arg = np.sqrt(X)
        else:
            arg = X * s if raw else X
        return 4 * t ** 3 * rho(X) * f(arg)

    return _converged(g, 0.0, top ** 0.25, panels, rel_tol)


# ---------------------------------------------------------------------------
# chiral ensembles
# ---------------------------------------------------------------------------

def chiral_to_laguerre(beta: int, N: int, a_param: float) -> EnsembleSpec:
    """Laguerre ensemble reached from chME_N(x^{beta a} e^{-2 beta N x^2}) by y = x^2.

    The Laguerre weight is y^{a'} e^{-2 beta N y} with a' = beta a/2 - (2 - beta)/4,
    written in each family's own alpha convention.
    """
    ap = beta * a_param / 2 - (2 - beta) / 4
    if beta == 2:
        return EnsembleSpec.from_name("lue", N, ap, "bulk")
    if beta == 1:
        return EnsembleSpec.from_name("loe", N, 2 * ap + 1, "bulk")
    if beta == 4:
        return EnsembleSpec.from_name("lse", N, ap - 1, "bulk")
    raise ValueError("beta must be 1, 2 or 4")


def laguerre_to_chiral_a(spec: EnsembleSpec) -> float:
    """a_param of the chiral ensemble mapped onto a Laguerre spec."""
    beta = BETA[spec.name]
    ap = {"lue": spec.alpha, "loe": (spec.alpha - 1) / 2, "lse": spec.alpha + 1}[spec.name]
    return (2 * ap + (2 - beta) / 2) / beta


def chiral_density(beta: int, N: int, a_param: float, X):
    """Bulk-scaled chiral density 2 X rho_L(X^2) from the Laguerre density."""
    X = np.asarray(X, dtype=float)
    lspec = chiral_to_laguerre(beta, N, a_param)
    return 2 * X * np.asarray(scaled_density(lspec, X * X))


def chiral_ue_density_direct(N: int, a_param: float, X, nodes: int = 400):
    """chUE density computed from its own orthogonal polynomials in x^2.

    Weight x^{2a+1} e^{-4N x^2} on (0, inf) against |Delta(x^2)|^2; the
    polynomials come from a discretised Stieltjes procedure, independent of
    the Laguerre machinery.
    """
    X = np.asarray(X, dtype=float)
    hi = 1.0 + 12.0 / math.sqrt(N)
    x, w = gauss_legendre_panels(0.0, hi, nodes // 20, 20)
    logw = (2 * a_param + 1) * np.log(x) - 4 * N * x * x
    mu = w * np.exp(logw)
    t = x * x
    tX = X * X
    wX = np.where(X > 0, np.exp((2 * a_param + 1) * np.log(np.where(X > 0, X, 1.0)) - 4 * N * tX), 0.0)
    p_prev, p = np.zeros_like(t), np.ones_like(t) / math.sqrt(mu.sum())
    q_prev, q = np.zeros_like(tX), np.ones_like(tX) / math.sqrt(mu.sum())
    b_prev = 0.0
    out = q * q
    for _ in range(1, N):
        a_k = np.sum(mu * t * p * p)
        r = (t - a_k) * p - b_prev * p_prev
        rq = (tX - a_k) * q - b_prev * q_prev
        b = math.sqrt(np.sum(mu * r * r))
        p_prev, p = p, r / b
        q_prev, q = q, rq / b
        b_prev = b
        out = out + q * q
    return wX * out


# ---------------------------------------------------------------------------
# smoothed predictions
# ---------------------------------------------------------------------------

def gaussian_prediction(N: int, beta: int, a: TestFunction) -> float:
    c = 1 / beta - 0.5
    return N * a.wigner_moment + c * (0.5 * sum(a.edge_values) - a.singular_moment)


def chiral_prediction(N: int, beta: int, a_param: float, a: TestFunction) -> float:
    """Smoothed chiral prediction for sum_j a(x_j), X in (0, 1)."""
    f = a.evaluate
    wig = numeric_wigner_moment(f, half=True)
    sing = numeric_singular_moment(f, half=True)
    c = 1 / beta - 0.5
    return (2 * N * wig + a_param * sing - 0.5 * a_param * float(f(0.0))
            + c * (0.5 * float(f(1.0)) - sing))


def smoothed_prediction(spec: EnsembleSpec, a: TestFunction) -> float:
    """Prediction of linear_statistic from the smoothed density.

    Gaussian specs use the two soft-edge deltas at X = -1, 1.  Laguerre specs
    are read as chiral ensembles (the statistic of linear_statistic(...,
    chiral=True)) with a_param from :func:`laguerre_to_chiral_a`.
    """
    if spec.name not in BETA:
        raise ValueError(f"unsupported ensemble {spec.name!r}")
    beta = BETA[spec.name]
    if spec.family == "gaussian":
        return gaussian_prediction(spec.N, beta, a)
    return chiral_prediction(spec.N, beta, laguerre_to_chiral_a(spec), a)


# ---------------------------------------------------------------------------
# delta weights
# ---------------------------------------------------------------------------

def _airy_zeros_below(lower: float) -> np.ndarray:
    """Zeros of Ai in (lower, 0), descending, by Newton from the asymptotic guess."""
    out = []
    k = 1
    while True:
        t = 3 * PI * (4 * k - 1) / 8
        y = -t ** (2 / 3) * (1 + 5 / (48 * t * t))
        if y < lower:
            break
        for _ in range(20):
            ai, aip = (float(v) for v in airy_pair(y))
            step = ai / aip
            y -= step
            if abs(step) < 1e-15 * max(1.0, abs(y)):
                break
        out.append(y)
        k += 1
    return np.array(out)


def _ai(y):
    return np.asarray(airy_ai(y), dtype=float)


def _tail_between(y, hi, T_hi, order=40):
    """T(y) = T(hi) + int_y^hi Ai for nodes y <= hi (one Gauss rule per node)."""
    xs, ws = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (hi - y)
    yy = 0.5 * (hi + y)[:, None] + half[:, None] * xs[None, :]
    return T_hi + np.sum(half[:, None] * ws[None, :] * _ai(yy), axis=1)


def _rest_zeros(ai_zeros, T_ai):
    """Zeros of 1 - T between consecutive Ai zeros, by Newton (d(1-T)/dy = Ai)."""
    out = []
    for j in range(len(ai_zeros) - 1):
        hi, lo = ai_zeros[j], ai_zeros[j + 1]
        # 1 - T is extremal at the Ai zeros and crosses zero in between
        y = 0.5 * (hi + lo)
        for _ in range(30):
            T = float(_tail_between(np.array([y]), hi, T_ai[j])[0])
            step = (1 - T) / float(_ai(y))
            y = min(max(y - step, lo), hi)
            if abs(step) < 1e-14:
                break
        out.append(y)
    return np.array(out)


def airy_edge_integrals(lower: float = -10.0, cuts: int = 3) -> dict:
    """The two edge integrals int Ai (1 - T) and int Ai T over the real line.

    T(y) = int_y^inf Ai.  Both integrands are integrated on [c, inf) by
    Gauss-Legendre pieces between consecutive zeros, with T built up from
    the right.  The cut c is a zero of 1 - T: there (1 - T)^2 and 1 - T^2,
    whose derivatives are the two integrands up to sign, both vanish, so
    nothing is omitted on (-inf, c).  The last ``cuts`` such zeros above
    ``lower`` are used and their spread is returned as ``spread``.
    """
    y_max = 12.0
    zeros = _airy_zeros_below(lower)
    pos_edges = np.linspace(0.0, y_max, 25)
    anchor = np.concatenate([zeros[::-1], pos_edges])
    cum = cumulative_integrate(_ai, anchor)
    T_anchor = float(airy_tail(y_max)) + cum[-1] - cum
    T_zero = T_anchor[: len(zeros)][::-1]          # aligned with zeros (descending)
    T0 = T_anchor[len(zeros)]
    rest = _rest_zeros(np.concatenate([[0.0], zeros]), np.concatenate([[T0], T_zero]))
    x, w = np.polynomial.legendre.leggauss(40)

    def piece(lo, hi, T_hi, g):
        y = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
        return float(np.sum(0.5 * (hi - lo) * w * _ai(y) * g(_tail_between(y, hi, T_hi))))

    out = {}
    for key, g in (("one_minus_tail", lambda T: 1 - T), ("tail", lambda T: T)):
        acc = 0.0
        for i in range(len(pos_edges) - 1):
            acc += piece(pos_edges[i], pos_edges[i + 1], T_anchor[len(zeros) + i + 1], g)
        hi, T_hi = 0.0, T0
        values = []
        for c in np.sort(np.concatenate([zeros, rest]))[::-1]:
            acc += piece(c, hi, T_hi, g)
            T_hi = float(_tail_between(np.array([c]), hi, T_hi)[0])
            hi = c
            if np.any(np.isclose(c, rest, rtol=0, atol=1e-13)):
                values.append(acc)
        vals = values[-cuts:]
        out[key] = float(vals[-1])
        out[key + "_spread"] = float(max(vals) - min(vals))
    return out


@dataclass
class DeltaWeightResult:
    ensemble: str
    test_function: str
    n_grid: list
    statistics: list
    remainders: list
    remainder_limit: float
    boundary_weight: float
    predicted_remainder: float
    predicted_weight: float
    airy_integrals: dict = field(default_factory=dict)

    @property
    def relative_error(self) -> float:
        p = self.predicted_remainder
        return abs(self.remainder_limit - p) / abs(p) if p else abs(self.remainder_limit)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["relative_error"] = self.relative_error
        return d


def richardson(n_grid, values) -> float:
    """Limit of v(N) = v + c1/N + ... + c_{k-1}/N^{k-1} through k points."""
    n = np.asarray(n_grid, dtype=float)
    v = np.asarray(values, dtype=float)
    A = np.vander(1.0 / n, len(n), increasing=True)
    coef = np.linalg.solve(A, v)
    return float(coef[0])


def delta_weight_extraction(ensemble: str, a: TestFunction, n_grid=(8, 16, 32),
                            with_airy: bool = True) -> DeltaWeightResult:
    """Extrapolated O(1) remainder of <A> - N int rho_W a and the boundary weight.

    The boundary weight is the remainder plus the integrated smooth bulk
    correction (1/beta - 1/2) int a/(pi sqrt(1-X^2)); the prediction is
    (1/beta - 1/2)(a(1) + a(-1))/2.  For polynomial a the remainder is a
    polynomial in 1/N, so Richardson extrapolation through the grid is exact
    up to quadrature error.
    """
    name = ensemble.lower()
    if name not in ("goe", "gue", "gse"):
        raise ValueError("delta weights are extracted for the Gaussian ensembles")
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 3 or any(n % 2 for n in n_grid):
        raise ValueError("n_grid needs at least three even sizes")
    beta = BETA[name]
    c = 1 / beta - 0.5
    stats, rems = [], []
    for N in n_grid:
        st = linear_statistic(EnsembleSpec.from_name(name, N, 0.0, "bulk"), a)
        stats.append(st)
        rems.append(st - N * a.wigner_moment)
    try:
        lim = richardson(n_grid, rems)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"extrapolation failed for remainders {rems}") from exc
    if not math.isfinite(lim):
        raise ConvergenceError(f"extrapolation failed for remainders {rems}")
    return DeltaWeightResult(
        ensemble=name, test_function=a.label, n_grid=n_grid, statistics=stats,
        remainders=rems, remainder_limit=lim,
        boundary_weight=lim + c * a.singular_moment,
        predicted_remainder=c * (0.5 * sum(a.edge_values) - a.singular_moment),
        predicted_weight=c * 0.5 * sum(a.edge_values),
        airy_integrals=airy_edge_integrals() if with_airy else {},
    )


def tail_square_derivative_check(y, h: float = 1e-4) -> float:
    """max |d/dy (1 - T)^2 - 2 Ai (1 - T)| by central differences."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    up = (1 - np.asarray(airy_tail(y + h))) ** 2
    dn = (1 - np.asarray(airy_tail(y - h))) ** 2
    lhs = (up - dn) / (2 * h)
    rhs = 2 * np.asarray(airy_ai(y)) * (1 - np.asarray(airy_tail(y)))
    return float(np.max(np.abs(lhs - rhs)))
