"""Exact finite-N eigenvalue densities.

Raw densities use the classical weights

    GUE  UE_N(e^{-x^2})              LUE  UE_N(x^a e^{-x})
    GOE  OE_N(e^{-x^2/2})            LOE  OE_N(x^{(a-1)/2} e^{-x/2})
    GSE  SE_N(e^{-x^2})              LSE  SE_N(x^{a+1} e^{-x})

and are written in terms of the orthonormal Hermite/Laguerre functions of
:mod:`rmtdensity.specfun`, so every prefactor is an O(1) ratio such as
sqrt((N-1)/2) instead of a quotient of factorials.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import specfun
from .specfun import DEFAULT_QUAD, QuadratureSpec

BETAS = (1, 2, 4)
FAMILIES = ("gaussian", "laguerre")
SCALINGS = ("raw", "bulk", "edge")

_NAMES = {
    (1, "gaussian"): "goe", (2, "gaussian"): "gue", (4, "gaussian"): "gse",
    (1, "laguerre"): "loe", (2, "laguerre"): "lue", (4, "laguerre"): "lse",
}
_BY_NAME = {v: k for k, v in _NAMES.items()}


@dataclass(frozen=True)
class EnsembleSpec:
    beta: int
    family: str
    N: int
    alpha: float = 0.0
    scaling: str = "raw"

    def __post_init__(self):
        if self.beta not in BETAS:
            raise ValueError(f"beta must be one of {BETAS}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.scaling not in SCALINGS:
            raise ValueError(f"scaling must be one of {SCALINGS}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.beta == 1 and self.N % 2:
            raise ValueError("beta = 1 densities are only available for even N "
                             "(the orthogonal-ensemble formula assumes N even)")
        if self.alpha <= -1:
            raise ValueError("alpha must exceed -1")

    @property
    def name(self) -> str:
        return _NAMES[(self.beta, self.family)]

    @classmethod
    def from_name(cls, name: str, N: int, alpha: float = 0.0, scaling: str = "raw") -> "EnsembleSpec":
        try:
            beta, family = _BY_NAME[name.lower()]
        except KeyError:
            raise ValueError(f"unknown ensemble {name!r}") from None
        return cls(beta, family, N, alpha if family == "laguerre" else 0.0, scaling)

    def with_scaling(self, scaling: str) -> "EnsembleSpec":
        return EnsembleSpec(self.beta, self.family, self.N, self.alpha, scaling)

    def to_dict(self) -> dict:
        return {"ensemble": self.name, "beta": self.beta, "family": self.family,
                "N": self.N, "alpha": self.alpha, "scaling": self.scaling}


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _as_array(x):
    x = np.asarray(x, dtype=float)
    return x, np.atleast_1d(x).ravel()


def _shape_like(x, values):
    if x.ndim == 0:
        return float(values[0])
    return values.reshape(x.shape)


def _check_laguerre_x(xs):
    if np.any(xs < 0):
        raise ValueError("Laguerre densities are defined for x >= 0 only")


def _phi_over_sqrt(phi: np.ndarray, n: int, alpha: float, xs: np.ndarray) -> np.ndarray:
    """phi_n(x)/sqrt(x), with the one-sided limit at x = 0."""
    out = np.empty_like(xs)
    pos = xs > 0
    out[pos] = phi[pos] / np.sqrt(xs[pos])
    if (~pos).any():
        if alpha > 1:
            lim = 0.0
        elif alpha == 1:
            # c_n L_n^1(0) with L_n^1(0) = n + 1
            lim = math.exp(-specfun.laguerre_log_norm(n, 1.0)) * (n + 1)
        else:
            lim = math.inf
        out[~pos] = lim
    return out


def _laguerre_scale(n: int) -> float:
    return math.pi / math.sqrt(n + 1)


def laguerre_incomplete(n: int, alpha: float, x, quad: QuadratureSpec = DEFAULT_QUAD,
                        tail: bool = False) -> np.ndarray:
    """int_0^x phi_n(t)/sqrt(t) dt (or int_x^infty with tail=True).

    Integrated in s = sqrt(t), where the integrand 2 phi_n(s^2) is bounded.
    """
    x, xs = _as_array(x)
    _check_laguerre_x(xs)
    s = np.sqrt(xs)
    spec = quad.with_scale(_laguerre_scale(n))

    def f(u):
        return 2.0 * specfun.laguerre_function(n, alpha, u * u)

    order = np.argsort(s)
    if tail:
        top = math.sqrt(4 * n + 2 * alpha + 2 + 40 * (2 * n + 2) ** (1 / 3) + 60)
        pts = np.concatenate([s[order], [max(top, s.max())]])
        cum = specfun.cumulative_integrate(f, pts, spec)
        vals_sorted = cum[-1] - cum[:-1]
        res = np.empty_like(s)
        res[order] = vals_sorted
    else:
        pts = np.concatenate([[0.0], s[order]])
        cum = specfun.cumulative_integrate(f, pts, spec)
        res = np.empty_like(s)
        res[order] = cum[1:]
    return _shape_like(x, res)


@lru_cache(maxsize=None)
def laguerre_incomplete_total(n: int, alpha: float) -> float:
    """int_0^infty phi_n(t)/sqrt(t) dt from the closed half-line integral."""
    return math.exp(-specfun.laguerre_log_norm(n, alpha)) * specfun.laguerre_halfline_integral(n, alpha)


def hermite_tail(n: int, x, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """int_x^infty psi_n(t) dt by adaptive quadrature."""
    x, xs = _as_array(x)
    top = max(math.sqrt(2 * n + 1) + 40.0, xs.max())
    spec = quad.with_scale(math.pi / math.sqrt(2 * n + 1))
    order = np.argsort(xs)
    pts = np.concatenate([xs[order], [top]])
    cum = specfun.cumulative_integrate(lambda t: specfun.hermite_function(n, t), pts, spec)
    res = np.empty_like(xs)
    res[order] = cum[-1] - cum[:-1]
    return _shape_like(x, res)


# ---------------------------------------------------------------------------
# unitary ensembles
# ---------------------------------------------------------------------------

def _ue_raw(family: str, N: int, alpha: float, xs: np.ndarray) -> np.ndarray:
    if family == "gaussian":
        tab = specfun.hermite_functions(N - 1, xs)
    else:
        _check_laguerre_x(xs)
        tab = specfun.laguerre_functions(N - 1, alpha, xs)
    return np.sum(tab * tab, axis=0)


def density_ue(spec: EnsembleSpec, x):
    """rho(x; UE_N(g_2)) in raw coordinates."""
    if spec.beta != 2:
        raise ValueError("density_ue needs beta = 2")
    x, xs = _as_array(x)
    return _shape_like(x, _ue_raw(spec.family, spec.N, spec.alpha, xs))


# ---------------------------------------------------------------------------
# Gaussian orthogonal / symplectic
# ---------------------------------------------------------------------------

def _require_even(N):
    if N < 2 or N % 2:
        raise ValueError("orthogonal-ensemble densities need even N >= 2; "
                         "the formula is derived for N even only")


def oe_gaussian_correction(N: int, x, method: str = "recurrence",
                           quad: QuadratureSpec = DEFAULT_QUAD):
    """sqrt((N-1)/2) psi_{N-1}(x) int_0^x psi_{N-2}: the GOE minus UE_{N-1} piece."""
    _require_even(N)
    x, xs = _as_array(x)
    psi = specfun.hermite_function(N - 1, xs)
    if method == "recurrence":
        inc = specfun.hermite_function_integrals(N - 2, xs)[N - 2]
    elif method == "quad":
        spec = quad.with_scale(math.pi / math.sqrt(2 * N))
        inc = np.array([
            math.copysign(1.0, v) * specfun.integrate(
                lambda t: specfun.hermite_function(N - 2, t), 0.0, abs(v), spec)
            for v in xs
        ])
    else:
        raise ValueError(f"unknown method {method!r}")
    return _shape_like(x, math.sqrt((N - 1) / 2) * psi * inc)


def density_oe_gaussian(N: int, x, method: str = "recurrence", quad: QuadratureSpec = DEFAULT_QUAD):
    """rho(x; OE_N(e^{-x^2/2})), N even."""
    _require_even(N)
    x, xs = _as_array(x)
    base = _ue_raw("gaussian", N - 1, 0.0, xs)
    corr = np.atleast_1d(oe_gaussian_correction(N, xs, method, quad))
    return _shape_like(x, base + corr)


def density_se_gaussian(N: int, x, form: str = "halfline", quad: QuadratureSpec = DEFAULT_QUAD):
    """rho(x; SE_N(e^{-x^2})).

    form="halfline" subtracts the incomplete integral from the half-line
    constant; form="tail" integrates psi_{2N-1} over (x, infinity) directly.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x, xs = _as_array(x)
    tab = specfun.hermite_functions(2 * N, xs)
    half_ue = 0.5 * np.sum(tab[: 2 * N] ** 2, axis=0)
    if form == "halfline":
        inc = specfun.hermite_function_integrals(2 * N - 1, xs)[2 * N - 1]
        tail = specfun.hermite_function_halfline(2 * N - 1) - inc
    elif form == "tail":
        tail = np.atleast_1d(hermite_tail(2 * N - 1, xs, quad))
    else:
        raise ValueError(f"unknown form {form!r}")
    return _shape_like(x, half_ue - 0.5 * math.sqrt(N) * tab[2 * N] * tail)


# ---------------------------------------------------------------------------
# Laguerre orthogonal / symplectic
# ---------------------------------------------------------------------------

def density_oe_laguerre(N: int, alpha: float, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """rho(x; OE_N(x^{(a-1)/2} e^{-x/2})), N even, x >= 0."""
    _require_even(N)
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    x, xs = _as_array(x)
    _check_laguerre_x(xs)
    tab = specfun.laguerre_functions(N - 1, alpha, xs)
    base = np.sum(tab[: N - 1] ** 2, axis=0)
    lead = _phi_over_sqrt(tab[N - 1], N - 1, alpha, xs)
    inc = np.atleast_1d(laguerre_incomplete(N - 2, alpha, xs, quad))
    total = laguerre_incomplete_total(N - 2, alpha)
    coef = 0.25 * math.sqrt((N - 1) * (N - 1 + alpha))
    with np.errstate(invalid="ignore"):
        corr = coef * lead * (total - 2.0 * inc)
    corr = np.where(np.isnan(corr), math.inf, corr)
    return _shape_like(x, base + corr)


def density_se_laguerre(N: int, alpha: float, x, form: str = "w1", quad: QuadratureSpec = DEFAULT_QUAD):
    """rho(x; SE_N(x^{a+1} e^{-x})), x >= 0.

    form="w1" integrates from 0 (the half-line total vanishes for the odd
    index); form="w1A" integrates over (x, infinity).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    x, xs = _as_array(x)
    _check_laguerre_x(xs)
    tab = specfun.laguerre_functions(2 * N, alpha, xs)
    half_ue = 0.5 * np.sum(tab[: 2 * N] ** 2, axis=0)
    pos = xs > 0
    lead = np.zeros_like(xs)
    lead[pos] = tab[2 * N][pos] / np.sqrt(xs[pos])
    coef = 0.25 * math.sqrt(2 * N * (2 * N + alpha))
    if form == "w1":
        inc = np.atleast_1d(laguerre_incomplete(2 * N - 1, alpha, xs, quad))
        corr = -coef * lead * inc
    elif form == "w1A":
        tail = np.atleast_1d(laguerre_incomplete(2 * N - 1, alpha, xs, quad, tail=True))
        corr = coef * lead * tail
    else:
        raise ValueError(f"unknown form {form!r}")
    out = half_ue + corr
    # the weight x^{a+1} forces the density to vanish at the origin
    out[xs == 0] = 0.0
    return _shape_like(x, out)


# ---------------------------------------------------------------------------
# weight presets with rescaled arguments
# ---------------------------------------------------------------------------

def density_se_gaussian_weight(N: int, c: float, x):
    """rho(x; SE_N(e^{-c x^2})), e.g. c = 2 for the GSE as a matrix ensemble."""
    x = np.asarray(x, dtype=float)
    r = math.sqrt(c)
    return r * density_se_gaussian(N, r * x)


def density_se_laguerre_weight(N: int, power: float, rate: float, x):
    """rho(x; SE_N(x^power e^{-rate x})); maps to alpha = power - 1."""
    x = np.asarray(x, dtype=float)
    return rate * density_se_laguerre(N, power - 1.0, rate * x)


# ---------------------------------------------------------------------------
# dispatch and scaling
# ---------------------------------------------------------------------------

def density(spec: EnsembleSpec, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """Raw-coordinate density for any of the six ensembles."""
    key = spec.name
    if key in ("gue", "lue"):
        return density_ue(spec, x)
    if key == "goe":
        return density_oe_gaussian(spec.N, x)
    if key == "gse":
        return density_se_gaussian(spec.N, x)
    if key == "loe":
        return density_oe_laguerre(spec.N, spec.alpha, x, quad)
    return density_se_laguerre(spec.N, spec.alpha, x, quad=quad)


@dataclass(frozen=True)
class Scaling:
    bulk_jacobian: float   # raw x = bulk_jacobian * X
    edge_scale: float      # X = 1 + xi / edge_scale
    edge_prefactor: float  # edge quantity = edge_prefactor * rho_bulk(X)


def scaling_constants(spec: EnsembleSpec) -> Scaling:
    N = spec.N
    name = spec.name
    if name in ("gue", "goe"):
        return Scaling(math.sqrt(2 * N), 2 * N ** (2 / 3), 1 / (2 * N ** (2 / 3)))
    if name == "gse":
        return Scaling(2 * math.sqrt(N), 2 * (2 * N) ** (2 / 3), 1 / (2 * N) ** (2 / 3))
    if name in ("lue", "loe"):
        return Scaling(4.0 * N, (2 * N) ** (2 / 3), 1 / (2 * N) ** (2 / 3))
    return Scaling(8.0 * N, (4 * N) ** (2 / 3), 2 / (4 * N) ** (2 / 3))


def edge_to_bulk(spec: EnsembleSpec, xi):
    return 1.0 + np.asarray(xi, dtype=float) / scaling_constants(spec).edge_scale


def edge_to_raw(spec: EnsembleSpec, xi):
    return scaling_constants(spec).bulk_jacobian * edge_to_bulk(spec, xi)


def scaled_density(spec: EnsembleSpec, X, quad: QuadratureSpec = DEFAULT_QUAD):
    """Density in the coordinates named by spec.scaling.

    bulk: rho(X) = s rho_raw(s X), support -> (-1, 1) or (0, 1).
    edge: X is the soft-edge variable xi and the result is the edge
    prefactor times the bulk-scaled density at 1 + xi/edge_scale.
    """
    X = np.asarray(X, dtype=float)
    sc = scaling_constants(spec)
    if spec.scaling == "raw":
        return density(spec, X, quad)
    if spec.scaling == "bulk":
        return sc.bulk_jacobian * np.asarray(density(spec, sc.bulk_jacobian * X, quad))
    xb = 1.0 + X / sc.edge_scale
    vals = sc.edge_prefactor * sc.bulk_jacobian * np.asarray(density(spec, sc.bulk_jacobian * xb, quad))
    return float(vals) if X.ndim == 0 else vals


def raw_support(spec: EnsembleSpec) -> tuple[float, float]:
    """Interval carrying all but a negligible fraction of the raw density."""
    N = spec.N
    if spec.family == "gaussian":
        edge = {"gue": math.sqrt(2 * N), "goe": math.sqrt(2 * N), "gse": 2 * math.sqrt(N)}[spec.name]
        margin = 14.0
        return -edge - margin, edge + margin
    edge = {"lue": 4 * N, "loe": 4 * N, "lse": 8 * N}[spec.name] + 2 * spec.alpha + 2
    return 0.0, edge + 25.0 * (2 * edge) ** (1 / 3) + 40.0


def raw_moment(spec: EnsembleSpec, power: int = 0, panels: int | None = None) -> float:
    """int x^power rho_raw(x) dx by composite Gauss-Legendre.

    Laguerre densities are integrated in s = x^{1/4}, which smooths the
    x^{(a-1)/2} behaviour of the orthogonal case at the origin.
    """
    lo, hi = raw_support(spec)
    if spec.family == "gaussian":
        n = panels or max(200, int(6 * (hi - lo) * math.sqrt(spec.N + 1)))
        nodes, w = specfun.gauss_legendre_panels(lo, hi, n, 12)
        return float(np.sum(w * nodes ** power * density(spec, nodes)))
    n = panels or max(100, int(4 * math.sqrt(hi) * math.sqrt(spec.N + 1)))
    s, w = specfun.gauss_legendre_panels(0.0, hi ** 0.25, n, 12)
    x = s ** 4
    return float(np.sum(w * 4 * s ** 3 * x ** power * density(spec, x)))


def scaled_moment(spec: EnsembleSpec, power: int) -> float:
    """int X^power rho(X) dX in bulk coordinates."""
    s = scaling_constants(spec).bulk_jacobian
    return raw_moment(spec.with_scaling("raw"), power) / s ** power


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass
class DensityTable:
    spec: EnsembleSpec
    abscissae: np.ndarray
    exact: np.ndarray
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissae = np.asarray(self.abscissae, dtype=float)
        self.exact = np.asarray(self.exact, dtype=float)
        n = self.abscissae.size
        if self.exact.size != n or any(np.asarray(v).size != n for v in self.columns.values()):
            raise ValueError("all columns must match the abscissae length")
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}

    def to_csv(self, xname: str = "x") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(self.columns)
        w.writerow([xname, "exact", *names])
        for i in range(self.abscissae.size):
            row = [self.abscissae[i], self.exact[i], *(self.columns[k][i] for k in names)]
            w.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, spec: EnsembleSpec) -> "DensityTable":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        data = np.array([[float(v) for v in r] for r in body]).reshape(len(body), len(header))
        cols = {name: data[:, j] for j, name in enumerate(header[2:], start=2)}
        return cls(spec, data[:, 0], data[:, 1], cols)


def tabulate(spec: EnsembleSpec, grid) -> DensityTable:
    grid = np.asarray(grid, dtype=float)
    return DensityTable(spec, grid, np.atleast_1d(scaled_density(spec, grid)))
