"""Bulk-to-edge matching.

The bulk expansions are evaluated at X = 1 + xi/edge_scale and rescaled to the
edge normalisation, so they can be compared with the Airy-side expansions at
the same (xi, N).  For coefficient-level comparisons the substituted series is
re-expanded numerically in eps = N^{-1/3} at fixed xi: N is treated as a
continuous variable (the reduced phases make this smooth) and a polynomial in
eps is fitted on a small-eps window.

The printed re-expanded series are truncated both in N and in powers of |xi|,
so each eps-block is compared with the bulk expansion truncated at the order
that produces the printed powers of |xi| (``UE_BLOCK_ORDERS``).  For the
beta = 1, 4 ensembles the printed series are "unitary part + correction"; the
correction is compared against (ensemble bulk) - (unitary bulk truncated at the
same order).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import bulk as _bulk
from .edge import edge_expansion
from .exactdens import EnsembleSpec, scaling_constants

PI = math.pi
SQRT_PI = math.sqrt(PI)

SUPPORTED = ("gue", "goe", "gse", "lue", "loe", "lse")
GAUSSIAN = ("gue", "goe", "gse")

# max bulk order used for each eps-power block of the unitary series
UE_BLOCK_ORDERS = {"gue": {0: 3, 2: 4}, "lue": {0: 1, 1: 1, 2: 2}}
# integer bulk order carried by each non-unitary ensemble
_CORRECTION_ORDER = {"goe": 2, "gse": 1, "loe": 1, "lse": 1}


def _c4(a):
    return math.cos(4 * a ** 1.5 / 3)


def _s4(a):
    return math.sin(4 * a ** 1.5 / 3)


@dataclass(frozen=True)
class Tension:
    """A printed re-expanded term that the substitution does not reproduce.

    ``printed_term`` and ``substituted_term`` give the term's contribution to
    the coefficient of N^{-block/3} (edge normalisation) as functions of
    (|xi|, alpha).  source is "paper" when the printed series itself flags the term.
    """

    ensemble: str
    label: str
    block: int
    printed: str
    substituted: str
    source: str
    note: str
    printed_term: Callable = field(repr=False, compare=False, default=None)
    substituted_term: Callable = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("ensemble", "label", "block", "printed", "substituted", "source", "note")}


_LUE_F = 2 ** (-2 / 3)

KNOWN_TENSIONS = (
    Tension("gue", "23695/331776", 2,
            "-23695 cos(4|xi|^{3/2}/3) / (331776 pi |xi|^3)",
            "same coefficient: 7/144 from the O(N^-3) term plus -39823/331776 from the O(N^-4) phase",
            "paper",
            "flagged as unmatched on the Airy side; the substituted bulk series and the "
            "Airy-side N^{-2/3} term both reproduce it",
            lambda a, al: -23695 * _c4(a) / (331776 * PI * a ** 3) / 2,
            lambda a, al: -23695 * _c4(a) / (331776 * PI * a ** 3) / 2),
    Tension("goe", "1/8 vs 1/4", 0,
            "cos(4|xi|^{3/2}/3) / (8 pi |xi|)",
            "cos(4|xi|^{3/2}/3) / (4 pi |xi|)",
            "paper",
            "the 1/8 traces to the O(1/N) oscillatory term of the GOE bulk display written "
            "relative to the GUE; the verified GOE bulk expansion gives 1/4",
            lambda a, al: _c4(a) / (8 * PI * a),
            lambda a, al: _c4(a) / (4 * PI * a)),
    Tension("gse", "1/8 vs 1/4", 0,
            "cos(4|xi|^{3/2}/3) / (8 pi |xi|)",
            "cos(4|xi|^{3/2}/3) / (4 pi |xi|)",
            "substitution",
            "same factor as in the GOE; the GSE bulk density has no O(1/N) cos(4 N pi P_W) term",
            lambda a, al: _c4(a) / (8 * PI * a),
            lambda a, al: _c4(a) / (4 * PI * a)),
    Tension("lse", "alpha 2^{-1/3}", 1,
            "-alpha 2^{-1/3} sin(4|xi|^{3/2}/3) / (2 (4N)^{1/3} pi sqrt|xi|)",
            "-alpha sin(4|xi|^{3/2}/3) / (2 (4N)^{1/3} pi sqrt|xi|)",
            "substitution",
            "the alpha-shift of the phase 2A_{2N,alpha} carries no 2^{-1/3}",
            lambda a, al: -al * 2 ** (-1 / 3) * _s4(a) / (2 * PI * math.sqrt(a)) * 4 ** (-1 / 3),
            lambda a, al: -al * _s4(a) / (2 * PI * math.sqrt(a)) * 4 ** (-1 / 3)),
    Tension("lue", "N^{-2/3} cos", 2,
            "40(-1 + 2 alpha^2) cos(4|xi|^{3/2}/3) / (160 pi)",
            "(40(-1 + 2 alpha^2) - 34/3) cos(4|xi|^{3/2}/3) / (160 pi)",
            "substitution",
            "the phase correction of the O(N^-2) sin term is missing, as -43/480 = -1/8 + 17/480 "
            "shows for the GUE",
            lambda a, al: 40 * (-1 + 2 * al * al) * _c4(a) / (160 * PI) * _LUE_F,
            lambda a, al: (40 * (-1 + 2 * al * al) - 34 / 3) * _c4(a) / (160 * PI) * _LUE_F),
    Tension("lue", "N^{-2/3} smooth", 2,
            "(5 - 20 alpha^2) / (160 pi |xi|^{3/2})",
            "(15/2 - 20 alpha^2) / (160 pi |xi|^{3/2})",
            "substitution",
            "expanding X^{-3/2} in the O(N^-2) smooth term gives 3/2, not 1",
            lambda a, al: (5 - 20 * al * al) / (160 * PI * a ** 1.5) * _LUE_F,
            lambda a, al: (7.5 - 20 * al * al) / (160 * PI * a ** 1.5) * _LUE_F),
)

# powers of N^{-1/3} printed completely; the LUE N^{-2/3} block also needs the
# O(N^-3) bulk term (its sin/|xi|^{3/2} part), which is not available
MATCHED_POWERS = {"gue": (0, 2), "lue": (0, 1), "goe": (0, 1), "gse": (0, 1), "loe": (0, 1), "lse": (0, 1)}


def known_tensions(name: str) -> list:
    return [t for t in KNOWN_TENSIONS if t.ensemble == name.lower()]


def _name(spec) -> str:
    name = spec.name if isinstance(spec, EnsembleSpec) else str(spec).lower()
    if name not in SUPPORTED:
        raise ValueError(f"unsupported ensemble {name!r}")
    return name


def _check_xi(xi):
    xi = float(xi)
    if not xi < 0:
        raise ValueError("xi must be negative")
    if xi > -2:
        raise ValueError("matching needs |xi| >= 2")
    return xi


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------

def _edge_norm(name, N, alpha):
    """(edge_scale, edge_prefactor * N) for real N."""
    if name in ("gue", "goe"):
        return 2 * N ** (2 / 3), N ** (1 / 3) / 2
    if name == "gse":
        return 2 * (2 * N) ** (2 / 3), N / (2 * N) ** (2 / 3)
    if name in ("lue", "loe"):
        return (2 * N) ** (2 / 3), N / (2 * N) ** (2 / 3)
    return (4 * N) ** (2 / 3), 2 * N / (4 * N) ** (2 / 3)


def _bulk_terms(name, X, N, alpha, max_order=None):
    """Bulk expansion (1/N) rho(X) for real N; parity-free GSE."""
    if name == "gue":
        ev = _bulk.gue_terms(X, N, 4 if max_order is None else min(int(max_order), 4))
    elif name == "lue":
        ev = _bulk.lue_terms(X, N, alpha, 2 if max_order is None else min(int(max_order), 2))
    elif name == "goe":
        ev = _bulk.goe_terms(X, N, 2 if max_order is None else min(int(max_order), 2))
    elif name == "gse":
        ev = _bulk.gse_terms(X, N, parity=False)
    elif name == "loe":
        ev = _bulk.loe_terms(X, N, alpha)
    else:
        ev = _bulk.lse_terms(X, N, alpha)
    return ev if max_order is None else ev.truncated(max_order)


def _substituted(name, xi, N, alpha, max_order=None):
    scale, norm = _edge_norm(name, N, alpha)
    X = 1 + xi / scale
    lo = 0.0 if name in ("lue", "loe", "lse") else -1.0
    if not lo < X < 1:
        raise ValueError("substituted X leaves the bulk")
    return norm * float(_bulk_terms(name, X, N, alpha, max_order).total)


def _unitary_substituted(name, xi, N, alpha, max_order):
    """Unitary part of the non-unitary ensemble, in that ensemble's edge normalisation."""
    if name == "goe":
        return _substituted("gue", xi, N, alpha, max_order)
    if name == "loe":
        return _substituted("lue", xi, N, alpha, max_order)
    # 1/(2N) rho_UE_2N at the same X; edge normalisations coincide with the 2N unitary ones
    if name == "gse":
        return _substituted("gue", xi, 2 * N, alpha, max_order)
    return _substituted("lue", xi, 2 * N, alpha, max_order)


def bulk_at_edge(spec: EnsembleSpec, xi: float, N: int) -> float:
    """Full bulk expansion at X = 1 + xi/edge_scale in the edge normalisation."""
    name = _name(spec)
    xi = _check_xi(xi)
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if name in ("goe", "loe") and N % 2:
        raise ValueError("N must be even")
    scale = scaling_constants(EnsembleSpec.from_name(name, N, spec.alpha)).edge_scale
    if xi / scale <= -0.5:
        raise ValueError("xi/edge_scale must exceed -0.5")
    if name == "gse":
        ev = _bulk.gse_terms(1 + xi / scale, N, parity=True)
        return _edge_norm(name, N, spec.alpha)[1] * float(ev.total)
    return _substituted(name, xi, N, spec.alpha)


# ---------------------------------------------------------------------------
# numerical re-expansion in eps = N^{-1/3}
# ---------------------------------------------------------------------------

def eps_coefficients(f, xi: float, degree: int = 8, even: bool = False, points: int = 48) -> np.ndarray:
    """Coefficients c_0..c_degree of f(N) ~ sum c_j N^{-j/3} at fixed xi.

    The fit window shrinks like |xi|^{-5/4} so the phase corrections, which
    grow like |xi|^{5/2} eps^2, stay O(1) across it.  ``even=True`` fits only
    even powers (the Gaussian unitary series); odd entries are then zero.
    """
    top = min(0.15, 0.5 * abs(xi) ** -1.25)
    k = np.arange(points)
    eps = top * (1 + 29 * (1 - np.cos(PI * (k + 0.5) / points)) / 2) / 30
    vals = np.array([f(e ** -3) for e in eps])
    powers = np.arange(0, degree + 1, 2 if even else 1)
    c, *_ = np.linalg.lstsq((eps[:, None] / top) ** powers, vals, rcond=None)
    out = np.zeros(degree + 1)
    out[powers] = c / top ** powers
    return out


def substituted_blocks(spec: EnsembleSpec, xi: float, alpha: float | None = None) -> dict:
    """Re-expanded substituted series at matched truncation: {power p: coefficient of N^{-p/3}}.

    For beta = 2 each block uses the bulk orders in UE_BLOCK_ORDERS.  For the
    other ensembles the unitary part is added the same way and the correction
    contributes its blocks p = 0, 1.
    """
    name = _name(spec)
    xi = _check_xi(xi)
    alpha = spec.alpha if alpha is None and isinstance(spec, EnsembleSpec) else (alpha or 0.0)
    out = {}
    if name in ("gue", "lue"):
        for p, k in UE_BLOCK_ORDERS[name].items():
            out[p] = eps_coefficients(lambda N: _substituted(name, xi, N, alpha, k), xi,
                                      12 if name == "gue" else 8, even=name == "gue")[p]
        return out
    base = "gue" if name in GAUSSIAN else "lue"
    k = _CORRECTION_ORDER[name]
    for p, kk in UE_BLOCK_ORDERS[base].items():
        out[p] = eps_coefficients(lambda N: _unitary_substituted(name, xi, N, alpha, kk), xi,
                                  12 if base == "gue" else 8, even=base == "gue")[p]
    corr = eps_coefficients(
        lambda N: _substituted(name, xi, N, alpha) - _unitary_substituted(name, xi, N, alpha, k), xi)
    for p in (0, 1):
        out[p] = out.get(p, 0.0) + corr[p]
    return out


# ---------------------------------------------------------------------------
# printed re-expanded series
# ---------------------------------------------------------------------------

def _tm_blocks(a):
    c, s = math.cos(4 * a ** 1.5 / 3), math.sin(4 * a ** 1.5 / 3)
    b0 = (2 * math.sqrt(a) / PI + 1 / (16 * PI * a ** 2.5)
          + (-1 / (2 * PI * a) + 1225 / (2304 * PI * a ** 4)) * c
          - 17 * s / (48 * PI * a ** 2.5))
    b2 = (-a ** 1.5 / (4 * PI) + 5 / (128 * PI * a ** 1.5)
          + (-43 / (480 * PI) - 23695 / (331776 * PI * a ** 3)) * c
          + (233 / 4608 - a ** 3 / 20) * s / (PI * a ** 1.5))
    # printed normalisation 1/N^{2/3} is twice the edge one
    return {0: b0 / 2, 2: b2 / 2}


def _lue_blocks(a, alpha):
    c, s = math.cos(4 * a ** 1.5 / 3), math.sin(4 * a ** 1.5 / 3)
    b0 = 2 ** (2 / 3) * math.sqrt(a) / PI - c / (2 ** (4 / 3) * PI * a)
    b1 = alpha * (1 + s) / (2 ** (2 / 3) * PI * math.sqrt(a))
    b2 = (5 - 20 * alpha ** 2 + 80 * a ** 3 + 40 * (-1 + 2 * alpha ** 2) * a ** 1.5 * c
          + (5 - 20 * alpha ** 2 + 16 * a ** 3) * s) / (160 * PI * a ** 1.5)
    # printed normalisation 1/N^{2/3} is 2^{2/3} times the edge one
    f = 2 ** (-2 / 3)
    return {0: b0 * f, 1: b1 * f, 2: b2 * f}


def _doubled(blocks):
    """Blocks in powers of (2N)^{-1/3} rewritten in powers of N^{-1/3}."""
    return {p: v * 2 ** (-p / 3) for p, v in blocks.items()}


def _add(blocks, extra):
    out = dict(blocks)
    for p, v in extra.items():
        out[p] = out.get(p, 0.0) + v
    return out


def reference_blocks(spec, xi: float, alpha: float | None = None, exclude_tensions: bool = False) -> dict:
    """The printed re-expanded series as {power p: coefficient of N^{-p/3}} in the edge normalisation.

    With ``exclude_tensions`` the printed form of every known tension is removed.
    """
    name = _name(spec)
    xi = _check_xi(xi)
    alpha = spec.alpha if alpha is None and isinstance(spec, EnsembleSpec) else (alpha or 0.0)
    out = _printed_blocks(name, -xi, alpha)
    if exclude_tensions:
        for t in known_tensions(name):
            out[t.block] -= t.printed_term(-xi, alpha)
    return out


def _printed_blocks(name, a, alpha):
    th = 4 * a ** 1.5 / 3
    c4, s4 = math.cos(th), math.sin(th)
    z = 2 * a ** 1.5 / 3
    if name == "gue":
        return _tm_blocks(a)
    if name == "lue":
        return _lue_blocks(a, alpha)
    if name == "goe":
        extra = {0: 3 / (16 * PI * a ** 2.5) + 23 * s4 / (96 * PI * a ** 2.5) + c4 / (8 * PI * a),
                 1: -(1 / (4 * PI * math.sqrt(a)) + c4 / (16 * PI * a ** 2))}
        return _add(_tm_blocks(a), extra)
    if name == "gse":
        extra = {0: -0.5 * math.sin(z + PI / 4) / (SQRT_PI * a ** 0.25) + c4 / (8 * PI * a),
                 1: (1 / (4 * PI * math.sqrt(a)) + a ** 0.25 * math.sin(z - PI / 4) / (4 * SQRT_PI))
                 * 2 ** (-1 / 3)}
        return _add(_doubled(_tm_blocks(a)), extra)
    if name == "loe":
        extra = {0: c4 / (4 * PI * a),
                 1: -(1 + alpha * s4) / (2 * PI * math.sqrt(a)) * 2 ** (-1 / 3)}
        return _add(_lue_blocks(a, alpha), extra)
    # lse; the printed cos(2|xi|^{3/2} - 3pi/4) is read as cos(2|xi|^{3/2}/3 - 3pi/4)
    extra = {0: math.sin(z - 3 * PI / 4) / (2 * SQRT_PI * a ** 0.25) + c4 / (4 * PI * a),
             1: (1 + (1 + alpha) * SQRT_PI * a ** 0.75 * math.cos(z - 3 * PI / 4)
                 - alpha * 2 ** (-1 / 3) * s4) / (2 * PI * math.sqrt(a)) * 4 ** (-1 / 3)}
    return _add(_doubled(_lue_blocks(a, alpha)), extra)


def _sum_blocks(blocks, N, max_power=None):
    return sum(v * N ** (-p / 3) for p, v in blocks.items() if max_power is None or p <= max_power)


def reference_expansion(spec: EnsembleSpec, xi: float, N: int, exclude_tensions: bool = False) -> float:
    """Evaluate the printed re-expanded series at (xi, N), edge normalisation."""
    return _sum_blocks(reference_blocks(spec, xi, exclude_tensions=exclude_tensions), N)


def matched_blocks(spec: EnsembleSpec, xi: float, exclude_tensions: bool = True):
    """(substituted, printed) blocks over the powers printed in full.

    With ``exclude_tensions`` each known tension is removed from both sides,
    its printed form from the printed blocks and its substituted form from
    the substituted ones.
    """
    name = _name(spec)
    alpha = spec.alpha if isinstance(spec, EnsembleSpec) else 0.0
    a = -_check_xi(xi)
    sub = substituted_blocks(spec, xi)
    ref = reference_blocks(spec, xi, exclude_tensions=exclude_tensions)
    if exclude_tensions:
        for t in known_tensions(name):
            if t.block in sub:
                sub[t.block] -= t.substituted_term(a, alpha)
    keep = MATCHED_POWERS[name]
    return {p: sub[p] for p in keep}, {p: ref[p] for p in keep}


def matched_difference(spec: EnsembleSpec, xi: float, N: int, exclude_tensions: bool = True) -> float:
    """Relative difference of substituted and printed series at matched truncation."""
    sub, ref = matched_blocks(spec, xi, exclude_tensions)
    s, r = _sum_blocks(sub, N), _sum_blocks(ref, N)
    return (s - r) / abs(r)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class MatchingReport:
    ensemble: EnsembleSpec
    xi_grid: np.ndarray
    n_grid: np.ndarray
    residuals: np.ndarray
    fitted_exponents: np.ndarray
    r_squared: np.ndarray
    known_tensions: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def flagged(self) -> np.ndarray:
        """True where the power-law fit is not trustworthy (R^2 < 0.9 or missing)."""
        return ~(np.isfinite(self.r_squared) & (self.r_squared >= 0.9))

    def to_dict(self) -> dict:
        fits = [{"xi": float(x), "exponent": _clean(e), "r2": _clean(r), "flagged": bool(f)}
                for x, e, r, f in zip(self.xi_grid, self.fitted_exponents, self.r_squared, self.flagged)]
        return {"ensemble": self.ensemble.to_dict(),
                "xi_grid": [float(x) for x in self.xi_grid],
                "n_grid": [int(n) for n in self.n_grid],
                "residuals": [[_clean(v) for v in row] for row in self.residuals],
                "fits": fits,
                "known_tensions": [t.to_dict() for t in self.known_tensions],
                "errors": list(self.errors)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _clean(v):
    v = float(v)
    return v if math.isfinite(v) else None


def power_fit(n_values, residuals):
    """Exponent p and R^2 of |residual| ~ C N^{-p}."""
    n = np.asarray(n_values, float)
    r = np.abs(np.asarray(residuals, float))
    ok = np.isfinite(r) & (r > 0)
    if ok.sum() < 2:
        return math.nan, math.nan
    x, y = np.log(n[ok]), np.log(r[ok])
    slope, icpt = np.polyfit(x, y, 1)
    if ok.sum() == 2:
        return -float(slope), 1.0
    ss_res = float(np.sum((y - (slope * x + icpt)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return -float(slope), (1.0 - ss_res / ss_tot) if ss_tot > 0 else math.nan


def match_report(spec: EnsembleSpec, xi_grid, n_grid, form: str = "corrected") -> MatchingReport:
    """Residuals bulk_at_edge - edge expansion over a (xi, N) grid with per-xi power fits."""
    name = _name(spec)
    xi_grid = np.asarray(xi_grid, float)
    n_grid = np.asarray(n_grid, int)
    if xi_grid.size == 0 or n_grid.size == 0:
        raise ValueError("grids must be nonempty")
    if np.any(xi_grid > -2):
        raise ValueError("xi grid must satisfy xi <= -2")
    res = np.full((xi_grid.size, n_grid.size), np.nan)
    errors = []
    for i, xi in enumerate(xi_grid):
        for j, N in enumerate(n_grid):
            try:
                edge = edge_expansion(name, xi, int(N), spec.alpha, form=form).total
                res[i, j] = bulk_at_edge(spec, xi, int(N)) - edge
            except (ValueError, ArithmeticError) as exc:
                errors.append({"xi": float(xi), "N": int(N), "error": str(exc)})
    fits = [power_fit(n_grid, row) for row in res]
    return MatchingReport(spec, xi_grid, n_grid, res,
                          np.array([f[0] for f in fits]), np.array([f[1] for f in fits]),
                          known_tensions(name), errors)


def airy_blocks(spec, xi: float, alpha: float | None = None, form: str = "corrected") -> dict:
    """Airy-side edge expansion as {power p: coefficient of N^{-p/3}}."""
    from . import edge as _edge
    name = _name(spec)
    alpha = spec.alpha if alpha is None and isinstance(spec, EnsembleSpec) else (alpha or 0.0)
    pieces = getattr(_edge, f"{name}_edge_pieces")
    if name in GAUSSIAN:
        got = pieces(float(xi), 1.0, form)
    else:
        got = pieces(float(xi), 1.0, alpha)
    return {int(3 * Fraction(o)): float(v) for o, v in got}
