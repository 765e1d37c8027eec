"""Acceptance suite.  Each test carries a ``criterion`` mark; conftest prints
one PASS/FAIL line per criterion at the end of the run."""
import json
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from rmtdensity import bulk, cli, edge, linstat, matching
from rmtdensity import mcsample as mc
from rmtdensity import specfun as sf
from rmtdensity.exactdens import EnsembleSpec, raw_moment, scaled_density, scaled_moment

DATA = Path(__file__).parent / "data"
ENSEMBLES = ("gue", "goe", "gse", "lue", "loe", "lse")


# --- 1. normalization -------------------------------------------------------

@pytest.mark.criterion(1)
def test_normalization_suite():
    t0 = time.perf_counter()
    worst = 0.0
    for name in ENSEMBLES:
        alphas = (0.0,) if name in ("gue", "goe", "gse") else (0.0, 0.5, 2.0)
        for N in (2, 4, 8, 16):
            for alpha in alphas:
                total = raw_moment(EnsembleSpec.from_name(name, N, alpha), 0)
                worst = max(worst, abs(total / N - 1))
    assert worst < 1e-5
    assert time.perf_counter() - t0 < 120


# --- 2. moments -------------------------------------------------------------

@pytest.mark.criterion(2)
@pytest.mark.parametrize("N", [4, 8, 16])
def test_gaussian_second_moments(N):
    assert scaled_moment(EnsembleSpec.from_name("gue", N), 2) == pytest.approx(N / 4, rel=1e-8)
    assert scaled_moment(EnsembleSpec.from_name("goe", N), 2) == pytest.approx((N + 1) / 4, rel=1e-6)


@pytest.mark.criterion(2)
def test_gse_second_moment_extrapolates():
    n = (8, 16, 32)
    gaps = [scaled_moment(EnsembleSpec.from_name("gse", N), 2) - N / 4 for N in n]
    assert abs(linstat.richardson(n, gaps) + 1 / 8) < 5e-3


# --- 3. bulk rates ----------------------------------------------------------

def bulk_ratio(name, X, alpha, max_order):
    res = []
    for N in (16, 32):
        exact = scaled_density(EnsembleSpec.from_name(name, N, alpha, "bulk"), X) / N
        res.append(abs(exact - bulk.bulk_expansion(name, X, N, alpha, max_order=max_order).total))
    return res[0] / res[1]


@pytest.mark.criterion(3)
@pytest.mark.parametrize("name,X,alpha", [("gue", 0.3, 0.0), ("goe", 0.3, 0.0), ("lue", 0.4, 1.0)])
def test_bulk_first_order_ratio(name, X, alpha):
    # next term O(N^-2): halving 1/N shrinks the residual about fourfold
    assert 3 <= bulk_ratio(name, X, alpha, 1) <= 5


@pytest.mark.criterion(3)
@pytest.mark.parametrize("name,X,alpha", [("goe", 0.3, 0.0), ("lue", 0.4, 1.0), ("lue", 0.4, 0.0)])
def test_bulk_second_order_ratio(name, X, alpha):
    # with the O(N^-2) terms included the next term is O(N^-3)
    assert 6 <= bulk_ratio(name, X, alpha, 2) <= 10


# --- 4. edge exponents ------------------------------------------------------

def edge_exponents(name, alpha, form):
    ns = (8, 16, 32, 64) if name in ("gue", "lue") else (8, 16, 32)
    return [edge.edge_residual_exponent(name, xi, ns, alpha, form=form)[0] for xi in (-1.0, 0.0, 1.0)]


@pytest.mark.criterion(4)
@pytest.mark.parametrize("name,alpha,form", [
    ("gue", 0.0, "corrected"), ("goe", 0.0, "corrected"), ("gse", 0.0, "corrected"),
    ("lue", 1.0, "paper"), ("loe", 1.0, "paper"), ("lse", 1.0, "paper"),
])
def test_edge_exponent(name, alpha, form):
    target = float(edge.NEXT_ORDER[name])
    assert all(abs(p - target) <= 0.25 for p in edge_exponents(name, alpha, form))


@pytest.mark.criterion(4)
@pytest.mark.xfail(strict=True, reason="printed Gaussian edge terms leave a lower-order remainder")
@pytest.mark.parametrize("name", ["gue", "goe", "gse"])
def test_edge_exponent_printed_gaussian(name):
    target = float(edge.NEXT_ORDER[name])
    assert all(abs(p - target) <= 0.25 for p in edge_exponents(name, 0.0, "paper"))


# --- 5. Figure 1 ------------------------------------------------------------

@pytest.fixture(scope="module")
def fig1():
    return cli.fig1_table()


@pytest.mark.criterion(5)
@pytest.mark.xfail(strict=True, reason="two-term expansion is 0.066 off at N = 20")
def test_fig1_discrepancy(fig1):
    assert np.max(np.abs(fig1.data["exact"] - fig1.data["asymptotic"])) < 0.015


@pytest.mark.criterion(5)
def test_fig1_curves(fig1):
    xi = fig1.data["xi"]
    assert xi[0] == -4 and xi[-1] == 4
    spec = EnsembleSpec.from_name("lse", 20, 0.5, "edge")
    assert np.allclose(fig1.data["exact"], scaled_density(spec, xi), rtol=0, atol=1e-15)
    # the discrepancy still shrinks like N^(-2/3)
    def gap(N):
        s = EnsembleSpec.from_name("lse", N, 0.5, "edge")
        return np.max(np.abs(scaled_density(s, xi) - edge.edge_lse(xi, N, 0.5).total))
    assert gap(80) < 0.5 * gap(20)


@pytest.mark.criterion(5)
def test_fig1_golden(fig1):
    golden = cli.parse_csv((DATA / "fig1_golden.csv").read_text())
    assert golden.columns == fig1.columns
    for c in fig1.columns:
        assert np.max(np.abs(golden.data[c] - fig1.data[c])) <= 1e-12


# --- 6. matching ------------------------------------------------------------

@pytest.mark.criterion(6)
def test_gue_substituted_bulk_matches_printed():
    spec = EnsembleSpec.from_name("gue", 8)
    assert abs(matching.matched_difference(spec, -5.0, 10 ** 4)) < 1e-6


@pytest.mark.criterion(6)
def test_gue_residual_decays():
    r = matching.match_report(EnsembleSpec.from_name("gue", 8), [-6.0], [64, 256, 1024])
    assert r.fitted_exponents[0] >= 0.9


@pytest.mark.criterion(6)
@pytest.mark.parametrize("name,label", [("gue", "23695/331776"), ("goe", "1/8 vs 1/4")])
def test_tensions_excluded_and_reported(name, label):
    spec = EnsembleSpec.from_name(name, 64)
    report = json.loads(matching.match_report(spec, [-6.0], [64, 256]).to_json())
    assert label in [t["label"] for t in report["known_tensions"]]
    assert label in [t.label for t in matching.known_tensions(name)]


# --- 7. delta weights -------------------------------------------------------

@pytest.mark.criterion(7)
def test_airy_edge_integrals():
    r = linstat.airy_edge_integrals()
    assert abs(r["one_minus_tail"] - 0.5) < 1e-8
    assert abs(r["tail"] - 0.5) < 1e-8


@pytest.mark.criterion(7)
@pytest.mark.parametrize("name,beta", [("goe", 1), ("gse", 4)])
@pytest.mark.parametrize("power", [2, 4])
def test_linear_statistic_remainder(name, beta, power):
    # a = X^p: a(1) = a(-1) = 1, singular moment int X^p / (pi sqrt(1-X^2)) = C(p, p/2) / 2^p
    singular = Fraction(math.comb(power, power // 2), 2 ** power)
    predicted = float((Fraction(1, beta) - Fraction(1, 2)) * (1 - singular))
    r = linstat.delta_weight_extraction(name, linstat.preset(f"x{power}"), with_airy=False)
    assert r.n_grid == [8, 16, 32]
    assert abs(r.remainder_limit - predicted) <= 0.1 * abs(predicted)


# --- 8. Monte Carlo ---------------------------------------------------------

@pytest.mark.criterion(8)
def test_monte_carlo_gue16():
    t0 = time.perf_counter()
    spec = EnsembleSpec.from_name("gue", 16, scaling="bulk")
    edges = np.linspace(-1.3, 1.3, 41)
    samples = mc.sample_spectra(spec, 16, 10_000)
    table = mc.empirical_density(samples, bins=edges)
    assert np.max(mc.z_scores(table, 10_000)) < 5
    again = mc.empirical_density(mc.sample_spectra(spec, 16, 10_000), bins=edges)
    assert mc.histogram_csv(again) == mc.histogram_csv(table)
    assert time.perf_counter() - t0 < 180


# --- 9. special functions ---------------------------------------------------

@pytest.mark.criterion(9)
@pytest.mark.parametrize("x", [sf.AIRY_CUTOFF_POS, -sf.AIRY_CUTOFF_NEG])
def test_airy_branches_at_cutoff(x):
    (m, mp), (a, ap) = sf.airy_ai_branches(x)
    assert abs(m - a) <= 1e-9 and abs(mp - ap) <= 1e-9


@pytest.mark.criterion(9)
def test_airy_ode_residual():
    # fourth-order stencil: h = 1e-3 keeps round-off in Ai' (~1e-12) below 1e-8
    h = 1e-3
    x = np.linspace(-12, 8, 81)
    d = sf.airy_ai_prime
    second = (8 * (d(x + h) - d(x - h)) - (d(x + 2 * h) - d(x - 2 * h))) / (12 * h)
    assert np.max(np.abs(second - x * sf.airy_ai(x))) <= 1e-8


@pytest.mark.criterion(9)
def test_hermite_orthonormality():
    L = 2 * math.sqrt(2 * 40) + 10
    x, w = sf.gauss_legendre_panels(-L, L, 240, 20)
    table = sf.hermite_functions(40, x)
    assert np.max(np.abs((table * w) @ table.T - np.eye(41))) < 1e-8


@pytest.mark.criterion(9)
@pytest.mark.parametrize("alpha", [0.0, 0.5, 2.0])
def test_laguerre_orthonormality(alpha):
    s, w = sf.gauss_legendre_panels(0.0, 300.0 ** 0.25, 400, 20)
    x = s ** 4
    table = sf.laguerre_functions(40, alpha, x)
    assert np.max(np.abs((table * (4 * s ** 3 * w)) @ table.T - np.eye(41))) < 1e-8
