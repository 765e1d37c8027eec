import math

import numpy as np
import pytest

from rmtdensity import linstat as L
from rmtdensity.exactdens import EnsembleSpec, scaled_density


def bulk(name, N, alpha=0.0):
    return EnsembleSpec.from_name(name, N, alpha, "bulk")


# --- test functions ---------------------------------------------------------

def test_presets_and_moments():
    x2 = L.preset("x2")
    assert x2.wigner_moment == pytest.approx(0.25, rel=1e-15)
    assert x2.singular_moment == pytest.approx(0.5, rel=1e-15)
    assert x2.edge_values == (1.0, 1.0)
    with pytest.raises(ValueError):
        L.preset("x3")


@pytest.mark.parametrize("coeffs", [[1.0], [0, 0, 1], [0, 0, 0, 0, 1], [0.3, -1, 2, 0.5, -0.7]])
def test_closed_form_moments_match_quadrature(coeffs):
    a = L.polynomial(coeffs)
    assert a.wigner_moment == pytest.approx(L.numeric_wigner_moment(a.evaluate), abs=1e-8)
    assert a.singular_moment == pytest.approx(L.numeric_singular_moment(a.evaluate), abs=1e-8)


def test_quadrature_fills_missing_moments():
    a = L.TestFunction("cos", np.cos)
    # int cos(X) (2/pi) sqrt(1-X^2) = 2 J_1(1), int cos(X)/(pi sqrt(1-X^2)) = J_0(1)
    from scipy.special import j0, j1
    assert a.wigner_moment == pytest.approx(2 * j1(1.0), abs=1e-12)
    assert a.singular_moment == pytest.approx(j0(1.0), abs=1e-12)
    assert a.edge_values == pytest.approx((math.cos(1), math.cos(1)))
    assert a.to_dict()["label"] == "cos"


# --- exact statistics -------------------------------------------------------

@pytest.mark.parametrize("name,alpha", [("gue", 0), ("goe", 0), ("gse", 0), ("lue", 0.5), ("loe", 2.0), ("lse", 0.5)])
def test_statistic_of_one_is_n(name, alpha):
    assert L.linear_statistic(bulk(name, 4, alpha), L.preset("one")) == pytest.approx(4, rel=1e-10)


def test_second_moment_examples():
    assert L.linear_statistic(bulk("goe", 8), L.preset("x2")) == pytest.approx(2.25, rel=1e-6)
    assert L.linear_statistic(bulk("gue", 8), L.preset("x2")) == pytest.approx(2.0, rel=1e-8)


def test_raw_scaling_statistic():
    s = EnsembleSpec.from_name("gue", 6)
    # E Tr H^2 = N^2 / 2 for the weight e^{-x^2}
    assert L.linear_statistic(s, lambda x: x * x) == pytest.approx(18.0, rel=1e-9)


# --- predictions ------------------------------------------------------------

def test_gaussian_prediction_examples():
    x2 = L.preset("x2")
    for a in (x2, L.preset("x4"), L.polynomial([1, 2, 3])):
        assert L.gaussian_prediction(10, 2, a) == pytest.approx(10 * a.wigner_moment, rel=1e-15)
    assert L.gaussian_prediction(10, 1, x2) == pytest.approx(10 / 4 + 1 / 4, rel=1e-15)
    assert L.gaussian_prediction(10, 4, x2) == pytest.approx(10 / 4 - 1 / 8, rel=1e-15)


def test_unitary_polynomials_converge_at_rate_one():
    a = L.polynomial([0, 1, -1, 1, 1])
    n = [4, 8, 16]
    d = [L.linear_statistic(bulk("gue", N), a) - L.smoothed_prediction(bulk("gue", N), a) for N in n]
    rate = -np.polyfit(np.log(n), np.log(np.abs(d)), 1)[0]
    assert rate >= 1 - 1e-6


def test_smoothed_prediction_validation():
    with pytest.raises(ValueError):
        L.linear_statistic(bulk("gue", 4), L.preset("x2"), chiral=True)


# --- chiral ensembles -------------------------------------------------------

@pytest.mark.parametrize("beta", [1, 2, 4])
def test_chiral_map_roundtrip(beta):
    s = L.chiral_to_laguerre(beta, 6, 1.3)
    assert L.laguerre_to_chiral_a(s) == pytest.approx(1.3, rel=1e-14)
    assert L.BETA[s.name] == beta


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_chiral_second_moment_is_exact(beta):
    for N in (4, 8):
        s = L.chiral_to_laguerre(beta, N, 1.0)
        diff = L.linear_statistic(s, L.preset("x2"), chiral=True) - L.smoothed_prediction(s, L.preset("x2"))
        assert abs(diff) < 1e-10


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_chiral_fourth_moment_gap_is_one_over_n(beta):
    d = []
    for N in (4, 8):
        s = L.chiral_to_laguerre(beta, N, 1.0)
        d.append(L.linear_statistic(s, L.preset("x4"), chiral=True) - L.smoothed_prediction(s, L.preset("x4")))
    assert d[1] / d[0] == pytest.approx(0.5, abs=1e-6)


def test_chiral_density_against_direct_construction():
    X = np.linspace(0.02, 1.3, 60)
    direct = L.chiral_ue_density_direct(6, 1.0, X)
    mapped = L.chiral_density(2, 6, 1.0, X)
    assert np.max(np.abs(direct - mapped)) < 1e-9
    # (1/2) rho_chiral(X) = X rho_L(X^2)
    lag = scaled_density(L.chiral_to_laguerre(2, 6, 1.0), X * X)
    assert np.allclose(0.5 * mapped, X * lag, atol=1e-15)


# --- delta weights ----------------------------------------------------------

def test_airy_edge_integrals_are_one_half():
    r = L.airy_edge_integrals()
    assert r["one_minus_tail"] == pytest.approx(0.5, abs=1e-8)
    assert r["tail"] == pytest.approx(0.5, abs=1e-8)
    assert r["one_minus_tail_spread"] < 1e-10


def test_tail_square_derivative_identity():
    assert L.tail_square_derivative_check(np.linspace(-10, 5, 61)) < 1e-7


def test_richardson_exact_for_polynomial_in_inverse_n():
    n = [8, 16, 32]
    v = [0.7 + 3 / N - 5 / N ** 2 for N in n]
    assert L.richardson(n, v) == pytest.approx(0.7, abs=1e-12)


def test_goe_boundary_weight():
    r = L.delta_weight_extraction("goe", L.preset("x2"), with_airy=False)
    assert r.remainder_limit == pytest.approx(0.25, abs=1e-8)
    assert r.predicted_remainder == pytest.approx(0.25, rel=1e-15)
    assert r.boundary_weight == pytest.approx(0.5, abs=1e-8)
    assert r.predicted_weight == pytest.approx(0.5, rel=1e-15)
    assert r.relative_error < 0.1
    assert r.to_dict()["n_grid"] == [8, 16, 32]


def test_gse_quartic_remainder():
    r = L.delta_weight_extraction("gse", L.preset("x4"), with_airy=False)
    assert r.remainder_limit == pytest.approx(-5 / 32, abs=1e-8)


def test_extraction_validation():
    with pytest.raises(ValueError):
        L.delta_weight_extraction("lue", L.preset("x2"))
    with pytest.raises(ValueError):
        L.delta_weight_extraction("goe", L.preset("x2"), n_grid=(8, 16))
    with pytest.raises(ValueError):
        L.delta_weight_extraction("goe", L.preset("x2"), n_grid=(8, 15, 32))
