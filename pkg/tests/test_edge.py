from fractions import Fraction

import numpy as np
import pytest

from rmtdensity import edge
from rmtdensity.exactdens import EnsembleSpec, scaled_density
from rmtdensity.specfun import airy_ai, airy_ai_prime, airy_tail

AI0 = 0.3550280538878172
AIP0 = -0.2588194037928068


def residual(name, xi, N, alpha=0.0, form="paper"):
    exact = scaled_density(EnsembleSpec.from_name(name, N, alpha, "edge"), xi)
    return abs(exact - edge.edge_expansion(name, xi, N, alpha, form=form).total)


# --- structure --------------------------------------------------------------

def test_total_and_orders():
    ev = edge.edge_lue(np.linspace(-3, 3, 7), 10, 0.5)
    assert np.allclose(ev.total, sum(t.value for t in ev.terms), atol=1e-14)
    assert ev.orders == (0, Fraction(1, 3), Fraction(2, 3), 1)
    for name in ("gue", "goe", "gse", "lue", "loe", "lse"):
        orders = edge.edge_expansion(name, 0.3, 8, 0.5).orders
        assert set(orders) <= {0, Fraction(1, 3), Fraction(2, 3), 1}
    assert edge.edge_gue(0.0, 8, form="corrected").orders == (0, Fraction(2, 3))
    with pytest.raises(ValueError):
        edge.edge_gue(0.0, 8, form="other")
    with pytest.raises(ValueError):
        edge.edge_goe(0.0, 9)


def test_normalized_flag():
    N, xi = 12, -0.7
    sc_spec = EnsembleSpec.from_name("lse", N, 0.5, "edge")
    a = edge.edge_lse(xi, N, 0.5).total
    b = edge.edge_lse(xi, N, 0.5, normalized=False).total
    from rmtdensity.exactdens import scaling_constants
    sc = scaling_constants(sc_spec)
    assert b == pytest.approx(a / (sc.edge_prefactor * sc.bulk_jacobian), rel=1e-14)


# --- GUE / LUE --------------------------------------------------------------

def test_gue_examples():
    ev = edge.edge_gue(0.0, 10)
    assert ev.term(0) == pytest.approx(AIP0 ** 2, rel=1e-14)
    assert ev.term(0) == pytest.approx(0.0669875, abs=5e-8)
    # -(1/20)(-3 Ai Ai') at xi = 0
    assert ev.term(Fraction(2, 3)) * 10 ** (2 / 3) == pytest.approx(3 / 20 * AI0 * AIP0, rel=1e-13)


def test_gue_residuals():
    paper = [residual("gue", -1.0, N) for N in (8, 32)]
    corrected = [residual("gue", -1.0, N, form="corrected") for N in (8, 32)]
    # the printed O(1/N) term leaves an O(1/N) remainder; without it the
    # remainder falls like N^(-4/3)
    assert 3 <= paper[0] / paper[1] <= 5
    assert corrected[0] / corrected[1] > 4 ** 1.2
    assert corrected[1] < paper[1]


def test_lue_alpha_zero_terms_vanish():
    ev = edge.edge_lue(np.linspace(-4, 2, 13), 16, 0.0)
    assert np.all(ev.term(Fraction(1, 3)) == 0)
    assert np.all(ev.term(1) == 0)


def test_lue_two_thirds_coefficient():
    # at xi = 0 only the (2 - 5 alpha^2) Ai Ai' piece survives
    N = 27
    ev = edge.edge_lue(0.0, N, 1.0)
    assert ev.term(Fraction(2, 3)) * N ** (2 / 3) == pytest.approx(-3 * 2 ** (1 / 3) / 10 * AI0 * AIP0, rel=1e-13)


def test_lue_residual():
    N = 16
    assert residual("lue", 0.5, N, 0.5) < N ** (-4 / 3)


# --- beta = 1, 4 ------------------------------------------------------------

def test_goe_leading_value():
    v = edge.edge_goe(0.0, 8).term(0)
    assert v == pytest.approx(AIP0 ** 2 + 0.5 * AI0 * (1 - 1 / 3), rel=1e-12)
    assert v == pytest.approx(0.18533, abs=1e-5)


def test_gse_leading_value():
    v = edge.edge_gse(0.0, 8).term(0)
    assert v == pytest.approx(AIP0 ** 2 - AI0 / 6, rel=1e-12)
    assert v == pytest.approx(0.0078162, abs=1e-7)


def test_gse_paper_correction_positive():
    xi = np.linspace(-10, 5, 301)
    assert np.all(edge.edge_gse(xi, 8).term(Fraction(1, 3)) >= 0)


def test_corrected_forms_are_the_stated_combinations():
    xi = np.array([-3.0, -0.4, 1.2])
    ai, aip, t = airy_ai(xi), airy_ai_prime(xi), airy_tail(xi)
    N = 10
    goe = edge.edge_goe(xi, N, form="corrected").term(Fraction(1, 3))
    assert np.allclose(goe, (aip * (1 - t) - ai ** 2) / (4 * N ** (1 / 3)), atol=1e-15)
    gse = edge.edge_gse(xi, N, form="corrected").term(Fraction(1, 3))
    assert np.allclose(gse, (ai ** 2 + aip * t) / (4 * (2 * N) ** (1 / 3)), atol=1e-15)


@pytest.mark.parametrize("name,N,alpha,xi", [
    ("goe", 16, 0.0, -1.0),
    ("gse", 12, 0.0, 0.0),
    ("loe", 16, 0.5, -0.5),
])
def test_beta_one_four_residuals(name, N, alpha, xi):
    assert residual(name, xi, N, alpha) < N ** (-2 / 3)


def test_corrected_gaussian_forms_beat_printed():
    for name, N, xi in (("goe", 16, -1.0), ("gse", 12, 0.0)):
        assert residual(name, xi, N, form="corrected") < residual(name, xi, N)


def test_loe_alpha_one_and_structure():
    xi = np.linspace(-5, 3, 17)
    ev = edge.edge_loe(xi, 8, 1.0)
    assert np.all(ev.term(Fraction(1, 3)) == 0)
    assert np.array_equal(ev.term(0), edge.edge_goe(xi, 8).term(0))


def test_lse_examples():
    assert edge.edge_lse(0.0, 5, 0.5).term(0) == pytest.approx(edge.edge_gse(0.0, 5).term(0), rel=1e-15)
    N, xi = 7, 0.6
    ai, aip, t = airy_ai(xi), airy_ai_prime(xi), airy_tail(xi)
    assert edge.edge_lse(xi, N, 0.0).term(Fraction(1, 3)) == pytest.approx(
        (ai ** 2 + aip * t) / (2 * (4 * N) ** (1 / 3)), rel=1e-14)
    assert edge.edge_lse(xi, N, -1.0).term(Fraction(1, 3)) == 0.0


# --- invariants -------------------------------------------------------------

@pytest.mark.parametrize("name", ["gue", "goe", "gse", "lue", "loe", "lse"])
def test_leading_profiles_nonnegative(name):
    xi = np.linspace(-10, 5, 1501)
    assert np.min(edge.edge_expansion(name, xi, 8, 0.5).term(0)) >= 0


@pytest.mark.parametrize("name", ["gue", "gse", "lue", "lse"])
def test_decay_beyond_edge(name):
    for t in edge.edge_expansion(name, 8.0, 16, 0.5).terms:
        assert abs(t.value) < 1e-10


@pytest.mark.parametrize("name", ["goe", "loe"])
def test_decay_beyond_edge_beta_one(name):
    # these carry Ai(1 - T)/2, so Ai(8) ~ 5e-8 sets the scale
    for t in edge.edge_expansion(name, 8.0, 16, 0.5).terms:
        assert abs(t.value) < airy_ai(8.0)
    assert abs(edge.edge_goe(12.0, 16).total) < 1e-12


def test_kernel_derivative_identity():
    h = 1e-5
    for xi in (-6.0, -1.3, 0.0, 2.5):
        d = (edge.airy_kernel_diagonal(xi + h) - edge.airy_kernel_diagonal(xi - h)) / (2 * h)
        assert d == pytest.approx(-airy_ai(xi) ** 2, abs=1e-6)


def test_goe_minus_gue_structure():
    xi = np.linspace(-8, 4, 49)
    diff = edge.edge_goe(xi, 8).term(0) - edge.edge_gue(xi, 8).term(0)
    assert np.max(np.abs(diff - 0.5 * airy_ai(xi) * (1 - airy_tail(xi)))) < 1e-14


def test_residual_exponent_helper():
    p, res = edge.edge_residual_exponent("gue", -1.0, (8, 16, 32), form="corrected")
    assert p > 1.2 and len(res) == 3
