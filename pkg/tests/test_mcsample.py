import math

import numpy as np
import pytest

from rmtdensity import mcsample as mc
from rmtdensity.exactdens import EnsembleSpec, raw_moment


def spec(name, N, alpha=0.0, scaling="raw"):
    return EnsembleSpec.from_name(name, N, alpha, scaling)


# --- eigensolver ------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_eigensolver_trace_and_frobenius(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((8, 8))
    A = g + g.T
    lam = mc.hermitian_eigenvalues(A)
    assert lam.sum() == pytest.approx(np.trace(A), abs=1e-10)
    assert (lam ** 2).sum() == pytest.approx(np.sum(A * A), abs=1e-10)
    assert np.all(np.diff(lam) >= 0)


def test_eigensolver_complex_against_numpy():
    rng = np.random.default_rng(11)
    M = mc.sample_matrix("gue", 12, rng)
    assert np.max(np.abs(mc.hermitian_eigenvalues(M) - np.linalg.eigvalsh(M))) < 1e-12


def test_tridiagonal_solver_reports_failure():
    with pytest.raises(mc.ConvergenceError):
        mc.tridiagonal_eigenvalues(np.arange(6.0), np.ones(5), max_iter=0)


# --- entry conventions ------------------------------------------------------

def test_goe_single_entry_mean():
    rng = np.random.default_rng(1)
    v = np.array([mc.sample_matrix("goe", 1, rng)[0, 0] for _ in range(100_000)])
    assert abs(v.mean()) < 0.01


def test_goe_two_by_two_trace_square():
    rng = np.random.default_rng(2)
    v = []
    for _ in range(100_000):
        M = mc.sample_matrix("goe", 2, rng)
        v.append(np.sum(M * M))
    assert np.mean(v) == pytest.approx(3.0, abs=0.05)


def test_lue_square_trace():
    rng = np.random.default_rng(3)
    v = [np.trace(mc.sample_matrix("lue", 2, rng, 0.0)).real for _ in range(100_000)]
    assert np.mean(v) == pytest.approx(4.0, abs=0.05)


@pytest.mark.parametrize("name,alpha", [("gue", 0), ("goe", 0), ("gse", 0), ("lue", 1), ("loe", 1), ("lse", 2)])
@pytest.mark.parametrize("N", [2, 4])
def test_moments_against_exact(name, alpha, N):
    s = spec(name, N, alpha)
    draws = np.array([x.eigenvalues for x in mc.sample_spectra(s, 100 + N, 3000)])
    for k in (1, 2):
        per = np.sum(draws ** k, axis=1)
        se = per.std(ddof=1) / math.sqrt(per.size)
        assert abs(per.mean() - raw_moment(s, k)) < 4 * se + 1e-12


def test_wishart_rows():
    assert mc.wishart_rows("lue", 4, 2.0) == 6
    assert mc.wishart_rows("lse", 4, 2.0) == 5
    with pytest.raises(ValueError):
        mc.wishart_rows("loe", 4, 0.5)
    with pytest.raises(ValueError):
        mc.wishart_rows("lse", 4, 1.0)


# --- samples ----------------------------------------------------------------

def test_reproducible():
    s = spec("gse", 6)
    a = mc.sample_spectrum(s, 42).eigenvalues
    b = mc.sample_spectrum(s, 42).eigenvalues
    assert a.tobytes() == b.tobytes()
    c = [x.eigenvalues.tobytes() for x in mc.sample_spectra(s, 7, 4)]
    d = [x.eigenvalues.tobytes() for x in mc.sample_spectra(s, 7, 4)]
    assert c == d and len(set(c)) == 4


def test_sample_invariants():
    for name, alpha in (("lse", 2.0), ("loe", 1.0), ("gse", 0.0)):
        x = mc.sample_spectrum(spec(name, 6, alpha), 5)
        assert x.eigenvalues.size == 6
        assert np.all(np.diff(x.eigenvalues) >= 0)
        assert x.construction == mc.CONSTRUCTIONS[name]
        if name != "gse":
            assert np.all(x.eigenvalues >= 0)
    with pytest.raises(ValueError):
        mc.sample_spectrum(spec("gue", 600), 1)
    with pytest.raises(ValueError):
        mc.sample_spectrum(spec("gue", 4), -1)


def test_kramers_pairs():
    rng = np.random.default_rng(9)
    M = mc.sample_matrix("gse", 5, rng)
    assert mc.kramers_pairs(np.linalg.eigvalsh(M)).size == 5
    with pytest.raises(mc.ConvergenceError):
        mc.kramers_pairs(np.array([0.0, 0.1, 1.0, 1.0]))


def test_scaled_coordinates():
    s = mc.sample_spectrum(spec("gue", 9, scaling="edge"), 3)
    raw = mc.sample_spectrum(spec("gue", 9), 3).eigenvalues
    assert np.allclose(s.scaled(), (raw / math.sqrt(18) - 1) * 2 * 9 ** (2 / 3), rtol=1e-14)


# --- histograms -------------------------------------------------------------

@pytest.fixture(scope="module")
def gue64():
    return mc.sample_spectra(spec("gue", 64, scaling="bulk"), 2024, 10_000)


def test_semicircle_at_origin(gue64):
    t = mc.empirical_density(gue64, bins=np.linspace(-1.1, 1.1, 24))
    i = np.argmin(np.abs(t.abscissae))
    assert abs(t.abscissae[i]) < 1e-12
    assert abs(t.columns["density"][i] / 64 - 2 / math.pi) < 3 * t.columns["stderr"][i] / 64


def test_support_fraction(gue64):
    X = np.concatenate([s.scaled() for s in gue64])
    assert np.mean(np.abs(X) > 1 + 5 * 64 ** (-2 / 3)) < 0.01


def test_histogram_integral_and_csv():
    samples = mc.sample_spectra(spec("lue", 6, 1.0, "bulk"), 8, 200)
    t = mc.empirical_density(samples, bins=20)
    width = np.diff(np.linspace(t.abscissae[0], t.abscissae[-1], 20))[0]
    assert np.sum(t.columns["density"]) * width == pytest.approx(6, rel=1e-12)
    csv = mc.histogram_csv(t)
    assert csv.splitlines()[0] == "x,count,density,stderr"
    assert len(csv.splitlines()) == 21
    assert np.all(np.isfinite(mc.z_scores(t, 200)))


def test_histogram_validation():
    a = mc.sample_spectra(spec("gue", 4), 1, 3)
    b = mc.sample_spectra(spec("gue", 6), 1, 3)
    with pytest.raises(ValueError):
        mc.empirical_density(a + b)
    with pytest.raises(ValueError):
        mc.empirical_density(a, bins=5)
    with pytest.raises(ValueError):
        mc.empirical_density([])
