"""Monte Carlo spectra from the matrix definitions of the six ensembles.

Entry conventions reproduce the exactdens weights:

    GOE  symmetric, diagonal N[0, 1], off-diagonal N[0, 1/sqrt 2]
    GUE  Hermitian, diagonal N[0, 1/sqrt 2], off-diagonal real/imaginary parts N[0, 1/2]
    GSE  quaternion self-dual, diagonal N[0, 1/sqrt 2], off-diagonal components N[0, 1/2],
         handled as a 2N x 2N complex Hermitian matrix
    LOE  A^T A, A real n x N with N[0, 1] entries, alpha = n - N
    LUE  A^H A, A complex n x N with E|A_ij|^2 = 1, alpha = n - N
    LSE  A^H A, A quaternion n x N with components N[0, 1/sqrt 2], alpha = 2 (n - N)

Eigenvalues come from a Householder reduction to tridiagonal form followed by
the implicit-shift QL iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exactdens import DensityTable, EnsembleSpec, scaled_density, scaling_constants
from .specfun import ConvergenceError, integrate

CONSTRUCTIONS = {"goe": "dense_real", "gue": "dense_complex", "gse": "dense_quaternion_as_2x2",
                 "loe": "wishart", "lue": "wishart", "lse": "wishart"}
MAX_N = 512
PAIR_TOL = 1e-8
CLAMP_TOL = 1e-10
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# eigensolver
# ---------------------------------------------------------------------------

def householder_tridiagonal(A: np.ndarray):
    """Diagonal and off-diagonal magnitudes of a unitarily similar tridiagonal matrix.

    Works for real symmetric and complex Hermitian input.  The complex
    off-diagonal entries are replaced by their moduli, which is a diagonal
    unitary similarity.
    """
    A = np.array(A, dtype=complex if np.iscomplexobj(A) else float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    off = np.zeros(max(n - 1, 0))
    for k in range(n - 2):
        x = A[k + 1:, k]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            off[k] = 0.0
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        alpha = -phase * norm
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        sub = A[k + 1:, k + 1:]
        p = sub @ v
        K = np.vdot(v, p).real
        w = p - K * v
        sub -= 2 * (np.outer(v, w.conj()) + np.outer(w, v.conj()))
        A[k + 1:, k + 1:] = sub
        off[k] = abs(alpha)
    if n >= 2:
        off[n - 2] = abs(A[n - 1, n - 2])
    diag = np.real(np.diag(A)).astype(float)
    return diag, off


def tridiagonal_eigenvalues(diag, off, max_iter: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL, sorted."""
    d = [float(v) for v in diag]
    n = len(d)
    e = [float(v) for v in off] + [0.0]
    if len(e) != n:
        raise ValueError("off-diagonal must have length n - 1")
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise ConvergenceError(
                    f"QL iteration stalled at index {l} after {it} sweeps; "
                    f"|e| = {abs(e[l]):.3g}, d = {d[l]:.6g}")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(np.array(d))


def hermitian_eigenvalues(A) -> np.ndarray:
    return tridiagonal_eigenvalues(*householder_tridiagonal(A))


# ---------------------------------------------------------------------------
# matrix constructions
# ---------------------------------------------------------------------------

def _quaternion_block(a, b, c, d):
    """2x2 complex blocks of a + b i + c j + d k, entrywise over arrays."""
    n, m = a.shape
    out = np.empty((2 * n, 2 * m), dtype=complex)
    out[0::2, 0::2] = a + 1j * b
    out[0::2, 1::2] = c + 1j * d
    out[1::2, 0::2] = -c + 1j * d
    out[1::2, 1::2] = a - 1j * b
    return out


def wishart_rows(name: str, N: int, alpha: float) -> int:
    """Row count n of the Wishart factor for a given alpha."""
    extra = alpha / 2 if name == "lse" else alpha
    n = N + extra
    if abs(n - round(n)) > 1e-12 or extra < 0:
        step = "an even non-negative integer" if name == "lse" else "a non-negative integer"
        raise ValueError(f"{name} sampling needs alpha {step} (got {alpha})")
    return int(round(n))


def sample_matrix(name: str, N: int, rng: np.random.Generator, alpha: float = 0.0) -> np.ndarray:
    """One draw of the matrix (2N x 2N complex for the quaternion cases)."""
    name = name.lower()
    if name == "goe":
        g = rng.standard_normal((N, N))
        return (g + g.T) / 2.0
    if name == "gue":
        g = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        return (g + g.conj().T) / (2.0 * math.sqrt(2.0))
    if name == "gse":
        a, b, c, d = (rng.standard_normal((N, N)) for _ in range(4))
        q = _quaternion_block(a, b, c, d)
        return (q + q.conj().T) / (2.0 * math.sqrt(2.0))
    n = wishart_rows(name, N, alpha)
    if name == "loe":
        A = rng.standard_normal((n, N))
        return A.T @ A
    if name == "lue":
        A = (rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))) / math.sqrt(2.0)
        return A.conj().T @ A
    if name == "lse":
        a, b, c, d = (rng.standard_normal((n, N)) / math.sqrt(2.0) for _ in range(4))
        A = _quaternion_block(a, b, c, d)
        return A.conj().T @ A
    raise ValueError(f"unknown ensemble {name!r}")


def kramers_pairs(eigs: np.ndarray, tol: float = PAIR_TOL) -> np.ndarray:
    """Collapse the doubly degenerate spectrum of a quaternion matrix."""
    eigs = np.sort(eigs)
    lo, hi = eigs[0::2], eigs[1::2]
    scale = max(1.0, float(np.max(np.abs(eigs))))
    gap = np.max(np.abs(hi - lo)) if lo.size else 0.0
    if gap > tol * scale:
        raise ConvergenceError(f"Kramers pairs differ by {gap:.3g} (tolerance {tol * scale:.3g})")
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SpectrumSample:
    spec: EnsembleSpec
    eigenvalues: np.ndarray
    seed: int
    construction: str

    def scaled(self) -> np.ndarray:
        """Eigenvalues in the coordinates named by spec.scaling."""
        sc = scaling_constants(self.spec)
        if self.spec.scaling == "raw":
            return self.eigenvalues
        X = self.eigenvalues / sc.bulk_jacobian
        if self.spec.scaling == "bulk":
            return X
        return (X - 1.0) * sc.edge_scale


def _spectrum(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    M = sample_matrix(spec.name, spec.N, rng, spec.alpha)
    eigs = hermitian_eigenvalues(M)
    if spec.beta == 4:
        eigs = kramers_pairs(eigs)
    if spec.family == "laguerre":
        if eigs[0] < -CLAMP_TOL * max(1.0, eigs[-1]):
            raise ConvergenceError(f"Wishart eigenvalue {eigs[0]:.3g} is negative beyond roundoff")
        eigs = np.maximum(eigs, 0.0)
    return eigs


def _check(spec: EnsembleSpec):
    if spec.N > MAX_N:
        raise ValueError(f"sampling is limited to N <= {MAX_N}")


def sample_spectrum(spec: EnsembleSpec, seed: int) -> SpectrumSample:
    """Eigenvalues (raw coordinates) of one matrix drawn with the given seed."""
    _check(spec)
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    rng = np.random.default_rng(seed)
    return SpectrumSample(spec, _spectrum(spec, rng), seed, CONSTRUCTIONS[spec.name])


def sample_spectra(spec: EnsembleSpec, seed: int, samples: int) -> list:
    """Independent draws, each with its own child seed of ``seed``."""
    _check(spec)
    children = np.random.SeedSequence(int(seed)).spawn(samples)
    out = []
    for ss in children:
        rng = np.random.default_rng(ss)
        out.append(SpectrumSample(spec, _spectrum(spec, rng), int(seed), CONSTRUCTIONS[spec.name]))
    return out


# ---------------------------------------------------------------------------
# histograms
# ---------------------------------------------------------------------------

def empirical_density(samples, bins=40, range_=None) -> DensityTable:
    """Histogram density normalised to integrate to N, in the spectra's scaled coordinates.

    Columns: count (total over samples), density, stderr (from the spread of
    the per-sample counts, which carries the correlation of eigenvalues within
    one matrix).  ``exact`` holds the bin average of the exact density.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("no samples")
    spec = samples[0].spec
    if any(s.spec != spec for s in samples):
        raise ValueError("all samples must share one ensemble spec")
    data = np.array([s.scaled() for s in samples])
    if np.ndim(bins) == 0:
        if int(bins) < 10:
            raise ValueError("need at least 10 bins")
        lo, hi = range_ if range_ is not None else (float(data.min()), float(data.max()))
        edges = np.linspace(lo, hi, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges.size < 11:
            raise ValueError("need at least 10 bins")
    per = np.array([np.histogram(row, edges)[0] for row in data], dtype=float)
    S = per.shape[0]
    width = np.diff(edges)
    count = per.sum(axis=0)
    dens = count / (S * width)
    sd = per.std(axis=0, ddof=1) if S > 1 else np.zeros_like(count)
    stderr = sd / math.sqrt(S) / width
    exact = np.array([integrate(lambda x: np.asarray(scaled_density(spec, x)), a, b) / (b - a)
                      for a, b in zip(edges[:-1], edges[1:])])
    centres = 0.5 * (edges[:-1] + edges[1:])
    return DensityTable(spec, centres, exact, {"count": count, "density": dens, "stderr": stderr})


def histogram_csv(table: DensityTable) -> str:
    """CSV with columns x,count,density,stderr."""
    rows = ["x,count,density,stderr"]
    for x, c, d, s in zip(table.abscissae, table.columns["count"], table.columns["density"],
                          table.columns["stderr"]):
        rows.append(",".join(format(float(v), ".17g") for v in (x, c, d, s)))
    return "\n".join(rows) + "\n"


def z_scores(table: DensityTable, samples: int) -> np.ndarray:
    """|empirical - exact| in standard errors.

    Where a bin saw too few eigenvalues for its own spread to be meaningful,
    the Poisson error of the exact expectation is used as a floor.
    """
    width = np.gradient(table.abscissae) if table.abscissae.size > 1 else np.ones(1)
    poisson = np.sqrt(np.maximum(table.exact, 0.0) / (samples * width))
    se = np.maximum(table.columns["stderr"], poisson)
    diff = np.abs(table.columns["density"] - table.exact)
    return np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff > 0, np.inf, 0.0))
