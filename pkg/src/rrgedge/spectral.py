"""Normalized adjacency matrix, projected Green's function and extreme eigenvalues.

Everything here lives on the orthogonal complement of the constant vector.
The projection is made exact by working in an explicit orthonormal basis of
1-perp (a Householder reflection that maps e_1 onto 1/sqrt(N)), so the
trivial eigenvalue d/sqrt(d-1) is removed even when the graph is disconnected
and that eigenvalue is degenerate.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.linalg import eigh_tridiagonal

from ._rng import as_generator
from .errors import DegreeTooSmall, InvalidParams, NoConvergence
from .graphs import RegularGraph

DENSE_MAX_N = 2048
DENSE_EXTREMES_MAX_N = 64
DEFAULT_K = 10.0


@dataclass(frozen=True)
class SpectralParameter:
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not z.imag > 0:
            raise InvalidParams(f"spectral parameter needs Im z > 0, got {z}")
        object.__setattr__(self, "z", z)

    @property
    def E(self) -> float:
        return self.z.real

    @property
    def eta(self) -> float:
        return self.z.imag


def _as_z(z) -> complex:
    if isinstance(z, SpectralParameter):
        return z.z
    return SpectralParameter(z).z


def normalized_matrix(g: RegularGraph) -> np.ndarray:
    """H = A / sqrt(d - 1) as a dense array."""
    if g.d < 2:
        raise DegreeTooSmall("normalization by sqrt(d-1) needs d >= 2")
    return g.adjacency(np.float64) / math.sqrt(g.d - 1)


def normalized_sparse(g: RegularGraph) -> sparse.csr_matrix:
    if g.d < 2:
        raise DegreeTooSmall("normalization by sqrt(d-1) needs d >= 2")
    return g.sparse_adjacency() / math.sqrt(g.d - 1)


def trivial_eigenvalue(d: int) -> float:
    return d / math.sqrt(d - 1)


def projector(n: int) -> np.ndarray:
    return np.eye(n) - np.full((n, n), 1.0 / n)


class _Householder:
    """R = I - 2 v v^T / (v^T v) with R e_1 = 1/sqrt(n); R[:, 1:] spans 1-perp."""

    def __init__(self, n: int):
        self.n = n
        v = np.full(n, -1.0 / math.sqrt(n))
        v[0] += 1.0
        self.v = v
        self.c = float(v @ v)

    def conjugate(self, h: np.ndarray) -> np.ndarray:
        """(R h R)[1:, 1:] for symmetric h."""
        v, c = self.v, self.c
        hv = h @ v
        vhv = float(v @ hv)
        r = h - (2.0 / c) * (np.outer(v, hv) + np.outer(hv, v)) + (4.0 * vhv / c**2) * np.outer(v, v)
        r = r[1:, 1:]
        return 0.5 * (r + r.T)

    def lift(self, y: np.ndarray) -> np.ndarray:
        """R[:, 1:] @ y for y with n-1 rows."""
        v, c = self.v, self.c
        out = np.zeros((self.n,) + y.shape[1:], dtype=y.dtype)
        out[1:] = y
        out -= (2.0 / c) * np.multiply.outer(v, v[1:] @ y)
        return out


class SpectralDecomposition:
    """Eigen-decomposition of a symmetric matrix restricted to 1-perp.

    Reused across many spectral parameters: after one O(N^3) diagonalization
    each Green's function costs one matrix product.
    """

    def __init__(self, h: np.ndarray, with_vectors: bool = True):
        h = np.asarray(h, dtype=np.float64)
        self.n = h.shape[0]
        hh = _Householder(self.n)
        reduced = hh.conjugate(h)
        if with_vectors:
            lam, vecs = np.linalg.eigh(reduced)
            self.vectors = hh.lift(vecs)
        else:
            lam = np.linalg.eigvalsh(reduced)
            self.vectors = None
        order = np.argsort(lam)[::-1]
        self.eigenvalues = lam[order]
        if self.vectors is not None:
            self.vectors = self.vectors[:, order]

    def green(self, z: complex) -> np.ndarray:
        if self.vectors is None:
            raise InvalidParams("decomposition was built without eigenvectors")
        u = self.vectors
        return (u * (1.0 / (self.eigenvalues - z))) @ u.T

    def stieltjes(self, z: complex) -> complex:
        return complex(np.sum(1.0 / (self.eigenvalues - z)) / self.n)


@lru_cache(maxsize=8)
def _decomposition(g: RegularGraph) -> SpectralDecomposition:
    return SpectralDecomposition(normalized_matrix(g))


@dataclass(frozen=True, eq=False)
class GreensFunction:
    """Projected resolvent P(H - z)^{-1}P with its spectral parameter."""

    z: complex
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def eta(self) -> float:
        return self.z.imag

    def stieltjes(self) -> complex:
        return complex(np.trace(self.entries) / self.n)

    def with_entry(self, i: int, j: int, value: complex) -> "GreensFunction":
        e = self.entries.copy()
        e[i, j] = value
        return GreensFunction(self.z, e)


def green_function(g: RegularGraph, z, method: str = "auto") -> GreensFunction:
    """G(z) = P(H - z)^{-1}P.

    ``method``: ``"spectral"`` reuses a cached diagonalization (default for
    N <= 2048), ``"solve"`` does one dense complex linear solve.
    """
    z = _as_z(z)
    if method == "auto":
        method = "spectral" if g.n <= DENSE_MAX_N else "solve"
    if method == "spectral":
        return GreensFunction(z, _decomposition(g).green(z))
    if method == "solve":
        h = normalized_matrix(g)
        p = projector(g.n)
        x = np.linalg.solve(h - z * np.eye(g.n), p.astype(complex))
        return GreensFunction(z, p @ x)
    raise InvalidParams(f"unknown method {method!r}")


def stieltjes(g: RegularGraph, z) -> complex:
    """m(z) = (1/N) sum over nontrivial eigenvalues of 1/(lambda - z)."""
    return _decomposition(g).stieltjes(_as_z(z))


def ghexp_residual(g: RegularGraph, G: GreensFunction) -> float:
    """max-norm of G H - (z G + P), and of H G - (z G + P)."""
    h = normalized_matrix(g)
    target = G.z * G.entries + projector(g.n)
    return float(max(np.abs(G.entries @ h - target).max(), np.abs(h @ G.entries - target).max()))


def row_sum_residual(G: GreensFunction) -> float:
    e = G.entries
    return float(max(np.abs(e.sum(axis=0)).max(), np.abs(e.sum(axis=1)).max()))


def ward_residual(G: GreensFunction) -> float:
    """Largest violation of the Ward identity, row-wise and averaged.

    Row form: (1/N) sum_j |G_ij|^2 = Im G_ii / (N eta).
    Averaged form, at the same 1/N scale: (1/N^2) sum_ij |G_ij|^2 = Im m / (N eta).
    """
    e = G.entries
    n, eta = G.n, G.eta
    sq = np.abs(e) ** 2
    rows = sq.sum(axis=1) / n - e.diagonal().imag / (n * eta)
    avg = sq.sum() / n**2 - G.stieltjes().imag / (n * eta)
    return float(max(np.abs(rows).max(), abs(avg)))


# ---------------------------------------------------------------- eigenvalues


@dataclass(frozen=True, eq=False)
class SpectrumSummary:
    """Nontrivial spectrum of H.

    ``top`` holds lambda_2 >= lambda_3 >= ..., ``bottom`` holds
    lambda_N <= lambda_{N-1} <= ...; ``full`` is the whole nontrivial spectrum
    in decreasing order when it was computed.
    """

    n: int
    d: int
    top: np.ndarray
    bottom: np.ndarray
    full: np.ndarray | None = None
    iterations: int = 0

    @property
    def trivial(self) -> float:
        return trivial_eigenvalue(self.d)

    @property
    def lambda2(self) -> float:
        return float(self.top[0])

    @property
    def lambdaN(self) -> float:
        return float(self.bottom[0])

    def to_csv(self) -> str:
        """'k,lambda' rows, 1-indexed, starting with the trivial eigenvalue."""
        if self.full is None:
            raise InvalidParams("full spectrum not available")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "lambda"])
        w.writerow([1, repr(self.trivial)])
        for k, lam in enumerate(self.full, start=2):
            w.writerow([k, repr(float(lam))])
        return buf.getvalue()


def full_spectrum(g: RegularGraph) -> SpectrumSummary:
    lam = SpectralDecomposition(normalized_matrix(g), with_vectors=False).eigenvalues
    return SpectrumSummary(g.n, g.d, lam.copy(), lam[::-1].copy(), full=lam)


def lanczos_extremes(
    matvec,
    n: int,
    k: int,
    *,
    deflate: np.ndarray | None = None,
    seed=None,
    tol: float = 1e-8,
    max_iter: int = 1000,
    check_every: int = 8,
):
    """Lanczos with full reorthogonalization for the k largest and k smallest eigenvalues.

    All Lanczos vectors are kept orthogonal to the (orthonormal) rows of ``deflate``.
    Returns (top, bottom, iterations).  Converged when the residual norm
    |beta_j s_j| of each wanted Ritz pair is below ``tol``.
    """
    rng = as_generator(seed)
    basis = np.zeros((0, n)) if deflate is None else np.atleast_2d(np.asarray(deflate, float))
    dim = n - basis.shape[0]
    max_iter = min(max_iter, dim)

    def orth(x, qs):
        for _ in range(2):
            if basis.shape[0]:
                x = x - basis.T @ (basis @ x)
            if qs.shape[0]:
                x = x - qs.T @ (qs @ x)
        return x

    q = orth(rng.standard_normal(n), np.zeros((0, n)))
    q /= np.linalg.norm(q)
    Q = np.empty((max_iter, n))
    alpha = np.empty(max_iter)
    beta = np.empty(max_iter)
    for j in range(max_iter):
        Q[j] = q
        w = matvec(q)
        alpha[j] = q @ w
        w = orth(w, Q[: j + 1])
        beta[j] = np.linalg.norm(w)
        m = j + 1
        scale = max(abs(alpha[: m]).max(), beta[: m].max(), 1.0)
        breakdown = beta[j] <= 1e-12 * scale
        if breakdown or m == max_iter or (m >= 2 * k + 2 and m % check_every == 0):
            theta, s = eigh_tridiagonal(alpha[:m], beta[: m - 1]) if m > 1 else (alpha[:1], np.ones((1, 1)))
            if breakdown or m == dim:
                kk = min(k, m)
                return theta[::-1][:kk].copy(), theta[:kk].copy(), m
            res = np.abs(beta[j] * s[-1, :])
            kk = min(k, m)
            if np.all(res[:kk] <= tol) and np.all(res[-kk:] <= tol):
                return theta[::-1][:kk].copy(), theta[:kk].copy(), m
        if beta[j] == 0:
            break
        q = w / beta[j]
    raise NoConvergence(f"Lanczos did not converge in {max_iter} iterations")


def extreme_eigenvalues(
    g: RegularGraph,
    k: int = 1,
    *,
    seed=None,
    tol: float = 1e-8,
    max_iter: int = 1000,
    method: str = "auto",
) -> SpectrumSummary:
    """Top-k and bottom-k nontrivial eigenvalues of H.

    ``method``: ``"lanczos"``, ``"dense"``, or ``"auto"`` (dense for tiny N,
    where eigenvalue multiplicities defeat single-vector Lanczos).
    """
    if k < 1:
        raise InvalidParams("k must be >= 1")
    if method == "auto":
        method = "dense" if g.n <= DENSE_EXTREMES_MAX_N else "lanczos"
    if method == "dense":
        s = full_spectrum(g)
        return SpectrumSummary(g.n, g.d, s.top[:k].copy(), s.bottom[:k].copy())
    if method != "lanczos":
        raise InvalidParams(f"unknown method {method!r}")
    h = normalized_sparse(g)
    ones = np.full(g.n, 1.0 / math.sqrt(g.n))
    top, bottom, it = lanczos_extremes(
        h.dot, g.n, k, deflate=ones[None, :], seed=seed, tol=tol, max_iter=max_iter
    )
    return SpectrumSummary(g.n, g.d, top, bottom, iterations=it)


# ---------------------------------------------------------------- control parameters


@dataclass(frozen=True)
class ControlParams:
    lambda_o: float
    lambda_d: float
    in_domain: bool


def control_params(z, n: int, d: int, K: float = DEFAULT_K) -> ControlParams:
    """Deterministic error scales and membership of z in the spectral domain."""
    z = _as_z(z)
    if K <= 0:
        raise InvalidParams("K must be positive")
    E, eta = z.real, z.imag
    lo = 1.0 / math.sqrt(n * eta) + 1.0 / math.sqrt(d) + d**1.5 / n
    kappa = min(abs(E - 2), abs(E + 2))
    inside = -K <= E <= K and 0 < eta <= K and n * eta * math.sqrt(kappa + eta) >= n ** (1.0 / K)
    return ControlParams(lo, math.sqrt(lo), bool(inside))
