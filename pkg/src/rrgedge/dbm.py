"""Constrained GOE, the interpolation H(t) and Gaussian integration-by-parts checks.

The constrained GOE is P X P with X a GOE matrix (off-diagonal variance 1/N,
diagonal variance 2/N) and P the projection onto 1-perp, so that

    E[W_ij W_kl] = (1/N) [P_ik P_jl + P_il P_jk],   P_ab = delta_ab - 1/N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator
from .errors import InvalidParams, ShapeMismatch

COV_PATTERNS = {
    # name: (i, j, k, l) with distinct letters meaning distinct indices
    "ii,ii": (0, 0, 0, 0),
    "ij,ij": (0, 1, 0, 1),
    "ij,ji": (0, 1, 1, 0),
    "ij,ik": (0, 1, 0, 2),
    "ij,kl": (0, 1, 2, 3),
    "ii,jj": (0, 0, 1, 1),
}


@dataclass(frozen=True, eq=False)
class ConstrainedGOE:
    n: int
    entries: np.ndarray


@dataclass(frozen=True, eq=False)
class InterpolatedMatrix:
    t: float
    matrix: np.ndarray


def _project(x: np.ndarray) -> np.ndarray:
    """P X P for a stack of matrices (last two axes), via row/column centering."""
    x = x - x.mean(axis=-1, keepdims=True)
    return x - x.mean(axis=-2, keepdims=True)


def goe_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """`size` GOE matrices with E X_ij^2 = (1 + delta_ij)/N."""
    g = rng.standard_normal((size, n, n))
    return (g + np.swapaxes(g, -1, -2)) / math.sqrt(2 * n)


def constrained_goe_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    w = _project(goe_batch(n, size, rng))
    return 0.5 * (w + np.swapaxes(w, -1, -2))


def sample_constrained_goe(n: int, seed=None) -> ConstrainedGOE:
    if n < 2:
        raise InvalidParams("n must be >= 2")
    w = constrained_goe_batch(n, 1, as_generator(seed))[0]
    return ConstrainedGOE(n, w)


def covariance(n: int, i: int, j: int, k: int, l: int) -> float:  # noqa: E741
    """Exact E[W_ij W_kl]."""
    def p(a, b):
        return (a == b) - 1.0 / n

    return (p(i, k) * p(j, l) + p(i, l) * p(j, k)) / n


def covariance_check(n: int, samples: int, seed=None, chunk: int = 10_000) -> dict[str, dict]:
    """Empirical vs exact covariance for each index pattern, with z-scores.

    Moments are accumulated per chunk and combined pairwise.
    """
    rng = as_generator(seed)
    keys = list(COV_PATTERNS)
    idx = np.array([COV_PATTERNS[k] for k in keys])
    prods = []
    left = samples
    while left > 0:
        m = min(chunk, left)
        w = constrained_goe_batch(n, m, rng)
        prods.append(w[:, idx[:, 0], idx[:, 1]] * w[:, idx[:, 2], idx[:, 3]])
        left -= m
    allp = np.concatenate(prods)
    out = {}
    for c, key in enumerate(keys):
        x = allp[:, c]
        mean = _pairwise_mean(x)
        se = x.std(ddof=1) / math.sqrt(len(x))
        exact = covariance(n, *idx[c])
        out[key] = {"empirical": mean, "exact": exact, "se": se, "z": (mean - exact) / se}
    return out


def _pairwise_mean(x: np.ndarray) -> float:
    # numpy's sum is pairwise along a contiguous axis
    return float(np.sum(np.ascontiguousarray(x)) / len(x))


def interpolate(h: np.ndarray, w: ConstrainedGOE | np.ndarray, t: float) -> InterpolatedMatrix:
    """H(t) = e^{-t/2} H + sqrt(1 - e^{-t}) W."""
    wm = w.entries if isinstance(w, ConstrainedGOE) else np.asarray(w)
    h = np.asarray(h)
    if h.shape != wm.shape:
        raise ShapeMismatch(f"{h.shape} vs {wm.shape}")
    if t == 0:
        return InterpolatedMatrix(0.0, h.copy())
    return InterpolatedMatrix(float(t), math.exp(-t / 2) * h + math.sqrt(-math.expm1(-t)) * wm)


# ---------------------------------------------------------------- integration by parts


def xi_direction_sum(n: int, i: int, j: int) -> np.ndarray:
    """sum over k, l of the switching matrices Delta_ij + Delta_kl - Delta_ik - Delta_jl."""
    s = np.zeros((n, n))
    for k in range(n):
        for l in range(n):  # noqa: E741
            for (a, b), sign in (((i, j), 1), ((k, l), 1), ((i, k), -1), ((j, l), -1)):
                s[a, b] += sign
                s[b, a] += sign
    return s


def _test_function(name: str, p: int, q: int):
    """F(W) and its directional derivative dF(W)[V] for a batch of W."""
    if name == "constant":
        return (lambda w: np.ones(len(w)), lambda w, v: np.zeros(len(w)))
    if name == "linear":
        return (lambda w: w[:, p, q], lambda w, v: np.full(len(w), v[p, q]))
    if name == "quadratic":
        return (
            lambda w: np.einsum("bk,bk->b", w[:, p, :], w[:, :, q]),
            lambda w, v: w[:, p, :] @ v[:, q] + v[p, :] @ w[:, :, q].T,
        )
    if name == "cubic":
        def f(w):
            return np.einsum("bk,bkl,bl->b", w[:, p, :], w, w[:, :, q])

        def df(w, v):
            wv = w @ v
            return (np.einsum("k,bkl,bl->b", v[p, :], w, w[:, :, q])
                    + np.einsum("bk,bk->b", wv[:, p, :], w[:, :, q])
                    + np.einsum("bk,bkl,l->b", w[:, p, :], w, v[:, q]))
        return f, df
    raise InvalidParams(f"unknown test function {name!r}")


@dataclass(frozen=True)
class IbpResult:
    lhs: float
    rhs: float
    se: float
    residual: float  # |lhs - rhs| in standard errors


def ibp_check(
    n: int,
    samples: int,
    seed=None,
    F: str = "quadratic",
    ij: tuple[int, int] = (0, 1),
    pq: tuple[int, int] = (0, 1),
    chunk: int = 20_000,
    antithetic: bool = False,
) -> IbpResult:
    """Monte Carlo test of E[W_ij F(W)] = N^{-3} sum_kl E[d_ij^kl F(W)].

    The derivative along each switching direction is taken analytically and
    the sum over (k, l) is carried out on the direction matrices.  Both sides
    come from the same sample stream; the residual uses the standard error of
    the per-sample difference.  With ``antithetic`` every draw W is paired
    with -W (same law), which makes odd moments vanish exactly.
    """
    rng = as_generator(seed)
    i, j = ij
    f, df = _test_function(F, *pq)
    v = xi_direction_sum(n, i, j) / n**3
    lhs_all, rhs_all = [], []
    left = samples
    while left > 0:
        m = min(chunk, left)
        w = constrained_goe_batch(n, m, rng)
        if antithetic:
            w = np.concatenate([w, -w])
        lhs_all.append(w[:, i, j] * f(w))
        rhs_all.append(df(w, v))
        left -= m
    lhs = np.concatenate(lhs_all)
    rhs = np.concatenate(rhs_all)
    diff = lhs - rhs
    se = float(diff.std(ddof=1) / math.sqrt(len(diff)))
    mean = float(diff.mean())
    if antithetic:
        # pairs are dependent; use the standard error of the pair averages
        pairs = _pair_means(diff, chunk, samples)
        se = float(pairs.std(ddof=1) / math.sqrt(len(pairs)))
    if se == 0.0:
        residual = 0.0 if abs(mean) < 1e-15 else math.inf
    else:
        residual = abs(mean) / se
    return IbpResult(float(lhs.mean()), float(rhs.mean()), se, residual)


def _pair_means(diff: np.ndarray, chunk: int, samples: int) -> np.ndarray:
    out, pos, left = [], 0, samples
    while left > 0:
        m = min(chunk, left)
        block = diff[pos: pos + 2 * m]
        out.append(0.5 * (block[:m] + block[m:]))
        pos += 2 * m
        left -= m
    return np.concatenate(out)


def ibp_residual(n: int, samples: int, seed=None, F: str = "quadratic") -> float:
    """|LHS - RHS| of the integration-by-parts identity in standard errors."""
    if samples < 10_000:
        raise InvalidParams("ibp_residual needs at least 10^4 samples")
    return ibp_check(n, samples, seed, F).residual
