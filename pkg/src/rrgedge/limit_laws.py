"""Kesten-McKay and semicircle analytics, classical locations and the tree Green's function.

Normalization: the Kesten-McKay law of the normalized adjacency matrix
A/sqrt(d-1) is supported on [-2, 2].  Writing a = d/(d-1):

    rho_d(x) = (a - x^2/d)^{-1} sqrt([4 - x^2]_+) / (2 pi)
    m_d(z)   = -1 / (z + a m_sc(z)),     1 + z m_sc + m_sc^2 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .errors import DepthTooSmall, InvalidParams, TruncationNotConverged

KMAX_CAP = 500
SERIES_RTOL = 1e-14
TRUNCATION_ATOL = 1e-13


def _a(d: float) -> float:
    return d / (d - 1.0)


def rho_d(x, d: float):
    """Kesten-McKay density; vectorized in x."""
    x = np.asarray(x, dtype=float)
    inside = np.clip(4.0 - x * x, 0.0, None)
    out = np.sqrt(inside) / (2 * np.pi) / (_a(d) - x * x / d)
    out = np.where(inside > 0, out, 0.0)
    return out if out.ndim else float(out)


def rho_sc(x):
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2 * np.pi)
    return out if out.ndim else float(out)


def m_sc(z):
    """Semicircle Stieltjes transform, branch with Im m > 0.

    For real z outside [-2, 2] this is the limit from the upper half-plane.
    Vectorized in z.
    """
    z = np.asarray(z, dtype=complex)
    # sqrt(z-2)*sqrt(z+2) is the branch of sqrt(z^2-4) that behaves like z at infinity
    out = 0.5 * (-z + np.sqrt(z - 2) * np.sqrt(z + 2))
    return out if out.ndim else complex(out)


def m_d(z, d: float):
    """Kesten-McKay Stieltjes transform; vectorized in z."""
    z = np.asarray(z, dtype=complex)
    out = -1.0 / (z + _a(d) * m_sc(z))
    return out if out.ndim else complex(out)


def sc_residual(z) -> float:
    m = m_sc(z)
    return abs(1 + z * m + m * m)


# ---------------------------------------------------------------- P_infinity


def p_inf_terms(w: complex, d: float, kmax: int) -> np.ndarray:
    """Series terms for k = 2..kmax: (-2)^{k-1} (2k-3)!!/k! * d/(d-1)^k * w^{2k}.

    Built by ratio recursion so that neither the double factorial nor the
    factorial is formed explicitly.
    """
    if kmax < 2:
        raise InvalidParams("kmax must be >= 2")
    u = complex(w) ** 2 / (d - 1.0)
    terms = np.empty(kmax - 1, dtype=complex)
    t = -d * u * u  # k = 2: (-2)^1 * 1!! / 2! = -1
    terms[0] = t
    for k in range(3, kmax + 1):
        # c_k / c_{k-1} = -2 (2k-3) / k
        t *= -2.0 * (2 * k - 3) / k * u
        terms[k - 2] = t
    return terms


def p_inf(z: complex, w: complex, d: float, kmax: int | None = None) -> complex:
    """Truncated series P_inf(z, w).

    With ``kmax=None`` the truncation grows until the next term is below
    1e-14 * max(1, |partial sum|), capped at 500.  Raises
    ``TruncationNotConverged`` if the last retained term exceeds 1e-13.
    """
    z, w = complex(z), complex(w)
    head = 1 + z * w + _a(d) * w * w
    if kmax is not None:
        terms = p_inf_terms(w, d, kmax)
        total = head + terms.sum()
        if abs(terms[-1]) > TRUNCATION_ATOL:
            raise TruncationNotConverged(f"last term {abs(terms[-1]):.3e} at kmax={kmax}")
        return total
    u = w * w / (d - 1.0)
    t = -d * u * u
    total = head + t
    for k in range(3, KMAX_CAP + 1):
        t *= -2.0 * (2 * k - 3) / k * u
        total += t
        if abs(t) < SERIES_RTOL * max(1.0, abs(total)):
            return total
    if abs(t) > TRUNCATION_ATOL:
        raise TruncationNotConverged(
            f"series not converged at kmax={KMAX_CAP} (|4w^2/(d-1)| = {abs(4 * u):.3f})"
        )
    return total


def p_inf_resummed(z: complex, w: complex, d: float) -> complex:
    """Closed-form sum of the P_inf series: 1 + z w + (d/2)(sqrt(1 + 4 w^2/(d-1)) - 1).

    Equal to the series inside its disk of convergence |4 w^2/(d-1)| < 1 and
    provides the analytic continuation (principal square root) beyond it.
    """
    z, w = complex(z), complex(w)
    return 1 + z * w + 0.5 * d * (np.sqrt(1 + 4 * w * w / (d - 1.0)) - 1)


def p_inf_converges(w: complex, d: float) -> bool:
    return abs(4 * complex(w) ** 2 / (d - 1.0)) < 1


# ratio |4 w^2/(d-1)| up to which p_inf_value sums the series directly;
# 0.9^500 is far below the truncation tolerance
SERIES_RATIO_MAX = 0.9


def p_inf_value(z: complex, w: complex, d: float) -> tuple[complex, bool]:
    """P_inf(z, w) and whether the truncated series was used.

    The series is summed where its terms decay at least geometrically with
    ratio SERIES_RATIO_MAX; elsewhere (slow convergence or divergence near the
    edges at small d) the resummed closed form is returned.
    """
    if abs(4 * complex(w) ** 2 / (d - 1.0)) <= SERIES_RATIO_MAX:
        return p_inf(z, w, d), True
    return p_inf_resummed(z, w, d), False


# ---------------------------------------------------------------- CDF and quantiles


def _upper_mass_theta(theta, d: float):
    """Mass of rho_d on [2 cos(theta), 2], theta in [0, pi].

    With x = 2 cos(theta) the density becomes (2/pi) sin^2 / (a - b cos^2),
    b = 4/d, which has an elementary antiderivative.
    """
    theta = np.asarray(theta, dtype=float)
    a, b = _a(d), 4.0 / d
    c = a - b  # = (d-2)^2 / (d(d-1)) >= 0
    if c <= 0:  # d == 2: arcsine law, density is constant in theta
        return theta / np.pi
    phi = np.arctan2(math.sqrt(a) * np.sin(theta), math.sqrt(c) * np.cos(theta))
    return (2.0 / (np.pi * b)) * (theta - (a - b) / math.sqrt(a * c) * phi)


def _theta_density(theta, d: float):
    a, b = _a(d), 4.0 / d
    s2 = np.sin(theta) ** 2
    return (2.0 / np.pi) * s2 / (a - b * (1 - s2))


def km_upper_mass(x, d: float):
    """int_x^2 rho_d(y) dy."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = _upper_mass_theta(np.arccos(x / 2.0), d)
    return out if np.ndim(out) else float(out)


def km_cdf(x, d: float):
    """int_{-2}^x rho_d(y) dy."""
    out = 1.0 - np.asarray(km_upper_mass(x, d))
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class ClassicalLocations:
    """gamma_2 > gamma_3 > ... > gamma_N; ``gamma[0]`` is gamma_2."""

    n: int
    d: float
    gamma: np.ndarray

    def __getitem__(self, k: int) -> float:
        """gamma_k with the 1-based eigenvalue index k (2 <= k <= N)."""
        if not 2 <= k <= self.n:
            raise IndexError(k)
        return float(self.gamma[k - 2])

    def quantile_residuals(self) -> np.ndarray:
        return km_upper_mass(self.gamma, self.d) - quantile_levels(self.n)

    def to_csv(self) -> str:
        rows = ["k,gamma"] + [f"{k},{g!r}" for k, g in enumerate(self.gamma.tolist(), start=2)]
        return "\n".join(rows) + "\n"


def quantile_levels(n: int) -> np.ndarray:
    """Upper-tail mass assigned to gamma_k, k = 2..N.

    Midpoints (k - 3/2)/(N - 1) of N - 1 equal cells, one per nontrivial
    eigenvalue; this keeps every level inside (0, 1) and makes the locations
    symmetric, gamma_k = -gamma_{N+2-k}.
    """
    k = np.arange(2, n + 1)
    return (k - 1.5) / (n - 1)


def classical_locations(n: int, d: float, tol: float = 1e-13) -> ClassicalLocations:
    """Solve quantile_levels(n)[k-2] = int_{gamma_k}^2 rho_d for 2 <= k <= N.

    Safeguarded Newton in theta = arccos(gamma/2): the upper mass is an
    increasing function of theta with an analytic derivative.
    """
    if n < 4:
        raise InvalidParams("n must be >= 4")
    target = quantile_levels(n)
    lo = np.zeros_like(target)
    hi = np.full_like(target, np.pi)
    theta = np.pi * target  # exact for the arcsine law, a fine start otherwise
    for _ in range(200):
        f = _upper_mass_theta(theta, d) - target
        lo = np.where(f < 0, theta, lo)
        hi = np.where(f > 0, theta, hi)
        if np.all(np.abs(f) <= tol):
            break
        dens = _theta_density(theta, d)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = theta - f / dens
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        theta = np.where(bad, 0.5 * (lo + hi), step)
    gamma = 2.0 * np.cos(theta)
    return ClassicalLocations(n, d, gamma)


def rigidity_envelope(n: int, d: float, k) -> float:
    """d/N + N^{-2/3} min(k-1, N+1-k)^{-1/3}."""
    k = np.asarray(k)
    if np.any(k < 2) or np.any(k > n):
        raise InvalidParams("need 2 <= k <= n")
    out = d / n + n ** (-2.0 / 3.0) * np.minimum(k - 1, n + 1 - k) ** (-1.0 / 3.0)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------- tree oracle


def tree_green_closed_form(d: float, z: complex, dist: int) -> complex:
    return m_d(z, d) * (-m_sc(z) / math.sqrt(d - 1)) ** dist


def truncated_tree(d: int, depth: int) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Rooted d-regular tree cut at `depth`: adjacency and distance-to-root."""
    parents = [-1]
    level = [0]
    frontier = [0]
    for lev in range(1, depth + 1):
        nxt = []
        for p in frontier:
            for _ in range(d if lev == 1 else d - 1):
                parents.append(p)
                level.append(lev)
                nxt.append(len(parents) - 1)
        frontier = nxt
    n = len(parents)
    child = np.arange(1, n)
    par = np.asarray(parents[1:])
    a = sparse.csr_matrix(
        (np.ones(2 * (n - 1)), (np.r_[child, par], np.r_[par, child])), shape=(n, n)
    )
    return a, np.asarray(level)


def tree_green_oracle(d: int, depth: int, z: complex, dist: int) -> complex:
    """Resolvent entry of A/sqrt(d-1) on the truncated tree, root to a vertex at `dist`.

    No projection: this is a finite approximation of the infinite-volume
    object.  The root column is obtained by one sparse solve.
    """
    if depth < dist + 3:
        raise DepthTooSmall(f"depth {depth} < dist + 3 = {dist + 3}")
    a, level = truncated_tree(d, depth)
    n = a.shape[0]
    h = (a / math.sqrt(d - 1)).astype(complex)
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    col = spsolve((h - z * sparse.identity(n, format="csr")).tocsc(), rhs)
    target = int(np.flatnonzero(level == dist)[0])
    return complex(col[target])
