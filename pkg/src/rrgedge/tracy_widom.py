"""Tracy-Widom distributions for beta = 1 and 2 via the Hastings-McLeod solution.

q solves q'' = s q + 2 q^3 with q(s) ~ Ai(s) as s -> +inf.  With

    U(s) = int_s^inf q^2,   V(s) = int_s^inf (x - s) q^2,   R(s) = int_s^inf q,

the distribution functions are F2 = exp(-V) and F1 = exp(-(V + R)/2).  The
tail integrals are appended to the ODE (U' = -q^2, V' = -U, R' = -q) and the
whole system is integrated backward from s0 = 8, starting on Airy data.

``fredholm_f2`` and ``fredholm_f1`` evaluate the same distributions as Airy
kernel determinants with Gauss-Legendre quadrature; they exist as an
independent check of the ODE route.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, simpson, solve_ivp
from scipy.interpolate import PchipInterpolator

from ._rng import as_generator
from .airy import airy_ai
from .errors import InvalidParams, OdeBlowup, OutOfRange

S_MIN, S_MAX = -10.0, 8.0
GRID_STEP = 0.005
ODE_RTOL = 1e-12
P_MIN, P_MAX = 1e-6, 1 - 1e-8


def _airy_tail_integrals(s0: float) -> tuple[float, float, float]:
    """U, V, R at s0 for q = Ai (the cubic correction is below double precision at s0 = 8)."""
    ai, aip = airy_ai(s0)
    u = aip * aip - s0 * ai * ai
    v = (2 * s0 * s0 * ai * ai - 2 * s0 * aip * aip - ai * aip) / 3.0
    r, _ = quad(lambda x: airy_ai(x)[0], s0, s0 + 40.0, epsabs=1e-22, epsrel=1e-13, limit=200)
    return u, v, r


def _rhs(s, y):
    q, qp, u, v, r = y
    return [qp, s * q + 2 * q**3, -q * q, -u, -q]


def solve_hastings_mcleod(grid: np.ndarray, rtol: float = ODE_RTOL, s0: float = S_MAX) -> np.ndarray:
    """Integrate the augmented Painleve II system backward from s0; rows = grid points.

    Columns: q, q', U, V, R.
    """
    ai, aip = airy_ai(s0)
    u0, v0, r0 = _airy_tail_integrals(s0)
    desc = np.sort(np.asarray(grid, dtype=float))[::-1]
    if desc[0] > s0:
        raise InvalidParams("grid extends beyond the starting point s0")
    sol = solve_ivp(
        _rhs, (s0, desc[-1]), [ai, aip, u0, v0, r0], method="DOP853",
        t_eval=desc, rtol=rtol, atol=1e-30,
    )
    if not sol.success:
        raise OdeBlowup(f"Painleve II integration failed: {sol.message}")
    y = sol.y.T[::-1]
    q = y[:, 0]
    # the Hastings-McLeod solution is positive and grows like sqrt(-s/2)
    if np.any(q <= 0) or np.any(q > 2 * np.sqrt(np.maximum(-np.sort(grid), 0) / 2) + 1):
        raise OdeBlowup("Painleve II solution left the Hastings-McLeod branch; tighten rtol")
    return y


@dataclass(frozen=True, eq=False)
class TWTable:
    """Tabulated Tracy-Widom CDF of a given order on a uniform grid."""

    order: int
    grid: np.ndarray
    q: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        for arr in (self.grid, self.q, self.cdf):
            arr.setflags(write=False)
        object.__setattr__(self, "_interp", PchipInterpolator(self.grid, self.cdf, extrapolate=False))

    def __call__(self, s):
        return tw_cdf(self, s)

    def quantile(self, p):
        return tw_quantile(self, p)

    def sample(self, size: int, seed=None) -> np.ndarray:
        """Inverse-CDF samples."""
        u = as_generator(seed).uniform(P_MIN, P_MAX, size=size)
        return tw_quantile(self, u)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "q", "cdf"])
        for s, q, c in zip(self.grid.tolist(), self.q.tolist(), self.cdf.tolist()):
            w.writerow([f"{s:.6f}", repr(q), repr(c)])
        return buf.getvalue()


def build_table(order: int, rtol: float = ODE_RTOL, step: float = GRID_STEP) -> TWTable:
    if order not in (1, 2):
        raise InvalidParams("order must be 1 or 2")
    n = int(round((S_MAX - S_MIN) / step)) + 1
    grid = np.linspace(S_MIN, S_MAX, n)
    y = solve_hastings_mcleod(grid, rtol=rtol)
    q, v, r = y[:, 0], y[:, 3], y[:, 4]
    cdf = np.exp(-v) if order == 2 else np.exp(-0.5 * (v + r))
    return TWTable(order, grid, q.copy(), cdf)


@lru_cache(maxsize=4)
def get_table(order: int) -> TWTable:
    """Shared immutable table of the given order."""
    return build_table(order)


def tw_cdf(table: TWTable, s):
    """Monotone cubic interpolation of the tabulated CDF, clamped to [0, 1]."""
    s = np.asarray(s, dtype=float)
    out = table._interp(np.clip(s, S_MIN, S_MAX))
    out = np.where(s < S_MIN, 0.0, out)
    out = np.where(s > S_MAX, 1.0, out)
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def tw_quantile(table: TWTable, p, tol: float = 1e-13):
    """Inverse CDF by vectorized bisection on the monotone interpolant."""
    p = np.asarray(p, dtype=float)
    if np.any(p < P_MIN) or np.any(p > P_MAX):
        raise OutOfRange(f"p must lie in [{P_MIN}, {P_MAX}]")
    lo = np.full(p.shape, S_MIN)
    hi = np.full(p.shape, S_MAX)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        below = tw_cdf(table, mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) < tol:
            break
    out = 0.5 * (lo + hi)
    return out if out.ndim else float(out)


def ks_distance(samples, table: TWTable) -> float:
    """Sup-distance between the empirical CDF of `samples` and the table CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    m = len(x)
    if m == 0:
        raise InvalidParams("ks_distance needs at least one sample")
    f = tw_cdf(table, x)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def tw_moments(table: TWTable) -> tuple[float, float]:
    """Mean and variance from the tabulated CDF.

    Integration by parts on [a, b] with F(a) ~ 0 and F(b) ~ 1:
    E X = b - int F ds and E X^2 = b^2 - 2 int s F ds (Simpson's rule).
    """
    s, f = table.grid, table.cdf
    b = s[-1]
    m1 = b - simpson(f, x=s)
    m2 = b * b - 2 * simpson(s * f, x=s)
    return float(m1), float(m2 - m1 * m1)


# ---------------------------------------------------------------- Fredholm oracle


def _fredholm_nodes(s: float, m: int, scale: float = 10.0):
    u, w = np.polynomial.legendre.leggauss(m)
    arg = np.pi * (u + 1) / 4
    x = s + scale * np.tan(arg)
    wx = w * scale * (np.pi / 4) / np.cos(arg) ** 2
    return x, wx


def fredholm_f2(s: float, m: int = 60) -> float:
    """det(I - K_Airy) on L^2(s, inf)."""
    from scipy.special import airy

    x, w = _fredholm_nodes(s, m)
    ai, aip, _, _ = airy(x)
    dx = x[:, None] - x[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]) / dx
    np.fill_diagonal(k, aip * aip - x * ai * ai)
    sw = np.sqrt(w)
    return float(np.linalg.det(np.eye(m) - sw[:, None] * k * sw[None, :]))


def fredholm_f1(s: float, m: int = 60) -> float:
    """det(I - K_1) on L^2(s, inf), K_1(x, y) = Ai((x + y)/2) / 2."""
    from scipy.special import airy

    x, w = _fredholm_nodes(s, m)
    k = 0.5 * airy(0.5 * (x[:, None] + x[None, :]))[0]
    sw = np.sqrt(w)
    return float(np.linalg.det(np.eye(m) - sw[:, None] * k * sw[None, :]))


def airy_ai_quadrature(x: float) -> float:
    """Ai(x) for x > 0 from Ai = sqrt(x/3)/pi * K_{1/3}(zeta), K by its cosh integral."""
    if x <= 0:
        raise InvalidParams("quadrature representation implemented for x > 0")
    zeta = 2.0 / 3.0 * x**1.5
    # integrand < exp(-zeta cosh(u)) is negligible beyond cosh(u) = 1 + 800/zeta
    upper = math.acosh(1 + 800.0 / zeta)
    kv, _ = quad(lambda u: math.exp(-zeta * math.cosh(u)) * math.cosh(u / 3.0), 0, upper,
                 epsabs=0, epsrel=1e-13, limit=200)
    return math.sqrt(x / 3.0) / math.pi * kv
