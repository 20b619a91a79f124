"""Airy function Ai and its derivative, self-contained.

Regions:
  |x| <= 2       Maclaurin series (two standard solutions with Ai(0), Ai'(0));
  x >= 8         asymptotic expansion in zeta = (2/3) x^{3/2};
  2 < x < 8      Taylor stepping of y'' = x y backward from x = 8, which is
                 the stable direction for the decaying solution;
  x < -2         Taylor stepping forward from x = -2 (oscillatory region).
"""

from __future__ import annotations

import math

import numpy as np

AI0 = 0.355028053887817239260063186004  # 1 / (3^{2/3} Gamma(2/3))
AIP0 = -0.258819403792806798405183560189  # -1 / (3^{1/3} Gamma(1/3))
SERIES_RADIUS = 2.0
ASYMPTOTIC_START = 8.0
_STEP = 0.25
_TAYLOR_TERMS = 40


def _maclaurin(x: float) -> tuple[float, float]:
    x3 = x * x * x
    f = fp = 0.0
    a, ap = 1.0, 0.0  # terms of f and f'
    g, gp = 0.0, 0.0
    b, bp = x, 1.0  # terms of g and g'
    for k in range(0, 200):
        f += a
        g += b
        fp += ap
        gp += bp
        kk = k + 1
        a *= x3 / ((3 * kk - 1) * (3 * kk))
        ap = x * x / 2 if kk == 1 else ap * x3 / ((3 * kk - 3) * (3 * kk - 1))
        b *= x3 / ((3 * kk) * (3 * kk + 1))
        bp *= x3 / ((3 * kk) * (3 * kk - 2))
        if abs(a) + abs(b) + abs(ap) + abs(bp) < 1e-18 * (abs(f) + abs(g) + abs(fp) + abs(gp)):
            break
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _asymptotic(x: float) -> tuple[float, float]:
    zeta = 2.0 / 3.0 * x**1.5
    # u_k and v_k coefficients of the standard expansions
    s_ai = s_aip = 0.0
    u = v = 1.0
    best = math.inf
    for k in range(0, 60):
        if k > 0:
            u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
            v = -(6 * k + 1) / (6 * k - 1) * u
        term = u / zeta**k
        if abs(term) > best:  # optimal truncation
            break
        best = abs(term)
        sign = (-1) ** k
        s_ai += sign * term
        s_aip += sign * v / zeta**k
        if abs(term) < 1e-17:
            break
    pre = math.exp(-zeta) / (2 * math.sqrt(math.pi))
    return pre * x**-0.25 * s_ai, -pre * x**0.25 * s_aip


def _taylor_step(x0: float, y0: float, yp0: float, h: float) -> tuple[float, float]:
    c = [y0, yp0, x0 * y0 / 2.0]
    for n in range(1, _TAYLOR_TERMS):
        c.append((x0 * c[n] + c[n - 1]) / ((n + 2) * (n + 1)))
    y = yp = 0.0
    hp = 1.0
    for n, cn in enumerate(c):
        y += cn * hp
        if n + 1 < len(c):
            yp += (n + 1) * c[n + 1] * hp
        hp *= h
    return y, yp


def _march(x0: float, y: float, yp: float, x: float) -> tuple[float, float]:
    n = max(1, math.ceil(abs(x - x0) / _STEP))
    h = (x - x0) / n
    for i in range(n):
        y, yp = _taylor_step(x0 + i * h, y, yp, h)
    return y, yp


def _airy_scalar(x: float) -> tuple[float, float]:
    if abs(x) <= SERIES_RADIUS:
        return _maclaurin(x)
    if x >= ASYMPTOTIC_START:
        return _asymptotic(x)
    if x > 0:
        return _march(ASYMPTOTIC_START, *_asymptotic(ASYMPTOTIC_START), x)
    return _march(-SERIES_RADIUS, *_maclaurin(-SERIES_RADIUS), x)


def airy_ai(x):
    """Ai(x) and Ai'(x); scalar or array input."""
    xa = np.asarray(x, dtype=float)
    if xa.ndim == 0:
        return _airy_scalar(float(xa))
    vals = np.array([_airy_scalar(float(v)) for v in xa.ravel()])
    return vals[:, 0].reshape(xa.shape), vals[:, 1].reshape(xa.shape)
