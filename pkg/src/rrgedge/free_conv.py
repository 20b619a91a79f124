"""Free convolution of the rescaled Kesten-McKay law with the semicircle law.

At time t the limiting spectral measure of e^{-t/2} H + sqrt(1 - e^{-t}) W has
Stieltjes transform m_d(.; t), related to m_d through the subordination map

    xi(z; t) = e^{-t/2} z - e^{t/2} (1 - e^{-t}) m_d(z),
    m_d(xi(z; t); t) = e^{t/2} m_d(z).

The right edge is E+(t) = xi(z+(t); t) where z+(t) > 2 solves
m_d'(z) = 1/(e^t - 1); the left edge is the mirror image.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParams, NewtonDiverged, OnSupport, RootBracketFailure
from .limit_laws import m_d, m_sc

T_MAX = 2.0
NEWTON_MAX_ITER = 200


def md_prime(z, d: float) -> complex:
    """Derivative of m_d, from m_sc' = -m_sc / (z + 2 m_sc) and m_d' = m_d^2 (1 + a m_sc')."""
    z = complex(z)
    if z.imag == 0 and -2.0 <= z.real <= 2.0:
        raise OnSupport(f"m_d' is not defined on the support, z = {z.real}")
    ms = m_sc(z)
    ms_p = -ms / (z + 2 * ms)
    md = m_d(z, d)
    return md * md * (1 + d / (d - 1.0) * ms_p)


def md_second(z, d: float) -> complex:
    """Second derivative of m_d (used for Newton polishing of the edge equation)."""
    z = complex(z)
    ms = m_sc(z)
    root = z + 2 * ms  # sqrt(z^2 - 4) on the correct branch
    ms_p = -ms / root
    ms_pp = -(ms_p * root - ms * z / root) / root**2
    a = d / (d - 1.0)
    md = m_d(z, d)
    mdp = md * md * (1 + a * ms_p)
    return 2 * md * mdp * (1 + a * ms_p) + md * md * a * ms_pp


def _md_prime_real(x: float, d: float) -> float:
    return md_prime(complex(x, 0.0), d).real


def xi(z, t: float, d: float) -> complex:
    """Subordination map xi_d(z; t)."""
    return math.exp(-t / 2) * z - math.exp(t / 2) * (1 - math.exp(-t)) * m_d(z, d)


@dataclass(frozen=True)
class EdgeState:
    t: float
    d: float
    z_plus: float
    z_minus: float
    E_plus: float
    E_minus: float
    velocity_plus: float
    velocity_minus: float

    def residual(self) -> float:
        """max |m_d'(z+-) (e^t - 1) - 1| over both edges."""
        if self.t == 0:
            return 0.0
        c = math.expm1(self.t)
        return max(
            abs(_md_prime_real(self.z_plus, self.d) * c - 1),
            abs(_md_prime_real(self.z_minus, self.d) * c - 1),
        )


def _solve_edge_preimage(t: float, d: float, sign: int) -> float:
    """Root of m_d'(z) = 1/(e^t - 1) on (2, inf) (sign=+1) or (-inf, -2) (sign=-1)."""
    target = 1.0 / math.expm1(t)

    def f(x):
        return _md_prime_real(sign * x, d) - target

    delta = 1e-3
    while f(2.0 + delta) <= 0:
        delta *= 0.25
        if delta < 8 * np.finfo(float).eps:
            raise RootBracketFailure(f"m_d' near the edge stays below 1/(e^t-1) (t={t}, d={d})")
    lo = 2.0 + delta
    hi = 4.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise RootBracketFailure(f"no bracket for the edge equation (t={t}, d={d})")
    x = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    for _ in range(3):  # Newton polish
        fp = sign * md_second(complex(sign * x, 0.0), d).real
        if fp == 0:
            break
        x_new = x - f(x) / fp
        if not x_new > 2.0 or abs(f(x_new)) >= abs(f(x)):
            break
        x = x_new
    return sign * x


def edge_state(t: float, d: float) -> EdgeState:
    """Edge preimages, edge locations and edge velocities at time t."""
    if not 0 <= t <= T_MAX:
        raise InvalidParams(f"t must be in [0, {T_MAX}], got {t}")
    if t == 0:
        # xi is the identity, the edges are those of rho_d and the velocity is
        # -(1/2)(E + 2 m_d(E)) at E = +-2
        vp = -0.5 * (2 + 2 * m_d(complex(2.0, 0.0), d).real)
        return EdgeState(0.0, d, 2.0, -2.0, 2.0, -2.0, vp, -vp)
    zp = _solve_edge_preimage(t, d, +1)
    zm = _solve_edge_preimage(t, d, -1)
    ep = xi(complex(zp), t, d).real
    em = xi(complex(zm), t, d).real
    vp = _velocity(ep, zp, t, d)
    vm = _velocity(em, zm, t, d)
    return EdgeState(t, d, zp, zm, ep, em, vp, vm)


def _velocity(E: float, z: float, t: float, d: float) -> float:
    # m_d(E; t) = e^{t/2} m_d(z) at the edge preimage
    mt = math.exp(t / 2) * m_d(complex(z), d).real
    return -0.5 * (E + 2 * mt)


def edge_velocity(t: float, d: float, side: int = +1) -> float:
    """d/dt of the right (side=+1) or left (side=-1) spectral edge."""
    if t <= 0:
        raise InvalidParams("edge_velocity needs t > 0")
    s = edge_state(t, d)
    return s.velocity_plus if side > 0 else s.velocity_minus


def md_t(z, t: float, d: float, tol: float = 1e-12, trace: bool = False) -> complex:
    """Stieltjes transform of the time-t free convolution at z in the upper half-plane.

    Solves xi(w; t) = z by damped Newton from w0 = e^{t/2} z, accepts the root
    only if it lies in the region where xi is a homeomorphism
    (Im m_d(w)/Im w < 1/(e^t - 1)); otherwise continues in Im z from a large
    imaginary part down to the target.  Returns e^{t/2} m_d(w).
    """
    z = complex(z)
    if not z.imag > 0:
        raise InvalidParams("md_t needs Im z > 0")
    if t == 0:
        return m_d(z, d)
    w = _subordination_root(z, t, d, tol)
    return math.exp(t / 2) * m_d(w, d)


def _in_domain(w: complex, t: float, d: float) -> bool:
    if w.imag <= 0:
        return False
    return m_d(w, d).imag / w.imag * math.expm1(t) < 1 + 1e-9


def _newton(z: complex, w0: complex, t: float, d: float, tol: float) -> complex:
    e_m, e_p = math.exp(-t / 2), math.exp(t / 2) * (1 - math.exp(-t))
    w = w0
    hist = [w]
    r = xi(w, t, d) - z
    for _ in range(NEWTON_MAX_ITER):
        if abs(r) <= tol * max(1.0, abs(z)):
            return w
        dxi = e_m - e_p * md_prime(w, d)
        step = r / dxi
        lam = 1.0
        while True:
            cand = w - lam * step
            if cand.imag > 0:
                rc = xi(cand, t, d) - z
                if abs(rc) < abs(r):
                    break
            lam *= 0.5
            if lam < 1e-12:
                raise NewtonDiverged(f"damped Newton stalled at z={z}", hist)
        w, r = cand, rc
        hist.append(w)
    raise NewtonDiverged(f"Newton did not converge at z={z}", hist)


def _subordination_root(z: complex, t: float, d: float, tol: float) -> complex:
    try:
        w = _newton(z, math.exp(t / 2) * z, t, d, tol)
        if _in_domain(w, t, d):
            return w
    except NewtonDiverged:
        pass
    # continuation along a geometric path in Im z
    eta_hi = max(1.0, 2 * z.imag)
    etas = np.geomspace(eta_hi, z.imag, 60)
    w = math.exp(t / 2) * complex(z.real, eta_hi)
    for eta in etas:
        w = _newton(complex(z.real, eta), w, t, d, tol)
    if not _in_domain(w, t, d):
        raise NewtonDiverged(f"subordination root left the admissible region at z={z}", [w])
    return w


def edge_trajectory_csv(ts, d: float) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "z_plus", "E_plus", "velocity_plus"])
    for t in ts:
        s = edge_state(float(t), d)
        wr.writerow([repr(s.t), repr(s.z_plus), repr(s.E_plus), repr(s.velocity_plus)])
    return buf.getvalue()
