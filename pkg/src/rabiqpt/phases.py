"""Analytic large-eta theory of the anisotropic Rabi model.

Couplings enter through lam = g_r/g_C and mu = g_cr/g_C. Frequencies are
used by magnitude, so models whose effective frequencies are both negative
behave like their positive mirror image.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (AmbiguousBoundary, BoundaryTooClose, Indeterminate, NeedsEpsilonSign,
                     NoTransition, OutOfPhaseDomain, ZeroCritical)
from .model import INF, Marker

BOUNDARY_TOL = 1e-12
FD_STEP = 1e-4
FIRST_ORDER_TOL = 1e-3
SECOND_ORDER_TOL = 1e-2
_RADICAND_SLACK = 1e-13


class Phase(str, enum.Enum):
    N = "N"
    SX = "SX"
    SP = "SP"
    SXPA = "SXPa"
    SXPB = "SXPb"

    def __str__(self):
        return self.value


class TransitionOrder(str, enum.Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class ReducedCouplings:
    lam: float
    mu: float

    @property
    def zeta(self):
        return 0.5 * (self.lam + self.mu)

    @property
    def zeta_prime(self):
        return 0.5 * (self.lam - self.mu)

    @property
    def epsilon(self):
        if self.lam == 0.0:
            return INF
        return self.mu / self.lam


@dataclass(frozen=True)
class PhasePointResult:
    label: Phase
    excitation: float
    x_mean: float
    p_mean: float
    var_x: float
    var_p: float | Marker
    ground_energy: float
    squeeze: float | Marker
    alpha: float
    Omega_k: float


def reduced_couplings(model):
    """Dimensionless couplings (lam, mu) of an effective model."""
    if model.g_C == 0.0:
        raise ZeroCritical("g_C = 0; reduced couplings are undefined")
    return ReducedCouplings(model.g_r / model.g_C, model.g_cr / model.g_C)


def classify_phase(rc, tol=BOUNDARY_TOL):
    """Phase label for a point in the (lam, mu) plane.

    Normal iff |lam| + |mu| < 2. Outside, the lines lam = 0 and mu = 0 carry
    the SXPa and SXPb phases and the sign of lam*mu separates SX from SP.
    """
    lam, mu = rc.lam, rc.mu
    radius = abs(lam) + abs(mu)
    if abs(radius - 2.0) <= tol:
        raise AmbiguousBoundary(f"|lam|+|mu| = 2 at ({lam}, {mu})")
    if radius < 2.0:
        return Phase.N
    if abs(lam) <= tol:
        return Phase.SXPA
    if abs(mu) <= tol:
        return Phase.SXPB
    z2, zp2 = rc.zeta ** 2, rc.zeta_prime ** 2
    if abs(z2 - zp2) <= tol:
        raise AmbiguousBoundary(f"zeta^2 = zeta'^2 at ({lam}, {mu})")
    return Phase.SX if z2 > zp2 else Phase.SP


def _sqrt(v, what):
    if v < 0.0:
        if v < -_RADICAND_SLACK:
            raise OutOfPhaseDomain(f"negative radicand {v:.3e} in {what}")
        return 0.0
    return math.sqrt(v)


def _frequencies(model, leading_order=False):
    w0 = abs(model.omega0_eff)
    wc = 0.0 if leading_order else abs(model.omega_c_eff)
    return w0, wc


def _phase(rc, phase, tol=BOUNDARY_TOL):
    return classify_phase(rc, tol) if phase is None else Phase(phase)


def excitation_energy(rc, model, phase=None):
    """Lowest excitation energy of the quadratic low-energy Hamiltonian."""
    p = _phase(rc, phase)
    wc = abs(model.omega_c_eff)
    z, zp = rc.zeta, rc.zeta_prime
    if p is Phase.N:
        return wc * _sqrt((1 - z * z) * (1 - zp * zp), "omega_N")
    if p is Phase.SX:
        if z == 0.0:
            raise OutOfPhaseDomain("zeta = 0 in SX")
        return wc * _sqrt((1 - z ** -4) * (1 - (zp / z) ** 2), "omega_SX")
    if p is Phase.SP:
        if zp == 0.0:
            raise OutOfPhaseDomain("zeta' = 0 in SP")
        return wc * _sqrt((1 - zp ** -4) * (1 - (z / zp) ** 2), "omega_SP")
    return 0.0


def _s(x, eta):
    if x == 0.0:
        raise OutOfPhaseDomain("s(x) undefined at x = 0")
    return _sqrt(0.5 * eta * (x * x - 1.0 / (x * x)), "s(x)")


def _v(x1, x2):
    den = 1 - x1 * x1
    if den <= 0.0:
        raise OutOfPhaseDomain("v(x1, x2) needs |x1| < 1")
    return 0.5 * _sqrt((1 - x2 * x2) / den, "v(x1, x2)")


def _w(x1, x2):
    if x1 < 0.0:
        raise OutOfPhaseDomain("w(x1, x2) needs x1 >= 0")
    q = x2 ** 4 - 1
    if q <= 0.0:
        raise OutOfPhaseDomain("w(x1, x2) needs |x2| > 1")
    return math.sqrt(x1) / (1 + x1) * x2 * x2 / math.sqrt(q)


def order_parameters(rc, model, phase=None):
    """Return (<x>, <p>, var_x, var_p) on the positive branch.

    ``var_p`` is ``INF`` on the SXPa and SXPb lines.
    """
    p = _phase(rc, phase)
    eta = abs(model.eta_eff)
    z, zp = rc.zeta, rc.zeta_prime
    if p is Phase.N:
        return 0.0, 0.0, _v(z, zp), _v(zp, z)
    if p in (Phase.SX, Phase.SP) and rc.lam == 0.0:
        raise NeedsEpsilonSign("anisotropy undefined at g_r = 0")
    if p is Phase.SX:
        w = _w(rc.mu / rc.lam, z)
        return _s(z, eta), 0.0, w, 0.25 / w
    if p is Phase.SP:
        w = _w(-rc.mu / rc.lam, zp)
        return 0.0, _s(zp, eta), 0.25 / w, w
    arg = rc.mu if p is Phase.SXPA else rc.lam
    return _s(0.5 * arg, eta), 0.0, 0.0, INF


def displacement_and_qubit_freq(rc, model, phase=None):
    """Displacement |alpha_k|, rescaled qubit frequency Omega_k and chi_1..3.

    chi_1 and chi_2 are evaluated at the phase's own argument (zeta for SX,
    zeta' for SP) and are ``None`` on the SXPa/SXPb lines where only chi_3
    appears.
    """
    p = _phase(rc, phase)
    if p is Phase.N:
        raise OutOfPhaseDomain("no displacement in the normal phase")
    eta = abs(model.eta_eff)
    w0, wc = abs(model.omega0_eff), abs(model.omega_c_eff)
    gC = model.g_C
    chi3 = gC / math.sqrt(2.0)
    if p in (Phase.SX, Phase.SP):
        arg = rc.zeta if p is Phase.SX else rc.zeta_prime
        alpha = _s(arg, eta)
        return alpha, w0 * arg * arg, math.sqrt(2.0) * gC / arg, math.sqrt(2.0) * gC * arg, chi3
    arg = rc.mu if p is Phase.SXPA else rc.lam
    alpha = _sqrt(eta * (arg * arg / 16.0 - 1.0 / (arg * arg)), "alpha")
    g_k = arg * gC
    return alpha, g_k * g_k / wc, None, None, chi3


def ground_energy(rc, model, phase=None, leading_order=False):
    """Ground-state energy E_G in the point's phase.

    With ``leading_order`` the cavity frequency is set to zero, leaving the
    eta -> infinity part that scales with the qubit frequency alone.
    """
    p = _phase(rc, phase)
    w0, wc = _frequencies(model, leading_order)
    z, zp = rc.zeta, rc.zeta_prime
    if p is Phase.N:
        om = wc * _sqrt((1 - z * z) * (1 - zp * zp), "omega_N")
        return 0.5 * om + 0.5 * wc * z * zp - 0.5 * w0 - 0.5 * wc
    if p is Phase.SX:
        if z == 0.0:
            raise OutOfPhaseDomain("zeta = 0 in SX")
        om = wc * _sqrt((1 - z ** -4) * (1 - (zp / z) ** 2), "omega_SX")
        return 0.5 * om + 0.5 * wc * zp / z ** 3 - 0.25 * w0 * (z * z + z ** -2) - 0.5 * wc
    if p is Phase.SP:
        if zp == 0.0:
            raise OutOfPhaseDomain("zeta' = 0 in SP")
        om = wc * _sqrt((1 - zp ** -4) * (1 - (z / zp) ** 2), "omega_SP")
        return 0.5 * om + 0.5 * wc * z / zp ** 3 - 0.25 * w0 * (zp * zp + zp ** -2) - 0.5 * wc
    if p is Phase.SXPA:
        m2 = rc.mu ** 2
        return -0.5 * wc * (1 + 4 / m2) - w0 * (m2 / 16 + 1 / m2)
    l2 = rc.lam ** 2
    return -0.5 * wc * (1 - 4 / l2) - w0 * (l2 / 16 + 1 / l2)


def squeezing_parameter(rc, model, phase=None):
    """Squeezing exponent r_p; ``INF`` on the SXPa and SXPb lines."""
    p = _phase(rc, phase)
    z, zp = rc.zeta, rc.zeta_prime
    if p is Phase.N:
        num, den = 1 - z * z, 1 - zp * zp
    elif p is Phase.SX:
        num, den = 1 - z ** -4, 1 - (zp / z) ** 2
    elif p is Phase.SP:
        num, den = 1 - (z / zp) ** 2, 1 - zp ** -4
    else:
        return INF
    if num <= 0.0 or den <= 0.0:
        raise OutOfPhaseDomain("squeezing logarithm argument must be positive")
    return 0.25 * math.log(num / den)


def _unit(direction):
    if isinstance(direction, str):
        if direction in ("lambda", "lam"):
            return 1.0, 0.0
        if direction == "mu":
            return 0.0, 1.0
        raise ValueError(f"unknown direction {direction!r}")
    dl, dm = direction
    n = math.hypot(dl, dm)
    return dl / n, dm / n


def energy_derivatives(rc, model, order, direction, h=FD_STEP, leading_order=False):
    """Central finite-difference derivative of E_G along lam or mu.

    The stencil must stay inside the point's own phase; otherwise
    :class:`BoundaryTooClose` is raised.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    dl, dm = _unit(direction)
    p = classify_phase(rc)
    pts = [ReducedCouplings(rc.lam + k * h * dl, rc.mu + k * h * dm) for k in (-1, 0, 1)]
    for q in (pts[0], pts[2]):
        try:
            same = classify_phase(q) is p
        except AmbiguousBoundary:
            same = False
        if not same:
            raise BoundaryTooClose(f"stencil around ({rc.lam}, {rc.mu}) leaves phase {p}")
    e = [ground_energy(q, model, p, leading_order) for q in pts]
    if order == 1:
        return (e[2] - e[0]) / (2 * h)
    return (e[2] - 2 * e[1] + e[0]) / (h * h)


def _label(lam, mu):
    try:
        return classify_phase(ReducedCouplings(lam, mu))
    except AmbiguousBoundary:
        return None


def _runs(labels):
    runs = []
    for i, lab in enumerate(labels):
        if lab is None:
            continue
        if runs and runs[-1][0] is lab:
            runs[-1][2] = i
        else:
            runs.append([lab, i, i])
    # a line phase hit at a single sample is the boundary itself
    pruned = [r for r in runs if not (r[0] in (Phase.SXPA, Phase.SXPB) and r[1] == r[2]
                                      and len(runs) > 1)]
    merged = []
    for r in pruned:
        if merged and merged[-1][0] is r[0]:
            merged[-1][2] = r[2]
        else:
            merged.append(list(r))
    return merged


def find_crossing(start, end, samples=2001):
    """Locate the single phase boundary on the segment start -> end.

    Returns (t_b, phase_before, phase_after) with t in [0, 1].
    """
    (l0, m0), (l1, m1) = start, end
    ts = np.linspace(0.0, 1.0, samples)
    labels = [_label(l0 + t * (l1 - l0), m0 + t * (m1 - m0)) for t in ts]
    runs = _runs(labels)
    if len(runs) < 2:
        raise NoTransition("path stays inside one phase")
    if len(runs) > 2:
        raise ValueError(f"path crosses {len(runs) - 1} boundaries; expected one")
    (pa, _, ia), (pb, ib, _) = runs
    lo, hi = ts[ia], ts[ib]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _label(l0 + mid * (l1 - l0), m0 + mid * (m1 - m0)) is pa:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), pa, pb


def _one_sided(model, point, unit, side, phase, order, offset, leading_order):
    vals = []
    for k in (1, 2):
        d = side * k * offset
        rc = ReducedCouplings(point[0] + d * unit[0], point[1] + d * unit[1])
        if classify_phase(rc) is not phase:
            raise BoundaryTooClose("extrapolation point left its phase")
        vals.append(energy_derivatives(rc, model, order, unit, leading_order=leading_order))
    # linear extrapolation to the boundary
    return 2 * vals[0] - vals[1]


def transition_order(start, end, model, offset=1e-3, leading_order=True):
    """Classify the phase transition crossed by the straight path start -> end.

    One-sided first and second derivatives of E_G are extrapolated to the
    crossing. A first-derivative jump above 1e-3 |w0| (per unit of reduced
    coupling) means first order; otherwise a second-derivative jump above
    1e-2 |w0| means second order. By default the eta -> infinity energy is
    used; finite cavity frequency adds O(w_c) kinks of its own.
    """
    t_b, pa, pb = find_crossing(start, end)
    (l0, m0), (l1, m1) = start, end
    unit = _unit((l1 - l0, m1 - m0))
    point = (l0 + t_b * (l1 - l0), m0 + t_b * (m1 - m0))
    scale = abs(model.omega0_eff)
    d1 = [_one_sided(model, point, unit, s, p, 1, offset, leading_order)
          for s, p in ((-1, pa), (1, pb))]
    if abs(d1[1] - d1[0]) > FIRST_ORDER_TOL * scale:
        return TransitionOrder.FIRST
    d2 = [_one_sided(model, point, unit, s, p, 2, offset, leading_order)
          for s, p in ((-1, pa), (1, pb))]
    if abs(d2[1] - d2[0]) > SECOND_ORDER_TOL * scale:
        return TransitionOrder.SECOND
    raise Indeterminate(f"no derivative jump detected at {point}")


def phase_point(rc, model, tol=BOUNDARY_TOL):
    """All analytic observables at one point of the (lam, mu) plane."""
    label = classify_phase(rc, tol)
    x, p, vx, vp = order_parameters(rc, model, label)
    if label is Phase.N:
        alpha, Omega = 0.0, model.omega0_eff
    else:
        alpha, Omega, *_ = displacement_and_qubit_freq(rc, model, label)
    return PhasePointResult(
        label=label,
        excitation=excitation_energy(rc, model, label),
        x_mean=x, p_mean=p, var_x=vx, var_p=vp,
        ground_energy=ground_energy(rc, model, label),
        squeeze=squeezing_parameter(rc, model, label),
        alpha=alpha, Omega_k=Omega,
    )
