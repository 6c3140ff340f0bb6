"""Bare Rabi model, qubit-frequency modulation and the effective anisotropic model.

All frequencies are in units of the qubit frequency omega0 unless the caller
chooses otherwise; nothing here assumes omega0 == 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_J, bessel_J_orders
from .errors import DegenerateResonance, DomainError, ZeroEffectiveCavity

N_SEARCH = 64
RWA_THRESHOLD = 0.2


class Marker(enum.Enum):
    """Non-numeric table entries."""

    INF = "inf"
    BOUNDARY = "boundary"

    def __str__(self):
        return self.value


INF = Marker.INF


class SelectionMode(str, enum.Enum):
    MAX_RATIO = "max_ratio"
    MIN_DETUNING = "min_detuning"
    MANUAL = "manual"


@dataclass(frozen=True)
class SystemParams:
    omega0: float = 1.0
    omega_c: float = 0.01
    g: float = 0.06
    chi: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise DomainError("omega0 must be > 0")
        if not self.omega_c > 0:
            raise DomainError("omega_c must be > 0")
        for name in ("g", "chi", "kappa"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be >= 0")

    @classmethod
    def from_eta(cls, eta, g=0.06, chi=0.0, kappa=0.0, omega0=1.0):
        """Build from the bare frequency ratio eta = omega0 / omega_c."""
        return cls(omega0=omega0, omega_c=omega0 / eta, g=g * omega0, chi=chi,
                   kappa=kappa * omega0)


@dataclass(frozen=True)
class ModulationParams:
    xi: float
    nu: float

    def __post_init__(self):
        if not self.xi >= 0:
            raise DomainError("xi must be >= 0")
        if not self.nu > 0:
            raise DomainError("nu must be > 0")


@dataclass(frozen=True)
class SidebandChoice:
    n0: int
    m0: int
    mode: SelectionMode = SelectionMode.MANUAL


@dataclass(frozen=True)
class EffectiveModel:
    """Static anisotropic Rabi model obtained after the two rotating frames.

    ``epsilon`` is ``INF`` when g_r vanishes but g_cr does not.
    """

    g_r: float
    g_cr: float
    epsilon: float | Marker
    omega0_eff: float
    omega_c_eff: float
    eta_eff: float
    g_C: float
    g_tilde_C: float
    omega_c_prime: float
    g_a2: float
    selection: SidebandChoice | None = None

    @property
    def lam(self):
        return self.g_r / self.g_C

    @property
    def mu(self):
        return self.g_cr / self.g_C


@dataclass(frozen=True)
class RwaReport:
    ratios: dict = field(default_factory=dict)
    a2_ratios: dict = field(default_factory=dict)
    threshold: float = RWA_THRESHOLD
    passed: bool = True


def a2_amplitude(params):
    """Return (g_a2, omega_c_prime) with g_a2 = chi g^2 / omega0."""
    g_a2 = params.chi * params.g ** 2 / params.omega0
    return g_a2, params.omega_c + 2.0 * g_a2


def sideband_detunings(params, mod, n):
    """Oscillation frequencies (delta_n, Delta_n) of the n-th rotating and CR sideband."""
    _, wc = a2_amplitude(params)
    return (params.omega0 - wc + n * mod.nu,
            params.omega0 + wc + n * mod.nu)


def _pick(orders, score, maximise):
    # ties: smaller |n| first, then negative n
    best = None
    best_key = None
    for n, s in zip(orders, score):
        key = (-s if maximise else s, abs(n), 0 if n < 0 else 1)
        if best_key is None or key < best_key:
            best, best_key = int(n), key
    return best


def select_sidebands(params, mod, mode=SelectionMode.MIN_DETUNING, n0=None, m0=None,
                     n_search=N_SEARCH):
    """Choose the retained rotating (n0) and counter-rotating (m0) sidebands.

    Parameters
    ----------
    mode : SelectionMode
        ``MIN_DETUNING`` minimises |delta_n| and |Delta_m|; ``MAX_RATIO``
        maximises |J_n(xi)/delta_n| and |J_m(xi)/Delta_m|; ``MANUAL``
        passes ``n0`` and ``m0`` through.
    n_search : int
        Orders are searched in [-n_search, n_search].
    """
    mode = SelectionMode(mode)
    if mode is SelectionMode.MANUAL:
        if n0 is None or m0 is None:
            raise ValueError("manual selection needs both n0 and m0")
        return SidebandChoice(int(n0), int(m0), mode)

    orders = np.arange(-n_search, n_search + 1)
    delta, Delta = sideband_detunings(params, mod, orders)
    if mode is SelectionMode.MIN_DETUNING:
        return SidebandChoice(_pick(orders, np.abs(delta), False),
                              _pick(orders, np.abs(Delta), False), mode)

    if mod.xi <= 0:
        raise DomainError("max-ratio selection needs xi > 0")
    jn = np.abs(bessel_J_orders(orders, mod.xi))
    picks = []
    for det, label in ((delta, "rotating"), (Delta, "counter-rotating")):
        hit = (det == 0.0) & (jn > 0.0)
        if hit.any():
            raise DegenerateResonance(
                f"{label} sideband n={int(orders[hit][0])} is exactly resonant; "
                "use min_detuning or manual selection")
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(det == 0.0, 0.0, jn / np.abs(det))
        picks.append(_pick(orders, ratio, True))
    return SidebandChoice(picks[0], picks[1], mode)


def _epsilon(g_r, g_cr, n0=None, m0=None, xi=None):
    if g_r != 0.0:
        return g_cr / g_r
    if g_cr != 0.0:
        return INF
    # both couplings vanish: use the ratio of the Bessel functions themselves
    if n0 is not None and xi is not None:
        if n0 == m0:
            return 1.0
        jn = bessel_J(n0, xi) if xi > 0 else 0.0
        if xi > 0 and jn != 0.0:
            return bessel_J(m0, xi) / jn
        if xi == 0:
            # small-argument limit J_m/J_n ~ x^(|m|-|n|)
            if abs(m0) > abs(n0):
                return 0.0
            if abs(m0) < abs(n0):
                return INF
            return float((-1) ** ((m0 - n0) % 2))
    return 0.0


def _g_tilde(g_C, eps):
    if eps is INF:
        return 0.0
    return 2.0 * g_C / (1.0 + abs(eps))


def anisotropic_model(omega0_eff, omega_c_eff, g_r, g_cr, *, omega_c_prime=None, g_a2=0.0,
                      selection=None, epsilon=None):
    """Build an :class:`EffectiveModel` directly from effective parameters.

    g_C uses the magnitude convention sqrt(|w0 wc|)/2 so that models whose
    effective frequencies are both negative stay finite.
    """
    if omega_c_eff == 0.0:
        raise ZeroEffectiveCavity("effective cavity frequency is zero")
    g_C = 0.5 * math.sqrt(abs(omega0_eff * omega_c_eff))
    eps = _epsilon(g_r, g_cr) if epsilon is None else epsilon
    return EffectiveModel(
        g_r=g_r, g_cr=g_cr, epsilon=eps,
        omega0_eff=omega0_eff, omega_c_eff=omega_c_eff,
        eta_eff=omega0_eff / omega_c_eff,
        g_C=g_C, g_tilde_C=_g_tilde(g_C, eps),
        omega_c_prime=omega_c_eff if omega_c_prime is None else omega_c_prime,
        g_a2=g_a2, selection=selection,
    )


def reduced_model(eta_eff, lam, mu, omega0_eff=1.0):
    """Effective model at given eta_eff with couplings lam*g_C and mu*g_C."""
    omega_c_eff = omega0_eff / eta_eff
    g_C = 0.5 * math.sqrt(abs(omega0_eff * omega_c_eff))
    return anisotropic_model(omega0_eff, omega_c_eff, lam * g_C, mu * g_C)


def effective_model(params, mod, selection=None):
    """Derive the effective anisotropic Rabi model for a modulated qubit.

    Parameters
    ----------
    params : SystemParams
    mod : ModulationParams
    selection : SidebandChoice, optional
        Defaults to the min-detuning choice.

    Returns
    -------
    EffectiveModel

    Raises
    ------
    ZeroEffectiveCavity
        If (Delta_m0 - delta_n0)/2 vanishes.
    """
    if selection is None:
        selection = select_sidebands(params, mod)
    n0, m0 = selection.n0, selection.m0
    g_a2, wc = a2_amplitude(params)
    delta_n0, _ = sideband_detunings(params, mod, n0)
    _, Delta_m0 = sideband_detunings(params, mod, m0)
    g_r = params.g * bessel_J(n0, mod.xi)
    g_cr = params.g * bessel_J(m0, mod.xi)
    w0 = 0.5 * (Delta_m0 + delta_n0)
    wcav = 0.5 * (Delta_m0 - delta_n0)
    eps = _epsilon(g_r, g_cr, n0, m0, mod.xi)
    return anisotropic_model(w0, wcav, g_r, g_cr, omega_c_prime=wc, g_a2=g_a2,
                             selection=selection, epsilon=eps)


def sideband_window(n0, xi):
    """Orders retained around a selected sideband in the first rotating frame."""
    half = max(math.ceil(xi) + 15, 25)
    return np.arange(n0 - half, n0 + half + 1)


def rwa_validity(params, mod, model, threshold=RWA_THRESHOLD):
    """Report the smallness parameters behind the two-sideband approximation.

    ``passed`` is true when every ratio is below ``threshold``; a decoupled
    system (g = 0) passes unconditionally since nothing is discarded.
    """
    sel = model.selection
    if sel is None:
        raise ValueError("model carries no sideband selection")
    nu = mod.nu
    delta_n0, _ = sideband_detunings(params, mod, sel.n0)
    _, Delta_m0 = sideband_detunings(params, mod, sel.m0)
    window = np.union1d(sideband_window(sel.n0, mod.xi), sideband_window(sel.m0, mod.xi))
    jmax = float(np.max(np.abs(bessel_J_orders(window, mod.xi)))) if params.g > 0 else 0.0
    ratios = {
        "g/nu": params.g / nu,
        "max|gJ_n|/nu": params.g * jmax / nu,
        "|delta_n0|/nu": abs(delta_n0) / nu,
        "|Delta_m0|/nu": abs(Delta_m0) / nu,
    }
    g_a2, wc = model.g_a2, model.omega_c_prime
    a2 = {
        "g_a2/(2wc')": g_a2 / (2.0 * wc),
        "g_a2/g": g_a2 / params.g if params.g > 0 else 0.0,
    }
    ok = params.g == 0 or all(v < threshold for v in (*ratios.values(), *a2.values()))
    return RwaReport(ratios=ratios, a2_ratios=a2, threshold=threshold, passed=bool(ok))


def g_c_dissipative(model, kappa):
    """Critical coupling shifted by cavity loss: sqrt(|w0/wc| (wc^2 + kappa^2))/2."""
    if kappa < 0:
        raise DomainError("kappa must be >= 0")
    wc = model.omega_c_eff
    if wc == 0.0:
        raise ZeroEffectiveCavity("effective cavity frequency is zero")
    return 0.5 * math.sqrt(abs(model.omega0_eff / wc) * (wc * wc + kappa * kappa))
