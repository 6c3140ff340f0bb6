"""Truncated qubit x Fock numerics: Hamiltonians, time evolution and exact diagonalisation.

Basis ordering is qubit (x) cavity with the qubit index 0 = |g>, 1 = |e>, so
the amplitude of |q, n> sits at ``q * (n_max + 1) + n`` and sigma_z|e> = +|e>.
States are plain complex numpy vectors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sps
from scipy.integrate import solve_ivp

from .bessel import bessel_J_orders
from .errors import CutoffTooSmall, HilbertSpaceTooLarge, NotConverged, StepSizeFailure
from .model import sideband_detunings, sideband_window
from .phases import classify_phase, order_parameters, reduced_couplings

MAX_DENSE_DIM = 2000
LEAK_TOL = 1e-8
NORM_TOL = 1e-6
COHERENT_TAIL_TOL = 1e-10
STEPS_PER_PERIOD = 100


class HamiltonianKind(str, enum.Enum):
    LAB = "lab"
    FIRST_ROTATING = "first_rotating"
    RWA = "rwa"
    EFFECTIVE = "effective"


@dataclass(frozen=True)
class FockSpace:
    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def dim(self):
        return 2 * (self.n_max + 1)

    @property
    def n_levels(self):
        return self.n_max + 1

    @cached_property
    def a_mode(self):
        return np.diag(np.sqrt(np.arange(1, self.n_levels, dtype=float)), 1)

    def _lift(self, qubit, cavity):
        return np.kron(qubit, cavity).astype(complex)

    @cached_property
    def a(self):
        return self._lift(np.eye(2), self.a_mode)

    @cached_property
    def adag(self):
        return self.a.conj().T

    @cached_property
    def num(self):
        return self._lift(np.eye(2), np.diag(np.arange(self.n_levels, dtype=float)))

    @cached_property
    def sz(self):
        return self._lift(np.diag([-1.0, 1.0]), np.eye(self.n_levels))

    @cached_property
    def sp(self):
        # sigma_+ = |e><g|
        return self._lift(np.array([[0.0, 0.0], [1.0, 0.0]]), np.eye(self.n_levels))

    @cached_property
    def sm(self):
        return self.sp.conj().T

    @cached_property
    def x(self):
        return (self.a + self.adag) / math.sqrt(2.0)

    @cached_property
    def p(self):
        return 1j * (self.adag - self.a) / math.sqrt(2.0)

    @cached_property
    def parity_diag(self):
        n = np.arange(self.n_levels)
        return np.concatenate([-((-1.0) ** n), (-1.0) ** n])

    def index(self, qubit, n):
        return qubit * self.n_levels + n


def basis_state(space, qubit, n):
    psi = np.zeros(space.dim, complex)
    psi[space.index(qubit, n)] = 1.0
    return psi


def coherent_amplitudes(space, alpha):
    """Fock amplitudes of |alpha> truncated at n_max.

    Raises
    ------
    CutoffTooSmall
        If more than 1e-10 of the probability lies above n_max.
    """
    n = np.arange(space.n_levels)
    log_mag = -0.5 * abs(alpha) ** 2 + np.where(
        n > 0, n * np.log(abs(alpha) if alpha != 0 else 1.0), 0.0) - 0.5 * np.array(
        [math.lgamma(k + 1) for k in n])
    amps = np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n) if alpha != 0 else (n == 0) * 1.0
    tail = 1.0 - float(np.sum(np.abs(amps) ** 2))
    if tail > COHERENT_TAIL_TOL:
        raise CutoffTooSmall(f"coherent state alpha={alpha} loses {tail:.2e} above n_max={space.n_max}")
    return amps.astype(complex)


def product_state(space, qubit_amps, cavity_amps):
    return np.kron(np.asarray(qubit_amps, complex), cavity_amps)


def rabi_initial_state(space, alpha):
    """(|g> + |e>)|alpha> / sqrt(2)."""
    return product_state(space, np.array([1.0, 1.0]) / math.sqrt(2.0),
                         coherent_amplitudes(space, alpha))


@dataclass(frozen=True)
class Hamiltonian:
    """H(t) = static + sum_k [c_k(t) O_k + h.c.] with c_k(t) = sum_j A_kj exp(i w_kj t)."""

    static: np.ndarray
    ops: tuple = ()
    amps: tuple = ()
    freqs: tuple = ()

    @cached_property
    def _ops_h(self):
        return tuple(o.conj().T for o in self.ops)

    @property
    def is_static(self):
        return not self.ops

    def coefficients(self, t):
        return [complex(np.dot(a, np.exp(1j * w * t))) for a, w in zip(self.amps, self.freqs)]

    def matrix(self, t=0.0):
        h = self.static.astype(complex)
        for c, o, oh in zip(self.coefficients(t), self.ops, self._ops_h):
            h = h + c * o + np.conj(c) * oh
        return h

    def apply(self, t, psi):
        out = self.static @ psi
        for c, o, oh in zip(self.coefficients(t), self.ops, self._ops_h):
            out = out + c * (o @ psi) + np.conj(c) * (oh @ psi)
        return out

    @cached_property
    def max_frequency(self):
        """Largest frequency present: the fastest drive, or the spectral-radius bound
        ||static|| + sum_k 2 sum|c_k| ||O_k||, whichever is larger."""
        drive = 0.0
        for a, w in zip(self.amps, self.freqs):
            live = np.abs(a) > 0
            if live.any():
                drive = max(drive, float(np.max(np.abs(w[live]))))
        radius = 0.0
        if np.any(self.static):
            radius = float(np.max(np.abs(np.linalg.eigvalsh(self.static))))
        radius += sum(2 * float(np.sum(np.abs(a))) * np.linalg.norm(o, 2)
                      for a, o in zip(self.amps, self.ops))
        return max(drive, radius)


def _effective_static(model, space):
    sp, sm, a, ad = space.sp, space.sm, space.a, space.adag
    return (0.5 * model.omega0_eff * space.sz + model.omega_c_eff * space.num
            + model.g_r * (sp @ a + ad @ sm) + model.g_cr * (sp @ ad + sm @ a))


def hamiltonian(kind, space, params=None, mod=None, model=None):
    """Time-dependent Hamiltonian of the requested frame.

    ``LAB`` and ``FIRST_ROTATING`` need ``params`` and ``mod``;
    ``FIRST_ROTATING`` also takes the sideband choice from ``model``.
    ``RWA`` and ``EFFECTIVE`` need ``model`` only.
    """
    kind = HamiltonianKind(kind)
    zero = np.zeros((space.dim, space.dim), complex)
    if kind is HamiltonianKind.EFFECTIVE:
        return Hamiltonian(_effective_static(model, space))
    if kind is HamiltonianKind.RWA:
        # delta_n0 = w0~ - wc~ and Delta_m0 = w0~ + wc~
        d = model.omega0_eff - model.omega_c_eff
        D = model.omega0_eff + model.omega_c_eff
        return Hamiltonian(zero, (space.sp @ space.a, space.sp @ space.adag),
                           (np.array([model.g_r]), np.array([model.g_cr])),
                           (np.array([d]), np.array([D])))
    g_a2 = params.chi * params.g ** 2 / params.omega0
    a, ad = space.a, space.adag
    if kind is HamiltonianKind.LAB:
        static = (params.omega_c * space.num + 0.5 * params.omega0 * space.sz
                  + params.g * (space.sp + space.sm) @ (a + ad)
                  + g_a2 * (a @ a + ad @ ad + 2 * space.num + np.eye(space.dim)))
        return Hamiltonian(static, (space.sz,), (np.array([0.25 * mod.xi * mod.nu]),),
                           (np.array([mod.nu]),))
    sel = model.selection
    n_orders = sideband_window(sel.n0, mod.xi)
    m_orders = sideband_window(sel.m0, mod.xi)
    delta, _ = sideband_detunings(params, mod, n_orders)
    _, Delta = sideband_detunings(params, mod, m_orders)
    ops = [space.sp @ a, space.sp @ ad]
    amps = [params.g * bessel_J_orders(n_orders, mod.xi),
            params.g * bessel_J_orders(m_orders, mod.xi)]
    freqs = [delta, Delta]
    if g_a2 > 0:
        wc = params.omega_c + 2 * g_a2
        ops.append(a @ a)
        amps.append(np.array([g_a2]))
        freqs.append(np.array([-2 * wc]))
    return Hamiltonian(zero, tuple(ops), tuple(amps), tuple(freqs))


def build_hamiltonian(kind, space, params=None, mod=None, model=None, t=0.0):
    """Dense Hermitian matrix of the requested Hamiltonian at time t."""
    return hamiltonian(kind, space, params, mod, model).matrix(t)


@dataclass(frozen=True)
class Integrator:
    """Propagation control.

    ``method`` is ``"rk4"`` (fixed step, default ``dt`` = 2 pi / (100 w_max), half the
    largest admissible step 2 pi / (50 w_max))
    or ``"adaptive"`` (scipy DOP853 at relative tolerance ``rtol``).
    """

    method: str = "rk4"
    dt: float | None = None
    rtol: float = 1e-10
    atol: float = 1e-12

    def __post_init__(self):
        if self.method not in ("rk4", "adaptive"):
            raise ValueError(f"unknown integrator {self.method!r}")
        if self.method == "adaptive" and self.rtol > 1e-9:
            raise ValueError("adaptive integration requires rtol <= 1e-9")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float | None


def default_dt(ham):
    w = ham.max_frequency
    return 2 * math.pi / (STEPS_PER_PERIOD * w) if w > 0 else math.inf


def _rk4_step(ham, t, psi, dt):
    f = ham.apply
    k1 = -1j * f(t, psi)
    k2 = -1j * f(t + 0.5 * dt, psi + 0.5 * dt * k1)
    k3 = -1j * f(t + 0.5 * dt, psi + 0.5 * dt * k2)
    k4 = -1j * f(t + dt, psi + dt * k3)
    return psi + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _check_state(psi, space, t):
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > NORM_TOL:
        raise StepSizeFailure(f"norm drift {drift:.2e} at t={t}")
    if space is not None:
        top = space.n_max - 1
        pops = np.abs(psi) ** 2
        leak = sum(pops[space.index(q, n)] for q in (0, 1) for n in (top, top + 1))
        if leak > LEAK_TOL:
            raise CutoffTooSmall(f"top-level population {leak:.2e} at t={t}")


def evolve(psi0, ham, times, control=Integrator(), space=None):
    """Integrate i dpsi/dt = H(t) psi and sample on ``times``.

    The norm is never renormalised: a drift above 1e-6 raises
    :class:`StepSizeFailure`. When ``space`` is given, population above
    1e-8 in the two highest Fock levels raises :class:`CutoffTooSmall`.
    """
    times = np.asarray(times, float)
    psi = np.asarray(psi0, complex)
    out = np.empty((len(times), psi.size), complex)
    if control.method == "adaptive":
        sol = solve_ivp(lambda t, y: -1j * ham.apply(t, y), (times[0], times[-1]), psi,
                        method="DOP853", t_eval=times, rtol=control.rtol, atol=control.atol)
        if not sol.success:
            raise StepSizeFailure(sol.message)
        out[:] = sol.y.T
        for t, state in zip(times, out):
            _check_state(state, space, t)
        return Trajectory(times, out, None)

    dt = control.dt if control.dt is not None else default_dt(ham)
    out[0] = psi
    t = times[0]
    for i in range(1, len(times)):
        span = times[i] - times[i - 1]
        steps = max(1, math.ceil(span / dt - 1e-9)) if math.isfinite(dt) else 1
        h = span / steps
        for _ in range(steps):
            psi = _rk4_step(ham, t, psi, h)
            t += h
        t = times[i]
        _check_state(psi, space, t)
        out[i] = psi
    return Trajectory(times, out, dt)


@dataclass(frozen=True)
class FidelityTrace:
    times: np.ndarray
    fidelity: np.ndarray
    dt: float | None


def fidelity_trace(params, mod, model, times, alpha=0.1, space=None, psi0=None,
                   control=Integrator()):
    """Overlap F(t) = |<phi(t)|psi(t)>|^2 between the full first-rotating-frame
    evolution and the two-sideband approximation.

    Both evolutions use the same fixed step, chosen from the faster
    (first-rotating-frame) Hamiltonian unless ``control.dt`` is set.
    """
    if space is None:
        space = FockSpace(24)
    if psi0 is None:
        psi0 = rabi_initial_state(space, alpha)
    full = hamiltonian(HamiltonianKind.FIRST_ROTATING, space, params, mod, model)
    rwa = hamiltonian(HamiltonianKind.RWA, space, model=model)
    if control.method == "rk4" and control.dt is None:
        control = Integrator("rk4", dt=default_dt(full))
    phi = evolve(psi0, full, times, control, space).states
    psi = evolve(psi0, rwa, times, control, space).states
    fid = np.abs(np.einsum("ij,ij->i", phi.conj(), psi)) ** 2
    return FidelityTrace(np.asarray(times, float), np.clip(fid, 0.0, 1.0), control.dt)


# exact diagonalisation ------------------------------------------------------

@dataclass(frozen=True)
class EDResult:
    energies: np.ndarray
    states: np.ndarray  # columns are eigenvectors in the full basis
    parities: np.ndarray

    @property
    def gap(self):
        return float(self.energies[1] - self.energies[0])


@dataclass(frozen=True)
class EDObservables:
    x_mean: float
    p_mean: float
    n_mean: float
    var_x: float
    var_p: float
    parity: float


def effective_sparse(model, space, bias=0.0):
    """Sparse effective static Hamiltonian, optionally with a bias * x term."""
    n = np.arange(space.n_levels, dtype=float)
    eye2 = sps.identity(2, format="csr")
    a = sps.diags(np.sqrt(n[1:]), 1, format="csr")
    ad = a.T.tocsr()
    sp = sps.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
    sm = sp.T.tocsr()
    sz = sps.diags([-1.0, 1.0], format="csr")
    eyef = sps.identity(space.n_levels, format="csr")
    H = (0.5 * model.omega0_eff * sps.kron(sz, eyef)
         + model.omega_c_eff * sps.kron(eye2, sps.diags(n))
         + model.g_r * (sps.kron(sp, a) + sps.kron(sm, ad))
         + model.g_cr * (sps.kron(sp, ad) + sps.kron(sm, a)))
    if bias:
        H = H + bias / math.sqrt(2.0) * sps.kron(eye2, a + ad)
    return H.tocsr()


def _lowest(H, k):
    if H.shape[0] > MAX_DENSE_DIM:
        raise HilbertSpaceTooLarge(
            f"dense block of dimension {H.shape[0]} exceeds {MAX_DENSE_DIM}; "
            "lower n_max or use a smaller eta")
    k = min(k, H.shape[0])
    vals, vecs = scipy.linalg.eigh(H, subset_by_index=[0, k - 1])
    scale = np.max(np.sum(np.abs(H), axis=1))
    res = np.linalg.norm(H @ vecs - vecs * vals, axis=0)
    if np.any(res > 1e-10 * max(scale, 1.0)):
        raise NotConverged(f"eigen-residual {res.max():.2e} exceeds tolerance")
    return vals, vecs


def _top_occupancy(psi, space):
    pops = np.abs(psi) ** 2
    top = space.n_max - 1
    return sum(pops[space.index(q, n)] for q in (0, 1) for n in (top, top + 1))


def ground_state_ed(model, space, bias=0.0, k=2):
    """Lowest ``k`` eigenpairs of the effective Hamiltonian.

    Without bias the two parity sectors are diagonalised separately, so the
    dense-size limit applies per sector (n_max + 1 <= 2000).

    Raises
    ------
    CutoffTooSmall
        If the ground state puts more than 1e-8 in the two highest Fock levels.
    """
    H = effective_sparse(model, space, bias)
    if bias:
        vals, vecs = _lowest(H.toarray(), k)
        par = np.real(np.einsum("ij,i,ij->j", vecs.conj(), space.parity_diag, vecs))
    else:
        blocks = []
        for sign in (1.0, -1.0):
            idx = np.flatnonzero(space.parity_diag == sign)
            v, w = _lowest(H[idx][:, idx].toarray(), k)
            full = np.zeros((space.dim, w.shape[1]), w.dtype)
            full[idx] = w
            blocks.append((v, full, np.full(v.size, sign)))
        vals = np.concatenate([b[0] for b in blocks])
        vecs = np.concatenate([b[1] for b in blocks], axis=1)
        par = np.concatenate([b[2] for b in blocks])
        order = np.argsort(vals, kind="stable")[:k]
        vals, vecs, par = vals[order], vecs[:, order], par[order]
    if _top_occupancy(vecs[:, 0], space) > LEAK_TOL:
        raise CutoffTooSmall(f"ground state reaches the top of the n_max={space.n_max} truncation")
    return EDResult(vals, vecs, par)


def ed_observables(psi, space):
    """Quadrature moments, photon number and parity of a normalised state."""
    psi = np.asarray(psi, complex)
    xpsi, ppsi = space.x @ psi, space.p @ psi
    xm = float(np.real(np.vdot(psi, xpsi)))
    pm = float(np.real(np.vdot(psi, ppsi)))
    x2 = float(np.real(np.vdot(xpsi, xpsi)))
    p2 = float(np.real(np.vdot(ppsi, ppsi)))
    nm = float(np.real(np.vdot(psi, space.num @ psi)))
    par = float(np.real(np.vdot(psi, space.parity_diag * psi)))
    return EDObservables(xm, pm, nm, x2 - xm * xm, p2 - pm * pm, par)


def heuristic_cutoff(model):
    """Seed cutoff 4(|a|^2 + 6|a| + 10) from the analytic coherent amplitude |a| = |<x>|/sqrt(2)."""
    rc = reduced_couplings(model)
    x, p, *_ = order_parameters(rc, model, classify_phase(rc))
    amp = max(abs(x), abs(p)) / math.sqrt(2.0)
    return math.ceil(4 * (amp * amp + 6 * amp + 10))


@dataclass(frozen=True)
class CutoffReport:
    n_max: int
    heuristic: int
    expensive: bool
    energy: float
    gap: float


def cutoff_convergence(model, n_max_seq, step=25, tol=1e-8):
    """Smallest cutoff whose ground energy and gap move by < tol |w0~| under n_max -> n_max + step."""
    seed = heuristic_cutoff(model)
    scale = tol * abs(model.omega0_eff)
    cache = {}

    def solve(n):
        if n not in cache:
            try:
                cache[n] = ground_state_ed(model, FockSpace(n))
            except CutoffTooSmall:
                cache[n] = None
        return cache[n]

    for n in sorted(n_max_seq):
        lo, hi = solve(n), solve(n + step)
        if lo is None or hi is None:
            continue
        if abs(lo.energies[0] - hi.energies[0]) < scale and abs(lo.gap - hi.gap) < scale:
            return CutoffReport(n, seed, seed + 1 > MAX_DENSE_DIM, float(lo.energies[0]), lo.gap)
    raise NotConverged(f"no cutoff in {list(n_max_seq)} met the {tol:g} criterion")


def is_expensive(model):
    """True when the heuristic cutoff would exceed the dense-size limit."""
    return heuristic_cutoff(model) + 1 > MAX_DENSE_DIM
