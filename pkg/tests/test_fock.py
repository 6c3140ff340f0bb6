import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from rabiqpt.errors import CutoffTooSmall, HilbertSpaceTooLarge, NotConverged, StepSizeFailure
from rabiqpt.fock import (FockSpace, HamiltonianKind, Integrator, basis_state,
                          build_hamiltonian, coherent_amplitudes, cutoff_convergence,
                          ed_observables, evolve, fidelity_trace, ground_state_ed, hamiltonian,
                          heuristic_cutoff, is_expensive, product_state, rabi_initial_state)
from rabiqpt.model import (ModulationParams, SidebandChoice, SystemParams, anisotropic_model,
                           effective_model, reduced_model)

SPACE = FockSpace(6)
PARAMS = SystemParams.from_eta(100, g=0.06)
MOD = ModulationParams(1.5, 0.68)
MODEL = effective_model(PARAMS, MOD)


def test_space_layout():
    s = FockSpace(3)
    assert s.dim == 8 and s.index(1, 2) == 6
    comm = s.a @ s.adag - s.adag @ s.a
    # [a, a^dag] = 1 except at the truncation edge
    assert np.allclose(np.diag(comm)[[0, 1, 2, 4, 5, 6]], 1.0)
    assert np.allclose(s.sz @ basis_state(s, 1, 0), basis_state(s, 1, 0))
    with pytest.raises(ValueError):
        FockSpace(0)


def test_effective_decoupled_spectrum():
    m = anisotropic_model(0.4, 0.03, 0.0, 0.0)
    H = build_hamiltonian(HamiltonianKind.EFFECTIVE, SPACE, model=m)
    assert np.allclose(H, np.diag(np.diag(H)))
    n = np.arange(7)
    expected = np.concatenate([-0.2 + 0.03 * n, 0.2 + 0.03 * n])
    assert np.allclose(np.diag(H).real, expected, atol=1e-15)
    assert hamiltonian(HamiltonianKind.EFFECTIVE, SPACE, model=m).is_static


def test_lab_frame_matches_effective_form():
    params = SystemParams.from_eta(100, g=0.06, chi=0.5)
    mod = ModulationParams(0.0, 0.68)
    lab = build_hamiltonian(HamiltonianKind.LAB, SPACE, params, mod, t=0.0)
    g_a2 = params.chi * params.g ** 2
    wc = params.omega_c + 2 * g_a2
    eff = build_hamiltonian(HamiltonianKind.EFFECTIVE, SPACE,
                            model=anisotropic_model(1.0, wc, params.g, params.g))
    a, ad = SPACE.a, SPACE.adag
    stripped = lab - g_a2 * (a @ a + ad @ ad + np.eye(SPACE.dim))
    assert np.allclose(stripped, eff, atol=1e-15)


def test_first_rotating_resonant_term_is_stationary():
    # delta_{n0} = 0 when nu = w0 - wc
    mod = ModulationParams(1.2, 0.99)
    m = effective_model(PARAMS, mod, SidebandChoice(-1, -1))
    ham = hamiltonian(HamiltonianKind.FIRST_ROTATING, SPACE, PARAMS, mod, m)
    rot = ham.freqs[0]
    amps = ham.amps[0]
    idx = np.flatnonzero(rot == 0.0)
    assert idx.size == 1 and amps[idx[0]] == pytest.approx(m.g_r)
    T = 2 * math.pi / mod.nu
    ts = np.linspace(0, T, 401)[:-1]
    avg = np.mean([np.exp(1j * rot[idx[0]] * t) for t in ts])
    assert avg == 1.0


kinds = st.sampled_from(list(HamiltonianKind))


@given(kinds, st.floats(0.0, 0.2), st.floats(0.0, 5.0), st.floats(0.1, 2.0),
       st.floats(0.0, 3.0), st.floats(0.0, 50.0))
@settings(max_examples=100, deadline=None)
def test_hermitian(kind, g, xi, nu, chi, t):
    params = SystemParams.from_eta(100, g=g, chi=chi)
    mod = ModulationParams(xi, nu)
    m = effective_model(params, mod)
    H = build_hamiltonian(kind, SPACE, params, mod, m, t)
    scale = max(np.abs(H).max(), 1e-300)
    assert np.abs(H - H.conj().T).max() <= 1e-13 * scale


@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(0.05, 2.0), st.floats(0.001, 1.0))
def test_parity_commutes(g_r, g_cr, w0, wc):
    m = anisotropic_model(w0, wc, g_r, g_cr)
    H = build_hamiltonian(HamiltonianKind.EFFECTIVE, SPACE, model=m)
    P = np.diag(SPACE.parity_diag)
    assert np.abs(H @ P - P @ H).max() < 1e-15


@given(st.floats(0.0, 2.5), st.floats(0.0, 2.5))
@settings(max_examples=100, deadline=None)
def test_ed_eigenstates_have_parity(lam, mu):
    space = FockSpace(40)
    m = reduced_model(4.0, lam, mu)
    res = ground_state_ed(m, space, k=3)
    for j in range(3):
        assert abs(ed_observables(res.states[:, j], space).parity) > 1 - 1e-8
    assert np.all(np.diff(res.energies) >= 0)


def test_ed_decoupled():
    m = anisotropic_model(0.5, 0.02, 0.0, 0.0)
    res = ground_state_ed(m, FockSpace(10))
    assert res.energies[0] == pytest.approx(-0.25, abs=1e-14)
    assert res.gap == pytest.approx(min(0.02, 0.5), abs=1e-14)


def test_ed_normal_phase_is_parity_symmetric():
    res = ground_state_ed(reduced_model(100, 0.5, 0.5), FockSpace(40))
    obs = ed_observables(res.states[:, 0], FockSpace(40))
    assert abs(obs.x_mean) < 1e-8 and abs(obs.p_mean) < 1e-8


def test_ed_bias_selects_branch():
    space = FockSpace(150)
    m = reduced_model(32, 1.5, 1.5)
    res = ground_state_ed(m, space, bias=-1e-4)
    obs = ed_observables(res.states[:, 0], space)
    assert obs.x_mean > 3.0


def test_ed_limits():
    with pytest.raises(HilbertSpaceTooLarge):
        ground_state_ed(reduced_model(10, 0.5, 0.5), FockSpace(2000))
    with pytest.raises(CutoffTooSmall):
        ground_state_ed(reduced_model(100, 1.5, 1.5), FockSpace(20))


def test_observable_examples():
    vac = basis_state(SPACE, 0, 0)
    obs = ed_observables(vac, SPACE)
    assert (obs.x_mean, obs.p_mean, obs.n_mean) == (0.0, 0.0, 0.0)
    assert obs.var_x == pytest.approx(0.5) and obs.var_p == pytest.approx(0.5)
    assert obs.parity == -1.0
    coh = product_state(SPACE, [1.0, 0.0], coherent_amplitudes(SPACE, 0.1))
    assert ed_observables(coh, SPACE).x_mean == pytest.approx(math.sqrt(2) * 0.1, abs=1e-12)
    with pytest.raises(CutoffTooSmall):
        coherent_amplitudes(SPACE, 2.0)


def test_cutoff_heuristics():
    assert heuristic_cutoff(reduced_model(32, 1.5, 1.5)) == 189
    assert is_expensive(reduced_model(1000, 1.5, 1.5))
    assert not is_expensive(reduced_model(32, 1.5, 1.5))
    rep = cutoff_convergence(reduced_model(100, 0.0, 0.0), [2, 5, 10])
    assert rep.n_max <= 10
    rep = cutoff_convergence(reduced_model(32, 1.5, 1.5), [100, 125, 150, 175, 190, 215])
    assert rep.n_max <= 190 and rep.heuristic == 189
    with pytest.raises(NotConverged):
        cutoff_convergence(reduced_model(32, 1.5, 1.5), [30, 40])


# time evolution -----------------------------------------------------------

def test_decoupled_populations_constant():
    params = SystemParams.from_eta(100, g=0.0)
    psi0 = rabi_initial_state(SPACE, 0.1)
    ham = hamiltonian(HamiltonianKind.LAB, SPACE, params, MOD)
    for control in (Integrator(dt=0.01), Integrator("adaptive", rtol=1e-12, atol=1e-14)):
        tr = evolve(psi0, ham, np.linspace(0, 20, 11), control)
        pops = np.abs(tr.states) ** 2
        assert np.abs(pops - pops[0]).max() < 1e-10


def test_eigenstate_is_stationary():
    ham = hamiltonian(HamiltonianKind.EFFECTIVE, SPACE, model=MODEL)
    vals, vecs = np.linalg.eigh(ham.static)
    psi0 = vecs[:, 0]
    tr = evolve(psi0, ham, np.linspace(0, 200, 21), Integrator(dt=0.05))
    assert np.all(np.abs(tr.states @ psi0.conj()) > 1 - 1e-8)


def test_energy_conservation():
    space = FockSpace(20)
    m = reduced_model(32, 0.8, 0.4, omega0_eff=1.0)
    ham = hamiltonian(HamiltonianKind.EFFECTIVE, space, model=m)
    psi0 = rabi_initial_state(space, 0.5)
    tr = evolve(psi0, ham, np.linspace(0, 20 * math.pi, 11))
    e = np.real(np.einsum("ij,jk,ik->i", tr.states.conj(), ham.static, tr.states))
    assert np.abs(e - e[0]).max() < 1e-8 * abs(m.omega0_eff)


def test_resonant_jc_oscillation():
    # delta = w0 - wc = 0 and g_cr = 0: P_e(t) = cos^2(g_r t) from |e, 0>
    g = 0.05
    m = anisotropic_model(0.5, 0.5, g, 0.0)
    space = FockSpace(4)
    ham = hamiltonian(HamiltonianKind.RWA, space, model=m)
    ts = np.linspace(0, 2 * math.pi / g, 41)
    tr = evolve(basis_state(space, 1, 0), ham, ts, Integrator(dt=0.05))
    pe = np.abs(tr.states[:, space.index(1, 0)]) ** 2
    assert np.abs(pe - np.cos(g * ts) ** 2).max() < 1e-6


def test_rwa_frame_matches_effective_dynamics():
    # psi_rwa(t) = exp(iKt) exp(-iH_eff t) psi0 with K = w0/2 sz + wc n
    space = FockSpace(12)
    m = reduced_model(5.0, 0.7, 0.3)
    ham = hamiltonian(HamiltonianKind.RWA, space, model=m)
    H_eff = build_hamiltonian(HamiltonianKind.EFFECTIVE, space, model=m)
    K = 0.5 * m.omega0_eff * space.sz + m.omega_c_eff * space.num
    psi0 = rabi_initial_state(space, 0.3)
    ts = np.linspace(0, 30, 7)
    tr = evolve(psi0, ham, ts, Integrator(dt=0.01))
    for t, psi in zip(ts, tr.states):
        ref = scipy.linalg.expm(1j * K * t) @ scipy.linalg.expm(-1j * H_eff * t) @ psi0
        assert np.abs(psi - ref).max() < 1e-8


def test_rk4_is_fourth_order():
    space = FockSpace(8)
    m = effective_model(PARAMS, MOD)
    ham = hamiltonian(HamiltonianKind.FIRST_ROTATING, space, PARAMS, MOD, m)
    psi0 = rabi_initial_state(space, 0.1)
    ts = np.array([0.0, 40.0])
    ref = evolve(psi0, ham, ts, Integrator("adaptive", rtol=1e-13, atol=1e-14)).states[-1]
    errs = [np.linalg.norm(evolve(psi0, ham, ts, Integrator(dt=dt)).states[-1] - ref)
            for dt in (0.1, 0.05)]
    assert 12 < errs[0] / errs[1] < 20


def test_integrator_guards():
    with pytest.raises(ValueError):
        Integrator("adaptive", rtol=1e-6)
    with pytest.raises(ValueError):
        Integrator("euler")
    ham = hamiltonian(HamiltonianKind.EFFECTIVE, SPACE, model=MODEL)
    with pytest.raises(StepSizeFailure):
        evolve(basis_state(SPACE, 1, 0), ham, [0.0, 1e4], Integrator(dt=200.0))
    space = FockSpace(3)
    strong = reduced_model(2.0, 2.5, 2.5)
    ham = hamiltonian(HamiltonianKind.EFFECTIVE, space, model=strong)
    with pytest.raises(CutoffTooSmall):
        evolve(basis_state(space, 1, 0), ham, [0.0, 30.0], Integrator(dt=0.01), space=space)


def test_fidelity_bounds():
    ts = 2 * math.pi * np.linspace(0, 1, 11)
    tr = fidelity_trace(PARAMS, MOD, MODEL, ts, space=FockSpace(12))
    assert tr.fidelity[0] == 1.0 or abs(tr.fidelity[0] - 1.0) < 1e-15
    assert np.all((tr.fidelity >= 0) & (tr.fidelity <= 1))
    assert tr.fidelity.min() > 0.97
