"""Phase steering of a Rabi model with a frequency-modulated qubit."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (INF, EffectiveModel, Marker, ModulationParams, RwaReport, SelectionMode,
                    SidebandChoice, SystemParams, a2_amplitude, anisotropic_model,
                    effective_model, g_c_dissipative, reduced_model, rwa_validity,
                    select_sidebands)
from .phases import (Phase, PhasePointResult, ReducedCouplings, TransitionOrder,
                     classify_phase, energy_derivatives, excitation_energy, find_crossing,
                     ground_energy, order_parameters, phase_point, reduced_couplings,
                     transition_order)
from .fock import (FockSpace, HamiltonianKind, Integrator, build_hamiltonian, ed_observables,
                   evolve, fidelity_trace, ground_state_ed, heuristic_cutoff)
from .sweep import Axis, GridResult, SweepSpec, export_table, figure_preset, run_sweep
