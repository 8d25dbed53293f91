"""Steady-state phase synchronization of coupled quantum self-sustained oscillators."""
from .hilbert import CompositeSpace, SystemSpec, fock_ladder, grouping_permutation, spin_operators, tensor
from .infomeasures import (
    mutual_information,
    negativity,
    relative_entropy_of_coherence,
    von_neumann_entropy,
    x_state_discord,
)
from .lindblad import Dissipator, build_liouvillian, steady_state, truncation_check
from .phase import (
    PhaseDistribution,
    hybrid_weight,
    radial_weight_husimi,
    radial_weight_wigner,
    relative_phase_distribution,
    single_phase_distribution,
    theta_weight_spin,
)
from .perturb import perturbative_steady_state, pseudoinverse_apply, subset_closure_check
from .scenarios import InteractionSpec, build_scenario
from .subsets import SubsetReport, harmonic_report, peak_positions, subset_members, sync_measure

__version__ = "0.1.0"

__all__ = [
    "CompositeSpace",
    "Dissipator",
    "InteractionSpec",
    "PhaseDistribution",
    "SubsetReport",
    "SystemSpec",
    "build_liouvillian",
    "build_scenario",
    "fock_ladder",
    "grouping_permutation",
    "harmonic_report",
    "hybrid_weight",
    "mutual_information",
    "negativity",
    "peak_positions",
    "perturbative_steady_state",
    "pseudoinverse_apply",
    "radial_weight_husimi",
    "radial_weight_wigner",
    "relative_entropy_of_coherence",
    "relative_phase_distribution",
    "single_phase_distribution",
    "spin_operators",
    "steady_state",
    "subset_closure_check",
    "subset_members",
    "sync_measure",
    "tensor",
    "theta_weight_spin",
    "truncation_check",
    "von_neumann_entropy",
    "x_state_discord",
]
