"""Named system and interaction constructors for coupled self-sustained oscillators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hilbert import CompositeSpace, SystemSpec, local_ladder, number_like, spin_operators, tensor
from .lindblad import Dissipator, build_liouvillian, dissipator_part, hamiltonian_part

HAMILTONIAN_KINDS = (
    "coherent_exchange",
    "two_mode_squeeze",
    "spin_exchange_antisym",
    "jaynes_cummings",
    "anti_jaynes_cummings",
)
DISSIPATIVE_KINDS = (
    "dissipative_sum",
    "dissipative_sq_sum",
    "dissipative_cube_sum",
    "mixed_loss_a1_a2sq",
    "dissipative_adag1_a2",
)
INTERACTION_KINDS = HAMILTONIAN_KINDS + DISSIPATIVE_KINDS + ("none",)

_PAIR_KINDS = {
    "cv_cv": {
        "coherent_exchange", "two_mode_squeeze", "dissipative_sum", "dissipative_sq_sum",
        "dissipative_cube_sum", "mixed_loss_a1_a2sq", "dissipative_adag1_a2", "none",
    },
    "spin_spin": {"coherent_exchange", "spin_exchange_antisym", "dissipative_sum", "none"},
    "hybrid": {"jaynes_cummings", "anti_jaynes_cummings", "none"},
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class InteractionSpec:
    kind: str = "none"
    strength: float = 0.0

    def __post_init__(self):
        if self.kind not in INTERACTION_KINDS:
            raise ScenarioError(f"unknown interaction kind {self.kind!r}")


def local_terms(spec: SystemSpec) -> tuple[np.ndarray, list[Dissipator]]:
    """Free Hamiltonian and limit-cycle dissipators of one subsystem."""
    h = spec.omega * number_like(spec)
    if spec.kind == "spin":
        sp_, sm, sz = spin_operators(spec.s)
        return h, [Dissipator(spec.gamma_g, sp_ @ sz), Dissipator(spec.gamma_l, sm @ sz)]
    a, ad = local_ladder(spec)
    if spec.kind == "qubit":
        return h, [Dissipator(spec.gamma_g, ad), Dissipator(spec.gamma_l, a)]
    return h, [Dissipator(spec.gamma_g, ad), Dissipator(spec.gamma_l, a @ a)]


def uncoupled_liouvillian(specs) -> sp.csr_matrix:
    """Generator of two independent self-sustained oscillators."""
    a, b = specs
    ha, da = local_terms(a)
    hb, db = local_terms(b)
    ia, ib = np.eye(a.dim), np.eye(b.dim)
    h = tensor(ha, ib) + tensor(ia, hb)
    diss = [Dissipator(d.rate, tensor(d.jump_operator, ib)) for d in da]
    diss += [Dissipator(d.rate, tensor(ia, d.jump_operator)) for d in db]
    return build_liouvillian(h, diss)


def interaction_operator(specs, kind: str) -> np.ndarray:
    """Coupling Hamiltonian (unit strength) or jump operator of ``kind``."""
    a, b = specs
    l1, r1 = local_ladder(a)
    l2, r2 = local_ladder(b)
    i1, i2 = np.eye(a.dim), np.eye(b.dim)
    L1, R1 = tensor(l1, i2), tensor(r1, i2)
    L2, R2 = tensor(i1, l2), tensor(i1, r2)
    if kind == "coherent_exchange":
        return R1 @ L2 + L1 @ R2
    if kind == "two_mode_squeeze":
        return 1j * (L1 @ L2 - R1 @ R2)
    if kind == "spin_exchange_antisym":
        return 1j * (R1 @ L2 - L1 @ R2)
    if kind == "jaynes_cummings":
        # V = a S_+ + a^dag S_-
        return L1 @ R2 + R1 @ L2
    if kind == "anti_jaynes_cummings":
        return R1 @ R2 + L1 @ L2
    if kind == "dissipative_sum":
        return L1 + L2
    if kind == "dissipative_sq_sum":
        return L1 @ L1 + L2 @ L2
    if kind == "dissipative_cube_sum":
        return L1 @ L1 @ L1 + L2 @ L2 @ L2
    if kind == "mixed_loss_a1_a2sq":
        return L1 + L2 @ L2
    if kind == "dissipative_adag1_a2":
        return R1 + L2
    raise ScenarioError(f"no operator for interaction kind {kind!r}")


def interaction_liouvillian(specs, interaction: InteractionSpec) -> sp.csr_matrix:
    dim = specs[0].dim * specs[1].dim
    if interaction.kind == "none" or interaction.strength == 0:
        return sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
    op = interaction_operator(specs, interaction.kind)
    if interaction.kind in HAMILTONIAN_KINDS:
        return hamiltonian_part(interaction.strength * op)
    if interaction.strength < 0:
        raise ScenarioError("dissipative coupling rate must be non-negative")
    return dissipator_part(op, interaction.strength)


def check_compatible(space: CompositeSpace, interaction: InteractionSpec) -> None:
    if interaction.kind not in _PAIR_KINDS[space.pair_type]:
        raise ScenarioError(
            f"interaction {interaction.kind!r} is not defined for {space.pair_type} pairs"
        )


def build_scenario(specs, interaction: InteractionSpec):
    """Return ``(L0, L_int, L_total)`` for a pair of subsystems.

    ``L0`` holds the free Hamiltonians and local gain/loss; ``L_int`` the
    coupling (commutator for Hamiltonian kinds, dissipator otherwise).
    """
    specs = tuple(specs)
    space = CompositeSpace(specs)
    check_compatible(space, interaction)
    l0 = uncoupled_liouvillian(specs)
    lint = interaction_liouvillian(specs, interaction)
    return l0, lint, (l0 + lint).tocsr()
