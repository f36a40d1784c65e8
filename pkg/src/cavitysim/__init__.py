"""Two coupled qubit-cavity pairs with degenerate down-conversion in cavity 1."""
from .dynamics import IntegratorConfig, SweepResult, Timeline, evolve, sigma_z_expect, sweep
from .fock import (
    SUBSYSTEMS, EmbeddedOperator, OccupationLabel, SectorSpace, StateVector, build_full_space,
    build_sector, format_state, parse_state_expr, subsystem_operator,
)
from .hamiltonian import (
    CouplingSchedule, PlateauWindow, SystemParams, assemble_h, excitation_operator, k_of_t,
    plateau_window,
)
from .quantify import (
    DensityMatrix, EntropyRecord, density, entropy_timeline, mutual_information, partial_trace,
    reduced_density, renyi_entropy, vn_entropy,
)

__all__ = [
    "SUBSYSTEMS", "CouplingSchedule", "DensityMatrix", "EmbeddedOperator", "EntropyRecord",
    "IntegratorConfig", "OccupationLabel", "PlateauWindow", "SectorSpace", "StateVector",
    "SweepResult", "SystemParams", "Timeline", "assemble_h", "build_full_space", "build_sector",
    "density", "entropy_timeline", "evolve", "excitation_operator", "format_state", "k_of_t",
    "mutual_information", "parse_state_expr", "partial_trace", "plateau_window",
    "reduced_density", "renyi_entropy", "sigma_z_expect", "subsystem_operator", "sweep",
    "vn_entropy",
]
