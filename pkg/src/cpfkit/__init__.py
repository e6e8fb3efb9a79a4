"""Fidelities, error bounds and advantage maps for channel position finding
on bosonic pure-loss channels."""

from .bounds import (
    BoundsResult,
    advantage_certificate,
    classical_perr_lower,
    evaluate_bounds,
    log10_bound_ratio,
    perr_lower,
    perr_lower_general,
    perr_upper,
    perr_upper_general,
    perr_upper_raw,
    pgm_pure_upper,
    ratio_bound,
)
from .errors import CpfError, DomainError, InvalidStateError, NumericError
from .gaussian import (
    GaussianState,
    PhysicalityReport,
    check_physical,
    coherent_state,
    displace,
    fidelity_from_arrays,
    gaussian_fidelity,
    keep_modes,
    photon_number,
    pure_loss,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    thermal_fidelity_oracle,
    thermal_state,
    vacuum_state,
)
from .probes import (
    ProbeSpec,
    ProtocolKind,
    bipartite_probe,
    build_probe,
    classical_probe,
    idler_free_probe,
    max_symmetric_correlation,
    mixed_probe,
    symmetric_cm,
)
from .protocols import (
    FidelityReport,
    Scenario,
    apply_hypothesis,
    bipartite_fidelity,
    bipartite_fidelity_numeric,
    classical_fidelity,
    idler_free_binary_fidelity,
    output_fidelity,
    output_pair_arrays,
    reduced_output_pair,
    reduction_symplectic,
    traced_block_cm,
)
from .scan import (
    PROTOCOL_IDS,
    WORKERS_ENV_VAR,
    ExtremePointCheck,
    KappaResult,
    RegionGrid,
    RegionSpec,
    SweepSpec,
    expansion_coefficient,
    extreme_point_check,
    idler_free_fidelity,
    optimize_kappa,
    region_scan,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BoundsResult",
    "CpfError",
    "DomainError",
    "ExtremePointCheck",
    "FidelityReport",
    "GaussianState",
    "InvalidStateError",
    "KappaResult",
    "NumericError",
    "PROTOCOL_IDS",
    "PhysicalityReport",
    "ProbeSpec",
    "ProtocolKind",
    "RegionGrid",
    "RegionSpec",
    "Scenario",
    "SweepSpec",
    "WORKERS_ENV_VAR",
    "advantage_certificate",
    "apply_hypothesis",
    "bipartite_fidelity",
    "bipartite_fidelity_numeric",
    "bipartite_probe",
    "build_probe",
    "check_physical",
    "classical_fidelity",
    "classical_perr_lower",
    "classical_probe",
    "coherent_state",
    "displace",
    "evaluate_bounds",
    "expansion_coefficient",
    "extreme_point_check",
    "fidelity_from_arrays",
    "gaussian_fidelity",
    "idler_free_binary_fidelity",
    "idler_free_fidelity",
    "idler_free_probe",
    "keep_modes",
    "log10_bound_ratio",
    "max_symmetric_correlation",
    "mixed_probe",
    "optimize_kappa",
    "output_fidelity",
    "output_pair_arrays",
    "perr_lower",
    "perr_lower_general",
    "perr_upper",
    "perr_upper_general",
    "perr_upper_raw",
    "pgm_pure_upper",
    "photon_number",
    "pure_loss",
    "ratio_bound",
    "reduced_output_pair",
    "reduction_symplectic",
    "region_scan",
    "symmetric_cm",
    "symplectic_eigenvalues",
    "symplectic_form",
    "sweep",
    "tensor",
    "thermal_fidelity_oracle",
    "thermal_state",
    "traced_block_cm",
    "vacuum_state",
]
