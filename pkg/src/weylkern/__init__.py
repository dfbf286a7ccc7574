"""weylkern: Weyl-alternating integral kernels on flat symmetric spaces.

Exact root-system combinatorics, reflection-group kernel evaluation with
cancellation control, asymptotic constants with verification oracles,
killed and Dyson-type diffusion tools, and an exhaustive rational decision
procedure for the Killing-max property.
"""

from weylkern.asymptotics import (
    AsymptoticForm,
    at_zero,
    heat_small_t,
    newton_asym,
    normalization_identity,
    poisson_boundary_asym,
    spherical_asym,
)
from weylkern.dyson import (
    dyson_exit_law,
    dyson_exit_normalized,
    dyson_heat,
    dyson_heat_law,
    dyson_heat_normalized,
    dyson_mass,
    dyson_newton,
    dyson_poisson,
    killed_heat,
    killed_poisson,
    newton_time_integral,
    semigroup_defect,
)
from weylkern.kernels import (
    CancellationOverflow,
    DomainError,
    KernelValue,
    c_constant,
    curved_heat,
    det_heat_a,
    heat_via_spherical,
    kernel_w,
    kernel_w_batch,
    spherical_psi,
    suggest_heat_bits,
)
from weylkern.killingmax import (
    ORDER_BUDGET,
    FacePairReport,
    SystemReport,
    dominance_gap_check,
    expected_count,
    killing_max_holds,
    verify_face_pair,
    verify_system,
    w_set_exact,
)
from weylkern.montecarlo import (
    ComparisonReport,
    EmpiricalMeasure,
    SimConfig,
    compare_density,
    compare_exit,
    pde_residual,
    simulate,
)
from weylkern.rootsys import (
    ChamberError,
    ChamberPoint,
    EnumerationLimit,
    RootSubset,
    RootSystem,
    RootSystemError,
    RootSystemSpec,
    WeylElement,
    build_root_system,
    chamber_point,
    enumerate_weyl,
    face_representative,
    parabolic_order,
    pi_over,
    project_to_chamber,
    rho_of,
    spec_from_name,
    stabilizer,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticForm",
    "CancellationOverflow",
    "ChamberError",
    "ChamberPoint",
    "ComparisonReport",
    "DomainError",
    "EmpiricalMeasure",
    "EnumerationLimit",
    "FacePairReport",
    "KernelValue",
    "RootSubset",
    "RootSystem",
    "RootSystemError",
    "RootSystemSpec",
    "SimConfig",
    "SystemReport",
    "WeylElement",
    "at_zero",
    "build_root_system",
    "c_constant",
    "chamber_point",
    "compare_density",
    "compare_exit",
    "curved_heat",
    "det_heat_a",
    "dominance_gap_check",
    "dyson_exit_law",
    "dyson_heat",
    "dyson_heat_law",
    "dyson_mass",
    "dyson_newton",
    "dyson_poisson",
    "enumerate_weyl",
    "face_representative",
    "heat_small_t",
    "heat_via_spherical",
    "kernel_w",
    "kernel_w_batch",
    "killed_heat",
    "killed_poisson",
    "killing_max_holds",
    "newton_asym",
    "newton_time_integral",
    "normalization_identity",
    "parabolic_order",
    "pde_residual",
    "pi_over",
    "poisson_boundary_asym",
    "project_to_chamber",
    "rho_of",
    "semigroup_defect",
    "simulate",
    "spec_from_name",
    "spherical_asym",
    "spherical_psi",
    "stabilizer",
    "verify_face_pair",
    "verify_system",
    "dyson_exit_normalized",
    "dyson_heat_normalized",
    "expected_count",
    "suggest_heat_bits",
    "w_set_exact",
    "ORDER_BUDGET",
    "__version__",
]
