"""Workbench for commuting non-Pauli stabilizer lattice models.

Subpackages cover: cell complexes (hypercubic and branched simplicial tori),
mod-2/mod-4 cochain algebra, the magic-stabilizer operator normal form and
Hamiltonian builders, homology and ground-space counting, extended logical
operators and gate checks, and finite-temperature memory experiments.
"""

from cubicmem.cells import (
    CellComplex,
    CellRef,
    build_freudenthal_torus,
    build_hypercubic_torus,
    dual_map,
)
from cubicmem.cochains import (
    Cochain,
    cup,
    cup1,
    d,
    identity_suite,
    integrate,
    pontryagin_integral,
    wrap_cocycle,
)
from cubicmem.homology import (
    code_parameters,
    enumerate_flat_sectors,
    gsd_monomial,
    homology_basis,
    min_weight_logical,
)
from cubicmem.logical import (
    borromean_phase,
    braiding_commutator,
    ccz_operator,
    em_dual_4d,
    fusion_square,
    logical_action,
    loop_toric_4d,
    magnetic,
    verify_ccz_symmetry,
    wilson,
)
from cubicmem.manifolds import get_model, manifold_library
from cubicmem.stabilizers import (
    MagicOperator,
    build_cubic,
    commutes,
    syndrome,
)
from cubicmem.thermal import (
    LatticeState,
    NoiseModel,
    UpdateRule,
    critical_temperature,
    estimate_p_crit,
    memory_experiment,
    model_critical_temperature,
    saw_entropy,
    transition_rate_table,
)

__all__ = [
    "CellComplex",
    "CellRef",
    "Cochain",
    "LatticeState",
    "MagicOperator",
    "NoiseModel",
    "UpdateRule",
    "borromean_phase",
    "braiding_commutator",
    "build_cubic",
    "build_freudenthal_torus",
    "build_hypercubic_torus",
    "ccz_operator",
    "code_parameters",
    "commutes",
    "critical_temperature",
    "cup",
    "cup1",
    "d",
    "dual_map",
    "em_dual_4d",
    "enumerate_flat_sectors",
    "estimate_p_crit",
    "fusion_square",
    "get_model",
    "gsd_monomial",
    "homology_basis",
    "identity_suite",
    "integrate",
    "logical_action",
    "loop_toric_4d",
    "magnetic",
    "manifold_library",
    "memory_experiment",
    "min_weight_logical",
    "model_critical_temperature",
    "pontryagin_integral",
    "saw_entropy",
    "syndrome",
    "transition_rate_table",
    "verify_ccz_symmetry",
    "wilson",
    "wrap_cocycle",
]
