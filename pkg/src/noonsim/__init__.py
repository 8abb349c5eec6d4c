"""Deterministic simulator of photonic NOON-state generation in two
microwave resonators coupled by a single transmon qutrit."""

from .device import (
    DeviceParams,
    DerivedCouplings,
    crosstalk_g_ab,
    default_params,
    derive_couplings,
    device_params_from_config,
    ghz,
    mhz,
    quality_factor,
    t_cav,
    tau_total,
)
from .experiments import (
    DEFAULT_G_MHZ,
    OptimizeResult,
    ResultRow,
    ResultTable,
    SweepSpec,
    coherence_scaled,
    fidelity,
    golden_section_maximize,
    optimize_g,
    sweep_n,
    sweep_t_g,
)
from .hamiltonian import (
    RotatingTerm,
    TimeDepOperator,
    h_lab_frame,
    h_stage1_pulse,
    h_stage1_resonant,
    h_stage2_pulse,
    h_stage2_resonant,
    jc_a_ge,
    jc_b_fe,
    pulse_drive,
)
from .lindblad import (
    CollapseChannel,
    IntegratorConfig,
    SegmentStats,
    SimResult,
    collapse_set_for,
    evolve_segment,
    lindblad_rhs,
    liouvillian_matrix,
    propagate_expm_oracle,
    standard_collapse_set,
    unitary_evolve,
)
from .protocol import (
    Schedule,
    Segment,
    build_schedule,
    ideal_intermediate_state,
    ideal_noon_state,
    initial_state,
    protocol_space,
    run_protocol,
)
from .qspace import (
    HilbertSpace,
    annihilation,
    embed,
    expectation,
    ket_to_dm,
    overlap,
    qutrit_projector,
    qutrit_transition,
)

__version__ = "0.1.0"
