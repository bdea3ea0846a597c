"""Qudit graph states, multipartite steering witnesses, and gate certificates."""

from .classical_bound import (
    CheatingStrategy,
    brute_force_bound,
    closed_form_bound,
    eigenvalue_bound_q2,
    eigenvalue_diagnostic,
    gamma,
    strategy_value,
)
from .fidelity_bounds import (
    DofSystem,
    FidelityWindow,
    build_hyper_state,
    dof_system,
    fidelity_threshold,
    multidof_bound,
    multidof_fidelity_verdict,
    multidof_kernel,
    multidof_steering_verdict,
    sandwich,
)
from .fullstate_witness import (
    TomographicTerm,
    decompose,
    evaluate_fullstate_kernel,
    ghz_state,
    w_state,
    wstate_verdict,
)
from .graph_states import (
    ColoredGraph,
    build_graph_state,
    edge_unitary,
    format_graph_document,
    greedy_coloring,
    parse_graph_document,
    preset,
    validate_coloring,
)
from .noise_robustness import (
    RobustnessPoint,
    SweepResult,
    matched_spec,
    maximally_mixed,
    sweep,
    threshold,
    werner_mix,
    write_csv,
)
from .oneway_computing import (
    ANGLE_SETTINGS,
    AngleSetting,
    BranchOutcome,
    GateTarget,
    computation_fidelity,
    fcomp_window,
    feedforward_fidelity,
    gate_target,
    input_state,
    process_and_average_bounds,
    run_branching,
    w4_primed_spec,
    w4_spec,
    w4box_primed_spec,
    w4box_spec,
    wcz_kernel,
)
from .tensor_core import (
    CapExceeded,
    DensityOperator,
    LinearOperator,
    NumericalFailure,
    QuditRegister,
    StateVector,
    apply_local,
    fidelity_with_pure,
    hermitian_max_eigenvalue,
    kron,
    measurement_basis,
    partial_trace,
    qft_matrix,
    random_state,
    register,
    uniform_register,
    z_generalized,
)
from .witness_kernel import (
    Constraint,
    SteeringReport,
    WitnessSpec,
    WitnessTerm,
    apply_local_conjugation,
    evaluate_kernel,
    format_spec,
    kernel_operator,
    parse_spec,
    relabel_parties,
    report,
    sample_term_probability,
    spec_from_graph,
    term_probabilities,
    term_projector,
)

__version__ = "0.1.0"
