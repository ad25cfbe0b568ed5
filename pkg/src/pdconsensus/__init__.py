"""Distributed consensus optimization with certified parameter windows.

Agents on a connected weighted graph minimize the average of their private
smooth costs by mixing iterates through the graph Laplacian while a dual
accumulator cancels the disagreement force.  The package provides the
gradient and forward-difference (function values only) variants of the
method, closed-form stepsize/gain windows with per-round descent
certificates, benchmark problems, and a config-driven CLI that writes
traces, constants reports, and figures.
"""

from .diagnostics import (
    IterRecord,
    TRACE_COLUMNS,
    check_envelope,
    check_projection_envelope,
    descent_residual_first_order,
    descent_residual_zeroth_order,
    estimator_stack,
    fit_rate,
    gradient_stack,
    lyapunov_parts,
    pl_margins,
    pl_violations,
    progress_series,
    projection_gap_margins,
    read_trace_csv,
    write_metrics_csv,
    write_trace_csv,
)
from .engine import (
    ALGORITHMS,
    NetworkState,
    RunConfig,
    Trace,
    extra_reference_trajectory,
    init_state,
    run,
    state_trajectory,
    step_first_order,
    step_variant,
    step_zeroth_order,
)
from .graphs import (
    Graph,
    SpectralData,
    build_graph,
    complete_graph,
    is_connected,
    load_edge_list,
    path_graph,
    random_geometric_graph,
    ring_graph,
    save_edge_list,
    spectral_data,
)
from .params import (
    Condition,
    Feasibility,
    FirstOrderConstants,
    ProblemConstants,
    ZerothOrderConstants,
    first_order_constants,
    gap_envelope,
    geometric_cross_sum_bound,
    linear_envelope,
    projected_linear_envelope,
    select_first_order_params,
    select_zeroth_order_params,
    sum_penalty_envelope,
    zeroth_order_constants,
    zo_gap_envelope,
    zo_linear_envelope,
    zo_projected_linear_envelope,
    zo_sum_envelope,
)
from .problems import (
    CostOracle,
    ProblemInstance,
    check_gradient,
    finite_diff_gradient,
    load_problem,
    logistic_nonconvex_problem,
    ls_problem_from_data,
    problem_from_spec,
    quadratic_problem,
    rank_deficient_ls_problem,
    save_problem,
    sine_pl_problem,
)
from .zeroth import (
    DeltaSchedule,
    delta_square_sum,
    estimate_gradient,
    estimator_error_bound,
)

__version__ = "0.1.0"
