"""Distributionally robust SVM solvers over Wasserstein balls with l1, l2,
or l-inf transport costs: epigraphical cone projections, exact single-sample
prox updates, and incremental outer loops (subgradient, proximal point, and
a hybrid of the two)."""

from .data import (
    DataError,
    Dataset,
    ParseError,
    Sample,
    gen_synthetic,
    load_dataset,
    parse_libsvm,
    signed_samples,
    write_libsvm,
)
from .epigraph import (
    ConePoint,
    cone_norm,
    proj_cone_l1,
    proj_cone_l2,
    proj_cone_linf,
)
from .oracles import (
    OracleReport,
    kkt_residual,
    oracle_grid_min,
    oracle_prox_subgradient,
)
from .quartic import solve_quartic_real_roots
from .solver import (
    Constant,
    Geometric,
    Iterate,
    PolyHarmonic,
    PolySqrt,
    PRESETS,
    ProblemConfig,
    SolveTrace,
    SwitchRule,
    TraceRecord,
    objective,
    run_hybrid,
    run_ippa,
    run_isg,
    step_size,
    subgradient_minibatch,
)
from .subproblems import (
    CascadeError,
    DegenerateKappaError,
    InfeasibleSubproblemError,
    KktPair,
    NumericalFailureError,
    ProxInstance,
    ball_hyperplane_l2,
    equality_ball_projection,
    eval_hinge_pieces,
    msa_secant,
    p_sigma,
    ppa_l2,
    prox_point,
    prox_point_l1,
    prox_point_l2,
    prox_point_linf,
    rescale_for_c,
)

__version__ = "0.1.0"
