"""Controlling pairs for Lipschitz functions at desk scale.

A pair (x, y) controls f: R^m -> R^d when |f(x) - y| < 1 in the max norm.
This package builds controlling pair sets when a point sequence is dense
enough, builds evading Lipschitz functions when it is not, and certifies
both with exact rational arithmetic over unions of axis-aligned boxes.
"""

from .controller1d import (
    build_block,
    build_schedule,
    dense_cluster_pairs,
    schedule_blocks,
)
from .controllermd import (
    BallAssignment,
    MdParams,
    build_md,
    derive_params,
    epsilon_cover,
    half_balls_for,
    linear_map_g,
    new_ball_centers,
)
from .feasibility import (
    ControlPair,
    ControlVerdict,
    EvaderParams,
    FeasTrace,
    RadialPLFunction,
    check_claim21,
    compute_params,
    evader_trace,
    feasible_control_check,
    reconstruct_evader,
    start_point,
)
from .fixedpoint import Crossing, MovingMap, find_crossing, retract
from .geometry import (
    Box,
    Region,
    intersect_cube,
    max_norm,
    measure,
    minkowski_expand,
    pick_point,
    point,
    scalar,
    subtract_cube,
)
from .harness import (
    GameReport,
    SampledLipschitz,
    audit_edges,
    audit_max_norm,
    game_run,
    lattice_counterexample,
    sample_lipschitz,
)
from .sequences import (
    DensityReport,
    PointSeq,
    counting_function,
    gen_lattice,
    gen_pow2,
    gen_power_grid,
    gen_remark_A,
    local_count,
)

__version__ = "0.1.0"
