"""Formation control toolkit over complex agent positions.

Centroid-based transformations (Jacobi and fixed presets), diagonal
stabilizer synthesis for closed loops carrying the inverse transform,
potential-field collision avoidance in both coordinate domains, and
fixed-step closed-loop simulation with scenario configs and reporting.
"""

from .errors import (
    CoincidentAgents,
    ConfigError,
    DegenerateCondition,
    DegenerateTransform,
    FormationError,
    NonstabilizableMinor,
    NumericalBlowup,
    SearchExhausted,
    SingularBand,
    SingularBlock,
    SingularTransform,
)
from .potential import (
    PotentialMatrix,
    PotentialParams,
    distance_in_xi,
    min_pair_distance,
    pair_gradient_coeff,
    pair_potential,
    potential_matrix,
    total_potential,
    transformed_potential,
)
from .scenario import Scenario, load_scenario, scenario_from_dict
from .sim import (
    ConstantScale,
    ControllerConfig,
    DesiredTrajectory,
    LineSinePath,
    SimEvent,
    SimState,
    SineScale,
    StaticPoint,
    TrajectoryLog,
    controller_double,
    controller_single,
    equivalence_report,
    hexagon_basis,
    run,
    step,
    trajectory_deviation,
    with_domain,
)
from .stabilizer import (
    DoubleStabilizerResult,
    SearchPolicy,
    StabilizerResult,
    build_block_matrix,
    complex_quadratic_roots,
    schur_eig_step,
    stability_inequality_diagnostic,
    stabilize_double,
    stabilize_single,
    verify_half_plane,
)
from .transforms import (
    AgentConfig,
    TransformPair,
    WeightMatrix,
    apply_weight,
    build_jacobi,
    build_phi6,
    invert_3x3_closed_form,
    leading_minors,
    map_points,
    pair_from_forward,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
