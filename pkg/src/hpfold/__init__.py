"""HP-model lattice protein folding as quadratic binary optimization.

Encode a hydrophobic/polar bead chain on a 26-neighbor cubic lattice as a
penalized quadratic binary problem, minimize it with simulated annealing, an
exhaustive scan, or a CVaR-objective variational statevector loop, and decode
and validate the resulting conformations.
"""

from .model import (
    FeasibilityReport,
    HpSequence,
    conformation_to_xyz,
    count_contacts,
    decode_bitstring,
    encode_turns,
    enumerate_optimal,
    hydrophobic_pairs,
    lattice_moves,
    max_contacts,
    parse_sequence,
    turns_to_coordinates,
    validate,
)
from .polynomial import BinaryPolynomial
from .encoder import (
    AxisDraw,
    PenaltyConfig,
    QuboProblem,
    VariableLayout,
    assemble,
    build_continuity,
    build_crossing,
    build_objective,
    build_overlap,
    build_pair_exclusion,
    calibrate_penalties,
    draw_axes,
    qubo_from_json,
    qubo_to_json,
    turn_square,
)
from .ising import (
    IsingOperator,
    SampleSet,
    cvar,
    ising_energy,
    ising_from_json,
    ising_to_json,
    qubo_to_ising,
)
from .ansatz import AnsatzSpec, probabilities, simulate
from .solvers import (
    AnnealSchedule,
    SolveResult,
    VqeSettings,
    anneal,
    default_schedule,
    exhaustive,
    postselect,
    vqe_statevector,
)
from .pipeline import (
    PipelineResult,
    RunConfig,
    emit,
    load_result,
    run_pipeline,
    solve_sequence,
)

__version__ = "0.1.0"
