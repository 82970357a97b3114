"""Pseudo-dimension and learnability tools for 2-local quantum circuits."""
from __future__ import annotations

from .core import (
    TOL,
    DensityMatrix,
    DimensionError,
    Effect,
    PureState,
    QuantumOperation,
    ValidationError,
    apply_operation,
    basis_state,
    born_probability,
    choi_state,
    haar_random_unitary,
    product_state,
)
from .circuit import (
    Circuit,
    CircuitArchitecture,
    GatePlacement,
    circuit_output_probability,
    count_architecture_bound,
    enumerate_architectures,
    random_circuit,
    simulate_operation_circuit,
    simulate_unitary_circuit,
    validate_architecture,
)
from .circuit_io import CircuitFormatError, dump_circuit, load_circuit, parse_circuit
from .polynomial import (
    ModulusSquared,
    SparsePolynomial,
    amplitude_polynomial,
    probability_polynomial,
    variable_input_polynomial,
)
from .shattering import (
    BudgetExceeded,
    FunctionTable,
    fat_shattering_check,
    find_shattered_set,
    is_pseudo_shattered,
)
from .bounds import (
    BoundInputs,
    bound_fixed,
    bound_operations,
    bound_variable,
    sample_complexity,
    warren_count,
)
from .state_family import state_family_functions, state_family_state
from .learner import (
    LearningConfig,
    TrainingExample,
    erm_fit,
    evaluate_hypothesis,
    generalization_experiment,
    generate_dataset,
)

__version__ = "0.1.0"
