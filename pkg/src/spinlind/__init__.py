"""Dissipative Ising chains in tilted fields: populations, subspaces and heat currents."""
from .errors import (
    ArgumentError,
    CapacityError,
    ConfigError,
    ConsistencyError,
    DegenerateFieldError,
    DegenerateTransitionWarning,
    NumericError,
    SpinlindError,
    SweepPointError,
    UnderdeterminedError,
)
from .model import ChainSpec, CircuitParams, build_hamiltonian, circuit_to_field, index_set
from .spectral import (
    EigenSystem,
    build_channels,
    detect_subspaces,
    diagonalize,
    eigendecompose,
    group_by_frequency,
    transition_coefficient,
)
from .bath import bath_rates, bose_occupation
from .kinetics import build_rate_matrix, evolve_populations, solve_steady_state
from .transport import (
    ModulatorScenario,
    bulk_temperature_sweep,
    heat_currents,
    run_modulator,
    solve_chain,
)
from .liouville import Superoperator, build_liouvillian, coherence_decay_check, steady_density
from .config import RunConfig, parse_config
from .verify import run_suites

__version__ = "0.1.0"
