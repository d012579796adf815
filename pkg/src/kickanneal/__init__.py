"""Simulation of quantum annealing assisted by entangling kicks from ancilla qubits."""
from .exceptions import (
    ConfigurationError,
    DomainError,
    KickAnnealError,
    NormalizationError,
    NormDriftError,
    QuadratureError,
)
from .pauli import DensityMatrix, PauliString, QubitRegister, StateVector
from .models import KickSpec, ModelConfig, Schedule, ScheduledHamiltonian, build_model
from .evolution import EvolutionParams, apply_kick, evolve_run, ground_state_oracle
from .observables import RunResult, time_to_solution
from .experiment import ExperimentConfig, landscape, load_config, run, sweep
from .estimator import KickedAnnealer

__version__ = "0.1.0"
