"""Model builders: NN-TFIM, ILR-TFIM and the two-qubit H2 Hamiltonian.

Each builder returns a :class:`ScheduledHamiltonian` acting on the system
qubits together with the initial state on the full system+ancilla register.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .exceptions import ConfigurationError
from .pauli import PauliString, QubitRegister, StateVector, basis_state, product_state

H2_BOND_LENGTHS = (0.7, 2.0)
H2_LABELS = ("II", "IZ", "ZI", "ZZ", "XX", "YY")


@dataclass(frozen=True)
class Schedule:
    kind: Literal["constant", "exp_decay"]
    amplitude: float
    tau: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("constant", "exp_decay"):
            raise ConfigurationError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "exp_decay" and not (self.tau is not None and self.tau > 0):
            raise ConfigurationError("exp_decay schedule needs tau > 0")

    @classmethod
    def constant(cls, amplitude: float) -> "Schedule":
        return cls("constant", float(amplitude))

    @classmethod
    def exp_decay(cls, amplitude: float, tau: float) -> "Schedule":
        return cls("exp_decay", float(amplitude), float(tau))

    def value(self, t: float) -> float:
        if self.kind == "constant":
            return self.amplitude
        return self.amplitude * math.exp(-t / self.tau)

    def integral(self, t: float) -> float:
        """Closed-form integral of ``value`` from 0 to ``t``."""
        if self.kind == "constant":
            return self.amplitude * t
        return self.amplitude * self.tau * (1.0 - math.exp(-t / self.tau))

    @property
    def peak(self) -> float:
        return abs(self.amplitude)


@dataclass(frozen=True)
class ScheduledHamiltonian:
    terms: tuple[tuple[Schedule, PauliString], ...]
    register: QubitRegister

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for _, p in self.terms:
            if p.max_qubit >= self.register.n_qubits:
                raise ConfigurationError(f"term {p} lies outside {self.register}")

    def at(self, t: float) -> list[PauliString]:
        return [p.scaled(s.value(t)) for s, p in self.terms]

    def coefficients(self, t: float) -> np.ndarray:
        return np.array([s.value(t) * p.coeff for s, p in self.terms])

    def select(self, kind: str) -> "ScheduledHamiltonian":
        return ScheduledHamiltonian(tuple(tp for tp in self.terms if tp[0].kind == kind), self.register)

    @property
    def mixer(self) -> "ScheduledHamiltonian":
        return self.select("exp_decay")

    @property
    def problem(self) -> "ScheduledHamiltonian":
        return self.select("constant")

    @property
    def max_coefficient(self) -> float:
        return max((s.peak * abs(p.coeff) for s, p in self.terms), default=0.0)

    def __add__(self, other: "ScheduledHamiltonian") -> "ScheduledHamiltonian":
        if other.register != self.register:
            raise ConfigurationError("cannot add Hamiltonians on different registers")
        return ScheduledHamiltonian(self.terms + other.terms, self.register)


class KickSpec(BaseModel):
    """Entangling kick ``exp(-i theta (sum_l sigma^A_l) (x) (sum_i P^S_i))``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    ancilla_axis: Literal["X", "Y", "Z"] = "Z"
    system_axis: Literal["X", "Y", "Z", "XY"] = "X"
    theta: float = 0.0
    dt_k: Optional[float] = Field(default=None, gt=0)
    n_k: int = Field(default=0, ge=0)
    mode: Literal["impulsive", "continuous"] = "impulsive"
    continuous_rate: Optional[float] = None

    def kick_times(self) -> np.ndarray:
        if self.mode != "impulsive" or self.n_k == 0:
            return np.zeros(0)
        if self.dt_k is None:
            raise ConfigurationError("impulsive kicks need dt_k")
        return np.arange(self.n_k) * self.dt_k

    @property
    def rate(self) -> float:
        """Angle per unit time used by continuous mode."""
        if self.continuous_rate is not None:
            return self.continuous_rate
        if self.dt_k is None:
            raise ConfigurationError("continuous kicks need continuous_rate or dt_k")
        return self.theta / self.dt_k


class ModelConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: Literal["nn_tfim", "ilr_tfim", "h2"]
    n_system: int = Field(ge=1)
    n_ancilla: int = Field(default=0, ge=0)
    theta_xx0: Optional[float] = None
    bond_length: Optional[float] = None
    coefficients: Optional[dict[str, float]] = None
    coefficient_file: Optional[str] = None
    theta_mixer0: float
    tau: float = Field(gt=0)
    kick: KickSpec = KickSpec()

    @model_validator(mode="after")
    def _check_presence(self):
        if self.model in ("nn_tfim", "ilr_tfim"):
            if self.theta_xx0 is None:
                raise ValueError("theta_xx0 is required for TFIM models")
            if self.bond_length is not None or self.coefficients is not None or self.coefficient_file:
                raise ValueError("bond_length/coefficients apply only to the h2 model")
        else:
            if self.theta_xx0 is not None:
                raise ValueError("theta_xx0 applies only to TFIM models")
            if self.bond_length is None and self.coefficients is None and not self.coefficient_file:
                raise ValueError("h2 needs bond_length, coefficients or coefficient_file")
        return self

    @property
    def register(self) -> QubitRegister:
        return QubitRegister(self.n_system, self.n_ancilla)

    def resolved(self) -> "ModelConfig":
        """Fill kick defaults: H2 kicks evenly spaced over ``[0, tau)``."""
        kick = self.kick
        if kick.dt_k is None and kick.n_k > 0:
            kick = kick.model_copy(update={"dt_k": self.tau / kick.n_k})
        return self.model_copy(update={"kick": kick})


def _require_tfim(cfg: ModelConfig):
    if cfg.n_system < 2:
        raise ConfigurationError("TFIM models need n_system >= 2 (no bonds otherwise)")
    if not cfg.theta_xx0 or cfg.theta_xx0 <= 0:
        raise ConfigurationError("theta_xx0 must be > 0")
    if cfg.theta_mixer0 <= 0:
        raise ConfigurationError("theta_mixer0 must be > 0")


def _tfim_initial_state(reg: QubitRegister) -> StateVector:
    # |1...1>_S (x) |0...0>_A
    return basis_state(reg, (1 << reg.n_system) - 1)


def _z_mixer(cfg: ModelConfig) -> list[tuple[Schedule, PauliString]]:
    sched = Schedule.exp_decay(cfg.theta_mixer0, cfg.tau)
    return [(sched, PauliString(1.0, {i: "Z"})) for i in range(cfg.n_system)]


def nn_bonds(n_system: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n_system - 1)]


def all_to_all_bonds(n_system: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n_system) for j in range(i + 1, n_system)]


def tfim_problem_terms(n_system: int, theta_xx0: float, long_range: bool = False, rescale: bool = True) -> list[PauliString]:
    if long_range:
        coupling = theta_xx0 / (0.5 * n_system) if rescale else theta_xx0
        bonds = all_to_all_bonds(n_system)
    else:
        coupling = theta_xx0
        bonds = nn_bonds(n_system)
    return [PauliString(-coupling, {i: "X", j: "X"}) for i, j in bonds]


def build_nn_tfim(cfg: ModelConfig) -> tuple[ScheduledHamiltonian, StateVector]:
    _require_tfim(cfg)
    reg = cfg.register
    const = Schedule.constant(1.0)
    terms = _z_mixer(cfg) + [(const, p) for p in tfim_problem_terms(cfg.n_system, cfg.theta_xx0)]
    return ScheduledHamiltonian(tuple(terms), reg), _tfim_initial_state(reg)


def build_ilr_tfim(cfg: ModelConfig) -> tuple[ScheduledHamiltonian, StateVector]:
    _require_tfim(cfg)
    reg = cfg.register
    const = Schedule.constant(1.0)
    problem = tfim_problem_terms(cfg.n_system, cfg.theta_xx0, long_range=True)
    terms = _z_mixer(cfg) + [(const, p) for p in problem]
    return ScheduledHamiltonian(tuple(terms), reg), _tfim_initial_state(reg)


def load_coefficient_file(path) -> dict[str, float]:
    """Parse a ``pauli_label coefficient`` table; ``#`` starts a comment."""
    coeffs: dict[str, float] = {}
    text = path.read_text() if hasattr(path, "read_text") else Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigurationError(f"{path}:{lineno}: expected 'label coefficient', got {raw!r}")
        label, value = parts
        if set(label) - set("IXYZ"):
            raise ConfigurationError(f"{path}:{lineno}: bad Pauli label {label!r}")
        coeffs[label] = coeffs.get(label, 0.0) + float(value)
    return coeffs


def h2_coefficients(bond_length: float) -> dict[str, float]:
    for known in H2_BOND_LENGTHS:
        if math.isclose(bond_length, known, abs_tol=1e-9):
            res = resources.files("kickanneal") / "data" / f"h2_bond_{known:.1f}.txt"
            return load_coefficient_file(res)
    raise ConfigurationError(
        f"no embedded H2 data for bond length {bond_length}; supply coefficients or coefficient_file"
    )


def h2_problem_terms(coeffs: dict[str, float]) -> list[PauliString]:
    return [PauliString.from_label(label, c) for label, c in coeffs.items()]


def _h2_coeffs(cfg: ModelConfig) -> dict[str, float]:
    if cfg.coefficients is not None:
        return dict(cfg.coefficients)
    if cfg.coefficient_file:
        return load_coefficient_file(cfg.coefficient_file)
    return h2_coefficients(cfg.bond_length)


def build_h2(cfg: ModelConfig) -> tuple[ScheduledHamiltonian, StateVector]:
    if cfg.n_system != 2:
        raise ConfigurationError("the H2 model is encoded on exactly 2 system qubits")
    if cfg.theta_mixer0 <= 0:
        raise ConfigurationError("theta_mixer0 must be > 0")
    coeffs = _h2_coeffs(cfg)
    for label in coeffs:
        if len(label) != 2:
            raise ConfigurationError(f"H2 label {label!r} must act on 2 qubits")
    reg = cfg.register
    mixer = Schedule.exp_decay(cfg.theta_mixer0, cfg.tau)
    const = Schedule.constant(1.0)
    terms = [(mixer, PauliString(1.0, {i: "X"})) for i in range(2)]
    terms += [(const, p) for p in h2_problem_terms(coeffs)]
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    return ScheduledHamiltonian(tuple(terms), reg), product_state(reg, [minus] * reg.n_qubits)


BUILDERS = {"nn_tfim": build_nn_tfim, "ilr_tfim": build_ilr_tfim, "h2": build_h2}


def build_model(cfg: ModelConfig) -> tuple[ScheduledHamiltonian, StateVector]:
    return BUILDERS[cfg.model](cfg)


def problem_terms(cfg: ModelConfig) -> list[PauliString]:
    """Problem Hamiltonian on the system register alone."""
    if cfg.model == "nn_tfim":
        return tfim_problem_terms(cfg.n_system, cfg.theta_xx0)
    if cfg.model == "ilr_tfim":
        return tfim_problem_terms(cfg.n_system, cfg.theta_xx0, long_range=True)
    return h2_problem_terms(_h2_coeffs(cfg))


def bond_count(cfg: ModelConfig) -> int:
    if cfg.model == "nn_tfim":
        return cfg.n_system - 1
    if cfg.model == "ilr_tfim":
        return cfg.n_system * (cfg.n_system - 1) // 2
    raise ConfigurationError("bond count is defined for TFIM models only")


def build_kick_generator(spec: KickSpec, register: QubitRegister) -> list[PauliString]:
    """All ``N_S * N_A`` strings ``P^S_i sigma^A_l`` with unit coefficient."""
    if register.n_ancilla < 1:
        raise ConfigurationError("kicks need at least one ancilla qubit")
    return [
        PauliString(1.0, {i: spec.system_axis, a: spec.ancilla_axis})
        for i in register.system_qubits()
        for a in register.ancilla_qubits()
    ]
