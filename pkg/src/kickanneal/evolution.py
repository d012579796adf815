"""Real-time propagation, kicks and ground-state oracles.

The propagator splits the Hamiltonian into groups of mutually commuting
Pauli strings. Each group is exponentiated exactly (diagonal groups as a
phase vector, others as a product of closed-form rotations
``cos(a) - i sin(a) P``), and the groups are composed with a symmetric
second-order splitting whose coefficients are sampled at the step midpoint.
"""
from __future__ import annotations

import math
import warnings
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import ConfigurationError, NormDriftError
from .models import KickSpec, Schedule, ScheduledHamiltonian, build_kick_generator
from .observables import RunResult
from .pauli import (
    PauliString,
    QubitRegister,
    StateVector,
    apply_pauli_array,
    dense_matrix,
    expectation_array,
    pauli_kernel,
)

NORM_ABORT = 1e-8
KICK_ALIGN_TOL = 1e-9


class EvolutionParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: Optional[float] = Field(default=None, gt=0)
    t_end: Optional[float] = Field(default=None, gt=0)
    record_stride: int = Field(default=10, ge=1)


def _group_terms(terms: Sequence[PauliString]) -> list[list[int]]:
    """Greedy partition into commuting groups; all diagonal strings share group 0."""
    diag = [k for k, p in enumerate(terms) if p.is_diagonal]
    groups: list[list[int]] = [diag] if diag else []
    offdiag: list[list[int]] = []
    for k, p in enumerate(terms):
        if p.is_diagonal:
            continue
        for g in offdiag:
            if all(p.commutes_with(terms[j]) for j in g):
                g.append(k)
                break
        else:
            offdiag.append([k])
    return groups + offdiag


class _DiagonalGroup:
    def __init__(self, idx: list[int], terms: Sequence[PauliString], n: int):
        self.idx = np.asarray(idx)
        self.signs = np.array([pauli_kernel(terms[k], n)[1].real for k in idx])

    def apply(self, psi: np.ndarray, coeffs: np.ndarray, h: float) -> np.ndarray:
        energies = coeffs[self.idx] @ self.signs
        return psi * np.exp(-1j * h * energies)


class _RotationGroup:
    def __init__(self, idx: list[int], terms: Sequence[PauliString], n: int):
        self.idx = list(idx)
        self.kernels = [pauli_kernel(terms[k], n) for k in idx]

    def apply(self, psi: np.ndarray, coeffs: np.ndarray, h: float) -> np.ndarray:
        for k, (perm, phase) in zip(self.idx, self.kernels):
            angle = coeffs[k] * h
            if angle == 0.0:
                continue
            psi = math.cos(angle) * psi - 1j * math.sin(angle) * (phase * psi[perm])
        return psi


class Propagator:
    """Second-order split-step propagator for a scheduled Hamiltonian."""

    def __init__(self, schedules: Sequence[Schedule], terms: Sequence[PauliString], register: QubitRegister):
        self.schedules = list(schedules)
        self.terms = list(terms)
        self.register = register
        self.base = np.array([p.coeff for p in self.terms])
        n = register.n_qubits
        self.groups = []
        for g in _group_terms(self.terms):
            if self.terms[g[0]].is_diagonal:
                self.groups.append(_DiagonalGroup(g, self.terms, n))
            else:
                self.groups.append(_RotationGroup(g, self.terms, n))

    @classmethod
    def from_hamiltonian(cls, h: ScheduledHamiltonian) -> "Propagator":
        return cls([s for s, _ in h.terms], [p for _, p in h.terms], h.register)

    def coefficients(self, t: float) -> np.ndarray:
        return self.base * np.array([s.value(t) for s in self.schedules])

    def step(self, psi: np.ndarray, t: float, dt: float) -> np.ndarray:
        if not self.groups:
            return psi
        coeffs = self.coefficients(t + 0.5 * dt)
        *outer, inner = self.groups
        for g in outer:
            psi = g.apply(psi, coeffs, 0.5 * dt)
        psi = inner.apply(psi, coeffs, dt)
        for g in reversed(outer):
            psi = g.apply(psi, coeffs, 0.5 * dt)
        return psi


def trotter_step(state: StateVector, h: ScheduledHamiltonian, t: float, dt: float) -> StateVector:
    psi = Propagator.from_hamiltonian(h).step(state.amplitudes, t, dt)
    return StateVector(state.register, psi)


def _check_commuting(gen: Sequence[PauliString]) -> None:
    for a in range(len(gen)):
        for b in range(a + 1, len(gen)):
            if not gen[a].commutes_with(gen[b]):
                raise RuntimeError(f"kick generator strings {gen[a]} and {gen[b]} do not commute")


def _kick_array(psi: np.ndarray, gen: Sequence[PauliString], theta: float, n: int) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    for p in gen:
        psi = c * psi - 1j * s * apply_pauli_array(psi, p, n, with_coeff=False)
    return psi


def apply_kick(state: StateVector, spec: KickSpec) -> StateVector:
    """``exp(-i theta sum_{l,i} sigma^A_l P^S_i)`` as a product of commuting rotations."""
    gen = build_kick_generator(spec, state.register)
    _check_commuting(gen)
    if spec.theta == 0.0:
        return state.copy()
    psi = _kick_array(state.amplitudes, gen, spec.theta, state.register.n_qubits)
    return StateVector(state.register, psi)


def default_dt(h: ScheduledHamiltonian, kick: Optional[KickSpec] = None) -> float:
    """``min(dt_k/4, tau/2000, 1e-3/theta_max)`` over whatever scales are present."""
    theta_max = h.max_coefficient
    candidates = []
    if kick is not None and kick.n_k > 0 and kick.dt_k:
        candidates.append(kick.dt_k / 4)
    if kick is not None and kick.mode == "continuous":
        theta_max = max(theta_max, abs(kick.rate))
    taus = [s.tau for s, _ in h.terms if s.kind == "exp_decay"]
    if taus:
        candidates.append(min(taus) / 2000)
    if theta_max > 0:
        candidates.append(1e-3 / theta_max)
    return min(candidates) if candidates else 1e-3


def default_t_end(h: ScheduledHamiltonian, kick: Optional[KickSpec] = None) -> float:
    taus = [s.tau for s, _ in h.terms if s.kind == "exp_decay"]
    t_end = 10 * max(taus) if taus else 1.0
    if kick is not None and kick.mode == "impulsive" and kick.n_k > 0:
        t_end = max(t_end, (kick.n_k - 1) * kick.dt_k)
    return t_end


def resolve_timing(h: ScheduledHamiltonian, kick: Optional[KickSpec], params: EvolutionParams) -> tuple[float, int]:
    """Return ``(dt, n_steps)`` with every impulsive kick on a step boundary."""
    dt = params.dt if params.dt is not None else default_dt(h, kick)
    t_end = params.t_end if params.t_end is not None else default_t_end(h, kick)
    if kick is not None and kick.mode == "impulsive" and kick.n_k > 0:
        if kick.dt_k is None:
            raise ConfigurationError("impulsive kicks need dt_k")
        ratio = kick.dt_k / dt
        if params.dt is not None:
            if abs(ratio - round(ratio)) > KICK_ALIGN_TOL * max(1.0, ratio) or round(ratio) < 1:
                raise ConfigurationError(f"dt={dt} does not divide the kick interval dt_k={kick.dt_k}")
        else:
            dt = kick.dt_k / math.ceil(ratio - KICK_ALIGN_TOL)
        if t_end < (kick.n_k - 1) * kick.dt_k:
            raise ConfigurationError("t_end ends before the last kick")
    # cover at least t_end; the tolerance keeps exact multiples from gaining a step
    n_steps = max(1, math.ceil(t_end / dt - KICK_ALIGN_TOL))
    return dt, n_steps


def _kick_steps(kick: Optional[KickSpec], dt: float) -> dict[int, int]:
    if kick is None or kick.mode != "impulsive" or kick.n_k == 0 or kick.theta == 0.0:
        return {}
    steps: dict[int, int] = {}
    for t_k in kick.kick_times():
        s = int(round(t_k / dt))
        steps[s] = steps.get(s, 0) + 1
    return steps


def evolve_run(
    hamiltonian: ScheduledHamiltonian,
    initial: StateVector,
    kick: Optional[KickSpec],
    params: EvolutionParams,
    observers: Optional[dict[str, Callable[[StateVector], float]]] = None,
    e_target: Optional[float] = None,
    norm_abort: float = NORM_ABORT,
) -> RunResult:
    """Propagate ``initial`` and record observables every ``record_stride`` steps.

    Impulsive kicks are applied at their instants before that instant is
    recorded; continuous kicks join the splitting as a constant-schedule
    group. The reduced energy always uses ``hamiltonian`` (system terms only).
    """
    reg = hamiltonian.register
    n = reg.n_qubits
    if initial.register != reg:
        raise ConfigurationError("initial state and Hamiltonian live on different registers")
    dt, n_steps = resolve_timing(hamiltonian, kick, params)

    schedules = [s for s, _ in hamiltonian.terms]
    terms = [p for _, p in hamiltonian.terms]
    gen: list[PauliString] = []
    if kick is not None and (kick.n_k > 0 or kick.mode == "continuous"):
        gen = build_kick_generator(kick, reg)
        _check_commuting(gen)
    if kick is not None and kick.mode == "continuous" and kick.rate != 0.0:
        rate = Schedule.constant(kick.rate)
        schedules += [rate] * len(gen)
        terms += gen
    prop = Propagator(schedules, terms, reg)
    kicks = _kick_steps(kick, dt)

    energy_schedules = np.array([s for s, _ in hamiltonian.terms])
    energy_terms = [p for _, p in hamiltonian.terms]
    for p in energy_terms:
        if p.max_qubit >= reg.n_system:
            raise ConfigurationError(f"system Hamiltonian term {p} touches an ancilla")

    observers = observers or {}
    rows: dict[str, list[float]] = {k: [] for k in ["t", "energy", "norm", *observers]}
    psi = initial.amplitudes.copy()
    stride = params.record_stride
    for s in range(n_steps + 1):
        t = s * dt
        for _ in range(kicks.get(s, 0)):
            psi = _kick_array(psi, gen, kick.theta, n)
        if s % stride == 0 or s == n_steps:
            norm = float(np.linalg.norm(psi))
            if abs(norm - 1.0) > norm_abort:
                raise NormDriftError(f"norm drifted to {norm!r} at t={t}")
            coeffs = [sch.value(t) for sch in energy_schedules]
            scaled = [p.scaled(c) for p, c in zip(energy_terms, coeffs)]
            rows["t"].append(t)
            rows["energy"].append(float(expectation_array(psi, scaled, n).real))
            rows["norm"].append(norm)
            state = StateVector(reg, psi)
            for name, fn in observers.items():
                rows[name].append(float(fn(state)))
        if s == n_steps:
            break
        psi = prop.step(psi, t, dt)

    energy = np.array(rows["energy"])
    scaled = energy / abs(e_target) if e_target else np.full_like(energy, np.nan)
    extra = {k: np.array(rows[k]) for k in ("p_all0", "p_all1", "fidelity") if k in rows}
    order = np.array(rows["order_prob"]) if "order_prob" in rows else np.full_like(energy, np.nan)
    result = RunResult(
        times=np.array(rows["t"]),
        energy=energy,
        scaled_energy=scaled,
        order_prob=order,
        norm=np.array(rows["norm"]),
        e_target=e_target,
        final_state=StateVector(reg, psi),
        **extra,
    )
    return result


def _dense_ground(h_problem: Sequence[PauliString], register: QubitRegister) -> tuple[float, StateVector]:
    w, v = np.linalg.eigh(dense_matrix(h_problem, register, max_qubits=12))
    return float(w[0]), StateVector(register, v[:, 0])


def _imaginary_time(
    h_problem: Sequence[PauliString],
    register: QubitRegister,
    d_beta: Optional[float],
    tol: float,
    max_sweeps: int,
    seed: int,
) -> tuple[float, StateVector, bool]:
    n = register.n_qubits
    bound = sum(abs(p.coeff) for p in h_problem) or 1.0
    d_beta = 1.0 / bound if d_beta is None else d_beta
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=register.dim) + 1j * rng.normal(size=register.dim)
    psi /= np.linalg.norm(psi)

    def h_apply(v):
        out = np.zeros_like(v)
        for p in h_problem:
            out += apply_pauli_array(v, p, n)
        return out

    energy = float(np.vdot(psi, h_apply(psi)).real)
    for _ in range(max_sweeps):
        psi = psi - d_beta * h_apply(psi)
        psi /= np.linalg.norm(psi)
        new = float(np.vdot(psi, h_apply(psi)).real)
        if abs(new - energy) < tol:
            return new, StateVector(register, psi), True
        energy = new
    return energy, StateVector(register, psi), False


def ground_state_oracle(
    h_problem: Sequence[PauliString],
    register: QubitRegister,
    backend: str = "dense",
    d_beta: Optional[float] = None,
    tol: float = 1e-12,
    max_sweeps: int = 200_000,
    seed: int = 0,
) -> tuple[float, StateVector]:
    """Ground energy of a system-only Hamiltonian.

    ``dense`` diagonalizes exactly; ``imaginary_time`` runs the power
    iteration ``psi <- normalize((1 - d_beta H) psi)`` from a seeded random
    vector and falls back to ``dense`` (with a warning) if it stalls. For
    degenerate ground manifolds the returned vector is arbitrary within it.
    """
    if register.n_ancilla:
        register = register.system_only()
    if register.n_system > 12:
        raise ConfigurationError("ground-state oracle is limited to 12 system qubits")
    if backend == "dense":
        return _dense_ground(h_problem, register)
    if backend != "imaginary_time":
        raise ConfigurationError(f"unknown oracle backend {backend!r}")
    energy, state, converged = _imaginary_time(h_problem, register, d_beta, tol, max_sweeps, seed)
    if not converged:
        warnings.warn("imaginary-time iteration did not converge; using dense diagonalization", RuntimeWarning)
        return _dense_ground(h_problem, register)
    return energy, state
