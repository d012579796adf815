"""Recorded quantities and time-to-solution extraction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .exceptions import ConfigurationError
from .pauli import StateVector, expectation


@dataclass
class RunResult:
    times: np.ndarray
    energy: np.ndarray
    scaled_energy: np.ndarray
    order_prob: np.ndarray
    norm: np.ndarray
    p_all0: Optional[np.ndarray] = None
    p_all1: Optional[np.ndarray] = None
    fidelity: Optional[np.ndarray] = None
    e_target: Optional[float] = None
    t_star: Optional[float] = None
    final_state: Optional[StateVector] = None
    config_echo: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        for name in ("energy", "scaled_energy", "order_prob", "norm", "p_all0", "p_all1", "fidelity"):
            arr = getattr(self, name)
            if arr is not None and len(arr) != n:
                raise ValueError(f"column {name} has {len(arr)} rows, expected {n}")

    @property
    def final_energy(self) -> float:
        return float(self.energy[-1])

    def final_relative_error(self, e_target: Optional[float] = None) -> float:
        e_target = self.e_target if e_target is None else e_target
        return abs(self.final_energy - e_target) / abs(e_target)


def _system_terms_only(state: StateVector, terms) -> None:
    n_sys = state.register.n_system
    for p in terms:
        if p.max_qubit >= n_sys:
            raise ConfigurationError(f"term {p} acts outside the system register")


def reduced_energy(state: StateVector, h, t: float) -> float:
    """``Tr_S(rho_S H_S(t))``, evaluated as ``<psi| H_S(t) (x) I_A |psi>``."""
    terms = h.at(t)
    _system_terms_only(state, terms)
    return expectation(state, terms)


def polarized_probabilities(state: StateVector) -> tuple[float, float]:
    """Probabilities of ``|0...0>_S`` and ``|1...1>_S`` with the ancilla marginalized."""
    block = state.system_block()
    p0 = float(np.sum(np.abs(block[:, 0]) ** 2))
    p1 = float(np.sum(np.abs(block[:, -1]) ** 2))
    return p0, p1


def pfm_probability(state: StateVector) -> float:
    p0, p1 = polarized_probabilities(state)
    return p0 + p1


def odd_parity_probability(state: StateVector) -> float:
    if state.register.n_system != 2:
        raise ConfigurationError("odd-parity probability is defined for 2 system qubits")
    block = state.system_block()
    return float(np.sum(np.abs(block[:, 1]) ** 2) + np.sum(np.abs(block[:, 2]) ** 2))


def ghz_state(n_system: int) -> np.ndarray:
    """X-basis GHZ ``(|+>^N + |->^N)/sqrt(2)`` in the computational basis."""
    idx = np.arange(1 << n_system)
    parity = np.array([bin(i).count("1") & 1 for i in idx])
    amp = 2.0 ** (-n_system / 2) * np.sqrt(2.0)
    return np.where(parity == 0, amp, 0.0).astype(complex)


def ghz_fidelity(state: StateVector) -> float:
    ghz = ghz_state(state.register.n_system)
    overlaps = state.system_block() @ ghz.conj()
    return float(np.sum(np.abs(overlaps) ** 2))


def time_to_solution(
    result: RunResult,
    epsilon: float,
    e_target: Optional[float] = None,
    criterion: str = "sustained",
) -> Optional[float]:
    """Earliest recorded time at which the energy is within ``epsilon*|e_target|`` of the target.

    ``sustained`` requires the band to hold for every later sample, so a run
    that crosses the target and overshoots never qualifies. ``first_arrival``
    returns the first sample inside the band regardless of what follows.
    """
    e_target = result.e_target if e_target is None else e_target
    if e_target is None:
        raise ValueError("time_to_solution needs a target energy")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    energy = np.asarray(result.energy, dtype=float)
    if energy.size == 0:
        raise ValueError("empty energy series")
    inside = np.abs(energy - e_target) <= epsilon * abs(e_target)
    if criterion == "first_arrival":
        hits = np.flatnonzero(inside)
        return float(result.times[hits[0]]) if hits.size else None
    if criterion != "sustained":
        raise ValueError(f"unknown criterion {criterion!r}")
    if not inside[-1]:
        return None
    outside = np.flatnonzero(~inside)
    first = 0 if outside.size == 0 else outside[-1] + 1
    return float(result.times[first])


def default_observers(model: str, n_system: int) -> dict:
    """Column name -> callable(state) for the model's standard observables."""
    if model == "h2":
        return {"order_prob": odd_parity_probability}
    return {
        "p_all0": lambda s: polarized_probabilities(s)[0],
        "p_all1": lambda s: polarized_probabilities(s)[1],
        "order_prob": pfm_probability,
        "fidelity": ghz_fidelity,
    }
